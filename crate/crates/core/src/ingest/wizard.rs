use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::AdapterError;
use crate::schema::{BeliefState, BeliefTriple, Dialogue, DialogueAct, Goal, Speaker};

/// Wizard-of-Oz style record: alternating user/system exchanges with
/// turn-level slot annotations on the user side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WizardRecord {
    pub id: String,
    #[serde(default)]
    pub domains: Vec<String>,
    #[serde(default)]
    pub goal: Option<Goal>,
    pub exchanges: Vec<WizardExchange>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WizardExchange {
    #[serde(default)]
    pub user: Option<String>,
    /// Slot values newly stated in this user turn. Absent means the
    /// exchange carries no state annotation at all.
    #[serde(default)]
    pub user_state: Option<Vec<BeliefTriple>>,
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub system_acts: Option<Vec<DialogueAct>>,
    #[serde(default)]
    pub db_result: Option<u64>,
}

/// Converts a wizard record into a dialogue. Each annotated user turn gets
/// the cumulative state of all annotations so far; later values for the
/// same `(domain, slot)` overwrite earlier ones.
pub fn adapt_wizard_style(raw: &WizardRecord, dataset: &str) -> Result<Dialogue, AdapterError> {
    let err = |reason: String| AdapterError::new(&raw.id, reason);
    if raw.exchanges.is_empty() {
        return Err(err("no exchanges".into()));
    }

    let mut d = Dialogue::new(&raw.id, dataset, &[]);
    let mut state = BeliefState::new();
    let mut domains: BTreeSet<String> = raw
        .domains
        .iter()
        .map(|s| s.trim().to_lowercase())
        .collect();

    for (k, ex) in raw.exchanges.iter().enumerate() {
        let user = ex
            .user
            .as_deref()
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| {
                err(format!(
                    "exchange {k}: missing user utterance (turn {})",
                    d.turns.len()
                ))
            })?;
        let delta = ex.user_state.as_ref();
        if let Some(triples) = delta {
            for t in triples {
                state
                    .set(&t.domain, &t.slot, &t.value)
                    .map_err(|e| err(format!("exchange {k}: {e}")))?;
            }
        }
        let turn = d.push_turn(Speaker::Speaker1, user);
        if delta.is_some() {
            turn.belief = Some(state.clone());
        }

        if let Some(system) = &ex.system {
            if system.trim().is_empty() {
                return Err(err(format!("turn {}: empty system reply", d.turns.len())));
            }
            let turn = d.push_turn(Speaker::Speaker2, system);
            turn.acts = ex.system_acts.clone();
            turn.db_result = ex.db_result;
        }
    }

    if domains.is_empty() {
        domains.extend(state.domains().into_iter().map(str::to_string));
        if let Some(goal) = &raw.goal {
            domains.extend(goal.0.keys().cloned());
        }
    }
    if domains.is_empty() {
        return Err(err("no domains declared or annotated".into()));
    }
    d.domains = domains;
    d.goal = raw.goal.clone();
    Ok(d)
}
