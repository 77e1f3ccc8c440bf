use std::collections::BTreeMap;

use serde::Serialize;

use super::predictions::PredictionSet;
use crate::promptc::parse_belief_state;
use crate::schema::{BeliefState, Dialogue, Speaker};

/// Gold states keyed by `(dialogue id, turn index)`.
pub type GoldStates = BTreeMap<(String, usize), BeliefState>;

/// Every annotated speaker1 turn of `dialogues`.
pub fn gold_states(dialogues: &[Dialogue]) -> GoldStates {
    dialogues
        .iter()
        .flat_map(|d| {
            d.turns
                .iter()
                .filter_map(move |t| match (&t.belief, t.speaker) {
                    (Some(state), Speaker::Speaker1) => {
                        Some(((d.id.clone(), t.index), state.clone()))
                    }
                    _ => None,
                })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct JgaCounts {
    pub correct: usize,
    pub total: usize,
    /// Annotated turns with no prediction; each scores 0.
    pub missing: usize,
    /// Malformed segments discarded while parsing predictions.
    pub dropped_segments: usize,
}

impl JgaCounts {
    /// 0-100.
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.total as f64
        }
    }
}

/// Turn-level joint goal accuracy: a turn counts iff the parsed predicted
/// state equals the gold state as a set.
pub fn joint_goal_accuracy(gold: &GoldStates, preds: &PredictionSet) -> JgaCounts {
    let mut c = JgaCounts::default();
    for ((id, turn), state) in gold {
        c.total += 1;
        let Some(text) = preds.get(id, *turn) else {
            c.missing += 1;
            continue;
        };
        let parsed = parse_belief_state(text);
        c.dropped_segments += parsed.dropped;
        if &parsed.state == state {
            c.correct += 1;
        }
    }
    c
}
