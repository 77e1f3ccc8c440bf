use serde::{Deserialize, Serialize};

use super::AdapterError;
use crate::schema::{Dialogue, Speaker, OPEN_DOMAIN};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceTurn {
    pub speaker: String,
    pub text: String,
}

/// Dialogue/summary pair as found in interview-summary corpora.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub turns: Vec<SourceTurn>,
    pub summary: String,
    #[serde(default)]
    pub domains: Vec<String>,
}

/// Converts a summary pair. The first distinct source speaker becomes
/// speaker1; every other speaker is folded into speaker2.
pub fn adapt_summ_pair(
    raw: &SummRecord,
    dataset: &str,
    ordinal: usize,
) -> Result<Dialogue, AdapterError> {
    let id = raw
        .id
        .clone()
        .unwrap_or_else(|| format!("{dataset}-{ordinal}"));
    if raw.turns.is_empty() {
        return Err(AdapterError::new(&id, "no turns"));
    }
    if raw.summary.trim().is_empty() {
        return Err(AdapterError::new(&id, "empty summary"));
    }

    let first_speaker = raw.turns[0].speaker.trim();
    let domains: Vec<&str> = if raw.domains.is_empty() {
        vec![OPEN_DOMAIN]
    } else {
        raw.domains.iter().map(String::as_str).collect()
    };
    let mut d = Dialogue::new(&id, dataset, &domains);
    for (k, t) in raw.turns.iter().enumerate() {
        if t.text.trim().is_empty() {
            return Err(AdapterError::new(&id, format!("turn {k}: empty text")));
        }
        let speaker = if t.speaker.trim() == first_speaker {
            Speaker::Speaker1
        } else {
            Speaker::Speaker2
        };
        d.push_turn(speaker, t.text.trim());
    }
    d.summary = Some(raw.summary.trim().to_string());
    Ok(d)
}
