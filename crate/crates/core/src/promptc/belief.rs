//! Text form of dialogue states and dialogue acts.
//!
//! A state renders as `[domain] slot value , slot value [domain] ...` with
//! domains and slots in lexicographic order; the empty state is `none`.

use std::collections::{BTreeMap, BTreeSet};

use crate::schema::{normalize_key, normalize_value, BeliefState, DialogueAct};
use crate::text;

pub const EMPTY_STATE: &str = "none";

pub fn linearize_belief_state(state: &BeliefState) -> String {
    if state.is_empty() {
        return EMPTY_STATE.to_string();
    }
    let mut groups: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (domain, slot, value) in state.iter() {
        groups
            .entry(domain)
            .or_default()
            .push(format!("{slot} {value}"));
    }
    render_groups(groups)
}

fn render_groups<S: AsRef<str>>(groups: BTreeMap<S, Vec<String>>) -> String {
    groups
        .iter()
        .map(|(domain, items)| format!("[{}] {}", domain.as_ref(), items.join(" , ")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Result of a lenient parse: the recovered state and how many malformed
/// segments were discarded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedState {
    pub state: BeliefState,
    pub dropped: usize,
}

/// Recovers a state from linearized or model-generated text.
///
/// Inside a `[domain]` group the slot is the first token of a segment and
/// the value is everything up to the next `,` or `[`. Text outside any
/// group, groups without slots, segments without a value and repeated
/// `(domain, slot)` pairs are dropped and counted; the first value for a
/// pair wins.
pub fn parse_belief_state(input: &str) -> ParsedState {
    let mut out = ParsedState::default();
    let trimmed = input.trim();
    if text::normalize(trimmed) == EMPTY_STATE || trimmed.is_empty() {
        return out;
    }

    let mut rest = match trimmed.find('[') {
        Some(i) => {
            if !trimmed[..i].trim().is_empty() {
                out.dropped += 1;
            }
            &trimmed[i..]
        }
        None => {
            out.dropped += 1;
            return out;
        }
    };

    while let Some(after_open) = rest.strip_prefix('[') {
        let Some(close) = after_open.find(']') else {
            out.dropped += 1;
            break;
        };
        let domain = normalize_key(&after_open[..close]).ok();
        let after_close = &after_open[close + 1..];
        let body_end = after_close.find('[').unwrap_or(after_close.len());
        let body = &after_close[..body_end];
        rest = &after_close[body_end..];

        let mut kept_any = false;
        for segment in body.split(',') {
            let segment = segment.trim();
            if segment.is_empty() {
                continue;
            }
            let Some(domain) = domain.as_deref() else {
                out.dropped += 1;
                continue;
            };
            let (slot_raw, value_raw) = segment
                .split_once(char::is_whitespace)
                .unwrap_or((segment, ""));
            let (Ok(slot), Ok(value)) = (normalize_key(slot_raw), normalize_value(value_raw))
            else {
                out.dropped += 1;
                continue;
            };
            if out.state.contains_key(domain, &slot) {
                out.dropped += 1;
                continue;
            }
            out.state
                .set(domain, &slot, &value)
                .expect("components were normalized above");
            kept_any = true;
        }
        if !kept_any && body.split(',').all(|s| s.trim().is_empty()) {
            // `[domain]` with nothing after it
            out.dropped += 1;
        }
    }
    out
}

/// Renders system acts as `[domain] act slot , act slot ...`, grouped and
/// sorted like dialogue states. Duplicate acts collapse; an empty list is
/// `none`.
pub fn linearize_acts(acts: &[DialogueAct]) -> String {
    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for act in acts {
        let domain = act.domain.trim().to_lowercase();
        let mut item = act.act.trim().to_lowercase();
        if let Some(slot) = act.slot.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
            item.push(' ');
            item.push_str(&slot.to_lowercase());
        }
        groups.entry(domain).or_default().insert(item);
    }
    if groups.is_empty() {
        return EMPTY_STATE.to_string();
    }
    render_groups(
        groups
            .into_iter()
            .map(|(d, items)| (d, items.into_iter().collect()))
            .collect(),
    )
}
