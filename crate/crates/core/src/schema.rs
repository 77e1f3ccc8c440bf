//! Canonical dialogue data model.
//!
//! Every other module reads and writes these types. The on-disk form is one
//! JSON object per line with snake_case field names; optional fields are
//! omitted when absent.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// Domain sentinel for open-domain corpora.
pub const OPEN_DOMAIN: &str = "open";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Speaker {
    /// The user side of a task-oriented dialogue.
    #[serde(rename = "speaker1")]
    Speaker1,
    /// The system side.
    #[serde(rename = "speaker2")]
    Speaker2,
}

impl Speaker {
    /// Role prefix used when rendering dialogue context.
    pub fn role(self) -> &'static str {
        match self {
            Speaker::Speaker1 => "user",
            Speaker::Speaker2 => "system",
        }
    }
}

/// One `(domain, slot, value)` constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeliefTriple {
    pub domain: String,
    pub slot: String,
    pub value: String,
}

impl BeliefTriple {
    pub fn new(
        domain: impl Into<String>,
        slot: impl Into<String>,
        value: impl Into<String>,
    ) -> Self {
        BeliefTriple {
            domain: domain.into(),
            slot: slot.into(),
            value: value.into(),
        }
    }
}

/// Normalizes a domain or slot name. Keys are single lowercase tokens that
/// cannot contain the belief-state delimiters `[`, `]` or `,`.
pub fn normalize_key(raw: &str) -> Result<String> {
    let key = raw.trim().to_lowercase();
    if key.is_empty() {
        return Err(Error::InvalidBeliefState("empty domain or slot".into()));
    }
    if key
        .chars()
        .any(|c| c.is_whitespace() || matches!(c, '[' | ']' | ','))
    {
        return Err(Error::InvalidBeliefState(format!(
            "{key:?} is not a single delimiter-free token"
        )));
    }
    Ok(key)
}

/// Normalizes a slot value. Values are non-empty after normalization and
/// cannot contain `,` or `[`, which terminate a value in linearized form.
pub fn normalize_value(raw: &str) -> Result<String> {
    let value = text::normalize(raw);
    if value.is_empty() {
        return Err(Error::InvalidBeliefState(format!(
            "value {raw:?} is empty after normalization"
        )));
    }
    if value.contains([',', '[']) {
        return Err(Error::InvalidBeliefState(format!(
            "value {value:?} contains a delimiter"
        )));
    }
    Ok(value)
}

/// A dialogue state: at most one normalized value per `(domain, slot)`.
///
/// Backed by an ordered map, so equality ignores insertion order and
/// iteration is always sorted by domain then slot.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<BeliefTriple>", into = "Vec<BeliefTriple>")]
pub struct BeliefState {
    slots: BTreeMap<(String, String), String>,
}

impl BeliefState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state from triples, rejecting a second value for the same
    /// `(domain, slot)`.
    pub fn from_triples<I>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = BeliefTriple>,
    {
        let mut state = BeliefState::new();
        for t in triples {
            let key = (normalize_key(&t.domain)?, normalize_key(&t.slot)?);
            let value = normalize_value(&t.value)?;
            if state.slots.contains_key(&key) {
                return Err(Error::InvalidBeliefState(format!(
                    "two values for ({}, {})",
                    key.0, key.1
                )));
            }
            state.slots.insert(key, value);
        }
        Ok(state)
    }

    /// Sets a value, replacing any previous value for the pair.
    pub fn set(&mut self, domain: &str, slot: &str, value: &str) -> Result<Option<String>> {
        let key = (normalize_key(domain)?, normalize_key(slot)?);
        let value = normalize_value(value)?;
        Ok(self.slots.insert(key, value))
    }

    pub fn get(&self, domain: &str, slot: &str) -> Option<&str> {
        self.slots
            .get(&(domain.to_string(), slot.to_string()))
            .map(String::as_str)
    }

    pub(crate) fn contains_key(&self, domain: &str, slot: &str) -> bool {
        self.slots
            .contains_key(&(domain.to_string(), slot.to_string()))
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &BeliefState) {
        for ((d, s), v) in &other.slots {
            self.slots.insert((d.clone(), s.clone()), v.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// `(domain, slot, value)` in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.slots
            .iter()
            .map(|((d, s), v)| (d.as_str(), s.as_str(), v.as_str()))
    }

    pub fn domains(&self) -> BTreeSet<&str> {
        self.slots.keys().map(|(d, _)| d.as_str()).collect()
    }

    /// Constraints of one domain as `slot -> value`.
    pub fn domain_constraints(&self, domain: &str) -> BTreeMap<String, String> {
        self.iter()
            .filter(|(d, _, _)| *d == domain)
            .map(|(_, s, v)| (s.to_string(), v.to_string()))
            .collect()
    }

    pub fn triples(&self) -> Vec<BeliefTriple> {
        self.iter()
            .map(|(d, s, v)| BeliefTriple::new(d, s, v))
            .collect()
    }
}

impl TryFrom<Vec<BeliefTriple>> for BeliefState {
    type Error = Error;

    fn try_from(triples: Vec<BeliefTriple>) -> Result<Self> {
        BeliefState::from_triples(triples)
    }
}

impl From<BeliefState> for Vec<BeliefTriple> {
    fn from(state: BeliefState) -> Self {
        state.triples()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DialogueAct {
    pub act: String,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub speaker: Speaker,
    pub text: String,
    /// Cumulative dialogue state after this (user) turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief: Option<BeliefState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acts: Option<Vec<DialogueAct>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<String>,
    /// Number of database entities matching the state at this turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db_result: Option<u64>,
}

impl Turn {
    pub fn new(index: usize, speaker: Speaker, text: impl Into<String>) -> Self {
        Turn {
            index,
            speaker,
            text: text.into(),
            belief: None,
            acts: None,
            intent: None,
            db_result: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainGoal {
    #[serde(default)]
    pub constraints: BTreeMap<String, String>,
    #[serde(default)]
    pub requestables: BTreeSet<String>,
    #[serde(default)]
    pub entity_required: bool,
}

/// User goal keyed by domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Goal(pub BTreeMap<String, DomainGoal>);

impl Goal {
    pub fn domains(&self) -> impl Iterator<Item = (&str, &DomainGoal)> {
        self.0.iter().map(|(d, g)| (d.as_str(), g))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqaItem {
    pub question: String,
    pub options: Vec<String>,
    pub answer_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NupCandidate {
    pub text: String,
    pub is_next: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub dataset: String,
    pub domains: BTreeSet<String>,
    pub turns: Vec<Turn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Goal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcqa: Option<Vec<McqaItem>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nup_candidates: Option<Vec<NupCandidate>>,
}

impl Dialogue {
    pub fn new(id: impl Into<String>, dataset: impl Into<String>, domains: &[&str]) -> Self {
        Dialogue {
            id: id.into(),
            dataset: dataset.into(),
            domains: domains.iter().map(|d| d.to_string()).collect(),
            turns: Vec::new(),
            goal: None,
            summary: None,
            mcqa: None,
            nup_candidates: None,
        }
    }

    /// Appends a turn with the next index.
    pub fn push_turn(&mut self, speaker: Speaker, text: impl Into<String>) -> &mut Turn {
        let index = self.turns.len();
        self.turns.push(Turn::new(index, speaker, text));
        self.turns.last_mut().expect("just pushed")
    }

    pub fn is_single_domain(&self) -> bool {
        self.domains.len() == 1
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("dialogue serialization is infallible")
    }
}

/// The seven pre-training tasks, in the fixed compilation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Nlg,
    Dst,
    Pol,
    Ic,
    Mcqa,
    Nup,
    Summ,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::Nlg,
        TaskKind::Dst,
        TaskKind::Pol,
        TaskKind::Ic,
        TaskKind::Mcqa,
        TaskKind::Nup,
        TaskKind::Summ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Nlg => "nlg",
            TaskKind::Dst => "dst",
            TaskKind::Pol => "pol",
            TaskKind::Ic => "ic",
            TaskKind::Mcqa => "mcqa",
            TaskKind::Nup => "nup",
            TaskKind::Summ => "summ",
        }
    }

    /// Parses a comma-separated task list such as `dst,nlg`.
    pub fn parse_list(list: &str) -> Result<BTreeSet<TaskKind>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_lowercase();
        TaskKind::ALL
            .into_iter()
            .find(|t| t.as_str() == lower)
            .ok_or_else(|| Error::Invalid(format!("unknown task {s:?}")))
    }
}

/// A broken invariant: which field, which rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Checks every dialogue-level invariant. An empty list means the dialogue
/// is well formed.
pub fn validate_dialogue(d: &Dialogue) -> Vec<Violation> {
    let mut out = Vec::new();

    if d.id.trim().is_empty() {
        out.push(Violation::new("id", "id non-empty"));
    }
    if d.dataset.trim().is_empty() {
        out.push(Violation::new("dataset", "dataset non-empty"));
    }
    if d.domains.is_empty() {
        out.push(Violation::new("domains", "domains non-empty"));
    }
    for domain in &d.domains {
        if domain.trim().is_empty() {
            out.push(Violation::new("domains", "domain names non-empty"));
        }
    }
    if d.turns.is_empty() {
        out.push(Violation::new("turns", "turns non-empty"));
    }

    for (pos, turn) in d.turns.iter().enumerate() {
        let field = |name: &str| format!("turns[{pos}].{name}");
        if turn.index != pos {
            out.push(Violation::new(
                field("index"),
                format!("index equals position (found {})", turn.index),
            ));
        }
        if turn.text.trim().is_empty() {
            out.push(Violation::new(field("text"), "text non-empty"));
        }
        if turn.belief.is_some() && turn.speaker != Speaker::Speaker1 {
            out.push(Violation::new(
                field("belief"),
                "belief only on speaker1 turns",
            ));
        }
        if let Some(acts) = &turn.acts {
            if turn.speaker != Speaker::Speaker2 {
                out.push(Violation::new(field("acts"), "acts only on speaker2 turns"));
            }
            for (k, act) in acts.iter().enumerate() {
                if act.act.trim().is_empty() || act.domain.trim().is_empty() {
                    out.push(Violation::new(
                        format!("turns[{pos}].acts[{k}]"),
                        "act and domain non-empty",
                    ));
                }
            }
        }
        if matches!(&turn.intent, Some(label) if label.trim().is_empty()) {
            out.push(Violation::new(field("intent"), "intent label non-empty"));
        }
    }

    if let Some(goal) = &d.goal {
        for (domain, g) in goal.domains() {
            if domain.trim().is_empty() {
                out.push(Violation::new("goal", "goal domain non-empty"));
            }
            if g.constraints.keys().any(|s| s.trim().is_empty())
                || g.requestables.iter().any(|s| s.trim().is_empty())
            {
                out.push(Violation::new(
                    format!("goal.{domain}"),
                    "goal slot names non-empty",
                ));
            }
        }
    }

    if matches!(&d.summary, Some(s) if s.trim().is_empty()) {
        out.push(Violation::new("summary", "summary non-empty"));
    }

    if let Some(items) = &d.mcqa {
        for (k, item) in items.iter().enumerate() {
            if item.question.trim().is_empty() {
                out.push(Violation::new(
                    format!("mcqa[{k}].question"),
                    "question non-empty",
                ));
            }
            if item.options.len() < 2 {
                out.push(Violation::new(
                    format!("mcqa[{k}].options"),
                    "at least 2 options",
                ));
            }
            if item.options.iter().any(|o| o.trim().is_empty()) {
                out.push(Violation::new(
                    format!("mcqa[{k}].options"),
                    "options non-empty",
                ));
            }
            if item.answer_index >= item.options.len() {
                out.push(Violation::new(
                    format!("mcqa[{k}].answer_index"),
                    format!(
                        "answer_index < number of options ({} >= {})",
                        item.answer_index,
                        item.options.len()
                    ),
                ));
            }
        }
    }

    if let Some(cands) = &d.nup_candidates {
        for (k, c) in cands.iter().enumerate() {
            if c.text.trim().is_empty() {
                out.push(Violation::new(
                    format!("nup_candidates[{k}].text"),
                    "candidate non-empty",
                ));
            }
        }
    }

    out
}

/// Ids that occur more than once, in first-seen order.
pub fn duplicate_ids(dialogues: &[Dialogue]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for d in dialogues {
        if !seen.insert(d.id.as_str()) && !dups.contains(&d.id) {
            dups.push(d.id.clone());
        }
    }
    dups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_turns() -> Dialogue {
        let mut d = Dialogue::new("d1", "toy", &["restaurant"]);
        d.push_turn(Speaker::Speaker1, "i want italian food");
        d.push_turn(Speaker::Speaker2, "sure , which area ?");
        d
    }

    #[test]
    fn well_formed_dialogue_has_no_violations() {
        assert!(validate_dialogue(&two_turns()).is_empty());
    }

    #[test]
    fn empty_turn_text_is_named() {
        let mut d = two_turns();
        d.turns[1].text = "   ".into();
        let v = validate_dialogue(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "turns[1].text");
        assert!(v[0].rule.contains("text non-empty"));
    }

    #[test]
    fn answer_index_bound() {
        let mut d = two_turns();
        d.mcqa = Some(vec![McqaItem {
            question: "what food?".into(),
            options: vec!["thai".into(), "italian".into()],
            answer_index: 2,
        }]);
        let v = validate_dialogue(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "mcqa[0].answer_index");
    }

    #[test]
    fn misplaced_index_and_annotations() {
        let mut d = two_turns();
        d.turns[0].index = 3;
        d.turns[1].belief = Some(BeliefState::new());
        let fields: Vec<_> = validate_dialogue(&d).into_iter().map(|v| v.field).collect();
        assert_eq!(fields, vec!["turns[0].index", "turns[1].belief"]);
    }

    #[test]
    fn empty_turn_list() {
        let d = Dialogue::new("d", "toy", &["open"]);
        assert_eq!(validate_dialogue(&d)[0].field, "turns");
    }

    #[test]
    fn belief_state_equality_ignores_order() {
        let a = BeliefState::from_triples([
            BeliefTriple::new("restaurant", "food", "italian"),
            BeliefTriple::new("hotel", "stars", "4"),
        ])
        .unwrap();
        let b = BeliefState::from_triples([
            BeliefTriple::new("hotel", "stars", "4"),
            BeliefTriple::new("restaurant", "food", "italian"),
        ])
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn belief_state_rejects_duplicates_and_bad_tokens() {
        assert!(BeliefState::from_triples([
            BeliefTriple::new("r", "food", "thai"),
            BeliefTriple::new("r", "food", "italian"),
        ])
        .is_err());
        assert!(BeliefState::from_triples([BeliefTriple::new("r", "price range", "x")]).is_err());
        assert!(BeliefState::from_triples([BeliefTriple::new("r", "food", " ?? ")]).is_err());
        assert!(BeliefState::from_triples([BeliefTriple::new("", "food", "x")]).is_err());
    }

    #[test]
    fn belief_values_are_normalized() {
        let mut s = BeliefState::new();
        s.set("Restaurant", "Food", "  Italian  Food. ").unwrap();
        assert_eq!(s.get("restaurant", "food"), Some("italian food"));
    }

    #[test]
    fn task_kind_parses_lists() {
        let set = TaskKind::parse_list("dst, NLG").unwrap();
        assert_eq!(
            set.into_iter().collect::<Vec<_>>(),
            vec![TaskKind::Nlg, TaskKind::Dst]
        );
        assert!(TaskKind::parse_list("dst,qa").is_err());
    }

    #[test]
    fn json_omits_absent_fields() {
        let line = two_turns().to_json_line();
        assert!(!line.contains("goal"));
        assert!(!line.contains("belief"));
        let back: Dialogue = serde_json::from_str(&line).unwrap();
        assert_eq!(back, two_turns());
    }

    #[test]
    fn duplicate_ids_reported_once() {
        let d = two_turns();
        let dups = duplicate_ids(&[d.clone(), d.clone(), d]);
        assert_eq!(dups, vec!["d1".to_string()]);
    }
}
