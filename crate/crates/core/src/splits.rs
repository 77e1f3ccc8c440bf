//! Deterministic low-resource, k-per-intent and leave-one-domain-out splits.
//!
//! All sampling goes through [`SeededRng`], so a manifest is reproducible
//! from its protocol, parameters, seed and the source corpus alone.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{fnv1a, SeededRng};
use crate::schema::Dialogue;

/// Source dialogues drawn into the validation partition of a
/// leave-one-domain-out split.
pub const DOMAIN_TRANSFER_VALIDATION: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Percent,
    PerIntent,
    DomainTransfer,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Percent => "percent",
            Protocol::PerIntent => "per_intent",
            Protocol::DomainTransfer => "domain_transfer",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Protocol::Percent,
            Protocol::PerIntent,
            Protocol::DomainTransfer,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| Error::Invalid(format!("unknown protocol {s:?}")))
    }
}

/// Granularity of a percent split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitUnit {
    #[default]
    Dialogue,
    /// Individual turns, identified as `{dialogue_id}#{turn_index}`.
    Turn,
}

impl FromStr for SplitUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dialogue" => Ok(SplitUnit::Dialogue),
            "turn" => Ok(SplitUnit::Turn),
            _ => Err(Error::Invalid(format!("unknown split unit {s:?}"))),
        }
    }
}

/// Sampling units of a corpus, in corpus order.
pub fn unit_ids(dialogues: &[Dialogue], unit: SplitUnit) -> Vec<String> {
    match unit {
        SplitUnit::Dialogue => dialogues.iter().map(|d| d.id.clone()).collect(),
        SplitUnit::Turn => dialogues
            .iter()
            .flat_map(|d| d.turns.iter().map(move |t| format!("{}#{}", d.id, t.index)))
            .collect(),
    }
}

/// Number of ids a percent split keeps out of `n`: `floor(n * pct / 100)`,
/// at least 1.
pub fn percent_size(n: usize, pct: f64) -> usize {
    let exact = n as f64 * pct / 100.0;
    ((exact + 1e-9).floor() as usize).clamp(1, n.max(1))
}

/// Seeded uniform sample without replacement of `floor(|ids| * pct / 100)`
/// ids (at least one), returned in their original order.
pub fn percent_subsample<S: AsRef<str>>(ids: &[S], pct: f64, seed: u64) -> Result<Vec<String>> {
    if !(pct > 0.0 && pct <= 100.0) {
        return Err(Error::InvalidPercentage(pct));
    }
    if ids.is_empty() {
        return Err(Error::EmptyIds);
    }
    let k = percent_size(ids.len(), pct);
    let picked = SeededRng::new(seed).sample_sorted(ids.len(), k);
    Ok(picked
        .into_iter()
        .map(|i| ids[i].as_ref().to_string())
        .collect())
}

/// For every intent label, a seeded sample of `min(k, available)` of its
/// examples; the union comes back in original order. Each label draws
/// from its own generator stream, so adding a label leaves the others'
/// selections unchanged.
pub fn k_per_intent<S: AsRef<str>, L: AsRef<str>>(
    examples: &[(S, L)],
    k: usize,
    seed: u64,
) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, (_, label)) in examples.iter().enumerate() {
        by_label.entry(label.as_ref()).or_default().push(i);
    }
    let mut keep = BTreeSet::new();
    for (label, positions) in &by_label {
        let mut rng = SeededRng::with_stream(seed, fnv1a(label.as_bytes()));
        let take = k.min(positions.len());
        keep.extend(
            rng.sample_sorted(positions.len(), take)
                .into_iter()
                .map(|j| positions[j]),
        );
    }
    Ok(keep
        .into_iter()
        .map(|i| examples[i].0.as_ref().to_string())
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainTransferSplit {
    pub source_train: Vec<String>,
    pub source_validation: Vec<String>,
    pub target_test: Vec<String>,
    /// Multi-domain dialogues left out of every partition.
    pub excluded: usize,
}

/// Leave-one-domain-out split. Multi-domain dialogues are dropped; the
/// single-domain dialogues of `target` form the test partition; 200
/// seeded picks from the remaining source pool form validation and the
/// rest of the pool is training data. Partitions keep corpus order.
pub fn leave_one_domain_out(
    dialogues: &[Dialogue],
    target: &str,
    seed: u64,
) -> Result<DomainTransferSplit> {
    let mut split = DomainTransferSplit::default();
    let mut pool = Vec::new();
    for d in dialogues {
        if !d.is_single_domain() {
            split.excluded += 1;
        } else if d.domains.contains(target) {
            split.target_test.push(d.id.clone());
        } else {
            pool.push(d.id.clone());
        }
    }
    if split.target_test.is_empty() {
        return Err(Error::UnknownDomain(target.to_string()));
    }
    if pool.len() < DOMAIN_TRANSFER_VALIDATION {
        return Err(Error::InsufficientSource {
            required: DOMAIN_TRANSFER_VALIDATION,
            available: pool.len(),
        });
    }
    let picked: HashSet<usize> = SeededRng::new(seed)
        .sample_indices(pool.len(), DOMAIN_TRANSFER_VALIDATION)
        .into_iter()
        .collect();
    for (i, id) in pool.into_iter().enumerate() {
        if picked.contains(&i) {
            split.source_validation.push(id);
        } else {
            split.source_train.push(id);
        }
    }
    Ok(split)
}

/// A split written to disk: how it was drawn and the member ids of each
/// partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub protocol: Protocol,
    pub seed: u64,
    pub unit: SplitUnit,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub partitions: BTreeMap<String, Vec<String>>,
}

impl SplitManifest {
    /// Checks partitions are disjoint and, when `source` is given, that
    /// every member is one of its ids.
    pub fn validate(&self, source: Option<&HashSet<String>>) -> Result<()> {
        let mut seen: HashSet<&str> = HashSet::new();
        for (name, ids) in &self.partitions {
            for id in ids {
                if !seen.insert(id) {
                    return Err(Error::Invalid(format!(
                        "id {id} appears twice (partition {name})"
                    )));
                }
                if source.is_some_and(|s| !s.contains(id)) {
                    return Err(Error::Invalid(format!(
                        "id {id} in partition {name} is not in the source corpus"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn partition(&self, name: &str) -> Result<&[String]> {
        self.partitions
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Invalid(format!("manifest has no partition {name:?}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization is infallible")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Membership test for one manifest partition, at dialogue or turn
/// granularity.
#[derive(Clone, Debug)]
pub struct Selection {
    unit: SplitUnit,
    ids: HashSet<String>,
    dialogues: HashSet<String>,
}

impl Selection {
    pub fn new(manifest: &SplitManifest, partition: &str) -> Result<Self> {
        let ids: HashSet<String> = manifest.partition(partition)?.iter().cloned().collect();
        let dialogues = match manifest.unit {
            SplitUnit::Dialogue => ids.clone(),
            SplitUnit::Turn => ids
                .iter()
                .map(|id| {
                    id.rsplit_once('#')
                        .map_or(id.as_str(), |(d, _)| d)
                        .to_string()
                })
                .collect(),
        };
        Ok(Selection {
            unit: manifest.unit,
            ids,
            dialogues,
        })
    }

    /// Whether the dialogue contributes anything to the selection.
    pub fn has_dialogue(&self, dialogue_id: &str) -> bool {
        self.dialogues.contains(dialogue_id)
    }

    /// Whether an example anchored at `turn` (or at the whole dialogue
    /// when `None`) is selected. Dialogue-level examples of a turn-level
    /// selection are kept when any of the dialogue's turns is.
    pub fn contains(&self, dialogue_id: &str, turn: Option<usize>) -> bool {
        match (self.unit, turn) {
            (SplitUnit::Dialogue, _) | (SplitUnit::Turn, None) => self.has_dialogue(dialogue_id),
            (SplitUnit::Turn, Some(t)) => self.ids.contains(&format!("{dialogue_id}#{t}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Speaker;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("id{i:05}")).collect()
    }

    #[test]
    fn percent_sizes() {
        assert_eq!(percent_subsample(&ids(1000), 1.0, 7).unwrap().len(), 10);
        assert_eq!(percent_subsample(&ids(8438), 1.0, 7).unwrap().len(), 84);
        assert_eq!(percent_subsample(&ids(1000), 20.0, 7).unwrap().len(), 200);
        assert_eq!(percent_subsample(&ids(30), 1.0, 7).unwrap().len(), 1);
        assert_eq!(percent_subsample(&ids(5), 100.0, 7).unwrap(), ids(5));
        for n in 1..300 {
            for pct in [1.0, 5.0, 10.0, 20.0, 33.3] {
                let want = ((n as f64 * pct / 100.0).floor() as usize).max(1);
                assert_eq!(percent_size(n, pct), want, "n={n} pct={pct}");
            }
        }
    }

    #[test]
    fn percent_is_ordered_and_deterministic() {
        let all = ids(500);
        let a = percent_subsample(&all, 5.0, 13).unwrap();
        assert_eq!(a, percent_subsample(&all, 5.0, 13).unwrap());
        assert_ne!(a, percent_subsample(&all, 5.0, 14).unwrap());
        let pos: Vec<usize> = a
            .iter()
            .map(|id| all.iter().position(|x| x == id).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn percent_errors() {
        assert!(matches!(
            percent_subsample::<String>(&[], 5.0, 1),
            Err(Error::EmptyIds)
        ));
        assert!(matches!(
            percent_subsample(&ids(3), 0.0, 1),
            Err(Error::InvalidPercentage(_))
        ));
        assert!(percent_subsample(&ids(3), 100.5, 1).is_err());
        assert!(percent_subsample(&ids(3), f64::NAN, 1).is_err());
    }

    #[test]
    fn per_intent_counts() {
        let mut ex = Vec::new();
        for intent in 0..77 {
            for j in 0..(10 + intent % 5) {
                ex.push((format!("e{intent}-{j}"), format!("intent{intent}")));
            }
        }
        assert_eq!(k_per_intent(&ex, 10, 3).unwrap().len(), 770);

        let small = vec![("a", "x"), ("b", "x"), ("c", "x"), ("d", "y")];
        assert_eq!(
            k_per_intent(&small, 10, 3).unwrap(),
            vec!["a", "b", "c", "d"]
        );

        let five: Vec<(String, String)> = (0..25)
            .map(|i| (format!("e{i}"), format!("l{}", i % 5)))
            .collect();
        let picked = k_per_intent(&five, 1, 9).unwrap();
        assert_eq!(picked.len(), 5);
        let labels: BTreeSet<_> = picked
            .iter()
            .map(|id| five.iter().find(|(e, _)| e == id).unwrap().1.clone())
            .collect();
        assert_eq!(labels.len(), 5);
        assert!(matches!(k_per_intent(&small, 0, 1), Err(Error::InvalidK)));
    }

    #[test]
    fn per_intent_labels_are_independent() {
        let base: Vec<(String, &str)> = (0..40)
            .map(|i| (format!("e{i}"), if i % 2 == 0 { "a" } else { "b" }))
            .collect();
        let mut extended = base.clone();
        extended.extend((0..10).map(|i| (format!("z{i}"), "c")));
        let a: Vec<String> = k_per_intent(&base, 5, 1).unwrap();
        let b: Vec<String> = k_per_intent(&extended, 5, 1)
            .unwrap()
            .into_iter()
            .filter(|id| !id.starts_with('z'))
            .collect();
        assert_eq!(a, b);
    }

    fn corpus(per_domain: usize) -> Vec<Dialogue> {
        let mut out = Vec::new();
        for domain in ["train", "taxi", "restaurant", "hotel", "attraction"] {
            for i in 0..per_domain {
                let mut d = Dialogue::new(format!("{domain}{i}"), "toy", &[domain]);
                d.push_turn(Speaker::Speaker1, "hello");
                out.push(d);
            }
        }
        let mut multi = Dialogue::new("multi0", "toy", &["hotel", "taxi"]);
        multi.push_turn(Speaker::Speaker1, "hello");
        out.push(multi);
        out
    }

    #[test]
    fn domain_transfer_partitions() {
        let c = corpus(250);
        let s = leave_one_domain_out(&c, "taxi", 5).unwrap();
        assert_eq!(s.excluded, 1);
        assert_eq!(s.target_test.len(), 250);
        assert!(s.target_test.iter().all(|id| id.starts_with("taxi")));
        assert_eq!(s.source_validation.len(), 200);
        assert_eq!(s.source_train.len(), 800);
        assert!(s
            .source_train
            .iter()
            .chain(&s.source_validation)
            .all(|id| !id.starts_with("taxi")));
        assert!(!s
            .source_train
            .iter()
            .chain(&s.source_validation)
            .chain(&s.target_test)
            .any(|id| id == "multi0"));
        assert_eq!(s, leave_one_domain_out(&c, "taxi", 5).unwrap());
    }

    #[test]
    fn domain_transfer_errors() {
        assert!(matches!(
            leave_one_domain_out(&corpus(250), "police", 1),
            Err(Error::UnknownDomain(_))
        ));
        let err = leave_one_domain_out(&corpus(40), "taxi", 1).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientSource {
                required: 200,
                available: 160
            }
        ));
        assert!(err.to_string().contains("short by 40"));
    }

    #[test]
    fn manifest_round_trip_and_selection() {
        let c = corpus(2);
        let turns = unit_ids(&c, SplitUnit::Turn);
        assert_eq!(turns[0], "train0#0");
        let m = SplitManifest {
            protocol: Protocol::Percent,
            seed: 13,
            unit: SplitUnit::Turn,
            parameters: BTreeMap::from([("pct".to_string(), serde_json::json!(5.0))]),
            partitions: BTreeMap::from([("train".to_string(), vec!["taxi1#0".to_string()])]),
        };
        let source: HashSet<String> = turns.into_iter().collect();
        m.validate(Some(&source)).unwrap();
        let back: SplitManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let sel = Selection::new(&m, "train").unwrap();
        assert!(sel.contains("taxi1", Some(0)));
        assert!(!sel.contains("taxi1", Some(1)));
        assert!(sel.contains("taxi1", None));
        assert!(!sel.contains("taxi0", None));
        assert!(Selection::new(&m, "test").is_err());

        let mut bad = m.clone();
        bad.partitions.insert("test".into(), vec!["taxi1#0".into()]);
        assert!(bad.validate(None).is_err());
        bad.partitions.insert("test".into(), vec!["nope".into()]);
        assert!(bad.validate(Some(&source)).is_err());
    }
}
