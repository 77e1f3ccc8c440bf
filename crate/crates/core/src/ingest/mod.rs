//! Dataset ingestion: the canonical loader plus adapters that turn
//! third-party record shapes into [`Dialogue`]s.
//!
//! Every adapter output is run through [`validate_dialogue`] before it is
//! accepted; anything that fails is logged as a [`Rejection`] and
//! processing continues.

mod canonical;
mod intent;
mod summ;
mod wizard;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{validate_dialogue, Dialogue, TaskKind};

pub use canonical::{load_canonical, read_canonical};
pub use intent::{adapt_intent_table, parse_intent_row, IntentRow};
pub use summ::{adapt_summ_pair, SourceTurn, SummRecord};
pub use wizard::{adapt_wizard_style, WizardExchange, WizardRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    Wizard,
    IntentTable,
    SummPair,
    Canonical,
}

impl AdapterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AdapterKind::Wizard => "wizard",
            AdapterKind::IntentTable => "intent_table",
            AdapterKind::SummPair => "summ_pair",
            AdapterKind::Canonical => "canonical",
        }
    }
}

impl fmt::Display for AdapterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdapterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wizard" => Ok(AdapterKind::Wizard),
            "intent_table" => Ok(AdapterKind::IntentTable),
            "summ_pair" => Ok(AdapterKind::SummPair),
            "canonical" => Ok(AdapterKind::Canonical),
            other => Err(Error::Invalid(format!(
                "unknown adapter {other:?} (expected wizard, intent_table, summ_pair or canonical)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainCount {
    Open,
    #[serde(untagged)]
    Count(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub tasks: BTreeSet<TaskKind>,
    pub adapter: AdapterKind,
    pub domain_count: DomainCount,
}

impl DatasetDescriptor {
    pub fn new(
        name: &str,
        tasks: &[TaskKind],
        adapter: AdapterKind,
        domain_count: DomainCount,
    ) -> Self {
        DatasetDescriptor {
            name: name.to_string(),
            tasks: tasks.iter().copied().collect(),
            adapter,
            domain_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Invalid("dataset name is empty".into()));
        }
        if self.tasks.is_empty() {
            return Err(Error::Invalid(format!(
                "dataset {} declares no tasks",
                self.name
            )));
        }
        Ok(())
    }
}

/// The fifteen pre-training datasets with their task annotations and
/// domain counts, mapped to the adapter that reads them.
pub fn builtin_datasets() -> Vec<DatasetDescriptor> {
    use AdapterKind::*;
    use DomainCount::*;
    use TaskKind::*;
    vec![
        DatasetDescriptor::new("metalwoz", &[Nlg], Wizard, Count(47)),
        DatasetDescriptor::new("mutual", &[Mcqa], Canonical, Open),
        DatasetDescriptor::new("dream", &[Mcqa], Canonical, Open),
        DatasetDescriptor::new("snips", &[Ic], IntentTable, Count(9)),
        DatasetDescriptor::new("clinc", &[Ic], IntentTable, Count(10)),
        DatasetDescriptor::new("atis", &[Ic], IntentTable, Count(1)),
        DatasetDescriptor::new("ubuntu", &[Nup], Canonical, Count(1)),
        DatasetDescriptor::new("mediasum", &[Summ], SummPair, Open),
        DatasetDescriptor::new("kvret", &[Dst, Nlg], Wizard, Count(3)),
        DatasetDescriptor::new("woz", &[Dst, Nlg], Wizard, Count(1)),
        DatasetDescriptor::new("taskmaster", &[Dst, Nlg], Wizard, Count(6)),
        DatasetDescriptor::new("camrest676", &[Dst, Nlg], Wizard, Count(1)),
        DatasetDescriptor::new("msr-e2e", &[Dst, Pol, Nlg], Wizard, Count(3)),
        DatasetDescriptor::new("frames", &[Dst, Pol, Nlg], Wizard, Count(1)),
        DatasetDescriptor::new("schema-guided", &[Dst, Pol, Nlg], Wizard, Count(17)),
    ]
}

pub fn lookup_dataset(name: &str) -> Option<DatasetDescriptor> {
    let name = name.to_lowercase();
    builtin_datasets().into_iter().find(|d| d.name == name)
}

/// One input record that did not become a dialogue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub ordinal: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    /// Records read, accepted or not.
    pub dialogues_read: usize,
    /// Turns over accepted dialogues.
    pub utterances_read: usize,
    pub dialogues_rejected: usize,
    pub rejections: Vec<Rejection>,
}

impl IngestStats {
    pub fn dialogues_accepted(&self) -> usize {
        self.dialogues_read - self.dialogues_rejected
    }

    pub fn write_rejection_log(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        for r in &self.rejections {
            let line = serde_json::to_string(r).expect("rejection serialization is infallible");
            writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Accumulates accepted dialogues, enforcing validation and id uniqueness.
#[derive(Default)]
pub(crate) struct Collector {
    dialogues: Vec<Dialogue>,
    seen: HashSet<String>,
    stats: IngestStats,
}

impl Collector {
    pub(crate) fn reject(&mut self, ordinal: usize, reason: impl Into<String>) {
        self.stats.dialogues_read += 1;
        self.stats.dialogues_rejected += 1;
        self.stats.rejections.push(Rejection {
            ordinal,
            reason: reason.into(),
        });
    }

    pub(crate) fn offer(&mut self, ordinal: usize, d: Dialogue) {
        let violations = validate_dialogue(&d);
        if !violations.is_empty() {
            let reasons: Vec<_> = violations.iter().map(ToString::to_string).collect();
            self.reject(
                ordinal,
                format!("dialogue {}: {}", d.id, reasons.join("; ")),
            );
            return;
        }
        if !self.seen.insert(d.id.clone()) {
            self.reject(ordinal, format!("duplicate dialogue id {}", d.id));
            return;
        }
        self.stats.dialogues_read += 1;
        self.stats.utterances_read += d.turns.len();
        self.dialogues.push(d);
    }

    pub(crate) fn finish(self) -> (Vec<Dialogue>, IngestStats) {
        (self.dialogues, self.stats)
    }
}

/// Non-blank lines with their 0-based record ordinal.
pub(crate) fn records<R: BufRead>(reader: R, path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push((out.len(), line));
    }
    Ok(out)
}

/// Reads `path` with the chosen adapter. `dataset` names the source corpus
/// for adapters whose records do not carry it.
pub fn ingest_path(
    path: &Path,
    adapter: AdapterKind,
    dataset: &str,
) -> Result<(Vec<Dialogue>, IngestStats)> {
    if adapter == AdapterKind::Canonical {
        return load_canonical(path);
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let lines = records(BufReader::new(file), path)?;
    let mut collector = Collector::default();
    match adapter {
        AdapterKind::Wizard => {
            for (ordinal, line) in lines {
                let outcome = serde_json::from_str::<WizardRecord>(&line)
                    .map_err(|e| format!("malformed wizard record: {e}"))
                    .and_then(|raw| adapt_wizard_style(&raw, dataset).map_err(|e| e.to_string()));
                match outcome {
                    Ok(d) => collector.offer(ordinal, d),
                    Err(reason) => collector.reject(ordinal, reason),
                }
            }
        }
        AdapterKind::SummPair => {
            for (ordinal, line) in lines {
                let outcome = serde_json::from_str::<SummRecord>(&line)
                    .map_err(|e| format!("malformed summary record: {e}"))
                    .and_then(|raw| {
                        adapt_summ_pair(&raw, dataset, ordinal).map_err(|e| e.to_string())
                    });
                match outcome {
                    Ok(d) => collector.offer(ordinal, d),
                    Err(reason) => collector.reject(ordinal, reason),
                }
            }
        }
        AdapterKind::IntentTable => {
            let descriptor = lookup_dataset(dataset).unwrap_or_else(|| {
                DatasetDescriptor::new(
                    dataset,
                    &[TaskKind::Ic],
                    AdapterKind::IntentTable,
                    DomainCount::Open,
                )
            });
            let mut rows = Vec::new();
            for (ordinal, line) in lines {
                match parse_intent_row(&line) {
                    Some(row) => rows.push((ordinal, row)),
                    None => collector.reject(ordinal, "intent row needs text<TAB>label"),
                }
            }
            for (ordinal, outcome) in adapt_intent_table(&rows, &descriptor) {
                match outcome {
                    Ok(d) => collector.offer(ordinal, d),
                    Err(e) => collector.reject(ordinal, e.to_string()),
                }
            }
            collector.stats.rejections.sort_by_key(|r| r.ordinal);
        }
        AdapterKind::Canonical => unreachable!("handled above"),
    }
    Ok(collector.finish())
}

/// Record-level adapter failure.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("record {record}: {reason}")]
pub struct AdapterError {
    pub record: String,
    pub reason: String,
}

impl AdapterError {
    pub(crate) fn new(record: impl Into<String>, reason: impl Into<String>) -> Self {
        AdapterError {
            record: record.into(),
            reason: reason.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_matches_dataset_table() {
        let all = builtin_datasets();
        assert_eq!(all.len(), 15);
        let tasks: BTreeSet<TaskKind> = all.iter().flat_map(|d| d.tasks.iter().copied()).collect();
        assert_eq!(tasks.len(), 7);
        for d in &all {
            d.validate().unwrap();
        }
        assert_eq!(
            lookup_dataset("Schema-Guided").unwrap().domain_count,
            DomainCount::Count(17)
        );
        assert_eq!(
            lookup_dataset("mediasum").unwrap().adapter,
            AdapterKind::SummPair
        );
    }

    #[test]
    fn adapter_names_round_trip() {
        for a in [
            AdapterKind::Wizard,
            AdapterKind::IntentTable,
            AdapterKind::SummPair,
            AdapterKind::Canonical,
        ] {
            assert_eq!(a.as_str().parse::<AdapterKind>().unwrap(), a);
        }
        assert!("csv".parse::<AdapterKind>().is_err());
    }

    #[test]
    fn domain_count_serializes_open_or_number() {
        assert_eq!(
            serde_json::to_string(&DomainCount::Open).unwrap(),
            "\"open\""
        );
        assert_eq!(serde_json::to_string(&DomainCount::Count(3)).unwrap(), "3");
        let back: DomainCount = serde_json::from_str("47").unwrap();
        assert_eq!(back, DomainCount::Count(47));
    }

    #[test]
    fn descriptor_without_tasks_is_invalid() {
        let d = DatasetDescriptor::new("x", &[], AdapterKind::Canonical, DomainCount::Open);
        assert!(d.validate().is_err());
    }
}
