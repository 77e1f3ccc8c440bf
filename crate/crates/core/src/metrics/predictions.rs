use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Dialogue, TaskKind};

/// One line of a prediction file. Dialogue-level tasks (summaries) use
/// turn index 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub task: TaskKind,
    pub text: String,
}

/// Model outputs for one task, keyed by dialogue then turn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionSet {
    pub task: TaskKind,
    by_dialogue: BTreeMap<String, BTreeMap<usize, String>>,
}

impl PredictionSet {
    pub fn new(task: TaskKind) -> Self {
        PredictionSet {
            task,
            by_dialogue: BTreeMap::new(),
        }
    }

    /// Adds a prediction; a second one for the same turn is an error.
    pub fn insert(
        &mut self,
        dialogue_id: &str,
        turn_index: usize,
        text: impl Into<String>,
    ) -> Result<()> {
        let turns = self.by_dialogue.entry(dialogue_id.to_string()).or_default();
        if turns.contains_key(&turn_index) {
            return Err(Error::DuplicateId(format!("{dialogue_id}#{turn_index}")));
        }
        turns.insert(turn_index, text.into());
        Ok(())
    }

    pub fn get(&self, dialogue_id: &str, turn_index: usize) -> Option<&str> {
        self.by_dialogue
            .get(dialogue_id)
            .and_then(|t| t.get(&turn_index))
            .map(String::as_str)
    }

    /// Predictions for one dialogue in turn order.
    pub fn for_dialogue(&self, dialogue_id: &str) -> impl Iterator<Item = (usize, &str)> {
        self.by_dialogue
            .get(dialogue_id)
            .into_iter()
            .flat_map(|t| t.iter().map(|(i, s)| (*i, s.as_str())))
    }

    pub fn len(&self) -> usize {
        self.by_dialogue.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fails on the first prediction whose dialogue or turn does not exist.
    pub fn check_against(&self, dialogues: &[Dialogue]) -> Result<()> {
        let turns: BTreeMap<&str, usize> = dialogues
            .iter()
            .map(|d| (d.id.as_str(), d.turns.len()))
            .collect();
        for (id, preds) in &self.by_dialogue {
            for &turn in preds.keys() {
                match turns.get(id.as_str()) {
                    Some(&n) if turn < n => {}
                    _ => {
                        return Err(Error::UnknownTurn {
                            dialogue_id: id.clone(),
                            turn_index: turn,
                        })
                    }
                }
            }
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<PredictionRecord> {
        self.by_dialogue
            .iter()
            .flat_map(|(id, turns)| {
                turns.iter().map(move |(t, text)| PredictionRecord {
                    dialogue_id: id.clone(),
                    turn_index: *t,
                    task: self.task,
                    text: text.clone(),
                })
            })
            .collect()
    }

    /// Reads the lines of `path` whose task is `task`; other tasks are
    /// skipped so one file may hold several.
    pub fn load(path: &Path, task: TaskKind) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut set = PredictionSet::new(task);
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| Error::Malformed {
                path: path.to_path_buf(),
                line: n + 1,
                message,
            };
            let rec: PredictionRecord =
                serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
            if rec.task != task {
                continue;
            }
            set.insert(&rec.dialogue_id, rec.turn_index, rec.text)
                .map_err(|e| malformed(e.to_string()))?;
        }
        Ok(set)
    }

    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(out);
        for r in self.records() {
            writeln!(w, "{}", serde_json::to_string(&r).expect("infallible"))?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Speaker;

    #[test]
    fn duplicate_turn_rejected() {
        let mut p = PredictionSet::new(TaskKind::Dst);
        p.insert("d", 0, "none").unwrap();
        assert!(p.insert("d", 0, "none").is_err());
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn unknown_turns_detected() {
        let mut d = Dialogue::new("d", "toy", &["x"]);
        d.push_turn(Speaker::Speaker1, "hi");
        let mut p = PredictionSet::new(TaskKind::Dst);
        p.insert("d", 0, "none").unwrap();
        p.check_against(std::slice::from_ref(&d)).unwrap();
        p.insert("d", 1, "none").unwrap();
        assert!(matches!(
            p.check_against(std::slice::from_ref(&d)),
            Err(Error::UnknownTurn { turn_index: 1, .. })
        ));
    }

    #[test]
    fn file_round_trip_filters_by_task() {
        let mut p = PredictionSet::new(TaskKind::Nlg);
        p.insert("a", 1, "hello").unwrap();
        p.insert("b", 3, "bye").unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        p.write(&mut f).unwrap();
        writeln!(
            f,
            r#"{{"dialogue_id":"a","turn_index":0,"task":"dst","text":"none"}}"#
        )
        .unwrap();
        let back = PredictionSet::load(f.path(), TaskKind::Nlg).unwrap();
        assert_eq!(back, p);
        assert_eq!(
            PredictionSet::load(f.path(), TaskKind::Dst).unwrap().len(),
            1
        );
    }

    #[test]
    fn malformed_line_is_an_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "not json").unwrap();
        assert!(matches!(
            PredictionSet::load(f.path(), TaskKind::Nlg),
            Err(Error::Malformed { line: 1, .. })
        ));
    }
}
