//! Prompt compilation: canonical dialogues in, task-tagged seq2seq records
//! out. Each record is the template for its task applied to a raw
//! `(input, target)` pair.

mod belief;
mod derive;
mod template;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{duplicate_ids, Dialogue, TaskKind};

pub use belief::{
    linearize_acts, linearize_belief_state, parse_belief_state, ParsedState, EMPTY_STATE,
};
pub use derive::{
    derive_task_examples, option_label, render_context, DeriveContext, Ontology, ResponsePool,
};
pub use template::{
    placeholders, source_placeholders, substitute, target_placeholders, PromptTemplate, TemplateSet,
};

/// One compiled training or evaluation record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptedExample {
    pub task: TaskKind,
    pub dataset: String,
    pub id: String,
    pub source_text: String,
    pub target_text: String,
    /// Owning dialogue; not part of the record file.
    #[serde(skip)]
    pub dialogue_id: String,
    /// Owning turn for turn-level tasks; not part of the record file.
    #[serde(skip)]
    pub turn: Option<usize>,
}

impl PromptedExample {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }
}

/// Applies `template` to the placeholder values of one raw example.
pub fn apply_prompt(
    task: TaskKind,
    values: &BTreeMap<&str, String>,
    template: &PromptTemplate,
    dataset: &str,
    id: &str,
) -> Result<PromptedExample> {
    if template.task != task {
        return Err(Error::Template {
            task: task.to_string(),
            message: format!("template belongs to {}", template.task),
        });
    }
    let (source_text, target_text) = template.render(values)?;
    if source_text.trim().is_empty() || target_text.trim().is_empty() {
        return Err(Error::EmptyRecord(id.to_string()));
    }
    Ok(PromptedExample {
        task,
        dataset: dataset.to_string(),
        id: id.to_string(),
        source_text,
        target_text,
        dialogue_id: String::new(),
        turn: None,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileStats {
    pub dialogues: usize,
    pub per_task: BTreeMap<TaskKind, usize>,
}

impl CompileStats {
    pub fn total(&self) -> usize {
        self.per_task.values().sum()
    }
}

/// Compiles every requested task over every dialogue: dialogue order
/// first, then the fixed task order. NUP negatives come from the speaker2
/// turns of `dialogues` as a whole.
pub fn compile_corpus(
    dialogues: &[Dialogue],
    tasks: &BTreeSet<TaskKind>,
    templates: &TemplateSet,
    neg_k: usize,
    seed: u64,
) -> Result<(Vec<PromptedExample>, CompileStats)> {
    for task in tasks {
        if templates.get(*task).is_none() {
            return Err(Error::MissingTemplate(task.to_string()));
        }
    }
    if let Some(dup) = duplicate_ids(dialogues).into_iter().next() {
        return Err(Error::DuplicateId(dup));
    }

    let pool = ResponsePool::from_dialogues(dialogues);
    let ontology = Ontology::from_dialogues(dialogues);
    let ctx = DeriveContext {
        neg_k,
        seed,
        pool: &pool,
        ontology: &ontology,
    };

    let mut stats = CompileStats {
        dialogues: dialogues.len(),
        per_task: tasks.iter().map(|t| (*t, 0)).collect(),
    };
    let mut records = Vec::new();
    for d in dialogues {
        for task in TaskKind::ALL.into_iter().filter(|t| tasks.contains(t)) {
            let template = templates.get(task).expect("checked above");
            let examples = derive_task_examples(d, task, template, &ctx)?;
            *stats.per_task.entry(task).or_default() += examples.len();
            records.extend(examples);
        }
    }
    Ok((records, stats))
}

pub fn write_records<W: Write>(out: W, records: &[PromptedExample]) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    for r in records {
        writeln!(w, "{}", r.to_json_line())?;
    }
    w.flush()
}

/// Reads a compiled record file. Unlike dialogue loading, a malformed line
/// here is a hard error.
pub fn read_records(path: &Path) -> Result<Vec<PromptedExample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PromptedExample = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Speaker;

    fn values(pairs: &[(&'static str, &str)]) -> BTreeMap<&'static str, String> {
        pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
    }

    #[test]
    fn apply_prompt_substitutes() {
        let t = PromptTemplate::new(
            TaskKind::Dst,
            "translate dialogue to belief state: {context}",
            "{state}",
        )
        .unwrap();
        let ex = apply_prompt(
            TaskKind::Dst,
            &values(&[
                ("context", "user: i want italian food"),
                ("state", "[restaurant] food italian"),
            ]),
            &t,
            "woz",
            "x",
        )
        .unwrap();
        assert_eq!(
            ex.source_text,
            "translate dialogue to belief state: user: i want italian food"
        );
        assert_eq!(ex.target_text, "[restaurant] food italian");
    }

    #[test]
    fn apply_prompt_nup_pattern() {
        let t = PromptTemplate::default_for(TaskKind::Nup);
        let ex = apply_prompt(
            TaskKind::Nup,
            &values(&[
                ("context", "user: hi"),
                ("candidate", "hello"),
                ("yes_no", "yes"),
            ]),
            &t,
            "ubuntu",
            "x",
        )
        .unwrap();
        assert_eq!(
            ex.source_text,
            "user: hi candidate: hello is this the next utterance?"
        );
        assert_eq!(ex.target_text, "yes");
    }

    #[test]
    fn apply_prompt_rejects_mismatched_task_and_empty_output() {
        let t = PromptTemplate::default_for(TaskKind::Nlg);
        assert!(apply_prompt(TaskKind::Dst, &values(&[]), &t, "d", "x").is_err());
        let bare = PromptTemplate::new(TaskKind::Nlg, "{context}", "{response}").unwrap();
        let err = apply_prompt(
            TaskKind::Nlg,
            &values(&[("context", ""), ("response", "ok")]),
            &bare,
            "d",
            "x",
        );
        assert!(matches!(err, Err(Error::EmptyRecord(_))));
    }

    #[test]
    fn records_omit_internal_fields() {
        let t = PromptTemplate::default_for(TaskKind::Summ);
        let ex = apply_prompt(
            TaskKind::Summ,
            &values(&[("context", "c"), ("summary", "s")]),
            &t,
            "d",
            "x",
        )
        .unwrap();
        let line = ex.to_json_line();
        assert_eq!(
            line,
            r#"{"task":"summ","dataset":"d","id":"x","source_text":"summarize the dialogue: c","target_text":"s"}"#
        );
    }

    #[test]
    fn summaries_counted() {
        let dialogues: Vec<Dialogue> = (0..10)
            .map(|i| {
                let mut d = Dialogue::new(format!("s{i}"), "dialogsum", &["open"]);
                d.push_turn(Speaker::Speaker1, "hello");
                d.push_turn(Speaker::Speaker2, "hi");
                if i % 3 == 0 {
                    d.summary = Some("they greet".into());
                }
                d
            })
            .collect();
        let tasks = BTreeSet::from([TaskKind::Summ]);
        let (records, stats) =
            compile_corpus(&dialogues, &tasks, &TemplateSet::default(), 0, 0).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(stats.per_task[&TaskKind::Summ], 4);
    }

    #[test]
    fn empty_corpus_compiles_to_nothing() {
        let (records, stats) = compile_corpus(
            &[],
            &TaskKind::ALL.into_iter().collect(),
            &TemplateSet::default(),
            3,
            1,
        )
        .unwrap();
        assert!(records.is_empty());
        assert_eq!(stats.total(), 0);
        assert_eq!(stats.per_task.len(), 7);
    }

    #[test]
    fn missing_template_and_duplicate_ids_fail() {
        let tasks = BTreeSet::from([TaskKind::Dst]);
        assert!(matches!(
            compile_corpus(&[], &tasks, &TemplateSet::empty(), 0, 0),
            Err(Error::MissingTemplate(_))
        ));
        let mut d = Dialogue::new("a", "toy", &["x"]);
        d.push_turn(Speaker::Speaker1, "hi");
        assert!(matches!(
            compile_corpus(&[d.clone(), d], &tasks, &TemplateSet::default(), 0, 0),
            Err(Error::DuplicateId(_))
        ));
    }
}
