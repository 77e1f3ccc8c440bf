//! Task prompt templates and placeholder substitution.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::TaskKind;

/// Placeholders a source pattern may use for `task`.
pub fn source_placeholders(task: TaskKind) -> &'static [&'static str] {
    match task {
        TaskKind::Nlg | TaskKind::Pol | TaskKind::Summ => &["context"],
        TaskKind::Dst => &["context", "ontology"],
        TaskKind::Ic => &["utterance", "context"],
        TaskKind::Mcqa => &["context", "question", "options"],
        TaskKind::Nup => &["context", "candidate"],
    }
}

/// Placeholders a target pattern may use for `task`.
pub fn target_placeholders(task: TaskKind) -> &'static [&'static str] {
    match task {
        TaskKind::Nlg => &["response"],
        TaskKind::Dst => &["state"],
        TaskKind::Pol => &["acts"],
        TaskKind::Ic => &["intent"],
        TaskKind::Mcqa => &["answer"],
        TaskKind::Nup => &["yes_no"],
        TaskKind::Summ => &["summary"],
    }
}

/// `{name}` occurrences in `pattern`, in order. Only lowercase
/// identifiers count; any other brace text is literal.
pub fn placeholders(pattern: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        let tail = &rest[open + 1..];
        match tail.find('}') {
            Some(close) if is_ident(&tail[..close]) => {
                out.push(&tail[..close]);
                rest = &tail[close + 1..];
            }
            _ => rest = tail,
        }
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase() || c == '_')
}

/// Single-pass substitution: substituted values are never rescanned.
pub fn substitute(pattern: &str, values: &BTreeMap<&str, String>) -> Result<String> {
    let mut out = String::with_capacity(pattern.len() + 64);
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open + 1..];
        match tail.find('}') {
            Some(close) if is_ident(&tail[..close]) => {
                let name = &tail[..close];
                let value = values
                    .get(name)
                    .ok_or_else(|| Error::MissingPlaceholder(name.to_string()))?;
                out.push_str(value);
                rest = &tail[close + 1..];
            }
            _ => {
                out.push('{');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task: TaskKind,
    pub source_pattern: String,
    pub target_pattern: String,
}

impl PromptTemplate {
    pub fn new(task: TaskKind, source: &str, target: &str) -> Result<Self> {
        let t = PromptTemplate {
            task,
            source_pattern: source.to_string(),
            target_pattern: target.to_string(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |message: String| Error::Template {
            task: self.task.to_string(),
            message,
        };
        for (which, pattern, allowed) in [
            (
                "source",
                &self.source_pattern,
                source_placeholders(self.task),
            ),
            (
                "target",
                &self.target_pattern,
                target_placeholders(self.task),
            ),
        ] {
            if pattern.trim().is_empty() {
                return Err(err(format!("{which} pattern is empty")));
            }
            if let Some(bad) = placeholders(pattern)
                .into_iter()
                .find(|p| !allowed.contains(p))
            {
                return Err(err(format!(
                    "{which} placeholder {{{bad}}} is not defined for this task"
                )));
            }
        }
        Ok(())
    }

    /// Built-in pattern for `task`: a task-name prefix on the source side
    /// and the bare target on the other.
    pub fn default_for(task: TaskKind) -> Self {
        let (source, target) = match task {
            TaskKind::Nlg => ("translate dialogue to system response: {context}", "{response}"),
            TaskKind::Dst => ("translate dialogue to belief state: {context}", "{state}"),
            TaskKind::Pol => ("translate dialogue to dialogue action: {context}", "{acts}"),
            TaskKind::Ic => ("translate dialogue to user intent: {utterance}", "{intent}"),
            TaskKind::Mcqa => (
                "answer the question based on the dialogue: {context} question: {question} options: {options}",
                "{answer}",
            ),
            TaskKind::Nup => ("{context} candidate: {candidate} is this the next utterance?", "{yes_no}"),
            TaskKind::Summ => ("summarize the dialogue: {context}", "{summary}"),
        };
        PromptTemplate {
            task,
            source_pattern: source.into(),
            target_pattern: target.into(),
        }
    }

    /// Fills both patterns from `values`.
    pub fn render(&self, values: &BTreeMap<&str, String>) -> Result<(String, String)> {
        Ok((
            substitute(&self.source_pattern, values)?,
            substitute(&self.target_pattern, values)?,
        ))
    }
}

/// One template per task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<TaskKind, PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet {
            templates: TaskKind::ALL
                .into_iter()
                .map(|t| (t, PromptTemplate::default_for(t)))
                .collect(),
        }
    }
}

impl TemplateSet {
    /// A set with no templates at all.
    pub fn empty() -> Self {
        TemplateSet {
            templates: BTreeMap::new(),
        }
    }

    pub fn get(&self, task: TaskKind) -> Option<&PromptTemplate> {
        self.templates.get(&task)
    }

    pub fn insert(&mut self, template: PromptTemplate) -> Result<()> {
        template.validate()?;
        self.templates.insert(template.task, template);
        Ok(())
    }

    /// Parses a flat `key = pattern` file on top of the defaults. Keys are
    /// `<task>.source` and `<task>.target`; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut set = TemplateSet::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let invalid = |m: &str| Error::Invalid(format!("template line {}: {m}", n + 1));
            let (key, pattern) = line
                .split_once('=')
                .ok_or_else(|| invalid("expected key = pattern"))?;
            let (task, side) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| invalid("key must be <task>.source or <task>.target"))?;
            let task: TaskKind = task
                .parse()
                .map_err(|_| invalid(&format!("unknown task {task:?}")))?;
            let entry = set
                .templates
                .entry(task)
                .or_insert_with(|| PromptTemplate::default_for(task));
            match side.trim() {
                "source" => entry.source_pattern = pattern.trim().to_string(),
                "target" => entry.target_pattern = pattern.trim().to_string(),
                other => return Err(invalid(&format!("unknown side {other:?}"))),
            }
        }
        for t in set.templates.values() {
            t.validate()?;
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Renders the set back into the file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for t in self.templates.values() {
            out.push_str(&format!("{}.source = {}\n", t.task, t.source_pattern));
            out.push_str(&format!("{}.target = {}\n", t.task, t.target_pattern));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(pairs: &[(&'static str, &str)]) -> BTreeMap<&'static str, String> {
        pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
    }

    #[test]
    fn finds_placeholders() {
        assert_eq!(
            placeholders("{context} x {candidate}?"),
            vec!["context", "candidate"]
        );
        assert_eq!(placeholders("json {} and {Not} {a b}"), Vec::<&str>::new());
    }

    #[test]
    fn substitution_is_literal() {
        let out = substitute("a {x} b", &values(&[("x", "{x}")])).unwrap();
        assert_eq!(out, "a {x} b");
        let out = substitute("{} {x}", &values(&[("x", "1")])).unwrap();
        assert_eq!(out, "{} 1");
    }

    #[test]
    fn missing_value_names_placeholder() {
        let t = PromptTemplate::default_for(TaskKind::Mcqa);
        let err = t
            .render(&values(&[
                ("context", "c"),
                ("question", "q"),
                ("answer", "a"),
            ]))
            .unwrap_err();
        assert!(matches!(err, Error::MissingPlaceholder(ref p) if p == "options"));
        assert!(err.to_string().contains("{options}"));
    }

    #[test]
    fn rejects_placeholders_foreign_to_task() {
        let err = PromptTemplate::new(TaskKind::Dst, "{options}", "{state}").unwrap_err();
        assert!(err.to_string().contains("{options}"));
        assert!(PromptTemplate::new(TaskKind::Dst, "{context}", " ").is_err());
    }

    #[test]
    fn defaults_are_valid() {
        for task in TaskKind::ALL {
            PromptTemplate::default_for(task).validate().unwrap();
        }
    }

    #[test]
    fn file_overrides_defaults() {
        let set = TemplateSet::parse(
            "# custom dst\n\
             dst.source = track: {context} known: {ontology}\n\
             nlg.target = reply: {response}\n",
        )
        .unwrap();
        assert_eq!(
            set.get(TaskKind::Dst).unwrap().source_pattern,
            "track: {context} known: {ontology}"
        );
        assert_eq!(set.get(TaskKind::Dst).unwrap().target_pattern, "{state}");
        assert_eq!(
            set.get(TaskKind::Nlg).unwrap().target_pattern,
            "reply: {response}"
        );
        let again = TemplateSet::parse(&set.to_file_string()).unwrap();
        assert_eq!(again, set);
    }

    #[test]
    fn file_errors_carry_line_numbers() {
        let err = TemplateSet::parse("\nqa.source = {context}").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(TemplateSet::parse("dst.middle = x").is_err());
        assert!(TemplateSet::parse("dst.source {context}").is_err());
    }
}
