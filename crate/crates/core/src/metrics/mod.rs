//! Evaluation metrics. Every reported value is on the 0-100 scale.

mod bleu;
mod evaluate;
mod inform;
mod jga;
mod predictions;
mod rouge;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::TaskKind;
use crate::text;

pub use bleu::{bleu_corpus, clipped_matches, ngram_counts, Bleu, MAX_ORDER};
pub use evaluate::{
    evaluate_dst, evaluate_ic, evaluate_nlg, evaluate_summ, final_states, nlg_pairs,
};
pub use inform::{
    inform_success, judge_dialogue, ConstraintSource, Entity, EntityDb, EntityRecord, InformSuccess,
};
pub use jga::{gold_states, joint_goal_accuracy, GoldStates, JgaCounts};
pub use predictions::{PredictionRecord, PredictionSet};
pub use rouge::{lcs_len, rouge_corpus, rouge_scores, Rouge};

/// `bleu + 0.5 * (inform + success)`.
pub fn combined_score(bleu: f64, inform: f64, success: f64) -> Result<f64> {
    for (name, value) in [("bleu", bleu), ("inform", inform), ("success", success)] {
        if !(0.0..=100.0).contains(&value) {
            return Err(Error::OutOfRange { name, value });
        }
    }
    Ok(bleu + 0.5 * (inform + success))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.total as f64
        }
    }
}

/// Exact match after normalization (case, whitespace, edge punctuation).
pub fn intent_accuracy<S: AsRef<str>>(gold: &[S], predicted: &[S]) -> Result<Accuracy> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let correct = gold
        .iter()
        .zip(predicted)
        .filter(|(g, p)| text::normalize(g.as_ref()) == text::normalize(p.as_ref()))
        .count();
    Ok(Accuracy {
        correct,
        total: gold.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub name: String,
    pub value: f64,
    /// For ratio metrics, `value == 100 * numerator / denominator`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerator: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: TaskKind,
    pub metrics: Vec<MetricValue>,
    /// Supporting counts such as missing predictions.
    pub tallies: BTreeMap<String, usize>,
}

impl MetricReport {
    pub fn new(task: TaskKind) -> Self {
        MetricReport {
            task,
            metrics: Vec::new(),
            tallies: BTreeMap::new(),
        }
    }

    pub fn push_ratio(&mut self, name: &str, numerator: f64, denominator: f64) {
        let value = if denominator == 0.0 {
            0.0
        } else {
            100.0 * numerator / denominator
        };
        self.metrics.push(MetricValue {
            name: name.into(),
            value,
            numerator: Some(numerator),
            denominator: Some(denominator),
        });
    }

    pub fn push_score(&mut self, name: &str, value: f64) {
        self.metrics.push(MetricValue {
            name: name.into(),
            value,
            numerator: None,
            denominator: None,
        });
    }

    pub fn tally(&mut self, name: &str, count: usize) {
        self.tallies.insert(name.into(), count);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.value)
    }

    /// Checks ratio metrics lie in [0, 100] and agree with their counts.
    pub fn check(&self) -> Result<()> {
        for m in &self.metrics {
            if let (Some(num), Some(den)) = (m.numerator, m.denominator) {
                if !(0.0..=100.0).contains(&m.value) {
                    return Err(Error::Invalid(format!(
                        "{} = {} outside [0, 100]",
                        m.name, m.value
                    )));
                }
                let expect = if den == 0.0 { 0.0 } else { 100.0 * num / den };
                if (expect - m.value).abs() > 1e-9 {
                    return Err(Error::Invalid(format!(
                        "{} disagrees with its counts",
                        m.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// Plain-text table for terminals.
    pub fn render_table(&self) -> String {
        let width = self
            .metrics
            .iter()
            .map(|m| m.name.len())
            .chain(self.tallies.keys().map(String::len))
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = String::new();
        let _ = writeln!(out, "task: {}", self.task);
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>10}  {:>10}",
            "metric", "value", "numerator", "denominator"
        );
        for m in &self.metrics {
            let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x}"));
            let _ = writeln!(
                out,
                "{:<width$}  {:>8.2}  {:>10}  {:>10}",
                m.name,
                m.value,
                fmt_opt(m.numerator),
                fmt_opt(m.denominator)
            );
        }
        for (k, v) in &self.tallies {
            let _ = writeln!(out, "{k:<width$}  {v:>8}");
        }
        out
    }
}
