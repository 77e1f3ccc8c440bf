//! Fine-grained analysis: per-sample aspect values, interval bucketing and
//! per-bucket metric tables.
//!
//! Aspects are computed per dialogue. Metrics that decompose over samples
//! (JGA, intent accuracy, per-pair ROUGE) are averaged inside each bucket;
//! corpus-level metrics (BLEU, Inform, Success) are recomputed on each
//! bucket's members through [`CorpusMetrics`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    bleu_corpus, combined_score, gold_states, inform_success, nlg_pairs, rouge_scores,
    ConstraintSource, EntityDb, PredictionSet,
};
use crate::schema::{Dialogue, Speaker};
use crate::text;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    /// Mean words per speaker1 turn.
    Sp1Len,
    /// Mean words per speaker2 turn.
    Sp2Len,
    /// Number of turns.
    UtrNum,
    /// Words in the reference summary.
    RefeLen,
}

impl Aspect {
    pub const ALL: [Aspect; 4] = [
        Aspect::Sp1Len,
        Aspect::Sp2Len,
        Aspect::UtrNum,
        Aspect::RefeLen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Sp1Len => "sp1_len",
            Aspect::Sp2Len => "sp2_len",
            Aspect::UtrNum => "utr_num",
            Aspect::RefeLen => "refe_len",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aspect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Aspect::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| Error::Invalid(format!("unknown aspect {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AspectProfile {
    pub sp1_len: f64,
    pub sp2_len: f64,
    pub utr_num: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refe_len: Option<usize>,
}

impl AspectProfile {
    pub fn get(&self, aspect: Aspect) -> Option<f64> {
        match aspect {
            Aspect::Sp1Len => Some(self.sp1_len),
            Aspect::Sp2Len => Some(self.sp2_len),
            Aspect::UtrNum => Some(self.utr_num as f64),
            Aspect::RefeLen => self.refe_len.map(|n| n as f64),
        }
    }
}

fn mean_words(d: &Dialogue, speaker: Speaker) -> f64 {
    let counts: Vec<usize> = d
        .turns
        .iter()
        .filter(|t| t.speaker == speaker)
        .map(|t| text::word_count(&t.text))
        .collect();
    if counts.is_empty() {
        0.0
    } else {
        counts.iter().sum::<usize>() as f64 / counts.len() as f64
    }
}

pub fn compute_aspects(d: &Dialogue) -> AspectProfile {
    AspectProfile {
        sp1_len: mean_words(d, Speaker::Speaker1),
        sp2_len: mean_words(d, Speaker::Speaker2),
        utr_num: d.turns.len(),
        refe_len: d.summary.as_deref().map(text::word_count),
    }
}

/// Half-open intervals `[starts[i], starts[i+1])`, the last one unbounded.
/// Values below the first start fall into the first bucket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketSpec {
    pub aspect: Aspect,
    pub starts: Vec<f64>,
}

impl BucketSpec {
    pub fn new(aspect: Aspect, starts: Vec<f64>) -> Result<Self> {
        let spec = BucketSpec { aspect, starts };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts.is_empty() {
            return Err(Error::InvalidBucketSpec(format!(
                "{}: no intervals",
                self.aspect
            )));
        }
        if self.starts.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidBucketSpec(format!(
                "{}: bounds must be finite and non-negative",
                self.aspect
            )));
        }
        if self.starts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBucketSpec(format!(
                "{}: bounds must be strictly increasing",
                self.aspect
            )));
        }
        Ok(())
    }

    /// Default intervals per aspect: lengths 6-10 / 11-15 / 16+, turn
    /// counts 2-5 / 6-9 / 10+, summary lengths 4-23 / 24-43 / 44+.
    pub fn default_for(aspect: Aspect) -> Self {
        let starts = match aspect {
            Aspect::Sp1Len | Aspect::Sp2Len => vec![6.0, 11.0, 16.0],
            Aspect::UtrNum => vec![2.0, 6.0, 10.0],
            Aspect::RefeLen => vec![4.0, 24.0, 44.0],
        };
        BucketSpec { aspect, starts }
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn label(&self, bucket: usize) -> String {
        match self.starts.get(bucket + 1) {
            Some(end) => format!("[{},{})", self.starts[bucket], end),
            None => format!("[{},inf)", self.starts[bucket]),
        }
    }

    /// Parses `aspect = b0, b1, b2` lines (`#` comments allowed).
    pub fn parse_file(text: &str) -> Result<Vec<BucketSpec>> {
        let mut specs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| Error::InvalidBucketSpec(format!("line {}: {m}", n + 1));
            let (aspect, bounds) = line
                .split_once('=')
                .ok_or_else(|| bad("expected aspect = b0, b1, ...".into()))?;
            let aspect: Aspect = aspect.parse().map_err(|e: Error| bad(e.to_string()))?;
            let starts = bounds
                .split(',')
                .map(|b| {
                    b.trim()
                        .parse::<f64>()
                        .map_err(|e| bad(format!("{b:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            specs.push(BucketSpec::new(aspect, starts)?);
        }
        Ok(specs)
    }
}

/// Index of the interval holding `value`.
pub fn assign_bucket(value: f64, spec: &BucketSpec) -> usize {
    spec.starts.iter().rposition(|&s| value >= s).unwrap_or(0)
}

/// One analysed unit (a dialogue or a turn) with its aspect profile and
/// per-sample metric values on 0-100.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub profile: AspectProfile,
    pub values: BTreeMap<String, f64>,
}

/// Metrics that must be recomputed over each bucket's members.
pub trait CorpusMetrics {
    fn names(&self) -> Vec<String>;

    /// Metric values over the samples with these ids; metrics that are
    /// undefined for the subset are left out.
    fn evaluate(&self, ids: &[&str]) -> BTreeMap<String, f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub aspect: Aspect,
    pub bucket: usize,
    pub label: String,
    pub count: usize,
    pub metrics: BTreeMap<String, Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineGrainedReport {
    pub metric_names: Vec<String>,
    pub rows: Vec<BucketRow>,
}

impl FineGrainedReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("aspect,bucket,count");
        for m in &self.metric_names {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{},{}", row.aspect, row.label, row.count));
            for m in &self.metric_names {
                out.push(',');
                if let Some(Some(v)) = row.metrics.get(m) {
                    out.push_str(&format!("{v:.4}"));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Buckets `samples` under every spec and reports count and metric values
/// per bucket, ordered by spec then bucket. Output does not depend on the
/// order of `samples`.
pub fn fine_grained_report(
    samples: &[Sample],
    specs: &[BucketSpec],
    corpus: Option<&dyn CorpusMetrics>,
) -> Result<FineGrainedReport> {
    let mut seen = HashSet::new();
    for s in samples {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::DuplicateId(s.id.clone()));
        }
    }
    let mut sorted: Vec<&Sample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let sample_metrics: BTreeSet<&str> = sorted
        .iter()
        .flat_map(|s| s.values.keys().map(String::as_str))
        .collect();
    let corpus_metrics: Vec<String> = corpus.map(|c| c.names()).unwrap_or_default();
    let metric_names: Vec<String> = sample_metrics
        .iter()
        .map(|s| s.to_string())
        .chain(corpus_metrics.iter().cloned())
        .collect();

    let mut rows = Vec::new();
    for spec in specs {
        spec.validate()?;
        let mut members: Vec<Vec<&Sample>> = vec![Vec::new(); spec.len()];
        for s in &sorted {
            let value = s
                .profile
                .get(spec.aspect)
                .ok_or_else(|| Error::MissingAspect {
                    id: s.id.clone(),
                    aspect: spec.aspect.to_string(),
                })?;
            members[assign_bucket(value, spec)].push(s);
        }
        for (bucket, group) in members.into_iter().enumerate() {
            let mut metrics = BTreeMap::new();
            for name in &sample_metrics {
                let vals: Vec<f64> = group
                    .iter()
                    .filter_map(|s| s.values.get(*name).copied())
                    .collect();
                let mean = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
                metrics.insert(name.to_string(), mean);
            }
            if let Some(c) = corpus {
                let computed = if group.is_empty() {
                    BTreeMap::new()
                } else {
                    let ids: Vec<&str> = group.iter().map(|s| s.id.as_str()).collect();
                    c.evaluate(&ids)
                };
                for name in &corpus_metrics {
                    metrics.insert(name.clone(), computed.get(name).copied());
                }
            }
            rows.push(BucketRow {
                aspect: spec.aspect,
                bucket,
                label: spec.label(bucket),
                count: group.len(),
                metrics,
            });
        }
    }
    Ok(FineGrainedReport { metric_names, rows })
}

/// One sample per annotated speaker1 turn, valued 100 when the parsed
/// prediction matches gold and 0 otherwise (missing counts as 0).
pub fn dst_samples(dialogues: &[Dialogue], preds: &PredictionSet) -> Vec<Sample> {
    let profiles: BTreeMap<&str, AspectProfile> = dialogues
        .iter()
        .map(|d| (d.id.as_str(), compute_aspects(d)))
        .collect();
    gold_states(dialogues)
        .into_iter()
        .map(|((id, turn), gold)| {
            let hit = preds
                .get(&id, turn)
                .is_some_and(|p| crate::promptc::parse_belief_state(p).state == gold);
            Sample {
                id: format!("{id}#{turn}"),
                profile: profiles[id.as_str()].clone(),
                values: BTreeMap::from([("jga".to_string(), if hit { 100.0 } else { 0.0 })]),
            }
        })
        .collect()
}

/// One sample per turn with a gold intent.
pub fn ic_samples(dialogues: &[Dialogue], preds: &PredictionSet) -> Vec<Sample> {
    let mut out = Vec::new();
    for d in dialogues {
        let profile = compute_aspects(d);
        for t in &d.turns {
            let Some(label) = &t.intent else { continue };
            let hit = preds
                .get(&d.id, t.index)
                .is_some_and(|p| text::normalize(p) == text::normalize(label));
            out.push(Sample {
                id: format!("{}#{}", d.id, t.index),
                profile: profile.clone(),
                values: BTreeMap::from([("accuracy".to_string(), if hit { 100.0 } else { 0.0 })]),
            });
        }
    }
    out
}

/// One sample per dialogue with a reference summary, valued with its
/// per-pair ROUGE scores.
pub fn summ_samples(dialogues: &[Dialogue], preds: &PredictionSet) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for d in dialogues {
        let Some(summary) = &d.summary else { continue };
        let hyp = preds.get(&d.id, 0).map(text::tokenize).unwrap_or_default();
        let r = rouge_scores(&hyp, &text::tokenize(summary))?;
        out.push(Sample {
            id: d.id.clone(),
            profile: compute_aspects(d),
            values: BTreeMap::from([
                ("rouge1".to_string(), r.r1),
                ("rouge2".to_string(), r.r2),
                ("rougeL".to_string(), r.rl),
            ]),
        });
    }
    Ok(out)
}

/// End-to-end modeling: one sample per dialogue with at least one
/// speaker2 turn; all metrics are corpus-level (see [`NlgBucketMetrics`]).
pub fn nlg_samples(dialogues: &[Dialogue]) -> Vec<Sample> {
    dialogues
        .iter()
        .filter(|d| d.turns.iter().any(|t| t.speaker == Speaker::Speaker2))
        .map(|d| Sample {
            id: d.id.clone(),
            profile: compute_aspects(d),
            values: BTreeMap::new(),
        })
        .collect()
}

/// Recomputes BLEU, Inform, Success and Combined Score on a bucket.
pub struct NlgBucketMetrics<'a> {
    dialogues: BTreeMap<&'a str, &'a Dialogue>,
    preds: &'a PredictionSet,
    db: &'a EntityDb,
    constraints: ConstraintSource<'a>,
}

impl<'a> NlgBucketMetrics<'a> {
    pub fn new(
        dialogues: &'a [Dialogue],
        preds: &'a PredictionSet,
        db: &'a EntityDb,
        constraints: ConstraintSource<'a>,
    ) -> Self {
        NlgBucketMetrics {
            dialogues: dialogues.iter().map(|d| (d.id.as_str(), d)).collect(),
            preds,
            db,
            constraints,
        }
    }
}

impl CorpusMetrics for NlgBucketMetrics<'_> {
    fn names(&self) -> Vec<String> {
        ["bleu", "inform", "success", "combined"]
            .map(String::from)
            .to_vec()
    }

    fn evaluate(&self, ids: &[&str]) -> BTreeMap<String, f64> {
        let subset: Vec<Dialogue> = ids
            .iter()
            .filter_map(|id| self.dialogues.get(id).map(|d| (*d).clone()))
            .collect();
        let mut out = BTreeMap::new();
        let (pairs, _) = nlg_pairs(&subset, self.preds);
        let bleu = bleu_corpus(&pairs).ok().map(|b| b.score);
        let is = inform_success(&subset, self.preds, self.db, self.constraints);
        if let Some(b) = bleu {
            out.insert("bleu".into(), b);
        }
        if is.evaluated > 0 {
            out.insert("inform".into(), is.inform_rate());
            out.insert("success".into(), is.success_rate());
            if let Some(b) = bleu {
                if let Ok(c) = combined_score(b, is.inform_rate(), is.success_rate()) {
                    out.insert("combined".into(), c);
                }
            }
        }
        out
    }
}
