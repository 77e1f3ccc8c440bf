//! Task-level scoring of a prediction set against gold dialogues.

use std::collections::BTreeMap;

use super::{
    bleu_corpus, combined_score, gold_states, inform_success, intent_accuracy, joint_goal_accuracy,
    rouge_scores, ConstraintSource, EntityDb, MetricReport, PredictionSet,
};
use crate::error::Result;
use crate::promptc::parse_belief_state;
use crate::schema::{BeliefState, Dialogue, Speaker, TaskKind};
use crate::text::tokenize;

type TokenPair = (Vec<String>, Vec<String>);

/// Hypothesis/reference token pairs for every speaker2 turn; a missing
/// prediction becomes an empty hypothesis. Also returns the missing count.
pub fn nlg_pairs(dialogues: &[Dialogue], preds: &PredictionSet) -> (Vec<TokenPair>, usize) {
    let mut missing = 0;
    let pairs = dialogues
        .iter()
        .flat_map(|d| d.turns.iter().map(move |t| (d, t)))
        .filter(|(_, t)| t.speaker == Speaker::Speaker2)
        .map(|(d, t)| {
            let hyp = preds.get(&d.id, t.index).map(tokenize).unwrap_or_else(|| {
                missing += 1;
                Vec::new()
            });
            (hyp, tokenize(&t.text))
        })
        .collect();
    (pairs, missing)
}

/// Last dialogue state per dialogue: from the gold annotations, or, when
/// `generated` is given, parsed from the prediction at the last speaker1
/// turn that has one.
pub fn final_states(
    dialogues: &[Dialogue],
    generated: Option<&PredictionSet>,
) -> BTreeMap<String, BeliefState> {
    let mut out = BTreeMap::new();
    for d in dialogues {
        let user_turns = d
            .turns
            .iter()
            .rev()
            .filter(|t| t.speaker == Speaker::Speaker1);
        let state = match generated {
            None => user_turns.filter_map(|t| t.belief.clone()).next(),
            Some(p) => user_turns
                .filter_map(|t| p.get(&d.id, t.index))
                .map(|text| parse_belief_state(text).state)
                .next(),
        };
        if let Some(s) = state {
            out.insert(d.id.clone(), s);
        }
    }
    out
}

/// BLEU, Inform, Success and Combined Score.
pub fn evaluate_nlg(
    dialogues: &[Dialogue],
    preds: &PredictionSet,
    db: &EntityDb,
    constraints: ConstraintSource<'_>,
) -> Result<MetricReport> {
    let (pairs, missing) = nlg_pairs(dialogues, preds);
    let bleu = bleu_corpus(&pairs)?;
    let is = inform_success(dialogues, preds, db, constraints);

    let mut r = MetricReport::new(TaskKind::Nlg);
    r.push_score("bleu", bleu.score);
    r.push_ratio("inform", is.informed as f64, is.evaluated as f64);
    r.push_ratio("success", is.succeeded as f64, is.evaluated as f64);
    r.push_score(
        "combined",
        combined_score(bleu.score, is.inform_rate(), is.success_rate())?,
    );
    r.tally("responses", pairs.len());
    r.tally("missing", missing);
    r.tally("excluded_no_goal", is.excluded);
    Ok(r)
}

pub fn evaluate_dst(dialogues: &[Dialogue], preds: &PredictionSet) -> MetricReport {
    let c = joint_goal_accuracy(&gold_states(dialogues), preds);
    let mut r = MetricReport::new(TaskKind::Dst);
    r.push_ratio("jga", c.correct as f64, c.total as f64);
    r.tally("turns", c.total);
    r.tally("missing", c.missing);
    r.tally("dropped_segments", c.dropped_segments);
    r
}

pub fn evaluate_ic(dialogues: &[Dialogue], preds: &PredictionSet) -> Result<MetricReport> {
    let mut gold = Vec::new();
    let mut predicted = Vec::new();
    let mut missing = 0;
    for d in dialogues {
        for t in &d.turns {
            let Some(label) = &t.intent else { continue };
            gold.push(label.as_str());
            predicted.push(preds.get(&d.id, t.index).unwrap_or_else(|| {
                missing += 1;
                ""
            }));
        }
    }
    let acc = intent_accuracy(&gold, &predicted)?;
    let mut r = MetricReport::new(TaskKind::Ic);
    r.push_ratio("accuracy", acc.correct as f64, acc.total as f64);
    r.tally("missing", missing);
    Ok(r)
}

/// Mean ROUGE-1/2/L over dialogues with a reference summary. The
/// prediction for a dialogue sits at turn index 0.
pub fn evaluate_summ(dialogues: &[Dialogue], preds: &PredictionSet) -> Result<MetricReport> {
    let (mut r1, mut r2, mut rl) = (0.0, 0.0, 0.0);
    let (mut n, mut missing) = (0usize, 0usize);
    for d in dialogues {
        let Some(summary) = &d.summary else { continue };
        let hyp = preds.get(&d.id, 0).map(tokenize).unwrap_or_else(|| {
            missing += 1;
            Vec::new()
        });
        let s = rouge_scores(&hyp, &tokenize(summary))?;
        r1 += s.r1 / 100.0;
        r2 += s.r2 / 100.0;
        rl += s.rl / 100.0;
        n += 1;
    }
    let mut r = MetricReport::new(TaskKind::Summ);
    r.push_ratio("rouge1", r1, n as f64);
    r.push_ratio("rouge2", r2, n as f64);
    r.push_ratio("rougeL", rl, n as f64);
    r.tally("summaries", n);
    r.tally("missing", missing);
    Ok(r)
}
