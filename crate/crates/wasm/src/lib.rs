//! Browser bindings for a small metrics playground: text scoring, dialogue
//! state linearization and aspect bucketing. Every export returns a JSON
//! string so the page needs no generated type bindings.

use dialkit::analysis::{assign_bucket, Aspect, BucketSpec};
use dialkit::metrics::{bleu_corpus, rouge_scores};
use dialkit::promptc::{linearize_belief_state, parse_belief_state};
use dialkit::text::tokenize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// BLEU-4 (with its clipped precisions) and ROUGE-1/2/L of one
/// hypothesis against one reference.
pub fn score_pair(hypothesis: &str, reference: &str) -> Result<Value, String> {
    let hyp = tokenize(hypothesis);
    let reference = tokenize(reference);
    let bleu = bleu_corpus(&[(hyp.clone(), reference.clone())]).map_err(|e| e.to_string())?;
    let rouge = rouge_scores(&hyp, &reference).map_err(|e| e.to_string())?;
    Ok(json!({
        "hypothesis_tokens": hyp,
        "reference_tokens": reference,
        "bleu": bleu.score,
        "precisions": (1..=4).map(|n| bleu.precision(n)).collect::<Vec<_>>(),
        "brevity_penalty": bleu.brevity_penalty,
        "rouge1": rouge.r1,
        "rouge2": rouge.r2,
        "rougeL": rouge.rl,
    }))
}

/// Parses free-form state text and returns its canonical linearization,
/// the recovered triples and how many segments were dropped.
pub fn canonicalize_state(text: &str) -> Value {
    let parsed = parse_belief_state(text);
    json!({
        "canonical": linearize_belief_state(&parsed.state),
        "triples": parsed.state.triples(),
        "dropped": parsed.dropped,
    })
}

fn parse_numbers(list: &str) -> Result<Vec<f64>, String> {
    list.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

/// Buckets comma- or space-separated values under an aspect's intervals.
/// An empty `starts` list uses the aspect's default intervals.
pub fn bucket_values(aspect: &str, starts: &str, values: &str) -> Result<Value, String> {
    let aspect: Aspect = aspect.parse().map_err(|e: dialkit::Error| e.to_string())?;
    let bounds = parse_numbers(starts)?;
    let spec = if bounds.is_empty() {
        BucketSpec::default_for(aspect)
    } else {
        BucketSpec::new(aspect, bounds).map_err(|e| e.to_string())?
    };
    let values = parse_numbers(values)?;
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); spec.len()];
    for v in values {
        members[assign_bucket(v, &spec)].push(v);
    }
    let rows: Vec<Value> = members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mean = (!m.is_empty()).then(|| m.iter().sum::<f64>() / m.len() as f64);
            json!({ "label": spec.label(i), "count": m.len(), "mean": mean, "values": m })
        })
        .collect();
    Ok(json!({ "aspect": aspect.as_str(), "buckets": rows }))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scorePair)]
pub fn score_pair_js(hypothesis: &str, reference: &str) -> Result<String, JsError> {
    to_js(score_pair(hypothesis, reference))
}

#[wasm_bindgen(js_name = canonicalizeState)]
pub fn canonicalize_state_js(text: &str) -> String {
    canonicalize_state(text).to_string()
}

#[wasm_bindgen(js_name = bucketValues)]
pub fn bucket_values_js(aspect: &str, starts: &str, values: &str) -> Result<String, JsError> {
    to_js(bucket_values(aspect, starts, values))
}
