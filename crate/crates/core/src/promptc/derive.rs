//! Per-task example derivation from a single dialogue.

use std::collections::{BTreeMap, BTreeSet};

use super::belief::{linearize_acts, linearize_belief_state, EMPTY_STATE};
use super::template::PromptTemplate;
use super::{apply_prompt, PromptedExample};
use crate::error::Result;
use crate::sampling::{fnv1a, SeededRng};
use crate::schema::{Dialogue, Speaker, TaskKind, Turn};
use crate::text;

/// Renders turns as `user: ... system: ...`, single-space joined.
pub fn render_context(turns: &[Turn]) -> String {
    turns
        .iter()
        .map(|t| format!("{}: {}", t.speaker.role(), t.text.trim()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Speaker2 turns of a compilation shard, the pool NUP negatives are drawn
/// from.
#[derive(Clone, Debug, Default)]
pub struct ResponsePool {
    entries: Vec<PoolEntry>,
}

#[derive(Clone, Debug)]
struct PoolEntry {
    dialogue_id: String,
    turn: usize,
    text: String,
    normalized: String,
}

impl ResponsePool {
    pub fn from_dialogues(dialogues: &[Dialogue]) -> Self {
        let entries = dialogues
            .iter()
            .flat_map(|d| {
                d.turns
                    .iter()
                    .filter(|t| t.speaker == Speaker::Speaker2)
                    .map(move |t| PoolEntry {
                        dialogue_id: d.id.clone(),
                        turn: t.index,
                        text: t.text.trim().to_string(),
                        normalized: text::normalize(&t.text),
                    })
            })
            .collect();
        ResponsePool { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Up to `k` negatives for the speaker2 turn `(dialogue_id, turn)`:
    /// uniform without replacement over pool entries other than that turn
    /// and other than any response with the same normalized text. The
    /// generator stream is keyed by the turn, so the draw does not depend
    /// on the order dialogues are compiled in.
    pub fn negatives(
        &self,
        dialogue_id: &str,
        turn: usize,
        positive: &str,
        k: usize,
        seed: u64,
    ) -> Vec<&str> {
        let positive = text::normalize(positive);
        let stream = fnv1a(format!("{dialogue_id}#{turn}").as_bytes());
        let mut rng = SeededRng::with_stream(seed, stream);
        rng.sample_where(self.entries.len(), k, |i| {
            let e = &self.entries[i];
            !(e.dialogue_id == dialogue_id && e.turn == turn) && e.normalized != positive
        })
        .into_iter()
        .map(|i| self.entries[i].text.as_str())
        .collect()
    }
}

/// Slot inventory per domain, observed over a corpus' dialogue states.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    slots: BTreeMap<String, BTreeSet<String>>,
}

impl Ontology {
    pub fn from_dialogues(dialogues: &[Dialogue]) -> Self {
        let mut slots: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for turn in dialogues.iter().flat_map(|d| &d.turns) {
            if let Some(state) = &turn.belief {
                for (domain, slot, _) in state.iter() {
                    slots
                        .entry(domain.to_string())
                        .or_default()
                        .insert(slot.to_string());
                }
            }
        }
        Ontology { slots }
    }

    /// `[domain] slot slot ...` for the given domains that have known slots.
    pub fn render(&self, domains: &BTreeSet<String>) -> String {
        let groups: Vec<String> = domains
            .iter()
            .filter_map(|d| {
                self.slots
                    .get(d)
                    .map(|s| format!("[{d}] {}", s.iter().cloned().collect::<Vec<_>>().join(" ")))
            })
            .collect();
        if groups.is_empty() {
            EMPTY_STATE.to_string()
        } else {
            groups.join(" ")
        }
    }
}

/// Shard-level inputs to derivation.
#[derive(Clone, Copy, Debug)]
pub struct DeriveContext<'a> {
    /// Negatives per positive NUP example.
    pub neg_k: usize,
    pub seed: u64,
    pub pool: &'a ResponsePool,
    pub ontology: &'a Ontology,
}

/// Option labels `a`, `b`, ..., `z`, `aa`, `ab`, ...
pub fn option_label(mut index: usize) -> String {
    let mut label = Vec::new();
    loop {
        label.push(b'a' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    label.reverse();
    String::from_utf8(label).expect("ascii")
}

struct Emitter<'a> {
    d: &'a Dialogue,
    task: TaskKind,
    template: &'a PromptTemplate,
    out: Vec<PromptedExample>,
}

impl Emitter<'_> {
    fn emit(
        &mut self,
        key: &str,
        turn: Option<usize>,
        values: &[(&'static str, String)],
    ) -> Result<()> {
        let values: BTreeMap<&str, String> = values.iter().cloned().collect();
        let id = format!("{}#{key}#{}", self.d.id, self.task);
        let mut ex = apply_prompt(self.task, &values, self.template, &self.d.dataset, &id)?;
        ex.dialogue_id = self.d.id.clone();
        ex.turn = turn;
        self.out.push(ex);
        Ok(())
    }
}

/// All examples of `task` that `d` supports. Dialogues without the
/// annotation a task needs yield nothing.
pub fn derive_task_examples(
    d: &Dialogue,
    task: TaskKind,
    template: &PromptTemplate,
    ctx: &DeriveContext<'_>,
) -> Result<Vec<PromptedExample>> {
    let mut em = Emitter {
        d,
        task,
        template,
        out: Vec::new(),
    };
    let turns = &d.turns;

    match task {
        TaskKind::Nlg => {
            for (i, t) in turns
                .iter()
                .enumerate()
                .filter(|(_, t)| t.speaker == Speaker::Speaker2)
            {
                let mut context = render_context(&turns[..i]);
                if let Some(n) = t.db_result {
                    if !context.is_empty() {
                        context.push(' ');
                    }
                    context.push_str(&format!("db: {n}"));
                }
                em.emit(
                    &i.to_string(),
                    Some(i),
                    &[
                        ("context", context),
                        ("response", t.text.trim().to_string()),
                    ],
                )?;
            }
        }
        TaskKind::Dst => {
            for (i, t) in turns.iter().enumerate() {
                let (Speaker::Speaker1, Some(state)) = (t.speaker, &t.belief) else {
                    continue;
                };
                em.emit(
                    &i.to_string(),
                    Some(i),
                    &[
                        ("context", render_context(&turns[..=i])),
                        ("ontology", ctx.ontology.render(&d.domains)),
                        ("state", linearize_belief_state(state)),
                    ],
                )?;
            }
        }
        TaskKind::Pol => {
            for (i, t) in turns.iter().enumerate() {
                let (Speaker::Speaker2, Some(acts)) = (t.speaker, &t.acts) else {
                    continue;
                };
                em.emit(
                    &i.to_string(),
                    Some(i),
                    &[
                        ("context", render_context(&turns[..i])),
                        ("acts", linearize_acts(acts)),
                    ],
                )?;
            }
        }
        TaskKind::Ic => {
            for (i, t) in turns.iter().enumerate() {
                let Some(intent) = &t.intent else { continue };
                em.emit(
                    &i.to_string(),
                    Some(i),
                    &[
                        ("utterance", t.text.trim().to_string()),
                        ("context", render_context(&turns[..i])),
                        ("intent", intent.trim().to_string()),
                    ],
                )?;
            }
        }
        TaskKind::Mcqa => {
            let context = render_context(turns);
            for (k, item) in d.mcqa.iter().flatten().enumerate() {
                let options = item
                    .options
                    .iter()
                    .enumerate()
                    .map(|(j, o)| format!("{}) {}", option_label(j), o.trim()))
                    .collect::<Vec<_>>()
                    .join(" ");
                let answer = format!(
                    "{}) {}",
                    option_label(item.answer_index),
                    item.options[item.answer_index].trim()
                );
                em.emit(
                    &format!("q{k}"),
                    None,
                    &[
                        ("context", context.clone()),
                        ("question", item.question.trim().to_string()),
                        ("options", options),
                        ("answer", answer),
                    ],
                )?;
            }
        }
        TaskKind::Nup => {
            if let Some(cands) = &d.nup_candidates {
                let context = render_context(turns);
                for (k, c) in cands.iter().enumerate() {
                    em.emit(
                        &format!("c{k}"),
                        None,
                        &[
                            ("context", context.clone()),
                            ("candidate", c.text.trim().to_string()),
                            ("yes_no", if c.is_next { "yes" } else { "no" }.to_string()),
                        ],
                    )?;
                }
            } else {
                for (i, t) in turns
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.speaker == Speaker::Speaker2)
                {
                    let context = render_context(&turns[..i]);
                    let positive = t.text.trim();
                    em.emit(
                        &format!("{i}#pos"),
                        Some(i),
                        &[
                            ("context", context.clone()),
                            ("candidate", positive.to_string()),
                            ("yes_no", "yes".into()),
                        ],
                    )?;
                    for (j, neg) in ctx
                        .pool
                        .negatives(&d.id, i, positive, ctx.neg_k, ctx.seed)
                        .into_iter()
                        .enumerate()
                    {
                        em.emit(
                            &format!("{i}#neg{j}"),
                            Some(i),
                            &[
                                ("context", context.clone()),
                                ("candidate", neg.to_string()),
                                ("yes_no", "no".into()),
                            ],
                        )?;
                    }
                }
            }
        }
        TaskKind::Summ => {
            if let Some(summary) = &d.summary {
                em.emit(
                    "d",
                    None,
                    &[
                        ("context", render_context(turns)),
                        ("summary", summary.trim().to_string()),
                    ],
                )?;
            }
        }
    }
    Ok(em.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{BeliefState, DialogueAct, McqaItem, NupCandidate};

    fn tod(id: &str) -> Dialogue {
        let mut d = Dialogue::new(id, "toy", &["restaurant"]);
        let mut state = BeliefState::new();
        let exchanges = [
            ("i want italian food", ("food", "italian"), "which area?"),
            ("the centre please", ("area", "centre"), "i have 3 places"),
            (
                "something cheap",
                ("pricerange", "cheap"),
                "try the pizza hut",
            ),
        ];
        for (user, (slot, value), system) in exchanges {
            state.set("restaurant", slot, value).unwrap();
            d.push_turn(Speaker::Speaker1, user).belief = Some(state.clone());
            let t = d.push_turn(Speaker::Speaker2, system);
            t.acts = Some(vec![DialogueAct {
                act: "request".into(),
                domain: "restaurant".into(),
                slot: Some("area".into()),
                value: None,
            }]);
        }
        d.turns[3].db_result = Some(3);
        d
    }

    fn derive(
        d: &Dialogue,
        task: TaskKind,
        pool: &ResponsePool,
        neg_k: usize,
        seed: u64,
    ) -> Vec<PromptedExample> {
        let ontology = Ontology::from_dialogues(std::slice::from_ref(d));
        let ctx = DeriveContext {
            neg_k,
            seed,
            pool,
            ontology: &ontology,
        };
        derive_task_examples(d, task, &PromptTemplate::default_for(task), &ctx).unwrap()
    }

    #[test]
    fn three_exchanges_give_three_dst_and_three_nlg() {
        let d = tod("t1");
        let pool = ResponsePool::default();
        assert_eq!(derive(&d, TaskKind::Dst, &pool, 0, 0).len(), 3);
        assert_eq!(derive(&d, TaskKind::Nlg, &pool, 0, 0).len(), 3);
        assert_eq!(derive(&d, TaskKind::Pol, &pool, 0, 0).len(), 3);
        assert!(derive(&d, TaskKind::Ic, &pool, 0, 0).is_empty());
    }

    #[test]
    fn dst_target_is_cumulative_state() {
        let d = tod("t1");
        let out = derive(&d, TaskKind::Dst, &ResponsePool::default(), 0, 0);
        assert_eq!(
            out[1].target_text,
            "[restaurant] area centre , food italian"
        );
        assert_eq!(
            out[1].source_text,
            "translate dialogue to belief state: user: i want italian food system: which area? user: the centre please"
        );
        assert_eq!(out[1].id, "t1#2#dst");
    }

    #[test]
    fn nlg_context_carries_db_count() {
        let d = tod("t1");
        let out = derive(&d, TaskKind::Nlg, &ResponsePool::default(), 0, 0);
        assert_eq!(
            out[1].source_text,
            "translate dialogue to system response: user: i want italian food system: which area? user: the centre please db: 3"
        );
        assert_eq!(out[1].target_text, "i have 3 places");
        assert!(!out[0].source_text.contains("db:"));
    }

    #[test]
    fn absent_summary_yields_nothing() {
        assert!(derive(&tod("t1"), TaskKind::Summ, &ResponsePool::default(), 0, 0).is_empty());
    }

    #[test]
    fn nup_counts_and_determinism() {
        let mut d = Dialogue::new("n1", "toy", &["open"]);
        d.push_turn(Speaker::Speaker1, "hi");
        d.push_turn(Speaker::Speaker2, "hello there");
        d.push_turn(Speaker::Speaker1, "how are you");
        d.push_turn(Speaker::Speaker2, "fine thanks");
        let shard = vec![d.clone(), tod("t1"), tod("t2")];
        let pool = ResponsePool::from_dialogues(&shard);
        let a = derive(&d, TaskKind::Nup, &pool, 2, 42);
        let b = derive(&d, TaskKind::Nup, &pool, 2, 42);
        assert_eq!(a.len(), 6);
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|e| e.target_text == "yes").count(), 2);
        assert_eq!(a.iter().filter(|e| e.target_text == "no").count(), 4);
        for e in a.iter().filter(|e| e.target_text == "no") {
            assert!(!(e.turn == Some(1) && e.source_text.contains("candidate: hello there is")));
        }
    }

    #[test]
    fn nup_negatives_never_repeat_the_positive() {
        let shard = vec![tod("t1"), tod("t2")];
        let pool = ResponsePool::from_dialogues(&shard);
        // t2 has identical responses to t1, so every same-text entry is excluded
        // and only the other two distinct responses remain.
        let negs = pool.negatives("t1", 1, "which area?", 10, 7);
        assert_eq!(negs.len(), 4);
        assert!(negs.iter().all(|n| *n != "which area?"));
    }

    #[test]
    fn explicit_nup_candidates_are_used() {
        let mut d = Dialogue::new("u1", "ubuntu", &["ubuntu"]);
        d.push_turn(Speaker::Speaker1, "my wifi is down");
        d.nup_candidates = Some(vec![
            NupCandidate {
                text: "try rebooting".into(),
                is_next: true,
            },
            NupCandidate {
                text: "i like cheese".into(),
                is_next: false,
            },
        ]);
        let out = derive(&d, TaskKind::Nup, &ResponsePool::default(), 5, 0);
        let targets: Vec<_> = out.iter().map(|e| e.target_text.as_str()).collect();
        assert_eq!(targets, vec!["yes", "no"]);
    }

    #[test]
    fn mcqa_renders_lettered_options() {
        let mut d = Dialogue::new("m1", "dream", &["open"]);
        d.push_turn(Speaker::Speaker1, "shall we meet at noon?");
        d.push_turn(Speaker::Speaker2, "make it one o'clock");
        d.mcqa = Some(vec![McqaItem {
            question: "when will they meet?".into(),
            options: vec!["noon".into(), "one o'clock".into(), "two".into()],
            answer_index: 1,
        }]);
        let out = derive(&d, TaskKind::Mcqa, &ResponsePool::default(), 0, 0);
        assert_eq!(out.len(), 1);
        assert!(out[0]
            .source_text
            .ends_with("options: a) noon b) one o'clock c) two"));
        assert_eq!(out[0].target_text, "b) one o'clock");
    }

    #[test]
    fn intent_examples() {
        let mut d = Dialogue::new("b-0", "banking77", &["open"]);
        d.push_turn(Speaker::Speaker1, "my card was declined")
            .intent = Some("declined_card_payment".into());
        let out = derive(&d, TaskKind::Ic, &ResponsePool::default(), 0, 0);
        assert_eq!(
            out[0].source_text,
            "translate dialogue to user intent: my card was declined"
        );
        assert_eq!(out[0].target_text, "declined_card_payment");
    }

    #[test]
    fn ontology_placeholder() {
        let d = tod("t1");
        let ontology = Ontology::from_dialogues(std::slice::from_ref(&d));
        assert_eq!(
            ontology.render(&d.domains),
            "[restaurant] area food pricerange"
        );
        let t = PromptTemplate::new(TaskKind::Dst, "{ontology} | {context}", "{state}").unwrap();
        let pool = ResponsePool::default();
        let ctx = DeriveContext {
            neg_k: 0,
            seed: 0,
            pool: &pool,
            ontology: &ontology,
        };
        let out = derive_task_examples(&d, TaskKind::Dst, &t, &ctx).unwrap();
        assert!(out[0]
            .source_text
            .starts_with("[restaurant] area food pricerange | user:"));
        let empty = Ontology::default();
        assert_eq!(empty.render(&d.domains), "none");
    }

    #[test]
    fn option_labels() {
        assert_eq!(option_label(0), "a");
        assert_eq!(option_label(25), "z");
        assert_eq!(option_label(26), "aa");
        assert_eq!(option_label(27), "ab");
    }
}
