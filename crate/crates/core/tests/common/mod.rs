#![allow(dead_code)]

use std::collections::BTreeMap;

use dialkit::sampling::SeededRng;
use dialkit::schema::{DialogueAct, DomainGoal, Goal, McqaItem, NupCandidate};
use dialkit::{BeliefState, Dialogue, Speaker};

pub const DOMAINS: [&str; 5] = ["train", "taxi", "restaurant", "hotel", "attraction"];
pub const SLOTS: [&str; 8] = [
    "area", "price", "stars", "food", "day", "people", "leave_at", "name",
];
pub const WORDS: [&str; 16] = [
    "north",
    "south",
    "cheap",
    "expensive",
    "4",
    "2",
    "monday",
    "friday",
    "italian",
    "the",
    "golden",
    "curry",
    "5pm",
    "centre",
    "free",
    "yes",
];

pub struct Gen(SeededRng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(SeededRng::new(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.below(n)
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.0.below(hi - lo + 1)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.0.below(items.len())]
    }

    pub fn chance(&mut self, percent: usize) -> bool {
        self.0.below(100) < percent
    }

    pub fn unit(&mut self) -> f64 {
        self.0.below(1_000_000) as f64 / 1_000_000.0
    }

    pub fn phrase(&mut self, max_words: usize) -> String {
        let n = self.range(1, max_words);
        (0..n)
            .map(|_| *self.pick(&WORDS))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn tokens(&mut self, vocab: usize, max_len: usize, min_len: usize) -> Vec<String> {
        let n = self.range(min_len, max_len);
        (0..n).map(|_| format!("w{}", self.below(vocab))).collect()
    }

    pub fn triples(&mut self, max: usize) -> Vec<(String, String, String)> {
        let mut seen = BTreeMap::new();
        for _ in 0..self.range(0, max) {
            let key = (
                self.pick(&DOMAINS).to_string(),
                self.pick(&SLOTS).to_string(),
            );
            let value = self.phrase(3);
            seen.entry(key).or_insert(value);
        }
        seen.into_iter().map(|((d, s), v)| (d, s, v)).collect()
    }

    pub fn state(&mut self, max: usize) -> BeliefState {
        let mut s = BeliefState::new();
        for (d, slot, v) in self.triples(max) {
            s.set(&d, &slot, &v).unwrap();
        }
        s
    }
}

/// A fully annotated corpus: every task has something to derive.
pub fn toy_corpus(n: usize, seed: u64) -> Vec<Dialogue> {
    let mut g = Gen::new(seed);
    (0..n)
        .map(|i| {
            let domain = DOMAINS[i % DOMAINS.len()];
            let mut d = Dialogue::new(format!("toy-{i:03}"), "toy", &[domain]);
            let mut state = BeliefState::new();
            let exchanges = g.range(1, 4);
            for k in 0..exchanges {
                let slot = *g.pick(&SLOTS);
                let value = g.phrase(2);
                state.set(domain, slot, &value).unwrap();
                let user = d.push_turn(
                    Speaker::Speaker1,
                    format!("dialogue {i} turn {k} i want {slot} {value}"),
                );
                if g.chance(80) {
                    user.belief = Some(state.clone());
                }
                if g.chance(40) {
                    user.intent = Some(format!("inform_{slot}"));
                }
                let system = d.push_turn(
                    Speaker::Speaker2,
                    format!("reply {i}.{k} about [{domain}_{slot}]"),
                );
                if g.chance(70) {
                    system.acts = Some(vec![DialogueAct {
                        act: "inform".into(),
                        domain: domain.into(),
                        slot: Some(slot.into()),
                        value: None,
                    }]);
                }
                if g.chance(30) {
                    system.db_result = Some(g.below(20) as u64);
                }
            }
            if g.chance(50) {
                d.goal = Some(Goal(BTreeMap::from([(
                    domain.to_string(),
                    DomainGoal {
                        constraints: BTreeMap::from([("area".to_string(), "north".to_string())]),
                        requestables: ["phone".to_string()].into(),
                        entity_required: true,
                    },
                )])));
            }
            if g.chance(40) {
                d.summary = Some(format!("the user talks about {domain} in dialogue {i}"));
            }
            if g.chance(30) {
                let items = g.range(1, 2);
                d.mcqa = Some(
                    (0..items)
                        .map(|q| McqaItem {
                            question: format!("what does the user want {q}"),
                            options: vec!["a hotel".into(), "a taxi".into(), "a train".into()],
                            answer_index: g.below(3),
                        })
                        .collect(),
                );
            }
            if g.chance(15) {
                d.nup_candidates = Some(vec![
                    NupCandidate {
                        text: "sure , here you go".into(),
                        is_next: true,
                    },
                    NupCandidate {
                        text: "the weather is nice".into(),
                        is_next: false,
                    },
                ]);
            }
            d
        })
        .collect()
}
