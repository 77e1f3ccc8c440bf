//! Inform and Success rates for end-to-end dialogue modeling.
//!
//! A dialogue *informs* when, for every goal domain that needs an entity,
//! some predicted system response mentions `[<domain>_name]` or the name
//! of a database entity that satisfies the domain's constraints. It
//! *succeeds* when it informs and every requestable slot of every goal
//! domain shows up as `[<domain>_<slot>]` or `[value_<slot>]` in some
//! response.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::predictions::PredictionSet;
use crate::error::{Error, Result};
use crate::schema::{BeliefState, Dialogue, Speaker};
use crate::text;

pub type Entity = BTreeMap<String, String>;

/// One line of an entity database file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub domain: String,
    pub slots: Entity,
}

/// Venue database: entities per domain, names unique within a domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntityDb {
    domains: BTreeMap<String, Vec<Entity>>,
}

impl EntityDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, domain: &str, entity: Entity) -> Result<()> {
        let domain = domain.trim().to_lowercase();
        let name = entity
            .get("name")
            .map(|n| text::normalize(n))
            .filter(|n| !n.is_empty())
            .ok_or_else(|| Error::Invalid(format!("{domain} entity without a name")))?;
        let entities = self.domains.entry(domain.clone()).or_default();
        if entities.iter().any(|e| text::normalize(&e["name"]) == name) {
            return Err(Error::DuplicateId(format!("{domain}/{name}")));
        }
        entities.push(entity);
        Ok(())
    }

    pub fn has_domain(&self, domain: &str) -> bool {
        self.domains.contains_key(domain)
    }

    pub fn len(&self) -> usize {
        self.domains.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entities whose values agree with every constraint slot they define.
    /// Constraint slots the entity lacks are ignored.
    pub fn matching<'a>(
        &'a self,
        domain: &str,
        constraints: &'a BTreeMap<String, String>,
    ) -> impl Iterator<Item = &'a Entity> {
        self.domains
            .get(domain)
            .into_iter()
            .flatten()
            .filter(move |e| {
                constraints.iter().all(|(slot, want)| match e.get(slot) {
                    Some(have) => text::normalize(have) == text::normalize(want),
                    None => true,
                })
            })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut db = EntityDb::new();
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
            let rec: EntityRecord =
                serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
            db.insert(&rec.domain, rec.slots)
                .map_err(|e| malformed(e.to_string()))?;
        }
        Ok(db)
    }
}

/// Where the constraints for the database lookup come from.
#[derive(Clone, Copy, Debug, Default)]
pub enum ConstraintSource<'a> {
    /// The goal's own constraints.
    #[default]
    Goal,
    /// A final dialogue state per dialogue id (gold or generated). Dialogues
    /// absent from the map fall back to the goal.
    States(&'a BTreeMap<String, BeliefState>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InformSuccess {
    pub informed: usize,
    pub succeeded: usize,
    /// Dialogues with a goal.
    pub evaluated: usize,
    /// Dialogues skipped for lack of a goal.
    pub excluded: usize,
}

impl InformSuccess {
    pub fn inform_rate(&self) -> f64 {
        rate(self.informed, self.evaluated)
    }

    pub fn success_rate(&self) -> f64 {
        rate(self.succeeded, self.evaluated)
    }
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Per-dialogue judgement: `(informed, succeeded)`.
pub fn judge_dialogue(
    d: &Dialogue,
    responses: &[&str],
    db: &EntityDb,
    constraints: ConstraintSource<'_>,
) -> Option<(bool, bool)> {
    let goal = d.goal.as_ref()?;
    let lowered: Vec<String> = responses.iter().map(|r| r.to_lowercase()).collect();
    let tokenized: Vec<Vec<String>> = responses.iter().map(|r| text::tokenize(r)).collect();
    let mentions = |needle: &str| lowered.iter().any(|r| r.contains(needle));

    let state = match constraints {
        ConstraintSource::States(states) => states.get(&d.id),
        ConstraintSource::Goal => None,
    };

    let informed = goal
        .domains()
        .filter(|(_, g)| g.entity_required)
        .all(|(domain, g)| {
            if mentions(&format!("[{domain}_name]")) {
                return true;
            }
            if !db.has_domain(domain) {
                return false;
            }
            let wanted =
                state.map_or_else(|| g.constraints.clone(), |s| s.domain_constraints(domain));
            let found = db.matching(domain, &wanted).any(|e| {
                let name = text::tokenize(&e["name"]);
                tokenized.iter().any(|r| contains_run(r, &name))
            });
            found
        });

    let requested: BTreeSet<(&str, &str)> = goal
        .domains()
        .flat_map(|(domain, g)| g.requestables.iter().map(move |r| (domain, r.as_str())))
        .collect();
    let answered = requested.iter().all(|(domain, slot)| {
        mentions(&format!("[{domain}_{slot}]")) || mentions(&format!("[value_{slot}]"))
    });

    Some((informed, informed && answered))
}

/// Inform and Success over all dialogues with goals. Responses are the
/// predictions for each dialogue's speaker2 turns.
pub fn inform_success(
    dialogues: &[Dialogue],
    preds: &PredictionSet,
    db: &EntityDb,
    constraints: ConstraintSource<'_>,
) -> InformSuccess {
    let mut out = InformSuccess::default();
    for d in dialogues {
        let responses: Vec<&str> = d
            .turns
            .iter()
            .filter(|t| t.speaker == Speaker::Speaker2)
            .filter_map(|t| preds.get(&d.id, t.index))
            .collect();
        match judge_dialogue(d, &responses, db, constraints) {
            Some((inform, success)) => {
                out.evaluated += 1;
                out.informed += usize::from(inform);
                out.succeeded += usize::from(success);
            }
            None => out.excluded += 1,
        }
    }
    out
}
