use super::{AdapterError, DatasetDescriptor};
use crate::schema::{Dialogue, Speaker, OPEN_DOMAIN};

/// One intent-classification row. `domain` falls back to the open-domain
/// sentinel when the source table has no domain column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntentRow {
    pub text: String,
    pub label: String,
    pub domain: Option<String>,
}

impl IntentRow {
    pub fn new(text: &str, label: &str) -> Self {
        IntentRow {
            text: text.to_string(),
            label: label.to_string(),
            domain: None,
        }
    }
}

/// Parses `text<TAB>label[<TAB>domain]`.
pub fn parse_intent_row(line: &str) -> Option<IntentRow> {
    let mut cols = line.split('\t');
    let text = cols.next()?;
    let label = cols.next()?;
    let domain = cols.next().map(str::trim).filter(|s| !s.is_empty());
    Some(IntentRow {
        text: text.to_string(),
        label: label.to_string(),
        domain: domain.map(str::to_lowercase),
    })
}

/// Turns each `(ordinal, row)` into a single-turn dialogue whose id is
/// `<dataset>-<ordinal>`.
pub fn adapt_intent_table(
    rows: &[(usize, IntentRow)],
    dataset: &DatasetDescriptor,
) -> Vec<(usize, Result<Dialogue, AdapterError>)> {
    rows.iter()
        .map(|(ordinal, row)| {
            let id = format!("{}-{ordinal}", dataset.name);
            let outcome = if row.text.trim().is_empty() {
                Err(AdapterError::new(&id, "empty utterance text"))
            } else if row.label.trim().is_empty() {
                Err(AdapterError::new(&id, "blank intent label"))
            } else {
                let domain = row.domain.as_deref().unwrap_or(OPEN_DOMAIN);
                let mut d = Dialogue::new(&id, &dataset.name, &[domain]);
                d.push_turn(Speaker::Speaker1, row.text.trim()).intent =
                    Some(row.label.trim().to_string());
                Ok(d)
            };
            (*ordinal, outcome)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AdapterKind, DomainCount};
    use crate::schema::TaskKind;

    fn banking() -> DatasetDescriptor {
        DatasetDescriptor::new(
            "banking77",
            &[TaskKind::Ic],
            AdapterKind::IntentTable,
            DomainCount::Count(1),
        )
    }

    fn numbered(rows: Vec<IntentRow>) -> Vec<(usize, IntentRow)> {
        rows.into_iter().enumerate().collect()
    }

    #[test]
    fn row_becomes_single_turn_dialogue() {
        let out = adapt_intent_table(
            &numbered(vec![IntentRow::new(
                "book a table for two",
                "book_restaurant",
            )]),
            &banking(),
        );
        let d = out[0].1.as_ref().unwrap();
        assert_eq!(d.turns.len(), 1);
        assert_eq!(d.turns[0].intent.as_deref(), Some("book_restaurant"));
    }

    #[test]
    fn ids_follow_row_ordinals() {
        let rows = numbered(vec![
            IntentRow::new("a", "x"),
            IntentRow::new("b", "y"),
            IntentRow::new("c", "z"),
        ]);
        let ids: Vec<_> = adapt_intent_table(&rows, &banking())
            .into_iter()
            .map(|(_, d)| d.unwrap().id)
            .collect();
        assert_eq!(ids, vec!["banking77-0", "banking77-1", "banking77-2"]);
    }

    #[test]
    fn blank_label_and_text_rejected() {
        let rows = numbered(vec![
            IntentRow::new("hello", "  "),
            IntentRow::new(" ", "greet"),
        ]);
        let out = adapt_intent_table(&rows, &banking());
        assert!(out[0].1.as_ref().unwrap_err().reason.contains("label"));
        assert!(out[1].1.as_ref().unwrap_err().reason.contains("text"));
    }

    #[test]
    fn parses_tab_separated_rows() {
        let row = parse_intent_row("play jazz\tplay_music\tMusic").unwrap();
        assert_eq!(row.domain.as_deref(), Some("music"));
        assert!(parse_intent_row("no tab here").is_none());
    }
}
