use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{records, Collector, IngestStats};
use crate::error::{Error, Result};
use crate::schema::Dialogue;

/// Loads a canonical dialogue file (one JSON dialogue per line).
///
/// An unreadable file is fatal. Malformed or invalid lines are recorded as
/// rejections and skipped.
pub fn load_canonical(path: &Path) -> Result<(Vec<Dialogue>, IngestStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_canonical(BufReader::new(file), path)
}

pub fn read_canonical<R: BufRead>(reader: R, path: &Path) -> Result<(Vec<Dialogue>, IngestStats)> {
    let mut collector = Collector::default();
    for (ordinal, line) in records(reader, path)? {
        match serde_json::from_str::<Dialogue>(&line) {
            Ok(d) => collector.offer(ordinal, d),
            Err(e) => collector.reject(ordinal, format!("malformed dialogue: {e}")),
        }
    }
    Ok(collector.finish())
}
