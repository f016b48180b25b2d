//! CSV input: header `time,status`, status 1 = event, 0 = censored, `#` comments.

use std::io::Read;
use std::path::Path;

use kmboot_core::{ObservedSample, Record};

use crate::error::{CliError, CliResult};

/// Parsed sample plus human-readable warnings.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub sample: ObservedSample,
    pub warnings: Vec<String>,
}

pub fn ingest(path: &Path) -> CliResult<Ingested> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    parse(file)
}

pub fn parse<R: Read>(input: R) -> CliResult<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let header = reader
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header: {e}")))?
        .clone();
    if header.is_empty() || header.len() == 1 && header[0].is_empty() {
        return Err(CliError::Input(
            "empty input: expected header `time,status`".into(),
        ));
    }
    if header.len() != 2 || &header[0] != "time" || &header[1] != "status" {
        return Err(CliError::Input(format!(
            "line 1: expected header `time,status`, got `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 2 {
            return Err(CliError::Input(format!(
                "line {line}: malformed row, expected 2 fields, got {}",
                row.len()
            )));
        }
        let time: f64 = row[0]
            .parse()
            .map_err(|_| CliError::Input(format!("line {line}: malformed time `{}`", &row[0])))?;
        if !(time > 0.0 && time.is_finite()) {
            return Err(CliError::Input(format!(
                "line {line}: times strictly positive and finite, got {}",
                &row[0]
            )));
        }
        let record = match &row[1] {
            "1" => Record::event(time),
            "0" => Record::censored(time),
            other => {
                return Err(CliError::Input(format!(
                    "line {line}: unknown status `{other}` (expected 0 or 1)"
                )))
            }
        };
        records.push(record);
    }
    if records.is_empty() {
        return Err(CliError::Input("empty input: no data rows".into()));
    }
    let sample = ObservedSample::new(records)?;
    let mut warnings = Vec::new();
    let dups = sample.duplicate_time_count();
    if dups > 0 {
        warnings.push(format!(
            "{dups} records repeat an earlier time; ties are resolved events-first"
        ));
    }
    Ok(Ingested { sample, warnings })
}
