//! Report envelopes and their JSON / CSV encodings.

use serde::Serialize;

use crate::config::Format;
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Envelope<'a, T: Serialize> {
    schema_version: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// A rendered report: the JSON document and the CSV table carry the same
/// numbers, the CSV flattened to one row per record.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    json: String,
    csv: String,
}

impl Report {
    pub fn new<B: Serialize, R: Serialize>(command: &str, body: &B, rows: &[R]) -> Result<Self, CliError> {
        let env = Envelope { schema_version: SCHEMA_VERSION, command, body };
        let mut json = serde_json::to_string_pretty(&env).map_err(|e| CliError::Encode(e.to_string()))?;
        json.push('\n');
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Encode(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
        let csv = String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))?;
        Ok(Self { json, csv })
    }

    pub fn json(&self) -> &str {
        &self.json
    }

    pub fn csv(&self) -> &str {
        &self.csv
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        Ok(match format {
            Format::Json => self.json.clone(),
            Format::Csv => self.csv.clone(),
        })
    }
}

/// What a command produced and how the process should exit.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
    /// Lines for the error stream.
    pub diagnostics: Vec<String>,
}
