//! JSON table files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CharTable, LibError, ModelConstants, TableEntry, SCHEMA_VERSION};

#[derive(Serialize)]
struct TableFileOut<'a> {
    schema_version: u32,
    charge_fc: f64,
    constants: Option<&'a ModelConstants>,
    entries: Vec<&'a TableEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFileIn {
    #[serde(rename = "schema_version")]
    _schema_version: u32,
    charge_fc: f64,
    constants: Option<ModelConstants>,
    entries: Vec<TableEntry>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (before + column.saturating_sub(1)).min(text.len())
}

impl CharTable {
    pub fn to_json(&self) -> String {
        let file = TableFileOut {
            schema_version: SCHEMA_VERSION,
            charge_fc: self.charge_fc,
            constants: self.constants.as_ref(),
            entries: self.entries.values().collect(),
        };
        let mut s = serde_json::to_string(&file).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<CharTable, LibError> {
        let parse_err = |e: serde_json::Error| LibError::Parse {
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        };
        // Check the version first so a newer file fails with a clear message
        // rather than a field mismatch.
        let probe: VersionProbe = serde_json::from_str(text).map_err(parse_err)?;
        if probe.schema_version != SCHEMA_VERSION {
            return Err(LibError::SchemaVersion {
                found: probe.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let file: TableFileIn = serde_json::from_str(text).map_err(parse_err)?;
        if !(file.charge_fc > 0.0) {
            return Err(LibError::InvalidParams(format!(
                "charge {} fC must be > 0",
                file.charge_fc
            )));
        }
        if let Some(c) = &file.constants {
            c.validate()?;
        }
        CharTable::from_entries(file.charge_fc, file.constants, file.entries)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LibError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CharTable, LibError> {
        CharTable::from_json(&std::fs::read_to_string(path)?)
    }
}
