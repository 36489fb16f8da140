//! Append-only JSON-lines result store.
//!
//! The first line is a header with the schema version; each run appends a
//! `run` record carrying the config hash followed by its `row` records.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ResultRow;
use crate::{Error, Result};

pub const SCHEMA: &str = "divisor-span-results";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    Header { schema: String, version: u32 },
    Run { config: String, config_hash: String, rows: usize },
    Row(Box<ResultRow>),
}

#[derive(Debug, Clone)]
pub struct ResultStore {
    path: PathBuf,
}

fn encode(r: &Record) -> Result<String> {
    serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))
}

impl ResultStore {
    /// Opens `path`, writing the header if the file is new or empty and
    /// checking it otherwise.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let empty = match std::fs::metadata(&path) {
            Ok(m) => m.len() == 0,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => true,
            Err(e) => return Err(e.into()),
        };
        if empty {
            let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
            let header = Record::Header {
                schema: SCHEMA.into(),
                version: SCHEMA_VERSION,
            };
            writeln!(f, "{}", encode(&header)?)?;
        } else {
            let mut first = String::new();
            BufReader::new(File::open(&path)?).read_line(&mut first)?;
            match serde_json::from_str::<Record>(first.trim_end()) {
                Ok(Record::Header { schema, version }) if schema == SCHEMA && version == SCHEMA_VERSION => {}
                _ => {
                    return Err(Error::Io(format!(
                        "{}: not a {SCHEMA} v{SCHEMA_VERSION} store",
                        path.display()
                    )))
                }
            }
        }
        Ok(ResultStore { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one run; rows are written in the given order.
    pub fn append_run(&self, config: &str, config_hash: &str, rows: &[ResultRow]) -> Result<()> {
        let f = OpenOptions::new().append(true).open(&self.path)?;
        let mut w = BufWriter::new(f);
        let run = Record::Run {
            config: config.into(),
            config_hash: config_hash.into(),
            rows: rows.len(),
        };
        writeln!(w, "{}", encode(&run)?)?;
        for row in rows {
            writeln!(w, "{}", encode(&Record::Row(Box::new(row.clone())))?)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn records(&self) -> Result<Vec<Record>> {
        let reader = BufReader::new(File::open(&self.path)?);
        let mut out = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            out.push(
                serde_json::from_str(&line)
                    .map_err(|e| Error::Io(format!("{}:{}: {e}", self.path.display(), i + 1)))?,
            );
        }
        Ok(out)
    }
}
