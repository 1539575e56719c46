//! Results directory: one JSON file per grid cell plus a tab-separated
//! index in completion order.
//!
//! ```text
//! results/index.tsv
//! results/cells/<cell_id>.json
//! ```

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};
use crate::harness::{CellSpec, GridRow, RunResult};

const INDEX: &str = "index.tsv";
const INDEX_HEADER: &str = "cell_id\tstatus\tmean_accuracy\tmean_macro_f1\ttimestamp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Completed(RunResult),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredCell {
    pub cell_id: String,
    pub config: CellSpec,
    pub status: CellStatus,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl StoredCell {
    pub fn from_row(row: &GridRow) -> Self {
        Self {
            cell_id: row.cell.cell_id(),
            config: row.cell.clone(),
            status: match &row.outcome {
                Ok(r) => CellStatus::Completed(r.clone()),
                Err(e) => CellStatus::Failed(e.clone()),
            },
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn result(&self) -> Option<&RunResult> {
        match &self.status {
            CellStatus::Completed(r) => Some(r),
            CellStatus::Failed(_) => None,
        }
    }
}

/// Append-only store. Appends from several threads are serialized.
#[derive(Debug)]
pub struct ResultsStore {
    dir: PathBuf,
    lock: Mutex<()>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.')
}

impl ResultsStore {
    /// Opens `dir`, creating the layout if it does not exist yet.
    pub fn open(dir: &Path) -> Result<Self> {
        let cells = dir.join("cells");
        fs::create_dir_all(&cells).map_err(|e| Error::io(&cells, e))?;
        let index = dir.join(INDEX);
        if !index.exists() {
            fs::write(&index, format!("{INDEX_HEADER}\n")).map_err(|e| Error::io(&index, e))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn cell_path(&self, id: &str) -> PathBuf {
        self.dir.join("cells").join(format!("{id}.json"))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.cell_path(id).exists()
    }

    pub fn append(&self, cell: &StoredCell) -> Result<()> {
        if !valid_id(&cell.cell_id) {
            return Err(Error::Data(format!("`{}` is not a usable cell id", cell.cell_id)));
        }
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.cell_path(&cell.cell_id);
        let json =
            serde_json::to_string_pretty(cell).map_err(|e| Error::Data(format!("cannot serialize cell: {e}")))?;
        let mut f = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| {
                if e.kind() == std::io::ErrorKind::AlreadyExists {
                    Error::Data(format!("results already hold cell `{}`", cell.cell_id))
                } else {
                    Error::io(&path, e)
                }
            })?;
        f.write_all(json.as_bytes()).map_err(|e| Error::io(&path, e))?;
        let (status, acc, f1) = match &cell.status {
            CellStatus::Completed(r) => ("completed", r.mean_accuracy.to_string(), r.mean_macro_f1.to_string()),
            CellStatus::Failed(_) => ("failed", "-".into(), "-".into()),
        };
        let index = self.dir.join(INDEX);
        OpenOptions::new()
            .append(true)
            .open(&index)
            .and_then(|mut f| writeln!(f, "{}\t{status}\t{acc}\t{f1}\t{}", cell.cell_id, cell.timestamp))
            .map_err(|e| Error::io(&index, e))
    }

    pub fn get(&self, id: &str) -> Result<StoredCell> {
        let path = self.cell_path(id);
        serde_json::from_str(&read_to_string(&path)?).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }

    /// All cells in index order.
    pub fn entries(&self) -> Result<Vec<StoredCell>> {
        let index = self.dir.join(INDEX);
        let text = read_to_string(&index)?;
        let mut lines = text.lines();
        if lines.next() != Some(INDEX_HEADER) {
            return Err(Error::parse(index.display().to_string(), 1, "unexpected index header"));
        }
        lines
            .filter(|l| !l.is_empty())
            .map(|l| self.get(l.split('\t').next().unwrap_or("")))
            .collect()
    }
}
