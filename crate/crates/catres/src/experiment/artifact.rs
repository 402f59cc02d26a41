//! Deterministic run artifacts: CSV tables, Wigner grids, binary state dumps,
//! and metadata. Every file embeds the config hash; wall-clock information
//! lives in a separate `runtime.json` so data files are byte-reproducible.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use super::ExperimentError;
use crate::analysis::WignerGrid;
use crate::hilbert::PureState;

/// One scalar cell of a CSV table.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_sig(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 9 significant digits, exponent form: stable across platforms.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.8e}")
}

/// Collects the outputs of one run under a single directory.
pub struct RunArtifact {
    out_dir: PathBuf,
    config_hash: String,
    meta: Map<String, Value>,
    warnings: Vec<String>,
    started: Instant,
}

impl RunArtifact {
    /// Creates the output directory, records the canonical config next to the
    /// data, and derives the config hash all files embed.
    pub fn create(
        out_dir: &Path,
        canonical_config: &str,
        config_hash: &str,
    ) -> Result<Self, ExperimentError> {
        fs::create_dir_all(out_dir)?;
        fs::write(out_dir.join("config.json"), canonical_config)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            config_hash: config_hash.to_string(),
            meta: Map::new(),
            warnings: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Records a metadata entry surfaced in `meta.json`.
    pub fn meta(&mut self, key: &str, value: Value) {
        self.meta.insert(key.to_string(), value);
    }

    /// Writes a CSV table: a `# config_hash=...` comment line, a header row,
    /// then the data rows.
    pub fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<Cell>],
    ) -> Result<(), ExperimentError> {
        let mut out = String::new();
        out.push_str(&format!("# config_hash={}\n", self.config_hash));
        out.push_str(&header.join(","));
        out.push('\n');
        for row in rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        fs::write(self.out_dir.join(name), out)?;
        Ok(())
    }

    /// Writes a Wigner grid: first row the x axis, first column the p axis,
    /// body the signed W values.
    pub fn write_wigner(&self, name: &str, grid: &WignerGrid) -> Result<(), ExperimentError> {
        let mut out = String::new();
        out.push_str(&format!("# config_hash={}\n", self.config_hash));
        out.push_str("p\\x");
        for x in &grid.x_axis {
            out.push(',');
            out.push_str(&fmt_sig(*x));
        }
        out.push('\n');
        for (i, p) in grid.p_axis.iter().enumerate() {
            out.push_str(&fmt_sig(*p));
            for j in 0..grid.x_axis.len() {
                out.push(',');
                out.push_str(&fmt_sig(grid.values[[i, j]]));
            }
            out.push('\n');
        }
        fs::write(self.out_dir.join(name), out)?;
        Ok(())
    }

    /// Binary complex-vector dump with a layout header. Format: magic
    /// `CATRES1\n`, config hash line, one `label dim` line per mode, `---`,
    /// then little-endian (re, im) f64 pairs in layout index order.
    pub fn write_state(&self, name: &str, state: &PureState) -> Result<(), ExperimentError> {
        let mut f = fs::File::create(self.out_dir.join(name))?;
        f.write_all(b"CATRES1\n")?;
        f.write_all(format!("config_hash={}\n", self.config_hash).as_bytes())?;
        for m in state.layout().modes() {
            f.write_all(format!("{} {}\n", m.label, m.dim).as_bytes())?;
        }
        f.write_all(b"---\n")?;
        for z in state.amplitudes() {
            f.write_all(&z.re.to_le_bytes())?;
            f.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Writes `meta.json` (deterministic) and `runtime.json` (wall-clock,
    /// kept separate so the data directory reproduces byte-for-byte).
    pub fn finish(mut self, summary: &std::collections::BTreeMap<String, f64>) -> Result<(), ExperimentError> {
        self.meta
            .insert("config_hash".into(), json!(self.config_hash));
        self.meta
            .insert("code_version".into(), json!(env!("CARGO_PKG_VERSION")));
        self.meta
            .insert("threads".into(), json!(rayon::current_num_threads()));
        self.meta.insert("warnings".into(), json!(self.warnings));
        self.meta.insert("summary".into(), json!(summary));
        let meta = Value::Object(self.meta.clone());
        fs::write(
            self.out_dir.join("meta.json"),
            serde_json::to_string_pretty(&meta)?,
        )?;

        let wall = self.started.elapsed().as_secs_f64();
        let unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let runtime = json!({
            "config_hash": self.config_hash,
            "wall_time_s": wall,
            "finished_unix_s": unix,
        });
        fs::write(
            self.out_dir.join("runtime.json"),
            serde_json::to_string_pretty(&runtime)?,
        )?;
        Ok(())
    }
}

/// `wigner_<record>_<t>.csv` with a stable time rendering.
pub fn wigner_file_name(record: &[usize], t: f64) -> String {
    let rec: Vec<String> = record.iter().map(|r| r.to_string()).collect();
    format!("wigner_{}_{:.6e}.csv", rec.join("-"), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_render_nine_significant_digits() {
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265e0");
        assert_eq!(fmt_sig(-2.5e-6), "-2.50000000e-6");
        assert_eq!(Cell::Int(42).render(), "42");
    }

    #[test]
    fn csv_embeds_hash_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let art = RunArtifact::create(dir.path(), "{}", "deadbeef").unwrap();
        art.write_csv(
            "timeseries.csv",
            &["t_s", "n_b"],
            &[vec![Cell::Float(0.0), Cell::Float(1.5)]],
        )
        .unwrap();
        let text = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# config_hash=deadbeef");
        assert_eq!(lines.next().unwrap(), "t_s,n_b");
        assert_eq!(lines.next().unwrap(), "0.00000000e0,1.50000000e0");
    }

    #[test]
    fn wigner_name_is_stable() {
        assert_eq!(
            wigner_file_name(&[3, 0], 3.5355339059e-6),
            "wigner_3-0_3.535534e-6.csv"
        );
    }
}
