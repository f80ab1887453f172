use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::percolation::Model;
use crate::tree::ProductGraph;

/// Column order of every results CSV.
pub const HEADER: [&str; 16] = [
    "graph",
    "d",
    "p1",
    "p2",
    "quantity",
    "k1",
    "k2",
    "r",
    "rho",
    "estimate_low",
    "estimate_high",
    "stderr",
    "trials",
    "censored",
    "seed",
    "config_hash",
];

/// One CSV row. Index columns that do not apply are left empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub graph: String,
    pub d: u8,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub quantity: String,
    pub k1: Option<u32>,
    pub k2: Option<u32>,
    pub r: Option<u32>,
    pub rho: Option<f64>,
    pub estimate_low: f64,
    pub estimate_high: f64,
    pub stderr: Option<f64>,
    pub trials: u64,
    pub censored: u64,
    pub seed: u64,
    pub config_hash: String,
}

impl Record {
    pub fn new(model: &Model, quantity: &str, estimate: f64, seed: u64) -> Self {
        let mut rec = Self::unparametrized(&model.graph, quantity, estimate, seed);
        rec.p1 = Some(model.p1);
        rec.p2 = Some(model.p2);
        rec
    }

    /// A row not tied to a percolation parameter (invasion, analytic diagrams).
    pub fn unparametrized(graph: &ProductGraph, quantity: &str, estimate: f64, seed: u64) -> Self {
        Self {
            graph: graph.kind.name().to_string(),
            d: graph.d,
            p1: None,
            p2: None,
            quantity: quantity.to_string(),
            k1: None,
            k2: None,
            r: None,
            rho: None,
            estimate_low: estimate,
            estimate_high: estimate,
            stderr: None,
            trials: 0,
            censored: 0,
            seed,
            config_hash: String::new(),
        }
    }

    pub fn bracket(mut self, low: f64, high: f64) -> Self {
        self.estimate_low = low;
        self.estimate_high = high;
        self
    }

    pub fn class(mut self, k1: u32, k2: u32) -> Self {
        self.k1 = Some(k1);
        self.k2 = Some(k2);
        self
    }

    pub fn radius(mut self, r: u32) -> Self {
        self.r = Some(r);
        self
    }

    pub fn rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }

    pub fn counts(mut self, trials: u64, censored: u64) -> Self {
        self.trials = trials;
        self.censored = censored;
        self
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`, so a reader never sees a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn csv_bytes(records: &[Record]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in records {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn write_csv(path: &Path, records: &[Record]) -> std::io::Result<()> {
    write_atomic(path, &csv_bytes(records))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Invasion output consumed by the plotting scripts.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub graph: String,
    pub d: u8,
    pub rho: f64,
    pub p1_hat: f64,
    pub p2_hat: f64,
    pub target_size: usize,
    pub seed: u64,
    pub uncertainty: f64,
}

pub fn write_curve_csv(path: &Path, rows: &[CurveRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    write_atomic(path, &w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_record_fields() {
        let model = Model::isotropic(ProductGraph::txt(3), 0.2).unwrap();
        let rec = Record::new(&model, "G", 1.5, 7).class(1, 2).stderr(0.25);
        let text = String::from_utf8(csv_bytes(&[rec])).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "TxT,3,0.2,0.2,G,1,2,,,1.5,1.5,0.25,0,0,7,");
        // serde field order must agree with the header
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(Record::new(&model, "x", 0.0, 0)).unwrap();
        let auto = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(auto.lines().next().unwrap(), HEADER.join(","));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
