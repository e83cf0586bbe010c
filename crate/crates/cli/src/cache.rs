//! Checksummed on-disk artifacts: norm tables and spectrum listings.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces every value bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use scatter_core::lattice::sieve_norms;
use scatter_core::scattering::{EigenKind, SpectrumRecord};
use scatter_core::{Aspect, NormTable};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const NORM_CSV_HEADER: &str = "norm,multiplicity";

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sha256");
    PathBuf::from(s)
}

/// Writes `bytes` and its checksum through temporary files and renames, so
/// readers never observe a partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let put = |target: &Path, data: &[u8]| -> Result<(), CliError> {
        let mut tmp = target.as_os_str().to_owned();
        tmp.push(format!(".tmp{}", std::process::id()));
        let tmp = PathBuf::from(tmp);
        fs::write(&tmp, data).map_err(CliError::io(&tmp))?;
        fs::rename(&tmp, target).map_err(CliError::io(target))
    };
    put(path, bytes)?;
    put(&sidecar(path), digest(bytes).as_bytes())
}

/// Reads a file whose sidecar checksum must match.
pub fn read_verified(path: &Path) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    let side = sidecar(path);
    let expect = fs::read_to_string(&side).map_err(CliError::io(&side))?;
    if expect.trim() != digest(&bytes) {
        return Err(CliError::Cache { path: path.into(), reason: "checksum mismatch".into() });
    }
    Ok(bytes)
}

pub fn norm_table_csv(table: &NormTable) -> String {
    let mut s = format!("{NORM_CSV_HEADER}\n");
    for (n, m) in table.entries() {
        s.push_str(&format!("{n},{m}\n"));
    }
    s
}

/// Parses a norm-table CSV; each norm must be exactly `key/(pq)`.
pub fn parse_norm_table(text: &str, aspect: Aspect, cutoff: f64, path: &Path) -> Result<NormTable, CliError> {
    let bad = |reason: String| CliError::Cache { path: path.into(), reason };
    let mut lines = text.lines();
    if lines.next() != Some(NORM_CSV_HEADER) {
        return Err(bad("missing header".into()));
    }
    let scale = aspect.scale() as f64;
    let mut keys = Vec::new();
    let mut mults = Vec::new();
    for (i, line) in lines.enumerate() {
        let (n, m) = line.split_once(',').ok_or_else(|| bad(format!("row {}: expected two fields", i + 1)))?;
        let n: f64 = n.parse().map_err(|_| bad(format!("row {}: bad norm", i + 1)))?;
        let m: u32 = m.parse().map_err(|_| bad(format!("row {}: bad multiplicity", i + 1)))?;
        let key = (n * scale).round() as u64;
        if aspect.key_to_norm(key) != n {
            return Err(bad(format!("row {}: {n} is not a lattice norm", i + 1)));
        }
        keys.push(key);
        mults.push(m);
    }
    NormTable::from_parts(aspect, cutoff, keys, mults).map_err(|e| bad(e.to_string()))
}

/// Norm tables cached under a directory, keyed by aspect and cutoff.
#[derive(Debug, Clone)]
pub struct NormCache {
    dir: PathBuf,
}

impl NormCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, aspect: Aspect, cutoff: f64) -> PathBuf {
        self.dir.join(format!("norms-{}-{}-{cutoff}.csv", aspect.numer(), aspect.denom()))
    }

    pub fn load(&self, aspect: Aspect, cutoff: f64) -> Result<NormTable, CliError> {
        let path = self.path_for(aspect, cutoff);
        let bytes = read_verified(&path)?;
        let text = String::from_utf8(bytes).map_err(|_| CliError::Cache { path: path.clone(), reason: "not UTF-8".into() })?;
        parse_norm_table(&text, aspect, cutoff, &path)
    }

    pub fn store(&self, table: &NormTable) -> Result<PathBuf, CliError> {
        let path = self.path_for(table.aspect(), table.cutoff());
        write_atomic(&path, norm_table_csv(table).as_bytes())?;
        Ok(path)
    }

    /// Cached table if intact, otherwise a fresh sieve written back.
    pub fn load_or_build(&self, aspect: Aspect, cutoff: f64) -> Result<NormTable, CliError> {
        match self.load(aspect, cutoff) {
            Ok(t) => Ok(t),
            Err(e) => {
                if self.path_for(aspect, cutoff).exists() {
                    eprintln!("warning: {e}; recomputing");
                }
                let table = sieve_norms(cutoff, aspect)?;
                self.store(&table)?;
                Ok(table)
            }
        }
    }
}

/// One JSON line of a spectrum listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub lambda: f64,
    pub kind: String,
    pub multiplicity: u32,
    pub d: [f64; 4],
    pub residual: f64,
}

impl From<&SpectrumRecord> for SpectrumLine {
    fn from(r: &SpectrumRecord) -> Self {
        let kind = match r.kind {
            EigenKind::New => "new",
            EigenKind::Old => "old",
        };
        Self { lambda: r.lambda, kind: kind.into(), multiplicity: r.multiplicity, d: r.d, residual: r.residual }
    }
}

impl SpectrumLine {
    pub fn to_record(&self) -> Result<SpectrumRecord, String> {
        let kind = match self.kind.as_str() {
            "new" => EigenKind::New,
            "old" => EigenKind::Old,
            k => return Err(format!("unknown kind {k:?}")),
        };
        Ok(SpectrumRecord { lambda: self.lambda, kind, multiplicity: self.multiplicity, d: self.d, residual: self.residual })
    }
}

pub fn spectrum_jsonl(records: &[SpectrumRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(&SpectrumLine::from(r)).expect("plain struct serializes") + "\n")
        .collect()
}

pub fn write_spectrum(path: &Path, records: &[SpectrumRecord]) -> Result<(), CliError> {
    write_atomic(path, spectrum_jsonl(records).as_bytes())
}

pub fn read_spectrum(path: &Path) -> Result<Vec<SpectrumRecord>, CliError> {
    let bytes = read_verified(path)?;
    let bad = |reason: String| CliError::Cache { path: path.into(), reason };
    let text = String::from_utf8(bytes).map_err(|_| bad("not UTF-8".into()))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| {
            let line: SpectrumLine = serde_json::from_str(l).map_err(|e| bad(format!("line {}: {e}", i + 1)))?;
            line.to_record().map_err(|e| bad(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_table_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = NormCache::new(dir.path());
        for aspect in [Aspect::SQUARE, Aspect::new(3, 2).unwrap()] {
            let table = sieve_norms(1e4, aspect).unwrap();
            cache.store(&table).unwrap();
            assert_eq!(cache.load(aspect, 1e4).unwrap(), table);
        }
    }

    #[test]
    fn corrupt_cache_is_detected_and_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = NormCache::new(dir.path());
        let table = cache.load_or_build(Aspect::SQUARE, 500.0).unwrap();
        let path = cache.path_for(Aspect::SQUARE, 500.0);
        let mut text = fs::read_to_string(&path).unwrap();
        text = text.replacen("\n1,4\n", "\n1,5\n", 1);
        fs::write(&path, text).unwrap();
        assert!(matches!(cache.load(Aspect::SQUARE, 500.0), Err(CliError::Cache { .. })));
        assert_eq!(cache.load_or_build(Aspect::SQUARE, 500.0).unwrap(), table);
        assert!(cache.load(Aspect::SQUARE, 500.0).is_ok());
    }

    #[test]
    fn non_lattice_norm_is_rejected() {
        let p = Path::new("x.csv");
        assert!(parse_norm_table("norm,multiplicity\n0,1\n1.5,4\n", Aspect::SQUARE, 10.0, p).is_err());
        assert!(parse_norm_table("n,m\n", Aspect::SQUARE, 10.0, p).is_err());
    }

    #[test]
    fn spectrum_roundtrip_survives_directory_rename() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            SpectrumRecord { lambda: -0.123456789012345, kind: EigenKind::New, multiplicity: 1, d: [0.6, 0.0, 0.1, -0.79], residual: 1e-13 },
            SpectrumRecord { lambda: 1.0, kind: EigenKind::Old, multiplicity: 2, d: [0.0; 4], residual: 0.0 },
            SpectrumRecord { lambda: 1.0 / 3.0, kind: EigenKind::New, multiplicity: 1, d: [0.1, 0.2, 0.3, 0.4], residual: 0.0 },
        ];
        let a = dir.path().join("a");
        write_spectrum(&a.join("s.jsonl"), &records).unwrap();
        let b = dir.path().join("b");
        fs::rename(&a, &b).unwrap();
        assert_eq!(read_spectrum(&b.join("s.jsonl")).unwrap(), records);
    }

    #[test]
    fn cached_table_gives_identical_states_and_memberships() {
        use scatter_core::equidist::truncated_state;
        use scatter_core::sieve::{classify, FilterParams};
        use scatter_core::{TorusGeometry, C64};

        let dir = tempfile::tempdir().unwrap();
        let cache = NormCache::new(dir.path());
        cache.load_or_build(Aspect::SQUARE, 2e4).unwrap();
        let cached = cache.load(Aspect::SQUARE, 2e4).unwrap();
        let fresh = sieve_norms(2e4, Aspect::SQUARE).unwrap();
        let geom = TorusGeometry::default_square();
        let params = FilterParams::default();
        let d = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        for l in cached.gap_midpoints(1e4, 1.02e4) {
            assert_eq!(classify(l, &geom, &cached, &params).unwrap(), classify(l, &geom, &fresh, &params).unwrap());
            let a = truncated_state(l, d, &geom, params.window(l)).unwrap();
            assert_eq!(a, truncated_state(l, d, &geom, params.window(l)).unwrap());
        }
    }
}
