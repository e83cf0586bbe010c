//! Flat `section.key = value` configuration with dotted overrides.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use scatter_core::equidist::Observable;
use scatter_core::greens::secular_cutoff;
use scatter_core::scattering::{make_unitary, RootStrategy, SolverOptions};
use scatter_core::sieve::FilterParams;
use scatter_core::{Aspect, ExtensionU, Preset, TorusGeometry, C64};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Every recognized key with its default value.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("geometry.aspect_sq", "1/1"),
    ("geometry.x1", "0,0"),
    // x2 = x1 + (π/a · s1, π a · s2) for the scaled offset s
    ("geometry.x2", "auto"),
    ("geometry.scaled_offset", "0.41421356237309503,0.7320508075688772"),
    ("extension.preset", "rank2-sample"),
    ("extension.params", ""),
    ("solver.cutoff", "auto"),
    ("solver.tol", "1e-8"),
    ("solver.margin", "1e-6"),
    ("solver.floor", "-1e4"),
    ("solver.strategy", "monotone"),
    ("sieve.epsilon", "0.05"),
    ("sieve.delta", "auto"),
    ("sieve.c1", "2"),
    ("sieve.c2_low", "0.5"),
    ("sieve.skip_prime_gate", "false"),
    ("sieve.type_search", "100000"),
    ("range.lambda_min", "1000"),
    ("range.lambda_max", "100000"),
    ("range.samples_per_decade", "50"),
    ("spectrum.lambda_max", "500"),
    ("equidist.d", "0.6,0,0,0.8"),
    ("equidist.observable_radius", "8"),
    ("verify.max_norm", "2000"),
    ("output.dir", "out"),
    ("cache.dir", ".scatter-cache"),
    ("run.threads", "0"),
];

/// Raw key-value pairs after defaults, file and overrides are merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawConfig(BTreeMap<String, String>);

impl Default for RawConfig {
    fn default() -> Self {
        Self(DEFAULTS.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect())
    }
}

impl RawConfig {
    /// Parses `key = value` lines; `[section]` headers prefix later keys
    /// and `#` starts a comment.
    pub fn parse(&mut self, text: &str) -> Result<(), CliError> {
        let mut section = String::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = format!("{}.", name.trim());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let key = format!("{section}{}", k.trim());
            self.set(&key, v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match self.0.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key `{key}`"))),
        }
    }

    /// Applies `--section.key value` and `--section.key=value` pairs.
    pub fn apply_overrides(&mut self, args: &[String]) -> Result<(), CliError> {
        let mut it = args.iter();
        while let Some(a) = it.next() {
            let body = a
                .strip_prefix("--")
                .ok_or_else(|| CliError::Config(format!("unexpected argument `{a}`")))?;
            match body.split_once('=') {
                Some((k, v)) => self.set(k, v)?,
                None => {
                    let v = it.next().ok_or_else(|| CliError::Config(format!("`--{body}` needs a value")))?;
                    self.set(body, v)?;
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).expect("key listed in DEFAULTS")
    }

    /// SHA-256 over the sorted `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.0 {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Named preset or explicit `(phase, η, ψ1, ψ2)` parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtensionSpec {
    Preset(Preset),
    Params([f64; 4]),
}

impl ExtensionSpec {
    pub fn build(&self) -> ExtensionU {
        match *self {
            ExtensionSpec::Preset(p) => p.extension(),
            ExtensionSpec::Params([phase, eta, p1, p2]) => make_unitary(phase, [eta, p1, p2]),
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub hash: String,
    pub geometry: TorusGeometry,
    pub extension: ExtensionSpec,
    /// `None` selects the default secular cutoff for the scan range.
    pub cutoff: Option<f64>,
    pub solver: SolverOptions,
    pub sieve: FilterParams,
    pub type_search: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub samples_per_decade: usize,
    pub spectrum_lambda_max: f64,
    pub d: [C64; 2],
    pub observable_radius: f64,
    pub verify_max_norm: u64,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub threads: usize,
}

fn field<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> Result<T, CliError> {
    raw.get(key).parse().map_err(|_| CliError::Config(format!("{key}: cannot parse `{}`", raw.get(key))))
}

fn reals<const N: usize>(raw: &RawConfig, key: &str) -> Result<[f64; N], CliError> {
    let bad = || CliError::Config(format!("{key}: expected {N} comma-separated reals, got `{}`", raw.get(key)));
    let v: Vec<f64> = raw.get(key).split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let arr: [f64; N] = v.try_into().map_err(|_| bad())?;
    if arr.iter().all(|x| x.is_finite()) {
        Ok(arr)
    } else {
        Err(bad())
    }
}

fn positive(key: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key}: must be positive, got {x}")))
    }
}

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self, CliError> {
        let aspect = Aspect::parse(raw.get("geometry.aspect_sq")).map_err(|e| CliError::Config(format!("geometry.aspect_sq: {e}")))?;
        let x1 = reals::<2>(&raw, "geometry.x1")?;
        let x2 = if raw.get("geometry.x2") == "auto" {
            let s = reals::<2>(&raw, "geometry.scaled_offset")?;
            let a = aspect.a();
            [x1[0] + PI * s[0] / a, x1[1] + PI * s[1] * a]
        } else {
            reals::<2>(&raw, "geometry.x2")?
        };
        let geometry = TorusGeometry::new(aspect, x1, x2).map_err(|e| CliError::Config(format!("geometry: {e}")))?;

        let extension = if raw.get("extension.params").is_empty() {
            ExtensionSpec::Preset(
                raw.get("extension.preset").parse().map_err(|e| CliError::Config(format!("extension.preset: {e}")))?,
            )
        } else {
            ExtensionSpec::Params(reals::<4>(&raw, "extension.params")?)
        };

        let cutoff = match raw.get("solver.cutoff") {
            "auto" => None,
            _ => Some(positive("solver.cutoff", field(&raw, "solver.cutoff")?)?),
        };
        let strategy = match raw.get("solver.strategy") {
            "monotone" => RootStrategy::Monotone,
            "sigma-scan" => RootStrategy::SigmaScan,
            s => return Err(CliError::Config(format!("solver.strategy: `{s}` is not monotone or sigma-scan"))),
        };
        let floor: f64 = field(&raw, "solver.floor")?;
        if floor.is_nan() || floor >= 0.0 {
            return Err(CliError::Config(format!("solver.floor: must be negative, got {floor}")));
        }
        let solver = SolverOptions {
            tol: positive("solver.tol", field(&raw, "solver.tol")?)?,
            margin: positive("solver.margin", field(&raw, "solver.margin")?)?,
            strategy,
            floor,
            deep_floor: floor.min(-1e6),
            ..SolverOptions::default()
        };

        let epsilon: f64 = field(&raw, "sieve.epsilon")?;
        let mut sieve = FilterParams::with_epsilon(epsilon);
        if raw.get("sieve.delta") != "auto" {
            sieve.delta = field(&raw, "sieve.delta")?;
        }
        sieve.c1 = field(&raw, "sieve.c1")?;
        sieve.c2_low = field(&raw, "sieve.c2_low")?;
        sieve.skip_prime_gate = field(&raw, "sieve.skip_prime_gate")?;
        sieve.validate().map_err(|e| CliError::Config(format!("sieve: {e}")))?;

        let lambda_min = positive("range.lambda_min", field(&raw, "range.lambda_min")?)?;
        let lambda_max = positive("range.lambda_max", field(&raw, "range.lambda_max")?)?;
        if lambda_min >= lambda_max {
            return Err(CliError::Config(format!("range: lambda_min {lambda_min} >= lambda_max {lambda_max}")));
        }
        let dv = reals::<4>(&raw, "equidist.d")?;
        let d = [C64::new(dv[0], dv[1]), C64::new(dv[2], dv[3])];
        let dn = d[0].norm_sqr() + d[1].norm_sqr();
        if (dn - 1.0).abs() > 1e-9 {
            return Err(CliError::Config(format!("equidist.d: |d|^2 = {dn}, expected 1")));
        }
        let samples_per_decade: usize = field(&raw, "range.samples_per_decade")?;
        if samples_per_decade == 0 {
            return Err(CliError::Config("range.samples_per_decade: must be positive".into()));
        }
        let type_search: u64 = field(&raw, "sieve.type_search")?;
        if type_search < 1000 {
            return Err(CliError::Config("sieve.type_search: must be at least 1000".into()));
        }

        Ok(Self {
            hash: raw.hash(),
            geometry,
            extension,
            cutoff,
            solver,
            sieve,
            type_search,
            lambda_min,
            lambda_max,
            samples_per_decade,
            spectrum_lambda_max: positive("spectrum.lambda_max", field(&raw, "spectrum.lambda_max")?)?,
            d,
            observable_radius: positive("equidist.observable_radius", field(&raw, "equidist.observable_radius")?)?,
            verify_max_norm: field(&raw, "verify.max_norm")?,
            out_dir: raw.get("output.dir").into(),
            cache_dir: raw.get("cache.dir").into(),
            threads: field(&raw, "run.threads")?,
            raw,
        })
    }

    pub fn defaults() -> Self {
        Self::from_raw(RawConfig::default()).expect("defaults validate")
    }

    /// Low-discrepancy phase in `[0, 1)` derived from the config hash.
    pub fn sampling_phase(&self) -> f64 {
        let bytes = hex::decode(&self.hash[..16]).expect("hash is hex");
        let word = u64::from_be_bytes(bytes.try_into().expect("eight bytes"));
        (word >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn observable(&self) -> Observable {
        Observable::gaussian(self.geometry.aspect(), self.observable_radius)
    }

    pub fn secular_cutoff_for(&self, lambda_max: f64) -> f64 {
        self.cutoff.unwrap_or_else(|| secular_cutoff(lambda_max))
    }

    /// The scaled Diophantine pair `(α1 a/π, α2/(π a))`.
    pub fn diophantine_pair(&self) -> [f64; 2] {
        self.geometry.diophantine_pair()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scatter_core::greens::DEFAULT_OFFSET;

    #[test]
    fn hash_is_independent_of_key_order() {
        let mut a = RawConfig::default();
        a.parse("sieve.c1 = 3\ngeometry.aspect_sq = 2/1\n").unwrap();
        let mut b = RawConfig::default();
        b.parse("[geometry]\naspect_sq = 2/1\n[sieve]\nc1 = 3 # comment\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RawConfig::default().hash());
    }

    #[test]
    fn defaults_reproduce_library_geometry() {
        let c = RunConfig::defaults();
        let g = TorusGeometry::default_square();
        assert!((c.geometry.x2()[0] - g.x2()[0]).abs() < 1e-15);
        assert!((c.geometry.x2()[1] - g.x2()[1]).abs() < 1e-15);
        assert_eq!(c.sieve, FilterParams::default());
        let p = c.diophantine_pair();
        assert!((p[0] - DEFAULT_OFFSET[0]).abs() < 1e-15 && (p[1] - DEFAULT_OFFSET[1]).abs() < 1e-15);
    }

    #[test]
    fn overrides_and_errors() {
        let mut r = RawConfig::default();
        r.apply_overrides(&["--sieve.c1=4".into(), "--range.lambda_max".into(), "2e4".into()]).unwrap();
        assert_eq!(r.get("sieve.c1"), "4");
        assert_eq!(r.get("range.lambda_max"), "2e4");
        assert!(r.apply_overrides(&["--nope.key=1".into()]).is_err());
        assert!(r.apply_overrides(&["--sieve.c1".into()]).is_err());
        r.set("sieve.epsilon", "0.3").unwrap();
        assert!(RunConfig::from_raw(r).is_err());
        let mut s = RawConfig::default();
        s.set("extension.params", "0.1,0.2").unwrap();
        assert!(RunConfig::from_raw(s).is_err());
    }

    #[test]
    fn sampling_phase_is_stable() {
        let a = RunConfig::defaults().sampling_phase();
        assert_eq!(a, RunConfig::defaults().sampling_phase());
        assert!((0.0..1.0).contains(&a));
    }
}
