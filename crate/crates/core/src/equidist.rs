//! Fourier matrix elements of new eigenfunctions, truncated to a spectral
//! window or summed over the full lattice.
//!
//! For `G = d1 G_λ(·,x1) + d2 G_λ(·,x2)` Parseval gives
//! `⟨e^{i⟨ζ,x⟩} G, G⟩ = (1/4π²) Σ_ξ c(ξ) conj(c(ξ+ζ)) / ((|ξ|²−λ)(|ξ+ζ|²−λ))`
//! with `c(ξ) = d1 e^{−i⟨ξ,x1⟩} + d2 e^{−i⟨ξ,x2⟩}`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::{norm_sq, Bounded, TorusGeometry, KAPPA, SINGULAR_DISTANCE};
use crate::lattice::{annulus_points, lex_cmp, Aspect, LatticePoint, NormTable};
use crate::linalg::C64;
use crate::sieve::{classify, FilterParams};

const C_ZERO: C64 = C64::new(0.0, 0.0);

fn check_unit(d: [C64; 2]) -> Result<()> {
    let n = d[0].norm_sqr() + d[1].norm_sqr();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("|d|^2 = {n}, expected 1")));
    }
    Ok(())
}

/// `c(ξ) = d1 e^{−i⟨ξ,x1⟩} + d2 e^{−i⟨ξ,x2⟩}`.
pub fn amplitude(xi: LatticePoint, d: [C64; 2], geom: &TorusGeometry) -> C64 {
    let a = geom.aspect();
    d[0] * C64::from_polar(1.0, -a.phase(xi, geom.x1())) + d[1] * C64::from_polar(1.0, -a.phase(xi, geom.x2()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEntry {
    pub xi: LatticePoint,
    pub amplitude: C64,
    /// `|ξ|² − λ`, never smaller than the singular distance in modulus.
    pub denom: f64,
}

/// Fourier coefficients of `G` restricted to `||ξ|² − λ| <= L`, in
/// lexicographic order of `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    pub lambda: f64,
    pub half_width: f64,
    pub d: [C64; 2],
    pub entries: Vec<StateEntry>,
    /// `‖G_{λ,L}‖²`; zero exactly when the window is empty.
    pub norm_sq: f64,
}

/// A Fourier matrix element with the number of summands it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixElement {
    pub value: C64,
    /// Zero means the sum had no terms and `value` is the additive identity.
    pub terms: usize,
}

/// Builds `G_{λ,L}` from the lattice points in the window.
pub fn truncated_state(lambda: f64, d: [C64; 2], geom: &TorusGeometry, half_width: f64) -> Result<TruncatedState> {
    check_unit(d)?;
    if !(half_width >= 0.0) {
        return Err(Error::Precondition(format!("window half-width {half_width} must be nonnegative")));
    }
    let entries: Vec<StateEntry> = annulus_points(lambda, half_width, geom.aspect())
        .into_iter()
        .map(|(xi, n)| StateEntry { xi, amplitude: amplitude(xi, d, geom), denom: n - lambda })
        .collect();
    if let Some(e) = entries.iter().find(|e| e.denom.abs() < SINGULAR_DISTANCE) {
        return Err(Error::SingularInput { lambda, norm: lambda + e.denom, distance: e.denom.abs() });
    }
    let mut state = TruncatedState { lambda, half_width, d, entries, norm_sq: 0.0 };
    state.norm_sq = state.matrix_element(LatticePoint::ORIGIN).value.re;
    Ok(state)
}

impl TruncatedState {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn window_size(&self) -> usize {
        self.entries.len()
    }

    fn find(&self, xi: LatticePoint) -> Option<&StateEntry> {
        self.entries.binary_search_by(|e| lex_cmp(&e.xi, &xi)).ok().map(|i| &self.entries[i])
    }

    /// Sum over the `ξ` with both `ξ` and `ξ + ζ` in the window.
    pub fn matrix_element(&self, zeta: LatticePoint) -> MatrixElement {
        let mut value = C_ZERO;
        let mut terms = 0;
        for e in &self.entries {
            if let Some(f) = self.find(e.xi + zeta) {
                value += e.amplitude * f.amplitude.conj() / (e.denom * f.denom);
                terms += 1;
            }
        }
        MatrixElement { value: value / KAPPA, terms }
    }

    /// `⟨e^{i⟨ζ,x⟩} g_{λ,L}, g_{λ,L}⟩` for the normalized state.
    pub fn normalized_element(&self, zeta: LatticePoint) -> Result<MatrixElement> {
        if self.is_empty() {
            return Err(Error::Precondition(format!("empty window at lambda = {}", self.lambda)));
        }
        let m = self.matrix_element(zeta);
        Ok(MatrixElement { value: m.value / self.norm_sq, terms: m.terms })
    }
}

/// Fourier coefficients of `G` over the whole disk `|ξ|² <= R`, on a dense
/// grid so that shifts by `ζ` are slice offsets.
#[derive(Debug, Clone)]
pub struct FullState {
    lambda: f64,
    cutoff: f64,
    half_x: i64,
    half_y: i64,
    /// Row-major over `x`, `c(ξ)/(|ξ|² − λ)`, zero outside the disk.
    coeffs: Vec<C64>,
    /// `|d1|² e^{i⟨ζ,x1⟩} + |d2|² e^{i⟨ζ,x2⟩}` is the diagonal part of `c(ξ) conj(c(ξ+ζ))`.
    weights: [f64; 2],
    geom: TorusGeometry,
    norm_sq: f64,
}

/// Minimum margin between the cutoff and `λ` for full sums.
pub const FULL_MARGIN: f64 = 1e5;

impl FullState {
    pub fn new(lambda: f64, d: [C64; 2], geom: &TorusGeometry, cutoff: f64) -> Result<Self> {
        check_unit(d)?;
        if !(cutoff >= lambda + FULL_MARGIN) {
            return Err(Error::Precondition(format!("full cutoff {cutoff} must be >= lambda + {FULL_MARGIN}")));
        }
        let aspect = geom.aspect();
        let half_x = (cutoff / aspect.a_sq()).sqrt() as i64 + 1;
        let half_y = (cutoff * aspect.a_sq()).sqrt() as i64 + 1;
        if let Some(n) = near_singular(lambda, aspect, cutoff) {
            return Err(Error::SingularInput { lambda, norm: n, distance: (n - lambda).abs() });
        }
        let width = (2 * half_y + 1) as usize;
        let mut coeffs = vec![C_ZERO; (2 * half_x + 1) as usize * width];
        coeffs.par_chunks_mut(width).enumerate().for_each(|(row, out)| {
            let x = row as i64 - half_x;
            for (col, slot) in out.iter_mut().enumerate() {
                let xi = LatticePoint::new(x, col as i64 - half_y);
                let n = aspect.norm(xi);
                if n <= cutoff {
                    *slot = amplitude(xi, d, geom) / (n - lambda);
                }
            }
        });
        let mut s = Self {
            lambda,
            cutoff,
            half_x,
            half_y,
            coeffs,
            weights: [d[0].norm_sqr(), d[1].norm_sqr()],
            geom: *geom,
            norm_sq: 0.0,
        };
        s.norm_sq = s.raw(LatticePoint::ORIGIN).re;
        Ok(s)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `‖G‖²` including the tail estimate.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn tail(&self, zeta: LatticePoint) -> C64 {
        let a = self.geom.aspect();
        let diag = self.weights[0] * C64::from_polar(1.0, a.phase(zeta, self.geom.x1()))
            + self.weights[1] * C64::from_polar(1.0, a.phase(zeta, self.geom.x2()));
        diag * (std::f64::consts::PI / (self.cutoff - self.lambda))
    }

    /// `‖G‖²`-scale bound on the neglected tail of any matrix element.
    pub fn tail_bound(&self) -> f64 {
        2.0 * std::f64::consts::PI / ((self.cutoff - self.lambda) * KAPPA)
    }

    /// Unnormalized `⟨e^{i⟨ζ,x⟩} G, G⟩` with the tail correction.
    pub fn raw(&self, zeta: LatticePoint) -> C64 {
        let width = (2 * self.half_y + 1) as usize;
        let (zx, zy) = (zeta.x, zeta.y);
        if zx.abs() > 2 * self.half_x || zy.abs() > 2 * self.half_y {
            return self.tail(zeta) / KAPPA;
        }
        let rows = 2 * self.half_x + 1;
        let (r0, r1) = ((-zx).max(0), rows - zx.max(0));
        let (c0, c1) = ((-zy).max(0) as usize, (width as i64 - zy.max(0)) as usize);
        let mut acc = C_ZERO;
        for r in r0..r1 {
            let a = &self.coeffs[r as usize * width..][c0..c1];
            let start = (r + zx) as usize * width + (c0 as i64 + zy) as usize;
            let b = &self.coeffs[start..start + (c1 - c0)];
            let (mut re, mut im) = (0.0, 0.0);
            for (u, v) in a.iter().zip(b) {
                re += u.re * v.re + u.im * v.im;
                im += u.im * v.re - u.re * v.im;
            }
            acc += C64::new(re, im);
        }
        (acc + self.tail(zeta)) / KAPPA
    }

    /// `⟨e^{i⟨ζ,x⟩} g, g⟩` for the normalized eigenfunction.
    pub fn matrix_element(&self, zeta: LatticePoint) -> Bounded<C64> {
        let value = if zeta.is_origin() { C64::new(1.0, 0.0) } else { self.raw(zeta) / self.norm_sq };
        Bounded { value, tail_bound: 2.0 * self.tail_bound() / self.norm_sq }
    }
}

fn near_singular(lambda: f64, aspect: Aspect, cutoff: f64) -> Option<f64> {
    if lambda > cutoff {
        return None;
    }
    annulus_points(lambda, SINGULAR_DISTANCE, aspect).first().map(|&(_, n)| n)
}

/// Normalized full-lattice Fourier matrix element.
pub fn matrix_element_full(
    lambda: f64,
    d: [C64; 2],
    zeta: LatticePoint,
    geom: &TorusGeometry,
    cutoff: f64,
) -> Result<Bounded<C64>> {
    Ok(FullState::new(lambda, d, geom, cutoff)?.matrix_element(zeta))
}

/// Finitely supported Fourier coefficients `â(ζ)` of a test observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    coefficients: Vec<(LatticePoint, C64)>,
    hermitian: bool,
}

impl Observable {
    pub fn new(mut coefficients: Vec<(LatticePoint, C64)>) -> Result<Self> {
        coefficients.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        if coefficients.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Precondition("duplicate Fourier mode in observable".into()));
        }
        if coefficients.iter().any(|(_, c)| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Precondition("non-finite Fourier coefficient".into()));
        }
        let lookup: HashMap<LatticePoint, C64> = coefficients.iter().copied().collect();
        let hermitian = coefficients
            .iter()
            .all(|&(z, c)| lookup.get(&-z).is_some_and(|&m| (m - c.conj()).norm() <= 1e-15 * (1.0 + c.norm())));
        Ok(Self { coefficients, hermitian })
    }

    /// `â(ζ) = e^{−|ζ|²}` on `|ζ| <= radius`.
    pub fn gaussian(aspect: Aspect, radius: f64) -> Self {
        let r2 = radius * radius;
        let coefficients = annulus_points(0.5 * r2, 0.5 * r2, aspect)
            .into_iter()
            .map(|(z, n)| (z, C64::new((-n).exp(), 0.0)))
            .collect();
        Self::new(coefficients).expect("gaussian coefficients are distinct and finite")
    }

    /// The bundled test observable: the Gaussian on `|ζ| <= 8`.
    pub fn bundled(aspect: Aspect) -> Self {
        Self::gaussian(aspect, 8.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![(LatticePoint::ORIGIN, C64::new(value, 0.0))]).expect("single mode")
    }

    pub fn coefficients(&self) -> &[(LatticePoint, C64)] {
        &self.coefficients
    }

    /// `â(−ζ) = conj(â(ζ))` for every mode, so the observable is real.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `â(0) = (1/4π²) ∫ a`.
    pub fn mean(&self) -> C64 {
        self.coefficients.iter().find(|(z, _)| z.is_origin()).map_or(C_ZERO, |&(_, c)| c)
    }
}

/// How eigenfunction matrix elements are summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Window `L = λ^δ`, observable cut to `|ζ| <= λ^ε`.
    Truncated,
    /// All lattice points with `|ξ|² <= cutoff`.
    Full { cutoff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: C64,
    /// Modes whose matrix element had at least one summand, `ζ = 0` included.
    pub nonzero_modes: usize,
    /// Truncated mode on an empty window; `value` is zero by convention.
    pub empty: bool,
    pub tail_bound: f64,
}

/// `Σ_ζ â(ζ) ⟨e^{i⟨ζ,x⟩} g, g⟩` in the given mode.
///
/// In truncated mode only `|ζ| <= λ^ε` enter; this is the low-frequency part
/// whose matrix elements the window separation controls.
pub fn observable_expectation(
    lambda: f64,
    d: [C64; 2],
    a: &Observable,
    mode: Mode,
    geom: &TorusGeometry,
    params: &FilterParams,
) -> Result<Expectation> {
    match mode {
        Mode::Truncated => {
            let state = truncated_state(lambda, d, geom, params.window(lambda))?;
            Ok(truncated_expectation(&state, a, geom.aspect(), params.zeta_radius_at(lambda)))
        }
        Mode::Full { cutoff } => Ok(full_expectation(&FullState::new(lambda, d, geom, cutoff)?, a)),
    }
}

fn truncated_expectation(state: &TruncatedState, a: &Observable, aspect: Aspect, radius: f64) -> Expectation {
    if state.is_empty() {
        return Expectation { value: C_ZERO, nonzero_modes: 0, empty: true, tail_bound: 0.0 };
    }
    let mut value = a.mean();
    let mut nonzero = 1;
    for &(z, c) in a.coefficients() {
        if z.is_origin() || aspect.norm(z) > radius * radius {
            continue;
        }
        let m = state.matrix_element(z);
        if m.terms > 0 {
            value += c * m.value / state.norm_sq;
            nonzero += 1;
        }
    }
    Expectation { value, nonzero_modes: nonzero, empty: false, tail_bound: 0.0 }
}

fn full_expectation(state: &FullState, a: &Observable) -> Expectation {
    // ⟨e^{−i⟨ζ,x⟩}g, g⟩ = conj⟨e^{i⟨ζ,x⟩}g, g⟩, so each ±ζ pair costs one sum
    let mut cache: HashMap<LatticePoint, C64> = HashMap::new();
    let mut value = a.mean();
    let mut bound = 0.0;
    for &(z, c) in a.coefficients() {
        if z.is_origin() {
            continue;
        }
        let m = match cache.get(&-z) {
            Some(v) => v.conj(),
            None => {
                let v = state.matrix_element(z);
                bound += c.norm() * v.tail_bound;
                cache.insert(z, v.value);
                v.value
            }
        };
        value += c * m;
    }
    Expectation { value, nonzero_modes: a.coefficients().len(), empty: false, tail_bound: 2.0 * bound }
}

/// `‖g_λ − g_{λ,L}‖²`. Since `G_{λ,L}` is an orthogonal projection of `G_λ`
/// this is `2 − 2 ‖G_{λ,L}‖/‖G_λ‖`; an empty window gives 2.
pub fn truncation_gap(
    lambda: f64,
    d: [C64; 2],
    geom: &TorusGeometry,
    half_width: f64,
    cutoff: f64,
) -> Result<Bounded<f64>> {
    let state = truncated_state(lambda, d, geom, half_width)?;
    let full = norm_sq(lambda, d, geom, cutoff)?;
    let s = KAPPA * full.value;
    let ratio = (state.norm_sq / s).min(1.0);
    let root = ratio.sqrt();
    Ok(Bounded { value: 2.0 * (1.0 - root), tail_bound: root * KAPPA * full.tail_bound / s })
}

/// One row of the decay experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRecord {
    pub lambda: f64,
    pub in_linf: bool,
    /// `|⟨a g_λ, g_λ⟩ − â(0)|` over the full lattice.
    pub dev_full: f64,
    /// The same in truncated mode; zero when the window is empty.
    pub dev_trunc: f64,
    /// `‖G_λ‖²` from the full sum.
    pub norm_sq: f64,
    pub window_size: usize,
    pub empty: bool,
}

pub const DECAY_CSV_HEADER: &str = "lambda,in_linf,dev_full,dev_trunc,norm_sq,window_size";
pub const PLOT_HEADER: &str = "log10_lambda,log10_dev";

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub records: Vec<DecayRecord>,
    /// Least-squares slope of `log dev_full` against `log λ` over `Λ∞` rows.
    pub fitted_exponent: Option<f64>,
    /// Rows excluded from the fit because their window was empty.
    pub flagged: usize,
}

impl DecayReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{DECAY_CSV_HEADER}\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{:e},{:e},{:e},{}\n",
                r.lambda, r.in_linf as u8, r.dev_full, r.dev_trunc, r.norm_sq, r.window_size
            ));
        }
        s
    }

    pub fn plot_data(&self) -> String {
        let mut s = format!("{PLOT_HEADER}\n");
        for r in self.fit_rows() {
            s.push_str(&format!("{},{}\n", r.lambda.log10(), r.dev_full.log10()));
        }
        s
    }

    fn fit_rows(&self) -> impl Iterator<Item = &DecayRecord> {
        self.records.iter().filter(|r| r.in_linf && !r.empty && r.dev_full > 0.0)
    }

    /// Largest full-mode deviation over `Λ∞` rows with `lo <= λ < hi`.
    pub fn max_deviation(&self, lo: f64, hi: f64) -> Option<f64> {
        self.fit_rows().filter(|r| r.lambda >= lo && r.lambda < hi).map(|r| r.dev_full).reduce(f64::max)
    }
}

/// Fits `log y = k log x + b` and returns `k`.
fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    (den > 0.0).then(|| num / den)
}

/// Full and truncated deviations for each `λ`, with `Λ∞` membership.
pub fn decay_experiment(
    lambdas: &[f64],
    d: [C64; 2],
    a: &Observable,
    geom: &TorusGeometry,
    table: &NormTable,
    params: &FilterParams,
) -> Result<DecayReport> {
    params.validate()?;
    let records: Vec<DecayRecord> = lambdas
        .par_iter()
        .map(|&lambda| {
            let linf = classify(lambda, geom, table, params)?.linf;
            let full = FullState::new(lambda, d, geom, lambda + FULL_MARGIN)?;
            let dev_full = (full_expectation(&full, a).value - a.mean()).norm();
            let state = truncated_state(lambda, d, geom, params.window(lambda))?;
            let t = truncated_expectation(&state, a, geom.aspect(), params.zeta_radius_at(lambda));
            Ok(DecayRecord {
                lambda,
                in_linf: linf,
                dev_full,
                dev_trunc: if t.empty { 0.0 } else { (t.value - a.mean()).norm() },
                norm_sq: full.norm_sq(),
                window_size: state.window_size(),
                empty: t.empty,
            })
        })
        .collect::<Result<_>>()?;
    let mut report = DecayReport { records, fitted_exponent: None, flagged: 0 };
    report.flagged = report.records.iter().filter(|r| r.empty).count();
    let pts: Vec<(f64, f64)> = report.fit_rows().map(|r| (r.lambda.log10(), r.dev_full.log10())).collect();
    report.fitted_exponent = slope(&pts);
    Ok(report)
}
