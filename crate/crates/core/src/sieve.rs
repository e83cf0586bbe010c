//! Diophantine diagnostics and the nested filters that thin a weakly
//! interlacing base set down to the subsequence where shifted spectral
//! windows never overlap.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::TorusGeometry;
use crate::lattice::{annulus_points, n_lambda, shell_points, Aspect, LatticePoint, NormTable};
use crate::verify::weak_interlacing;

/// Range of Fourier modes `ζ` tested by the `Λ∞` filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaRadius {
    /// `|ζ| <= λ^ε`.
    PowerEpsilon,
    /// `|ζ| <= r` for a fixed `r`.
    Fixed(f64),
}

/// Exponents and finite-scale constants of the filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub epsilon: f64,
    /// Window half-width exponent, `L = λ^δ`.
    pub delta: f64,
    /// `λ − n_λ <= C1 λ^ε` defines `Λ1`.
    pub c1: f64,
    /// `max_j |sin(ξ_j α_j)| >= c2_low λ^{−ε}` defines `Λ2`.
    pub c2_low: f64,
    pub zeta_radius: ZetaRadius,
    /// Evaluate `Λ_ζ` and `Λ∞` without requiring membership in `Λ′`.
    pub skip_prime_gate: bool,
    /// Interlacing constant demanded of explicit base sets.
    pub interlace_constant: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self::with_epsilon(0.05)
    }
}

impl FilterParams {
    /// Default constants with `δ = 1/4 − ε`.
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            delta: 0.25 - epsilon,
            c1: 2.0,
            c2_low: 0.5,
            zeta_radius: ZetaRadius::PowerEpsilon,
            skip_prime_gate: false,
            interlace_constant: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.05) {
            return Err(Error::Precondition(format!("epsilon {} outside (0, 1/20]", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 0.25) {
            return Err(Error::Precondition(format!("delta {} outside (0, 1/4)", self.delta)));
        }
        if !(self.c1 > 0.0 && self.c2_low > 0.0) {
            return Err(Error::Precondition("filter constants must be positive".into()));
        }
        if let ZetaRadius::Fixed(r) = self.zeta_radius {
            if !(r >= 0.0) {
                return Err(Error::Precondition(format!("zeta radius {r} must be nonnegative")));
            }
        }
        Ok(())
    }

    /// `L = λ^δ`.
    pub fn window(&self, lambda: f64) -> f64 {
        lambda.powf(self.delta)
    }

    pub fn zeta_radius_at(&self, lambda: f64) -> f64 {
        match self.zeta_radius {
            ZetaRadius::PowerEpsilon => lambda.powf(self.epsilon),
            ZetaRadius::Fixed(r) => r,
        }
    }
}

/// `‖t‖`, the distance to the nearest integer.
pub fn dist_to_int(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Brute-force simultaneous approximation profile of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineReport {
    pub alpha: [f64; 2],
    pub q_max: u64,
    /// `(q, m(q))` at each new running minimum of `m(q) = max_j ‖q α_j‖`.
    pub records: Vec<(u64, f64)>,
    /// `1 + sup_{q >= 10} (−ln m(q) / ln q)`; `None` when rational.
    pub kappa_hat: Option<f64>,
    /// First `q` with `m(q)` numerically zero.
    pub rational_at: Option<u64>,
}

impl DiophantineReport {
    pub fn is_rational(&self) -> bool {
        self.rational_at.is_some()
    }
}

const RATIONAL_THRESHOLD: f64 = 1e-12;

/// Type estimate from the lower envelope of `ln m(q)` against `ln q`.
///
/// `max_j |α_j − p_j/q| > C q^{−κ}` is `m(q) > C q^{1−κ}`, so the smallest
/// admissible `κ` at scale `q` is `1 − ln m(q) / ln q`.
pub fn estimate_type(alpha: [f64; 2], q_max: u64) -> Result<DiophantineReport> {
    if q_max < 1000 {
        return Err(Error::Precondition(format!("search bound {q_max} below 1000")));
    }
    if !alpha.iter().all(|a| a.is_finite()) {
        return Err(Error::Precondition("non-finite Diophantine input".into()));
    }
    let mut records = Vec::new();
    let mut best = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    for q in 1..=q_max {
        let m = alpha.iter().map(|&a| dist_to_int(q as f64 * a)).fold(0.0, f64::max);
        if m < RATIONAL_THRESHOLD {
            records.push((q, m));
            return Ok(DiophantineReport { alpha, q_max, records, kappa_hat: None, rational_at: Some(q) });
        }
        if m < best {
            best = m;
            records.push((q, m));
        }
        if q >= 10 {
            sup = sup.max(-m.ln() / (q as f64).ln());
        }
    }
    Ok(DiophantineReport { alpha, q_max, records, kappa_hat: Some(1.0 + sup), rational_at: None })
}

/// `λ − n_λ <= C1 λ^ε`. Members must exceed 1.
pub fn filter_lambda1(lambda: f64, table: &NormTable, params: &FilterParams) -> Result<bool> {
    if !(lambda > 1.0) {
        return Err(Error::Precondition(format!("Lambda1 needs lambda > 1, got {lambda}")));
    }
    Ok(lambda - n_lambda(lambda, table)? <= params.c1 * lambda.powf(params.epsilon))
}

/// Every `ξ` on the shell of `n_λ` has `max_j |sin(ξ_j α_j)| >= c2_low λ^{−ε}`,
/// with `ξ` in physical coordinates and `α = x2 − x1`.
pub fn filter_lambda2(lambda: f64, geom: &TorusGeometry, table: &NormTable, params: &FilterParams) -> Result<bool> {
    if lambda > table.cutoff() {
        return Err(Error::TableTooSmall { cutoff: table.cutoff(), needed: lambda });
    }
    let i = table
        .index_below(lambda)
        .filter(|&i| table.keys()[i] > 0)
        .ok_or_else(|| Error::Precondition(format!("Lambda2 needs n_lambda >= 1 at {lambda}")))?;
    let aspect = geom.aspect();
    let x0 = geom.x0();
    let floor = params.c2_low * lambda.powf(-params.epsilon);
    Ok(shell_points(aspect, table.keys()[i]).into_iter().all(|p| {
        let k = aspect.physical(p);
        (k[0] * x0[0]).sin().abs().max((k[1] * x0[1]).sin().abs()) >= floor
    }))
}

/// `|⟨ξ, ζ⟩| <= 2 |ξ|^{2δ}`.
pub fn in_s_zeta(aspect: Aspect, xi: LatticePoint, zeta: LatticePoint, delta: f64) -> bool {
    aspect.inner(xi, zeta).abs() <= 2.0 * aspect.norm(xi).powf(delta)
}

/// Membership of one base point in each filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Membership {
    pub l1: bool,
    pub l2: bool,
    pub lprime: bool,
    pub linf: bool,
}

fn in_prime(lambda: f64, geom: &TorusGeometry, table: &NormTable, params: &FilterParams) -> Result<(bool, bool)> {
    if lambda <= 1.0 {
        return Ok((false, false));
    }
    let l1 = filter_lambda1(lambda, table, params)?;
    let l2 = filter_lambda2(lambda, geom, table, params)?;
    Ok((l1, l2))
}

/// Nonzero `ζ` with `|ζ| <= r`, in annulus order.
pub fn zeta_modes(aspect: Aspect, radius: f64) -> Vec<LatticePoint> {
    let r2 = radius * radius;
    annulus_points(0.5 * r2, 0.5 * r2, aspect)
        .into_iter()
        .map(|(p, _)| p)
        .filter(|p| !p.is_origin())
        .collect()
}

fn window_avoids_s_zeta(aspect: Aspect, window: &[(LatticePoint, f64)], zeta: LatticePoint, delta: f64) -> bool {
    window.iter().all(|&(xi, _)| !in_s_zeta(aspect, xi, zeta, delta))
}

/// `λ ∈ Λ_ζ`: no `ξ ∈ S_ζ` has `||ξ|² − λ| <= L`.
///
/// Points of `S_ζ` off the window satisfy the defining inequality trivially,
/// so checking the window alone is equivalent to the quantifier over `S_ζ`.
pub fn in_lambda_zeta(
    lambda: f64,
    zeta: LatticePoint,
    geom: &TorusGeometry,
    table: &NormTable,
    params: &FilterParams,
) -> Result<bool> {
    if zeta.is_origin() {
        return Err(Error::Precondition("zeta must be nonzero".into()));
    }
    if !params.skip_prime_gate {
        let (l1, l2) = in_prime(lambda, geom, table, params)?;
        if !(l1 && l2) {
            return Ok(false);
        }
    }
    let aspect = geom.aspect();
    let window = annulus_points(lambda, params.window(lambda), aspect);
    Ok(window_avoids_s_zeta(aspect, &window, zeta, params.delta))
}

/// `λ ∈ Λ_ζ` for every nonzero `ζ` in the configured radius.
pub fn in_lambda_infinity(lambda: f64, geom: &TorusGeometry, table: &NormTable, params: &FilterParams) -> Result<bool> {
    Ok(classify(lambda, geom, table, params)?.linf)
}

/// Membership of `λ` in `Λ1`, `Λ2`, `Λ′` and `Λ∞`.
pub fn classify(lambda: f64, geom: &TorusGeometry, table: &NormTable, params: &FilterParams) -> Result<Membership> {
    let (l1, l2) = in_prime(lambda, geom, table, params)?;
    let lprime = l1 && l2;
    let linf = if lprime || params.skip_prime_gate {
        let aspect = geom.aspect();
        let window = annulus_points(lambda, params.window(lambda), aspect);
        zeta_modes(aspect, params.zeta_radius_at(lambda))
            .into_iter()
            .all(|z| window_avoids_s_zeta(aspect, &window, z, params.delta))
    } else {
        false
    };
    Ok(Membership { l1, l2, lprime, linf })
}

/// Exhaustive check that the window and its shift by `ζ` are disjoint:
/// every `ξ` with `||ξ|² − λ| <= L` has `||ξ + ζ|² − λ| > L`.
pub fn window_disjointness(
    lambda: f64,
    zeta: LatticePoint,
    geom: &TorusGeometry,
    table: &NormTable,
    params: &FilterParams,
) -> Result<bool> {
    let aspect = geom.aspect();
    let big_l = params.window(lambda);
    if aspect.norm(zeta) > lambda.powf(params.delta) {
        return Err(Error::Precondition(format!("|zeta|^2 = {} exceeds lambda^delta", aspect.norm(zeta))));
    }
    if !in_lambda_zeta(lambda, zeta, geom, table, params)? {
        return Err(Error::Precondition(format!("{lambda} is not in Lambda_zeta for zeta = {zeta}")));
    }
    Ok(shifted_window_disjoint(lambda, big_l, zeta, aspect))
}

/// The disjointness test itself, without the membership precondition.
pub fn shifted_window_disjoint(lambda: f64, half_width: f64, zeta: LatticePoint, aspect: Aspect) -> bool {
    annulus_points(lambda, half_width, aspect)
        .into_iter()
        .all(|(xi, _)| (aspect.norm(xi + zeta) - lambda).abs() > half_width)
}

/// Base set for the density report.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseSet {
    /// Midpoints of consecutive Laplace eigenvalues.
    GapMidpoints,
    /// A sorted list, checked for weak interlacing with the spectrum.
    Explicit(Vec<f64>),
}

/// Member counts in one block `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DensityBlock {
    pub lo: f64,
    pub hi: f64,
    pub base: usize,
    pub l1: usize,
    pub l2: usize,
    pub lprime: usize,
    pub linf: usize,
}

impl DensityBlock {
    pub fn linf_density(&self) -> f64 {
        ratio(self.linf, self.base)
    }

    pub fn lprime_density(&self) -> f64 {
        ratio(self.lprime, self.base)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub blocks: Vec<DensityBlock>,
}

pub const DENSITY_CSV_HEADER: &str = "block_lo,block_hi,count_base,count_l1,count_l2,count_lprime,count_linf";

impl DensityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(DENSITY_CSV_HEADER);
        s.push('\n');
        for b in &self.blocks {
            s.push_str(&format!("{},{},{},{},{},{},{}\n", b.lo, b.hi, b.base, b.l1, b.l2, b.lprime, b.linf));
        }
        s
    }

    pub fn totals(&self) -> DensityBlock {
        let mut t = DensityBlock {
            lo: self.blocks.first().map_or(0.0, |b| b.lo),
            hi: self.blocks.last().map_or(0.0, |b| b.hi),
            ..Default::default()
        };
        for b in &self.blocks {
            t.base += b.base;
            t.l1 += b.l1;
            t.l2 += b.l2;
            t.lprime += b.lprime;
            t.linf += b.linf;
        }
        t
    }
}

/// Dyadic block edges `0, 2, 4, 8, ...` covering `[0, x]`.
pub fn dyadic_edges(x: f64) -> Vec<f64> {
    let mut edges = vec![0.0, 2.0];
    while *edges.last().unwrap() <= x {
        let next = 2.0 * edges.last().unwrap();
        edges.push(next);
    }
    edges
}

/// Base members in `[0, x]` after validation.
pub fn base_members(base: &BaseSet, x: f64, table: &NormTable, params: &FilterParams) -> Result<Vec<f64>> {
    if table.cutoff() < x {
        return Err(Error::TableTooSmall { cutoff: table.cutoff(), needed: x });
    }
    match base {
        BaseSet::GapMidpoints => Ok(table.gap_midpoints(0.0, x)),
        BaseSet::Explicit(list) => {
            let members: Vec<f64> = list.iter().copied().filter(|&l| (0.0..=x).contains(&l)).collect();
            let norms: Vec<f64> = table.norms().take_while(|&n| n <= x).collect();
            let r = weak_interlacing(&members, &norms, params.interlace_constant)?;
            if !r.holds {
                return Err(Error::NotInterlacing { constant: params.interlace_constant });
            }
            Ok(members)
        }
    }
}

/// Dyadic per-block counts of base members passing each filter.
pub fn density_report(
    base: &BaseSet,
    x: f64,
    geom: &TorusGeometry,
    table: &NormTable,
    params: &FilterParams,
) -> Result<DensityReport> {
    params.validate()?;
    let members = base_members(base, x, table, params)?;
    let memberships: Vec<Membership> =
        members.par_iter().map(|&l| classify(l, geom, table, params)).collect::<Result<_>>()?;
    let edges = dyadic_edges(x);
    let mut blocks: Vec<DensityBlock> =
        edges.windows(2).map(|w| DensityBlock { lo: w[0], hi: w[1], ..Default::default() }).collect();
    for (&l, m) in members.iter().zip(&memberships) {
        let k = edges.partition_point(|&e| e <= l) - 1;
        let b = &mut blocks[k];
        b.base += 1;
        b.l1 += m.l1 as usize;
        b.l2 += m.l2 as usize;
        b.lprime += m.lprime as usize;
        b.linf += m.linf as usize;
    }
    Ok(DensityReport { blocks })
}

/// `count` members of `sorted` at ranks `⌊(i + phase)·len/count⌋`, a
/// deterministic low-discrepancy pick for `phase ∈ [0, 1)`.
pub fn spread_sample(sorted: &[f64], count: usize, phase: f64) -> Vec<f64> {
    if sorted.len() <= count {
        return sorted.to_vec();
    }
    let n = sorted.len() as f64;
    (0..count).map(|i| sorted[(((i as f64 + phase) * n / count as f64) as usize).min(sorted.len() - 1)]).collect()
}

/// `per_block` spread samples from each block `[edges[k], edges[k+1])`.
pub fn stratified_sample(sorted: &[f64], edges: &[f64], per_block: usize, phase: f64) -> Vec<f64> {
    edges
        .windows(2)
        .flat_map(|w| {
            let lo = sorted.partition_point(|&x| x < w[0]);
            let hi = sorted.partition_point(|&x| x < w[1]);
            spread_sample(&sorted[lo..hi], per_block, phase)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::sieve_norms;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn square_table(x: f64) -> NormTable {
        sieve_norms(x, Aspect::SQUARE).unwrap()
    }

    #[test]
    fn rational_pair_is_flagged() {
        let r = estimate_type([0.5, 1.0 / 3.0], 1000).unwrap();
        assert_eq!(r.rational_at, Some(6));
        assert!(r.kappa_hat.is_none());
        assert!(estimate_type([0.5, 0.3], 999).is_err());
    }

    #[test]
    fn quadratic_pair_has_moderate_type() {
        let r = estimate_type([2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0], 100_000).unwrap();
        let k = r.kappa_hat.unwrap();
        assert!((1.5..=2.2).contains(&k), "kappa_hat = {k}");
        assert!(r.records.windows(2).all(|w| w[0].1 > w[1].1));
    }

    #[test]
    fn half_rational_pair_never_vanishes() {
        let r = estimate_type([0.5, 2f64.sqrt()], 10_000).unwrap();
        assert!(!r.is_rational());
        assert!(r.kappa_hat.unwrap().is_finite());
    }

    #[test]
    fn lambda1_examples() {
        let t = square_table(2e6);
        let p = FilterParams { c1: 1.0, ..Default::default() };
        assert!(filter_lambda1(10.001, &t, &p).unwrap());
        assert!(!filter_lambda1(7.3, &t, &p).unwrap());
        assert!(filter_lambda1(1e6 + 0.5, &t, &p).unwrap());
        assert!(filter_lambda1(1.0, &t, &p).is_err());
    }

    #[test]
    fn lambda2_examples() {
        let t = square_table(200.0);
        let p = FilterParams::default();
        let half = TorusGeometry::new(Aspect::SQUARE, [0.0, 0.0], [PI, PI]).unwrap();
        let generic = TorusGeometry::default_square();
        for l in [1.5, 5.5, 50.5, 150.5] {
            assert!(!filter_lambda2(l, &half, &t, &p).unwrap());
        }
        assert!(filter_lambda2(1.5, &generic, &t, &FilterParams { c2_low: 0.1, ..p }).unwrap());
        let axis = TorusGeometry::new(Aspect::SQUARE, [0.0, 0.0], [PI * (2f64.sqrt() - 1.0), 0.0]).unwrap();
        assert!(!filter_lambda2(16.5, &axis, &t, &p).unwrap());
        assert!(!filter_lambda2(25.5, &axis, &t, &p).unwrap());
    }

    #[test]
    fn s_zeta_examples() {
        let a = Aspect::SQUARE;
        assert!(in_s_zeta(a, LatticePoint::new(3, 4), LatticePoint::new(4, -3), 0.01));
        assert!(!in_s_zeta(a, LatticePoint::new(5, 0), LatticePoint::new(1, 0), 0.2));
        assert!(in_s_zeta(a, LatticePoint::ORIGIN, LatticePoint::new(1, 0), 0.2));
    }

    #[test]
    fn zeta_modes_at_ten_thousand() {
        let p = FilterParams::default();
        let modes = zeta_modes(Aspect::SQUARE, p.zeta_radius_at(1e4));
        assert_eq!(modes.len(), 8);
        assert!(zeta_modes(Aspect::SQUARE, 0.9).is_empty());
    }

    #[test]
    fn lambda_zeta_rejects_orthogonal_point() {
        // 625 = 15² + 20²; ξ = (15, 20) ⊥ ζ = (4, −3)
        let t = square_table(2000.0);
        let p = FilterParams { skip_prime_gate: true, ..Default::default() };
        let g = TorusGeometry::default_square();
        assert!(!in_lambda_zeta(625.3, LatticePoint::new(4, -3), &g, &t, &p).unwrap());
    }

    #[test]
    fn vacuous_zeta_range_gives_prime() {
        let t = square_table(200.0);
        let g = TorusGeometry::default_square();
        let p = FilterParams { zeta_radius: ZetaRadius::Fixed(0.5), ..Default::default() };
        for l in t.gap_midpoints(2.0, 200.0) {
            let m = classify(l, &g, &t, &p).unwrap();
            assert_eq!(m.linf, m.lprime);
        }
    }

    #[test]
    fn window_disjointness_holds_on_members() {
        let t = square_table(2e4);
        let g = TorusGeometry::default_square();
        let p = FilterParams::default();
        let mut checked = 0;
        for l in t.gap_midpoints(9000.0, 11000.0) {
            if !classify(l, &g, &t, &p).unwrap().linf {
                continue;
            }
            for z in zeta_modes(g.aspect(), p.zeta_radius_at(l)) {
                assert!(window_disjointness(l, z, &g, &t, &p).unwrap());
                checked += 1;
            }
        }
        assert!(checked > 0);
        // outside Λ_ζ the precondition is enforced
        let q = FilterParams { skip_prime_gate: true, ..p };
        assert!(window_disjointness(625.3, LatticePoint::new(4, -3), &g, &t, &q).is_err());
    }

    #[test]
    fn shifted_windows_can_overlap_outside_lambda_zeta() {
        let found = (1..400).any(|k| {
            let l = k as f64 + 0.5;
            !shifted_window_disjoint(l, l.powf(0.2), LatticePoint::new(1, 0), Aspect::SQUARE)
        });
        assert!(found);
    }

    #[test]
    fn density_report_structure() {
        let t = square_table(4096.0);
        let g = TorusGeometry::default_square();
        let p = FilterParams::default();
        let r = density_report(&BaseSet::GapMidpoints, 4000.0, &g, &t, &p).unwrap();
        for b in &r.blocks {
            assert!(b.linf <= b.lprime && b.lprime <= b.l1.min(b.l2) && b.l1 <= b.base);
        }
        assert!(r.to_csv().starts_with(DENSITY_CSV_HEADER));
        let half = TorusGeometry::new(Aspect::SQUARE, [0.0, 0.0], [PI, PI]).unwrap();
        let r = density_report(&BaseSet::GapMidpoints, 4000.0, &half, &t, &p).unwrap();
        assert_eq!(r.totals().l2, 0);
        let bad = BaseSet::Explicit(vec![1.1, 1.2, 1.3, 1.4]);
        assert!(matches!(density_report(&bad, 100.0, &g, &t, &p), Err(Error::NotInterlacing { .. })));
    }

    #[test]
    fn prime_density_calibration_at_one_thousand() {
        let t = square_table(1100.0);
        let g = TorusGeometry::default_square();
        let r = density_report(&BaseSet::GapMidpoints, 1000.0, &g, &t, &FilterParams::default()).unwrap();
        assert!(r.totals().lprime_density() > 0.5);
    }

    #[test]
    fn stratified_sampling_is_deterministic_and_balanced() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let s = stratified_sample(&xs, &[0.0, 100.0, 1000.0], 10, 0.5);
        assert_eq!(s.len(), 20);
        assert_eq!(s.iter().filter(|&&x| x < 100.0).count(), 10);
        assert_eq!(s, stratified_sample(&xs, &[0.0, 100.0, 1000.0], 10, 0.5));
        assert_eq!(spread_sample(&xs[..5], 10, 0.3).len(), 5);
    }

    proptest! {
        #[test]
        fn filters_are_monotone_in_constants(k in 2u32..3000, c in 0.1f64..3.0, s in 0.05f64..1.0) {
            let t = square_table(4000.0);
            let g = TorusGeometry::default_square();
            let l = t.gap_midpoints(0.0, 4000.0)[k as usize % 1000];
            prop_assume!(l > 1.0);
            let p = FilterParams { c1: c, c2_low: s, ..Default::default() };
            let wider = FilterParams { c1: 2.0 * c, c2_low: 0.5 * s, ..p };
            let a = classify(l, &g, &t, &p).unwrap();
            let b = classify(l, &g, &t, &wider).unwrap();
            prop_assert!(!a.l1 || b.l1);
            prop_assert!(!a.l2 || b.l2);
            prop_assert!(!a.linf || a.lprime);
        }
    }
}
