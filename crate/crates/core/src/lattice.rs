//! Laplace spectrum of the flat torus.
//!
//! The torus is `R^2 / 2π L0` with `L0 = Z(1/a, 0) ⊕ Z(0, a)`. Its Laplace
//! eigenvalues are the norms `a²ξ1² + ξ2²/a²` of the dual lattice `Z(a,0) ⊕ Z(0,1/a)`,
//! indexed here by integer coordinates `ξ = (ξ1, ξ2)`. `a = 1` is the square
//! torus, where the norms are the sums of two squares.
//!
//! With `a² = p/q` in lowest terms every norm equals `(p²ξ1² + q²ξ2²) / (pq)`,
//! so the integer numerator serves as an exact key: distinct norms never
//! collide through rounding.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Integer point of the dual lattice in lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn is_origin(self) -> bool {
        self.x == 0 && self.y == 0
    }
}

impl std::ops::Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::new(-self.x, -self.y)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Squared aspect ratio `a² = p/q`, kept as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Aspect {
    p: u64,
    q: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Aspect {
    pub const SQUARE: Aspect = Aspect { p: 1, q: 1 };

    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidAspect(format!("{p}/{q}")));
        }
        let g = gcd(p, q);
        let (p, q) = (p / g, q / g);
        // keys are p²ξ1² + q²ξ2²; keep them comfortably inside u64
        if p > 1 << 12 || q > 1 << 12 {
            return Err(Error::InvalidAspect(format!("{p}/{q} (terms too large)")));
        }
        Ok(Self { p, q })
    }

    /// Parses `"2"`, `"3/2"` or `"1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidAspect(s.to_string());
        match s.split_once('/') {
            Some((p, q)) => Self::new(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => Self::new(s.parse().map_err(|_| bad())?, 1),
        }
    }

    pub fn numer(&self) -> u64 {
        self.p
    }

    pub fn denom(&self) -> u64 {
        self.q
    }

    pub fn is_square(&self) -> bool {
        self.p == 1 && self.q == 1
    }

    /// Denominator of every norm: `norm = key / scale`.
    pub fn scale(&self) -> u64 {
        self.p * self.q
    }

    pub fn a_sq(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn a(&self) -> f64 {
        self.a_sq().sqrt()
    }

    /// Exact norm numerator `p²ξ1² + q²ξ2²`.
    pub fn key(&self, pt: LatticePoint) -> u64 {
        let (px, qy) = (self.p as i128 * pt.x as i128, self.q as i128 * pt.y as i128);
        (px * px + qy * qy) as u64
    }

    pub fn key_to_norm(&self, key: u64) -> f64 {
        key as f64 / self.scale() as f64
    }

    pub fn norm(&self, pt: LatticePoint) -> f64 {
        self.key_to_norm(self.key(pt))
    }

    /// `pq·⟨ξ, ζ⟩` for the physical inner product of two dual-lattice vectors.
    pub fn inner_key(&self, xi: LatticePoint, zeta: LatticePoint) -> i128 {
        let (p, q) = (self.p as i128, self.q as i128);
        p * p * xi.x as i128 * zeta.x as i128 + q * q * xi.y as i128 * zeta.y as i128
    }

    pub fn inner(&self, xi: LatticePoint, zeta: LatticePoint) -> f64 {
        self.inner_key(xi, zeta) as f64 / self.scale() as f64
    }

    /// Physical coordinates `(a ξ1, ξ2 / a)`.
    pub fn physical(&self, pt: LatticePoint) -> [f64; 2] {
        let a = self.a();
        [a * pt.x as f64, pt.y as f64 / a]
    }

    /// `⟨ξ, w⟩` for a displacement `w` on the torus.
    pub fn phase(&self, pt: LatticePoint, w: [f64; 2]) -> f64 {
        let [u, v] = self.physical(pt);
        u * w[0] + v * w[1]
    }

    /// Side lengths `(2π/a, 2πa)` of the fundamental domain.
    pub fn periods(&self) -> [f64; 2] {
        let a = self.a();
        [2.0 * PI / a, 2.0 * PI * a]
    }

    /// Largest key whose norm does not exceed `x` (for `x >= 0`).
    pub(crate) fn key_floor(&self, x: f64) -> u64 {
        if x < 0.0 {
            return 0;
        }
        let k = (x * self.scale() as f64).floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }

    /// Calls `f(ξ1, lo, hi)` for every row `ξ1` whose points with
    /// `kmin <= key <= kmax` have `|ξ2|` in `[lo, hi]`.
    pub(crate) fn for_rows(&self, kmin: u64, kmax: u64, mut f: impl FnMut(i64, u64, u64)) {
        let (p2, q2) = (self.p * self.p, self.q * self.q);
        let xmax = isqrt(kmax / p2) as i64;
        for x in -xmax..=xmax {
            let used = p2 * (x.unsigned_abs() * x.unsigned_abs());
            if used > kmax {
                continue;
            }
            let hi = isqrt((kmax - used) / q2);
            let lo = if kmin <= used {
                0
            } else {
                isqrt_ceil((kmin - used).div_ceil(q2))
            };
            if lo <= hi {
                f(x, lo, hi);
            }
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

fn isqrt_ceil(n: u64) -> u64 {
    let r = isqrt(n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// Sorted distinct norms up to a cutoff, with exact multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTable {
    aspect: Aspect,
    cutoff: f64,
    keys: Vec<u64>,
    multiplicities: Vec<u32>,
}

impl NormTable {
    /// Builds a table from raw parts, checking the ordering invariant.
    pub fn from_parts(
        aspect: Aspect,
        cutoff: f64,
        keys: Vec<u64>,
        multiplicities: Vec<u32>,
    ) -> Result<Self> {
        if keys.len() != multiplicities.len() {
            return Err(Error::Precondition("keys and multiplicities differ in length".into()));
        }
        if let Some(i) = keys.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Unsorted { index: i + 1 });
        }
        if multiplicities.contains(&0) {
            return Err(Error::Precondition("zero multiplicity".into()));
        }
        Ok(Self { aspect, cutoff, keys, multiplicities })
    }

    pub fn aspect(&self) -> Aspect {
        self.aspect
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.aspect.key_to_norm(self.keys[i])
    }

    /// Reduced fraction `(numerator, denominator)` of the `i`-th norm.
    pub fn exact_norm(&self, i: usize) -> (u64, u64) {
        let (k, s) = (self.keys[i], self.aspect.scale());
        let g = gcd(k, s).max(1);
        (k / g, s / g)
    }

    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.keys.iter().map(|&k| self.aspect.key_to_norm(k))
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.norms().zip(self.multiplicities.iter().copied())
    }

    /// Multiplicity of an exact key (0 when the key is not a norm).
    pub fn multiplicity_of_key(&self, key: u64) -> u32 {
        match self.keys.binary_search(&key) {
            Ok(i) => self.multiplicities[i],
            Err(_) => 0,
        }
    }

    /// Total number of lattice points with norm <= cutoff.
    pub fn point_count(&self) -> u64 {
        self.multiplicities.iter().map(|&m| m as u64).sum()
    }

    /// Index of the largest norm strictly below `lambda`.
    pub fn index_below(&self, lambda: f64) -> Option<usize> {
        let i = self.keys.partition_point(|&k| self.aspect.key_to_norm(k) < lambda);
        i.checked_sub(1)
    }

    /// Index of the smallest norm strictly above `lambda`.
    pub fn index_above(&self, lambda: f64) -> Option<usize> {
        let i = self.keys.partition_point(|&k| self.aspect.key_to_norm(k) <= lambda);
        (i < self.keys.len()).then_some(i)
    }

    /// Distance from `lambda` to the nearest tabulated norm.
    pub fn distance_to_spectrum(&self, lambda: f64) -> f64 {
        let i = self.keys.partition_point(|&k| self.aspect.key_to_norm(k) < lambda);
        let mut best = f64::INFINITY;
        for j in [i.wrapping_sub(1), i] {
            if j < self.keys.len() {
                best = best.min((self.norm(j) - lambda).abs());
            }
        }
        best
    }

    /// Midpoints of consecutive norms up to `x`: the canonical weakly
    /// interlacing base set.
    pub fn gap_midpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.keys
            .windows(2)
            .map(|w| 0.5 * (self.aspect.key_to_norm(w[0]) + self.aspect.key_to_norm(w[1])))
            .filter(|&m| m >= lo && m <= hi)
            .collect()
    }
}

/// All distinct norms `<= x` with their multiplicities.
pub fn sieve_norms(x: f64, aspect: Aspect) -> Result<NormTable> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Precondition(format!("cutoff {x} must be finite and >= 0")));
    }
    let kmax = aspect.key_floor(x);
    let (p2, q2) = (aspect.p * aspect.p, aspect.q * aspect.q);

    // First quadrant with orbit weights under (±ξ1, ±ξ2).
    let dense_limit = 1u64 << 25;
    let mut keys: Vec<u64>;
    let mut mult: Vec<u32>;
    if kmax <= dense_limit {
        let mut counts = vec![0u32; kmax as usize + 1];
        let xmax = isqrt(kmax / p2);
        for xa in 0..=xmax {
            let used = p2 * xa * xa;
            let ymax = isqrt((kmax - used) / q2);
            for ya in 0..=ymax {
                let w = match (xa == 0, ya == 0) {
                    (true, true) => 1,
                    (true, false) | (false, true) => 2,
                    (false, false) => 4,
                };
                counts[(used + q2 * ya * ya) as usize] += w;
            }
        }
        keys = Vec::new();
        mult = Vec::new();
        for (k, &c) in counts.iter().enumerate() {
            if c > 0 {
                keys.push(k as u64);
                mult.push(c);
            }
        }
    } else {
        let mut raw: Vec<(u64, u32)> = Vec::new();
        let xmax = isqrt(kmax / p2);
        for xa in 0..=xmax {
            let used = p2 * xa * xa;
            let ymax = isqrt((kmax - used) / q2);
            for ya in 0..=ymax {
                let w = match (xa == 0, ya == 0) {
                    (true, true) => 1,
                    (true, false) | (false, true) => 2,
                    (false, false) => 4,
                };
                raw.push((used + q2 * ya * ya, w));
            }
        }
        raw.sort_unstable_by_key(|&(k, _)| k);
        keys = Vec::new();
        mult = Vec::new();
        for (k, w) in raw {
            if keys.last() == Some(&k) {
                *mult.last_mut().unwrap() += w;
            } else {
                keys.push(k);
                mult.push(w);
            }
        }
    }
    Ok(NormTable { aspect, cutoff: x, keys, multiplicities: mult })
}

/// Lattice points on the shell with exact key `key`, in lexicographic order.
pub fn shell_points(aspect: Aspect, key: u64) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    let q2 = aspect.q * aspect.q;
    aspect.for_rows(key, key, |x, lo, hi| {
        for ya in lo..=hi {
            if aspect.p * aspect.p * x.unsigned_abs().pow(2) + q2 * ya * ya != key {
                continue;
            }
            if ya == 0 {
                out.push(LatticePoint::new(x, 0));
            } else {
                out.push(LatticePoint::new(x, -(ya as i64)));
                out.push(LatticePoint::new(x, ya as i64));
            }
        }
    });
    out
}

/// Points `ξ ∈ Z²` with `ξ1² + ξ2² = n` on the square torus, lexicographically.
pub fn circle_points(n: u64) -> Vec<LatticePoint> {
    shell_points(Aspect::SQUARE, n)
}

/// Exactly the lattice points with `|norm(ξ) − λ| <= L`, lexicographically.
pub fn annulus_points(lambda: f64, half_width: f64, aspect: Aspect) -> Vec<(LatticePoint, f64)> {
    let lo = lambda - half_width;
    let hi = lambda + half_width;
    if hi < 0.0 {
        return Vec::new();
    }
    // widen by one key and filter with the floating predicate
    let kmin = aspect.key_floor(lo.max(0.0)).saturating_sub(1);
    let kmax = aspect.key_floor(hi) + 1;
    let q2 = aspect.q * aspect.q;
    let p2 = aspect.p * aspect.p;
    let mut out = Vec::new();
    aspect.for_rows(kmin, kmax, |x, ylo, yhi| {
        let used = p2 * x.unsigned_abs().pow(2);
        let mut push = |y: i64| {
            let pt = LatticePoint::new(x, y);
            let n = aspect.key_to_norm(used + q2 * y.unsigned_abs().pow(2));
            if (n - lambda).abs() <= half_width {
                out.push((pt, n));
            }
        };
        for ya in (ylo.max(1)..=yhi).rev() {
            push(-(ya as i64));
        }
        if ylo == 0 {
            push(0);
        }
        for ya in ylo.max(1)..=yhi {
            push(ya as i64);
        }
    });
    out
}

/// Largest tabulated norm strictly below `lambda`.
pub fn n_lambda(lambda: f64, table: &NormTable) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("n_lambda needs lambda > 0, got {lambda}")));
    }
    if lambda > table.cutoff() {
        return Err(Error::TableTooSmall { cutoff: table.cutoff(), needed: lambda });
    }
    table
        .index_below(lambda)
        .map(|i| table.norm(i))
        .ok_or_else(|| Error::Precondition(format!("no norm below {lambda}")))
}

/// Lexicographic comparison helper used when ordering lattice output.
pub fn lex_cmp(a: &LatticePoint, b: &LatticePoint) -> Ordering {
    (a.x, a.y).cmp(&(b.x, b.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_r2(n: u64) -> usize {
        let m = isqrt(n) as i64;
        let mut c = 0;
        for x in -m..=m {
            for y in -m..=m {
                if (x * x + y * y) as u64 == n {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn norms_up_to_twenty() {
        let t = sieve_norms(20.0, Aspect::SQUARE).unwrap();
        let norms: Vec<f64> = t.norms().collect();
        assert_eq!(
            norms,
            vec![0., 1., 2., 4., 5., 8., 9., 10., 13., 16., 17., 18., 20.]
        );
        for (i, &k) in t.keys().iter().enumerate() {
            assert_eq!(t.multiplicities()[i] as usize, brute_r2(k));
        }
    }

    #[test]
    fn zero_cutoff_is_origin_only() {
        let t = sieve_norms(0.0, Aspect::SQUARE).unwrap();
        assert_eq!(t.entries().collect::<Vec<_>>(), vec![(0.0, 1)]);
    }

    #[test]
    fn bad_aspect_rejected() {
        assert!(Aspect::new(0, 1).is_err());
        assert!(Aspect::parse("-2").is_err());
        assert!(Aspect::parse("x").is_err());
        assert_eq!(Aspect::parse("4/2").unwrap(), Aspect::new(2, 1).unwrap());
    }

    #[test]
    fn disk_count_at_ten_thousand() {
        let t = sieve_norms(1e4, Aspect::SQUARE).unwrap();
        let mut brute = 0u64;
        for x in -100i64..=100 {
            for y in -100i64..=100 {
                if x * x + y * y <= 10_000 {
                    brute += 1;
                }
            }
        }
        assert_eq!(t.point_count(), brute);
        // Landau: #distinct / (x / sqrt(log x)) is of order 0.76
        let ratio = t.len() as f64 / (1e4 / (1e4f64).ln().sqrt());
        assert!(ratio > 0.6 && ratio < 1.0, "ratio {ratio}");
    }

    #[test]
    fn multiplicities_match_brute_force_below_ten_thousand() {
        let t = sieve_norms(1e4, Aspect::SQUARE).unwrap();
        let mut counts = vec![0usize; 10_001];
        for x in -100i64..=100 {
            for y in -100i64..=100 {
                let n = (x * x + y * y) as usize;
                if n <= 10_000 {
                    counts[n] += 1;
                }
            }
        }
        for n in 0..=10_000u64 {
            assert_eq!(t.multiplicity_of_key(n) as usize, counts[n as usize]);
            assert_eq!(circle_points(n).len(), counts[n as usize]);
        }
    }

    #[test]
    fn sparse_path_matches_dense_path() {
        let a = Aspect::new(3, 2).unwrap();
        let dense = sieve_norms(2000.0, a).unwrap();
        let mut pts = 0u64;
        let r = 200i64;
        for x in -r..=r {
            for y in -r..=r {
                if a.norm(LatticePoint::new(x, y)) <= 2000.0 {
                    pts += 1;
                }
            }
        }
        assert_eq!(dense.point_count(), pts);
    }

    #[test]
    fn rectangular_norms_are_exact() {
        let a = Aspect::new(2, 1).unwrap();
        let t = sieve_norms(3.0, a).unwrap();
        // 2ξ1² + ξ2²/2 <= 3
        let norms: Vec<f64> = t.norms().collect();
        assert_eq!(norms, vec![0.0, 0.5, 2.0, 2.5]);
        assert_eq!(t.multiplicities(), &[1, 2, 4, 4]);
        // (0,±2) and (±1,0) collide at norm 2 exactly
        assert_eq!(t.exact_norm(1), (1, 2));
    }

    #[test]
    fn circle_examples() {
        let c = circle_points(25);
        assert_eq!(c.len(), 12);
        assert!(c.contains(&LatticePoint::new(-5, 0)));
        assert!(c.contains(&LatticePoint::new(3, -4)));
        assert!(c.windows(2).all(|w| lex_cmp(&w[0], &w[1]) == Ordering::Less));
        assert!(circle_points(3).is_empty());
        assert_eq!(circle_points(0), vec![LatticePoint::ORIGIN]);
    }

    #[test]
    fn annulus_examples() {
        let a = annulus_points(10.0, 1.5, Aspect::SQUARE);
        assert_eq!(a.len(), 12);
        assert_eq!(a.iter().filter(|(_, n)| *n == 9.0).count(), 4);
        assert_eq!(a.iter().filter(|(_, n)| *n == 10.0).count(), 8);
        assert!(annulus_points(3.0, 0.5, Aspect::SQUARE).is_empty());
        assert_eq!(annulus_points(0.0, 0.1, Aspect::SQUARE), vec![(LatticePoint::ORIGIN, 0.0)]);
    }

    #[test]
    fn n_lambda_examples() {
        let t = sieve_norms(100.0, Aspect::SQUARE).unwrap();
        assert_eq!(n_lambda(7.3, &t).unwrap(), 5.0);
        assert_eq!(n_lambda(2.0, &t).unwrap(), 1.0);
        assert_eq!(n_lambda(33.0, &t).unwrap(), 32.0);
        assert!(n_lambda(0.0, &t).is_err());
        assert!(n_lambda(-1.0, &t).is_err());
        assert!(matches!(n_lambda(200.0, &t), Err(Error::TableTooSmall { .. })));
    }

    #[test]
    fn gaps_grow_slowly() {
        let t = sieve_norms(1e5, Aspect::SQUARE).unwrap();
        let norms: Vec<f64> = t.norms().collect();
        for w in norms.windows(2).filter(|w| w[0] >= 100.0) {
            assert!(w[1] - w[0] < w[0].powf(0.4), "gap at {}", w[0]);
        }
        // the normalized maximal gap shrinks from dyadic block to block
        let ratio = |lo: f64| {
            norms
                .windows(2)
                .filter(|w| w[0] >= lo && w[0] < 2.0 * lo)
                .map(|w| (w[1] - w[0]) / lo.powf(0.4))
                .fold(0.0, f64::max)
        };
        assert!(ratio(65536.0) < ratio(64.0));
    }

    #[test]
    fn sieve_is_deterministic() {
        let a = sieve_norms(5000.0, Aspect::SQUARE).unwrap();
        let b = sieve_norms(5000.0, Aspect::SQUARE).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn annulus_is_union_of_circles(lambda in 0.0f64..3000.0, width in 0.1f64..20.0) {
            let ann = annulus_points(lambda, width, Aspect::SQUARE);
            let lo = (lambda - width).max(0.0).ceil() as u64;
            let hi = (lambda + width).floor() as u64;
            let mut union = Vec::new();
            for n in lo..=hi {
                if (n as f64 - lambda).abs() <= width {
                    union.extend(circle_points(n));
                }
            }
            let mut got: Vec<_> = ann.iter().map(|(p, _)| *p).collect();
            got.sort();
            union.sort();
            prop_assert_eq!(got, union);
        }

        #[test]
        fn rectangular_shells_have_exact_norm(x in -40i64..40, y in -40i64..40, p in 1u64..6, q in 1u64..6) {
            let a = Aspect::new(p, q).unwrap();
            let pt = LatticePoint::new(x, y);
            let shell = shell_points(a, a.key(pt));
            prop_assert!(shell.contains(&pt));
            prop_assert!(shell.iter().all(|s| a.key(*s) == a.key(pt)));
        }
    }
}
