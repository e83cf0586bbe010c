//! Slow, independent reference computations.
//!
//! Nothing here shares code with `scatter-core`: lattice points are found by
//! box enumeration, sums are plain loops, and integrals are grid quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `r2(n)` for `0 <= n <= max` by enumerating the square `|x|, |y| <= √max`.
pub fn r2_table(max: u64) -> Vec<u32> {
    let mut r = vec![0u32; max as usize + 1];
    let m = (max as f64).sqrt() as i64 + 1;
    for x in -m..=m {
        for y in -m..=m {
            let n = (x * x + y * y) as u64;
            if n <= max {
                r[n as usize] += 1;
            }
        }
    }
    r
}

/// Lattice points with `|a²x² + y²/a² − λ| <= L`, by box search.
pub fn window_points(a_sq: f64, lambda: f64, half_width: f64) -> Vec<(i64, i64)> {
    let top = lambda + half_width;
    if top < 0.0 {
        return Vec::new();
    }
    let bx = (top / a_sq).sqrt() as i64 + 1;
    let by = (top * a_sq).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for x in -bx..=bx {
        for y in -by..=by {
            let n = a_sq * (x * x) as f64 + (y * y) as f64 / a_sq;
            if (n - lambda).abs() <= half_width {
                out.push((x, y));
            }
        }
    }
    out
}

/// Roots of the two scalar secular equations for scatterers half a period
/// apart on the square torus, `x0 = (π, π)`.
///
/// There `e^{i⟨ξ,x0⟩} = (−1)^{|ξ|²}`, so the even and odd shells decouple and
/// sector `±` solves `φ±(λ) = 4π²(c1 ± c2)·tan(θ±/2)` with
/// `φ±(λ) = −(2/4π²) Σ_{n even/odd} r2(n) [n/(n²+1) − 1/(n−λ)]`.
/// Each side is increasing between consecutive same-parity poles, so every
/// such interval holds exactly one root, found by bisection.
#[derive(Debug, Clone)]
pub struct HalfPeriodOracle {
    /// `(n, r2(n))` for `r2(n) > 0`, split by the parity of `n`.
    shells: [Vec<(f64, f64)>; 2],
    cutoff: f64,
}

/// Roots of one parity sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorRoots {
    pub roots: Vec<f64>,
    /// Set when the interval below the first pole has its root below `floor`.
    pub root_below_floor: bool,
}

impl HalfPeriodOracle {
    pub fn new(cutoff: u64) -> Self {
        let mut shells = [Vec::new(), Vec::new()];
        for (n, &r) in r2_table(cutoff).iter().enumerate() {
            if r > 0 {
                shells[n % 2].push((n as f64, r as f64));
            }
        }
        Self { shells, cutoff: cutoff as f64 }
    }

    fn parity_sum(&self, parity: u64, f: impl Fn(f64) -> f64) -> f64 {
        self.shells[parity as usize].iter().map(|&(n, r)| r * f(n)).sum()
    }

    /// `c1 + c2` for the even sector, `c1 − c2` for the odd one.
    pub fn gram_eigenvalue(&self, parity: u64) -> f64 {
        let r = self.cutoff;
        let s = self.parity_sum(parity, |n| 1.0 / (n * n + 1.0)) + 0.5 * PI * (1.0 / r).atan();
        2.0 * s / (16.0 * PI.powi(4))
    }

    /// `φ±(λ)` including the half-density tail.
    pub fn phi(&self, parity: u64, lambda: f64) -> f64 {
        let r = self.cutoff;
        let s = self.parity_sum(parity, |n| n / (n * n + 1.0) - 1.0 / (n - lambda))
            + 0.5 * PI * ((r - lambda).ln() - 0.5 * (r * r + 1.0).ln());
        -2.0 * s / (4.0 * PI * PI)
    }

    /// Roots with `floor < λ <= lambda_max` in the given sector.
    pub fn roots(&self, parity: u64, theta: f64, lambda_max: f64, floor: f64) -> SectorRoots {
        let rhs = 4.0 * PI * PI * self.gram_eigenvalue(parity) * (theta / 2.0).tan();
        let poles: Vec<f64> = self.shells[parity as usize]
            .iter()
            .map(|&(n, _)| n)
            .take_while(|&n| n <= lambda_max + 200.0)
            .collect();
        let g = |l: f64| self.phi(parity, l) - rhs;
        let mut roots = Vec::new();
        let mut below = false;
        let mut lo = floor;
        for &p in &poles {
            let (a, b) = (lo + 1e-9 * (p - lo), p - 1e-9 * (p - lo));
            if lo == floor && g(a) > 0.0 {
                below = true;
            } else if g(a) < 0.0 && g(b) > 0.0 {
                let (mut x, mut y) = (a, b);
                for _ in 0..200 {
                    let m = 0.5 * (x + y);
                    if m <= x || m >= y {
                        break;
                    }
                    if g(m) < 0.0 {
                        x = m;
                    } else {
                        y = m;
                    }
                }
                let root = 0.5 * (x + y);
                if root <= lambda_max {
                    roots.push(root);
                }
            }
            lo = p;
            if p > lambda_max {
                break;
            }
        }
        SectorRoots { roots, root_below_floor: below }
    }
}

/// `∫ e^{i⟨ζ,x⟩} |ψ(x)|² dx` by an `n × n` periodic trapezoid rule, where
/// `ψ(x) = −(1/4π²) Σ_{ξ in window} c(ξ) e^{i⟨ξ,x⟩} / (|ξ|² − λ)` and
/// `c(ξ) = d1 e^{−i⟨ξ,x1⟩} + d2 e^{−i⟨ξ,x2⟩}`.
///
/// The rule is exact for trigonometric polynomials of degree below `n`.
#[allow(clippy::too_many_arguments)]
pub fn quadrature_matrix_element(
    a_sq: f64,
    lambda: f64,
    half_width: f64,
    d: [Complex64; 2],
    x1: [f64; 2],
    x2: [f64; 2],
    zeta: (i64, i64),
    n: usize,
) -> Complex64 {
    let a = a_sq.sqrt();
    let phys = |p: (i64, i64)| [a * p.0 as f64, p.1 as f64 / a];
    let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
    let terms: Vec<([f64; 2], Complex64)> = window_points(a_sq, lambda, half_width)
        .into_iter()
        .map(|p| {
            let k = phys(p);
            let den = a_sq * (p.0 * p.0) as f64 + (p.1 * p.1) as f64 / a_sq - lambda;
            let c = d[0] * Complex64::from_polar(1.0, -dot(k, x1))
                + d[1] * Complex64::from_polar(1.0, -dot(k, x2));
            (k, -c / (den * 4.0 * PI * PI))
        })
        .collect();
    let kz = phys(zeta);
    let (lx, ly) = (2.0 * PI / a, 2.0 * PI * a);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let u = lx * i as f64 / n as f64;
        for j in 0..n {
            let v = ly * j as f64 / n as f64;
            let x = [u, v];
            let psi: Complex64 = terms
                .iter()
                .map(|(k, c)| c * Complex64::from_polar(1.0, dot(*k, x)))
                .sum();
            acc += Complex64::from_polar(psi.norm_sqr(), dot(kz, x));
        }
    }
    acc * (lx * ly / (n * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r2_small_values() {
        let r = r2_table(25);
        assert_eq!(&r[..6], &[1, 4, 4, 0, 4, 8]);
        assert_eq!(r[25], 12);
    }

    #[test]
    fn window_matches_known_annulus() {
        assert_eq!(window_points(1.0, 10.0, 1.5).len(), 12);
        assert!(window_points(1.0, 3.0, 0.5).is_empty());
    }

    #[test]
    fn quadrature_of_single_mode_is_parseval() {
        // one point per window is impossible, but ζ = 0 reduces to Σ|coef|²·4π²
        let lambda = 0.5;
        let q = quadrature_matrix_element(
            1.0,
            lambda,
            0.6,
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [0.0, 0.0],
            [1.0, 2.0],
            (0, 0),
            32,
        );
        // window holds norms 0 and 1: 1 + 4 points
        let expect = (1.0 / 0.25 + 4.0 / 0.25) / (4.0 * PI * PI);
        assert!((q.re - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn half_period_sectors_have_one_root_per_parity_interval() {
        let o = HalfPeriodOracle::new(20_000);
        let s = o.roots(0, 0.3, 50.0, -1e4);
        for w in s.roots.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(!s.roots.is_empty());
    }
}
