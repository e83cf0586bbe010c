//! Lattice sums built from torus Green's functions.
//!
//! `G_λ(w) = −(1/4π²) Σ_ξ e^{i⟨ξ,w⟩} / (|ξ|² − λ)` diverges on its own, but
//! differences of two resolvents and the imaginary part of `G_{±i}` are
//! absolutely convergent. Everything here is evaluated from the lattice side
//! with a norm cutoff `R` and an explicit tail estimate.
//!
//! Inner products are unnormalized integrals over the torus, whose area is
//! `4π²` for every aspect ratio.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{isqrt, Aspect};
use crate::linalg::{Mat2, C64};

/// Torus area, and the scale of `Im G_{±i}` relative to the Gram matrix.
pub const KAPPA: f64 = 4.0 * PI * PI;

/// Distance to a Laplace eigenvalue below which a spectral parameter is
/// rejected as singular.
pub const SINGULAR_DISTANCE: f64 = 1e-9;

/// A computed value together with a bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded<T> {
    pub value: T,
    pub tail_bound: f64,
}

/// Torus with two scatterers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGeometry {
    aspect: Aspect,
    x1: [f64; 2],
    x2: [f64; 2],
}

fn reduce(t: f64, period: f64) -> f64 {
    let r = t.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

impl TorusGeometry {
    /// Rejects scatterers that coincide on the torus.
    pub fn new(aspect: Aspect, x1: [f64; 2], x2: [f64; 2]) -> Result<Self> {
        let g = Self::unchecked(aspect, x1, x2);
        if !x1.iter().chain(x2.iter()).all(|c| c.is_finite()) {
            return Err(Error::Precondition("scatterer coordinates must be finite".into()));
        }
        let per = aspect.periods();
        let x0 = g.x0();
        let close = (0..2).all(|k| {
            let t = x0[k].min(per[k] - x0[k]);
            t <= 1e-12 * per[k]
        });
        if close {
            return Err(Error::CoincidentScatterers);
        }
        Ok(g)
    }

    /// Skips the coincidence guard; used to test summation routines.
    pub fn unchecked(aspect: Aspect, x1: [f64; 2], x2: [f64; 2]) -> Self {
        let per = aspect.periods();
        let x1 = [reduce(x1[0], per[0]), reduce(x1[1], per[1])];
        let x2 = [reduce(x2[0], per[0]), reduce(x2[1], per[1])];
        Self { aspect, x1, x2 }
    }

    /// Square torus with `x1 = 0` and `x0/π = (√2 − 1, √3 − 1)`.
    pub fn default_square() -> Self {
        Self::with_scaled_offset(Aspect::SQUARE, DEFAULT_OFFSET)
    }

    /// Scatterers placed so that the rescaled pair
    /// `(α1·a/π, α2/(π·a))` equals `scaled`.
    pub fn with_scaled_offset(aspect: Aspect, scaled: [f64; 2]) -> Self {
        let a = aspect.a();
        let x0 = [PI * scaled[0] / a, PI * scaled[1] * a];
        Self::unchecked(aspect, [0.0, 0.0], x0)
    }

    pub fn aspect(&self) -> Aspect {
        self.aspect
    }

    pub fn x1(&self) -> [f64; 2] {
        self.x1
    }

    pub fn x2(&self) -> [f64; 2] {
        self.x2
    }

    /// `x2 − x1`, reduced to the fundamental domain.
    pub fn x0(&self) -> [f64; 2] {
        let per = self.aspect.periods();
        [
            reduce(self.x2[0] - self.x1[0], per[0]),
            reduce(self.x2[1] - self.x1[1], per[1]),
        ]
    }

    /// The pair whose Diophantine type governs the filters:
    /// `(α1·a/π, α2/(π·a))`, which is `x0/π` on the square torus.
    pub fn diophantine_pair(&self) -> [f64; 2] {
        let a = self.aspect.a();
        let x0 = self.x0();
        [x0[0] * a / PI, x0[1] / (PI * a)]
    }

    /// Copy with the two scatterers exchanged.
    pub fn swapped(&self) -> Self {
        Self { aspect: self.aspect, x1: self.x2, x2: self.x1 }
    }
}

/// Default value of `x0/π` (a badly approximable pair).
pub const DEFAULT_OFFSET: [f64; 2] = [std::f64::consts::SQRT_2 - 1.0, 0.732_050_807_568_877_2];

/// `cos(k·θ)` for `k = 0..=n`, each computed directly.
pub(crate) fn cos_table(theta: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| (k as f64 * theta).cos()).collect()
}

fn orbit_weight(x: u64, y: u64) -> f64 {
    match (x == 0, y == 0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 2.0,
        (false, false) => 4.0,
    }
}

/// One shell of the lattice: exact key, point count `r`, and
/// `s = Σ_{norm(ξ)=n} cos⟨ξ, w⟩` for the displacement the stream was built with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub key: u64,
    pub count: u32,
    pub cos_sum: f64,
}

/// Streams every shell with `key <= kmax` in increasing key order.
///
/// Points are visited in the first quadrant with orbit weights; the `±`
/// symmetry of the lattice makes `Σ e^{i⟨ξ,w⟩}` over a shell real.
pub fn for_each_shell(aspect: Aspect, w: [f64; 2], kmax: u64, mut f: impl FnMut(Shell)) {
    const BLOCK: u64 = 1 << 20;
    let (p2, q2) = (aspect.numer().pow(2), aspect.denom().pow(2));
    let a = aspect.a();
    let xmax = isqrt(kmax / p2) as usize;
    let ymax = isqrt(kmax / q2) as usize;
    let cx = cos_table(a * w[0], xmax);
    let cy = cos_table(w[1] / a, ymax);
    let mut counts = vec![0u32; BLOCK.min(kmax + 1) as usize];
    let mut sums = vec![0.0f64; counts.len()];
    let mut k0 = 0u64;
    while k0 <= kmax {
        let k1 = (k0 + BLOCK - 1).min(kmax);
        let span = (k1 - k0 + 1) as usize;
        counts[..span].fill(0);
        sums[..span].fill(0.0);
        for x in 0..=xmax as u64 {
            let used = p2 * x * x;
            if used > k1 {
                break;
            }
            let yhi = isqrt((k1 - used) / q2);
            let ylo = if k0 <= used {
                0
            } else {
                let need = (k0 - used).div_ceil(q2);
                let r = isqrt(need);
                if r * r == need {
                    r
                } else {
                    r + 1
                }
            };
            let cxx = cx[x as usize];
            for y in ylo..=yhi {
                let k = used + q2 * y * y;
                let wt = orbit_weight(x, y);
                let slot = (k - k0) as usize;
                counts[slot] += wt as u32;
                sums[slot] += wt * cxx * cy[y as usize];
            }
        }
        for i in 0..span {
            if counts[i] > 0 {
                f(Shell { key: k0 + i as u64, count: counts[i], cos_sum: sums[i] });
            }
        }
        k0 = k1 + 1;
    }
}

/// `N(R) − πR`: excess of lattice points with norm `<= R` over the mean density.
fn count_excess(points: u64, cutoff: f64) -> f64 {
    points as f64 - PI * cutoff
}

fn check_cutoff(cutoff: f64, scale: f64) -> Result<()> {
    if !(cutoff.is_finite() && cutoff > 4.0 * scale.max(1.0)) {
        return Err(Error::Precondition(format!(
            "cutoff {cutoff} must exceed 4 * max(|lambda|, |mu|, 1) = {}",
            4.0 * scale.max(1.0)
        )));
    }
    Ok(())
}

/// `(G_μ − G_λ)(w) = −(1/4π²) Σ_ξ e^{i⟨ξ,w⟩} (μ − λ) / ((|ξ|² − μ)(|ξ|² − λ))`.
///
/// Summed point by point over norms `<= cutoff`. For `w = 0` a mean-density
/// tail correction is added; the reported bound is the uncorrected tail.
pub fn resolvent_diff(
    aspect: Aspect,
    lambda: C64,
    mu: C64,
    w: [f64; 2],
    cutoff: f64,
) -> Result<Bounded<C64>> {
    check_cutoff(cutoff, lambda.norm().max(mu.norm()))?;
    let kmax = aspect.key_floor(cutoff);
    let (p2, q2) = (aspect.numer().pow(2), aspect.denom().pow(2));
    let scale = aspect.scale() as f64;
    let a = aspect.a();
    let xmax = isqrt(kmax / p2) as usize;
    let ymax = isqrt(kmax / q2) as usize;
    let cx = cos_table(a * w[0], xmax);
    let cy = cos_table(w[1] / a, ymax);
    let diff = mu - lambda;
    let near = |z: C64, n: f64| z.im == 0.0 && (n - z.re).abs() < SINGULAR_DISTANCE;

    let rows: Vec<Result<(C64, u64)>> = (0..=xmax as u64)
        .into_par_iter()
        .map(|x| {
            let used = p2 * x * x;
            let yhi = isqrt((kmax - used) / q2);
            let mut acc = C64::new(0.0, 0.0);
            let mut pts = 0u64;
            for y in 0..=yhi {
                let n = (used + q2 * y * y) as f64 / scale;
                if near(lambda, n) || near(mu, n) {
                    let z = if near(lambda, n) { lambda.re } else { mu.re };
                    return Err(Error::SingularInput { lambda: z, norm: n, distance: (n - z).abs() });
                }
                let wt = orbit_weight(x, y);
                pts += wt as u64;
                acc += diff * (wt * cx[x as usize] * cy[y as usize]) / ((n - mu) * (n - lambda));
            }
            Ok((acc, pts))
        })
        .collect();
    let mut sum = C64::new(0.0, 0.0);
    let mut points = 0u64;
    for r in rows {
        let (acc, pts) = r?;
        sum += acc;
        points += pts;
    }
    if w == [0.0, 0.0] {
        let rc = C64::from(cutoff);
        let tail = PI * ((rc - lambda) / (rc - mu)).ln()
            - count_excess(points, cutoff) * (1.0 / (rc - mu) - 1.0 / (rc - lambda));
        sum += tail;
    }
    let top = lambda.norm().max(mu.norm());
    Ok(Bounded {
        value: -sum / KAPPA,
        tail_bound: diff.norm() * PI / (KAPPA * (cutoff - top)),
    })
}

/// `Im G_i(w)`, from `G_i − G_{−i} = 2i·Im G_i` (the sum is even in `w`).
pub fn im_green_i(aspect: Aspect, w: [f64; 2], cutoff: f64) -> Result<Bounded<f64>> {
    let r = resolvent_diff(aspect, C64::new(0.0, -1.0), C64::new(0.0, 1.0), w, cutoff)?;
    Ok(Bounded { value: r.value.im / 2.0, tail_bound: r.tail_bound / 2.0 })
}

/// `c1 = ‖G_{±i}(·, x_j)‖²` and `c2 = ⟨G_i(·,x1), G_i(·,x2)⟩`, in the
/// lattice normalization `(1/16π⁴) Σ (·)/(|ξ|⁴ + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficiencyConstants {
    pub c1: f64,
    pub c2: f64,
    pub cutoff_used: f64,
    pub tail_bound: f64,
}

impl DeficiencyConstants {
    pub fn gram(&self) -> [[f64; 2]; 2] {
        [[self.c1, self.c2], [self.c2, self.c1]]
    }
}

/// Relative tolerance for the internal `Im G_i` identity check.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;

fn raw_constants(geom: &TorusGeometry, cutoff: f64) -> (f64, f64, u64) {
    let aspect = geom.aspect();
    let scale = aspect.scale() as f64;
    let (mut s1, mut s2, mut pts) = (0.0, 0.0, 0u64);
    for_each_shell(aspect, geom.x0(), aspect.key_floor(cutoff), |sh| {
        let n = sh.key as f64 / scale;
        let den = n * n + 1.0;
        s1 += sh.count as f64 / den;
        s2 += sh.cos_sum / den;
        pts += sh.count as u64;
    });
    s1 += PI * (1.0 / cutoff).atan() - count_excess(pts, cutoff) / (cutoff * cutoff + 1.0);
    (s1, s2, pts)
}

/// Computes `c1, c2` and checks `Im G_i(0) = −4π²c1`, `Im G_i(x0) = −4π²c2`
/// through the independent resolvent route.
pub fn deficiency_constants(geom: &TorusGeometry, cutoff: f64) -> Result<DeficiencyConstants> {
    let c = deficiency_constants_unverified(geom, cutoff)?;
    let scale = c.c1.abs();
    let checks = [("Im G_i(0) = -4pi^2 c1", [0.0, 0.0], c.c1), ("Im G_i(x0) = -4pi^2 c2", geom.x0(), c.c2)];
    for (name, w, cj) in checks {
        let im = im_green_i(geom.aspect(), w, cutoff)?.value;
        let rhs = -KAPPA * cj;
        if (im - rhs).abs() > IDENTITY_TOLERANCE * KAPPA * scale {
            return Err(Error::IdentityViolation { name, lhs: im, rhs });
        }
    }
    if !(c.c1 > c.c2.abs()) {
        return Err(Error::DegenerateGram { c1: c.c1, c2: c.c2 });
    }
    Ok(c)
}

/// The lattice sums alone, without the identity check or the Cauchy–Schwarz guard.
pub fn deficiency_constants_unverified(
    geom: &TorusGeometry,
    cutoff: f64,
) -> Result<DeficiencyConstants> {
    if !(cutoff >= 1e4) || !cutoff.is_finite() {
        return Err(Error::Precondition(format!("deficiency cutoff {cutoff} must be >= 1e4")));
    }
    let (s1, s2, pts) = raw_constants(geom, cutoff);
    let norm = 16.0 * PI.powi(4);
    let tail = (PI / cutoff + count_excess(pts, cutoff).abs() / (cutoff * cutoff)) / norm;
    Ok(DeficiencyConstants { c1: s1 / norm, c2: s2 / norm, cutoff_used: cutoff, tail_bound: tail })
}

/// Lower-triangular `T` with `T·Gram·Tᵀ = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingMatrix(pub [[f64; 2]; 2]);

impl MixingMatrix {
    pub fn as_mat2(&self) -> Mat2 {
        Mat2::from_real(self.0)
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// `max |T·Gram·Tᵀ − I|` entrywise.
    pub fn whitening_error(&self, gram: [[f64; 2]; 2]) -> f64 {
        let t = self.0;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut v = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        v += t[i][k] * gram[k][l] * t[j][l];
                    }
                }
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((v - target).abs());
            }
        }
        err
    }
}

pub fn mixing_matrix(c: &DeficiencyConstants) -> Result<MixingMatrix> {
    let (c1, c2) = (c.c1, c.c2);
    if !(c1 > c2.abs()) || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::DegenerateGram { c1, c2 });
    }
    let det = c1 * c1 - c2 * c2;
    Ok(MixingMatrix([
        [1.0 / c1.sqrt(), 0.0],
        [-c2 / (c1 * det).sqrt(), (c1 / det).sqrt()],
    ]))
}

/// `(1/16π⁴) Σ_ξ |d1 e^{i⟨ξ,x1⟩} + d2 e^{i⟨ξ,x2⟩}|² / (|ξ|² − λ)²` for unit `d`.
pub fn norm_sq(lambda: f64, d: [C64; 2], geom: &TorusGeometry, cutoff: f64) -> Result<Bounded<f64>> {
    let dn = d[0].norm_sqr() + d[1].norm_sqr();
    if (dn - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("|d|^2 = {dn}, expected 1")));
    }
    if !(cutoff >= 1e4f64.max(2.0 * lambda)) {
        return Err(Error::Precondition(format!(
            "norm_sq cutoff {cutoff} must be >= max(1e4, 2 lambda)"
        )));
    }
    let aspect = geom.aspect();
    let scale = aspect.scale() as f64;
    let cross = 2.0 * (d[0] * d[1].conj()).re;
    let mut sum = 0.0;
    let mut pts = 0u64;
    let mut err = None;
    for_each_shell(aspect, geom.x0(), aspect.key_floor(cutoff), |sh| {
        let n = sh.key as f64 / scale;
        if (n - lambda).abs() < SINGULAR_DISTANCE && err.is_none() {
            err = Some(Error::SingularInput { lambda, norm: n, distance: (n - lambda).abs() });
        }
        let den = (n - lambda) * (n - lambda);
        sum += (sh.count as f64 * dn + cross * sh.cos_sum) / den;
        pts += sh.count as u64;
    });
    if let Some(e) = err {
        return Err(e);
    }
    let gap = cutoff - lambda;
    sum += dn * (PI / gap - count_excess(pts, cutoff) / (gap * gap));
    let norm = 16.0 * PI.powi(4);
    Ok(Bounded { value: sum / norm, tail_bound: 2.0 * PI / (gap * norm) })
}

/// Default lattice cutoff for secular work.
pub fn secular_cutoff(lambda_max: f64) -> f64 {
    1e7f64.max(1e4 * lambda_max.abs())
}

const CHEB_NODES: usize = 64;

/// Real Chebyshev interpolant on `[lo, hi]`.
#[derive(Debug, Clone)]
struct Chebyshev {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    fn nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        (0..n).map(|k| mid + half * (PI * (k as f64 + 0.5) / n as f64).cos()).collect()
    }

    fn fit(lo: f64, hi: f64, values: &[f64]) -> Self {
        let n = values.len();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                let c = 2.0 * s / n as f64;
                if j == 0 {
                    c / 2.0
                } else {
                    c
                }
            })
            .collect();
        Self { lo, hi, coeffs }
    }

    fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }
}

/// Fast evaluator for `(G_i − G_λ)` at displacements `0` and `x0`, valid for
/// real `λ` in a fixed domain `[lo, hi]`.
///
/// Shells below a split norm are summed directly; the smooth remainder up to
/// the cutoff, together with the mean-density tail at `w = 0`, is replaced by
/// a Chebyshev interpolant built once.
#[derive(Debug, Clone)]
pub struct SecularKernel {
    geom: TorusGeometry,
    cutoff: f64,
    lo: f64,
    hi: f64,
    near_norms: Vec<f64>,
    near_counts: Vec<f64>,
    near_cos: Vec<f64>,
    // Σ_{n<=R} S_w / (n − i) plus the λ-independent tail part
    constant: [C64; 2],
    far: [Chebyshev; 2],
    constants: DeficiencyConstants,
}

impl SecularKernel {
    pub fn new(geom: &TorusGeometry, lo: f64, hi: f64, cutoff: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Precondition(format!("kernel domain [{lo}, {hi}] is empty")));
        }
        check_cutoff(cutoff, lo.abs().max(hi.abs()))?;
        let split = hi + 2000f64.max(2.0 * (hi - lo));
        if split >= cutoff {
            return Err(Error::Precondition(format!(
                "cutoff {cutoff} must exceed the split norm {split}"
            )));
        }
        let aspect = geom.aspect();
        let scale = aspect.scale() as f64;
        let nodes = Chebyshev::nodes(lo, hi, CHEB_NODES);
        let mut far_sum = [vec![0.0; CHEB_NODES], vec![0.0; CHEB_NODES]];
        let mut constant = [C64::new(0.0, 0.0); 2];
        let (mut near_norms, mut near_counts, mut near_cos) = (Vec::new(), Vec::new(), Vec::new());
        let mut pts = 0u64;
        let mut block: Vec<(f64, f64, f64)> = Vec::with_capacity(1 << 16);
        let flush = |block: &mut Vec<(f64, f64, f64)>, far_sum: &mut [Vec<f64>; 2]| {
            let [f0, f1] = far_sum;
            f0.par_iter_mut().zip(f1.par_iter_mut()).zip(nodes.par_iter()).for_each(
                |((a0, a1), &lam)| {
                    let (mut s0, mut s1) = (0.0, 0.0);
                    for &(n, r, s) in block.iter() {
                        let inv = 1.0 / (n - lam);
                        s0 += r * inv;
                        s1 += s * inv;
                    }
                    *a0 -= s0;
                    *a1 -= s1;
                },
            );
            block.clear();
        };
        let i = C64::new(0.0, 1.0);
        for_each_shell(aspect, geom.x0(), aspect.key_floor(cutoff), |sh| {
            let n = sh.key as f64 / scale;
            let (r, s) = (sh.count as f64, sh.cos_sum);
            pts += sh.count as u64;
            let inv = 1.0 / (C64::from(n) - i);
            constant[0] += inv * r;
            constant[1] += inv * s;
            if n < split {
                near_norms.push(n);
                near_counts.push(r);
                near_cos.push(s);
            } else {
                block.push((n, r, s));
                if block.len() == block.capacity() {
                    flush(&mut block, &mut far_sum);
                }
            }
        });
        flush(&mut block, &mut far_sum);
        let excess = count_excess(pts, cutoff);
        let rc = C64::from(cutoff);
        constant[0] += -PI * (rc - i).ln() - excess / (rc - i);
        for (k, &lam) in nodes.iter().enumerate() {
            far_sum[0][k] += PI * (cutoff - lam).ln() + excess / (cutoff - lam);
        }
        let far = [Chebyshev::fit(lo, hi, &far_sum[0]), Chebyshev::fit(lo, hi, &far_sum[1])];
        let norm = 16.0 * PI.powi(4);
        let constants = DeficiencyConstants {
            c1: constant[0].im / norm,
            c2: constant[1].im / norm,
            cutoff_used: cutoff,
            tail_bound: (PI / cutoff + excess.abs() / (cutoff * cutoff)) / norm,
        };
        Ok(Self {
            geom: *geom,
            cutoff,
            lo,
            hi,
            near_norms,
            near_counts,
            near_cos,
            constant,
            far,
            constants,
        })
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geom
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `c1, c2` from the same shells the kernel sums.
    pub fn constants(&self) -> DeficiencyConstants {
        self.constants
    }

    /// Laplace eigenvalues summed directly by the kernel (all norms below the split).
    pub fn near_norms(&self) -> &[f64] {
        &self.near_norms
    }

    /// Nearest Laplace eigenvalue to `lambda` and its distance.
    pub fn nearest_norm(&self, lambda: f64) -> (f64, f64) {
        let i = self.near_norms.partition_point(|&n| n < lambda);
        let mut best = (f64::NAN, f64::INFINITY);
        for j in [i.wrapping_sub(1), i] {
            if let Some(&n) = self.near_norms.get(j) {
                let d = (n - lambda).abs();
                if d < best.1 {
                    best = (n, d);
                }
            }
        }
        best
    }

    /// `[(G_i − G_λ)(0), (G_i − G_λ)(x0)]`.
    pub fn eval(&self, lambda: f64) -> Result<[C64; 2]> {
        if !(lambda >= self.lo && lambda <= self.hi) {
            return Err(Error::OutOfDomain { lambda, lo: self.lo, hi: self.hi });
        }
        let (n, dist) = self.nearest_norm(lambda);
        if dist < SINGULAR_DISTANCE {
            return Err(Error::SingularInput { lambda, norm: n, distance: dist });
        }
        let (mut s0, mut s1) = (0.0, 0.0);
        for ((&n, &r), &s) in self.near_norms.iter().zip(&self.near_counts).zip(&self.near_cos) {
            let inv = 1.0 / (n - lambda);
            s0 += r * inv;
            s1 += s * inv;
        }
        let v0 = self.constant[0] - s0 + self.far[0].eval(lambda);
        let v1 = self.constant[1] - s1 + self.far[1].eval(lambda);
        Ok([-v0 / KAPPA, -v1 / KAPPA])
    }

    /// Near-shell part of `d/dλ Re(G_i − G_λ)(w)`; nonnegative at `w = 0`.
    pub fn eval_derivative_near(&self, lambda: f64) -> [f64; 2] {
        let (mut s0, mut s1) = (0.0, 0.0);
        for ((&n, &r), &s) in self.near_norms.iter().zip(&self.near_counts).zip(&self.near_cos) {
            let inv = 1.0 / ((n - lambda) * (n - lambda));
            s0 += r * inv;
            s1 += s * inv;
        }
        [s0 / KAPPA, s1 / KAPPA]
    }
}
