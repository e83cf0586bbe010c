//! Self-adjoint extensions and their new eigenvalues.
//!
//! An extension is a unitary `U ∈ U(2)`. A real `λ` off the Laplace spectrum
//! is a new eigenvalue iff the secular matrix `M(λ)` is singular, where
//! `M[j][k] = conj(A_λ(x_j)_k)` and
//! `A_λ(x) = T (G_i − G_λ)(x) + U T (G_{−i} − G_λ)(x)`.
//!
//! Let `B` have columns `A_λ(x_j)`, so `M = B†`. Writing the Green's-function
//! block as `Φ = ReΦ − iκC` with `C` the Gram matrix and `R = T·ReΦ·Tᵀ`, one
//! gets `B·Tᵀ = (I+U)R − iκ(I−U)`. In an eigenbasis `U = W diag(e^{iθ_j}) W†` the
//! condition becomes `det(W_J† R W_J − κ diag(tan(θ_j/2))) = 0` over the
//! eigen-directions `J` with `e^{iθ_j} ≠ −1`. That matrix is Hermitian and
//! nondecreasing in `λ` inside every Laplace gap, so each ordered eigenvalue
//! crosses zero at most once per gap and bisection finds every root.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::{
    mixing_matrix, secular_cutoff, DeficiencyConstants, MixingMatrix, SecularKernel,
    TorusGeometry, KAPPA,
};
use crate::lattice::NormTable;
use crate::linalg::{hermitian_eigen, norm2, normalize, Mat2, C64};

/// Singular-value tolerance for `rank(I + U)`.
pub const RANK_TOLERANCE: f64 = 1e-8;
/// Default acceptance tolerance for `σ_min / σ_max` at a root.
pub const ROOT_TOLERANCE: f64 = 1e-8;
/// Relative gap margin kept clear of Laplace eigenvalues.
pub const GAP_MARGIN: f64 = 1e-6;

/// A unitary `2×2` boundary-condition matrix with its spectral data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionU {
    matrix: Mat2,
    phases: [f64; 2],
    basis: Mat2,
    rank_defect: usize,
    kernel_vector: Option<[C64; 2]>,
}

impl ExtensionU {
    /// Validates unitarity to `1e-12` and computes the eigen-decomposition.
    pub fn new(matrix: Mat2) -> Result<Self> {
        let defect = (matrix * matrix.adjoint() - Mat2::IDENTITY).max_abs();
        if !(defect <= 1e-12) {
            return Err(Error::NotUnitary { defect });
        }
        let (phases, basis) = unitary_eigen(matrix);
        let ipu = Mat2::IDENTITY + matrix;
        let (smax, smin) = ipu.singular_values();
        let rank_defect = if smax <= RANK_TOLERANCE {
            0
        } else if smin <= RANK_TOLERANCE {
            1
        } else {
            2
        };
        let kernel_vector = (rank_defect == 1)
            .then(|| (Mat2::IDENTITY + matrix.adjoint()).min_right_singular_vector());
        Ok(Self { matrix, phases, basis, rank_defect, kernel_vector })
    }

    /// `U = W diag(e^{iθ1}, e^{iθ2}) W†` with
    /// `W = [[cos η, −sin η e^{−iχ}], [sin η e^{iχ}, cos η]]`.
    pub fn from_eigen(phases: [f64; 2], rotation: f64, rotation_phase: f64) -> Self {
        let (c, s) = (rotation.cos(), rotation.sin());
        let e = C64::from_polar(1.0, rotation_phase);
        let w = Mat2([[C64::from(c), -e.conj() * s], [e * s, C64::from(c)]]);
        let d = Mat2::diag(C64::from_polar(1.0, phases[0]), C64::from_polar(1.0, phases[1]));
        Self::new(w * d * w.adjoint()).expect("conjugated diagonal unitary")
    }

    pub fn matrix(&self) -> Mat2 {
        self.matrix
    }

    /// Eigenphases in `(−π, π]`, paired with the columns of [`Self::eigenbasis`].
    pub fn phases(&self) -> [f64; 2] {
        self.phases
    }

    pub fn eigenbasis(&self) -> Mat2 {
        self.basis
    }

    /// `rank(I + U)`.
    pub fn rank_defect(&self) -> usize {
        self.rank_defect
    }

    /// Unit `v0` with `(I + U†) v0 = 0`, present iff `rank(I + U) = 1`.
    pub fn kernel_vector(&self) -> Option<[C64; 2]> {
        self.kernel_vector
    }

    /// Eigen-directions with `|1 + e^{iθ}| > RANK_TOLERANCE`.
    pub fn active(&self) -> Vec<usize> {
        (0..2)
            .filter(|&j| (C64::from(1.0) + C64::from_polar(1.0, self.phases[j])).norm() > RANK_TOLERANCE)
            .collect()
    }

    /// Multiplies by a global phase.
    pub fn rephased(&self, theta: f64) -> Self {
        Self::new(self.matrix.scale(C64::from_polar(1.0, theta))).expect("unitary times phase")
    }
}

/// Standard `U(2) = U(1) × SU(2)` chart:
/// `U = e^{iφ} [[α, −β̄], [β, ᾱ]]`, `α = cos η e^{iψ1}`, `β = sin η e^{iψ2}`.
pub fn make_unitary(phase: f64, su2: [f64; 3]) -> ExtensionU {
    let [eta, psi1, psi2] = su2;
    let alpha = C64::from_polar(eta.cos(), psi1);
    let beta = C64::from_polar(eta.sin(), psi2);
    let m = Mat2([[alpha, -beta.conj()], [beta, alpha.conj()]]).scale(C64::from_polar(1.0, phase));
    ExtensionU::new(m).expect("chart output is unitary")
}

/// Eigen-decomposition of a unitary matrix with an orthonormal basis.
fn unitary_eigen(u: Mat2) -> ([f64; 2], Mat2) {
    let tr = u.trace();
    let det = u.det();
    let disc = (tr * tr - det * 4.0).sqrt();
    let z = [(tr + disc) / 2.0, (tr - disc) / 2.0];
    if (z[0] - z[1]).norm() < 1e-12 {
        let avg = tr / 2.0;
        return ([avg.arg(), avg.arg()], Mat2::IDENTITY);
    }
    let m = u - Mat2::diag(z[0], z[0]);
    let r0 = [m.0[0][0], m.0[0][1]];
    let r1 = [m.0[1][0], m.0[1][1]];
    let row = if norm2(r0) >= norm2(r1) { r0 } else { r1 };
    let w1 = normalize([row[1], -row[0]]);
    let w2 = [-w1[1].conj(), w1[0].conj()];
    let basis = Mat2::from_columns(w1, w2);
    let rq = |w: [C64; 2]| crate::linalg::inner(u.apply(w), w).arg();
    ([rq(w1), rq(w2)], basis)
}

/// Named sample extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    MinusIdentity,
    Rank1Sample,
    Rank2Sample,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::MinusIdentity, Preset::Rank1Sample, Preset::Rank2Sample];

    pub fn name(self) -> &'static str {
        match self {
            Preset::MinusIdentity => "minus-identity",
            Preset::Rank1Sample => "rank1-sample",
            Preset::Rank2Sample => "rank2-sample",
        }
    }

    pub fn extension(self) -> ExtensionU {
        match self {
            Preset::MinusIdentity => ExtensionU::from_eigen([PI, PI], 0.0, 0.0),
            Preset::Rank1Sample => ExtensionU::from_eigen([PI, 0.7], 0.4, 0.0),
            Preset::Rank2Sample => ExtensionU::from_eigen([1.1, -2.3], 0.9, 0.5),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown preset {s:?}")))
    }
}

/// Extension commuting with the exchange of the two scatterers once the
/// deficiency bases are un-whitened: `U = T Q diag(e^{iθ+}, e^{iθ−}) Qᵀ T⁻¹`
/// with `Q = [[1, 1], [1, −1]]/√2`.
pub fn swap_symmetric(theta_plus: f64, theta_minus: f64, t: &MixingMatrix) -> Result<ExtensionU> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let q = Mat2::from_real([[h, h], [h, -h]]);
    let d = Mat2::diag(C64::from_polar(1.0, theta_plus), C64::from_polar(1.0, theta_minus));
    let inner = q * d * q.transpose();
    let tm = t.as_mat2();
    let tinv = tm
        .inverse()
        .ok_or_else(|| Error::Precondition("mixing matrix is singular".into()))?;
    let u = tm * inner * tinv;
    // project back onto U(2) to remove rounding from the similarity transform
    ExtensionU::new(polar_unitary(u))
}

/// Unitary polar factor of an invertible `2×2` matrix.
fn polar_unitary(m: Mat2) -> Mat2 {
    // Newton iteration X ← (X + X^{−†})/2 converges quadratically
    let mut x = m;
    for _ in 0..60 {
        let Some(inv) = x.inverse() else { break };
        let next = (x + inv.adjoint()).scale(C64::from(0.5));
        let done = (next - x).max_abs() < 1e-16;
        x = next;
        if done {
            break;
        }
    }
    x
}

/// An extension that may depend on the spectral parameter.
pub trait ExtensionFamily: Sync {
    fn extension_at(&self, lambda: f64) -> ExtensionU;

    /// The extension when it does not vary with `λ`.
    fn constant(&self) -> Option<ExtensionU> {
        None
    }
}

impl ExtensionFamily for ExtensionU {
    fn extension_at(&self, _lambda: f64) -> ExtensionU {
        *self
    }

    fn constant(&self) -> Option<ExtensionU> {
        Some(*self)
    }
}

/// Wraps a closure `λ ↦ U(λ)`.
pub struct VaryingExtension<F>(pub F);

impl<F: Fn(f64) -> ExtensionU + Sync> ExtensionFamily for VaryingExtension<F> {
    fn extension_at(&self, lambda: f64) -> ExtensionU {
        (self.0)(lambda)
    }
}

/// Secular matrix at a real spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularMatrix {
    pub lambda: f64,
    pub m: Mat2,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl SecularMatrix {
    /// `σ_min / σ_max`, the scale-free singularity measure.
    pub fn relative_sigma(&self) -> f64 {
        if self.sigma_max > 0.0 {
            self.sigma_min / self.sigma_max
        } else {
            0.0
        }
    }
}

/// Everything the secular condition needs apart from `U`.
#[derive(Debug, Clone)]
pub struct SecularProblem {
    kernel: SecularKernel,
    mixing: MixingMatrix,
}

impl SecularProblem {
    /// Builds a kernel on `[lo, hi]`; `T` comes from the kernel's own
    /// constants so that `T·ImΦ·Tᵀ = −κI` holds to rounding.
    pub fn new(geom: &TorusGeometry, lo: f64, hi: f64, cutoff: f64) -> Result<Self> {
        let kernel = SecularKernel::new(geom, lo, hi, cutoff)?;
        Self::from_kernel(kernel)
    }

    pub fn from_kernel(kernel: SecularKernel) -> Result<Self> {
        let mixing = mixing_matrix(&kernel.constants())?;
        Ok(Self { kernel, mixing })
    }

    pub fn kernel(&self) -> &SecularKernel {
        &self.kernel
    }

    pub fn mixing(&self) -> &MixingMatrix {
        &self.mixing
    }

    pub fn constants(&self) -> DeficiencyConstants {
        self.kernel.constants()
    }

    fn phi(&self, lambda: f64) -> Result<Mat2> {
        let [f0, fx] = self.kernel.eval(lambda)?;
        Ok(Mat2([[f0, fx], [fx, f0]]))
    }

    /// `T·ReΦ·Tᵀ` as real entries.
    fn whitened_real(&self, lambda: f64) -> Result<[[f64; 2]; 2]> {
        let [f0, fx] = self.kernel.eval(lambda)?;
        let re = [[f0.re, fx.re], [fx.re, f0.re]];
        let t = self.mixing.0;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..2)
                    .flat_map(|k| (0..2).map(move |l| (k, l)))
                    .map(|(k, l)| t[i][k] * re[k][l] * t[j][l])
                    .sum();
            }
        }
        Ok(out)
    }

    /// Largest deviation of `T·ImΦ·Tᵀ` from `−κI`, relative to `κ`.
    pub fn imaginary_consistency(&self, lambda: f64) -> Result<f64> {
        let phi = self.phi(lambda)?;
        let im = Mat2::from_real([[phi.0[0][0].im, phi.0[0][1].im], [phi.0[1][0].im, phi.0[1][1].im]]);
        let t = self.mixing.as_mat2();
        let w = t * im * t.transpose();
        Ok((w + Mat2::IDENTITY.scale(C64::from(KAPPA))).max_abs() / KAPPA)
    }

    /// `K(λ) = U†·B·conj(B)⁻¹` with `B = T·Φ`; returns `K` and `‖KK† − I‖`.
    pub fn characteristic_matrix(&self, lambda: f64, u: &ExtensionU) -> Result<(Mat2, f64)> {
        let b = self.mixing.as_mat2() * self.phi(lambda)?;
        let binv = b
            .conj()
            .inverse()
            .ok_or_else(|| Error::RootValidation { lambda, reason: "conj(B) singular".into() })?;
        let k = u.matrix().adjoint() * b * binv;
        let defect = (k * k.adjoint() - Mat2::IDENTITY).max_abs();
        Ok((k, defect))
    }

    /// Ascending eigenvalues of the compressed Hermitian secular matrix.
    fn reduced_eigenvalues(&self, lambda: f64, u: &ExtensionU) -> Result<Vec<f64>> {
        let r = self.whitened_real(lambda)?;
        let w = u.eigenbasis();
        let rm = w.adjoint() * Mat2::from_real(r) * w;
        let active = u.active();
        let shift = |j: usize| KAPPA * (u.phases()[j] / 2.0).tan();
        Ok(match active.as_slice() {
            [] => Vec::new(),
            [j] => vec![rm.0[*j][*j].re - shift(*j)],
            _ => {
                let e = rm - Mat2::diag(C64::from(shift(0)), C64::from(shift(1)));
                // symmetrize against rounding before the closed-form solve
                let b = (e.0[0][1] + e.0[1][0].conj()) / 2.0;
                let h = Mat2([[C64::from(e.0[0][0].re), b], [b.conj(), C64::from(e.0[1][1].re)]]);
                hermitian_eigen(h).values.to_vec()
            }
        })
    }
}

/// Assembles `M(λ)` after checking the gap margin.
pub fn secular_matrix(lambda: f64, problem: &SecularProblem, u: &ExtensionU) -> Result<SecularMatrix> {
    let norms = problem.kernel().near_norms();
    let i = norms.partition_point(|&n| n < lambda);
    let below = i.checked_sub(1).map(|j| norms[j]);
    let above = norms.get(i).copied();
    let width = match (below, above) {
        (Some(a), Some(b)) => b - a,
        _ => 1.0,
    };
    for n in [below, above].into_iter().flatten() {
        if (lambda - n).abs() < GAP_MARGIN * width {
            return Err(Error::NearSingularity { lambda, norm: n, margin: GAP_MARGIN * width });
        }
    }
    secular_matrix_unchecked(lambda, problem, u)
}

fn secular_matrix_unchecked(
    lambda: f64,
    problem: &SecularProblem,
    u: &ExtensionU,
) -> Result<SecularMatrix> {
    let phi = problem.phi(lambda)?;
    let t = problem.mixing().as_mat2();
    let b = t * phi + u.matrix() * t * phi.conj();
    let m = b.adjoint();
    let (sigma_max, sigma_min) = m.singular_values();
    Ok(SecularMatrix { lambda, m, sigma_min, sigma_max })
}

/// A new eigenvalue with its kernel vector and Green's-function coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewEigenpair {
    pub lambda: f64,
    /// Unit vector with `M(λ) v = 0`.
    pub v: [C64; 2],
    /// Unit coefficients of `d1 G_λ(·,x1) + d2 G_λ(·,x2)`.
    pub d: [C64; 2],
    /// `σ_min / σ_max` of `M(λ)`.
    pub residual: f64,
}

/// Root-finding route for [`find_new_eigenvalues`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootStrategy {
    /// Bisection on the ordered eigenvalues of the Hermitian reduction.
    #[default]
    Monotone,
    /// Adaptive scan of `σ_min/σ_max` with golden-section refinement.
    SigmaScan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub margin: f64,
    pub strategy: RootStrategy,
    pub scan_points: usize,
    /// Lowest spectral parameter examined in the gap below zero.
    pub floor: f64,
    /// Extended floor tried when roots remain below `floor`.
    pub deep_floor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: ROOT_TOLERANCE,
            margin: GAP_MARGIN,
            strategy: RootStrategy::Monotone,
            scan_points: 64,
            floor: -1e4,
            deep_floor: -1e6,
        }
    }
}

/// An open interval between consecutive Laplace eigenvalues; `lo = −∞`
/// for the gap below zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
}

impl Gap {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Precondition(format!("gap ({lo}, {hi}) is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn below_zero() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: 0.0 }
    }
}

/// Roots found in one gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSolution {
    pub gap: Gap,
    pub roots: Vec<NewEigenpair>,
    /// Roots known to exist below the deepest floor examined (gap below zero only).
    pub unresolved_below: usize,
}

impl GapSolution {
    pub fn count(&self) -> usize {
        self.roots.len() + self.unresolved_below
    }
}

fn bisect(mut a: f64, mut b: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    // invariant: f(a) < 0 < f(b)
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 4.0 * f64::EPSILON * m.abs().max(1.0) {
            break;
        }
        if f(m)? < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn golden_min(mut a: f64, mut b: f64, f: &impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..300 {
        if (b - a) <= 2.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Collects the root, checks the tolerance, and extracts `v` and `d`.
fn eigenpair(
    lambda: f64,
    problem: &SecularProblem,
    u: &ExtensionU,
    tol: f64,
) -> Result<NewEigenpair> {
    let sm = secular_matrix_unchecked(lambda, problem, u)?;
    let residual = sm.relative_sigma();
    if !(residual <= tol) {
        return Err(Error::RootValidation {
            lambda,
            reason: format!("sigma_min/sigma_max = {residual:e} exceeds {tol:e}"),
        });
    }
    let v = sm.m.min_right_singular_vector();
    let ipu_adj = Mat2::IDENTITY + u.matrix().adjoint();
    let w = ipu_adj.apply(v);
    if norm2(w) <= RANK_TOLERANCE {
        return Err(Error::RootValidation { lambda, reason: "kernel vector lies in ker(I+U*)".into() });
    }
    let d = normalize(problem.mixing().as_mat2().transpose().apply(w));
    Ok(NewEigenpair { lambda, v, d, residual })
}

/// All new eigenvalues in one Laplace gap.
pub fn find_new_eigenvalues(
    gap: Gap,
    problem: &SecularProblem,
    family: &dyn ExtensionFamily,
    opts: &SolverOptions,
) -> Result<GapSolution> {
    let wrap = |e: Error| Error::InGap { lo: gap.lo, hi: gap.hi, source: Box::new(e) };
    let below_zero = gap.lo == f64::NEG_INFINITY;
    let (dom_lo, dom_hi) = problem.kernel().domain();
    let (a, b) = if below_zero {
        (opts.floor.max(dom_lo), gap.hi - opts.margin)
    } else {
        let m = opts.margin * (gap.hi - gap.lo);
        (gap.lo + m, gap.hi - m)
    };
    if a < dom_lo || b > dom_hi {
        return Err(wrap(Error::OutOfDomain { lambda: if a < dom_lo { a } else { b }, lo: dom_lo, hi: dom_hi }));
    }
    let strategy = match family.constant() {
        Some(u) if opts.strategy == RootStrategy::Monotone
            && problem.imaginary_consistency(0.5 * (a + b)).map_err(wrap)? <= 1e-6 =>
        {
            Some(u)
        }
        _ => None,
    };
    let mut unresolved = 0;
    let mut lambdas = match strategy {
        Some(u) => {
            let mut roots = monotone_roots(a, b, problem, &u).map_err(wrap)?;
            if below_zero {
                let positive = problem
                    .reduced_eigenvalues(a, &u)
                    .map_err(wrap)?
                    .into_iter()
                    .filter(|&e| e > 0.0)
                    .count();
                if positive > 0 {
                    let (deep, left) = deep_roots(problem, &u, opts).map_err(wrap)?;
                    roots.splice(0..0, deep);
                    unresolved = left;
                }
            }
            roots
        }
        None => scan_roots(a, b, problem, family, opts).map_err(wrap)?,
    };
    lambdas.sort_by(f64::total_cmp);
    for w in lambdas.windows(2) {
        if w[1] - w[0] < 1e-9 {
            return Err(wrap(Error::NearDoubleRoot { lo: a, hi: b, first: w[0], second: w[1] }));
        }
    }
    let roots = lambdas
        .into_iter()
        .map(|l| eigenpair(l, problem, &family.extension_at(l), opts.tol))
        .collect::<Result<Vec<_>>>()
        .map_err(wrap)?;
    Ok(GapSolution { gap, roots, unresolved_below: unresolved })
}

fn monotone_roots(a: f64, b: f64, problem: &SecularProblem, u: &ExtensionU) -> Result<Vec<f64>> {
    let ea = problem.reduced_eigenvalues(a, u)?;
    let eb = problem.reduced_eigenvalues(b, u)?;
    let mut roots = Vec::new();
    for k in 0..ea.len() {
        if ea[k] < 0.0 && eb[k] > 0.0 {
            roots.push(bisect(a, b, |x| Ok(problem.reduced_eigenvalues(x, u)?[k]))?);
        }
    }
    Ok(roots)
}

/// Roots between the deep floor and the ordinary floor, and the number still
/// below the deep floor; the ordered eigenvalues tend to `−∞` as `λ → −∞`.
fn deep_roots(problem: &SecularProblem, u: &ExtensionU, opts: &SolverOptions) -> Result<(Vec<f64>, usize)> {
    let geom = *problem.kernel().geometry();
    let cutoff = problem.kernel().cutoff().max(secular_cutoff(opts.deep_floor));
    let deep = SecularProblem::new(&geom, opts.deep_floor, opts.floor, cutoff)?;
    let roots = monotone_roots(opts.deep_floor, opts.floor, &deep, u)?;
    let left = deep.reduced_eigenvalues(opts.deep_floor, u)?.into_iter().filter(|&e| e > 0.0).count();
    Ok((roots, left))
}

fn scan_roots(
    a: f64,
    b: f64,
    problem: &SecularProblem,
    family: &dyn ExtensionFamily,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let rho = |x: f64| -> Result<f64> {
        Ok(secular_matrix_unchecked(x, problem, &family.extension_at(x))?.relative_sigma())
    };
    // Chebyshev-clustered grid resolves minima close to the gap ends
    let n = opts.scan_points.max(8);
    let grid: Vec<f64> = (0..=n)
        .map(|k| {
            let t = 0.5 * (1.0 - (PI * k as f64 / n as f64).cos());
            a + (b - a) * t
        })
        .collect();
    let mut roots = Vec::new();
    scan_cells(&grid, &rho, opts.tol, 0, &mut roots)?;
    Ok(roots)
}

fn scan_cells(
    grid: &[f64],
    rho: &impl Fn(f64) -> Result<f64>,
    tol: f64,
    depth: usize,
    roots: &mut Vec<f64>,
) -> Result<()> {
    let vals = grid.iter().map(|&x| rho(x)).collect::<Result<Vec<_>>>()?;
    for i in 0..vals.len() {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = vals.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if !(vals[i] <= left && vals[i] < right) {
            continue;
        }
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        let (x, fx) = golden_min(lo, hi, rho)?;
        if fx <= tol {
            if roots.iter().all(|&r| (r - x).abs() > 1e-9) {
                roots.push(x);
            }
        } else if fx < 1e-2 && depth < 3 {
            // shallow minimum: resample finely in case two roots share a cell
            let fine: Vec<f64> = (0..=16).map(|k| lo + (hi - lo) * k as f64 / 16.0).collect();
            scan_cells(&fine, rho, tol, depth + 1, roots)?;
        }
    }
    Ok(())
}

/// Eigenvalue kind in a spectrum listing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    New,
    Old,
}

/// One line of a spectrum listing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRecord {
    pub lambda: f64,
    pub kind: EigenKind,
    pub multiplicity: u32,
    /// `[re d1, im d1, re d2, im d2]`; zero for old eigenvalues.
    pub d: [f64; 4],
    pub residual: f64,
}

/// Output of [`spectrum_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub lambda_max: f64,
    pub gaps: Vec<GapSolution>,
    /// `(norm, Laplace multiplicity, multiplicity under U)`.
    pub old: Vec<(f64, u32, u32)>,
    /// Norms where `d − rank(I+U)` was negative and floored at zero.
    pub floored: Vec<f64>,
    /// `(X, N_U(X) − N_Δ(X))` right after every spectral event up to `lambda_max`.
    pub deficit: Vec<(f64, i64)>,
}

impl SpectrumReport {
    pub fn new_eigenvalues(&self) -> impl Iterator<Item = &NewEigenpair> {
        self.gaps.iter().flat_map(|g| g.roots.iter())
    }

    pub fn max_abs_deficit(&self) -> i64 {
        self.deficit.iter().map(|&(_, d)| d.abs()).max().unwrap_or(0)
    }

    pub fn max_per_gap(&self) -> usize {
        self.gaps.iter().map(|g| g.count()).max().unwrap_or(0)
    }

    /// Eigenvalue listing in increasing order, new and old interleaved.
    pub fn records(&self) -> Vec<SpectrumRecord> {
        let mut out: Vec<SpectrumRecord> = self
            .new_eigenvalues()
            .map(|p| SpectrumRecord {
                lambda: p.lambda,
                kind: EigenKind::New,
                multiplicity: 1,
                d: [p.d[0].re, p.d[0].im, p.d[1].re, p.d[1].im],
                residual: p.residual,
            })
            .collect();
        out.extend(self.old.iter().filter(|o| o.2 > 0).map(|&(n, _, m)| SpectrumRecord {
            lambda: n,
            kind: EigenKind::Old,
            multiplicity: m,
            d: [0.0; 4],
            residual: 0.0,
        }));
        out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        out
    }
}

/// Solves every gap below `lambda_max` and tallies the counting function.
pub fn spectrum_scan(
    lambda_max: f64,
    geom: &TorusGeometry,
    family: &dyn ExtensionFamily,
    table: &NormTable,
    opts: &SolverOptions,
) -> Result<SpectrumReport> {
    let top = table.index_above(lambda_max).ok_or(Error::TableTooSmall {
        cutoff: table.cutoff(),
        needed: lambda_max,
    })?;
    let norms: Vec<f64> = table.norms().take(top + 1).collect();
    let hi = norms[top];
    let cutoff = secular_cutoff(hi);
    let problem = SecularProblem::new(geom, opts.floor, hi, cutoff)?;
    spectrum_scan_with(lambda_max, &problem, family, table, opts)
}

/// [`spectrum_scan`] on a prebuilt problem whose domain covers the scan.
pub fn spectrum_scan_with(
    lambda_max: f64,
    problem: &SecularProblem,
    family: &dyn ExtensionFamily,
    table: &NormTable,
    opts: &SolverOptions,
) -> Result<SpectrumReport> {
    let top = table.index_above(lambda_max).ok_or(Error::TableTooSmall {
        cutoff: table.cutoff(),
        needed: lambda_max,
    })?;
    let norms: Vec<f64> = table.norms().take(top + 1).collect();
    let mut gaps = vec![Gap::below_zero()];
    gaps.extend(norms.windows(2).map(|w| Gap { lo: w[0], hi: w[1] }));
    let mut solved = gaps
        .par_iter()
        .map(|&g| find_new_eigenvalues(g, problem, family, opts))
        .collect::<Result<Vec<_>>>()?;
    for s in &mut solved {
        s.roots.retain(|p| p.lambda <= lambda_max);
    }
    solved.retain(|s| s.gap.lo <= lambda_max);

    let mut old = Vec::new();
    let mut floored = Vec::new();
    for (i, &n) in norms.iter().enumerate().filter(|&(_, &n)| n <= lambda_max) {
        let d = table.multiplicities()[i];
        let rank = family.extension_at(n).rank_defect() as u32;
        if d < rank {
            floored.push(n);
        }
        old.push((n, d, d.saturating_sub(rank)));
    }

    // events: new eigenvalues (+1 for N_U) and old shells (+m_U for N_U, +d for N_Δ)
    let mut events: Vec<(f64, i64)> = solved
        .iter()
        .flat_map(|s| s.roots.iter().map(|p| (p.lambda, 1i64)))
        .collect();
    events.extend(old.iter().map(|&(n, d, m)| (n, m as i64 - d as i64)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut running: i64 = solved.first().map_or(0, |s| s.unresolved_below as i64);
    let mut deficit = Vec::with_capacity(events.len());
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            running += events[i].1;
            i += 1;
        }
        deficit.push((x, running));
    }
    Ok(SpectrumReport { lambda_max, gaps: solved, old, floored, deficit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::deficiency_constants;
    use crate::lattice::{sieve_norms, Aspect};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn problem(hi: f64) -> SecularProblem {
        SecularProblem::new(&TorusGeometry::default_square(), -1e4, hi, 1e6).unwrap()
    }

    #[test]
    fn chart_examples() {
        assert_eq!(make_unitary(PI, [0.0, 0.0, 0.0]).rank_defect(), 0);
        assert_eq!(make_unitary(0.0, [0.0, 0.0, 0.0]).rank_defect(), 2);
        let u = make_unitary(0.75 * PI, [0.0, 0.25 * PI, 0.0]);
        assert!((u.matrix() - Mat2::diag(c(-1.0, 0.0), c(0.0, 1.0))).max_abs() < 1e-15);
        assert_eq!(u.rank_defect(), 1);
        let v0 = u.kernel_vector().unwrap();
        assert!((v0[0].norm() - 1.0).abs() < 1e-12 && v0[1].norm() < 1e-12);
    }

    #[test]
    fn presets_have_expected_rank() {
        assert_eq!(Preset::MinusIdentity.extension().rank_defect(), 0);
        assert_eq!(Preset::Rank1Sample.extension().rank_defect(), 1);
        assert_eq!(Preset::Rank2Sample.extension().rank_defect(), 2);
        assert_eq!("rank1-sample".parse::<Preset>().unwrap(), Preset::Rank1Sample);
        assert!("bogus".parse::<Preset>().is_err());
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Mat2::diag(c(2.0, 0.0), c(1.0, 0.0));
        assert!(matches!(ExtensionU::new(m), Err(Error::NotUnitary { .. })));
    }

    proptest! {
        #[test]
        fn chart_is_unitary(phase in -4.0f64..4.0, eta in 0.0f64..1.6, p1 in -4.0f64..4.0, p2 in -4.0f64..4.0) {
            let u = make_unitary(phase, [eta, p1, p2]);
            prop_assert!((u.matrix() * u.matrix().adjoint() - Mat2::IDENTITY).max_abs() < 1e-12);
            // eigen-decomposition reproduces U
            let w = u.eigenbasis();
            let d = Mat2::diag(C64::from_polar(1.0, u.phases()[0]), C64::from_polar(1.0, u.phases()[1]));
            prop_assert!((w * d * w.adjoint() - u.matrix()).max_abs() < 1e-10);
            if let Some(v0) = u.kernel_vector() {
                let r = (Mat2::IDENTITY + u.matrix().adjoint()).apply(v0);
                prop_assert!(norm2(r) < 1e-8);
            }
        }
    }

    #[test]
    fn minus_identity_has_no_new_eigenvalues() {
        let p = problem(60.0);
        let u = Preset::MinusIdentity.extension();
        let t = sieve_norms(60.0, Aspect::SQUARE).unwrap();
        let norms: Vec<f64> = t.norms().collect();
        for w in norms.windows(2) {
            let s = find_new_eigenvalues(Gap::new(w[0], w[1]).unwrap(), &p, &u, &SolverOptions::default()).unwrap();
            assert!(s.roots.is_empty());
            let sm = secular_matrix(0.5 * (w[0] + w[1]), &p, &u).unwrap();
            assert!(sm.relative_sigma() > 0.5);
        }
        let s = find_new_eigenvalues(Gap::below_zero(), &p, &u, &SolverOptions::default()).unwrap();
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn secular_matrix_conjugation_structure() {
        // G_{-i} = conj(G_i): the second term is U T conj(Φ)
        let p = problem(10.0);
        let u = Preset::Rank2Sample.extension();
        let sm = secular_matrix(6.5, &p, &u).unwrap();
        let phi = p.phi(6.5).unwrap();
        let t = p.mixing().as_mat2();
        let a = (t * phi).adjoint();
        let b = (u.matrix() * t * phi.conj()).adjoint();
        assert!((sm.m - a - b).max_abs() < 1e-12 * sm.m.max_abs());
        assert!(p.imaginary_consistency(6.5).unwrap() < 1e-10);
    }

    #[test]
    fn near_singularity_reported() {
        let p = problem(10.0);
        let u = Preset::Rank2Sample.extension();
        let e = secular_matrix(5.0 + 1e-8, &p, &u).unwrap_err();
        assert!(matches!(e, Error::NearSingularity { .. }));
    }

    #[test]
    fn sigma_is_continuous_across_gap() {
        let p = problem(10.0);
        let u = Preset::Rank2Sample.extension();
        let vals: Vec<f64> = (1..400)
            .map(|k| secular_matrix(5.0 + 3.0 * k as f64 / 400.0, &p, &u).unwrap().relative_sigma())
            .collect();
        assert!(vals.iter().all(|&v| v > 0.0 && v.is_finite()));
        for w in vals.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.05);
        }
    }

    #[test]
    fn strategies_agree_and_roots_are_local_minima() {
        let p = problem(60.0);
        let t = sieve_norms(60.0, Aspect::SQUARE).unwrap();
        let norms: Vec<f64> = t.norms().collect();
        for preset in [Preset::Rank1Sample, Preset::Rank2Sample] {
            let u = preset.extension();
            for w in norms.windows(2) {
                let gap = Gap::new(w[0], w[1]).unwrap();
                let mono = find_new_eigenvalues(gap, &p, &u, &SolverOptions::default()).unwrap();
                let scan_opts = SolverOptions { strategy: RootStrategy::SigmaScan, ..Default::default() };
                let scan = find_new_eigenvalues(gap, &p, &u, &scan_opts).unwrap();
                assert!(mono.roots.len() <= u.rank_defect());
                assert_eq!(mono.roots.len(), scan.roots.len(), "{preset} gap {gap:?}");
                for (a, b) in mono.roots.iter().zip(&scan.roots) {
                    assert!((a.lambda - b.lambda).abs() < 1e-6);
                }
                for r in &mono.roots {
                    let h = 10.0 * ROOT_TOLERANCE * (w[1] - w[0]);
                    let at = secular_matrix(r.lambda, &p, &u).unwrap().sigma_min;
                    for x in [r.lambda - h, r.lambda + h] {
                        assert!(secular_matrix(x, &p, &u).unwrap().sigma_min > at);
                    }
                    assert!((norm2(r.d) - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rank_one_kernel_vector_not_in_kernel_of_i_plus_u_adjoint() {
        let p = problem(40.0);
        let u = make_unitary(0.75 * PI, [0.0, 0.25 * PI, 0.0]);
        let mut found = 0;
        let t = sieve_norms(40.0, Aspect::SQUARE).unwrap();
        let norms: Vec<f64> = t.norms().collect();
        for w in norms.windows(2) {
            let s = find_new_eigenvalues(Gap::new(w[0], w[1]).unwrap(), &p, &u, &SolverOptions::default()).unwrap();
            for r in &s.roots {
                let comp = (Mat2::IDENTITY + u.matrix().adjoint()).apply(r.v);
                assert!(norm2(comp) > 1e-6);
                found += 1;
            }
        }
        assert!(found > 5);
    }

    #[test]
    fn varying_family_matches_constant() {
        let p = problem(30.0);
        let u = Preset::Rank2Sample.extension();
        let fam = VaryingExtension(move |_l: f64| u);
        let gap = Gap::new(13.0, 16.0).unwrap();
        let a = find_new_eigenvalues(gap, &p, &u, &SolverOptions::default()).unwrap();
        let b = find_new_eigenvalues(gap, &p, &fam, &SolverOptions::default()).unwrap();
        assert_eq!(a.roots.len(), b.roots.len());
        for (x, y) in a.roots.iter().zip(&b.roots) {
            assert!((x.lambda - y.lambda).abs() < 1e-6);
        }
    }

    #[test]
    fn nearby_extensions_give_nearby_roots() {
        let p = problem(30.0);
        let u = Preset::Rank2Sample.extension();
        let v = u.rephased(1e-11);
        let gap = Gap::new(20.0, 25.0).unwrap();
        let a = find_new_eigenvalues(gap, &p, &u, &SolverOptions::default()).unwrap();
        let b = find_new_eigenvalues(gap, &p, &v, &SolverOptions::default()).unwrap();
        assert_eq!(a.roots.len(), b.roots.len());
        for (x, y) in a.roots.iter().zip(&b.roots) {
            assert!((x.lambda - y.lambda).abs() < 1e-6);
        }
    }

    #[test]
    fn characteristic_matrix_is_unitary() {
        let p = problem(10.0);
        let u = Preset::Rank2Sample.extension();
        let (_, defect) = p.characteristic_matrix(7.3, &u).unwrap();
        assert!(defect < 1e-10);
    }

    #[test]
    fn swap_symmetric_is_unitary() {
        let g = TorusGeometry::new(Aspect::SQUARE, [0.0, 0.0], [PI, PI]).unwrap();
        let c = deficiency_constants(&g, 1e4).unwrap();
        let t = mixing_matrix(&c).unwrap();
        let u = swap_symmetric(0.4, -1.3, &t).unwrap();
        assert_eq!(u.rank_defect(), 2);
    }

    #[test]
    fn counting_deficit_small_scan() {
        let geom = TorusGeometry::default_square();
        let table = sieve_norms(200.0, Aspect::SQUARE).unwrap();
        for preset in Preset::ALL {
            let u = preset.extension();
            let p = SecularProblem::new(&geom, -1e4, 101.0, 1e6).unwrap();
            let r = spectrum_scan_with(100.0, &p, &u, &table, &SolverOptions::default()).unwrap();
            assert!(r.max_abs_deficit() <= u.rank_defect() as i64, "{preset}");
            assert!(r.max_per_gap() <= 2);
            if preset == Preset::MinusIdentity {
                assert_eq!(r.new_eigenvalues().count(), 0);
                assert_eq!(r.max_abs_deficit(), 0);
            }
        }
    }
}
