//! Structural checks: weak interlacing and the dimensions of the old
//! eigenspaces under a perturbation.

use crate::error::{Error, Result};
use crate::greens::{DeficiencyConstants, MixingMatrix, TorusGeometry, KAPPA};
use crate::lattice::{shell_points, LatticePoint, NormTable};
use crate::linalg::{hermitian_eigen, Mat2, C64};
use crate::scattering::ExtensionU;

/// Outcome of a merge scan of two sorted sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct InterlaceReport {
    pub disjoint: bool,
    /// Longest run of elements of `A` strictly between consecutive elements of `B`.
    pub max_run_a_between_b: usize,
    pub max_run_b_between_a: usize,
    /// The consecutive pair of `B` enclosing the longest `A` run.
    pub witness_a: Option<(f64, f64)>,
    pub witness_b: Option<(f64, f64)>,
    /// A value found in both sequences, when they intersect.
    pub common: Option<f64>,
    pub holds: bool,
}

fn check_sorted(xs: &[f64]) -> Result<()> {
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::Precondition(format!("non-finite entry at index {i}")));
    }
    match xs.windows(2).position(|w| w[0] > w[1]) {
        Some(i) => Err(Error::Unsorted { index: i + 1 }),
        None => Ok(()),
    }
}

/// Longest run of `inner` elements strictly between consecutive `outer` ones.
fn longest_run(inner: &[f64], outer: &[f64]) -> (usize, Option<(f64, f64)>) {
    let mut best = (0, None);
    for w in outer.windows(2) {
        let lo = inner.partition_point(|&x| x <= w[0]);
        let hi = inner.partition_point(|&x| x < w[1]);
        let run = hi.saturating_sub(lo);
        if run > best.0 {
            best = (run, Some((w[0], w[1])));
        }
    }
    best
}

/// `A` and `B` weakly interlace with constant `C`: they are disjoint and
/// between two consecutive elements of either lie at most `C` of the other.
pub fn weak_interlacing(a: &[f64], b: &[f64], c: usize) -> Result<InterlaceReport> {
    check_sorted(a)?;
    check_sorted(b)?;
    let common = a.iter().copied().find(|x| b.binary_search_by(|y| y.total_cmp(x)).is_ok());
    let (ra, wa) = longest_run(a, b);
    let (rb, wb) = longest_run(b, a);
    let disjoint = common.is_none();
    Ok(InterlaceReport {
        disjoint,
        max_run_a_between_b: ra,
        max_run_b_between_a: rb,
        witness_a: wa,
        witness_b: wb,
        common,
        holds: disjoint && ra <= c && rb <= c,
    })
}

/// Singular-value threshold, relative to the largest, for numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Shells whose evaluation matrix is worse conditioned than this are flagged.
pub const CONDITION_FLAG: f64 = 1e6;

/// Rank data of the map `f ↦ (f(x1), f(x2))` on one Laplace eigenspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellRank {
    pub norm: f64,
    pub dimension: usize,
    pub rank: usize,
    /// `σ_max / σ_min` of the `2×d` evaluation matrix.
    pub condition: f64,
    pub ill_conditioned: bool,
}

impl ShellRank {
    pub fn vanishing_dimension(&self) -> usize {
        self.dimension - self.rank
    }
}

/// Numerical rank of a `2×m` matrix given by its Gram matrix `E E†`.
fn rank_from_gram(g: Mat2) -> (usize, f64) {
    let e = hermitian_eigen(g);
    let smax = e.values[1].max(0.0).sqrt();
    let smin = e.values[0].max(0.0).sqrt();
    if smax == 0.0 {
        return (0, f64::INFINITY);
    }
    let rank = if smin > RANK_THRESHOLD * smax { 2 } else { 1 };
    (rank, smax / smin)
}

fn evaluation_gram(columns: impl Iterator<Item = [C64; 2]>) -> Mat2 {
    let mut g = Mat2::ZERO;
    for col in columns {
        for i in 0..2 {
            for j in 0..2 {
                g.0[i][j] += col[i] * col[j].conj();
            }
        }
    }
    g
}

fn shell_of(key: u64, geom: &TorusGeometry) -> Result<Vec<LatticePoint>> {
    let pts = shell_points(geom.aspect(), key);
    if pts.is_empty() {
        return Err(Error::Precondition(format!("key {key} is not a Laplace eigenvalue")));
    }
    Ok(pts)
}

fn evaluation_column(pt: LatticePoint, geom: &TorusGeometry) -> [C64; 2] {
    let a = geom.aspect();
    [C64::from_polar(1.0, a.phase(pt, geom.x1())), C64::from_polar(1.0, a.phase(pt, geom.x2()))]
}

/// Rank of the evaluation matrix with rows `(e^{i⟨ξ,x_j⟩})_ξ` over the shell
/// with exact key `key` (the norm itself on the square torus).
pub fn shell_evaluation_rank(key: u64, geom: &TorusGeometry) -> Result<ShellRank> {
    let pts = shell_of(key, geom)?;
    let g = evaluation_gram(pts.iter().map(|&p| evaluation_column(p, geom)));
    let (rank, condition) = rank_from_gram(g);
    Ok(ShellRank {
        norm: geom.aspect().key_to_norm(key),
        dimension: pts.len(),
        rank,
        condition,
        ill_conditioned: condition > CONDITION_FLAG,
    })
}

/// Explicit basis of `{f ∈ E : f(x1) = f(x2) = 0}` as coefficient vectors on
/// the shell points, for `f = Σ_ζ a_ζ e^{i⟨x − x1, ζ⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VanishingBasis {
    pub points: Vec<LatticePoint>,
    pub vectors: Vec<Vec<C64>>,
    /// The pivot was reflected in the second coordinate because the first
    /// offered no nonzero `sin`.
    pub swapped: bool,
}

/// Pivot `ξ` with a reflected partner `η`, then
/// `e_ζ − e_ξ − (g/g(x2))·(e^{i⟨x0,ζ⟩} − e^{i⟨x0,ξ⟩})` for every other `ζ`,
/// where `g = e_η − e_ξ`.
pub fn vanishing_basis(key: u64, geom: &TorusGeometry) -> Result<VanishingBasis> {
    let pts = shell_of(key, geom)?;
    let a = geom.aspect();
    let x0 = geom.x0();
    let at_x2 = |p: LatticePoint| C64::from_polar(1.0, a.phase(p, x0));
    let pick = |coord: usize| -> Option<(usize, usize, f64)> {
        pts.iter()
            .enumerate()
            .filter(|(_, p)| if coord == 0 { p.x != 0 } else { p.y != 0 })
            .filter_map(|(i, &p)| {
                let q = if coord == 0 { LatticePoint::new(-p.x, p.y) } else { LatticePoint::new(p.x, -p.y) };
                let j = pts.iter().position(|&r| r == q)?;
                Some((i, j, (at_x2(q) - at_x2(p)).norm()))
            })
            .max_by(|u, v| u.2.total_cmp(&v.2))
    };
    let (pivot, swapped) = match pick(0) {
        Some(c) if c.2 > 1e-8 => (c, false),
        _ => match pick(1) {
            Some(c) if c.2 > 1e-8 => (c, true),
            _ => {
                return Err(Error::Precondition(format!(
                    "no reflection pair separates the scatterers on shell {key}"
                )))
            }
        },
    };
    let (xi, eta, _) = pivot;
    let gx2 = at_x2(pts[eta]) - at_x2(pts[xi]);
    let mut vectors = Vec::new();
    for z in (0..pts.len()).filter(|&z| z != xi && z != eta) {
        let s = (at_x2(pts[z]) - at_x2(pts[xi])) / gx2;
        let mut v = vec![C64::new(0.0, 0.0); pts.len()];
        v[z] += 1.0;
        v[xi] -= 1.0;
        v[eta] -= s;
        v[xi] += s;
        vectors.push(v);
    }
    Ok(VanishingBasis { points: pts, vectors, swapped })
}

/// Values `(h(x1), h(x2))` of `h = ⟨u, Im G_i(·)⟩` with `u = Tᵀ v0`, from
/// `Im G_i(x_j, x_j) = −4π²c1` and `Im G_i(x1, x2) = −4π²c2`.
pub fn im_gi_values(v0: [C64; 2], t: &MixingMatrix, c: &DeficiencyConstants) -> [C64; 2] {
    let u = im_gi_weights(v0, t);
    [
        -(u[0] * c.c1 + u[1] * c.c2) * KAPPA,
        -(u[0] * c.c2 + u[1] * c.c1) * KAPPA,
    ]
}

/// `T† v0`, the weights of `h` on `(G_i(·,x1), G_i(·,x2))`.
pub fn im_gi_weights(v0: [C64; 2], t: &MixingMatrix) -> [C64; 2] {
    t.as_mat2().transpose().apply(v0)
}

/// Dimension of the eigenspace of `−Δ_U` at the Laplace eigenvalue with key
/// `key`, through evaluation-matrix ranks.
pub fn old_multiplicity(
    key: u64,
    geom: &TorusGeometry,
    u: &ExtensionU,
    t: &MixingMatrix,
    c: &DeficiencyConstants,
) -> Result<usize> {
    if key == 0 {
        return Err(Error::Precondition("old multiplicity is defined for nonzero eigenvalues".into()));
    }
    let pts = shell_of(key, geom)?;
    let d = pts.len();
    let cols = pts.iter().map(|&p| evaluation_column(p, geom));
    Ok(match u.rank_defect() {
        0 => d,
        2 => d - rank_from_gram(evaluation_gram(cols)).0,
        _ => {
            let v0 = u.kernel_vector().expect("rank-one extension has a kernel vector");
            let h = im_gi_values(v0, t, c);
            let (rank, _) = rank_from_gram(evaluation_gram(cols.chain(std::iter::once(h))));
            d + 1 - rank
        }
    })
}

/// Witness that `h` is not a Laplace eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    pub holds: bool,
    /// Norms `<= max_norm` on which the weights do not vanish identically.
    pub supporting_shells: Vec<f64>,
    /// Count of individual lattice points where the weight vanishes.
    pub vanishing_points: usize,
}

/// Checks that `w1 e^{−i⟨ξ,x1⟩} + w2 e^{−i⟨ξ,x2⟩}` is not identically zero on
/// at least two shells with norm `<= max_norm`. An eigenfunction lives on a
/// single shell, so two supporting shells certify the claim.
pub fn im_gi_nondegeneracy(
    weights: [C64; 2],
    geom: &TorusGeometry,
    table: &NormTable,
    max_norm: f64,
) -> Result<NondegeneracyReport> {
    if table.cutoff() < max_norm {
        return Err(Error::TableTooSmall { cutoff: table.cutoff(), needed: max_norm });
    }
    let a = geom.aspect();
    let mut supporting = Vec::new();
    let mut vanishing = 0;
    let scale = weights[0].norm().max(weights[1].norm());
    for (i, &key) in table.keys().iter().enumerate() {
        if table.norm(i) > max_norm {
            break;
        }
        let mut any = false;
        for p in shell_points(a, key) {
            let w = weights[0] * C64::from_polar(1.0, -a.phase(p, geom.x1()))
                + weights[1] * C64::from_polar(1.0, -a.phase(p, geom.x2()));
            if w.norm() > 1e-10 * scale {
                any = true;
            } else {
                vanishing += 1;
            }
        }
        if any {
            supporting.push(table.norm(i));
        }
    }
    Ok(NondegeneracyReport { holds: supporting.len() >= 2, supporting_shells: supporting, vanishing_points: vanishing })
}

/// One named verification outcome with printable witness data.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub witness: Vec<(String, String)>,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), passed, witness: Vec::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.witness.push((key.into(), value.to_string()));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{deficiency_constants, mixing_matrix};
    use crate::lattice::{sieve_norms, Aspect};
    use crate::scattering::{make_unitary, Preset};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn interlacing_examples() {
        assert!(weak_interlacing(&[1., 3., 5.], &[2., 4., 6.], 1).unwrap().holds);
        let r = weak_interlacing(&[1., 2.], &[2., 3.], 5).unwrap();
        assert!(!r.disjoint && !r.holds);
        assert_eq!(r.common, Some(2.0));
        let r = weak_interlacing(&[1., 10.], &[2., 3., 4.], 2).unwrap();
        assert!(!r.holds);
        assert_eq!(r.max_run_b_between_a, 3);
        assert_eq!(r.witness_b, Some((1.0, 10.0)));
        assert!(matches!(weak_interlacing(&[2., 1.], &[3.], 1), Err(Error::Unsorted { index: 1 })));
    }

    proptest! {
        #[test]
        fn interlacing_matches_naive_scan(
            mut a in proptest::collection::vec(0u32..200, 0..30),
            mut b in proptest::collection::vec(0u32..200, 0..30),
            c in 1usize..4,
        ) {
            a.sort(); a.dedup(); b.sort(); b.dedup();
            let af: Vec<f64> = a.iter().map(|&x| x as f64).collect();
            let bf: Vec<f64> = b.iter().map(|&x| x as f64).collect();
            let r = weak_interlacing(&af, &bf, c).unwrap();
            let disjoint = a.iter().all(|x| !b.contains(x));
            let run = |p: &[u32], q: &[u32]| q.windows(2)
                .map(|w| p.iter().filter(|&&x| x > w[0] && x < w[1]).count())
                .max().unwrap_or(0);
            prop_assert_eq!(r.disjoint, disjoint);
            prop_assert_eq!(r.max_run_a_between_b, run(&a, &b));
            prop_assert_eq!(r.max_run_b_between_a, run(&b, &a));
            prop_assert_eq!(r.holds, disjoint && run(&a, &b) <= c && run(&b, &a) <= c);
        }

        #[test]
        fn rank_invariant_under_common_translation(t1 in 0.0f64..6.0, t2 in 0.0f64..6.0) {
            let g = TorusGeometry::default_square();
            let moved = TorusGeometry::new(
                Aspect::SQUARE,
                [g.x1()[0] + t1, g.x1()[1] + t2],
                [g.x2()[0] + t1, g.x2()[1] + t2],
            ).unwrap();
            for n in [1u64, 2, 5, 25, 65] {
                prop_assert_eq!(shell_evaluation_rank(n, &g).unwrap().rank, shell_evaluation_rank(n, &moved).unwrap().rank);
            }
        }
    }

    #[test]
    fn generic_geometry_has_full_rank() {
        let g = TorusGeometry::default_square();
        let r = shell_evaluation_rank(1, &g).unwrap();
        assert_eq!((r.dimension, r.rank, r.vanishing_dimension()), (4, 2, 2));
        assert!(shell_evaluation_rank(3, &g).is_err());
    }

    #[test]
    fn coincident_points_give_rank_one() {
        let g = TorusGeometry::unchecked(Aspect::SQUARE, [0.3, 0.3], [0.3, 0.3]);
        assert_eq!(shell_evaluation_rank(5, &g).unwrap().rank, 1);
    }

    #[test]
    fn vanishing_basis_vanishes_and_is_independent() {
        let g = TorusGeometry::default_square();
        for n in [1u64, 2, 5, 25, 65, 325] {
            let b = vanishing_basis(n, &g).unwrap();
            let d = b.points.len();
            assert_eq!(b.vectors.len(), d - 2);
            assert!(!b.swapped);
            for v in &b.vectors {
                let f1: C64 = v.iter().sum();
                let f2: C64 = v
                    .iter()
                    .zip(&b.points)
                    .map(|(c, &p)| c * C64::from_polar(1.0, g.aspect().phase(p, g.x0())))
                    .sum();
                assert!(f1.norm() < 1e-12 && f2.norm() < 1e-12);
            }
            // each vector has a unit entry at its own ζ and zero at the other ζ's
            for (k, v) in b.vectors.iter().enumerate() {
                let own = v.iter().filter(|c| (c.norm() - 1.0).abs() < 1e-12).count();
                assert!(own >= 1, "vector {k}");
            }
        }
    }

    #[test]
    fn vanishing_basis_swaps_when_first_coordinate_is_rational() {
        let g = TorusGeometry::new(Aspect::SQUARE, [0.0, 0.0], [PI, PI * (2f64.sqrt() - 1.0)]).unwrap();
        let b = vanishing_basis(5, &g).unwrap();
        assert!(b.swapped);
        for v in &b.vectors {
            let f2: C64 = v
                .iter()
                .zip(&b.points)
                .map(|(c, &p)| c * C64::from_polar(1.0, g.aspect().phase(p, g.x0())))
                .sum();
            assert!(f2.norm() < 1e-12);
        }
    }

    #[test]
    fn old_multiplicity_examples() {
        let g = TorusGeometry::default_square();
        let c = deficiency_constants(&g, 1e5).unwrap();
        let t = mixing_matrix(&c).unwrap();
        let m = |u: &ExtensionU, n| old_multiplicity(n, &g, u, &t, &c).unwrap();
        assert_eq!(m(&Preset::MinusIdentity.extension(), 1), 4);
        assert_eq!(m(&Preset::Rank2Sample.extension(), 1), 2);
        assert_eq!(m(&Preset::Rank1Sample.extension(), 1), 3);
        let diag = make_unitary(0.75 * PI, [0.0, 0.25 * PI, 0.0]);
        assert_eq!(m(&diag, 5), 7);
    }

    #[test]
    fn nondegeneracy_examples() {
        let table = sieve_norms(50.0, Aspect::SQUARE).unwrap();
        let g = TorusGeometry::default_square();
        let one = C64::from(1.0);
        let zero = C64::from(0.0);
        let r = im_gi_nondegeneracy([one, zero], &g, &table, 50.0).unwrap();
        assert!(r.holds && r.vanishing_points == 0);
        let r = im_gi_nondegeneracy([one, -one], &g, &table, 50.0).unwrap();
        assert!(r.holds);
        assert!(r.supporting_shells.contains(&1.0) && r.supporting_shells.contains(&2.0));
        let half = TorusGeometry::new(Aspect::SQUARE, [0.0, 0.0], [PI, PI]).unwrap();
        let r = im_gi_nondegeneracy([one, one], &half, &table, 50.0).unwrap();
        assert!(r.holds);
        assert!(r.vanishing_points > 0);
        assert!(!r.supporting_shells.contains(&1.0) && r.supporting_shells.contains(&2.0));
    }
}
