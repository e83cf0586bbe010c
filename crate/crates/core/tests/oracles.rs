//! Core results against the slow reference implementations.

use std::f64::consts::PI;

use scatter_core::equidist::truncated_state;
use scatter_core::lattice::{annulus_points, sieve_norms};
use scatter_core::scattering::{find_new_eigenvalues, swap_symmetric, Gap, SolverOptions};
use scatter_core::{Aspect, LatticePoint, SecularProblem, TorusGeometry, C64};
use scatter_oracles::{quadrature_matrix_element, r2_table, window_points, HalfPeriodOracle};

#[test]
fn norm_table_matches_box_count() {
    let table = sieve_norms(5000.0, Aspect::SQUARE).unwrap();
    let r2 = r2_table(5000);
    let from_oracle: Vec<(f64, u32)> =
        r2.iter().enumerate().filter(|(_, &r)| r > 0).map(|(n, &r)| (n as f64, r)).collect();
    let from_core: Vec<(f64, u32)> = table.entries().collect();
    assert_eq!(from_core, from_oracle);
}

#[test]
fn annulus_matches_box_search() {
    for (aspect, a_sq) in [(Aspect::SQUARE, 1.0), (Aspect::new(2, 1).unwrap(), 2.0), (Aspect::new(3, 2).unwrap(), 1.5)] {
        for (lambda, l) in [(10.0, 1.5), (100.5, 2.5), (1234.5, 4.2), (0.3, 0.2)] {
            let mut core: Vec<(i64, i64)> = annulus_points(lambda, l, aspect).iter().map(|(p, _)| (p.x, p.y)).collect();
            let mut slow = window_points(a_sq, lambda, l);
            core.sort();
            slow.sort();
            assert_eq!(core, slow, "aspect {a_sq}, lambda {lambda}");
        }
    }
}

#[test]
fn half_period_roots_match_parity_equations() {
    let geom = TorusGeometry::new(Aspect::SQUARE, [0.0, 0.0], [PI, PI]).unwrap();
    let lambda_max = 60.0;
    let table = sieve_norms(200.0, Aspect::SQUARE).unwrap();
    let opts = SolverOptions::default();
    let problem = SecularProblem::new(&geom, opts.floor, 61.0, 1e7).unwrap();
    let (tp, tm) = (1.1, -2.3);
    let u = swap_symmetric(tp, tm, problem.mixing()).unwrap();

    let mut gaps = vec![Gap::below_zero()];
    let norms: Vec<f64> = table.norms().take_while(|&n| n <= lambda_max).collect();
    gaps.extend(norms.windows(2).map(|w| Gap::new(w[0], w[1]).unwrap()));
    let mut core: Vec<f64> = Vec::new();
    for g in gaps {
        let s = find_new_eigenvalues(g, &problem, &u, &opts).unwrap();
        core.extend(s.roots.iter().map(|p| p.lambda).filter(|&l| l >= opts.floor && l <= lambda_max));
    }

    let oracle = HalfPeriodOracle::new(1_000_000);
    let mut slow: Vec<f64> = Vec::new();
    for (parity, theta) in [(0, tp), (1, tm)] {
        slow.extend(oracle.roots(parity, theta, lambda_max, opts.floor).roots);
    }
    slow.sort_by(f64::total_cmp);
    assert!(core.len() > 20);
    assert_eq!(core.len(), slow.len(), "core {core:?}\noracle {slow:?}");
    for (a, b) in core.iter().zip(&slow) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn truncated_elements_match_grid_quadrature() {
    let geom = TorusGeometry::default_square();
    let d = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let (lambda, l) = (100.5, 100.5f64.powf(0.2));
    let state = truncated_state(lambda, d, &geom, l).unwrap();
    assert!(state.window_size() <= 30);
    for z in [(0, 0), (1, 0), (0, 1), (1, 1), (2, -1), (0, 3)] {
        let m = state.matrix_element(LatticePoint::new(z.0, z.1)).value;
        let q = quadrature_matrix_element(1.0, lambda, l, d, geom.x1(), geom.x2(), z, 128);
        assert!((m - q).norm() <= 1e-8 * state.norm_sq, "zeta {z:?}: {m} vs {q}");
    }
}
