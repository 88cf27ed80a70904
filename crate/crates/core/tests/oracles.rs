//! Cross-checks against independent reference computations.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use widom_core::equilibrium::{solve_real_equilibrium, solve_symm, Equilibrium};
use widom_core::geometry::{build_cantor, AffineMap, CantorSpec, DiscretizedCurve, RealIntervalUnion, SOLVER_GRADING};
use widom_core::harness::{run_series, SeriesOptions, SeriesSet};
use widom_core::levin::build_levin;
use widom_core::minimax::{solve_complex_monic, solve_real_monic, SolverOptions};

/// Piecewise-constant charge collocation: `panels` equal panels per interval,
/// exact panel integrals of `log|x − t|`, one collocation point per panel,
/// plus the unit-mass row. Returns the capacity.
fn panel_capacity(k: &RealIntervalUnion, panels: usize) -> f64 {
    let edges: Vec<(f64, f64)> = k
        .intervals()
        .iter()
        .flat_map(|&(a, b)| {
            let h = (b - a) / panels as f64;
            (0..panels).map(move |j| (a + j as f64 * h, a + (j + 1) as f64 * h))
        })
        .collect();
    let m = edges.len();
    // ∫_a^b log|x − t| dt
    let prim = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
    let panel = |x: f64, (a, b): (f64, f64)| (prim(x - a) - prim(x - b)) / (b - a);
    let mut mat = nalgebra::DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut rhs = nalgebra::DVector::<f64>::zeros(m + 1);
    for i in 0..m {
        let x = 0.5 * (edges[i].0 + edges[i].1);
        for j in 0..m {
            mat[(i, j)] = panel(x, edges[j]);
        }
        mat[(i, m)] = 1.0;
    }
    for j in 0..m {
        mat[(m, j)] = 1.0;
    }
    rhs[m] = 1.0;
    let sol = mat.lu().solve(&rhs).unwrap();
    // U(x) = ∫ log|x − t| dμ = −γ on K, so γ = sol[m]
    (-sol[m]).exp()
}

#[test]
fn cantor_capacity_matches_panel_collocation() {
    let k = build_cantor(&CantorSpec::middle_third(2)).unwrap();
    let cap = solve_real_equilibrium(&k, 64).unwrap().capacity();
    let coarse = panel_capacity(&k, 100);
    let fine = panel_capacity(&k, 400);
    // the panel method converges slowly at the endpoints; compare with its
    // last-step difference as the error scale
    let err = (fine - coarse).abs();
    assert!((cap - fine).abs() < 2.0 * err.max(1e-6), "{cap} {coarse} {fine}");
}

/// Greedy Leja points on a fine grid; `Π|x_i − x_j|^{2/(N(N−1))}` tends to
/// the capacity from above.
fn leja_diameter(k: &RealIntervalUnion, count: usize) -> f64 {
    let grid: Vec<f64> = k
        .intervals()
        .iter()
        .flat_map(|&(a, b)| (0..=2000).map(move |j| a + (b - a) * 0.5 * (1.0 - (PI * j as f64 / 2000.0).cos())))
        .collect();
    let mut pts = vec![grid[0]];
    let mut logprod = vec![0.0; grid.len()];
    for _ in 1..count {
        let last = *pts.last().unwrap();
        for (lp, &x) in logprod.iter_mut().zip(&grid) {
            *lp += (x - last).abs().ln();
        }
        let (j, _) = logprod.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        pts.push(grid[j]);
    }
    let mut s = 0.0;
    for i in 0..count {
        for j in 0..i {
            s += (pts[i] - pts[j]).abs().ln();
        }
    }
    (2.0 * s / (count * (count - 1)) as f64).exp()
}

#[test]
fn capacity_bounded_by_leja_diameter() {
    for k in [
        RealIntervalUnion::new(vec![(-1.0, -0.3), (0.1, 1.0)]).unwrap(),
        build_cantor(&CantorSpec::middle_third(3)).unwrap(),
    ] {
        let cap = solve_real_equilibrium(&k, 64).unwrap().capacity();
        let d = leja_diameter(&k, 120);
        assert!(d >= cap && d < 1.1 * cap, "{cap} {d}");
    }
}

#[test]
fn square_quartic_against_grid_search() {
    // by the four-fold symmetry of the square T_4(z) = z⁴ + c with c real
    let sq: Vec<Complex64> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(x, y)| Complex64::new(x, y))
        .collect();
    let edge: Vec<Complex64> = (0..=4000).map(|j| Complex64::new(1.0, -1.0 + 2.0 * j as f64 / 4000.0)).collect();
    let norm = |c: f64| edge.iter().map(|z| (z.powi(4) + c).norm()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-4.0, 4.0);
    for _ in 0..200 {
        let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if norm(a) < norm(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let best = norm(0.5 * (lo + hi));
    let curve = DiscretizedCurve::polygon(&sq, 256, SOLVER_GRADING).unwrap();
    let t = solve_complex_monic(&[curve], 4, &SolverOptions::default()).unwrap();
    assert!(t.norm_lo <= best * (1.0 + 1e-6) && t.norm_hi >= best * (1.0 - 1e-6), "{best} {t:?}");
    assert!(((t.norm_hi - best) / best).abs() < 1e-4);
}

#[test]
fn composition_oracle_for_two_intervals() {
    // K = P^{-1}([−1,1]) with P(x) = (2x² − 1 − a²)/(1 − a²); T_{2m} is the
    // monic multiple of T_m ∘ P
    let a: f64 = 0.3;
    let k = RealIntervalUnion::new(vec![(-1.0, -a), (a, 1.0)]).unwrap();
    for m in [1usize, 3, 6] {
        let t = solve_real_monic(&k, 2 * m, &SolverOptions::default()).unwrap();
        let want = 2f64.powi(1 - m as i32) * ((1.0 - a * a) / 2.0).powi(m as i32);
        assert!((t.norm_hi - want).abs() < 1e-10 * want, "{m} {} {want}", t.norm_hi);
    }
}

#[test]
fn series_respects_floor_and_finite_gap_ceiling() {
    // 1 ≤ t_n ≤ 2 e^{V(K)} for finite unions of intervals
    let k = build_cantor(&CantorSpec::middle_third(3)).unwrap().normalize().unwrap().0;
    let v = build_levin(&solve_real_equilibrium(&k, 64).unwrap()).unwrap().v_total;
    let n: Vec<usize> = (1..=40).collect();
    let opts = SeriesOptions { parallel: true, ..Default::default() };
    let s = run_series("cantor", &SeriesSet::Real(k), &n, &opts).unwrap();
    for r in &s.rows {
        assert!(r.t_lo >= 1.0 - 1e-6 && r.t_hi >= r.t_lo);
        assert!(r.t_hi <= 2.0 * v.exp() * (1.0 + 1e-9), "{} {}", r.n, r.t_hi);
    }
}

#[test]
fn curve_and_interval_pipelines_agree_on_mixed_arcs() {
    let k = RealIntervalUnion::new(vec![(-1.0, -0.2), (0.4, 1.0)]).unwrap();
    let arcs: Vec<DiscretizedCurve> = k
        .intervals()
        .iter()
        .map(|&(a, b)| DiscretizedCurve::segment_arc(a.into(), b.into(), 128).unwrap())
        .collect();
    let c1 = solve_real_equilibrium(&k, 64).unwrap().capacity();
    let c2 = solve_symm(&arcs).unwrap().capacity();
    assert!((c1 - c2).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn series_is_affine_invariant(scale in 0.2f64..5.0, shift in -3.0f64..3.0, n in 2usize..12) {
        let k = RealIntervalUnion::new(vec![(-1.0, -0.4), (0.1, 0.3), (0.6, 1.0)]).unwrap();
        let k2 = k.affine_image(AffineMap { scale, shift }).unwrap();
        let opts = SeriesOptions::default();
        let degrees: Vec<usize> = (1..=n).collect();
        let a = run_series("k", &SeriesSet::Real(k), &degrees, &opts).unwrap();
        let b = run_series("k2", &SeriesSet::Real(k2), &degrees, &opts).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!(((x.t_hi - y.t_hi) / x.t_hi).abs() < 1e-5);
        }
    }

    #[test]
    fn green_is_zero_on_set_and_positive_off(x in -2.0f64..2.0, y in 0.0f64..1.0) {
        let k = RealIntervalUnion::new(vec![(-1.0, -0.4), (0.1, 1.0)]).unwrap();
        let eq = solve_real_equilibrium(&k, 64).unwrap();
        let z = Complex64::new(x, y);
        let g = eq.green(z);
        if y == 0.0 && k.contains(x) {
            prop_assert!(g.abs() < 1e-12);
        } else if eq.distance(z) > 1e-6 {
            prop_assert!(g > 0.0);
        }
    }
}
