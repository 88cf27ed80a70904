//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use widom_core::diagnostics::{holder_fit, holder_probes_curves, holder_probes_real, lemma31_integral, LevelShape};
use widom_core::equilibrium::{solve_real_equilibrium, solve_symm, BoundaryDensity, Equilibrium, EquilibriumReal};
use widom_core::geometry::{build_cantor, AffineMap, CantorSpec, DiscretizedCurve, RealIntervalUnion, SOLVER_GRADING};
use widom_core::harness::{fit_growth, DEFAULT_FIT_WINDOW, run_series, verify_bound_49, GrowthModel, SeriesOptions, SeriesResult, SeriesSet};
use widom_core::levin::{build_levin, crosscut_ratios, sublevel_truncate};
use widom_core::numeric::linear_fit;

const QUAD: usize = 64;

/// Every equilibrium solved below: (label, mass error, potential defect, curve?).
static AUDIT: Mutex<Vec<(String, f64, f64, bool)>> = Mutex::new(Vec::new());

fn real_eq(label: &str, k: &RealIntervalUnion) -> EquilibriumReal {
    let eq = solve_real_equilibrium(k, QUAD).expect("real equilibrium");
    let defect = eq.frostman_error().max(eq.frostman_check(16));
    AUDIT.lock().unwrap().push((label.to_string(), eq.mass_error(), defect, false));
    eq
}

fn curve_eq(label: &str, c: &[DiscretizedCurve]) -> BoundaryDensity {
    let bd = solve_symm(c).expect("curve equilibrium");
    AUDIT.lock().unwrap().push((label.to_string(), bd.mass_error(), bd.frostman_check(16), true));
    bd
}

fn series(label: &str, set: SeriesSet, n: &[usize]) -> SeriesResult {
    match &set {
        SeriesSet::Real(k) => {
            real_eq(label, k);
        }
        SeriesSet::Curves(c) => {
            curve_eq(label, c);
        }
    }
    let opts = SeriesOptions { parallel: true, ..Default::default() };
    run_series(label, &set, n, &opts).expect("series")
}

fn all_ok(s: &SeriesResult) -> Result<(), String> {
    match s.rows.iter().find(|r| !r.is_ok()) {
        Some(r) => Err(format!("row n={} failed: {:?}", r.n, r.status)),
        None => Ok(()),
    }
}

fn two_interval(a: f64) -> RealIntervalUnion {
    RealIntervalUnion::new(vec![(-1.0, -a), (a, 1.0)]).unwrap()
}

fn cantor(depth: u32) -> RealIntervalUnion {
    build_cantor(&CantorSpec::middle_third(depth)).unwrap().normalize().unwrap().0
}

fn circle(center: Complex64, r: f64) -> DiscretizedCurve {
    DiscretizedCurve::disk(center, r, 128).unwrap()
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn timed(limit: Duration, start: Instant) -> Result<String, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {:.1}s, limit {:.0}s", t.as_secs_f64(), limit.as_secs_f64()))
    } else {
        Ok(format!("{:.1}s", t.as_secs_f64()))
    }
}

fn interval_baseline() -> Outcome {
    let start = Instant::now();
    let k = RealIntervalUnion::single(-1.0, 1.0).unwrap();
    let n: Vec<usize> = (1..=30).collect();
    let s = series("segment", SeriesSet::Real(k), &n);
    all_ok(&s)?;
    // ‖T_n‖ = 2^{1−n} and κ = 1/2
    let worst = s.rows.iter().map(|r| (r.t_hi - 2.0).abs().max((r.t_lo - 2.0).abs())).fold(0.0, f64::max);
    let time = timed(Duration::from_secs(30), start)?;
    if worst > 1e-6 {
        return Err(format!("max |t - 2| = {worst:.3e}"));
    }
    Ok(format!("max |t - 2| = {worst:.2e}, {time}"))
}

fn circle_baseline() -> Outcome {
    let start = Instant::now();
    let n: Vec<usize> = (1..=20).collect();
    let s = series("circle", SeriesSet::Curves(vec![circle(0.0.into(), 1.0)]), &n);
    all_ok(&s)?;
    let worst = s.rows.iter().map(|r| (r.t_hi - 1.0).abs().max((r.t_lo - 1.0).abs())).fold(0.0, f64::max);
    let time = timed(Duration::from_secs(60), start)?;
    if worst > 1e-6 {
        return Err(format!("max |t - 1| = {worst:.3e}"));
    }
    Ok(format!("max |t - 1| = {worst:.2e}, {time}"))
}

fn capacity_exactness() -> Outcome {
    let mut worst_two: f64 = 0.0;
    for a in [0.2, 0.5, 0.8] {
        let eq = real_eq(&format!("two-interval a={a}"), &two_interval(a));
        worst_two = worst_two.max((eq.capacity() - (1.0 - a * a).sqrt() / 2.0).abs());
    }
    let sq: Vec<Complex64> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(x, y)| Complex64::new(x, y))
        .collect();
    let square = DiscretizedCurve::polygon(&sq, 256, SOLVER_GRADING).unwrap();
    let sq_err = (curve_eq("square", &[square]).capacity() - 1.1803406).abs();
    let circ_err = (curve_eq("circle r=2", &[circle(0.0.into(), 2.0)]).capacity() - 2.0).abs();
    let msg = format!("two-interval {worst_two:.1e}, square {sq_err:.1e}, circle {circ_err:.1e}");
    if worst_two <= 1e-8 && sq_err <= 1e-5 && circ_err <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Monic `T_m(P(x))` with `P(x) = (2x² − 1 − a²)/(1 − a²)` sampled on a fine
/// grid of `K`: its sup norm is the composition prediction for `‖T_{2m}‖`.
fn composition_norm(a: f64, m: usize) -> f64 {
    let lead = 2f64.powi(m as i32 - 1) * (2.0 / (1.0 - a * a)).powi(m as i32);
    let mut best: f64 = 0.0;
    let pts = 20_000;
    for j in 0..=pts {
        let x = a + (1.0 - a) * j as f64 / pts as f64;
        let p = (2.0 * x * x - 1.0 - a * a) / (1.0 - a * a);
        let t = (m as f64 * p.clamp(-1.0, 1.0).acos()).cos();
        best = best.max(t.abs());
    }
    best / lead
}

fn two_interval_series() -> &'static SeriesResult {
    static CELL: std::sync::OnceLock<SeriesResult> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let n: Vec<usize> = (1..=60).collect();
        series("two-interval a=0.5", SeriesSet::Real(two_interval(0.5)), &n)
    })
}

fn bounded_two_interval() -> Outcome {
    let a: f64 = 0.5;
    let s = two_interval_series();
    all_ok(s)?;
    let kappa = (1.0 - a * a).sqrt() / 2.0;
    let mut worst: f64 = 0.0;
    for m in 1..=12 {
        let oracle = composition_norm(a, m) / kappa.powi(2 * m as i32);
        if (oracle - 2.0).abs() > 1e-6 {
            return Err(format!("composition oracle gives {oracle} at m={m}"));
        }
        let r = &s.rows[2 * m - 1];
        worst = worst.max((r.t_hi - oracle).abs()).max((r.t_lo - oracle).abs());
    }
    let fit = fit_growth(s, DEFAULT_FIT_WINDOW).map_err(|e| e.to_string())?;
    let from_one = fit_growth(s, 1).map_err(|e| e.to_string())?.logarithmic.1;
    let sup = s.rows.iter().map(|r| r.t_hi).fold(0.0, f64::max);
    let b = fit.logarithmic.1;
    let msg = format!(
        "even-row error {worst:.1e}, log slope {b:.4} (n >= {DEFAULT_FIT_WINDOW}; {from_one:.4} from n = 1), model {:?}, sup t {sup:.4}",
        fit.model
    );
    if worst <= 1e-5 && b.abs() <= 0.05 && fit.model == GrowthModel::Constant && sup <= 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn cantor_power() -> Outcome {
    let start = Instant::now();
    let n: Vec<usize> = (8..=96).collect();
    let s = series("cantor depth 4", SeriesSet::Real(cantor(4)), &n);
    all_ok(&s)?;
    let fit = fit_growth(&s, DEFAULT_FIT_WINDOW).map_err(|e| e.to_string())?;
    let time = timed(Duration::from_secs(600), start)?;
    let c = fit.power.0;
    let rel = fit.residuals[2] / fit.mean_t;
    let lo = s.rows.iter().map(|r| r.t_hi).fold(f64::INFINITY, f64::min);
    let hi = s.rows.iter().map(|r| r.t_hi).fold(0.0, f64::max);
    let msg = format!(
        "model {:?}, c = {c:.4}, power residual {:.2}% of mean t, residuals {:.4?}, t in [{lo:.3}, {hi:.3}], {time}",
        fit.model,
        100.0 * rel,
        fit.residuals
    );
    if fit.model == GrowthModel::Power && c > 0.0 && c < 2.0 && rel < 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sublevel_pipeline() -> Outcome {
    let k = cantor(3);
    let eq = real_eq("cantor depth 3", &k);
    let kappa = eq.capacity();
    let mut worst: f64 = 0.0;
    for n in [5usize, 10, 20] {
        let s = 1.0 / n as f64;
        let ks = sublevel_truncate(&k, &eq, s).map_err(|e| e.to_string())?;
        let ck = real_eq(&format!("cantor depth 3 sublevel 1/{n}"), &ks).capacity();
        let below = kappa - ck;
        let above = ck - s.exp() * kappa;
        worst = worst.max(below).max(above);
    }
    let ns = [4usize, 8, 16, 32, 64];
    let mut v = Vec::new();
    for &n in &ns {
        let ks = sublevel_truncate(&k, &eq, 1.0 / n as f64).map_err(|e| e.to_string())?;
        let (ks, _) = ks.normalize().map_err(|e| e.to_string())?;
        let e = real_eq(&format!("cantor depth 3 sublevel 1/{n} normalized"), &ks);
        v.push(build_levin(&e).map_err(|e| e.to_string())?.v_total);
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let (a, b) = linear_fit(&x, &v);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let rms = (x.iter().zip(&v).map(|(x, y)| (a + b * x - y).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    let rel = rms / mean;
    let vk = build_levin(&eq).map_err(|e| e.to_string())?.v_total;
    let msg = format!(
        "sandwich slack {worst:.1e}, V = {v:.4?} (V(K) = {vk:.4}), a + b log n with b = {b:.4}, relative residual {rel:.3}"
    );
    if worst <= 1e-7 && rel < 0.1 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bound_constant() -> Outcome {
    let full = two_interval_series();
    all_ok(full)?;
    let mut s = full.clone();
    s.rows.retain(|r| r.n >= 4);
    let eq = real_eq("two-interval a=0.5", &two_interval(0.5));
    let strip = build_levin(&eq).map_err(|e| e.to_string())?;
    let rep = verify_bound_49(&s, &strip).map_err(|e| e.to_string())?;
    let covered = rep
        .ratios
        .iter()
        .zip(&s.rows)
        .all(|((_, _), r)| rep.constant * ((r.n + 1) as f64).ln() * rep.v_total.exp() >= r.t_hi * (1.0 - 1e-12));
    let msg = format!("C = {:.4}, e^V = {:.6}, stable = {}", rep.constant, rep.v_total.exp(), rep.stable);
    if rep.stable && covered {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn crosscuts() -> Outcome {
    let mut consts = Vec::new();
    for depth in 2..=4 {
        let eq = real_eq(&format!("cantor depth {depth}"), &cantor(depth));
        let strip = build_levin(&eq).map_err(|e| e.to_string())?;
        let top = strip.max_height();
        let heights: Vec<f64> = (0..32).map(|j| top * 10f64.powf(-3.0 * (31 - j) as f64 / 31.0)).collect();
        let r = crosscut_ratios(&strip, &heights).map_err(|e| e.to_string())?;
        let c = r.iter().map(|p| p.1).fold(0.0, f64::max);
        if !c.is_finite() || c <= 0.0 {
            return Err(format!("depth {depth}: ratio constant {c}"));
        }
        consts.push(c);
    }
    let spread = consts.iter().fold(0.0, |a: f64, &b| a.max(b)) / consts.iter().fold(f64::INFINITY, |a: f64, &b| a.min(b));
    let msg = format!("constants {consts:.4?}, spread {spread:.3}");
    if spread < 2.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn holder() -> Outcome {
    let seg = RealIntervalUnion::single(-1.0, 1.0).unwrap();
    let a_seg = holder_fit(&real_eq("segment", &seg), &holder_probes_real(&seg)).map_err(|e| e.to_string())?.alpha;
    let c = circle(0.0.into(), 1.0);
    let bd = curve_eq("unit circle", std::slice::from_ref(&c));
    let a_disk = holder_fit(&bd, &holder_probes_curves(&[c], 16)).map_err(|e| e.to_string())?.alpha;
    let k = cantor(4);
    let a_cantor = holder_fit(&real_eq("cantor depth 4", &k), &holder_probes_real(&k)).map_err(|e| e.to_string())?.alpha;
    let msg = format!("segment {a_seg:.4}, disk {a_disk:.4}, cantor depth 4 {a_cantor:.4}");
    if (a_seg - 0.5).abs() <= 0.05 && (a_disk - 1.0).abs() <= 0.05 && a_cantor > 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn audit() -> Outcome {
    let log = AUDIT.lock().unwrap();
    if log.is_empty() {
        return Err("no equilibrium solves recorded".into());
    }
    let bad: Vec<String> = log
        .iter()
        .filter(|(_, mass, defect, curve)| *mass > if *curve { 1e-8 } else { 1e-10 } || *defect > 1e-7 || !defect.is_finite())
        .map(|(l, m, d, _)| format!("{l}: mass {m:.1e}, potential {d:.1e}"))
        .collect();
    let worst_mass = log.iter().map(|e| e.1).fold(0.0, f64::max);
    let worst_pot = log.iter().map(|e| e.2).fold(0.0, f64::max);
    let msg = format!("{} solves, worst mass {worst_mass:.1e}, worst potential {worst_pot:.1e}", log.len());
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; failing: {}", bad.join("; ")))
    }
}

fn level_integrals() -> Outcome {
    let ns = [8usize, 16, 32, 64, 128, 256];
    let seg = LevelShape::Segment { a: -1.0, b: 1.0 };
    let disk = LevelShape::Disk { center: 0.0.into(), radius: 1.0 };
    let mut ratio = Vec::new();
    let mut dj = Vec::new();
    for &n in &ns {
        let j = lemma31_integral(&seg, n, 1, 401).map_err(|e| e.to_string())?;
        ratio.push(j.value / (n as f64).ln());
        dj.push(lemma31_integral(&disk, n, 1, 16).map_err(|e| e.to_string())?.value);
    }
    let mut sorted = ratio.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[2] + sorted[3]);
    let band = ratio.iter().all(|&r| r <= 2.0 * median && r >= 0.5 * median);
    let dmax = dj.iter().fold(0.0, |a: f64, &b| a.max(b));
    let dmin = dj.iter().fold(f64::INFINITY, |a: f64, &b| a.min(b));
    let msg = format!("segment J/log n = {ratio:.3?} (median {median:.3}), disk max/min {:.4}", dmax / dmin);
    if band && dmax / dmin <= 1.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn affine_invariance() -> Outcome {
    let k = build_cantor(&CantorSpec::middle_third(2)).unwrap();
    let k2 = k.affine_image(AffineMap { scale: 3.0, shift: -2.0 }).unwrap();
    let n: Vec<usize> = (1..=30).collect();
    let s1 = series("cantor depth 2", SeriesSet::Real(k), &n);
    let s2 = series("cantor depth 2 mapped", SeriesSet::Real(k2), &n);
    all_ok(&s1)?;
    all_ok(&s2)?;
    let worst = s1
        .rows
        .iter()
        .zip(&s2.rows)
        .map(|(a, b)| ((a.t_hi - b.t_hi) / a.t_hi).abs().max(((a.t_lo - b.t_lo) / a.t_lo).abs()))
        .fold(0.0, f64::max);
    let msg = format!("max relative difference {worst:.2e}");
    if worst <= 1e-5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("interval baseline", interval_baseline),
        ("circle baseline", circle_baseline),
        ("capacity exactness", capacity_exactness),
        ("two-interval bounded growth", bounded_two_interval),
        ("cantor power growth", cantor_power),
        ("sublevel sandwich and slit sum", sublevel_pipeline),
        ("bound constant tail", bound_constant),
        ("crosscut ratios", crosscuts),
        ("holder exponents", holder),
        ("level-curve integral", level_integrals),
        ("affine invariance", affine_invariance),
        ("mass and potential invariants", audit),
    ];
    // the invariant audit runs last so that it sees every solve
    let order = [1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 12, 10];
    let mut failed = 0;
    for ((name, f), id) in criteria.iter().zip(order) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {id:>2} {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
