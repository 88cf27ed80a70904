//! Task dispatch. Every task returns a JSON result plus optional CSV rows.

use num_complex::Complex64;
use serde_json::{json, Value};
use widom_core::diagnostics::{
    holder_fit, holder_probes_curves, holder_probes_real, lemma31_integral, perfectness_check, LevelShape,
};
use widom_core::equilibrium::{solve_real_equilibrium, solve_symm, Equilibrium, DEFAULT_QUAD_ORDER};
use widom_core::geometry::{CurveSource, RealIntervalUnion};
use widom_core::harness::{
    capacity_of, fit_growth, run_series, verify_bound_49, SeriesOptions, SeriesResult, SeriesSet, DEFAULT_FIT_WINDOW,
    MIN_FIT_ROWS,
};
use widom_core::levin::{build_levin, crosscut_ratios, LevinStrip};
use widom_core::minimax::{solve_complex_monic, solve_real_monic, SolverOptions};

use crate::config::{build_set, ExperimentConfig, Task, TaskParams};
use crate::suites;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    SolverFailure,
    VerdictFailure,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::SolverFailure => "solver-failure",
            Status::VerdictFailure => "verdict-failure",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver(String),
}

impl From<widom_core::Error> for Failure {
    fn from(e: widom_core::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

pub struct TaskOutput {
    pub result: Value,
    pub csv: Option<Vec<u8>>,
    pub status: Status,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
}

impl TaskOutput {
    fn ok(result: Value, summary: String) -> Self {
        Self { result, csv: None, status: Status::Ok, summary: vec![summary] }
    }
}

pub fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn run(cfg: &ExperimentConfig) -> Result<TaskOutput, Failure> {
    if cfg.task == Task::VerifyTheorems {
        let name = cfg.params.suite.as_deref().unwrap_or_default();
        return suites::run(name, &cfg.params);
    }
    let desc = cfg.set.as_ref().ok_or_else(|| Failure::Config("set: missing".into()))?;
    let set = build_set(desc, cfg.params.nodes()).map_err(Failure::Config)?;
    let id = cfg.set_id.clone().unwrap_or_else(|| "set".into());
    match cfg.task {
        Task::Capacity => capacity(&set),
        Task::Green => green(&set, &cfg.params),
        Task::Levin => levin(&set, &cfg.params),
        Task::Cheb => cheb(&set, &cfg.params),
        Task::Series => series(&id, &set, &cfg.params),
        Task::Diagnostics => diagnostics(&set, &cfg.params),
        Task::VerifyTheorems => unreachable!("handled above"),
    }
}

fn capacity(set: &SeriesSet) -> Result<TaskOutput, Failure> {
    let result = match set {
        SeriesSet::Real(k) => {
            let eq = solve_real_equilibrium(k, DEFAULT_QUAD_ORDER)?;
            json!({
                "capacity": eq.capacity(),
                "robin": eq.robin(),
                "mass_error": eq.mass_error(),
                "potential_error": eq.frostman_error().max(eq.frostman_check(16)),
                "interval_masses": eq.interval_masses(),
            })
        }
        SeriesSet::Curves(c) => {
            let bd = solve_symm(c)?;
            json!({
                "capacity": bd.capacity(),
                "robin": bd.robin(),
                "mass_error": bd.mass_error(),
                "potential_error": bd.frostman_check(16),
                "nodes": c.iter().map(|c| c.len()).collect::<Vec<_>>(),
            })
        }
    };
    let line = format!("capacity {}", result["capacity"]);
    Ok(TaskOutput::ok(result, line))
}

fn green(set: &SeriesSet, p: &TaskParams) -> Result<TaskOutput, Failure> {
    let pts: Vec<Complex64> = p.points.iter().flatten().map(|q| Complex64::new(q[0], q[1])).collect();
    let values: Vec<f64> = match set {
        SeriesSet::Real(k) => {
            let eq = solve_real_equilibrium(k, DEFAULT_QUAD_ORDER)?;
            pts.iter().map(|&z| eq.green_eval(z)).collect()
        }
        SeriesSet::Curves(c) => {
            let bd = solve_symm(c)?;
            pts.iter().map(|&z| bd.green_eval(z)).collect()
        }
    };
    let rows: Vec<Value> = pts.iter().zip(&values).map(|(&z, &g)| json!({"point": c2(z), "g": g})).collect();
    Ok(TaskOutput::ok(json!({ "values": rows }), format!("{} Green function values", rows.len())))
}

fn real_only<'a>(set: &'a SeriesSet, task: &str) -> Result<&'a RealIntervalUnion, Failure> {
    match set {
        SeriesSet::Real(k) => Ok(k),
        SeriesSet::Curves(_) => Err(Failure::Config(format!("set: task {task} needs a set on the real line"))),
    }
}

/// Strip data of `K`, built on its normalized image. Slit data are affine
/// invariant; the capacity is reported for `K` itself.
fn strip_of(k: &RealIntervalUnion) -> Result<LevinStrip, Failure> {
    let (norm, _) = k.normalize()?;
    let mut strip = build_levin(&solve_real_equilibrium(&norm, DEFAULT_QUAD_ORDER)?)?;
    strip.capacity = solve_real_equilibrium(k, DEFAULT_QUAD_ORDER)?.capacity();
    Ok(strip)
}

fn levin(set: &SeriesSet, p: &TaskParams) -> Result<TaskOutput, Failure> {
    let k = real_only(set, "levin")?;
    let strip = strip_of(k)?;
    let top = strip.max_height();
    let crosscuts = if top > 0.0 {
        let count = p.heights.unwrap_or(32);
        let heights: Vec<f64> = (0..count)
            .map(|j| if count == 1 { top } else { top * 10f64.powf(-3.0 * (count - 1 - j) as f64 / (count - 1) as f64) })
            .collect();
        crosscut_ratios(&strip, &heights)?
    } else {
        Vec::new()
    };
    let line = format!("{} slits, V = {}", strip.slits.len(), strip.v_total);
    Ok(TaskOutput::ok(json!({ "strip": strip, "crosscuts": crosscuts }), line))
}

fn solver_options(p: &TaskParams, capacity: f64) -> SolverOptions {
    let mut o = SolverOptions { known_capacity: Some(capacity), ..Default::default() };
    if let Some(t) = p.bracket_tol {
        o.bracket_tol_real = t;
        o.bracket_tol_complex = t;
    }
    o
}

fn cheb(set: &SeriesSet, p: &TaskParams) -> Result<TaskOutput, Failure> {
    let n = p.n.unwrap_or(1);
    let (cap, _) = capacity_of(set)?;
    let opts = solver_options(p, cap);
    let t = match set {
        SeriesSet::Real(k) => solve_real_monic(k, n, &opts)?,
        SeriesSet::Curves(c) => solve_complex_monic(c, n, &opts)?,
    };
    let shift = n as f64 * cap.ln();
    let result = json!({
        "degree": n,
        "capacity": cap,
        "norm_lo": t.norm_lo,
        "norm_hi": t.norm_hi,
        "log_norm_lo": t.log_norm_lo,
        "log_norm_hi": t.log_norm_hi,
        "t_lo": (t.log_norm_lo - shift).exp(),
        "t_hi": (t.log_norm_hi - shift).exp(),
        "bracket": t.bracket(),
        "power_coeffs": t.power_coeffs.iter().map(|&z| c2(z)).collect::<Vec<_>>(),
        "extremes": t.extremes.iter().map(|&z| c2(z)).collect::<Vec<_>>(),
        "stats": t.stats,
    });
    let line = format!("||T_{n}|| in [{}, {}]", t.norm_lo, t.norm_hi);
    Ok(TaskOutput::ok(result, line))
}

pub fn series_csv(s: &SeriesResult) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    Ok(buf)
}

fn series(id: &str, set: &SeriesSet, p: &TaskParams) -> Result<TaskOutput, Failure> {
    let n = p.degrees(1, 20);
    let (cap, _) = capacity_of(set)?;
    let opts = SeriesOptions { solver: solver_options(p, cap), parallel: true };
    let s = run_series(id, set, &n, &opts)?;
    let window = p.window.unwrap_or(DEFAULT_FIT_WINDOW);
    let usable = s.ok_rows().filter(|r| r.n >= window).count();
    let fit = if usable >= MIN_FIT_ROWS { Some(fit_growth(&s, window)?) } else { None };
    let bound = match set {
        SeriesSet::Real(k) if s.ok_rows().next().is_some() => Some(verify_bound_49(&s, &strip_of(k)?)?),
        _ => None,
    };
    let failed = s.rows.iter().filter(|r| !r.is_ok()).count();
    let result = json!({
        "set_id": s.set_id,
        "capacity": s.capacity,
        "log_capacity": s.log_capacity,
        "capacity_uncertainty": s.capacity_uncertainty,
        "rows": s.rows.len(),
        "failed_rows": failed,
        "fit": fit,
        "bound": bound,
    });
    let mut summary = vec![format!("{} rows, {failed} failed, capacity {}", s.rows.len(), s.capacity)];
    if let Some(f) = &fit {
        summary.push(format!("growth model {:?} (residuals {:?})", f.model, f.residuals));
    }
    Ok(TaskOutput {
        result,
        csv: Some(series_csv(&s)?),
        status: if failed == 0 { Status::Ok } else { Status::SolverFailure },
        summary,
    })
}

fn diagnostics(set: &SeriesSet, p: &TaskParams) -> Result<TaskOutput, Failure> {
    let k = p.k.unwrap_or(1);
    let level_ns: Vec<usize> = match &p.n_list {
        Some(l) => l.clone(),
        None => (3..=8).map(|e| 1usize << e).collect(),
    };
    let mut summary = Vec::new();
    let (holder, perfect, shape) = match set {
        SeriesSet::Real(set) => {
            let eq = solve_real_equilibrium(set, DEFAULT_QUAD_ORDER)?;
            let h = holder_fit(&eq, &holder_probes_real(set))?;
            let centers = p.centers.clone().unwrap_or_else(|| {
                set.intervals().iter().flat_map(|&(a, b)| [a, 0.5 * (a + b), b]).collect()
            });
            let diam = set.diameter();
            let radii = p.radii.clone().unwrap_or_else(|| (1..=6).map(|j| diam * 0.5f64.powi(j)).collect());
            let pr = perfectness_check(set, &centers, &radii)?;
            let shape = (set.len() == 1).then(|| LevelShape::Segment { a: set.min(), b: set.max() });
            (h, Some(pr), shape)
        }
        SeriesSet::Curves(c) => {
            let bd = solve_symm(c)?;
            let h = holder_fit(&bd, &holder_probes_curves(c, 16))?;
            let shape = match (c.len(), c[0].source()) {
                (1, CurveSource::Disk { center, radius }) => Some(LevelShape::Disk { center: *center, radius: *radius }),
                _ => None,
            };
            (h, None, shape)
        }
    };
    summary.push(format!("Hölder exponent {:.4}", holder.alpha));
    if let Some(pr) = &perfect {
        summary.push(format!("capacity density lower bound {:.6}", pr.lambda_hat));
    }
    let level = match shape {
        Some(s) => {
            let z_count = if matches!(s, LevelShape::Disk { .. }) { 16 } else { 401 };
            let vals = level_ns
                .iter()
                .map(|&n| lemma31_integral(&s, n, k, z_count))
                .collect::<Result<Vec<_>, _>>()?;
            summary.push(format!("level-curve integrals for n = {level_ns:?}"));
            Some(vals)
        }
        None => None,
    };
    Ok(TaskOutput {
        result: json!({ "holder": holder, "perfectness": perfect, "level_integral": level }),
        csv: None,
        status: Status::Ok,
        summary,
    })
}
