//! Packaged verification suites for `verify-theorems`.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use widom_core::geometry::{build_cantor, AffineMap, CantorSpec, DiscretizedCurve, RealIntervalUnion};
use widom_core::harness::{
    fit_growth, run_series, verify_bound_49, GrowthModel, SeriesOptions, SeriesResult, SeriesSet, DEFAULT_FIT_WINDOW,
};
use widom_core::levin::build_levin;
use widom_core::equilibrium::{solve_real_equilibrium, DEFAULT_QUAD_ORDER};

use crate::config::TaskParams;
use crate::tasks::{series_csv, Failure, Status, TaskOutput};

pub const SUITES: [&str; 6] = [
    "interval-baseline",
    "circle-baseline",
    "two-interval-bounded",
    "bound-constant",
    "cantor-power",
    "affine-invariance",
];

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub pass: bool,
    pub detail: String,
}

fn verdict(criterion: &str, pass: bool, detail: String) -> Verdict {
    Verdict { criterion: criterion.into(), pass, detail }
}

fn run_on(id: &str, set: SeriesSet, n: &[usize]) -> Result<SeriesResult, Failure> {
    let s = run_series(id, &set, n, &SeriesOptions { parallel: true, ..Default::default() })?;
    if let Some(r) = s.rows.iter().find(|r| !r.is_ok()) {
        return Err(Failure::Solver(format!("{id}: row n={} failed: {:?}", r.n, r.status)));
    }
    Ok(s)
}

fn max_dev(s: &SeriesResult, target: f64) -> f64 {
    s.rows.iter().map(|r| (r.t_hi - target).abs().max((r.t_lo - target).abs())).fold(0.0, f64::max)
}

fn constant_verdict(s: &SeriesResult) -> Verdict {
    match fit_growth(s, 1) {
        Ok(f) => verdict("constant growth model selected", f.model == GrowthModel::Constant, format!("{:?}", f.model)),
        Err(e) => verdict("constant growth model selected", false, e.to_string()),
    }
}

fn two_interval() -> RealIntervalUnion {
    RealIntervalUnion::new(vec![(-1.0, -0.5), (0.5, 1.0)]).expect("valid set")
}

pub fn run(name: &str, p: &TaskParams) -> Result<TaskOutput, Failure> {
    let mut series = Vec::new();
    let verdicts = match name {
        "interval-baseline" => {
            let s = run_on("segment", SeriesSet::Real(RealIntervalUnion::single(-1.0, 1.0)?), &p.degrees(1, 30))?;
            let d = max_dev(&s, 2.0);
            let v = vec![verdict("t_n = 2 within 1e-6", d <= 1e-6, format!("max deviation {d:.3e}")), constant_verdict(&s)];
            series.push(s);
            v
        }
        "circle-baseline" => {
            let c = DiscretizedCurve::disk(Complex64::new(0.0, 0.0), 1.0, 128)?;
            let s = run_on("circle", SeriesSet::Curves(vec![c]), &p.degrees(1, 20))?;
            let d = max_dev(&s, 1.0);
            let v = vec![verdict("t_n = 1 within 1e-6", d <= 1e-6, format!("max deviation {d:.3e}")), constant_verdict(&s)];
            series.push(s);
            v
        }
        "two-interval-bounded" => {
            let s = run_on("two-interval", SeriesSet::Real(two_interval()), &p.degrees(1, 60))?;
            let even = s.rows.iter().filter(|r| r.n % 2 == 0 && r.n <= 24);
            let d = even.map(|r| (r.t_hi - 2.0).abs().max((r.t_lo - 2.0).abs())).fold(0.0, f64::max);
            let window = p.window.unwrap_or(DEFAULT_FIT_WINDOW);
            let sup = s.rows.iter().map(|r| r.t_hi).fold(0.0, f64::max);
            let mut v = vec![
                verdict("even rows t = 2 within 1e-5", d <= 1e-5, format!("max deviation {d:.3e}")),
                verdict("sup t <= 10", sup <= 10.0, format!("sup {sup:.6}")),
            ];
            match fit_growth(&s, window) {
                Ok(f) => {
                    let b = f.logarithmic.1;
                    v.push(verdict("log slope |b| <= 0.05", b.abs() <= 0.05, format!("b = {b:.5}")));
                    v.push(verdict(
                        "constant growth model selected",
                        f.model == GrowthModel::Constant,
                        format!("{:?}", f.model),
                    ));
                }
                Err(e) => v.push(verdict("growth fit", false, e.to_string())),
            }
            series.push(s);
            v
        }
        "bound-constant" => {
            let s = run_on("two-interval", SeriesSet::Real(two_interval()), &p.degrees(4, 60))?;
            let eq = solve_real_equilibrium(&two_interval(), DEFAULT_QUAD_ORDER)?;
            let rep = verify_bound_49(&s, &build_levin(&eq)?)?;
            let v = vec![verdict(
                "bound constant has a non-increasing tail",
                rep.stable,
                format!("C = {:.6}, V = {:.6}", rep.constant, rep.v_total),
            )];
            series.push(s);
            v
        }
        "cantor-power" => {
            let k = build_cantor(&CantorSpec::middle_third(4))?.normalize()?.0;
            let s = run_on("cantor-depth-4", SeriesSet::Real(k), &p.degrees(8, 96))?;
            let v = match fit_growth(&s, p.window.unwrap_or(DEFAULT_FIT_WINDOW)) {
                Ok(f) => {
                    let rel = f.residuals[2] / f.mean_t;
                    vec![
                        verdict("power model selected", f.model == GrowthModel::Power, format!("{:?}", f.model)),
                        verdict("exponent c in (0, 2)", f.power.0 > 0.0 && f.power.0 < 2.0, format!("c = {:.5}", f.power.0)),
                        verdict("power residual below 5% of mean t", rel < 0.05, format!("{:.2}%", 100.0 * rel)),
                    ]
                }
                Err(e) => vec![verdict("growth fit", false, e.to_string())],
            };
            series.push(s);
            v
        }
        "affine-invariance" => {
            let k = build_cantor(&CantorSpec::middle_third(2))?;
            let k2 = k.affine_image(AffineMap { scale: 3.0, shift: -2.0 })?;
            let n = p.degrees(1, 30);
            let a = run_on("cantor-depth-2", SeriesSet::Real(k), &n)?;
            let b = run_on("cantor-depth-2-mapped", SeriesSet::Real(k2), &n)?;
            let d = a
                .rows
                .iter()
                .zip(&b.rows)
                .map(|(x, y)| ((x.t_hi - y.t_hi) / x.t_hi).abs())
                .fold(0.0, f64::max);
            series.push(a);
            series.push(b);
            vec![verdict("series agree within 1e-5 relative", d <= 1e-5, format!("max difference {d:.3e}"))]
        }
        other => {
            return Err(Failure::Config(format!(
                "params.suite: unknown suite {other:?}, expected one of {SUITES:?}"
            )))
        }
    };
    let mut csv = Vec::new();
    for (j, s) in series.iter().enumerate() {
        let bytes = series_csv(s)?;
        let skip = if j == 0 { 0 } else { bytes.iter().position(|&c| c == b'\n').map_or(0, |i| i + 1) };
        csv.extend_from_slice(&bytes[skip..]);
    }
    let all = verdicts.iter().all(|v| v.pass);
    let summary = verdicts
        .iter()
        .map(|v| format!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.criterion, v.detail))
        .collect();
    Ok(TaskOutput {
        result: json!({ "suite": name, "pass": all, "verdicts": verdicts }),
        csv: Some(csv),
        status: if all { Status::Ok } else { Status::VerdictFailure },
        summary,
    })
}
