//! Widom-factor series `t_n(K) = ‖T_n‖_K / κ(K)^n`, growth-model fits and
//! the `t_n ≤ C log(n+1) e^{V(K)}` bound check.
//!
//! Every quantity involving `κ^n` is handled through logarithms.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{solve_real_equilibrium, solve_symm, Equilibrium, DEFAULT_QUAD_ORDER};
use crate::error::{Error, Result};
use crate::geometry::{DiscretizedCurve, RealIntervalUnion};
use crate::levin::LevinStrip;
use crate::minimax::{solve_complex_monic, solve_real_monic, SolverOptions};
use crate::numeric::linear_fit;

/// Residual tolerance of model selection: a simpler model wins when its
/// residual is within this factor of the best one.
pub const MODEL_SELECTION_SLACK: f64 = 1.10;
/// Residuals below this fraction of the mean `t` count as exact fits.
const RESIDUAL_FLOOR: f64 = 1e-9;
pub const DEFAULT_FIT_WINDOW: usize = 8;
pub const MIN_FIT_ROWS: usize = 6;

/// A set the harness can run on.
#[derive(Debug, Clone)]
pub enum SeriesSet {
    Real(RealIntervalUnion),
    Curves(Vec<DiscretizedCurve>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    pub log_norm_lo: f64,
    pub log_norm_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub status: RowStatus,
}

impl SeriesRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesResult {
    pub set_id: String,
    pub capacity: f64,
    pub log_capacity: f64,
    /// Potential-constancy defect of the equilibrium solve, used as the
    /// uncertainty of `log κ`.
    pub capacity_uncertainty: f64,
    pub rows: Vec<SeriesRow>,
}

impl SeriesResult {
    pub fn ok_rows(&self) -> impl Iterator<Item = &SeriesRow> {
        self.rows.iter().filter(|r| r.is_ok())
    }

    /// Writes the rows as CSV with header
    /// `set_id, n, log_capacity, log_norm_lo, log_norm_hi, t_lo, t_hi, status`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Internal(format!("csv output failed: {e}"));
        w.write_record(["set_id", "n", "log_capacity", "log_norm_lo", "log_norm_hi", "t_lo", "t_hi", "status"])
            .map_err(io)?;
        for r in &self.rows {
            let status = match &r.status {
                RowStatus::Ok => "ok".to_string(),
                RowStatus::Failed(msg) => format!("failed: {msg}"),
            };
            w.write_record([
                self.set_id.clone(),
                r.n.to_string(),
                self.log_capacity.to_string(),
                r.log_norm_lo.to_string(),
                r.log_norm_hi.to_string(),
                r.t_lo.to_string(),
                r.t_hi.to_string(),
                status,
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Internal(format!("csv output failed: {e}")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SeriesOptions {
    pub solver: SolverOptions,
    /// Solve rows on the rayon pool.
    pub parallel: bool,
}

/// Capacity and its uncertainty for a series set.
pub fn capacity_of(set: &SeriesSet) -> Result<(f64, f64)> {
    match set {
        SeriesSet::Real(k) => {
            let eq = solve_real_equilibrium(k, DEFAULT_QUAD_ORDER)?;
            Ok((eq.capacity(), eq.frostman_error().max(eq.mass_error())))
        }
        SeriesSet::Curves(c) => {
            let bd = solve_symm(c)?;
            Ok((bd.capacity(), bd.frostman_check(16).max(bd.mass_error())))
        }
    }
}

/// One row per degree in `n_list`. Solver failures mark the row as failed
/// and the series continues.
pub fn run_series(set_id: &str, set: &SeriesSet, n_list: &[usize], opts: &SeriesOptions) -> Result<SeriesResult> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty degree list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("degrees must be strictly increasing".into()));
    }
    let (capacity, uncertainty) = capacity_of(set)?;
    let log_cap = capacity.ln();
    let solver = SolverOptions { known_capacity: Some(capacity), ..opts.solver.clone() };
    let row = |&n: &usize| {
        let solved = match set {
            SeriesSet::Real(k) => solve_real_monic(k, n, &solver),
            SeriesSet::Curves(c) => solve_complex_monic(c, n, &solver),
        };
        match solved {
            Ok(t) => {
                let shift = n as f64 * log_cap;
                SeriesRow {
                    n,
                    log_norm_lo: t.log_norm_lo,
                    log_norm_hi: t.log_norm_hi,
                    t_lo: (t.log_norm_lo - shift).exp(),
                    t_hi: (t.log_norm_hi - shift).exp(),
                    status: RowStatus::Ok,
                }
            }
            Err(e) => SeriesRow {
                n,
                log_norm_lo: f64::NAN,
                log_norm_hi: f64::NAN,
                t_lo: f64::NAN,
                t_hi: f64::NAN,
                status: RowStatus::Failed(e.to_string()),
            },
        }
    };
    let rows: Vec<SeriesRow> = if opts.parallel {
        n_list.par_iter().map(row).collect()
    } else {
        n_list.iter().map(row).collect()
    };
    Ok(SeriesResult {
        set_id: set_id.to_string(),
        capacity,
        log_capacity: log_cap,
        capacity_uncertainty: uncertainty,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthModel {
    Constant,
    Logarithmic,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// `t ≈ a`.
    pub constant: f64,
    /// `t ≈ a + b log n`, stored as `(a, b)`.
    pub logarithmic: (f64, f64),
    /// `log t ≈ c log n + d`, stored as `(c, d)`.
    pub power: (f64, f64),
    /// RMS residuals in `t` for constant, logarithmic and power models.
    pub residuals: [f64; 3],
    pub mean_t: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub rows_used: usize,
}

impl GrowthFit {
    pub fn residual(&self) -> f64 {
        self.residuals[self.model as usize]
    }
}

fn rms(pred: impl Iterator<Item = f64>, t: &[f64]) -> f64 {
    let s: f64 = pred.zip(t).map(|(p, y)| (p - y) * (p - y)).sum();
    (s / t.len() as f64).sqrt()
}

/// Fits constant, logarithmic and power models to `t_hi` over rows with
/// `n ≥ n_min` and picks the simplest one whose residual is within 10% of
/// the best.
pub fn fit_growth(series: &SeriesResult, n_min: usize) -> Result<GrowthFit> {
    let rows: Vec<&SeriesRow> = series.ok_rows().filter(|r| r.n >= n_min).collect();
    if rows.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData(format!(
            "{} usable rows with n >= {n_min}, need {MIN_FIT_ROWS}",
            rows.len()
        )));
    }
    let ln: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let t: Vec<f64> = rows.iter().map(|r| r.t_hi).collect();
    fit_points(&ln, &t, rows[0].n, rows[rows.len() - 1].n)
}

/// Same as [`fit_growth`] on raw `(n, t)` pairs.
pub fn fit_growth_points(n: &[f64], t: &[f64]) -> Result<GrowthFit> {
    if n.len() != t.len() || n.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData(format!("need {MIN_FIT_ROWS} matching points")));
    }
    let ln: Vec<f64> = n.iter().map(|x| x.ln()).collect();
    fit_points(&ln, t, n[0] as usize, n[n.len() - 1] as usize)
}

fn fit_points(ln: &[f64], t: &[f64], n_min: usize, n_max: usize) -> Result<GrowthFit> {
    if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidArgument("growth fit needs positive finite values".into()));
    }
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let r_const = rms(t.iter().map(|_| mean), t);
    let (a, b) = linear_fit(ln, t);
    let r_log = rms(ln.iter().map(|x| a + b * x), t);
    let logt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let (d, c) = linear_fit(ln, &logt);
    let r_pow = rms(ln.iter().map(|x| (d + c * x).exp()), t);
    let residuals = [r_const, r_log, r_pow];
    let best = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let gate = best * MODEL_SELECTION_SLACK + RESIDUAL_FLOOR * mean;
    let model = [GrowthModel::Constant, GrowthModel::Logarithmic, GrowthModel::Power]
        .into_iter()
        .find(|&m| residuals[m as usize] <= gate)
        .expect("the best model passes its own gate");
    Ok(GrowthFit {
        model,
        constant: mean,
        logarithmic: (a, b),
        power: (c, d),
        residuals,
        mean_t: mean,
        n_min,
        n_max,
        rows_used: t.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound49Report {
    /// Smallest `C` with `t_hi(n) ≤ C log(n+1) e^V` on every row.
    pub constant: f64,
    pub v_total: f64,
    /// `(n, t_hi / (log(n+1) e^V))` per usable row.
    pub ratios: Vec<(usize, f64)>,
    /// The rows in the second half never exceed the maximum over the first
    /// half, i.e. `C` is settled early.
    pub stable: bool,
}

/// Minimal constant of `t_n ≤ C log(n+1) e^{V(K)}` over the series.
pub fn verify_bound_49(series: &SeriesResult, strip: &LevinStrip) -> Result<Bound49Report> {
    let rel = (series.capacity - strip.capacity).abs() / series.capacity;
    if rel > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "strip and series describe different sets (capacities {} and {})",
            strip.capacity, series.capacity
        )));
    }
    let ev = strip.v_total.exp();
    let ratios: Vec<(usize, f64)> = series
        .ok_rows()
        .map(|r| (r.n, r.t_hi / (((r.n + 1) as f64).ln() * ev)))
        .collect();
    if ratios.is_empty() {
        return Err(Error::InsufficientData("no usable rows".into()));
    }
    let constant = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let half = ratios.len().div_ceil(2);
    let head = ratios[..half].iter().map(|r| r.1).fold(0.0, f64::max);
    let tail = ratios[half..].iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Bound49Report { constant, v_total: strip.v_total, ratios, stable: tail <= head })
}
