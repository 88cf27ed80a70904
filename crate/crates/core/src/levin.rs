//! Slit half-strip data for real interval unions: slit positions `u_j`,
//! heights `v_j`, their sum `V(K)`, sublevel truncation and crosscut ratios.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::equilibrium::{Equilibrium, EquilibriumReal};
use crate::error::{Error, Result};
use crate::geometry::RealIntervalUnion;
use crate::numeric::bisect;

const ROOT_TOL: f64 = 1e-13;
/// Disagreement between the two `u_j` evaluations that aborts the build.
const U_FAIL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slit {
    pub u: f64,
    pub v: f64,
    pub gap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevinStrip {
    pub slits: Vec<Slit>,
    pub v_total: f64,
    pub capacity: f64,
    /// Critical point of `g` in each gap (the zero of `Q` there).
    pub gap_peaks: Vec<f64>,
    /// Largest difference between `π·μ(K ∩ [−1, α_j])` and `π − Im φ(α_j)`.
    pub u_crosscheck: f64,
}

impl LevinStrip {
    pub fn max_height(&self) -> f64 {
        self.slits.iter().map(|s| s.v).fold(0.0, f64::max)
    }
}

fn require_normalized(set: &RealIntervalUnion) -> Result<()> {
    if set.is_normalized() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "set must span [-1, 1] with both endpoints in it, got [{}, {}]",
            set.min(),
            set.max()
        )))
    }
}

/// Zero of `Q` in every gap, in gap order.
pub fn gap_peaks(eq: &EquilibriumReal) -> Result<Vec<f64>> {
    eq.set()
        .gaps()
        .into_iter()
        .enumerate()
        .map(|(j, (a, b))| {
            bisect(|x| eq.q_eval(x), a, b, ROOT_TOL)
                .ok_or_else(|| Error::Internal(format!("gap polynomial has no sign change in gap {j}")))
        })
        .collect()
}

/// Builds the strip data for a set normalized to `[−1, 1]`.
pub fn build_levin(eq: &EquilibriumReal) -> Result<LevinStrip> {
    require_normalized(eq.set())?;
    let peaks = gap_peaks(eq)?;
    let mut slits = Vec::with_capacity(peaks.len());
    let mut worst: f64 = 0.0;
    for (j, ((alpha, _), &x)) in eq.set().gaps().into_iter().zip(&peaks).enumerate() {
        let u = PI * eq.cdf(alpha);
        let u_arg = PI - eq.green_complex(Complex64::new(alpha, 0.0))?.im;
        let diff = (u - u_arg).abs();
        if diff > U_FAIL {
            return Err(Error::Internal(format!(
                "slit position check failed in gap {j}: {u} vs {u_arg}"
            )));
        }
        worst = worst.max(diff);
        let v = eq.green_eval(Complex64::new(x, 0.0));
        slits.push(Slit { u, v, gap: j });
    }
    let v_total = slits.iter().map(|s| s.v).sum();
    Ok(LevinStrip { slits, v_total, capacity: eq.capacity(), gap_peaks: peaks, u_crosscheck: worst })
}

/// `I ∩ {g ≤ s}` for a normalized set: gaps whose peak is at most `s` close,
/// the others shrink to the part where `g > s`.
pub fn sublevel_truncate(set: &RealIntervalUnion, eq: &EquilibriumReal, s: f64) -> Result<RealIntervalUnion> {
    require_normalized(set)?;
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("level must be positive, got {s}")));
    }
    let peaks = gap_peaks(eq)?;
    let g = |x: f64| eq.green_eval(Complex64::new(x, 0.0)) - s;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut left = set.min();
    for ((alpha, beta), &x) in set.gaps().into_iter().zip(&peaks) {
        if eq.green_eval(Complex64::new(x, 0.0)) <= s {
            continue;
        }
        let l = bisect(g, alpha, x, ROOT_TOL).unwrap_or(alpha);
        let r = bisect(g, x, beta, ROOT_TOL).unwrap_or(beta);
        out.push((left, l));
        left = r;
    }
    out.push((left, set.max()));
    RealIntervalUnion::new(out)
}

/// For each height `b`, the largest `b / width` over the horizontal
/// crosscuts of the strip at that height. Walls are `0`, `π` and every slit
/// with `v_j > b`.
pub fn crosscut_ratios(strip: &LevinStrip, heights: &[f64]) -> Result<Vec<(f64, f64)>> {
    if heights.is_empty() {
        return Err(Error::InvalidArgument("no heights given".into()));
    }
    let top = strip.max_height();
    heights
        .iter()
        .map(|&b| {
            if !(b > 0.0 && b <= top) {
                return Err(Error::InvalidArgument(format!(
                    "height {b} outside (0, {top}]"
                )));
            }
            let mut walls = vec![0.0];
            walls.extend(strip.slits.iter().filter(|s| s.v > b).map(|s| s.u));
            walls.push(PI);
            let ratio = walls
                .windows(2)
                .map(|w| b / (w[1] - w[0]))
                .fold(0.0, f64::max);
            Ok((b, ratio))
        })
        .collect()
}
