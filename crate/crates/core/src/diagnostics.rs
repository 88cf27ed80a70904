//! Numerical checks of the Green-function Hölder bound, the capacity-density
//! condition of uniform perfectness, and the level-curve integral
//! `J(n, k) = sup_z ∫_{L_{1/n}} d(ζ,K)^k / |ζ − z|^{k+1} |dζ|`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{solve_real_equilibrium, Equilibrium, DEFAULT_QUAD_ORDER};
use crate::error::{Error, Result};
use crate::geometry::{DiscretizedCurve, RealIntervalUnion};
use crate::numeric::{golden_max, linear_fit};

/// Relative distance range accepted by [`holder_fit`].
pub const HOLDER_RANGE: (f64, f64) = (1e-6, 1e-1);
/// Distance bins per decade for the upper envelope.
const BINS_PER_DECADE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderFit {
    pub alpha: f64,
    pub c1: f64,
    /// Probes that entered the fit or the holdout.
    pub samples: usize,
    /// Probes dropped for lying on the set or outside the distance range.
    pub excluded: usize,
    pub d_min: f64,
    pub d_max: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// `max (g / (c₁ d^α) − 1)` over the holdout bins; positive values are
    /// violations.
    pub holdout_max_violation: f64,
}

/// Fits `g(z) ≤ c₁ d(z,K)^α` to the upper envelope of `g` over distance
/// bins. Even bins are fitted, odd bins form the holdout.
pub fn holder_fit<E: Equilibrium + Sync + ?Sized>(eq: &E, probes: &[Complex64]) -> Result<HolderFit> {
    let diam = eq.diameter();
    let (lo, hi) = (HOLDER_RANGE.0 * diam * (1.0 - 1e-9), HOLDER_RANGE.1 * diam * (1.0 + 1e-9));
    let evaluated: Vec<Option<(f64, f64)>> = probes
        .par_iter()
        .map(|&z| {
            let d = eq.distance(z);
            if !(lo..=hi).contains(&d) {
                return None;
            }
            let g = eq.green(z);
            (g > 0.0 && g.is_finite()).then_some((d, g))
        })
        .collect();
    let kept: Vec<(f64, f64)> = evaluated.iter().flatten().copied().collect();
    let excluded = probes.len() - kept.len();
    // upper envelope per bin
    let mut bins: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for &(d, g) in &kept {
        let key = ((d / diam).log10() * BINS_PER_DECADE).round() as i64;
        let e = bins.entry(key).or_insert((d, g));
        if g > e.1 {
            *e = (d, g);
        }
    }
    let (train, hold): (Vec<_>, Vec<_>) = bins.iter().partition(|(k, _)| k.rem_euclid(2) == 0);
    if train.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} distance levels usable for the Hölder fit, need 2",
            train.len()
        )));
    }
    let x: Vec<f64> = train.iter().map(|(_, v)| v.0.ln()).collect();
    let y: Vec<f64> = train.iter().map(|(_, v)| v.1.ln()).collect();
    let (b0, alpha) = linear_fit(&x, &y);
    let residual = (x.iter().zip(&y).map(|(a, b)| (b0 + alpha * a - b).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    let c1 = b0.exp();
    let holdout_max_violation = hold
        .iter()
        .map(|(_, v)| v.1 / (c1 * v.0.powf(alpha)) - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(HolderFit {
        alpha,
        c1,
        samples: kept.len(),
        excluded,
        d_min: kept.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        d_max: kept.iter().map(|p| p.0).fold(0.0, f64::max),
        residual,
        holdout_max_violation,
    })
}

/// Geometric distance levels `diam · 10^s`, `s` evenly spaced over the
/// Hölder range, eight per decade.
pub fn holder_levels(diam: f64) -> Vec<f64> {
    let decades = (HOLDER_RANGE.1 / HOLDER_RANGE.0).log10();
    let count = (decades * BINS_PER_DECADE).round() as usize;
    (0..=count)
        .map(|j| diam * HOLDER_RANGE.0 * 10f64.powf(j as f64 / BINS_PER_DECADE))
        .collect()
}

/// Probes for an interval union: outward from every endpoint along the real
/// axis (when the gap allows), straight above every endpoint and above every
/// interval midpoint.
pub fn holder_probes_real(set: &RealIntervalUnion) -> Vec<Complex64> {
    let ivs = set.intervals();
    let mut out = Vec::new();
    for d in holder_levels(set.diameter()) {
        for (j, &(a, b)) in ivs.iter().enumerate() {
            let room_left = if j == 0 { f64::INFINITY } else { a - ivs[j - 1].1 };
            let room_right = if j + 1 == ivs.len() { f64::INFINITY } else { ivs[j + 1].0 - b };
            if room_left >= 2.0 * d {
                out.push(Complex64::new(a - d, 0.0));
            }
            if room_right >= 2.0 * d {
                out.push(Complex64::new(b + d, 0.0));
            }
            out.push(Complex64::new(a, d));
            out.push(Complex64::new(b, d));
            out.push(Complex64::new(0.5 * (a + b), d));
        }
    }
    out
}

/// Probes along outward normals at `per_curve` evenly spaced nodes of each
/// curve, plus the tangent extensions past the ends of open arcs.
pub fn holder_probes_curves(curves: &[DiscretizedCurve], per_curve: usize) -> Vec<Complex64> {
    let diam = curves
        .iter()
        .flat_map(|c| c.nodes().iter())
        .flat_map(|a| curves.iter().flat_map(|c| c.nodes().iter()).map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    let levels = holder_levels(diam);
    let mut out = Vec::new();
    for c in curves {
        let (nodes, tangents) = (c.nodes(), c.tangents());
        let step = (nodes.len() / per_curve.max(1)).max(1);
        for j in (0..nodes.len()).step_by(step) {
            let t = tangents[j] / tangents[j].norm();
            let normal = Complex64::new(t.im, -t.re);
            let dir = if c.closed() && c.encloses(nodes[j] + normal * (1e-3 * diam)) { -normal } else { normal };
            for &d in &levels {
                out.push(nodes[j] + dir * d);
                if !c.closed() {
                    out.push(nodes[j] - dir * d);
                }
            }
        }
        if !c.closed() {
            let m = nodes.len();
            let t0 = tangents[0] / tangents[0].norm();
            let t1 = tangents[m - 1] / tangents[m - 1].norm();
            for &d in &levels {
                out.push(nodes[0] - t0 * d);
                out.push(nodes[m - 1] + t1 * d);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfectnessReport {
    /// `min κ(K ∩ [z−r, z+r]) / r` over the sample grid.
    pub lambda_hat: f64,
    pub worst_center: f64,
    pub worst_radius: f64,
    pub samples: usize,
    pub centers: usize,
    pub radii: usize,
}

/// Smallest capacity-density ratio over all `(center, radius)` pairs.
pub fn perfectness_check(set: &RealIntervalUnion, centers: &[f64], radii: &[f64]) -> Result<PerfectnessReport> {
    if centers.is_empty() || radii.is_empty() {
        return Err(Error::InvalidArgument("empty sample grid".into()));
    }
    if let Some(z) = centers.iter().find(|&&z| !set.contains(z)) {
        return Err(Error::InvalidArgument(format!("center {z} is not in the set")));
    }
    let diam = set.diameter();
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r < diam)) {
        return Err(Error::InvalidArgument(format!("radius {r} outside (0, {diam})")));
    }
    let pairs: Vec<(f64, f64)> = centers.iter().flat_map(|&z| radii.iter().map(move |&r| (z, r))).collect();
    let ratios: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(z, r)| {
            let w = set.window(z - r, z + r).ok_or_else(|| {
                Error::InvalidArgument(format!("window around {z} with radius {r} is a single point"))
            })?;
            Ok(solve_real_equilibrium(&w, DEFAULT_QUAD_ORDER)?.capacity() / r)
        })
        .collect();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for (res, &(z, r)) in ratios.into_iter().zip(&pairs) {
        let v = res?;
        if v < best.0 {
            best = (v, z, r);
        }
    }
    Ok(PerfectnessReport {
        lambda_hat: best.0,
        worst_center: best.1,
        worst_radius: best.2,
        samples: pairs.len(),
        centers: centers.len(),
        radii: radii.len(),
    })
}

/// Shapes with an explicit exterior map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LevelShape {
    Segment { a: f64, b: f64 },
    Disk { center: Complex64, radius: f64 },
}

impl LevelShape {
    /// Exterior map `Ψ(w)` and `|Ψ'(w)|`.
    fn map(&self, w: Complex64) -> (Complex64, f64) {
        match *self {
            LevelShape::Segment { a, b } => {
                let q = 0.25 * (b - a);
                (0.5 * (a + b) + (w + 1.0 / w) * q, ((1.0 - 1.0 / (w * w)) * q).norm())
            }
            LevelShape::Disk { center, radius } => (center + w * radius, radius),
        }
    }

    fn distance(&self, z: Complex64) -> f64 {
        match *self {
            LevelShape::Segment { a, b } => (z - Complex64::new(z.re.clamp(a, b), 0.0)).norm(),
            LevelShape::Disk { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }

    /// Point of `K` with boundary parameter `φ ∈ [0, π]` (segment, clustered
    /// at the ends) or `φ ∈ [0, 2π)` (circle).
    fn boundary(&self, phi: f64) -> Complex64 {
        self.map(Complex64::from_polar(1.0, phi)).0
    }

    fn param_range(&self) -> f64 {
        match self {
            LevelShape::Segment { .. } => PI,
            LevelShape::Disk { .. } => 2.0 * PI,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LevelShape::Segment { a, b } => a.is_finite() && b.is_finite() && a < b,
            LevelShape::Disk { center, radius } => center.norm().is_finite() && radius.is_finite() && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedShape(format!("degenerate shape {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelIntegral {
    pub n: usize,
    pub k: u32,
    pub value: f64,
    /// Point of `K` attaining the supremum.
    pub argmax: Complex64,
    /// Trapezoid nodes used at the maximizer.
    pub nodes: usize,
}

const TRAPEZOID_TOL: f64 = 1e-8;
const MAX_TRAPEZOID_NODES: usize = 1 << 22;

/// `∫_{L_{1/n}} d(ζ,K)^k / |ζ − z|^{k+1} |dζ|` by the periodic trapezoid
/// rule on `|w| = 1 + 1/n`, doubled until two successive sums agree to
/// `1e-8` relative.
fn level_integral(shape: &LevelShape, n: usize, k: u32, z: Complex64) -> (f64, usize) {
    let rho = 1.0 + 1.0 / n as f64;
    let f = |t: f64| {
        let w = Complex64::from_polar(rho, t);
        let (zeta, dz) = shape.map(w);
        shape.distance(zeta).powi(k as i32) / (zeta - z).norm().powi(k as i32 + 1) * dz * rho
    };
    let mut m = 64usize;
    let mut sum: f64 = (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).sum();
    let mut prev = sum * 2.0 * PI / m as f64;
    loop {
        sum += (0..m).map(|j| f(2.0 * PI * (j as f64 + 0.5) / m as f64)).sum::<f64>();
        m *= 2;
        let cur = sum * 2.0 * PI / m as f64;
        if (cur - prev).abs() <= TRAPEZOID_TOL * cur.abs() || m >= MAX_TRAPEZOID_NODES {
            return (cur, m);
        }
        prev = cur;
    }
}

/// `J(n, k)`: supremum of the level-curve integral over `z_count` boundary
/// points of `K`, refined by golden-section search around the best one.
pub fn lemma31_integral(shape: &LevelShape, n: usize, k: u32, z_count: usize) -> Result<LevelIntegral> {
    shape.validate()?;
    if n < 8 || k < 1 {
        return Err(Error::InvalidArgument(format!("need n >= 8 and k >= 1, got n={n}, k={k}")));
    }
    if z_count < 2 {
        return Err(Error::InvalidArgument("need at least two probe points".into()));
    }
    let span = shape.param_range();
    let closed = matches!(shape, LevelShape::Disk { .. });
    let step = if closed { span / z_count as f64 } else { span / (z_count - 1) as f64 };
    let values: Vec<(f64, usize)> = (0..z_count)
        .into_par_iter()
        .map(|j| level_integral(shape, n, k, shape.boundary(j as f64 * step)))
        .collect();
    let (jbest, &(mut best, mut nodes)) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("non-empty probe grid");
    let mut phi = jbest as f64 * step;
    let lo = if closed { phi - step } else { (phi - step).max(0.0) };
    let hi = if closed { phi + step } else { (phi + step).min(span) };
    let (p, v) = golden_max(|t| level_integral(shape, n, k, shape.boundary(t)).0, lo, hi, 1e-10 * span);
    if v > best {
        best = v;
        phi = p;
        nodes = level_integral(shape, n, k, shape.boundary(p)).1;
    }
    Ok(LevelIntegral { n, k, value: best, argmax: shape.boundary(phi), nodes })
}
