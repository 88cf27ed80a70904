//! Compact sets the toolkit operates on: finite unions of real intervals,
//! Cantor-type generators, and discretized Jordan curves and arcs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::trig_interp;

/// A finite union of disjoint closed real intervals, stored in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct RealIntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for RealIntervalUnion {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RealIntervalUnion> for Vec<(f64, f64)> {
    fn from(k: RealIntervalUnion) -> Self {
        k.intervals
    }
}

impl RealIntervalUnion {
    /// Validates ordering and strict disjointness. Touching or overlapping
    /// intervals are rejected; callers are expected to merge them.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidSet("interval list is empty".into()));
        }
        for (j, &(a, b)) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidSet(format!("interval {j} has a non-finite endpoint")));
            }
            if !(a < b) {
                return Err(Error::InvalidSet(format!(
                    "interval {j} = [{a}, {b}] has non-positive length"
                )));
            }
        }
        for (j, w) in intervals.windows(2).enumerate() {
            if !(w[0].1 < w[1].0) {
                return Err(Error::InvalidSet(format!(
                    "intervals {j} and {} are not strictly ordered and disjoint",
                    j + 1
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn single(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.intervals[0].0
    }

    pub fn max(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].1
    }

    pub fn diameter(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Index of the component containing `x`, if any.
    pub fn component_of(&self, x: f64) -> Option<usize> {
        let idx = self.intervals.partition_point(|&(_, b)| b < x);
        match self.intervals.get(idx) {
            Some(&(a, b)) if a <= x && x <= b => Some(idx),
            _ => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.component_of(x).is_some()
    }

    /// Distance from a point of the plane to the set.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| {
                let x = z.re.clamp(a, b);
                (z - x).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// The open gaps `(α_j, β_j)` between consecutive components, in order.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals.windows(2).map(|w| (w[0].1, w[1].0)).collect()
    }

    /// True when the hull is exactly `[-1, 1]`.
    pub fn is_normalized(&self) -> bool {
        self.min() == -1.0 && self.max() == 1.0
    }

    /// Image under `x ↦ scale·x + shift` (`scale > 0`).
    pub fn affine_image(&self, map: AffineMap) -> Result<Self> {
        if !(map.scale > 0.0) {
            return Err(Error::InvalidArgument("affine scale must be positive".into()));
        }
        Self::new(
            self.intervals
                .iter()
                .map(|&(a, b)| (map.apply(a), map.apply(b)))
                .collect(),
        )
    }

    /// Maps the set onto a subset of `[-1, 1]` containing `±1`.
    ///
    /// Returns the normalized set and the map that was applied; use
    /// [`AffineMap::inverse`] to get back.
    pub fn normalize(&self) -> Result<(Self, AffineMap)> {
        let (lo, hi) = (self.min(), self.max());
        if !(hi > lo) {
            return Err(Error::InvalidSet("cannot normalize a single point".into()));
        }
        if self.is_normalized() {
            return Ok((self.clone(), AffineMap::IDENTITY));
        }
        let scale = 2.0 / (hi - lo);
        let map = AffineMap { scale, shift: -1.0 - scale * lo };
        let mut out: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .map(|&(a, b)| (map.apply(a), map.apply(b)))
            .collect();
        // pin the hull exactly
        out[0].0 = -1.0;
        let last = out.len() - 1;
        out[last].1 = 1.0;
        Ok((Self::new(out)?, map))
    }

    /// `K ∩ [lo, hi]`, dropping pieces that degenerate to single points.
    pub fn window(&self, lo: f64, hi: f64) -> Option<Self> {
        let pieces: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .filter_map(|&(a, b)| {
                let (x, y) = (a.max(lo), b.min(hi));
                (x < y).then_some((x, y))
            })
            .collect();
        if pieces.is_empty() {
            None
        } else {
            Self::new(pieces).ok()
        }
    }
}

/// Increasing affine map `x ↦ scale·x + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { scale: 1.0, shift: 0.0 };

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.shift
    }

    pub fn inverse(&self) -> AffineMap {
        AffineMap { scale: 1.0 / self.scale, shift: -self.shift / self.scale }
    }
}

/// Generator for the symmetric Cantor-type set obtained by repeatedly keeping
/// the two outer `ratio`-fractions of every interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub ratio: f64,
    pub depth: u32,
    pub base: (f64, f64),
}

impl CantorSpec {
    pub fn middle_third(depth: u32) -> Self {
        Self { ratio: 1.0 / 3.0, depth, base: (0.0, 1.0) }
    }
}

/// Depth-`L` iterate of the Cantor construction: `2^L` intervals of length
/// `(b − a)·ratio^L`.
pub fn build_cantor(spec: &CantorSpec) -> Result<RealIntervalUnion> {
    let CantorSpec { ratio, depth, base: (a, b) } = *spec;
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(Error::InvalidArgument(format!("cantor ratio {ratio} must lie in (0, 1/2)")));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("cantor base [{a}, {b}] is empty")));
    }
    if depth > 20 {
        return Err(Error::InvalidArgument(format!("cantor depth {depth} is too large")));
    }
    let mut level = vec![(a, b)];
    for _ in 0..depth {
        level = level
            .into_iter()
            .flat_map(|(x, y)| {
                let len = ratio * (y - x);
                [(x, x + len), (y - len, y)]
            })
            .collect();
    }
    RealIntervalUnion::new(level)
}

/// One component of a planar compact set.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Segment { a: Complex64, b: Complex64 },
    Disk { center: Complex64, radius: f64 },
    Polygon { vertices: Vec<Complex64> },
    Curve(DiscretizedCurve),
    Intervals(RealIntervalUnion),
}

impl Shape {
    fn tag(&self) -> &'static str {
        match self {
            Shape::Segment { .. } => "segment",
            Shape::Disk { .. } => "disk",
            Shape::Polygon { .. } => "polygon",
            Shape::Curve(_) => "curve",
            Shape::Intervals(_) => "interval-union",
        }
    }

    /// True for components lying on the real line.
    pub fn is_real(&self) -> bool {
        match self {
            Shape::Segment { a, b } => a.im == 0.0 && b.im == 0.0,
            Shape::Intervals(_) => true,
            _ => false,
        }
    }
}

/// Analytic description a discretized curve was sampled from.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSource {
    Disk { center: Complex64, radius: f64 },
    /// Graded polygon; `counts[k]` nodes sit on side `k`.
    Polygon { vertices: Vec<Complex64>, counts: Vec<usize> },
    /// Straight open arc from `a` (τ = −1) to `b` (τ = 1).
    SegmentArc { a: Complex64, b: Complex64 },
    /// User-supplied samples; interpolated spectrally.
    Samples,
}

/// Boundary samples of a Jordan curve (closed) or arc (open).
///
/// Closed curves are sampled at the uniform parameter `t_j = 2π(j + shift)/m`
/// and `tangents` hold `dz/dt`. Open arcs are sampled at `τ_j = cos(jπ/(m−1))`
/// (endpoint clustering) and `tangents` hold `dz/dτ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedCurve {
    nodes: Vec<Complex64>,
    tangents: Vec<Complex64>,
    closed: bool,
    grading: f64,
    shift: f64,
    source: CurveSource,
}

/// Default algebraic grading exponent at polygon corners.
pub const DEFAULT_GRADING: f64 = 2.0;
/// Corner grading used when a polygon is handed to the boundary solver.
pub const SOLVER_GRADING: f64 = 6.0;

/// Symmetric algebraic grading map of `[0, 1]` onto itself:
/// `f(s) = s^p / (s^p + (1 − s)^p)`, so that the distance to either end behaves
/// like `s^p`. Returns `(f(s), f'(s))`.
pub fn grading_map(s: f64, p: f64) -> (f64, f64) {
    let u = s.powf(p);
    let v = (1.0 - s).powf(p);
    let den = u + v;
    let f = u / den;
    let df = p * s.powf(p - 1.0) * (1.0 - s).powf(p - 1.0) / (den * den);
    (f, df)
}

impl DiscretizedCurve {
    fn check_nodes(nodes: &[Complex64]) -> Result<()> {
        if nodes.len() < 4 {
            return Err(Error::InvalidSet("a curve needs at least 4 vertices".into()));
        }
        if nodes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSet("curve vertex is not finite".into()));
        }
        for (j, w) in nodes.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::InvalidSet(format!("curve vertices {j} and {} coincide", j + 1)));
            }
        }
        Ok(())
    }

    /// Uniformly sampled circle.
    pub fn disk(center: Complex64, radius: f64, m: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidSet(format!("disk radius {radius} must be positive")));
        }
        let h = 2.0 * PI / m as f64;
        let nodes: Vec<Complex64> =
            (0..m).map(|j| center + Complex64::from_polar(radius, j as f64 * h)).collect();
        let tangents = (0..m)
            .map(|j| Complex64::i() * Complex64::from_polar(radius, j as f64 * h))
            .collect();
        Self::check_nodes(&nodes)?;
        Ok(Self {
            nodes,
            tangents,
            closed: true,
            grading: 1.0,
            shift: 0.0,
            source: CurveSource::Disk { center, radius },
        })
    }

    /// Polygon boundary with nodes clustered algebraically toward the corners.
    ///
    /// Nodes are distributed over sides in proportion to side length; inside a
    /// side the local parameter `s_i = (i + ½)/q` is mapped through
    /// [`grading_map`].
    pub fn polygon(vertices: &[Complex64], m: usize, grading: f64) -> Result<Self> {
        let nv = vertices.len();
        if nv < 3 {
            return Err(Error::InvalidSet("a polygon needs at least 3 vertices".into()));
        }
        if !(grading >= 1.0) {
            return Err(Error::InvalidArgument(format!("grading {grading} must be ≥ 1")));
        }
        if m < 2 * nv {
            return Err(Error::InvalidArgument(format!(
                "{m} points cannot cover {nv} polygon sides"
            )));
        }
        let lens: Vec<f64> = (0..nv).map(|k| (vertices[(k + 1) % nv] - vertices[k]).norm()).collect();
        if lens.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidSet("polygon has repeated vertices".into()));
        }
        let perim: f64 = lens.iter().sum();
        let mut counts: Vec<usize> =
            lens.iter().map(|l| ((l / perim) * m as f64).round().max(2.0) as usize).collect();
        // fix rounding drift on the longest sides
        while counts.iter().sum::<usize>() != m {
            let total: usize = counts.iter().sum();
            let k = (0..nv)
                .max_by(|&x, &y| lens[x].total_cmp(&lens[y]).then(y.cmp(&x)))
                .unwrap();
            if total > m {
                let k = (0..nv).filter(|&k| counts[k] > 2).max_by_key(|&k| counts[k]).unwrap();
                counts[k] -= 1;
            } else {
                counts[k] += 1;
            }
        }
        let source = CurveSource::Polygon { vertices: vertices.to_vec(), counts };
        let mut nodes = Vec::with_capacity(m);
        let mut tangents = Vec::with_capacity(m);
        let h = 2.0 * PI / m as f64;
        for j in 0..m {
            let (z, dz) = polygon_point(vertices, source_counts(&source), grading, (j as f64 + 0.5) * h);
            nodes.push(z);
            tangents.push(dz);
        }
        Self::check_nodes(&nodes)?;
        Ok(Self { nodes, tangents, closed: true, grading, shift: 0.5, source })
    }

    /// Straight open arc `[a, b]` sampled at Chebyshev extreme points.
    pub fn segment_arc(a: Complex64, b: Complex64, m: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidSet("segment endpoints coincide".into()));
        }
        let nodes: Vec<Complex64> = (0..m)
            .map(|j| {
                let tau = (PI * j as f64 / (m - 1) as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * tau
            })
            .collect();
        Self::check_nodes(&nodes)?;
        Ok(Self {
            tangents: vec![0.5 * (b - a); m],
            nodes,
            closed: false,
            grading: 2.0,
            shift: 0.0,
            source: CurveSource::SegmentArc { a, b },
        })
    }

    /// Curve from user samples. Closed curves must be sampled at a uniform
    /// parameter; open arcs at `τ_j = cos(jπ/(m−1))`. Tangents are obtained
    /// by spectral differentiation.
    pub fn from_samples(points: Vec<Complex64>, closed: bool) -> Result<Self> {
        Self::check_nodes(&points)?;
        let m = points.len();
        if closed && points[0] == points[m - 1] {
            return Err(Error::InvalidSet(
                "closed curve repeats its first vertex; store it once".into(),
            ));
        }
        let tangents = if closed {
            periodic_derivative(&points)
        } else {
            // dz/dθ on the mirrored periodic sequence, then dz/dτ = −(dz/dθ)/sin θ
            let mirrored = mirror(&points);
            let dtheta = periodic_derivative(&mirrored);
            (0..m)
                .map(|j| {
                    let theta = PI * j as f64 / (m - 1) as f64;
                    if j == 0 || j == m - 1 {
                        // endpoint: limit via Chebyshev endpoint derivative
                        chebyshev_endpoint_derivative(&points, j == 0)
                    } else {
                        -dtheta[j] / theta.sin()
                    }
                })
                .collect()
        };
        Ok(Self { nodes: points, tangents, closed, grading: 1.0, shift: 0.0, source: CurveSource::Samples })
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn tangents(&self) -> &[Complex64] {
        &self.tangents
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn source(&self) -> &CurveSource {
        &self.source
    }

    /// Parameter value of node `j`: `t_j` for closed curves, `θ_j` for arcs.
    pub fn node_param(&self, j: usize) -> f64 {
        let m = self.nodes.len();
        if self.closed {
            2.0 * PI * (j as f64 + self.shift) / m as f64
        } else {
            PI * j as f64 / (m - 1) as f64
        }
    }

    /// Point at parameter `t` (closed: `t ∈ [0, 2π)`, open: `θ ∈ [0, π]`).
    pub fn point_at(&self, t: f64) -> Complex64 {
        match &self.source {
            CurveSource::Disk { center, radius } => center + Complex64::from_polar(*radius, t),
            CurveSource::Polygon { vertices, counts } => {
                polygon_point(vertices, counts, self.grading, t.rem_euclid(2.0 * PI)).0
            }
            CurveSource::SegmentArc { a, b } => 0.5 * (a + b) + 0.5 * (b - a) * t.cos(),
            CurveSource::Samples => {
                if self.closed {
                    trig_interp(&self.nodes, self.shift, t)
                } else {
                    trig_interp(&mirror(&self.nodes), 0.0, t)
                }
            }
        }
    }

    /// Resample the same curve with `m` nodes.
    pub fn resample(&self, m: usize) -> Result<Self> {
        match &self.source {
            CurveSource::Disk { center, radius } => Self::disk(*center, *radius, m),
            CurveSource::Polygon { vertices, .. } => Self::polygon(vertices, m, self.grading),
            CurveSource::SegmentArc { a, b } => Self::segment_arc(*a, *b, m),
            CurveSource::Samples => {
                let pts: Vec<Complex64> = (0..m)
                    .map(|j| {
                        let t = if self.closed {
                            2.0 * PI * (j as f64 + self.shift) / m as f64
                        } else {
                            PI * j as f64 / (m - 1) as f64
                        };
                        self.point_at(t)
                    })
                    .collect();
                let mut c = Self::from_samples(pts, self.closed)?;
                c.shift = if self.closed { self.shift } else { 0.0 };
                Ok(c)
            }
        }
    }

    /// Image under `z ↦ scale·z + shift`.
    pub fn affine_image(&self, scale: f64, shift: Complex64) -> Self {
        let source = match &self.source {
            CurveSource::Disk { center, radius } => {
                CurveSource::Disk { center: scale * center + shift, radius: scale * radius }
            }
            CurveSource::Polygon { vertices, counts } => CurveSource::Polygon {
                vertices: vertices.iter().map(|v| scale * v + shift).collect(),
                counts: counts.clone(),
            },
            CurveSource::SegmentArc { a, b } => {
                CurveSource::SegmentArc { a: scale * a + shift, b: scale * b + shift }
            }
            CurveSource::Samples => CurveSource::Samples,
        };
        Self {
            nodes: self.nodes.iter().map(|z| scale * z + shift).collect(),
            tangents: self.tangents.iter().map(|z| scale * z).collect(),
            closed: self.closed,
            grading: self.grading,
            shift: self.shift,
            source,
        }
    }

    /// Whether `z` lies in the closed region bounded by this curve (closed
    /// curves) or on the arc (open curves, within `1e-14` relative).
    pub fn encloses(&self, z: Complex64) -> bool {
        match &self.source {
            CurveSource::Disk { center, radius } => (z - center).norm() <= *radius,
            CurveSource::Polygon { vertices, .. } => point_in_polygon(vertices, z),
            CurveSource::SegmentArc { a, b } => segment_distance(*a, *b, z) <= 1e-14 * (b - a).norm(),
            CurveSource::Samples => {
                if self.closed {
                    point_in_polygon(&self.nodes, z)
                } else {
                    false
                }
            }
        }
    }

    /// Distance from `z` to the curve (or to the filled region for closed curves).
    pub fn distance(&self, z: Complex64) -> f64 {
        if self.closed && self.encloses(z) {
            return 0.0;
        }
        match &self.source {
            CurveSource::Disk { center, radius } => ((z - center).norm() - radius).max(0.0),
            CurveSource::Polygon { vertices, .. } => polyline_distance(vertices, true, z),
            CurveSource::SegmentArc { a, b } => segment_distance(*a, *b, z),
            CurveSource::Samples => polyline_distance(&self.nodes, self.closed, z),
        }
    }
}

fn source_counts(source: &CurveSource) -> &[usize] {
    match source {
        CurveSource::Polygon { counts, .. } => counts,
        _ => unreachable!("polygon source"),
    }
}

fn polygon_point(vertices: &[Complex64], counts: &[usize], grading: f64, t: f64) -> (Complex64, Complex64) {
    let m: usize = counts.iter().sum();
    let h = 2.0 * PI / m as f64;
    let u = t / h; // node-units along the boundary
    let mut start = 0.0;
    let nv = vertices.len();
    for k in 0..nv {
        let q = counts[k] as f64;
        if u < start + q || k == nv - 1 {
            let s = ((u - start) / q).clamp(0.0, 1.0);
            let (f, df) = grading_map(s, grading);
            let edge = vertices[(k + 1) % nv] - vertices[k];
            // ds/dt = 1/(q h)
            return (vertices[k] + edge * f, edge * (df / (q * h)));
        }
        start += q;
    }
    unreachable!()
}

fn mirror(points: &[Complex64]) -> Vec<Complex64> {
    // θ_j = jπ/(m−1) on [0, π]; extend evenly to [0, 2π)
    let m = points.len();
    let mut out = points.to_vec();
    out.extend(points[1..m - 1].iter().rev());
    out
}

fn periodic_derivative(points: &[Complex64]) -> Vec<Complex64> {
    // spectral differentiation through the discrete Fourier transform
    let n = points.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter_mut().enumerate() {
        for (j, p) in points.iter().enumerate() {
            *c += p * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / n as f64);
        }
        *c /= n as f64;
    }
    (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                let freq = if k < n / 2 {
                    k as f64
                } else if n.is_multiple_of(2) && k == n / 2 {
                    0.0
                } else {
                    k as f64 - n as f64
                };
                acc += c * Complex64::new(0.0, freq) * Complex64::from_polar(1.0, 2.0 * PI * (k * j) as f64 / n as f64);
            }
            acc
        })
        .collect()
}

fn chebyshev_endpoint_derivative(points: &[Complex64], at_plus_one: bool) -> Complex64 {
    // row of the Chebyshev differentiation matrix at x_0 = 1 or x_N = -1
    let n = points.len() - 1;
    let nf = n as f64;
    let x: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / nf).cos()).collect();
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let i = if at_plus_one { 0 } else { n };
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=n {
        if j == i {
            let d = (2.0 * nf * nf + 1.0) / 6.0;
            acc += points[j] * if at_plus_one { d } else { -d };
        } else {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += points[j] * (c(i) / c(j) * sign / (x[i] - x[j]));
        }
    }
    acc
}

pub(crate) fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let d = b - a;
    let t = ((z - a) * d.conj()).re / d.norm_sqr();
    (z - (a + d * t.clamp(0.0, 1.0))).norm()
}

fn polyline_distance(points: &[Complex64], closed: bool, z: Complex64) -> f64 {
    let n = points.len();
    let segs = if closed { n } else { n - 1 };
    (0..segs)
        .map(|k| segment_distance(points[k], points[(k + 1) % n], z))
        .fold(f64::INFINITY, f64::min)
}

fn point_in_polygon(vertices: &[Complex64], z: Complex64) -> bool {
    if polyline_distance(vertices, true, z) == 0.0 {
        return true;
    }
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Boundary discretization of a single planar component.
///
/// Disks get uniform angular spacing, polygons are graded toward their
/// corners. Real segments and interval unions belong to the real-line
/// pipeline and are rejected here.
pub fn discretize_boundary(shape: &Shape, m: usize, grading: f64) -> Result<DiscretizedCurve> {
    match shape {
        Shape::Disk { center, radius } => DiscretizedCurve::disk(*center, *radius, m),
        Shape::Polygon { vertices } => DiscretizedCurve::polygon(vertices, m, grading),
        Shape::Curve(c) => {
            if c.len() == m {
                Ok(c.clone())
            } else {
                c.resample(m)
            }
        }
        Shape::Segment { .. } | Shape::Intervals(_) => Err(Error::UnsupportedShape(format!(
            "{} components have no interior boundary to discretize; use the real-line pipeline \
             (RealIntervalUnion + solve_real_equilibrium)",
            shape.tag()
        ))),
    }
}

/// A finite union of pairwise disjoint components.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSet {
    components: Vec<Shape>,
}

impl ShapeSet {
    /// Validates pairwise disjointness at the resolution of a 256-point
    /// discretization of each component.
    pub fn new(components: Vec<Shape>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidSet("shape set has no components".into()));
        }
        let samples: Vec<Vec<Complex64>> = components.iter().map(sample_component).collect::<Result<_>>()?;
        for i in 0..components.len() {
            for j in (i + 1)..components.len() {
                let close = samples[i].iter().any(|&z| component_distance(&components[j], z) == 0.0)
                    || samples[j].iter().any(|&z| component_distance(&components[i], z) == 0.0);
                if close {
                    return Err(Error::InvalidSet(format!("components {i} and {j} intersect")));
                }
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Shape] {
        &self.components
    }

    /// True when every component lies on the real axis.
    pub fn is_real(&self) -> bool {
        self.components.iter().all(Shape::is_real)
    }

    /// Merge real components into one interval union.
    pub fn to_real(&self) -> Result<RealIntervalUnion> {
        let mut ivs = Vec::new();
        for c in &self.components {
            match c {
                Shape::Segment { a, b } if a.im == 0.0 && b.im == 0.0 => {
                    ivs.push((a.re.min(b.re), a.re.max(b.re)))
                }
                Shape::Intervals(k) => ivs.extend_from_slice(k.intervals()),
                other => {
                    return Err(Error::UnsupportedShape(format!(
                        "{} is not a real-line component",
                        other.tag()
                    )))
                }
            }
        }
        ivs.sort_by(|x, y| x.0.total_cmp(&y.0));
        RealIntervalUnion::new(ivs)
    }

    /// Boundary discretization of every component for the curve solver.
    /// Real segments become open arcs.
    pub fn to_curves(&self, m: usize, grading: f64) -> Result<Vec<DiscretizedCurve>> {
        let mut out = Vec::new();
        for c in &self.components {
            match c {
                Shape::Segment { a, b } => out.push(DiscretizedCurve::segment_arc(*a, *b, m)?),
                Shape::Intervals(k) => {
                    for &(a, b) in k.intervals() {
                        out.push(DiscretizedCurve::segment_arc(a.into(), b.into(), m)?);
                    }
                }
                other => out.push(discretize_boundary(other, m, grading)?),
            }
        }
        Ok(out)
    }
}

fn sample_component(shape: &Shape) -> Result<Vec<Complex64>> {
    Ok(match shape {
        Shape::Segment { a, b } => (0..=256).map(|j| a + (b - a) * (j as f64 / 256.0)).collect(),
        Shape::Intervals(k) => k
            .intervals()
            .iter()
            .flat_map(|&(a, b)| (0..=64).map(move |j| Complex64::from(a + (b - a) * j as f64 / 64.0)))
            .collect(),
        Shape::Disk { center, radius } => DiscretizedCurve::disk(*center, *radius, 256)?.nodes,
        Shape::Polygon { vertices } => {
            let mut v = vertices.clone();
            v.extend(DiscretizedCurve::polygon(vertices, 256.max(4 * vertices.len()), 1.0)?.nodes);
            v
        }
        Shape::Curve(c) => c.nodes.clone(),
    })
}

fn component_distance(shape: &Shape, z: Complex64) -> f64 {
    match shape {
        Shape::Segment { a, b } => segment_distance(*a, *b, z),
        Shape::Intervals(k) => k.distance(z),
        Shape::Disk { center, radius } => ((z - center).norm() - radius).max(0.0),
        Shape::Polygon { vertices } => {
            if point_in_polygon(vertices, z) {
                0.0
            } else {
                polyline_distance(vertices, true, z)
            }
        }
        Shape::Curve(c) => c.distance(z),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| (x.0 - y.0).abs() < 1e-15 && (x.1 - y.1).abs() < 1e-15)
    }

    #[test]
    fn cantor_small_depths() {
        let k0 = build_cantor(&CantorSpec::middle_third(0)).unwrap();
        assert_eq!(k0.intervals(), &[(0.0, 1.0)]);
        let k1 = build_cantor(&CantorSpec::middle_third(1)).unwrap();
        assert!(close(k1.intervals(), &[(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]));
        let k2 = build_cantor(&CantorSpec::middle_third(2)).unwrap();
        assert!(close(
            k2.intervals(),
            &[(0.0, 1.0 / 9.0), (2.0 / 9.0, 1.0 / 3.0), (2.0 / 3.0, 7.0 / 9.0), (8.0 / 9.0, 1.0)]
        ));
    }

    #[test]
    fn cantor_rejects_bad_ratio() {
        let bad = CantorSpec { ratio: 0.5, depth: 2, base: (0.0, 1.0) };
        assert!(build_cantor(&bad).is_err());
        let bad = CantorSpec { ratio: 0.2, depth: 2, base: (1.0, 1.0) };
        assert!(build_cantor(&bad).is_err());
    }

    #[test]
    fn union_validation() {
        assert!(RealIntervalUnion::new(vec![]).is_err());
        assert!(RealIntervalUnion::new(vec![(1.0, 1.0)]).is_err());
        assert!(RealIntervalUnion::new(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(RealIntervalUnion::new(vec![(2.0, 3.0), (0.0, 1.0)]).is_err());
        assert!(RealIntervalUnion::new(vec![(0.0, 1.0), (1.5, 2.0)]).is_ok());
    }

    #[test]
    fn normalize_examples() {
        let (k, map) = RealIntervalUnion::single(0.0, 1.0).unwrap().normalize().unwrap();
        assert_eq!(k.intervals(), &[(-1.0, 1.0)]);
        assert_eq!(map, AffineMap { scale: 2.0, shift: -1.0 });

        let (k, map) = RealIntervalUnion::single(-1.0, 1.0).unwrap().normalize().unwrap();
        assert_eq!(k.intervals(), &[(-1.0, 1.0)]);
        assert_eq!(map, AffineMap::IDENTITY);

        let two = RealIntervalUnion::new(vec![(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]).unwrap();
        let (k, _) = two.normalize().unwrap();
        assert!(close(k.intervals(), &[(-1.0, -1.0 / 3.0), (1.0 / 3.0, 1.0)]));
    }

    #[test]
    fn gap_examples() {
        assert!(RealIntervalUnion::single(-1.0, 1.0).unwrap().gaps().is_empty());
        let k = RealIntervalUnion::new(vec![(-1.0, -1.0 / 3.0), (1.0 / 3.0, 1.0)]).unwrap();
        assert_eq!(k.gaps(), vec![(-1.0 / 3.0, 1.0 / 3.0)]);
        let (c2, _) = build_cantor(&CantorSpec::middle_third(2)).unwrap().normalize().unwrap();
        assert_eq!(c2.gaps().len(), 3);
    }

    #[test]
    fn window_drops_points() {
        let k = RealIntervalUnion::new(vec![(-1.0, -0.5), (0.5, 1.0)]).unwrap();
        let w = k.window(-0.5, 0.7).unwrap();
        assert_eq!(w.intervals(), &[(0.5, 0.7)]);
        assert!(k.window(-0.4, 0.4).is_none());
    }

    #[test]
    fn disk_four_points() {
        let c = discretize_boundary(&Shape::Disk { center: 0.0.into(), radius: 1.0 }, 4, 2.0).unwrap();
        let want = [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0), -Complex64::i()];
        for (z, w) in c.nodes().iter().zip(want) {
            assert!((z - w).norm() < 1e-15);
        }
    }

    #[test]
    fn segment_is_rejected_with_pointer_to_real_pipeline() {
        let seg = Shape::Segment { a: (-1.0).into(), b: 1.0.into() };
        match discretize_boundary(&seg, 64, 2.0) {
            Err(Error::UnsupportedShape(msg)) => assert!(msg.contains("real-line pipeline")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn square_grading_follows_power_law() {
        let sq = vec![
            Complex64::new(-1.0, -1.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 1.0),
        ];
        let c = discretize_boundary(&Shape::Polygon { vertices: sq.clone() }, 64, 2.0).unwrap();
        match c.source() {
            CurveSource::Polygon { counts, .. } => assert_eq!(counts, &vec![16; 4]),
            _ => unreachable!(),
        }
        // first side runs from (-1,-1) to (1,-1): distance to the corner is 2·f(s_i)
        for i in 0..16 {
            let s = (i as f64 + 0.5) / 16.0;
            let want = 2.0 * s * s / (s * s + (1.0 - s) * (1.0 - s));
            let got = (c.nodes()[i] - sq[0]).norm();
            assert!((got - want).abs() < 1e-14, "node {i}: {got} vs {want}");
        }
        // near the corner the spacing is algebraic: d_i / d_0 → (2i + 1)^2
        let d0 = (c.nodes()[0] - sq[0]).norm();
        let d1 = (c.nodes()[1] - sq[0]).norm();
        assert!(((d1 / d0) / 9.0 - 1.0).abs() < 0.15);
    }

    #[test]
    fn sampled_circle_matches_analytic_tangent() {
        let m = 32;
        let pts: Vec<Complex64> =
            (0..m).map(|j| Complex64::from_polar(2.0, 2.0 * PI * j as f64 / m as f64)).collect();
        let c = DiscretizedCurve::from_samples(pts, true).unwrap();
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            let want = Complex64::i() * Complex64::from_polar(2.0, t);
            assert!((c.tangents()[j] - want).norm() < 1e-12);
        }
        assert!((c.point_at(0.3) - Complex64::from_polar(2.0, 0.3)).norm() < 1e-12);
    }

    #[test]
    fn sampled_arc_matches_analytic_tangent() {
        let m = 17;
        let a = Complex64::new(0.0, 1.0);
        let b = Complex64::new(2.0, 3.0);
        let seg = DiscretizedCurve::segment_arc(a, b, m).unwrap();
        let c = DiscretizedCurve::from_samples(seg.nodes().to_vec(), false).unwrap();
        for j in 0..m {
            assert!((c.tangents()[j] - 0.5 * (b - a)).norm() < 1e-10, "{j}: {}", c.tangents()[j]);
        }
    }

    #[test]
    fn shape_set_rejects_overlap() {
        let d1 = Shape::Disk { center: 0.0.into(), radius: 1.0 };
        let d2 = Shape::Disk { center: 1.5.into(), radius: 1.0 };
        assert!(ShapeSet::new(vec![d1.clone(), d2]).is_err());
        let d3 = Shape::Disk { center: 3.0.into(), radius: 1.0 };
        assert!(ShapeSet::new(vec![d1, d3]).is_ok());
    }

    #[test]
    fn shape_set_merges_real_components() {
        let s = ShapeSet::new(vec![
            Shape::Segment { a: 0.5.into(), b: 1.0.into() },
            Shape::Intervals(RealIntervalUnion::single(-1.0, -0.5).unwrap()),
        ])
        .unwrap();
        assert!(s.is_real());
        assert_eq!(s.to_real().unwrap().intervals(), &[(-1.0, -0.5), (0.5, 1.0)]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cantor_structure(ratio in 0.05f64..0.45, depth in 0u32..7, a in -5.0f64..5.0, w in 0.1f64..10.0) {
                let spec = CantorSpec { ratio, depth, base: (a, a + w) };
                let k = build_cantor(&spec).unwrap();
                prop_assert_eq!(k.len(), 1usize << depth);
                let len = w * ratio.powi(depth as i32);
                for &(x, y) in k.intervals() {
                    prop_assert!(((y - x) - len).abs() <= 1e-12 * w);
                }
                let total = w * (2.0 * ratio).powi(depth as i32);
                prop_assert!((k.total_length() - total).abs() <= 1e-11 * w);
            }

            #[test]
            fn normalization_is_idempotent_and_keeps_gaps(ratio in 0.1f64..0.45, depth in 0u32..5,
                                                           a in -3.0f64..3.0, w in 0.5f64..4.0) {
                let k = build_cantor(&CantorSpec { ratio, depth, base: (a, a + w) }).unwrap();
                let (n1, _) = k.normalize().unwrap();
                let (n2, map2) = n1.normalize().unwrap();
                prop_assert_eq!(&n1, &n2);
                prop_assert_eq!(map2, AffineMap::IDENTITY);
                prop_assert_eq!(n1.gaps().len(), k.gaps().len());
            }
        }
    }
}
