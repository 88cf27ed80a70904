use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::Equilibrium;
use crate::error::{Error, Result};
use crate::geometry::DiscretizedCurve;
use crate::numeric::{integrate_adaptive_with_breaks, trig_interp};

const MIN_NODES: usize = 32;

/// Single-layer representation of the equilibrium measure of a family of
/// closed Jordan domains and arcs.
///
/// For curve `c`, `sigma[c][j]` is the density of `μ` with respect to the
/// curve's native parameter (`t` for closed curves, `θ` with `τ = cos θ` for
/// arcs) and `weights[c][j]` is the quadrature weight of node `j`, so that
/// `Σ sigma·weights = 1`.
#[derive(Debug, Clone)]
pub struct BoundaryDensity {
    curves: Vec<DiscretizedCurve>,
    weights: Vec<Vec<f64>>,
    sigma: Vec<Vec<f64>>,
    robin: f64,
    diameter: f64,
}

/// Kress product-quadrature weights `R_k` for `∫ ln(4 sin²((t−τ)/2)) f(τ) dτ`
/// on `2n` equispaced nodes, indexed by the node offset `k`.
fn kress_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..2 * n)
        .map(|k| {
            let s = PI * k as f64 / nf;
            let mut acc = 0.0;
            for m in 1..n {
                acc += (m as f64 * s).cos() / m as f64;
            }
            -2.0 * PI / nf * acc - PI / (nf * nf) * (nf * s).cos()
        })
        .collect()
}

fn set_diameter(curves: &[DiscretizedCurve]) -> f64 {
    let pts: Vec<Complex64> = curves.iter().flat_map(|c| c.nodes().iter().copied()).collect();
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d = d.max((pts[i] - pts[j]).norm());
        }
    }
    d
}

/// Per-curve quadrature weights in the native parameter.
fn quad_weights(c: &DiscretizedCurve) -> Vec<f64> {
    let m = c.len();
    if c.closed() {
        vec![2.0 * PI / m as f64; m]
    } else {
        let h = PI / (m - 1) as f64;
        (0..m)
            .map(|j| if j == 0 || j == m - 1 { 0.5 * h } else { h })
            .collect()
    }
}

/// Solves `∫ log|z − ζ| dμ(ζ) = −γ` on every boundary node together with
/// `μ(K) = 1`, for the unknown density and Robin constant `γ`.
///
/// Closed curves use the Kress product rule for the logarithmic diagonal
/// singularity; arcs use the cosine substitution, which turns the endpoint
/// singularity of the density into a smooth even function. The geometry is
/// scaled to diameter 1 before solving.
pub fn solve_symm(curves: &[DiscretizedCurve]) -> Result<BoundaryDensity> {
    if curves.is_empty() {
        return Err(Error::InvalidArgument("no curves given".into()));
    }
    for (k, c) in curves.iter().enumerate() {
        if c.len() < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "curve {k} has {} nodes, at least {MIN_NODES} are required",
                c.len()
            )));
        }
        if c.closed() && c.len() % 2 == 1 {
            return Err(Error::InvalidArgument(format!(
                "closed curve {k} needs an even node count, got {}",
                c.len()
            )));
        }
    }
    let diameter = set_diameter(curves);
    let scale = 1.0 / diameter;
    let origin = curves[0].nodes()[0];
    let scaled: Vec<DiscretizedCurve> =
        curves.iter().map(|c| c.affine_image(scale, -scale * origin)).collect();

    let offsets: Vec<usize> = scaled
        .iter()
        .scan(0, |acc, c| {
            let o = *acc;
            *acc += c.len();
            Some(o)
        })
        .collect();
    let total: usize = scaled.iter().map(|c| c.len()).sum();
    let weights: Vec<Vec<f64>> = scaled.iter().map(quad_weights).collect();

    let mut mat = DMatrix::<f64>::zeros(total + 1, total + 1);
    let mut rhs = DVector::<f64>::zeros(total + 1);

    for (a, ca) in scaled.iter().enumerate() {
        for i in 0..ca.len() {
            let row = offsets[a] + i;
            let zi = ca.nodes()[i];
            for (b, cb) in scaled.iter().enumerate() {
                if a == b {
                    continue;
                }
                for j in 0..cb.len() {
                    mat[(row, offsets[b] + j)] = weights[b][j] * (zi - cb.nodes()[j]).norm().ln();
                }
            }
            mat[(row, total)] = 1.0;
        }
        if ca.closed() {
            fill_closed_self(&mut mat, offsets[a], ca);
        } else {
            fill_open_self(&mut mat, offsets[a], ca);
        }
    }
    for (b, w) in weights.iter().enumerate() {
        for (j, &wj) in w.iter().enumerate() {
            mat[(total, offsets[b] + j)] = wj;
        }
    }
    rhs[total] = 1.0;

    let sol = mat.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let robin_scaled = sol[total];
    let sigma: Vec<Vec<f64>> = scaled
        .iter()
        .enumerate()
        .map(|(b, c)| (0..c.len()).map(|j| sol[offsets[b] + j]).collect())
        .collect();
    // cap(K) = cap(sK)/s
    let robin = robin_scaled + scale.ln();
    Ok(BoundaryDensity { curves: curves.to_vec(), weights, sigma, robin, diameter })
}

fn fill_closed_self(mat: &mut DMatrix<f64>, off: usize, c: &DiscretizedCurve) {
    let m = c.len();
    let n = m / 2;
    let h = 2.0 * PI / m as f64;
    let r = kress_weights(n);
    let nodes = c.nodes();
    for i in 0..m {
        for j in 0..m {
            let k = (i + m - j) % m;
            let smooth = if i == j {
                c.tangents()[i].norm().ln()
            } else {
                let dt = 0.5 * (k as f64) * h;
                (nodes[i] - nodes[j]).norm().ln() - 0.5 * (4.0 * dt.sin().powi(2)).ln()
            };
            mat[(off + i, off + j)] = 0.5 * r[k] + h * smooth;
        }
    }
}

fn fill_open_self(mat: &mut DMatrix<f64>, off: usize, c: &DiscretizedCurve) {
    // full periodic grid θ_j = jπ/n, j = 0..2n; reduced unknowns j = 0..=n
    let n = c.len() - 1;
    let h = PI / n as f64;
    let r = kress_weights(n);
    let nodes = c.nodes();
    let taus: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let reduce = |j: usize| if j <= n { j } else { 2 * n - j };
    for i in 0..=n {
        for jf in 0..2 * n {
            let j = reduce(jf);
            let k = (i + 2 * n - jf) % (2 * n);
            let d = if j == i {
                c.tangents()[i].norm().ln()
            } else {
                ((nodes[i] - nodes[j]) / (taus[i] - taus[j])).norm().ln()
            };
            // ½ [ R_k − h ln 2 + h D ]
            mat[(off + i, off + j)] += 0.5 * (r[k] - h * 2f64.ln() + h * d);
        }
    }
}

impl BoundaryDensity {
    pub fn curves(&self) -> &[DiscretizedCurve] {
        &self.curves
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn sigma(&self) -> &[Vec<f64>] {
        &self.sigma
    }

    /// `|Σ sigma·weights − 1|`.
    pub fn mass_error(&self) -> f64 {
        let m: f64 = self
            .sigma
            .iter()
            .zip(&self.weights)
            .flat_map(|(s, w)| s.iter().zip(w).map(|(a, b)| a * b))
            .sum();
        (m - 1.0).abs()
    }

    /// Smallest density value over all nodes.
    pub fn min_sigma(&self) -> f64 {
        self.sigma.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Density per unit arc length at node `j` of closed curve `c`.
    pub fn arc_density(&self, c: usize, j: usize) -> f64 {
        self.sigma[c][j] / self.curves[c].tangents()[j].norm()
    }

    fn curve_potential(&self, c: usize, z: Complex64) -> f64 {
        let curve = &self.curves[c];
        let sigma = &self.sigma[c];
        let m = curve.len();
        let nodes = curve.nodes();
        // nearest node and local spacing decide between the plain rule and
        // adaptive quadrature on the interpolated density
        let (jn, dn) = nodes
            .iter()
            .enumerate()
            .map(|(j, p)| (j, (z - p).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty curve");
        let spacing = |j: usize| {
            let next = nodes[(j + 1) % m];
            let prev = nodes[(j + m - 1) % m];
            (next - nodes[j]).norm().max((nodes[j] - prev).norm())
        };
        let local = (0..m)
            .filter(|&j| (nodes[j] - nodes[jn]).norm() <= 4.0 * dn.max(spacing(jn)))
            .map(spacing)
            .fold(0.0, f64::max);
        let w = &self.weights[c];
        if dn > 8.0 * local {
            return (0..m).map(|j| w[j] * sigma[j] * (z - nodes[j]).norm().ln()).sum();
        }
        let tstar = curve.node_param(jn);
        if curve.closed() {
            let f = |t: f64| safe_ln((z - curve.point_at(t)).norm()) * trig_interp(sigma, shift_of(curve), t);
            let mut breaks = vec![0.0, tstar, 2.0 * PI];
            let opposite = (tstar + PI).rem_euclid(2.0 * PI);
            breaks.push(opposite);
            // bracket the near-singular region tightly
            let h = 2.0 * PI / m as f64;
            for d in [h, 0.25 * h] {
                breaks.push((tstar - d).rem_euclid(2.0 * PI));
                breaks.push((tstar + d).rem_euclid(2.0 * PI));
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            integrate_adaptive_with_breaks(f, &breaks, 1e-13, 1e-15)
        } else {
            let mirrored: Vec<f64> = sigma.iter().copied().chain(sigma[1..m - 1].iter().rev().copied()).collect();
            let f = |t: f64| safe_ln((z - curve.point_at(t)).norm()) * trig_interp(&mirrored, 0.0, t);
            let h = PI / (m - 1) as f64;
            let mut breaks = vec![0.0, tstar, PI];
            for d in [h, 0.25 * h] {
                breaks.push((tstar - d).clamp(0.0, PI));
                breaks.push((tstar + d).clamp(0.0, PI));
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            integrate_adaptive_with_breaks(f, &breaks, 1e-13, 1e-15)
        }
    }

    /// `∫ log|z − ζ| dμ(ζ)`.
    pub fn log_potential(&self, z: Complex64) -> f64 {
        (0..self.curves.len()).map(|c| self.curve_potential(c, z)).sum()
    }

    /// `g_Ω(z)`; zero on the set (including the interiors of closed curves).
    pub fn green_eval(&self, z: Complex64) -> f64 {
        if self.curves.iter().any(|c| c.encloses(z)) {
            return 0.0;
        }
        (self.log_potential(z) + self.robin).max(0.0)
    }

    /// Largest `|U + robin|` at boundary points halfway between nodes.
    pub fn frostman_check(&self, per_curve: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.curves {
            let m = c.len();
            let stride = (m / per_curve).max(1);
            for j in (0..m.saturating_sub(1)).step_by(stride) {
                let t = 0.5 * (c.node_param(j) + c.node_param(j + 1));
                let z = c.point_at(t);
                worst = worst.max((self.log_potential(z) + self.robin).abs());
            }
        }
        worst
    }
}

// the integrable singularity may land exactly on a quadrature node
fn safe_ln(d: f64) -> f64 {
    if d > 0.0 {
        d.ln()
    } else {
        0.0
    }
}

fn shift_of(c: &DiscretizedCurve) -> f64 {
    // node_param(0) = 2π·shift/m
    c.node_param(0) * c.len() as f64 / (2.0 * PI)
}

impl Equilibrium for BoundaryDensity {
    fn robin(&self) -> f64 {
        self.robin
    }

    fn green(&self, z: Complex64) -> f64 {
        self.green_eval(z)
    }

    fn distance(&self, z: Complex64) -> f64 {
        self.curves.iter().map(|c| c.distance(z)).fold(f64::INFINITY, f64::min)
    }

    fn diameter(&self) -> f64 {
        self.diameter
    }
}
