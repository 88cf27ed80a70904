use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::Equilibrium;
use crate::error::{Error, Result};
use crate::geometry::RealIntervalUnion;
use crate::numeric::{chebyshev_coefficients_first_kind, chebyshev_points_first_kind};

pub const DEFAULT_QUAD_ORDER: usize = 64;
const MIN_QUAD_ORDER: usize = 32;
const MAX_DOUBLINGS: usize = 3;
/// Mass deviation below which refinement stops.
const MASS_TARGET: f64 = 1e-10;
/// Mass deviation above which the solve is reported as failed.
const MASS_FAIL: f64 = 1e-8;
/// Potential deviation on `K` below which refinement stops.
const FROSTMAN_TARGET: f64 = 1e-10;
/// Gaps shorter than this fraction of the diameter are rejected.
const MIN_GAP_FRACTION: f64 = 1e-8;
const MIN_RCOND: f64 = 1e-14;

/// Equilibrium measure of a finite union of real intervals.
///
/// The density is `|Q(x)| / (π √|R(x)|)` with `R(x) = Π (x − a_j)(x − b_j)` and
/// `Q` monic of degree `#intervals − 1`. Internally `Q` is stored in the
/// basis of partial products over the gap midpoints `c_i`:
/// `Q = Π(x − c_i) + Σ_k β_k Π_{i≠k}(x − c_i)`, which keeps the gap system
/// well conditioned for many intervals.
#[derive(Debug, Clone)]
pub struct EquilibriumReal {
    set: RealIntervalUnion,
    gap_mids: Vec<f64>,
    beta: Vec<f64>,
    q_coeffs: Vec<f64>,
    robin: f64,
    quad_order: usize,
    /// Chebyshev coefficients of the smooth factor `h_j` of the density on
    /// each interval, w.r.t. the arcsine measure of that interval.
    cheb: Vec<Vec<f64>>,
    mass_error: f64,
    frostman_error: f64,
}

/// Solves for the equilibrium measure of `set`.
///
/// Quadrature starts at `quad_order` Gauss–Chebyshev nodes per interval and
/// is doubled (at most three times) until the total mass is 1 within `1e-10`
/// and the potential is flat on the set.
pub fn solve_real_equilibrium(set: &RealIntervalUnion, quad_order: usize) -> Result<EquilibriumReal> {
    if quad_order < MIN_QUAD_ORDER {
        return Err(Error::InvalidArgument(format!(
            "quad_order {quad_order} is below the minimum {MIN_QUAD_ORDER}"
        )));
    }
    let diam = set.diameter();
    for (j, (a, b)) in set.gaps().into_iter().enumerate() {
        if b - a < MIN_GAP_FRACTION * diam {
            return Err(Error::IllConditionedGap { gap: j, rcond: 0.0 });
        }
    }
    let mut m = quad_order;
    let mut eq = solve_at_order(set, m)?;
    for _ in 0..MAX_DOUBLINGS {
        if eq.mass_error <= MASS_TARGET && eq.frostman_error <= FROSTMAN_TARGET {
            break;
        }
        m *= 2;
        eq = solve_at_order(set, m)?;
    }
    if eq.mass_error > MASS_FAIL {
        return Err(Error::QuadratureNotConverged { mass_error: eq.mass_error });
    }
    Ok(eq)
}

/// `√Π |t − e|` over all interval endpoints except those listed in `skip`.
fn smooth_root(set: &RealIntervalUnion, t: f64, skip: [Option<usize>; 2]) -> f64 {
    // endpoint index e: 2j ↦ a_j, 2j+1 ↦ b_j
    let mut p = 1.0;
    for (j, &(a, b)) in set.intervals().iter().enumerate() {
        for (e, x) in [(2 * j, a), (2 * j + 1, b)] {
            if skip.contains(&Some(e)) {
                continue;
            }
            p *= (t - x).abs();
        }
    }
    p.sqrt()
}

/// All partial products `Π_{i≠k}(x − c_i)` plus the full product.
fn partial_products(mids: &[f64], x: f64) -> (Vec<f64>, f64) {
    let n = mids.len();
    let mut prefix = vec![1.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * (x - mids[i]);
    }
    let mut suffix = 1.0;
    let mut out = vec![0.0; n];
    for k in (0..n).rev() {
        out[k] = prefix[k] * suffix;
        suffix *= x - mids[k];
    }
    (out, prefix[n])
}

fn solve_at_order(set: &RealIntervalUnion, m: usize) -> Result<EquilibriumReal> {
    let gaps = set.gaps();
    let n = gaps.len();
    let mids: Vec<f64> = gaps.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let nodes = chebyshev_points_first_kind(m);

    let beta = if n == 0 {
        Vec::new()
    } else {
        let mut mat = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for (g, &(lo, hi)) in gaps.iter().enumerate() {
            let c = 0.5 * (lo + hi);
            let r = 0.5 * (hi - lo);
            // gap g sits between b_g (endpoint 2g+1) and a_{g+1} (endpoint 2g+2)
            let skip = [Some(2 * g + 1), Some(2 * g + 2)];
            for &s in &nodes {
                let t = c + r * s;
                let w = PI / m as f64 / smooth_root(set, t, skip);
                let (parts, full) = partial_products(&mids, t);
                for k in 0..n {
                    mat[(g, k)] += w * parts[k];
                }
                rhs[g] -= w * full;
            }
            let scale = (0..n).map(|k| mat[(g, k)].abs()).fold(rhs[g].abs(), f64::max);
            if scale > 0.0 {
                for k in 0..n {
                    mat[(g, k)] /= scale;
                }
                rhs[g] /= scale;
            }
        }
        let svd = mat.clone().svd(false, false);
        let sv = &svd.singular_values;
        let rcond = sv.min() / sv.max();
        if !(rcond > MIN_RCOND) {
            let worst = gaps
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 .1 - x.1 .0).total_cmp(&(y.1 .1 - y.1 .0)))
                .map(|(g, _)| g)
                .unwrap_or(0);
            return Err(Error::IllConditionedGap { gap: worst, rcond });
        }
        let lu = mat.lu();
        let sol = lu.solve(&rhs).ok_or(Error::IllConditionedGap { gap: 0, rcond })?;
        sol.iter().copied().collect()
    };

    let q = |x: f64| {
        let (parts, full) = partial_products(&mids, x);
        full + parts.iter().zip(&beta).map(|(p, b)| p * b).sum::<f64>()
    };

    let mut cheb = Vec::with_capacity(set.len());
    for (j, &(a, b)) in set.intervals().iter().enumerate() {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let skip = [Some(2 * j), Some(2 * j + 1)];
        let vals: Vec<f64> = nodes
            .iter()
            .map(|&s| {
                let t = c + r * s;
                q(t).abs() / smooth_root(set, t, skip)
            })
            .collect();
        let mut coeffs = chebyshev_coefficients_first_kind(&vals);
        let tiny = 1e-17 * coeffs[0].abs();
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1].abs() <= tiny {
            coeffs.pop();
        }
        cheb.push(coeffs);
    }
    let mass: f64 = cheb.iter().map(|c| c[0]).sum();

    let mut eq = EquilibriumReal {
        set: set.clone(),
        q_coeffs: power_form(&mids, &beta),
        gap_mids: mids,
        beta,
        robin: 0.0,
        quad_order: m,
        cheb,
        mass_error: (mass - 1.0).abs(),
        frostman_error: f64::INFINITY,
    };
    let x0 = {
        let (a, b) = set
            .intervals()
            .iter()
            .copied()
            .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
            .expect("non-empty set");
        0.5 * (a + b)
    };
    eq.robin = -eq.log_potential(Complex64::new(x0, 0.0)).re;
    eq.frostman_error = eq.frostman_check(16);
    Ok(eq)
}

fn power_form(mids: &[f64], beta: &[f64]) -> Vec<f64> {
    fn mul_linear(p: &[f64], root: f64) -> Vec<f64> {
        let mut out = vec![0.0; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= root * c;
        }
        out
    }
    let n = mids.len();
    let mut full = vec![1.0];
    for &c in mids {
        full = mul_linear(&full, c);
    }
    for (k, &bk) in beta.iter().enumerate().take(n) {
        let mut part = vec![1.0];
        for (i, &c) in mids.iter().enumerate() {
            if i != k {
                part = mul_linear(&part, c);
            }
        }
        for (i, c) in part.iter().enumerate() {
            full[i] += bk * c;
        }
    }
    full
}

/// `ξ + √(ξ − 1)√(ξ + 1)`, the branch with `|w| ≥ 1` (Joukowski inverse).
fn joukowski_inverse(xi: Complex64) -> Complex64 {
    xi + (xi - 1.0).sqrt() * (xi + 1.0).sqrt()
}

impl EquilibriumReal {
    pub fn set(&self) -> &RealIntervalUnion {
        &self.set
    }

    /// Power-basis coefficients of the monic gap polynomial, ascending.
    pub fn q_coeffs(&self) -> &[f64] {
        &self.q_coeffs
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// `|μ(K) − 1|` as measured by the quadrature.
    pub fn mass_error(&self) -> f64 {
        self.mass_error
    }

    /// Largest `|U(x) + robin|` over the probe grid on `K`.
    pub fn frostman_error(&self) -> f64 {
        self.frostman_error
    }

    /// Mass of each component interval.
    pub fn interval_masses(&self) -> Vec<f64> {
        self.cheb.iter().map(|c| c[0]).collect()
    }

    /// The gap polynomial `Q(x)`.
    pub fn q_eval(&self, x: f64) -> f64 {
        let (parts, full) = partial_products(&self.gap_mids, x);
        full + parts.iter().zip(&self.beta).map(|(p, b)| p * b).sum::<f64>()
    }

    /// Equilibrium density at `x` (zero off the set).
    pub fn density(&self, x: f64) -> f64 {
        let Some(j) = self.set.component_of(x) else {
            return 0.0;
        };
        let (a, b) = self.set.intervals()[j];
        if x == a || x == b {
            return f64::INFINITY;
        }
        let r = smooth_root(&self.set, x, [None, None]);
        self.q_eval(x).abs() / (PI * r)
    }

    /// `μ((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &(a, b)) in self.set.intervals().iter().enumerate() {
            let coeffs = &self.cheb[j];
            if x >= b {
                acc += coeffs[0];
            } else if x > a {
                let xi = ((2.0 * x - a - b) / (b - a)).clamp(-1.0, 1.0);
                let theta = xi.acos();
                let mut s = coeffs[0] * (PI - theta);
                for (k, &h) in coeffs.iter().enumerate().skip(1) {
                    s -= h * (k as f64 * theta).sin() / k as f64;
                }
                acc += s / PI;
                break;
            } else {
                break;
            }
        }
        acc
    }

    /// `∫ log(z − t) dμ(t)` with the principal branch, for `Im z ≥ 0`.
    ///
    /// Each interval contributes `h_0 (log r + log(w/2)) − Σ_k h_k w^{−k}/k`,
    /// where `z = c + r (w + 1/w)/2`, `|w| ≥ 1`.
    pub fn log_potential(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (coeffs, &(a, b)) in self.cheb.iter().zip(self.set.intervals()) {
            let c = 0.5 * (a + b);
            let r = 0.5 * (b - a);
            let xi = Complex64::new((z.re - c) / r, z.im / r);
            let w = joukowski_inverse(xi);
            let u = w.inv();
            let mut term = coeffs[0] * (Complex64::from(r.ln()) + (w * 0.5).ln());
            let mut pow = Complex64::new(1.0, 0.0);
            for (k, &h) in coeffs.iter().enumerate().skip(1) {
                pow *= u;
                term -= pow * (h / k as f64);
            }
            acc += term;
        }
        acc
    }

    /// `g_Ω(z)`; zero on `K`.
    pub fn green_eval(&self, z: Complex64) -> f64 {
        if z.im == 0.0 && self.set.contains(z.re) {
            return 0.0;
        }
        let zu = Complex64::new(z.re, z.im.abs());
        (self.log_potential(zu).re + self.robin).max(0.0)
    }

    /// `∫ log(z − t) dμ(t) + robin` for `Im z ≥ 0`. The real part is the Green
    /// function, the imaginary part `∫ arg(z − t) dμ(t) ∈ [0, π]`.
    pub fn green_complex(&self, z: Complex64) -> Result<Complex64> {
        if z.im < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "green_complex needs Im z ≥ 0, got {}",
                z.im
            )));
        }
        let zu = Complex64::new(z.re, z.im.abs());
        Ok(self.log_potential(zu) + self.robin)
    }

    /// Maximum of `|U(x) + robin|` over `per_interval` points of each interval,
    /// including the endpoints.
    pub fn frostman_check(&self, per_interval: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for &(a, b) in self.set.intervals() {
            for i in 0..=per_interval {
                let s = -(PI * i as f64 / per_interval as f64).cos();
                let x = 0.5 * (a + b) + 0.5 * (b - a) * s;
                let u = self.log_potential(Complex64::new(x, 0.0)).re;
                worst = worst.max((u + self.robin).abs());
            }
        }
        worst
    }
}

impl Equilibrium for EquilibriumReal {
    fn robin(&self) -> f64 {
        self.robin
    }

    fn green(&self, z: Complex64) -> f64 {
        self.green_eval(z)
    }

    fn distance(&self, z: Complex64) -> f64 {
        self.set.distance(z)
    }

    fn diameter(&self) -> f64 {
        self.set.diameter()
    }
}
