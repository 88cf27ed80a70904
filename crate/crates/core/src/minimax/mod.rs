//! Monic Chebyshev polynomials `T_n(·, K)` with a certified norm bracket.
//!
//! Real interval unions go through a discrete Remez multiple exchange on
//! clustered grids; closed curves go through Lawson's iteratively reweighted
//! least squares in an Arnoldi-orthogonalized basis.

mod complex;
mod real;

use num_complex::Complex64;
use serde::Serialize;

pub use complex::solve_complex_monic;
pub use real::solve_real_monic;

/// How the real exchange picks its first reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialReference {
    /// Quantiles of the equilibrium measure.
    Equilibrium,
    /// Leja sequence on the grid.
    Leja,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Grid points per interval; `None` means `30·n + 200`.
    pub grid_per_interval: Option<usize>,
    pub refinement_rounds: usize,
    pub max_exchanges: usize,
    pub bracket_tol_real: f64,
    pub bracket_tol_complex: f64,
    pub initial_reference: InitialReference,
    /// Lawson exponents, advanced on stagnation.
    pub irls_exponents: Vec<f64>,
    pub max_irls_iterations: usize,
    pub stagnation_tol: f64,
    pub stagnation_rounds: usize,
    /// Boundary samples per unit of degree for the complex solver.
    pub samples_per_degree: usize,
    pub max_degree: usize,
    /// Capacity of the set, when known, used as a lower bound `κ^n`.
    pub known_capacity: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_per_interval: None,
            refinement_rounds: 3,
            max_exchanges: 200,
            bracket_tol_real: 1e-6,
            bracket_tol_complex: 1e-4,
            initial_reference: InitialReference::Equilibrium,
            irls_exponents: vec![1.0, 1.0, 2.0],
            max_irls_iterations: 20_000,
            stagnation_tol: 1e-12,
            stagnation_rounds: 10,
            samples_per_degree: 8,
            max_degree: 200,
            known_capacity: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> crate::Result<()> {
        let positive = self.refinement_rounds > 0
            && self.max_exchanges > 0
            && self.bracket_tol_real > 0.0
            && self.bracket_tol_complex > 0.0
            && !self.irls_exponents.is_empty()
            && self.irls_exponents.iter().all(|&p| p > 0.0)
            && self.max_irls_iterations > 0
            && self.stagnation_tol > 0.0
            && self.stagnation_rounds > 0
            && self.samples_per_degree > 0
            && self.max_degree > 0
            && self.grid_per_interval.is_none_or(|g| g > 0)
            && self.known_capacity.is_none_or(|c| c > 0.0);
        if positive {
            Ok(())
        } else {
            Err(crate::Error::InvalidArgument("solver options must all be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub exchanges: usize,
    pub refinement_rounds: usize,
    pub irls_iterations: usize,
    pub grid_points: usize,
    /// Relative error of the reconstructed leading coefficient before it was
    /// pinned to its exact value.
    pub lead_reconstruction_error: f64,
}

/// Stored form of the polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// `T(x) = r^n Σ c_k T_k((x − center)/r)` with `r = half_width`.
    /// The reference nodes and levelled error give a barycentric form on
    /// the normalized variable.
    HullChebyshev {
        center: f64,
        half_width: f64,
        coeffs: Vec<f64>,
        reference: Vec<f64>,
        bary_weights: Vec<f64>,
        /// Signed levelled error of the normalized problem.
        level: f64,
    },
    /// `T(z) = ρ^n L (q_n(w) − Σ d_k q_k(w))`, `w = (z − center)/ρ`, where
    /// `w q_k = Σ_{j ≤ k+1} hessenberg[k][j] q_j` and `q_0` is constant.
    Arnoldi {
        center: Complex64,
        scale: f64,
        hessenberg: Vec<Vec<Complex64>>,
        q0: f64,
        lead: f64,
        coeffs: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonicChebyshev {
    pub degree: usize,
    pub representation: Representation,
    /// Power-basis coefficients in the original variable, ascending.
    pub power_coeffs: Vec<Complex64>,
    pub norm_lo: f64,
    pub norm_hi: f64,
    pub log_norm_lo: f64,
    pub log_norm_hi: f64,
    pub extremes: Vec<Complex64>,
    pub stats: SolverStats,
}

impl MonicChebyshev {
    /// Relative width of the norm bracket.
    pub fn bracket(&self) -> f64 {
        1.0 - (self.log_norm_lo - self.log_norm_hi).exp()
    }

    /// Value at a real point through the barycentric form (real solver) or
    /// the Arnoldi recurrence (complex solver). This is the evaluation used
    /// for norms.
    pub fn eval_stable(&self, x: Complex64) -> Complex64 {
        match &self.representation {
            Representation::HullChebyshev { center, half_width, reference, bary_weights, level, .. } => {
                let s = (x - center) / half_width;
                let mut num = Complex64::new(0.0, 0.0);
                let mut den = Complex64::new(0.0, 0.0);
                for (i, (&xi, &w)) in reference.iter().zip(bary_weights).enumerate() {
                    let d = s - xi;
                    if d.norm() == 0.0 {
                        num = Complex64::from(if i % 2 == 0 { 1.0 } else { -1.0 });
                        den = Complex64::from(1.0);
                        break;
                    }
                    let t = w / d;
                    num += if i % 2 == 0 { t } else { -t };
                    den += t;
                }
                num / den * *level * half_width.powi(self.degree as i32)
            }
            Representation::Arnoldi { .. } => eval_poly(self, x),
        }
    }
}

/// Evaluates `T` at `z` in its stored basis: Clenshaw for the hull
/// Chebyshev basis, the Arnoldi recurrence for the orthogonalized basis.
pub fn eval_poly(t: &MonicChebyshev, z: Complex64) -> Complex64 {
    match &t.representation {
        Representation::HullChebyshev { center, half_width, coeffs, .. } => {
            let s = (z - center) / half_width;
            let mut b1 = Complex64::new(0.0, 0.0);
            let mut b2 = Complex64::new(0.0, 0.0);
            for &c in coeffs.iter().skip(1).rev() {
                let b0 = s * b1 * 2.0 - b2 + c;
                b2 = b1;
                b1 = b0;
            }
            let v = s * b1 - b2 + coeffs[0];
            v * half_width.powi(t.degree as i32)
        }
        Representation::Arnoldi { center, scale, hessenberg, q0, lead, coeffs } => {
            let w = (z - center) / scale;
            let n = t.degree;
            let mut q: Vec<Complex64> = Vec::with_capacity(n + 1);
            q.push(Complex64::from(*q0));
            for k in 0..n {
                let mut v = w * q[k];
                for (j, qj) in q.iter().enumerate() {
                    v -= hessenberg[k][j] * qj;
                }
                q.push(v / hessenberg[k][k + 1]);
            }
            let mut acc = q[n];
            for (d, qk) in coeffs.iter().zip(&q) {
                acc -= d * qk;
            }
            acc * *lead * scale.powi(n as i32)
        }
    }
}

/// Power-form evaluation from `power_coeffs` (Horner).
pub fn eval_power(t: &MonicChebyshev, z: Complex64) -> Complex64 {
    t.power_coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Ascending coefficients of `Σ c_k T_k(s)` in powers of `s`.
pub(crate) fn chebyshev_to_power(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut out = vec![0.0; n];
    let mut tkm1 = vec![0.0; n];
    let mut tk = vec![0.0; n];
    tkm1[0] = 1.0;
    if n > 1 {
        tk[1] = 1.0;
    }
    out[0] += coeffs[0];
    if n > 1 {
        out[1] += coeffs[1];
    }
    for &c in coeffs.iter().skip(2) {
        let mut next = vec![0.0; n];
        for i in 0..n - 1 {
            next[i + 1] += 2.0 * tk[i];
        }
        for i in 0..n {
            next[i] -= tkm1[i];
        }
        for i in 0..n {
            out[i] += c * next[i];
        }
        tkm1 = tk;
        tk = next;
    }
    out
}

/// Coefficients of `p((z − center)/scale)` in powers of `z`, given those of
/// `p` in powers of its argument, multiplied by `factor`.
pub(crate) fn recenter(coeffs: &[Complex64], center: Complex64, scale: f64, factor: f64) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    // Horner in the polynomial ring: acc = acc·(z − c)/s + a_k
    for &a in coeffs.iter().rev() {
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            if i + 1 < n {
                next[i + 1] += out[i] / scale;
            }
            next[i] -= out[i] * center / scale;
        }
        next[0] += a;
        out = next;
    }
    out.iter().map(|c| c * factor).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_to_power_t3() {
        let p = chebyshev_to_power(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p, vec![0.0, -3.0, 0.0, 4.0]);
    }

    #[test]
    fn recenter_shift() {
        // p(w) = w², w = (z − 1)/2  →  (z² − 2z + 1)/4
        let c = recenter(
            &[0.0.into(), 0.0.into(), 1.0.into()],
            Complex64::new(1.0, 0.0),
            2.0,
            1.0,
        );
        let want = [0.25, -0.5, 0.25];
        for (a, b) in c.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
    }
}
