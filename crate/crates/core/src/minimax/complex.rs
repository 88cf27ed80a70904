use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{recenter, MonicChebyshev, Representation, SolverOptions, SolverStats};
use crate::error::{Error, Result};
use crate::geometry::{CurveSource, DiscretizedCurve};
use crate::numeric::golden_max;

const MIN_SAMPLES_PER_CURVE: usize = 64;
const VERIFY_FACTOR: usize = 4;
const EXTREME_TOL: f64 = 1e-9;

/// Roughly uniform samples of a closed curve. Polygon samples include the
/// vertices, where the extremal values usually sit.
fn uniform_samples(c: &DiscretizedCurve, m: usize) -> Result<Vec<Complex64>> {
    match c.source() {
        CurveSource::Polygon { vertices, .. } => {
            let k = vertices.len();
            let sides: Vec<f64> = (0..k).map(|i| (vertices[(i + 1) % k] - vertices[i]).norm()).collect();
            let perimeter: f64 = sides.iter().sum();
            let mut out = Vec::with_capacity(m + k);
            for i in 0..k {
                let q = ((m as f64 * sides[i] / perimeter).round() as usize).max(1);
                let (a, b) = (vertices[i], vertices[(i + 1) % k]);
                out.extend((0..q).map(|j| a + (b - a) * (j as f64 / q as f64)));
            }
            Ok(out)
        }
        _ => Ok(c.resample(m)?.nodes().to_vec()),
    }
}

struct Basis {
    /// `q[k][i]`: basis polynomial `k` at sample `i`.
    q: Vec<Vec<Complex64>>,
    hessenberg: Vec<Vec<Complex64>>,
    q0: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Arnoldi orthogonalization of `1, w, …, w^n` on the samples.
fn arnoldi(w: &[Complex64], n: usize) -> Result<Basis> {
    let m = w.len();
    let q0 = 1.0 / (m as f64).sqrt();
    let mut q = vec![vec![Complex64::from(q0); m]];
    let mut hessenberg = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<Complex64> = w.iter().zip(&q[k]).map(|(a, b)| a * b).collect();
        let mut h = vec![Complex64::new(0.0, 0.0); k + 2];
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for (j, qj) in q.iter().enumerate() {
                let c = dot(qj, &v);
                h[j] += c;
                for (vi, qi) in v.iter_mut().zip(qj) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).re.sqrt();
        if !(norm > 1e-300) {
            return Err(Error::Internal(format!("orthogonal basis broke down at degree {}", k + 1)));
        }
        h[k + 1] = Complex64::from(norm);
        q.push(v.iter().map(|x| x / norm).collect());
        hessenberg.push(h);
    }
    Ok(Basis { q, hessenberg, q0 })
}

/// Values of `q_0 … q_n` at new points through the stored recurrence.
fn basis_at(basis: &Basis, w: Complex64, n: usize) -> Vec<Complex64> {
    let mut q = Vec::with_capacity(n + 1);
    q.push(Complex64::from(basis.q0));
    for k in 0..n {
        let mut v = w * q[k];
        for (j, qj) in q.iter().enumerate() {
            v -= basis.hessenberg[k][j] * qj;
        }
        q.push(v / basis.hessenberg[k][k + 1]);
    }
    q
}

fn residual_at(q: &[Complex64], d: &[Complex64]) -> Complex64 {
    let n = d.len();
    q[n] - d.iter().zip(q).map(|(a, b)| a * b).sum::<Complex64>()
}

/// Weighted least squares `min ‖√ω (q_n − Σ d_k q_k)‖` by Householder QR.
fn weighted_fit(basis: &Basis, weights: &[f64], n: usize) -> Option<Vec<Complex64>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let m = weights.len();
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let a = DMatrix::<Complex64>::from_fn(m, n, |i, k| basis.q[k][i] * sw[i]);
    let b = DVector::<Complex64>::from_fn(m, |i, _| basis.q[n][i] * sw[i]);
    let qr = a.qr();
    let rhs = qr.q().adjoint() * b;
    let sol = qr.r().solve_upper_triangular(&rhs)?;
    Some(sol.iter().copied().collect())
}

struct LawsonFit {
    lo: f64,
    hi: f64,
    d: Vec<Complex64>,
    iterations: usize,
}

/// Lawson iteration on the sample set of `basis`. `lo` is the best weighted
/// least-squares value seen, a lower bound for the discrete minimax value;
/// `hi` and `d` belong to the iterate with the smallest sample maximum.
fn lawson(basis: &Basis, n: usize, opts: &SolverOptions) -> Result<LawsonFit> {
    let m = basis.q[0].len();
    let mut weights = vec![1.0 / m as f64; m];
    let mut stage = 0usize;
    let mut stale = 0usize;
    let mut best_lo: f64 = 0.0;
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut prev_hi = f64::INFINITY;
    let mut iterations = 0;
    let target = 0.25 * opts.bracket_tol_complex;

    while iterations < opts.max_irls_iterations {
        iterations += 1;
        let d = weighted_fit(basis, &weights, n).ok_or_else(|| {
            Error::Internal(format!("weighted least-squares system is singular at degree {n}"))
        })?;
        let res: Vec<f64> = (0..m)
            .map(|i| {
                let qi: Vec<Complex64> = basis.q.iter().map(|col| col[i]).collect();
                residual_at(&qi, &d).norm()
            })
            .collect();
        let lo = weights.iter().zip(&res).map(|(wt, r)| wt * r * r).sum::<f64>().sqrt();
        let hi = res.iter().copied().fold(0.0, f64::max);
        best_lo = best_lo.max(lo);
        if best.as_ref().is_none_or(|b| hi < b.0) {
            best = Some((hi, d));
        }
        let best_hi = best.as_ref().map(|b| b.0).unwrap_or(hi);
        if best_hi - best_lo <= target * best_hi {
            break;
        }
        if (prev_hi - hi).abs() <= opts.stagnation_tol * hi {
            stale += 1;
            if stale >= opts.stagnation_rounds {
                stale = 0;
                stage += 1;
                if stage >= opts.irls_exponents.len() {
                    break;
                }
            }
        } else {
            stale = 0;
        }
        prev_hi = hi;
        let p = opts.irls_exponents[stage];
        let total: f64 = weights.iter().zip(&res).map(|(wt, r)| wt * r.powf(p)).sum();
        if !(total > 0.0) {
            break;
        }
        for (wt, r) in weights.iter_mut().zip(&res) {
            *wt *= r.powf(p) / total;
        }
    }
    let (hi, d) = best.expect("at least one iteration");
    Ok(LawsonFit { lo: best_lo, hi, d, iterations })
}

/// Monic Chebyshev polynomial of degree `n` for the union of the regions
/// bounded by closed curves, by Lawson iteration on boundary samples.
///
/// Local maxima found on a four times finer boundary sampling are polished
/// and added to the sample set for up to `refinement_rounds` re-solves.
/// `norm_lo` is the best weighted least-squares value (a lower bound for the
/// discrete, hence the continuous, minimax value), raised to `κ^n` when the
/// capacity is supplied in the options. `norm_hi` is the largest value seen
/// on the fine sampling and the polished maxima.
pub fn solve_complex_monic(curves: &[DiscretizedCurve], n: usize, opts: &SolverOptions) -> Result<MonicChebyshev> {
    opts.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    if n > opts.max_degree {
        return Err(Error::DegreeTooLarge { degree: n, max: opts.max_degree });
    }
    if curves.is_empty() {
        return Err(Error::InvalidArgument("no curves given".into()));
    }
    if curves.iter().any(|c| !c.closed()) {
        return Err(Error::UnsupportedShape(
            "arcs and segments are degenerate here; use the real-line pipeline (solve_real_monic)".into(),
        ));
    }
    let per = {
        let m = (opts.samples_per_degree * n).max(MIN_SAMPLES_PER_CURVE);
        m + m % 2
    };
    let mut samples = Vec::new();
    for c in curves {
        samples.extend(uniform_samples(c, per)?);
    }
    let count = samples.len() as f64;
    let center: Complex64 = samples.iter().sum::<Complex64>() / count;
    let scale = samples.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let log_scale = n as f64 * scale.ln();
    // verification sampling, one closed sequence per curve
    let verify: Vec<Vec<Complex64>> =
        curves.iter().map(|c| uniform_samples(c, VERIFY_FACTOR * per)).collect::<Result<_>>()?;

    let mut stats = SolverStats::default();
    let mut log_lo = f64::NEG_INFINITY;
    let (basis, d, log_lead, log_hi, extremes) = loop {
        let w: Vec<Complex64> = samples.iter().map(|z| (z - center) / scale).collect();
        let basis = arnoldi(&w, n)?;
        let log_lead: f64 =
            basis.hessenberg.iter().enumerate().map(|(k, h)| h[k + 1].re.ln()).sum::<f64>() - basis.q0.ln();
        let fit = lawson(&basis, n, opts)?;
        stats.irls_iterations += fit.iterations;
        log_lo = log_lo.max(log_lead + fit.lo.ln() + log_scale);

        let value = |z: Complex64| residual_at(&basis_at(&basis, (z - center) / scale, n), &fit.d).norm();
        let mut peaks: Vec<(Complex64, f64)> = Vec::new();
        let mut top = fit.hi;
        for seq in &verify {
            let vals: Vec<f64> = seq.iter().map(|&z| value(z)).collect();
            let m = seq.len();
            for i in 0..m {
                let (l, r) = ((i + m - 1) % m, (i + 1) % m);
                top = top.max(vals[i]);
                if vals[i] >= vals[l] && vals[i] >= vals[r] {
                    // polish along the chords to both neighbours
                    let mut best = (seq[i], vals[i]);
                    for nb in [seq[l], seq[r]] {
                        let (t, v) = golden_max(|t| value(seq[i] + (nb - seq[i]) * t), 0.0, 1.0, 1e-10);
                        if v > best.1 {
                            best = (seq[i] + (nb - seq[i]) * t, v);
                        }
                    }
                    top = top.max(best.1);
                    peaks.push(best);
                }
            }
        }
        let log_hi = log_lead + top.ln() + log_scale;
        let bracket = 1.0 - (log_lo.min(log_hi) - log_hi).exp();
        if bracket <= opts.bracket_tol_complex || stats.refinement_rounds == opts.refinement_rounds {
            let extremes: Vec<Complex64> =
                peaks.iter().filter(|p| p.1 >= top * (1.0 - EXTREME_TOL)).map(|p| p.0).collect();
            break (basis, fit.d, log_lead, log_hi, extremes);
        }
        stats.refinement_rounds += 1;
        samples.extend(peaks.iter().filter(|p| p.1 > fit.hi).map(|p| p.0));
    };
    stats.grid_points = samples.len();

    let log_norm_hi = log_hi;
    let mut log_norm_lo = log_lo;
    if let Some(cap) = opts.known_capacity {
        log_norm_lo = log_norm_lo.max(n as f64 * cap.ln());
    }
    let log_norm_lo = log_norm_lo.min(log_norm_hi);
    let bracket = 1.0 - (log_norm_lo - log_norm_hi).exp();
    if bracket > opts.bracket_tol_complex {
        return Err(Error::NotConverged { bracket, rounds: stats.refinement_rounds });
    }

    // power form: coefficient vectors of q_k in w
    let mut cq: Vec<Vec<Complex64>> = vec![vec![Complex64::from(basis.q0)]];
    for k in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); k + 2];
        for (i, c) in cq[k].iter().enumerate() {
            v[i + 1] += c;
        }
        for (j, cj) in cq.iter().enumerate() {
            for (i, c) in cj.iter().enumerate() {
                v[i] -= basis.hessenberg[k][j] * c;
            }
        }
        let h = basis.hessenberg[k][k + 1];
        cq.push(v.iter().map(|x| x / h).collect());
    }
    let lead = log_lead.exp();
    let mut pw = cq[n].clone();
    for (dk, ck) in d.iter().zip(&cq) {
        for (i, c) in ck.iter().enumerate() {
            pw[i] -= dk * c;
        }
    }
    let pw: Vec<Complex64> = pw.iter().map(|c| c * lead).collect();
    stats.lead_reconstruction_error = (pw[n] - 1.0).norm();
    let power_coeffs = recenter(&pw, center, scale, scale.powi(n as i32));

    Ok(MonicChebyshev {
        degree: n,
        representation: Representation::Arnoldi {
            center,
            scale,
            hessenberg: basis.hessenberg,
            q0: basis.q0,
            lead,
            coeffs: d,
        },
        power_coeffs,
        norm_lo: log_norm_lo.exp(),
        norm_hi: log_norm_hi.exp(),
        log_norm_lo,
        log_norm_hi,
        extremes,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::{eval_poly, eval_power};

    fn circle(c: Complex64, r: f64) -> DiscretizedCurve {
        DiscretizedCurve::disk(c, r, 64).unwrap()
    }

    #[test]
    fn unit_circle_power() {
        let t = solve_complex_monic(&[circle(0.0.into(), 1.0)], 5, &SolverOptions::default()).unwrap();
        assert!((t.norm_hi - 1.0).abs() < 1e-12 && (t.norm_lo - 1.0).abs() < 1e-12);
        for (k, c) in t.power_coeffs.iter().enumerate() {
            let want = if k == 5 { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-12, "{k}: {c}");
        }
        let v = eval_poly(&t, Complex64::i());
        assert!((v - Complex64::i()).norm() < 1e-12);
    }

    #[test]
    fn shifted_circle() {
        let c = Complex64::new(0.5, -1.0);
        let t = solve_complex_monic(&[circle(c, 2.0)], 3, &SolverOptions::default()).unwrap();
        assert!((t.norm_hi - 8.0).abs() < 1e-10);
        // (z − c)³
        let z = Complex64::new(0.3, 0.7);
        assert!((eval_poly(&t, z) - (z - c).powi(3)).norm() < 1e-10);
        assert!((eval_power(&t, z) - (z - c).powi(3)).norm() < 1e-10);
    }

    #[test]
    fn arcs_are_rejected() {
        let arc = DiscretizedCurve::segment_arc(Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), 33).unwrap();
        assert!(matches!(
            solve_complex_monic(&[arc], 3, &SolverOptions::default()),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn arnoldi_evaluation_matches_power_form() {
        let v = [
            Complex64::new(-1.0, -1.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 1.0),
        ];
        let sq = DiscretizedCurve::polygon(&v, 64, 2.0).unwrap();
        let t = solve_complex_monic(&[sq], 12, &SolverOptions::default()).unwrap();
        assert!(t.stats.lead_reconstruction_error < 1e-10);
        for k in 0..20 {
            let z = Complex64::from_polar(1.1, 0.3 * k as f64);
            let a = eval_poly(&t, z);
            let b = eval_power(&t, z);
            assert!((a - b).norm() <= 1e-9 * a.norm());
        }
    }
}
