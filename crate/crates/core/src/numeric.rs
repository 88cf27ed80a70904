//! Small numerical kernels shared by the solvers: adaptive quadrature,
//! bracketed root finding, 1-D maximization and periodic interpolation.

use std::f64::consts::PI;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// Refinement stops once the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)` or after `max_segments` subdivisions.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    integrate_adaptive_with_breaks(f, &[a, b], rel_tol, abs_tol)
}

/// Same as [`integrate_adaptive`] with mandatory breakpoints (sorted).
pub fn integrate_adaptive_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    const MAX_SEGMENTS: usize = 4000;
    let mut segs: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || segs.len() >= MAX_SEGMENTS {
            return total;
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty segment list");
        let (a, b, _, _) = segs.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // cannot split further in floating point
            let (v, _) = gk15(&f, a, b);
            segs.push((a, b, v, 0.0));
            continue;
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        segs.push((a, m, v1, e1));
        segs.push((m, b, v2, e2));
    }
}

/// Bisection for a sign change of `f` on `[a, b]`. Returns `None` when the
/// endpoints do not bracket a root.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m <= a.min(b) || m >= a.max(b) {
            return Some(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Maximizes a unimodal-on-bracket function by golden-section search,
/// returning `(argmax, max)`. The bracket endpoints are also considered.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // the iteration cap guards against tolerances below the spacing of floats
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Barycentric trigonometric interpolation of equispaced periodic samples.
///
/// Samples are taken at `t_j = 2π (j + shift) / N`. Works for even and odd
/// `N` (cotangent and cosecant kernels respectively).
pub fn trig_interp<T>(values: &[T], shift: f64, t: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T>,
{
    let n = values.len();
    let h = 2.0 * PI / n as f64;
    let even = n.is_multiple_of(2);
    let mut num: Option<T> = None;
    let mut den = 0.0;
    for (j, &v) in values.iter().enumerate() {
        let d = 0.5 * (t - (j as f64 + shift) * h);
        let s = d.sin();
        if s.abs() < 1e-15 {
            return v;
        }
        let k = if even { d.cos() / s } else { 1.0 / s };
        let k = if j % 2 == 0 { k } else { -k };
        num = Some(match num {
            None => v * k,
            Some(acc) => acc + v * k,
        });
        den += k;
    }
    num.expect("at least one sample") / den
}

/// Chebyshev coefficients of the interpolant through values at the
/// first-kind points `s_k = cos((2k+1)π/(2M))`, `k = 0..M`.
pub fn chebyshev_coefficients_first_kind(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut coeffs = vec![0.0; m];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &v) in values.iter().enumerate() {
            let theta = PI * (2 * i + 1) as f64 / (2 * m) as f64;
            acc += v * (k as f64 * theta).cos();
        }
        *c = 2.0 * acc / m as f64;
    }
    coeffs[0] *= 0.5;
    coeffs
}

/// First-kind Chebyshev points on `[-1, 1]` (descending order).
pub fn chebyshev_points_first_kind(m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| (PI * (2 * i + 1) as f64 / (2 * m) as f64).cos())
        .collect()
}

/// Chebyshev extreme (Lobatto) points on `[a, b]`, ascending, endpoints included.
pub fn chebyshev_lobatto(a: f64, b: f64, m: usize) -> Vec<f64> {
    assert!(m >= 2);
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut pts: Vec<f64> = (0..m)
        .map(|i| c - r * (PI * i as f64 / (m - 1) as f64).cos())
        .collect();
    pts[0] = a;
    pts[m - 1] = b;
    pts
}

/// Ordinary least squares line `y ≈ intercept + slope x`; returns
/// `(intercept, slope)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_integrates_log_singularity() {
        // ∫_0^1 ln x dx = -1
        let v = integrate_adaptive(|x: f64| x.ln(), 0.0, 1.0, 1e-12, 1e-14);
        assert!((v + 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn golden_finds_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn trig_interp_is_exact_for_low_modes() {
        for n in [16usize, 17] {
            let shift = 0.5;
            let f = |t: f64| 1.0 + (2.0 * t).cos() - 0.5 * (3.0 * t).sin();
            let vals: Vec<f64> = (0..n)
                .map(|j| f(2.0 * PI * (j as f64 + shift) / n as f64))
                .collect();
            for t in [0.1, 1.3, 4.0] {
                assert!((trig_interp(&vals, shift, t) - f(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chebyshev_coefficients_recover_t3() {
        let pts = chebyshev_points_first_kind(16);
        let vals: Vec<f64> = pts.iter().map(|s| 4.0 * s * s * s - 3.0 * s + 0.5).collect();
        let c = chebyshev_coefficients_first_kind(&vals);
        assert!((c[0] - 0.5).abs() < 1e-14);
        assert!((c[3] - 1.0).abs() < 1e-14);
        assert!(c[1].abs() < 1e-14 && c[2].abs() < 1e-14 && c[5].abs() < 1e-14);
    }
}
