use num_complex::Complex64;

use super::{chebyshev_to_power, recenter, InitialReference, MonicChebyshev, Representation, SolverOptions, SolverStats};
use crate::equilibrium::{solve_real_equilibrium, DEFAULT_QUAD_ORDER};
use crate::error::{Error, Result};
use crate::geometry::RealIntervalUnion;
use crate::numeric::{bisect, chebyshev_coefficients_first_kind, chebyshev_lobatto, chebyshev_points_first_kind, golden_max};

/// Exchange stops once the grid maximum exceeds the levelled error by less
/// than this relative amount.
const EXCHANGE_TOL: f64 = 1e-13;
const EXTREME_TOL: f64 = 1e-9;
const VERIFY_FACTOR: usize = 10;

/// Grid point with the index of its component.
#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    comp: usize,
}

/// Monic interpolant taking the values `(−1)^i E` on the reference, in
/// barycentric form. `weights` are the barycentric weights scaled by a
/// common factor.
struct Bary {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    level: f64,
}

impl Bary {
    fn new(nodes: Vec<f64>) -> Self {
        let m = nodes.len();
        let logs: Vec<f64> = (0..m)
            .map(|i| -(0..m).filter(|&j| j != i).map(|j| (nodes[i] - nodes[j]).abs().ln()).sum::<f64>())
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let sign = if (m - 1 - i).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * (l - top).exp()
            })
            .collect();
        let s: f64 = weights.iter().enumerate().map(|(i, w)| if i % 2 == 0 { *w } else { -w }).sum();
        // leading coefficient Σ (−1)^i E λ_i = 1
        let level = (-top).exp() / s;
        Self { nodes, weights, level }
    }

    /// `p(x)/E`.
    fn ratio(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, (&xi, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let d = x - xi;
            if d == 0.0 {
                return if i % 2 == 0 { 1.0 } else { -1.0 };
            }
            let t = w / d;
            num += if i % 2 == 0 { t } else { -t };
            den += t;
        }
        num / den
    }
}

fn build_grid(set: &RealIntervalUnion, per: usize) -> Vec<Node> {
    set.intervals()
        .iter()
        .enumerate()
        .flat_map(|(c, &(a, b))| chebyshev_lobatto(a, b, per).into_iter().map(move |x| Node { x, comp: c }))
        .collect()
}

fn nearest(grid: &[Node], x: f64) -> usize {
    let i = grid.partition_point(|n| n.x < x);
    if i == 0 {
        0
    } else if i == grid.len() {
        grid.len() - 1
    } else if (grid[i].x - x).abs() < (x - grid[i - 1].x).abs() {
        i
    } else {
        i - 1
    }
}

fn equilibrium_reference(set: &RealIntervalUnion, grid: &[Node], n: usize) -> Option<Vec<usize>> {
    let eq = solve_real_equilibrium(set, DEFAULT_QUAD_ORDER).ok()?;
    let mut idx = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let q = i as f64 / n as f64;
        let x = if i == 0 {
            -1.0
        } else if i == n {
            1.0
        } else {
            bisect(|x| eq.cdf(x) - q, -1.0, 1.0, 1e-14)?
        };
        idx.push(nearest(grid, x));
    }
    idx.windows(2).all(|w| w[0] < w[1]).then_some(idx)
}

fn leja_reference(grid: &[Node], n: usize) -> Vec<usize> {
    let first = (0..grid.len())
        .max_by(|&a, &b| grid[a].x.abs().total_cmp(&grid[b].x.abs()))
        .expect("non-empty grid");
    let mut score = vec![0.0; grid.len()];
    let mut chosen = vec![first];
    while chosen.len() <= n {
        let last = grid[*chosen.last().unwrap()].x;
        for (s, p) in score.iter_mut().zip(grid) {
            *s += (p.x - last).abs().ln();
        }
        let next = (0..grid.len())
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| score[a].total_cmp(&score[b]))
            .expect("grid larger than degree");
        chosen.push(next);
    }
    chosen.sort_unstable();
    chosen
}

/// One sign run per candidate, keeping the largest `|r|` of each run, then
/// trimmed to `size` points while keeping alternation and the global max.
fn exchange(r: &[f64], grid: &[Node], size: usize) -> Vec<usize> {
    let mut cand: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < r.len() {
        let pos = r[i] >= 0.0;
        let mut best = i;
        let mut j = i;
        while j < r.len() && (r[j] >= 0.0) == pos {
            if r[j].abs() > r[best].abs() {
                best = j;
            }
            j += 1;
        }
        cand.push(best);
        i = j;
    }
    let global = *cand.iter().max_by(|&&a, &&b| r[a].abs().total_cmp(&r[b].abs())).expect("non-empty");

    while cand.len() > size {
        let excess = cand.len() - size;
        let last = cand.len() - 1;
        let mut options: Vec<Vec<usize>> = vec![vec![0], vec![last]];
        if excess >= 2 {
            options.extend((0..last).map(|k| vec![k, k + 1]));
        }
        let score = |rm: &Vec<usize>| {
            let empties = rm.iter().any(|&k| {
                let comp = grid[cand[k]].comp;
                !cand.iter().enumerate().any(|(l, &c)| !rm.contains(&l) && grid[c].comp == comp)
            });
            let loss = rm.iter().map(|&k| r[cand[k]].abs()).fold(0.0, f64::max);
            (empties, loss)
        };
        let pick = options
            .into_iter()
            .filter(|rm| rm.iter().all(|&k| cand[k] != global))
            .min_by(|a, b| {
                let (ea, la) = score(a);
                let (eb, lb) = score(b);
                ea.cmp(&eb).then(la.total_cmp(&lb))
            })
            .expect("a removal that keeps the global maximum always exists");
        for &k in pick.iter().rev() {
            cand.remove(k);
        }
    }
    cand
}

struct RemezOutcome {
    reference: Vec<usize>,
    bary: Bary,
    exchanges: usize,
}

fn remez(grid: &[Node], mut reference: Vec<usize>, max_exchanges: usize) -> RemezOutcome {
    let size = reference.len();
    let mut exchanges = 0;
    loop {
        let bary = Bary::new(reference.iter().map(|&i| grid[i].x).collect());
        let r: Vec<f64> = grid.iter().map(|p| bary.ratio(p.x)).collect();
        let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max - 1.0 <= EXCHANGE_TOL || exchanges >= max_exchanges {
            return RemezOutcome { reference, bary, exchanges };
        }
        let next = exchange(&r, grid, size);
        if next == reference {
            return RemezOutcome { reference, bary, exchanges };
        }
        reference = next;
        exchanges += 1;
    }
}

/// Local maxima of `|p/E|` over each component, polished by golden section
/// between grid neighbours.
fn polish(grid: &[Node], bary: &Bary) -> Vec<(f64, f64)> {
    let r: Vec<f64> = grid.iter().map(|p| bary.ratio(p.x).abs()).collect();
    let mut out = Vec::new();
    for i in 0..grid.len() {
        let left = (i > 0 && grid[i - 1].comp == grid[i].comp).then(|| i - 1);
        let right = (i + 1 < grid.len() && grid[i + 1].comp == grid[i].comp).then_some(i + 1);
        let is_max = left.is_none_or(|l| r[i] >= r[l]) && right.is_none_or(|k| r[i] >= r[k]);
        if !is_max {
            continue;
        }
        let a = grid[left.unwrap_or(i)].x;
        let b = grid[right.unwrap_or(i)].x;
        if b > a {
            let (x, v) = golden_max(|x| bary.ratio(x).abs(), a, b, 1e-10 * (b - a));
            if v >= r[i] {
                out.push((x, v));
                continue;
            }
        }
        out.push((grid[i].x, r[i]));
    }
    out
}

fn merge_points(grid: &[Node], extra: &[(f64, f64)], set: &RealIntervalUnion) -> Vec<Node> {
    // existing nodes are kept bit-for-bit so reference points can be found again
    let mut all: Vec<Node> = grid.to_vec();
    for &(x, _) in extra {
        let i = grid.partition_point(|p| p.x < x);
        let close = [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < grid.len())
            .any(|j| (grid[j].x - x).abs() <= 1e-15);
        if let (false, Some(comp)) = (close, set.component_of(x)) {
            all.push(Node { x, comp });
        }
    }
    all.sort_by(|a, b| a.x.total_cmp(&b.x));
    all.dedup_by(|a, b| a.x == b.x);
    all
}

/// Monic Chebyshev polynomial of degree `n` on a finite union of intervals.
///
/// The problem is solved on the affine image of the set in `[−1, 1]`, by
/// multiple exchange on per-interval Chebyshev–Lobatto grids refined with
/// polished extrema. `norm_lo` is the levelled error of the final reference
/// (a lower bound for the continuous optimum), `norm_hi` the largest value
/// found over polished extrema and a verification grid ten times finer.
pub fn solve_real_monic(set: &RealIntervalUnion, n: usize, opts: &SolverOptions) -> Result<MonicChebyshev> {
    opts.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    if n > opts.max_degree {
        return Err(Error::DegreeTooLarge { degree: n, max: opts.max_degree });
    }
    let (k, map) = set.normalize()?;
    let inv = map.inverse();
    let (center, half_width) = (inv.shift, inv.scale);
    let per = opts.grid_per_interval.unwrap_or(30 * n + 200).max(n + 2);

    let mut grid = build_grid(&k, per);
    let mut reference = match opts.initial_reference {
        InitialReference::Equilibrium => equilibrium_reference(&k, &grid, n),
        InitialReference::Leja => None,
    }
    .unwrap_or_else(|| leja_reference(&grid, n));

    let mut stats = SolverStats::default();
    let (bary, extrema) = loop {
        let out = remez(&grid, reference, opts.max_exchanges);
        stats.exchanges += out.exchanges;
        let extrema = polish(&grid, &out.bary);
        if stats.refinement_rounds == opts.refinement_rounds {
            break (out.bary, extrema);
        }
        stats.refinement_rounds += 1;
        let ref_x: Vec<f64> = out.reference.iter().map(|&i| grid[i].x).collect();
        grid = merge_points(&grid, &extrema, &k);
        reference = ref_x.iter().map(|&x| grid.partition_point(|p| p.x < x)).collect();
    };
    stats.grid_points = grid.len();

    let verify = build_grid(&k, VERIFY_FACTOR * per);
    let peak = extrema
        .iter()
        .map(|e| e.1)
        .chain(verify.iter().map(|p| bary.ratio(p.x).abs()))
        .fold(1.0f64, f64::max);
    let log_level = bary.level.abs().ln();
    let log_scale = n as f64 * half_width.ln();
    let log_norm_lo = log_level + log_scale;
    let log_norm_hi = log_norm_lo + peak.ln();
    let bracket = 1.0 - 1.0 / peak;
    if bracket > opts.bracket_tol_real {
        return Err(Error::NotConverged { bracket, rounds: stats.refinement_rounds });
    }

    let extremes: Vec<Complex64> = extrema
        .iter()
        .filter(|e| e.1 >= peak * (1.0 - EXTREME_TOL))
        .map(|e| Complex64::new(center + half_width * e.0, 0.0))
        .collect();

    // hull Chebyshev coefficients of the normalized polynomial
    let pts = chebyshev_points_first_kind(n + 1);
    let vals: Vec<f64> = pts.iter().map(|&s| bary.level * bary.ratio(s)).collect();
    let mut coeffs = chebyshev_coefficients_first_kind(&vals);
    let lead = 2f64.powi(1 - n as i32);
    stats.lead_reconstruction_error = (coeffs[n] - lead).abs() / lead;
    coeffs[n] = lead;

    let power_s: Vec<Complex64> = chebyshev_to_power(&coeffs).into_iter().map(Complex64::from).collect();
    let power_coeffs = recenter(&power_s, Complex64::from(center), half_width, half_width.powi(n as i32));

    Ok(MonicChebyshev {
        degree: n,
        representation: Representation::HullChebyshev {
            center,
            half_width,
            coeffs,
            reference: bary.nodes.clone(),
            bary_weights: bary.weights.clone(),
            level: bary.level,
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
