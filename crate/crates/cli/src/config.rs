//! Experiment configuration: JSON schema, parsing and set construction.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use widom_core::geometry::{
    build_cantor, CantorSpec, DiscretizedCurve, RealIntervalUnion, Shape, ShapeSet, SOLVER_GRADING,
};
use widom_core::harness::SeriesSet;

/// Nodes per closed curve or arc when the config does not say.
pub const DEFAULT_NODES: usize = 256;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub set_id: Option<String>,
    /// Required by every task except `verify-theorems`.
    #[serde(default)]
    pub set: Option<SetDescriptor>,
    pub task: Task,
    #[serde(default)]
    pub params: TaskParams,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Capacity,
    Green,
    Levin,
    Cheb,
    Series,
    VerifyTheorems,
    Diagnostics,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Capacity => "capacity",
            Task::Green => "green",
            Task::Levin => "levin",
            Task::Cheb => "cheb",
            Task::Series => "series",
            Task::VerifyTheorems => "verify-theorems",
            Task::Diagnostics => "diagnostics",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetDescriptor {
    IntervalUnion {
        intervals: Vec<[f64; 2]>,
    },
    Cantor {
        #[serde(default = "third")]
        ratio: f64,
        depth: u32,
        #[serde(default = "unit")]
        base: [f64; 2],
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    CurveFile {
        path: PathBuf,
        #[serde(default = "yes")]
        closed: bool,
    },
    Mixed {
        components: Vec<Component>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Component {
    Segment { a: [f64; 2], b: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

fn third() -> f64 {
    1.0 / 3.0
}

fn unit() -> [f64; 2] {
    [0.0, 1.0]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskParams {
    /// Degree for `cheb`.
    pub n: Option<usize>,
    /// Degree range for `series` and the suites.
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    /// Explicit degree list; overrides the range.
    pub n_list: Option<Vec<usize>>,
    /// Nodes per curve for the boundary solver.
    pub nodes: Option<usize>,
    /// Evaluation points for `green`.
    pub points: Option<Vec<[f64; 2]>>,
    /// Smallest degree entering the growth fits.
    pub window: Option<usize>,
    /// Number of log-spaced crosscut heights for `levin`.
    pub heights: Option<usize>,
    /// Suite name for `verify-theorems`.
    pub suite: Option<String>,
    pub bracket_tol: Option<f64>,
    /// Exponent `k` of the level-curve integral.
    pub k: Option<u32>,
    /// Perfectness sample grid.
    pub centers: Option<Vec<f64>>,
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

/// Parses and validates a config. Relative curve-file paths are resolved
/// against the config's directory.
pub fn parse(text: &str, origin: &Path) -> Result<ExperimentConfig, String> {
    let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| format!("{}: {e}", origin.display()))?;
    let base = origin.parent().unwrap_or(Path::new("."));
    if let Some(SetDescriptor::CurveFile { path, .. }) = &mut cfg.set {
        if path.is_relative() {
            *path = base.join(&*path);
        }
        if !path.is_file() {
            return Err(format!("set.path: curve file {} does not exist", path.display()));
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), String> {
    let p = &cfg.params;
    if cfg.task != Task::VerifyTheorems && cfg.set.is_none() {
        return Err(format!("set: required for task {}", cfg.task.name()));
    }
    if cfg.task == Task::VerifyTheorems && p.suite.is_none() {
        return Err("params.suite: required for task verify-theorems".into());
    }
    if cfg.task == Task::Cheb && p.n.is_none_or(|n| n == 0) {
        return Err("params.n: a positive degree is required for task cheb".into());
    }
    if cfg.task == Task::Green && p.points.as_ref().is_none_or(|v| v.is_empty()) {
        return Err("params.points: at least one point is required for task green".into());
    }
    if let Some(list) = &p.n_list {
        if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) || list[0] == 0 {
            return Err("params.n_list: must be a non-empty, strictly increasing list of positive degrees".into());
        }
    }
    if let (Some(a), Some(b)) = (p.n_min, p.n_max) {
        if a == 0 || a > b {
            return Err(format!("params.n_min/n_max: invalid range {a}..{b}"));
        }
    }
    if p.nodes.is_some_and(|m| m < 32) {
        return Err("params.nodes: at least 32 nodes per curve are required".into());
    }
    if p.bracket_tol.is_some_and(|t| t.is_nan() || t <= 0.0) {
        return Err("params.bracket_tol: must be positive".into());
    }
    if p.heights == Some(0) {
        return Err("params.heights: must be positive".into());
    }
    Ok(())
}

fn point(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl TaskParams {
    pub fn nodes(&self) -> usize {
        self.nodes.unwrap_or(DEFAULT_NODES)
    }

    /// Degree list from `n_list`, or `n_min..=n_max` with the given defaults.
    pub fn degrees(&self, lo: usize, hi: usize) -> Vec<usize> {
        match &self.n_list {
            Some(list) => list.clone(),
            None => (self.n_min.unwrap_or(lo)..=self.n_max.unwrap_or(hi)).collect(),
        }
    }
}

/// Builds the set a config describes. Sets on the real line go to the
/// interval pipeline, everything else to the boundary pipeline.
pub fn build_set(desc: &SetDescriptor, nodes: usize) -> Result<SeriesSet, String> {
    let err = |e: widom_core::Error| format!("set: {e}");
    Ok(match desc {
        SetDescriptor::IntervalUnion { intervals } => {
            SeriesSet::Real(RealIntervalUnion::new(intervals.iter().map(|i| (i[0], i[1])).collect()).map_err(err)?)
        }
        SetDescriptor::Cantor { ratio, depth, base } => SeriesSet::Real(
            build_cantor(&CantorSpec { ratio: *ratio, depth: *depth, base: (base[0], base[1]) }).map_err(err)?,
        ),
        SetDescriptor::Disk { center, radius } => {
            SeriesSet::Curves(vec![DiscretizedCurve::disk(point(*center), *radius, nodes).map_err(err)?])
        }
        SetDescriptor::Polygon { vertices } => {
            let v: Vec<Complex64> = vertices.iter().copied().map(point).collect();
            SeriesSet::Curves(vec![DiscretizedCurve::polygon(&v, nodes, SOLVER_GRADING).map_err(err)?])
        }
        SetDescriptor::CurveFile { path, closed } => {
            let pts = read_curve_file(path)?;
            SeriesSet::Curves(vec![DiscretizedCurve::from_samples(pts, *closed).map_err(err)?])
        }
        SetDescriptor::Mixed { components } => {
            let shapes: Vec<Shape> = components
                .iter()
                .map(|c| match c {
                    Component::Segment { a, b } => Shape::Segment { a: point(*a), b: point(*b) },
                    Component::Disk { center, radius } => Shape::Disk { center: point(*center), radius: *radius },
                    Component::Polygon { vertices } => {
                        Shape::Polygon { vertices: vertices.iter().copied().map(point).collect() }
                    }
                })
                .collect();
            let set = ShapeSet::new(shapes).map_err(err)?;
            if set.is_real() {
                SeriesSet::Real(set.to_real().map_err(err)?)
            } else {
                SeriesSet::Curves(set.to_curves(nodes, SOLVER_GRADING).map_err(err)?)
            }
        }
    })
}

/// Two numeric columns `x,y` per line; `#` starts a comment.
fn read_curve_file(path: &Path) -> Result<Vec<Complex64>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("set.path: {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("set.path: {}: {e}", path.display()))?;
        let parse = |j: usize| -> Result<f64, String> {
            rec.get(j)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("set.path: {} record {}: expected two numbers", path.display(), line + 1))
        };
        out.push(Complex64::new(parse(0)?, parse(1)?));
    }
    Ok(out)
}
