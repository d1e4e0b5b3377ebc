//! Parameter grids of Gaussian metrics and level-crossing boundaries.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::axis::{apply_settings, Axis, Parameter};
use crate::gaussian::GaussianMetrics;
use crate::model::{build_model, SystemParams};
use crate::oracle::squeezing_factor;
use crate::spectrum::{filtered_covariance, filtered_covariance_augmented, CovarianceMethod, FilterSpec};
use crate::stability::assess_stability;
use crate::{Error, Result};

/// Bisection stops once the bracket is this fraction of the axis span.
pub const BOUNDARY_RELATIVE_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    SQMin,
    BMax,
    Purity,
    ROracle,
    Stability,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::SQMin, Metric::BMax, Metric::Purity, Metric::ROracle, Metric::Stability];

    pub fn name(self) -> &'static str {
        match self {
            Metric::SQMin => "s_q_min",
            Metric::BMax => "b_max",
            Metric::Purity => "purity",
            Metric::ROracle => "r_oracle",
            Metric::Stability => "stability",
        }
    }

    fn needs_covariance(self) -> bool {
        matches!(self, Metric::SQMin | Metric::BMax | Metric::Purity)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub params: SystemParams,
    pub filter: FilterSpec,
    /// One or two axes; the first is the outer (row) index.
    pub axes: Vec<Axis>,
    pub metrics: Vec<Metric>,
    /// Also store `log10(s_q_min)`.
    pub log_s_q: bool,
    pub method: CovarianceMethod,
}

impl SweepSpec {
    pub fn new(params: SystemParams, filter: FilterSpec, axes: Vec<Axis>, metrics: Vec<Metric>) -> Result<Self> {
        let spec = Self {
            params,
            filter,
            axes,
            metrics,
            log_s_q: false,
            method: CovarianceMethod::Augmented,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Sweep(format!("expected 1 or 2 axes, got {}", self.axes.len())));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        if self.axes.len() == 2 && self.axes[0].parameter == self.axes[1].parameter {
            return Err(Error::Sweep("both axes set the same parameter".to_string()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Sweep("no metrics requested".to_string()));
        }
        if !matches!(self.method, CovarianceMethod::Augmented | CovarianceMethod::Quadrature) {
            return Err(Error::Sweep("covariance method must be augmented or quadrature".to_string()));
        }
        self.params.validate()
    }

    fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }

    /// Grid coordinates in row-major order (second axis fastest).
    pub fn grid(&self) -> Result<Vec<(f64, Option<f64>)>> {
        self.validate()?;
        let v1 = self.axes[0].values()?;
        let v2 = match self.axes.get(1) {
            Some(a) => a.values()?.into_iter().map(Some).collect(),
            None => alloc::vec![None],
        };
        let mut out = Vec::with_capacity(v1.len() * v2.len());
        for &x1 in &v1 {
            for &x2 in &v2 {
                out.push((x1, x2));
            }
        }
        Ok(out)
    }

    fn settings(&self, x1: f64, x2: Option<f64>) -> Vec<(Parameter, f64)> {
        let mut s = alloc::vec![(self.axes[0].parameter, x1)];
        if let (Some(a), Some(x)) = (self.axes.get(1), x2) {
            s.push((a.parameter, x));
        }
        s
    }
}

/// One evaluated grid point. Metrics that were not requested, or that cannot
/// be evaluated (unstable point, failure), are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x1: f64,
    pub x2: Option<f64>,
    pub stable: Option<bool>,
    pub margin: Option<f64>,
    pub s_q_min: Option<f64>,
    pub log10_s_q_min: Option<f64>,
    pub b_max: Option<f64>,
    pub purity: Option<f64>,
    pub r_oracle: Option<f64>,
    pub simon_separable: Option<bool>,
    pub error: Option<String>,
}

impl SweepPoint {
    fn empty(x1: f64, x2: Option<f64>) -> Self {
        Self {
            x1,
            x2,
            stable: None,
            margin: None,
            s_q_min: None,
            log10_s_q_min: None,
            b_max: None,
            purity: None,
            r_oracle: None,
            simon_separable: None,
            error: None,
        }
    }

    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::SQMin => self.s_q_min,
            Metric::BMax => self.b_max,
            Metric::Purity => self.purity,
            Metric::ROracle => self.r_oracle,
            Metric::Stability => self.margin,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.stable == Some(true)
    }
}

/// Evaluates every requested metric at one grid point. Never fails: problems
/// are reported in [`SweepPoint::error`].
pub fn evaluate_point(spec: &SweepSpec, x1: f64, x2: Option<f64>) -> SweepPoint {
    let mut point = SweepPoint::empty(x1, x2);
    if let Err(e) = fill_point(spec, &mut point) {
        point.error = Some(e.to_string());
    }
    point
}

fn fill_point(spec: &SweepSpec, point: &mut SweepPoint) -> Result<()> {
    let (params, filter) = apply_settings(&spec.params, Some(&spec.filter), &spec.settings(point.x1, point.x2))?;
    let filter = filter.unwrap_or(spec.filter);
    let model = build_model(&params)?;
    let verdict = assess_stability(&model)?;
    point.stable = Some(verdict.stable);
    point.margin = Some(verdict.margin);
    if spec.wants(Metric::ROracle) {
        point.r_oracle = squeezing_factor(&params).ok().map(|s| s.r);
    }
    if !verdict.stable || !spec.metrics.iter().any(|m| m.needs_covariance()) {
        return Ok(());
    }
    let cov = match spec.method {
        CovarianceMethod::Quadrature => filtered_covariance(&model, &filter)?,
        _ => filtered_covariance_augmented(&model, &filter)?,
    };
    let g = GaussianMetrics::evaluate(&cov)?;
    point.simon_separable = Some(g.simon_separable);
    if spec.wants(Metric::SQMin) {
        point.s_q_min = Some(g.s_q_min);
        if spec.log_s_q {
            point.log10_s_q_min = Some(g.s_q_min.log10());
        }
    }
    if spec.wants(Metric::BMax) {
        point.b_max = Some(g.b_max);
    }
    if spec.wants(Metric::Purity) {
        point.purity = Some(g.purity);
    }
    Ok(())
}

/// Evaluates the whole grid in order on the calling thread.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    Ok(spec.grid()?.into_iter().map(|(x1, x2)| evaluate_point(spec, x1, x2)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub x1: f64,
    /// Midpoint of the final bracket along the second axis.
    pub x2: f64,
    /// Final bracket width in the second axis' uniform coordinate.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPoint {
    pub x1: f64,
    pub x2: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub x1: f64,
    pub crossings: Vec<BoundaryPoint>,
    pub excluded: Vec<ExcludedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub level: f64,
    pub metric: Metric,
    /// Ordered by first axis, then second.
    pub points: Vec<BoundaryPoint>,
    /// Widest final bracket among the points.
    pub tolerance: f64,
    /// First-axis values whose row has no crossing.
    pub no_crossing: Vec<f64>,
    pub excluded: Vec<ExcludedPoint>,
}

fn check_boundary_spec(spec: &SweepSpec, metric: Metric) -> Result<()> {
    spec.validate()?;
    if spec.axes.len() != 2 {
        return Err(Error::Sweep("boundary tracing needs two axes".to_string()));
    }
    if metric == Metric::Stability {
        return Err(Error::Sweep("stability is not a continuous metric".to_string()));
    }
    if !spec.wants(metric) {
        return Err(Error::Sweep(format!("metric `{metric}` not requested by the sweep")));
    }
    Ok(())
}

/// Locates every crossing of `level` along one row of an evaluated grid.
///
/// `row` must hold the grid points of first-axis value `x1`, in second-axis
/// order. Unstable or failed points split the row: brackets touching them are
/// not bisected, and the points are listed as excluded. Points exactly on the
/// level count only between values of opposite sign.
pub fn trace_row(spec: &SweepSpec, metric: Metric, level: f64, x1: f64, row: &[SweepPoint]) -> Result<BoundaryRow> {
    check_boundary_spec(spec, metric)?;
    let target = BOUNDARY_RELATIVE_WIDTH * spec.axes[1].coordinate_span();
    let mut out = BoundaryRow { x1, crossings: Vec::new(), excluded: Vec::new() };

    let usable = |p: &SweepPoint| p.is_stable() && p.error.is_none() && p.value(metric).is_some();
    for p in row {
        if !usable(p) {
            out.excluded.push(ExcludedPoint {
                x1,
                x2: p.x2.unwrap_or(f64::NAN),
                reason: p.error.clone().unwrap_or_else(|| "unstable".to_string()),
            });
        }
    }

    let mut last: Option<(&SweepPoint, f64)> = None;
    let mut zeros: Vec<f64> = Vec::new();
    for p in row {
        if !usable(p) {
            last = None;
            zeros.clear();
            continue;
        }
        let f = p.value(metric).unwrap_or(f64::NAN) - level;
        if f == 0.0 {
            if last.is_some() {
                zeros.push(p.x2.unwrap_or(f64::NAN));
            }
            continue;
        }
        if let Some((a, fa)) = last {
            if fa.signum() != f.signum() {
                if zeros.is_empty() {
                    match bisect(spec, metric, level, x1, a, p, fa, target) {
                        Ok(point) => out.crossings.push(point),
                        Err(bad) => out.excluded.push(bad),
                    }
                } else {
                    out.crossings.push(BoundaryPoint { x1, x2: zeros[zeros.len() / 2], width: 0.0 });
                }
            }
        }
        last = Some((p, f));
        zeros.clear();
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    spec: &SweepSpec,
    metric: Metric,
    level: f64,
    x1: f64,
    a: &SweepPoint,
    b: &SweepPoint,
    fa: f64,
    target: f64,
) -> core::result::Result<BoundaryPoint, ExcludedPoint> {
    let axis = &spec.axes[1];
    let usable = |p: &SweepPoint| p.is_stable() && p.error.is_none() && p.value(metric).is_some();
    let mut lo = axis.to_coordinate(a.x2.unwrap_or(f64::NAN));
    let mut hi = axis.to_coordinate(b.x2.unwrap_or(f64::NAN));
    let mut f_lo = fa;
    while hi - lo > target {
        let mid = 0.5 * (lo + hi);
        let p = evaluate_point(spec, x1, Some(axis.from_coordinate(mid)));
        if !usable(&p) {
            return Err(ExcludedPoint {
                x1,
                x2: p.x2.unwrap_or(f64::NAN),
                reason: p.error.unwrap_or_else(|| "unstable".to_string()),
            });
        }
        let fm = p.value(metric).unwrap_or(f64::NAN) - level;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(BoundaryPoint { x1, x2: axis.from_coordinate(0.5 * (lo + hi)), width: hi - lo })
}

pub fn assemble_boundary(metric: Metric, level: f64, rows: Vec<BoundaryRow>) -> BoundaryCurve {
    let mut curve = BoundaryCurve {
        level,
        metric,
        points: Vec::new(),
        tolerance: 0.0,
        no_crossing: Vec::new(),
        excluded: Vec::new(),
    };
    for row in rows {
        if row.crossings.is_empty() {
            curve.no_crossing.push(row.x1);
        }
        for p in &row.crossings {
            curve.tolerance = curve.tolerance.max(p.width);
        }
        curve.points.extend(row.crossings);
        curve.excluded.extend(row.excluded);
    }
    curve
}

/// Splits a row-major grid into rows of the second axis.
pub fn grid_rows<'a>(spec: &SweepSpec, points: &'a [SweepPoint]) -> Result<Vec<(f64, &'a [SweepPoint])>> {
    let n2 = spec.axes.get(1).map_or(1, |a| a.points);
    if !points.len().is_multiple_of(n2) {
        return Err(Error::Sweep("grid length does not match the axes".to_string()));
    }
    Ok(points.chunks(n2).map(|row| (row[0].x1, row)).collect())
}

/// Evaluates the grid and traces the `level` crossing of `metric` along the
/// second axis for every value of the first.
pub fn trace_boundary(spec: &SweepSpec, metric: Metric, level: f64) -> Result<BoundaryCurve> {
    check_boundary_spec(spec, metric)?;
    let points = run_sweep(spec)?;
    let rows = grid_rows(spec, &points)?
        .into_iter()
        .map(|(x1, row)| trace_row(spec, metric, level, x1, row))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_boundary(metric, level, rows))
}
