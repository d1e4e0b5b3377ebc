//! One function per subcommand, each turning a merged [`RunConfig`] into a
//! result record.

use ombell_core::gaussian::GaussianMetrics;
use ombell_core::model::build_model;
use ombell_core::oracle::{bogoliubov_output_covariance, squeezing_factor};
use ombell_core::spectrum::{filtered_covariance, filtered_covariance_augmented, CovarianceMethod, FilterSpec};
use ombell_core::stability::assess_stability;
use ombell_core::{Error, LinearModel, SystemParams};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{
    BoundaryPanel, BoundaryReport, Comparison, CovarianceRecord, ElementComparison, FilterRecord, MetricsReport,
    OracleReport, SdeReport, StabilityPanel, StabilityRecord, StabilityReport, SweepPanel, SweepReport, Verdict,
};
use crate::parallel;

/// Relative tolerance of the oracle comparison.
pub const ORACLE_GATE: f64 = 0.05;
/// Elements smaller than this in both routes are compared absolutely.
pub const ORACLE_ABSOLUTE_FLOOR: f64 = 1e-3;
/// The oracle is flagged when `C- / (n_m + 1)` falls below this.
pub const QUANTUM_COOPERATIVITY_THRESHOLD: f64 = 100.0;
/// Standard errors allowed between Monte-Carlo and frequency-domain results.
pub const SDE_SIGMA_GATE: f64 = 3.0;

fn covariance(model: &LinearModel, filter: &FilterSpec, method: Option<CovarianceMethod>) -> CliResult<ombell_core::FilteredCovariance> {
    match method.unwrap_or(CovarianceMethod::Quadrature) {
        CovarianceMethod::Quadrature => Ok(filtered_covariance(model, filter)?),
        CovarianceMethod::Augmented => Ok(filtered_covariance_augmented(model, filter)?),
        m => Err(CliError::config(format!("method `{m:?}` cannot evaluate a single point"))),
    }
}

fn stable_model(params: &SystemParams) -> CliResult<LinearModel> {
    let model = build_model(params)?;
    assess_stability(&model)?.require()?;
    Ok(model)
}

pub fn metrics(cfg: &RunConfig) -> CliResult<MetricsReport> {
    let (params, filter) = cfg.base_point()?;
    let model = build_model(&params)?;
    let stability = assess_stability(&model)?;
    stability.require()?;
    let v = covariance(&model, &filter, cfg.method)?;
    Ok(MetricsReport {
        params,
        filter: FilterRecord::new(&filter, &params),
        stability,
        covariance: CovarianceRecord::new(&v),
        metrics: GaussianMetrics::evaluate(&v)?,
        r_oracle: squeezing_factor(&params).ok().map(|s| s.r),
        cooperativity: params.cooperativity(),
    })
}

pub fn sweep(cfg: &RunConfig) -> CliResult<SweepReport> {
    let panels = cfg
        .resolve_panels()?
        .into_iter()
        .map(|panel| {
            let spec = &panel.spec;
            let points = parallel::sweep(spec)?;
            let n2 = spec.axes.get(1).map_or(1, |a| a.points);
            Ok(SweepPanel {
                label: panel.label,
                params: spec.params,
                filter: FilterRecord::new(&spec.filter, &spec.params),
                axes: spec.axes.clone(),
                rows: points.chunks(n2).map(<[_]>::to_vec).collect(),
            })
        })
        .collect::<CliResult<_>>()?;
    Ok(SweepReport { panels })
}

pub fn boundary(cfg: &RunConfig) -> CliResult<BoundaryReport> {
    let panels = cfg
        .resolve_panels()?
        .into_iter()
        .map(|panel| {
            let spec = &panel.spec;
            if spec.axes.len() != 2 {
                return Err(CliError::config(format!("panel `{}`: boundaries need two axes", panel.label)));
            }
            if panel.levels.is_empty() {
                return Err(CliError::config(format!("panel `{}`: no boundary levels", panel.label)));
            }
            let points = parallel::sweep(spec)?;
            let curves = panel
                .levels
                .iter()
                .map(|l| parallel::boundary(spec, &points, l.metric, l.value))
                .collect::<CliResult<_>>()?;
            Ok(BoundaryPanel {
                label: panel.label,
                params: spec.params,
                filter: FilterRecord::new(&spec.filter, &spec.params),
                axes: spec.axes.clone(),
                curves,
            })
        })
        .collect::<CliResult<_>>()?;
    Ok(BoundaryReport { panels })
}

pub fn stability_map(cfg: &RunConfig) -> CliResult<StabilityReport> {
    let panels = cfg
        .resolve_panels()?
        .into_iter()
        .map(|panel| {
            let spec = &panel.spec;
            let [a1, a2] = spec.axes.as_slice() else {
                return Err(CliError::config(format!("panel `{}`: a stability map needs two axes", panel.label)));
            };
            if a1.parameter.is_filter() || a2.parameter.is_filter() {
                return Err(CliError::config(format!("panel `{}`: filter parameters do not affect stability", panel.label)));
            }
            let cells = parallel::stability_map(&spec.params, a1, a2)?
                .into_iter()
                .map(|c| match c.verdict {
                    Ok(v) => StabilityRecord {
                        x1: c.x1,
                        x2: c.x2,
                        stable: Some(v.stable),
                        margin: Some(v.margin),
                        eigenvalue_re: Some(v.spectral_abscissa_eigenvalue.0),
                        eigenvalue_im: Some(v.spectral_abscissa_eigenvalue.1),
                        error: None,
                    },
                    Err(e) => StabilityRecord {
                        x1: c.x1,
                        x2: c.x2,
                        stable: None,
                        margin: None,
                        eigenvalue_re: None,
                        eigenvalue_im: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            Ok(StabilityPanel { label: panel.label, params: spec.params, axes: spec.axes.clone(), cells })
        })
        .collect::<CliResult<_>>()?;
    Ok(StabilityReport { panels })
}

pub fn sde_check(cfg: &RunConfig) -> CliResult<SdeReport> {
    let (params, filter) = cfg.base_point()?;
    let model = stable_model(&params)?;
    let config = cfg.sde_config(&model);
    let est = parallel::sde(&model, &filter, config)?;
    let reference = filtered_covariance(&model, &filter)?;
    let mut z = [[0.0; 4]; 4];
    let mut max_abs_z: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let diff = est.estimate[(i, j)] - reference.matrix[(i, j)];
            let se = est.stderr[(i, j)];
            z[i][j] = if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY.copysign(diff) };
            max_abs_z = max_abs_z.max(z[i][j].abs());
        }
    }
    let rows = |m: &nalgebra::Matrix4<f64>| std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
    Ok(SdeReport {
        params,
        filter: FilterRecord::new(&filter, &params),
        config,
        estimate: rows(&est.estimate),
        stderr: rows(&est.stderr),
        reference: reference.rows(),
        z_scores: z,
        max_abs_z,
        consistent: max_abs_z <= SDE_SIGMA_GATE,
    })
}

/// Elementwise comparison at the oracle gate.
pub fn compare_elements(oracle: &[[f64; 4]; 4], quadrature: &[[f64; 4]; 4]) -> Vec<ElementComparison> {
    let mut out = Vec::with_capacity(16);
    for row in 0..4 {
        for col in 0..4 {
            let (o, q) = (oracle[row][col], quadrature[row][col]);
            let (comparison, deviation, limit) = if o.abs().max(q.abs()) < ORACLE_ABSOLUTE_FLOOR {
                (Comparison::Absolute, (q - o).abs(), ORACLE_ABSOLUTE_FLOOR)
            } else {
                (Comparison::Relative, (q - o).abs() / o.abs(), ORACLE_GATE)
            };
            out.push(ElementComparison { row, col, oracle: o, quadrature: q, comparison, deviation, pass: deviation <= limit });
        }
    }
    out
}

pub fn oracle_compare(cfg: &RunConfig) -> CliResult<OracleReport> {
    let (params, filter) = cfg.base_point()?;
    let cooperativity = params.cooperativity();
    let mut report = OracleReport {
        verdict: Verdict::Skipped,
        reason: None,
        params,
        filter: FilterRecord::new(&filter, &params),
        cooperativity,
        low_cooperativity: cooperativity / (params.n_m + 1.0) < QUANTUM_COOPERATIVITY_THRESHOLD,
        r: None,
        gate: ORACLE_GATE,
        max_deviation: None,
        elements: Vec::new(),
    };
    let prediction = match bogoliubov_output_covariance(&params) {
        Ok(p) => p,
        Err(e @ Error::OracleDomain { .. }) => {
            report.reason = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    let model = stable_model(&params)?;
    let v = filtered_covariance(&model, &filter)?;
    report.r = Some(prediction.r);
    report.elements = compare_elements(&prediction.predicted_covariance.rows(), &v.rows());
    let worst = report
        .elements
        .iter()
        .filter(|e| e.comparison == Comparison::Relative)
        .map(|e| e.deviation)
        .fold(0.0, f64::max);
    report.max_deviation = Some(worst);
    let pass = report.elements.iter().all(|e| e.pass);
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    if report.low_cooperativity {
        report.reason = Some(format!(
            "quantum cooperativity C-/(n_m+1) = {:.3e} is below {QUANTUM_COOPERATIVITY_THRESHOLD}; the oracle assumes it is large",
            cooperativity / (params.n_m + 1.0)
        ));
    }
    Ok(report)
}
