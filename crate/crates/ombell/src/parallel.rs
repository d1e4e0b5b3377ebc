//! Rayon drivers for the core routines. Results come back in grid or
//! trajectory order whatever the scheduling, so outputs are reproducible
//! across thread counts.

use ombell_core::axis::{apply_settings, Axis};
use ombell_core::model::{build_model, LinearModel, SystemParams};
use ombell_core::sde::{aggregate, SdeConfig, SdeEstimate, SdeRunner};
use ombell_core::spectrum::FilterSpec;
use ombell_core::stability::{assess_stability, StabilityCell};
use ombell_core::sweep::{assemble_boundary, evaluate_point, grid_rows, trace_row, BoundaryCurve, Metric, SweepPoint, SweepSpec};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// A pool of `threads` workers; `None` or 0 lets rayon pick.
pub fn pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

pub fn sweep(spec: &SweepSpec) -> CliResult<Vec<SweepPoint>> {
    let grid = spec.grid()?;
    Ok(grid.par_iter().map(|&(x1, x2)| evaluate_point(spec, x1, x2)).collect())
}

/// Traces `level` along every row of an already evaluated grid.
pub fn boundary(spec: &SweepSpec, points: &[SweepPoint], metric: Metric, level: f64) -> CliResult<BoundaryCurve> {
    let rows = grid_rows(spec, points)?;
    let traced = rows
        .par_iter()
        .map(|&(x1, row)| trace_row(spec, metric, level, x1, row))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_boundary(metric, level, traced))
}

pub fn stability_map(base: &SystemParams, axis1: &Axis, axis2: &Axis) -> CliResult<Vec<StabilityCell>> {
    let v1 = axis1.values()?;
    let v2 = axis2.values()?;
    let grid: Vec<(f64, f64)> = v1.iter().flat_map(|&a| v2.iter().map(move |&b| (a, b))).collect();
    Ok(grid
        .par_iter()
        .map(|&(x1, x2)| StabilityCell {
            x1,
            x2,
            verdict: apply_settings(base, None, &[(axis1.parameter, x1), (axis2.parameter, x2)])
                .and_then(|(p, _)| build_model(&p))
                .and_then(|m| assess_stability(&m)),
        })
        .collect())
}

pub fn sde(model: &LinearModel, filter: &FilterSpec, config: SdeConfig) -> CliResult<SdeEstimate> {
    let runner = SdeRunner::new(model, filter, config)?;
    let per = (0..config.n_trajectories)
        .into_par_iter()
        .map(|i| runner.trajectory(i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(&per, config)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ombell_core::axis::{Parameter, Spacing};
    use ombell_core::stability::stability_map as serial_map;
    use ombell_core::sweep::{run_sweep, trace_boundary};

    fn spec() -> SweepSpec {
        let p = SystemParams::default();
        let axes = vec![
            Axis::new(Parameter::GRatio, Spacing::Linear, 0.2, 0.3, 3).unwrap(),
            Axis::new(Parameter::GMinus, Spacing::Log, 1e-2, 0.3, 6).unwrap(),
        ];
        SweepSpec::new(p, FilterSpec::symmetric(1e4, &p).unwrap(), axes, vec![Metric::BMax, Metric::SQMin]).unwrap()
    }

    #[test]
    fn parallel_matches_serial_for_any_thread_count() {
        let s = spec();
        let serial = run_sweep(&s).unwrap();
        let serial_curve = trace_boundary(&s, Metric::BMax, 2.0).unwrap();
        for threads in [1, 3] {
            let pts = pool(Some(threads)).unwrap().install(|| sweep(&s)).unwrap();
            assert_eq!(pts, serial);
            let curve = pool(Some(threads)).unwrap().install(|| boundary(&s, &pts, Metric::BMax, 2.0)).unwrap();
            assert_eq!(curve, serial_curve);
        }
    }

    #[test]
    fn stability_map_matches_serial() {
        let a1 = Axis::new(Parameter::GRatio, Spacing::Linear, 0.0, 2.0, 5).unwrap();
        let a2 = Axis::new(Parameter::GMinus, Spacing::Linear, 0.005, 0.3, 4).unwrap();
        let p = SystemParams::default();
        assert_eq!(stability_map(&p, &a1, &a2).unwrap(), serial_map(&p, &a1, &a2).unwrap());
    }

    #[test]
    fn sde_matches_serial() {
        let p = SystemParams { g_plus: 0.0, g_minus: 0.0, ..Default::default() };
        let m = build_model(&p).unwrap();
        let f = FilterSpec::symmetric(2.0, &p).unwrap();
        let cfg = SdeConfig { dt: 0.05, n_steps: 300, n_trajectories: 5, burn_in: 50, seed: 9 };
        let serial = ombell_core::sde::simulate_filtered_covariance(&m, &f, cfg).unwrap();
        let par = pool(Some(4)).unwrap().install(|| sde(&m, &f, cfg)).unwrap();
        assert_eq!(par.estimate, serial.estimate);
        assert_eq!(par.stderr, serial.stderr);
    }
}
