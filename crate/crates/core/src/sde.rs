//! Monte-Carlo estimate of the filtered-output covariance from time-domain
//! trajectories of the Langevin equation.
//!
//! The state is the Langevin vector with the two one-pole filters appended.
//! Each step applies the exact drift propagator `e^{A dt}` and injects the
//! noise increment half a step in, `e^{A dt/2} L √(N dt) ξ` with
//! `ξ ~ N(0, I)`, which keeps the stationary covariance error at `O(dt²)`.
//! Classical noises of variance `n + ½` per unit rate reproduce the
//! symmetrized quantum moments of a linear system.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix4, SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::expm;
use crate::model::LinearModel;
use crate::spectrum::{augmented_system, FilterSpec};
use crate::stability::assess_stability;
use crate::{Error, Result};

const STATE: usize = 10;
const NOISE: usize = 6;
/// A trajectory whose state exceeds this magnitude is declared divergent.
const BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeConfig {
    pub dt: f64,
    /// Recorded steps per trajectory, after burn-in.
    pub n_steps: u64,
    pub n_trajectories: u64,
    pub burn_in: u64,
    pub seed: u64,
}

impl SdeConfig {
    /// Ten relaxation times of the mechanics, `10 / γ_m`, in steps.
    pub fn default_burn_in(model: &LinearModel, dt: f64) -> u64 {
        (10.0 / model.params.gamma_m / dt).ceil() as u64
    }

    /// Largest step allowed for `model`: `0.01 / max(κ+, κ-, γ_m (n_m + 1))`.
    pub fn max_dt(model: &LinearModel) -> f64 {
        let p = &model.params;
        0.01 / p.kappa_plus.max(p.kappa_minus).max(p.gamma_m * (p.n_m + 1.0))
    }

    pub fn validate(&self, model: &LinearModel) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        let max = Self::max_dt(model);
        if self.dt > max {
            return Err(Error::invalid("dt", alloc::format!("{} exceeds the limit {max:.4e}", self.dt)));
        }
        if self.n_trajectories < 2 {
            return Err(Error::invalid("n_trajectories", "needs at least 2 for error bars"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeEstimate {
    pub estimate: Matrix4<f64>,
    /// Standard error of the mean over trajectories, per element.
    pub stderr: Matrix4<f64>,
    pub config: SdeConfig,
}

/// Precomputed one-step propagators for a (model, filter, config) triple.
#[derive(Debug, Clone)]
pub struct SdeRunner {
    propagator: SMatrix<f64, STATE, STATE>,
    noise: SMatrix<f64, STATE, NOISE>,
    config: SdeConfig,
}

impl SdeRunner {
    pub fn new(model: &LinearModel, filter: &FilterSpec, config: SdeConfig) -> Result<Self> {
        config.validate(model)?;
        assess_stability(model)?.require()?;
        let (a, l) = augmented_system(model, filter);
        let dt = config.dt;
        let propagator = expm(&(&a * dt));
        let half = expm(&(&a * (0.5 * dt)));
        let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            NOISE,
            (0..NOISE).map(|i| (model.input_diffusion[(i, i)] * dt).sqrt()),
        ));
        let noise = half * l * scale;
        Ok(Self {
            propagator: SMatrix::from_fn(|i, j| propagator[(i, j)]),
            noise: SMatrix::from_fn(|i, j| noise[(i, j)]),
            config,
        })
    }

    pub fn config(&self) -> &SdeConfig {
        &self.config
    }

    /// Time-averaged filtered covariance of trajectory `index`. The random
    /// stream depends only on `(seed, index)`.
    pub fn trajectory(&self, index: u64) -> Result<Matrix4<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        let mut x = SVector::<f64, STATE>::zeros();
        let mut xi = SVector::<f64, NOISE>::zeros();
        let mut acc = Matrix4::<f64>::zeros();
        let total = self.config.burn_in + self.config.n_steps;
        for step in 0..total {
            for v in xi.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            x = self.propagator * x + self.noise * xi;
            if step >= self.config.burn_in {
                let f = x.fixed_rows::<4>(6);
                acc += f * f.transpose();
            }
            if step % 1024 == 0 && !x.iter().all(|v| v.is_finite() && v.abs() < BLOW_UP) {
                return Err(Error::Divergence { trajectory: index, step });
            }
        }
        if !x.iter().all(|v| v.is_finite() && v.abs() < BLOW_UP) {
            return Err(Error::Divergence { trajectory: index, step: total });
        }
        Ok(acc / self.config.n_steps as f64)
    }
}

/// Mean and standard error over per-trajectory estimates.
pub fn aggregate(per_trajectory: &[Matrix4<f64>], config: SdeConfig) -> Result<SdeEstimate> {
    let n = per_trajectory.len();
    if n < 2 {
        return Err(Error::invalid("n_trajectories", "needs at least 2 for error bars"));
    }
    let mean = per_trajectory.iter().fold(Matrix4::zeros(), |a, b| a + b) / n as f64;
    let var = per_trajectory
        .iter()
        .fold(Matrix4::<f64>::zeros(), |a, b| a + (b - mean).component_mul(&(b - mean)))
        / (n - 1) as f64;
    Ok(SdeEstimate {
        estimate: mean,
        stderr: var.map(|v| (v / n as f64).sqrt()),
        config,
    })
}

/// Runs every trajectory in order on the calling thread.
pub fn simulate_filtered_covariance(model: &LinearModel, filter: &FilterSpec, config: SdeConfig) -> Result<SdeEstimate> {
    let runner = SdeRunner::new(model, filter, config)?;
    let per: Vec<Matrix4<f64>> = (0..config.n_trajectories)
        .map(|i| runner.trajectory(i))
        .collect::<Result<_>>()?;
    aggregate(&per, config)
}
