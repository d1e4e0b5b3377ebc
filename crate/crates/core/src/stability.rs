//! Asymptotic stability of the drift matrix.

use alloc::vec::Vec;

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::axis::{apply_settings, Axis};
use crate::model::{build_model, LinearModel, SystemParams};
use crate::{Error, Result, C64};

/// Eigenvalues with real part at or above `-STABILITY_TOLERANCE` count as unstable.
pub const STABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Spectral abscissa: the largest real part among the drift eigenvalues.
    pub margin: f64,
    pub spectral_abscissa_eigenvalue: (f64, f64),
}

impl StabilityVerdict {
    pub fn eigenvalue(&self) -> C64 {
        C64::new(self.spectral_abscissa_eigenvalue.0, self.spectral_abscissa_eigenvalue.1)
    }

    /// `Ok(())` when stable, otherwise the matching [`Error::Unstable`].
    pub fn require(&self) -> Result<()> {
        if self.stable {
            Ok(())
        } else {
            Err(Error::Unstable { margin: self.margin })
        }
    }
}

/// Eigenvalues of the drift matrix via a real Schur decomposition. The 2×2
/// diagonal blocks are solved here with a discriminant that stays finite
/// when the pair is (nearly) real and degenerate.
pub fn drift_eigenvalues(drift: &Matrix6<f64>) -> Result<Vec<C64>> {
    let (_, t) = nalgebra::linalg::Schur::try_new(*drift, f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolver)?
        .unpack();
    let mut eig = Vec::with_capacity(6);
    let mut i = 0;
    while i < 6 {
        if i == 5 || t[(i + 1, i)] == 0.0 {
            eig.push(C64::new(t[(i, i)], 0.0));
            i += 1;
            continue;
        }
        let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let disc = half * half + b * c;
        if disc >= 0.0 {
            let root = disc.sqrt();
            eig.push(C64::new(mean + root, 0.0));
            eig.push(C64::new(mean - root, 0.0));
        } else {
            let root = (-disc).sqrt();
            eig.push(C64::new(mean, root));
            eig.push(C64::new(mean, -root));
        }
        i += 2;
    }
    if eig.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::EigenSolver);
    }
    Ok(eig)
}

pub fn assess_stability(model: &LinearModel) -> Result<StabilityVerdict> {
    let eig = drift_eigenvalues(&model.drift)?;
    let lead = eig
        .iter()
        .copied()
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
        .ok_or(Error::EigenSolver)?;
    Ok(StabilityVerdict {
        stable: lead.re < -STABILITY_TOLERANCE,
        margin: lead.re,
        spectral_abscissa_eigenvalue: (lead.re, lead.im),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCell {
    pub x1: f64,
    pub x2: f64,
    pub verdict: Result<StabilityVerdict>,
}

/// Stability verdict on every point of the `axis1 × axis2` grid, axis1 outer.
/// Per-point failures are stored in the cell instead of aborting.
pub fn stability_map(base: &SystemParams, axis1: &Axis, axis2: &Axis) -> Result<Vec<StabilityCell>> {
    let v1 = axis1.values()?;
    let v2 = axis2.values()?;
    let mut cells = Vec::with_capacity(v1.len() * v2.len());
    for &x1 in &v1 {
        for &x2 in &v2 {
            cells.push(StabilityCell {
                x1,
                x2,
                verdict: stability_at(base, &[(axis1.parameter, x1), (axis2.parameter, x2)]),
            });
        }
    }
    Ok(cells)
}

pub(crate) fn stability_at(base: &SystemParams, settings: &[(crate::axis::Parameter, f64)]) -> Result<StabilityVerdict> {
    let (params, _) = apply_settings(base, None, settings)?;
    assess_stability(&build_model(&params)?)
}
