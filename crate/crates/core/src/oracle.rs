//! Closed-form high-cooperativity prediction of the output state.
//!
//! For `C- ≫ 1` the filtered outputs at the sideband frequencies are a
//! two-mode squeezed vacuum with squeezing factor `r`, plus a small admixture
//! `η±` of the mechanical input noise.

use nalgebra::Matrix4;

use crate::model::SystemParams;
use crate::spectrum::{CovarianceMethod, FilteredCovariance, Provenance};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingFactor {
    pub r: f64,
    pub sinh_r: f64,
    pub cosh_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovPrediction {
    pub r: f64,
    pub sinh_r: f64,
    pub cosh_r: f64,
    pub eta_plus: C64,
    pub eta_minus: C64,
    /// `C- = 4 G-² / (κ- γ_m)`; the prediction assumes it is large.
    pub cooperativity: f64,
    pub predicted_covariance: FilteredCovariance,
}

/// `κ+ G-² − κ- G+²`, which must be positive.
pub fn oracle_denominator(params: &SystemParams) -> f64 {
    params.kappa_plus * params.g_minus * params.g_minus - params.kappa_minus * params.g_plus * params.g_plus
}

fn checked_denominator(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    let den = oracle_denominator(params);
    if !(den > 0.0) {
        return Err(Error::OracleDomain { denominator: den });
    }
    Ok(den)
}

pub fn squeezing_factor(params: &SystemParams) -> Result<SqueezingFactor> {
    let den = checked_denominator(params)?;
    let p = params;
    let sinh_r = 2.0 * p.g_minus * p.g_plus * (p.kappa_minus * p.kappa_plus).sqrt() / den;
    let cosh_r =
        (p.g_minus * p.g_minus * p.kappa_plus + p.g_plus * p.g_plus * p.kappa_minus) / den;
    Ok(SqueezingFactor {
        r: sinh_r.asinh(),
        sinh_r,
        cosh_r,
    })
}

/// Weights `(η+, η-)` of the mechanical input noise in the two outputs.
pub fn eta_coefficients(params: &SystemParams) -> Result<(C64, C64)> {
    let den = checked_denominator(params)?;
    let p = params;
    let eta_plus = C64::new(0.0, -2.0 * (p.gamma_m * p.kappa_plus).sqrt() * p.g_plus * p.kappa_minus / den);
    let eta_minus = C64::new(0.0, -2.0 * (p.gamma_m * p.kappa_minus).sqrt() * p.g_minus * p.kappa_plus / den);
    Ok((eta_plus, eta_minus))
}

/// Quadrature covariance of the Bogoliubov output modes with vacuum cavity
/// inputs and a thermal mechanical input of occupation `n_m`.
pub fn bogoliubov_output_covariance(params: &SystemParams) -> Result<BogoliubovPrediction> {
    let sq = squeezing_factor(params)?;
    let (eta_plus, eta_minus) = eta_coefficients(params)?;
    let thermal = params.n_m + 0.5;
    let (sh, ch) = (sq.sinh_r, sq.cosh_r);

    let squeeze = 0.5 * (ch * ch + sh * sh);
    let a = squeeze + eta_plus.norm_sqr() * thermal;
    let b = squeeze + eta_minus.norm_sqr() * thermal;
    let cross = eta_plus * eta_minus * thermal;
    let c = cross.re - sh * ch;
    let d = cross.im;

    #[rustfmt::skip]
    let m = Matrix4::new(
        a, 0.0, c, d,
        0.0, a, d, -c,
        c, d, b, 0.0,
        d, -c, 0.0, b,
    );
    let predicted_covariance = FilteredCovariance::new(m)?.with_provenance(Provenance {
        params: *params,
        filter: None,
        method: CovarianceMethod::Oracle,
        error_estimate: None,
    });
    Ok(BogoliubovPrediction {
        r: sq.r,
        sinh_r: sh,
        cosh_r: ch,
        eta_plus,
        eta_minus,
        cooperativity: params.cooperativity(),
        predicted_covariance,
    })
}
