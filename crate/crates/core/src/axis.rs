//! Named parameter axes for grids and sweeps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::SystemParams;
use crate::spectrum::FilterSpec;
use crate::{Error, Result};

/// A settable scalar of the system or the filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    KappaPlus,
    KappaMinus,
    GammaM,
    /// Sets `γ_m = ω_m / Q`.
    QualityFactor,
    GPlus,
    GMinus,
    /// Sets `G+ = ratio · G-`; applied after every other setting.
    GRatio,
    DeltaPlus,
    DeltaMinus,
    #[serde(rename = "n_m")]
    NM,
    /// Filter bandwidth label, `τ = ε / ω_m`.
    Epsilon,
    /// Filter centre of the `+` port in the lab convention (symmetric point −ω_m).
    OmegaPlus,
    /// Filter centre of the `-` port in the lab convention (symmetric point +ω_m).
    OmegaMinus,
}

impl Parameter {
    pub const ALL: [Parameter; 13] = [
        Parameter::KappaPlus,
        Parameter::KappaMinus,
        Parameter::GammaM,
        Parameter::QualityFactor,
        Parameter::GPlus,
        Parameter::GMinus,
        Parameter::GRatio,
        Parameter::DeltaPlus,
        Parameter::DeltaMinus,
        Parameter::NM,
        Parameter::Epsilon,
        Parameter::OmegaPlus,
        Parameter::OmegaMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::KappaPlus => "kappa_plus",
            Parameter::KappaMinus => "kappa_minus",
            Parameter::GammaM => "gamma_m",
            Parameter::QualityFactor => "quality_factor",
            Parameter::GPlus => "g_plus",
            Parameter::GMinus => "g_minus",
            Parameter::GRatio => "g_ratio",
            Parameter::DeltaPlus => "delta_plus",
            Parameter::DeltaMinus => "delta_minus",
            Parameter::NM => "n_m",
            Parameter::Epsilon => "epsilon",
            Parameter::OmegaPlus => "omega_plus",
            Parameter::OmegaMinus => "omega_minus",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Parameter::QualityFactor | Parameter::GRatio | Parameter::NM | Parameter::Epsilon => "1",
            _ => "omega_m",
        }
    }

    pub fn is_filter(self) -> bool {
        matches!(self, Parameter::Epsilon | Parameter::OmegaPlus | Parameter::OmegaMinus)
    }

    /// Current value, with filter centres in the lab convention.
    pub fn get(self, params: &SystemParams, filter: Option<&FilterSpec>) -> Option<f64> {
        Some(match self {
            Parameter::KappaPlus => params.kappa_plus,
            Parameter::KappaMinus => params.kappa_minus,
            Parameter::GammaM => params.gamma_m,
            Parameter::QualityFactor => params.quality_factor(),
            Parameter::GPlus => params.g_plus,
            Parameter::GMinus => params.g_minus,
            Parameter::GRatio => params.g_plus / params.g_minus,
            Parameter::DeltaPlus => params.delta_plus,
            Parameter::DeltaMinus => params.delta_minus,
            Parameter::NM => params.n_m,
            Parameter::Epsilon => filter?.epsilon,
            Parameter::OmegaPlus => filter?.lab_centers(params).0,
            Parameter::OmegaMinus => filter?.lab_centers(params).1,
        })
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parameter::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `points` values from `min` to `max`, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Parameter,
    #[serde(default)]
    pub spacing: Spacing,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(parameter: Parameter, spacing: Spacing, min: f64, max: f64, points: usize) -> Result<Self> {
        let axis = Self { parameter, spacing, min, max, points };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        let name = self.parameter.name();
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Sweep(format!("axis `{name}`: bounds must be finite")));
        }
        if self.points == 0 {
            return Err(Error::Sweep(format!("axis `{name}`: needs at least one point")));
        }
        if self.points == 1 && self.min != self.max {
            return Err(Error::Sweep(format!("axis `{name}`: a one-point axis needs min = max")));
        }
        if self.points > 1 && self.min >= self.max {
            return Err(Error::Sweep(format!("axis `{name}`: needs min < max")));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::Sweep(format!("axis `{name}`: log spacing needs min > 0")));
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.points == 1 {
            return Ok(alloc::vec![self.min]);
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    return self.max;
                }
                self.at_unit(i as f64 / last)
            })
            .collect())
    }

    /// Maps an axis value into the coordinate in which the grid is uniform.
    pub fn to_coordinate(&self, value: f64) -> f64 {
        match self.spacing {
            Spacing::Linear => value,
            Spacing::Log => value.log10(),
        }
    }

    pub fn from_coordinate(&self, coordinate: f64) -> f64 {
        match self.spacing {
            Spacing::Linear => coordinate,
            Spacing::Log => 10f64.powf(coordinate),
        }
    }

    /// Span of the axis in its uniform coordinate.
    pub fn coordinate_span(&self) -> f64 {
        self.to_coordinate(self.max) - self.to_coordinate(self.min)
    }

    fn at_unit(&self, s: f64) -> f64 {
        let (a, b) = (self.to_coordinate(self.min), self.to_coordinate(self.max));
        self.from_coordinate(a + s * (b - a))
    }
}

/// Applies `(parameter, value)` settings to copies of `params` and `filter`.
/// Ratio settings are applied last, against the final `G-`.
pub fn apply_settings(
    params: &SystemParams,
    filter: Option<&FilterSpec>,
    settings: &[(Parameter, f64)],
) -> Result<(SystemParams, Option<FilterSpec>)> {
    let mut p = *params;
    let mut f = filter.copied();
    let mut ratio = None;
    let mut eps = None;
    let mut centers: (Option<f64>, Option<f64>) = (None, None);
    for &(param, value) in settings {
        if !value.is_finite() {
            return Err(Error::invalid("axis value", format!("{param} = {value} is not finite")));
        }
        match param {
            Parameter::KappaPlus => p.kappa_plus = value,
            Parameter::KappaMinus => p.kappa_minus = value,
            Parameter::GammaM => p.gamma_m = value,
            Parameter::QualityFactor => {
                if value <= 0.0 {
                    return Err(Error::invalid("quality_factor", "must be > 0"));
                }
                p.gamma_m = p.omega_m / value;
            }
            Parameter::GPlus => p.g_plus = value,
            Parameter::GMinus => p.g_minus = value,
            Parameter::GRatio => ratio = Some(value),
            Parameter::DeltaPlus => p.delta_plus = value,
            Parameter::DeltaMinus => p.delta_minus = value,
            Parameter::NM => p.n_m = value,
            Parameter::Epsilon => eps = Some(value),
            Parameter::OmegaPlus => centers.0 = Some(value),
            Parameter::OmegaMinus => centers.1 = Some(value),
        }
    }
    if let Some(r) = ratio {
        if r < 0.0 {
            return Err(Error::invalid("g_ratio", "must be >= 0"));
        }
        p.g_plus = r * p.g_minus;
    }
    if eps.is_some() || centers.0.is_some() || centers.1.is_some() {
        let base = f.ok_or_else(|| Error::Sweep(String::from("filter parameter set without a filter")))?;
        let (lab_plus, lab_minus) = base.lab_centers(params);
        f = Some(FilterSpec::from_lab(
            eps.unwrap_or(base.epsilon),
            centers.0.unwrap_or(lab_plus),
            centers.1.unwrap_or(lab_minus),
            &p,
        )?);
    }
    p.validate()?;
    Ok((p, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn names_round_trip() {
        for p in Parameter::ALL {
            assert_eq!(p.name().parse::<Parameter>().unwrap(), p);
        }
        assert!("kappa".parse::<Parameter>().is_err());
    }

    #[test]
    fn log_axis_is_geometric() {
        let a = Axis::new(Parameter::GMinus, Spacing::Log, 1e-4, 1e-1, 4).unwrap();
        let v = a.values().unwrap();
        for (x, e) in v.iter().zip([1e-4, 1e-3, 1e-2, 1e-1]) {
            assert_relative_eq!(*x, e, max_relative = 1e-12);
        }
    }

    #[test]
    fn linear_axis_hits_both_ends() {
        let v = Axis::new(Parameter::GRatio, Spacing::Linear, 0.0, 0.99, 101).unwrap().values().unwrap();
        assert_eq!(v.len(), 101);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[100], 0.99);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new(Parameter::GMinus, Spacing::Log, 0.0, 1.0, 3).is_err());
        assert!(Axis::new(Parameter::GMinus, Spacing::Linear, 1.0, 0.0, 3).is_err());
        assert!(Axis::new(Parameter::GMinus, Spacing::Linear, 0.0, 1.0, 0).is_err());
        assert!(Axis::new(Parameter::GMinus, Spacing::Linear, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn ratio_applies_after_g_minus() {
        let settings = [(Parameter::GRatio, 0.5), (Parameter::GMinus, 0.1)];
        let (p, _) = apply_settings(&SystemParams::default(), None, &settings).unwrap();
        assert_relative_eq!(p.g_plus, 0.05, epsilon = 1e-15);
    }

    #[test]
    fn quality_factor_sets_gamma() {
        let (p, _) = apply_settings(&SystemParams::default(), None, &[(Parameter::QualityFactor, 5e4)]).unwrap();
        assert_relative_eq!(p.gamma_m, 2e-5, max_relative = 1e-12);
    }

    #[test]
    fn filter_settings_use_lab_convention() {
        let params = SystemParams::default();
        let filter = FilterSpec::symmetric(100.0, &params).unwrap();
        let (_, f) = apply_settings(&params, Some(&filter), &[(Parameter::OmegaPlus, -1.2), (Parameter::Epsilon, 10.0)]).unwrap();
        let f = f.unwrap();
        assert_relative_eq!(f.omega_plus, -0.2, epsilon = 1e-15);
        assert_eq!(f.omega_minus, 0.0);
        assert_eq!(f.epsilon, 10.0);
        assert!(apply_settings(&params, None, &[(Parameter::Epsilon, 10.0)]).is_err());
    }
}
