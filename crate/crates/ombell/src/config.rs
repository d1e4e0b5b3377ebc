//! Run configuration: strict JSON ingestion, layering and resolution into
//! core types.
//!
//! A run is built from up to three layers, each overriding the one before:
//! a named preset, a `--config` file, then command-line overrides. The
//! merged [`RunConfig`] is what gets recorded in the manifest, so feeding it
//! back through `--config` reproduces the run.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use ombell_core::axis::{apply_settings, Axis, Parameter};
use ombell_core::model::{n_m_from_temperature, Frame, SystemParams};
use ombell_core::sde::SdeConfig;
use ombell_core::spectrum::{CovarianceMethod, FilterSpec};
use ombell_core::sweep::{Metric, SweepSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Metrics,
    Sweep,
    Boundary,
    StabilityMap,
    SdeCheck,
    OracleCompare,
}

impl CommandName {
    pub fn name(self) -> &'static str {
        match self {
            CommandName::Metrics => "metrics",
            CommandName::Sweep => "sweep",
            CommandName::Boundary => "boundary",
            CommandName::StabilityMap => "stability-map",
            CommandName::SdeCheck => "sde-check",
            CommandName::OracleCompare => "oracle-compare",
        }
    }
}

/// Partial [`SystemParams`]. Rates are in units of `ω_m`.
///
/// `quality_factor` is an alternative to `gamma_m`, `g_ratio` to `g_plus`,
/// and `temperature_mk` with `omega_m_hz` to `n_m`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_m: Option<f64>,
    /// Bath temperature in mK; needs `omega_m_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "temperature_mK")]
    pub temperature_mk: Option<f64>,
    /// Mechanical frequency `ω_m / 2π` in Hz, used only with `temperature_mK`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Frame>,
}

macro_rules! take {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl ParamsConfig {
    /// Fields set in `other` replace ours; setting one of an alternative
    /// pair clears the other.
    pub fn merge(&mut self, other: &ParamsConfig) {
        if other.gamma_m.is_some() || other.quality_factor.is_some() {
            self.gamma_m = None;
            self.quality_factor = None;
        }
        if other.g_plus.is_some() || other.g_ratio.is_some() {
            self.g_plus = None;
            self.g_ratio = None;
        }
        if other.n_m.is_some() || other.temperature_mk.is_some() {
            self.n_m = None;
            self.temperature_mk = None;
        }
        take!(self, other; omega_m, kappa_plus, kappa_minus, gamma_m, quality_factor, g_plus, g_minus,
              g_ratio, delta_plus, delta_minus, n_m, temperature_mk, omega_m_hz, frame);
    }

    pub fn resolve(&self, base: &SystemParams) -> CliResult<SystemParams> {
        let conflict = |a: &str, b: &str| CliError::config(format!("params: `{a}` and `{b}` are mutually exclusive"));
        if self.gamma_m.is_some() && self.quality_factor.is_some() {
            return Err(conflict("gamma_m", "quality_factor"));
        }
        if self.g_plus.is_some() && self.g_ratio.is_some() {
            return Err(conflict("g_plus", "g_ratio"));
        }
        if self.n_m.is_some() && self.temperature_mk.is_some() {
            return Err(conflict("n_m", "temperature_mK"));
        }
        if self.omega_m_hz.is_some() && self.temperature_mk.is_none() {
            return Err(CliError::config("params: `omega_m_hz` is only used together with `temperature_mK`"));
        }

        let mut p = *base;
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { p.$field = v; } )* };
        }
        set!(omega_m, kappa_plus, kappa_minus, gamma_m, g_plus, g_minus, delta_plus, delta_minus, n_m, frame);
        if let Some(q) = self.quality_factor {
            if !(q.is_finite() && q > 0.0) {
                return Err(CliError::config("params: `quality_factor` must be finite and > 0"));
            }
            p.gamma_m = p.omega_m / q;
        }
        if let Some(r) = self.g_ratio {
            if !(r.is_finite() && r >= 0.0) {
                return Err(CliError::config("params: `g_ratio` must be finite and >= 0"));
            }
            p.g_plus = r * p.g_minus;
        }
        if let Some(t) = self.temperature_mk {
            let hz = self
                .omega_m_hz
                .ok_or_else(|| CliError::config("params: `temperature_mK` needs `omega_m_hz`"))?;
            p.n_m = n_m_from_temperature(t * 1e-3, 2.0 * std::f64::consts::PI * hz).map_err(config_error)?;
        }
        p.validate().map_err(config_error)?;
        Ok(p)
    }

    /// Reads inline JSON (starting with `{`) or a path to a JSON file.
    pub fn from_source(source: &str) -> CliResult<Self> {
        let trimmed = source.trim_start();
        if trimmed.starts_with('{') {
            parse_json(trimmed, "--params")
        } else {
            let text = read_file(Path::new(source))?;
            parse_json(&text, source)
        }
    }
}

/// Filter bandwidth and centres in the lab convention, in units of `ω_m`:
/// the symmetric point is `omega_plus = -1`, `omega_minus = +1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_minus: Option<f64>,
}

pub const DEFAULT_EPSILON: f64 = 100.0;

impl FilterConfig {
    pub fn merge(&mut self, other: &FilterConfig) {
        let s = other;
        take!(self, s; epsilon, omega_plus, omega_minus);
    }

    pub fn resolve(&self, params: &SystemParams) -> CliResult<FilterSpec> {
        FilterSpec::from_lab(
            self.epsilon.unwrap_or(DEFAULT_EPSILON),
            self.omega_plus.unwrap_or(-1.0) * params.omega_m,
            self.omega_minus.unwrap_or(1.0) * params.omega_m,
            params,
        )
        .map_err(config_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub metric: Metric,
    pub value: f64,
}

/// One grid: parameter overrides, axes, metrics and boundary levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelConfig {
    pub label: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub filter: FilterConfig,
    pub axes: Vec<Axis>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub log_s_q: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<Level>,
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::SQMin, Metric::BMax, Metric::Purity, Metric::ROracle]
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

/// Monte-Carlo settings; unset fields take the model-dependent defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trajectories: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
}

pub const DEFAULT_SDE_STEPS: u64 = 100_000;
pub const DEFAULT_SDE_TRAJECTORIES: u64 = 200;
pub const DEFAULT_SEED: u64 = 0;

impl SdeSection {
    pub fn merge(&mut self, other: &SdeSection) {
        let s = other;
        take!(self, s; dt, n_steps, n_trajectories, burn_in);
    }
}

/// Multiplies one parameter of every resolved point by `factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vary {
    pub parameter: Parameter,
    pub factor: f64,
}

impl FromStr for Vary {
    type Err = CliError;

    /// Parses `name=factor`.
    fn from_str(s: &str) -> CliResult<Self> {
        let (name, factor) = s
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--vary `{s}`: expected name=factor")))?;
        let parameter = name.trim().parse::<Parameter>().map_err(config_error)?;
        let factor: f64 = factor
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("--vary `{s}`: factor is not a number")))?;
        if !(factor.is_finite() && factor > 0.0) {
            return Err(CliError::config(format!("--vary `{s}`: factor must be finite and > 0")));
        }
        Ok(Self { parameter, factor })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub filter: FilterConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub panels: Vec<PanelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sde: Option<SdeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<CovarianceMethod>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vary: Vec<Vary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = read_file(path)?;
        parse_json(&text, &path.display().to_string())
    }

    /// Layers `other` on top: scalar sections merge field by field, a
    /// non-empty panel list replaces ours, `vary` entries accumulate.
    pub fn merge(&mut self, other: &RunConfig) {
        if other.command.is_some() {
            self.command = other.command;
        }
        self.params.merge(&other.params);
        self.filter.merge(&other.filter);
        if !other.panels.is_empty() {
            self.panels = other.panels.clone();
        }
        if let Some(s) = &other.sde {
            self.sde.get_or_insert_with(SdeSection::default).merge(s);
        }
        if other.method.is_some() {
            self.method = other.method;
        }
        self.vary.extend(other.vary.iter().copied());
        if other.seed.is_some() {
            self.seed = other.seed;
        }
    }

    /// Params and filter of a single-point command: globals, then `--vary`.
    pub fn base_point(&self) -> CliResult<(SystemParams, FilterSpec)> {
        self.point(&self.params, &self.filter)
    }

    fn point(&self, params: &ParamsConfig, filter: &FilterConfig) -> CliResult<(SystemParams, FilterSpec)> {
        let p = params.resolve(&SystemParams::default())?;
        let f = filter.resolve(&p)?;
        self.apply_vary(p, f)
    }

    fn apply_vary(&self, params: SystemParams, filter: FilterSpec) -> CliResult<(SystemParams, FilterSpec)> {
        let mut p = params;
        let mut f = filter;
        for v in &self.vary {
            let current = v
                .parameter
                .get(&p, Some(&f))
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::config(format!("--vary: `{}` has no current value", v.parameter)))?;
            let (np, nf) = apply_settings(&p, Some(&f), &[(v.parameter, current * v.factor)]).map_err(config_error)?;
            p = np;
            f = nf.unwrap_or(f);
        }
        p.validate().map_err(config_error)?;
        Ok((p, f))
    }

    /// Params and filter of one panel: globals, then the panel's overrides,
    /// then `--vary`.
    pub fn panel_point(&self, panel: &PanelConfig) -> CliResult<(SystemParams, FilterSpec)> {
        let mut params = self.params.clone();
        params.merge(&panel.params);
        let mut filter = self.filter.clone();
        filter.merge(&panel.filter);
        self.point(&params, &filter)
    }

    pub fn resolve_panels(&self) -> CliResult<Vec<ResolvedPanel>> {
        if self.panels.is_empty() {
            return Err(CliError::config("no panels: pass --preset or a --config with `panels`"));
        }
        let mut labels = std::collections::HashSet::new();
        self.panels
            .iter()
            .map(|panel| {
                if !labels.insert(panel.label.as_str()) {
                    return Err(CliError::config(format!("duplicate panel label `{}`", panel.label)));
                }
                let (params, filter) = self.panel_point(panel)?;
                let mut spec = SweepSpec::new(params, filter, panel.axes.clone(), panel.metrics.clone())
                    .map_err(|e| CliError::config(format!("panel `{}`: {e}", panel.label)))?;
                spec.log_s_q = panel.log_s_q;
                if let Some(m) = self.method {
                    spec.method = m;
                    spec.validate().map_err(config_error)?;
                }
                for level in &panel.levels {
                    if !spec.metrics.contains(&level.metric) {
                        return Err(CliError::config(format!(
                            "panel `{}`: boundary metric `{}` is not among the panel metrics",
                            panel.label, level.metric
                        )));
                    }
                }
                Ok(ResolvedPanel {
                    label: panel.label.clone(),
                    spec,
                    levels: panel.levels.clone(),
                })
            })
            .collect()
    }

    pub fn sde_config(&self, model: &ombell_core::LinearModel) -> SdeConfig {
        let s = self.sde.clone().unwrap_or_default();
        let dt = s.dt.unwrap_or_else(|| SdeConfig::max_dt(model));
        SdeConfig {
            dt,
            n_steps: s.n_steps.unwrap_or(DEFAULT_SDE_STEPS),
            n_trajectories: s.n_trajectories.unwrap_or(DEFAULT_SDE_TRAJECTORIES),
            burn_in: s.burn_in.unwrap_or_else(|| SdeConfig::default_burn_in(model, dt)),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPanel {
    pub label: String,
    pub spec: SweepSpec,
    pub levels: Vec<Level>,
}

pub(crate) fn config_error(e: ombell_core::Error) -> CliError {
    match e {
        e if e.is_physics_domain() || e.is_numerical() => CliError::Core(e),
        e => CliError::Config(e.to_string()),
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read `{}`: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::config(format!("{what}: {e}")))
}
