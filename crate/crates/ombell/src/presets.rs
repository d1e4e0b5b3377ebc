//! Named configurations for the standard parameter sweeps.
//!
//! Every preset starts from the reference point (`κ± = 0.02`, `G- = 0.15`,
//! `G+ = 0.2 G-`, `Q = 1.5×10⁵`, `n_m = 500`, symmetric filters) and only
//! lists what differs. 2-D grids put `G+/G-` on the first axis and `G-` on
//! the second, so boundaries are traced along `G-` for each ratio.

use ombell_core::axis::{Axis, Parameter, Spacing};
use ombell_core::sweep::Metric;

use crate::config::{FilterConfig, Level, PanelConfig, ParamsConfig, RunConfig, SdeSection};
use crate::error::{CliError, CliResult};

pub const PRESETS: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "appendix", "sde"];

/// Grid resolution per axis.
pub const RESOLUTION: usize = 101;

/// Filter bandwidth of the 2-D grids.
pub const GRID_EPSILON: f64 = 1e4;

pub fn preset(name: &str) -> CliResult<RunConfig> {
    match name {
        "fig2" => Ok(fig2()),
        "fig3" => Ok(fig3()),
        "fig4" => Ok(fig4()),
        "fig5" => Ok(fig5()),
        "appendix" => Ok(appendix()),
        "sde" => Ok(sde()),
        _ => Err(CliError::config(format!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")))),
    }
}

fn axis(parameter: Parameter, spacing: Spacing, min: f64, max: f64) -> Axis {
    Axis { parameter, spacing, min, max, points: RESOLUTION }
}

fn coupling_axes() -> Vec<Axis> {
    vec![
        axis(Parameter::GRatio, Spacing::Linear, 0.0, 0.99),
        axis(Parameter::GMinus, Spacing::Log, 1e-4, 0.3),
    ]
}

fn boundary_levels() -> Vec<Level> {
    vec![Level { metric: Metric::SQMin, value: 1.0 }, Level { metric: Metric::BMax, value: 2.0 }]
}

fn grid_panel(label: &str, params: ParamsConfig) -> PanelConfig {
    PanelConfig {
        label: label.to_string(),
        params,
        filter: FilterConfig::default(),
        axes: coupling_axes(),
        metrics: vec![Metric::SQMin, Metric::BMax, Metric::Purity, Metric::ROracle],
        log_s_q: false,
        levels: boundary_levels(),
    }
}

fn grid_filter() -> FilterConfig {
    FilterConfig { epsilon: Some(GRID_EPSILON), ..Default::default() }
}

/// Ω+ scan at Ω- = ω_m for ε ∈ {1, 10, 100}.
fn fig2() -> RunConfig {
    let panels = [1.0, 10.0, 100.0]
        .iter()
        .map(|&eps| PanelConfig {
            label: format!("eps_{eps}"),
            params: ParamsConfig::default(),
            filter: FilterConfig { epsilon: Some(eps), omega_minus: Some(1.0), ..Default::default() },
            axes: vec![axis(Parameter::OmegaPlus, Spacing::Linear, -2.0, 0.0)],
            metrics: vec![Metric::SQMin, Metric::BMax, Metric::Purity],
            log_s_q: false,
            levels: vec![],
        })
        .collect();
    RunConfig { panels, ..Default::default() }
}

/// `log10 S_q`, B_max, purity and r over (G+/G-, G-).
fn fig3() -> RunConfig {
    let mut panel = grid_panel("grid", ParamsConfig::default());
    panel.log_s_q = true;
    RunConfig { filter: grid_filter(), panels: vec![panel], ..Default::default() }
}

/// Reference grid, κ+ doubled, κ- halved.
fn fig4() -> RunConfig {
    let panels = vec![
        grid_panel("reference", ParamsConfig::default()),
        grid_panel("kappa_plus_x2", ParamsConfig { kappa_plus: Some(0.04), ..Default::default() }),
        grid_panel("kappa_minus_half", ParamsConfig { kappa_minus: Some(0.01), ..Default::default() }),
    ];
    RunConfig { filter: grid_filter(), panels, ..Default::default() }
}

/// Q ∈ {1.5×10⁵, 10⁵, 5×10⁴} at n_m = 500, then n_m ∈ {1000, 2000} at Q = 1.5×10⁵.
fn fig5() -> RunConfig {
    let mut panels: Vec<PanelConfig> = [("q_150000", 1.5e5), ("q_100000", 1e5), ("q_50000", 5e4)]
        .iter()
        .map(|&(label, q)| grid_panel(label, ParamsConfig { quality_factor: Some(q), ..Default::default() }))
        .collect();
    for (label, n) in [("n_1000", 1000.0), ("n_2000", 2000.0)] {
        panels.push(grid_panel(label, ParamsConfig { n_m: Some(n), ..Default::default() }));
    }
    RunConfig { filter: grid_filter(), panels, ..Default::default() }
}

/// Stability over (G+/G-, G-) for κ+ ∈ {2κ, κ, κ/2} with κ = κ- = 0.02.
fn appendix() -> RunConfig {
    let panels = [("kappa_plus_2k", 0.04), ("kappa_plus_k", 0.02), ("kappa_plus_half_k", 0.01)]
        .iter()
        .map(|&(label, kp)| PanelConfig {
            label: label.to_string(),
            params: ParamsConfig { kappa_plus: Some(kp), ..Default::default() },
            filter: FilterConfig::default(),
            axes: vec![
                axis(Parameter::GRatio, Spacing::Linear, 0.0, 2.0),
                axis(Parameter::GMinus, Spacing::Linear, 0.005, 0.3),
            ],
            metrics: vec![Metric::Stability],
            log_s_q: false,
            levels: vec![],
        })
        .collect();
    RunConfig { panels, ..Default::default() }
}

/// Monte-Carlo validation point: the reference set with Q = 1.5×10³ and ε = 10.
fn sde() -> RunConfig {
    RunConfig {
        params: ParamsConfig { quality_factor: Some(1.5e3), ..Default::default() },
        filter: FilterConfig { epsilon: Some(10.0), ..Default::default() },
        sde: Some(SdeSection::default()),
        ..Default::default()
    }
}
