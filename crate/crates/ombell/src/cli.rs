//! Command-line surface and the run driver behind it.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::{CommandName, ParamsConfig, RunConfig, Vary};
use crate::error::{CliError, CliResult};
use crate::output::{self, config_hash, manifest_path, sha256_hex, to_json, write_atomic, Format, Manifest};
use crate::parallel;
use crate::presets::preset;

#[derive(Debug, Parser)]
#[command(name = "ombell", version, about = "Filtered output correlations, squeezing and Bell maxima of a double-cavity optomechanical system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Named configuration: fig2, fig3, fig4, fig5, appendix or sde.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// System parameter overrides, as inline JSON or a path to a JSON file.
    #[arg(long, global = true, value_name = "JSON|PATH")]
    pub params: Option<String>,

    /// Multiply a parameter of every point by a factor, e.g. kappa_plus=2.0.
    #[arg(long, global = true, value_name = "NAME=FACTOR")]
    pub vary: Vec<String>,

    /// Output file; without it the result goes to stdout and no manifest is written.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Output encoding; defaults to the output extension, then csv for grids and json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Base seed of the Monte-Carlo trajectories.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 or unset: one per core).
    #[arg(long, global = true, env = "OMBELL_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Full metric record for one parameter point.
    Metrics,
    /// Metrics over the grids of every panel.
    Sweep,
    /// Level-crossing curves (S_q = 1, B_max = 2 by default in presets).
    Boundary,
    /// Stability verdict over two-parameter grids.
    StabilityMap,
    /// Monte-Carlo trajectories against the frequency-domain covariance.
    SdeCheck,
    /// High-cooperativity prediction against the frequency-domain covariance.
    OracleCompare,
}

impl Command {
    pub fn name(self) -> CommandName {
        match self {
            Command::Metrics => CommandName::Metrics,
            Command::Sweep => CommandName::Sweep,
            Command::Boundary => CommandName::Boundary,
            Command::StabilityMap => CommandName::StabilityMap,
            Command::SdeCheck => CommandName::SdeCheck,
            Command::OracleCompare => CommandName::OracleCompare,
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Sweep | Command::Boundary | Command::StabilityMap => Format::Csv,
            _ => Format::Json,
        }
    }
}

impl Cli {
    /// Preset, then `--config`, then `--params`, `--vary` and `--seed`.
    pub fn run_config(&self) -> CliResult<RunConfig> {
        let command = self.command.name();
        let mut cfg = match (&self.preset, &self.config) {
            (Some(name), _) => preset(name)?,
            (None, None) if command == CommandName::SdeCheck => preset("sde")?,
            _ => RunConfig::default(),
        };
        if let Some(path) = &self.config {
            let file = RunConfig::from_file(path)?;
            if let Some(c) = file.command {
                if c != command {
                    return Err(CliError::config(format!(
                        "{} was written for `{}`, not `{}`",
                        path.display(),
                        c.name(),
                        command.name()
                    )));
                }
            }
            cfg.merge(&file);
        }
        let mut overrides = RunConfig::default();
        if let Some(src) = &self.params {
            overrides.params = ParamsConfig::from_source(src)?;
        }
        overrides.vary = self.vary.iter().map(|v| v.parse::<Vary>()).collect::<CliResult<_>>()?;
        overrides.seed = self.seed;
        cfg.merge(&overrides);
        cfg.command = Some(command);
        Ok(cfg)
    }

    fn format(&self) -> Format {
        self.format
            .or_else(|| match self.output.as_ref()?.extension()?.to_str()? {
                "csv" => Some(Format::Csv),
                "json" => Some(Format::Json),
                _ => None,
            })
            .unwrap_or(self.command.default_format())
    }
}

fn encode<T: serde::Serialize>(format: Format, report: &T, csv: impl Fn(&T) -> CliResult<Vec<u8>>) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => csv(report),
    }
}

/// Runs `command` on a merged configuration and encodes the result.
pub fn execute(command: Command, cfg: &RunConfig, format: Format) -> CliResult<Vec<u8>> {
    match command {
        Command::Metrics => encode(format, &commands::metrics(cfg)?, output::metrics_csv),
        Command::Sweep => encode(format, &commands::sweep(cfg)?, output::sweep_csv),
        Command::Boundary => encode(format, &commands::boundary(cfg)?, output::boundary_csv),
        Command::StabilityMap => encode(format, &commands::stability_map(cfg)?, output::stability_csv),
        Command::SdeCheck => encode(format, &commands::sde_check(cfg)?, output::sde_csv),
        Command::OracleCompare => encode(format, &commands::oracle_compare(cfg)?, output::oracle_csv),
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let start = Instant::now();
    let cfg = cli.run_config()?;
    let format = cli.format();
    let pool = parallel::pool(cli.threads)?;
    let bytes = pool.install(|| execute(cli.command, &cfg, format))?;

    let Some(path) = &cli.output else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(&bytes)
            .and_then(|_| out.flush())
            .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source });
    };
    write_atomic(path, &bytes)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: ombell_core::VERSION.to_string(),
        command: cli.command.name().name().to_string(),
        output: path.clone(),
        format,
        output_sha256: sha256_hex(&bytes),
        config_sha256: config_hash(&cfg)?,
        config: cfg,
        threads: pool.current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        finished_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    write_atomic(&manifest_path(path), &to_json(&manifest)?)
}
