//! Result records, their CSV/JSON encodings, atomic file output and the run
//! manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use ombell_core::axis::Axis;
use ombell_core::gaussian::GaussianMetrics;
use ombell_core::model::{SystemParams, OUTPUT_ORDERING};
use ombell_core::sde::SdeConfig;
use ombell_core::spectrum::{CovarianceMethod, FilterSpec, FilteredCovariance};
use ombell_core::stability::StabilityVerdict;
use ombell_core::sweep::{BoundaryCurve, SweepPoint};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub type Rows = [[f64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterRecord {
    pub epsilon: f64,
    pub tau: f64,
    /// Centres in the lab convention, units of `ω_m`.
    pub lab_omega_plus: f64,
    pub lab_omega_minus: f64,
    /// Centres in the frame of the model.
    pub native: FilterSpec,
}

impl FilterRecord {
    pub fn new(filter: &FilterSpec, params: &SystemParams) -> Self {
        let (p, m) = filter.lab_centers(params);
        Self {
            epsilon: filter.epsilon,
            tau: filter.tau,
            lab_omega_plus: p / params.omega_m,
            lab_omega_minus: m / params.omega_m,
            native: *filter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRecord {
    pub ordering: [String; 4],
    pub rows: Rows,
    pub method: Option<CovarianceMethod>,
    pub error_estimate: Option<f64>,
}

impl CovarianceRecord {
    pub fn new(v: &FilteredCovariance) -> Self {
        Self {
            ordering: OUTPUT_ORDERING.map(String::from),
            rows: v.rows(),
            method: v.provenance.map(|p| p.method),
            error_estimate: v.provenance.and_then(|p| p.error_estimate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub params: SystemParams,
    pub filter: FilterRecord,
    pub stability: StabilityVerdict,
    pub covariance: CovarianceRecord,
    pub metrics: GaussianMetrics,
    /// Oracle squeezing factor, when the point lies in its domain.
    pub r_oracle: Option<f64>,
    pub cooperativity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPanel {
    pub label: String,
    pub params: SystemParams,
    pub filter: FilterRecord,
    pub axes: Vec<Axis>,
    /// One inner vector per first-axis value.
    pub rows: Vec<Vec<SweepPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub panels: Vec<SweepPanel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPanel {
    pub label: String,
    pub params: SystemParams,
    pub filter: FilterRecord,
    pub axes: Vec<Axis>,
    pub curves: Vec<BoundaryCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub panels: Vec<BoundaryPanel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub x1: f64,
    pub x2: f64,
    pub stable: Option<bool>,
    pub margin: Option<f64>,
    pub eigenvalue_re: Option<f64>,
    pub eigenvalue_im: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityPanel {
    pub label: String,
    pub params: SystemParams,
    pub axes: Vec<Axis>,
    pub cells: Vec<StabilityRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub panels: Vec<StabilityPanel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeReport {
    pub params: SystemParams,
    pub filter: FilterRecord,
    pub config: SdeConfig,
    pub estimate: Rows,
    pub stderr: Rows,
    /// Frequency-domain covariance of the same point.
    pub reference: Rows,
    /// `(estimate − reference) / stderr`, elementwise.
    pub z_scores: Rows,
    pub max_abs_z: f64,
    /// Every element within 3 standard errors.
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementComparison {
    pub row: usize,
    pub col: usize,
    pub oracle: f64,
    pub quadrature: f64,
    pub comparison: Comparison,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub params: SystemParams,
    pub filter: FilterRecord,
    pub cooperativity: f64,
    /// Set when `C-` is below the threshold the oracle assumes.
    pub low_cooperativity: bool,
    pub r: Option<f64>,
    pub gate: f64,
    pub max_deviation: Option<f64>,
    pub elements: Vec<ElementComparison>,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let err = |source| CliError::Output { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|source| CliError::Json {
        context: "encoding result".to_string(),
        source,
    })?;
    out.push(b'\n');
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub output: PathBuf,
    pub format: Format,
    pub output_sha256: String,
    /// Hash of the compact JSON encoding of `config`.
    pub config_sha256: String,
    pub config: RunConfig,
    pub threads: usize,
    pub wall_time_s: f64,
    pub finished_unix_s: u64,
}

/// `<output>.manifest.json` next to the output.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

pub fn config_hash(config: &RunConfig) -> CliResult<String> {
    let bytes = serde_json::to_vec(config).map_err(|source| CliError::Json {
        context: "encoding config".to_string(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> CliResult<Vec<u8>> {
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn axis_header(axis: &Axis) -> String {
    format!("{} [{}]", axis.parameter, axis.parameter.unit())
}

pub fn metrics_csv(r: &MetricsReport) -> CliResult<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record([
        "stable",
        "margin [omega_m]",
        "s_q_min [1]",
        "b_max [1]",
        "purity [1]",
        "n [1]",
        "m [1]",
        "c1 [1]",
        "c2 [1]",
        "entangled_by_sql",
        "simon_separable",
        "pt_symplectic_min [1]",
        "r_oracle [1]",
        "cooperativity [1]",
    ])?;
    let m = &r.metrics;
    w.write_record([
        r.stability.stable.to_string(),
        r.stability.margin.to_string(),
        m.s_q_min.to_string(),
        m.b_max.to_string(),
        m.purity.to_string(),
        m.invariants.n.to_string(),
        m.invariants.m.to_string(),
        m.invariants.c1.to_string(),
        m.invariants.c2.to_string(),
        m.entangled_by_sql.to_string(),
        m.simon_separable.to_string(),
        m.pt_symplectic_min.to_string(),
        opt(r.r_oracle),
        r.cooperativity.to_string(),
    ])?;
    finish(w)
}

/// One row per grid point; missing values are empty fields.
pub fn sweep_csv(r: &SweepReport) -> CliResult<Vec<u8>> {
    let mut w = csv_writer();
    let Some(first) = r.panels.first() else {
        return finish(w);
    };
    let mut header = vec!["panel".to_string(), axis_header(&first.axes[0])];
    header.push(first.axes.get(1).map(axis_header).unwrap_or_else(|| "axis2".to_string()));
    header.extend(
        [
            "stable",
            "margin [omega_m]",
            "s_q_min [1]",
            "log10_s_q_min [1]",
            "b_max [1]",
            "purity [1]",
            "r_oracle [1]",
            "simon_separable",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for panel in &r.panels {
        for p in panel.rows.iter().flatten() {
            w.write_record([
                panel.label.clone(),
                p.x1.to_string(),
                opt(p.x2),
                opt(p.stable),
                opt(p.margin),
                opt(p.s_q_min),
                opt(p.log10_s_q_min),
                opt(p.b_max),
                opt(p.purity),
                opt(p.r_oracle),
                opt(p.simon_separable),
                p.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    finish(w)
}

/// Polyline rows per curve, plus one row per row without a crossing and per
/// excluded point.
pub fn boundary_csv(r: &BoundaryReport) -> CliResult<Vec<u8>> {
    let mut w = csv_writer();
    let Some(first) = r.panels.first() else {
        return finish(w);
    };
    w.write_record([
        "panel".to_string(),
        "metric".to_string(),
        "level [1]".to_string(),
        "status".to_string(),
        axis_header(&first.axes[0]),
        axis_header(&first.axes[1]),
        "bracket_width [axis coordinate]".to_string(),
        "reason".to_string(),
    ])?;
    for panel in &r.panels {
        for c in &panel.curves {
            let head = [panel.label.clone(), c.metric.to_string(), c.level.to_string()];
            for p in &c.points {
                let mut rec = head.to_vec();
                rec.extend(["crossing".into(), p.x1.to_string(), p.x2.to_string(), p.width.to_string(), String::new()]);
                w.write_record(&rec)?;
            }
            for x1 in &c.no_crossing {
                let mut rec = head.to_vec();
                rec.extend(["no_crossing".into(), x1.to_string(), String::new(), String::new(), String::new()]);
                w.write_record(&rec)?;
            }
            for e in &c.excluded {
                let mut rec = head.to_vec();
                rec.extend(["excluded".into(), e.x1.to_string(), e.x2.to_string(), String::new(), e.reason.clone()]);
                w.write_record(&rec)?;
            }
        }
    }
    finish(w)
}

pub fn stability_csv(r: &StabilityReport) -> CliResult<Vec<u8>> {
    let mut w = csv_writer();
    let Some(first) = r.panels.first() else {
        return finish(w);
    };
    w.write_record([
        "panel".to_string(),
        axis_header(&first.axes[0]),
        axis_header(&first.axes[1]),
        "stable".to_string(),
        "margin [omega_m]".to_string(),
        "eigenvalue_re [omega_m]".to_string(),
        "eigenvalue_im [omega_m]".to_string(),
        "error".to_string(),
    ])?;
    for panel in &r.panels {
        for c in &panel.cells {
            w.write_record([
                panel.label.clone(),
                c.x1.to_string(),
                c.x2.to_string(),
                opt(c.stable),
                opt(c.margin),
                opt(c.eigenvalue_re),
                opt(c.eigenvalue_im),
                c.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    finish(w)
}

pub fn sde_csv(r: &SdeReport) -> CliResult<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["row", "col", "element", "estimate [1]", "stderr [1]", "reference [1]", "z [1]"])?;
    for i in 0..4 {
        for j in 0..4 {
            w.write_record([
                i.to_string(),
                j.to_string(),
                format!("{}/{}", OUTPUT_ORDERING[i], OUTPUT_ORDERING[j]),
                r.estimate[i][j].to_string(),
                r.stderr[i][j].to_string(),
                r.reference[i][j].to_string(),
                r.z_scores[i][j].to_string(),
            ])?;
        }
    }
    finish(w)
}

pub fn oracle_csv(r: &OracleReport) -> CliResult<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["row", "col", "element", "oracle [1]", "quadrature [1]", "comparison", "deviation [1]", "pass"])?;
    for e in &r.elements {
        w.write_record([
            e.row.to_string(),
            e.col.to_string(),
            format!("{}/{}", OUTPUT_ORDERING[e.row], OUTPUT_ORDERING[e.col]),
            e.oracle.to_string(),
            e.quadrature.to_string(),
            match e.comparison {
                Comparison::Relative => "relative".into(),
                Comparison::Absolute => "absolute".into(),
            },
            e.deviation.to_string(),
            e.pass.to_string(),
        ])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn read_dir_entries(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut v: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        v.sort();
        Ok(v)
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"a\n").unwrap();
        write_atomic(&path, b"b\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"b\n");
        assert_eq!(read_dir_entries(dir.path()).unwrap(), vec![path]);
    }

    #[test]
    fn unwritable_directory_is_reported() {
        let e = write_atomic(Path::new("/nonexistent-dir/x.json"), b"{}").unwrap_err();
        assert!(matches!(e, CliError::Output { .. }));
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.manifest.json"));
    }

    #[test]
    fn csv_uses_lf_and_empty_missing_values() {
        let p = SweepPoint {
            x1: 0.5,
            x2: None,
            stable: Some(false),
            margin: Some(0.1),
            s_q_min: None,
            log10_s_q_min: None,
            b_max: None,
            purity: None,
            r_oracle: None,
            simon_separable: None,
            error: None,
        };
        let params = SystemParams::default();
        let filter = FilterSpec::symmetric(10.0, &params).unwrap();
        let r = SweepReport {
            panels: vec![SweepPanel {
                label: "x".into(),
                params,
                filter: FilterRecord::new(&filter, &params),
                axes: vec![Axis::new(ombell_core::axis::Parameter::GRatio, Default::default(), 0.5, 0.5, 1).unwrap()],
                rows: vec![vec![p]],
            }],
        };
        let text = String::from_utf8(sweep_csv(&r).unwrap()).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("panel,g_ratio [1],axis2,stable"));
        assert_eq!(lines[1], "x,0.5,,false,0.1,,,,,,,");
    }
}
