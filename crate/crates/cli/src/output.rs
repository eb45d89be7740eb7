//! Run artifacts: CSV time series, JSON metrics and SVG plots.
//!
//! Each file is written to a temporary sibling and renamed into place, so
//! readers never observe a partially written artifact.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use heol_core::{LogRecord, RunLog, RunMetrics, ScenarioConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config;
use crate::plot::{self, Chart, Series};

pub const CSV_HEADER: [&str; 18] = [
    "t", "x", "y", "psi", "u", "v", "r", "x_ref", "y_ref", "e_x", "e_y", "F_hat_x", "F_hat_y", "w_x", "w_y", "F_u",
    "psi_ref", "Gamma_r",
];

pub const LOG_CSV: &str = "log.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const PLOTS: [&str; 3] = ["trajectory_xy.svg", "errors_vs_time.svg", "estimates_vs_time.svg"];

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputBundle {
    pub log_csv: PathBuf,
    pub metrics_json: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Writes `path` by filling a temporary file in the same directory and
/// renaming it over the target.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), WriteError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let wrap = |source| WriteError { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    // temporaries are created owner-only; artifacts should be ordinary files
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(wrap)?;
    }
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(wrap)?;
        w.flush().map_err(wrap)?;
    }
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

fn row(r: &LogRecord) -> [f64; 18] {
    let s = r.state;
    [
        r.t,
        s.x,
        s.y,
        s.psi,
        s.u,
        s.v,
        s.r,
        r.reference.x[0],
        r.reference.y[0],
        r.e_x,
        r.e_y,
        r.f_hat_x,
        r.f_hat_y,
        r.w.wx,
        r.w.wy,
        r.fu,
        r.psi_ref,
        r.gamma_r,
    ]
}

/// One row per log record; floats use the shortest text that parses back to
/// the same value.
pub fn write_csv(log: &RunLog, out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let mut fields: Vec<String> = Vec::with_capacity(CSV_HEADER.len());
    for r in &log.records {
        fields.clear();
        // adding zero turns -0 into 0
        fields.extend(row(r).iter().map(|v| (v + 0.0).to_string()));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct MetricsReport {
    pub version: &'static str,
    pub config_hash: String,
    pub rms_error_x: f64,
    pub rms_error_y: f64,
    pub max_abs_error_x: f64,
    pub max_abs_error_y: f64,
    pub convergence_time: Option<f64>,
    #[serde(rename = "F_hat_x_mean")]
    pub f_hat_x_mean: f64,
    #[serde(rename = "F_hat_y_mean")]
    pub f_hat_y_mean: f64,
    #[serde(rename = "F_hat_x_std")]
    pub f_hat_x_std: f64,
    #[serde(rename = "F_hat_y_std")]
    pub f_hat_y_std: f64,
    pub singular_events: usize,
    pub rows: usize,
    pub resolved_config: serde_json::Map<String, serde_json::Value>,
}

/// SHA-256 of the canonical rendering of the resolved configuration.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    Sha256::digest(config::render(cfg).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl MetricsReport {
    pub fn new(cfg: &ScenarioConfig, m: &RunMetrics, rows: usize) -> Self {
        let resolved_config = config::entries(cfg)
            .into_iter()
            .map(|(k, v)| {
                let json = match v {
                    config::Value::Num(x) => serde_json::json!(x),
                    config::Value::Int(n) => serde_json::json!(n),
                    config::Value::Text(s) => serde_json::json!(s),
                };
                (k.to_string(), json)
            })
            .collect();
        Self {
            version: env!("CARGO_PKG_VERSION"),
            config_hash: config_hash(cfg),
            rms_error_x: m.rms_error_x,
            rms_error_y: m.rms_error_y,
            max_abs_error_x: m.max_abs_error_x,
            max_abs_error_y: m.max_abs_error_y,
            convergence_time: m.convergence_time,
            f_hat_x_mean: m.f_hat_x_mean,
            f_hat_y_mean: m.f_hat_y_mean,
            f_hat_x_std: m.f_hat_x_std,
            f_hat_y_std: m.f_hat_y_std,
            singular_events: m.singular_events,
            rows,
            resolved_config,
        }
    }

    /// Single-line `key=value` summary for the terminal.
    pub fn summary_line(&self) -> String {
        let conv = self.convergence_time.map_or("none".to_string(), |t| format!("{t:.3}"));
        format!(
            "rms_error_x={:.6} rms_error_y={:.6} max_abs_error_x={:.6} max_abs_error_y={:.6} convergence_time={conv} \
             F_hat_x_mean={:.4} F_hat_y_mean={:.4} F_hat_y_std={:.4} singular_events={}",
            self.rms_error_x,
            self.rms_error_y,
            self.max_abs_error_x,
            self.max_abs_error_y,
            self.f_hat_x_mean,
            self.f_hat_y_mean,
            self.f_hat_y_std,
            self.singular_events
        )
    }
}

fn series<'a>(label: &'a str, color: &'a str, log: &RunLog, f: impl Fn(&LogRecord) -> (f64, f64)) -> Series<'a> {
    let stride = log.records.len().div_ceil(4 * plot::MAX_POINTS).max(1);
    let mut points: Vec<_> = log.records.iter().step_by(stride).map(&f).collect();
    if let Some(last) = log.records.last() {
        if !(log.records.len() - 1).is_multiple_of(stride) {
            points.push(f(last));
        }
    }
    Series { label, color, dashed: false, points }
}

pub fn charts<'a>(cfg: &ScenarioConfig, log: &RunLog) -> [Chart<'a>; 3] {
    let t_end = log.records.last().map_or(0.0, |r| r.t);
    let constant = |label, color, v: f64| Series { label, color, dashed: true, points: vec![(0.0, v), (t_end, v)] };
    [
        Chart {
            title: "Trajectory",
            x_label: "x [m]",
            y_label: "y [m]",
            equal_aspect: true,
            series: vec![
                Series {
                    dashed: true,
                    ..series("reference", "#888888", log, |r| (r.reference.x[0], r.reference.y[0]))
                },
                series("vessel", "#1f77b4", log, |r| (r.state.x, r.state.y)),
            ],
        },
        Chart {
            title: "Tracking errors",
            x_label: "t [s]",
            y_label: "error [m]",
            equal_aspect: false,
            series: vec![
                series("e_x", "#1f77b4", log, |r| (r.t, r.e_x)),
                series("e_y", "#d62728", log, |r| (r.t, r.e_y)),
            ],
        },
        Chart {
            title: "Disturbance estimates",
            x_label: "t [s]",
            y_label: "force [m/s^2]",
            equal_aspect: false,
            series: vec![
                series("F_hat_x", "#1f77b4", log, |r| (r.t, r.f_hat_x)),
                series("F_hat_y", "#d62728", log, |r| (r.t, r.f_hat_y)),
                constant("wind x", "#9ecae1", cfg.wind.fx),
                constant("wind y", "#fc9272", cfg.wind.fy),
            ],
        },
    ]
}

pub fn write_bundle(
    out_dir: &Path,
    cfg: &ScenarioConfig,
    log: &RunLog,
    report: &MetricsReport,
) -> Result<OutputBundle, WriteError> {
    std::fs::create_dir_all(out_dir).map_err(|source| WriteError { path: out_dir.to_path_buf(), source })?;
    let log_csv = out_dir.join(LOG_CSV);
    write_atomic(&log_csv, |w| write_csv(log, w))?;

    let metrics_json = out_dir.join(METRICS_JSON);
    write_atomic(&metrics_json, |w| {
        serde_json::to_writer_pretty(&mut *w, report)?;
        writeln!(w)
    })?;

    let mut plots = Vec::new();
    for (name, chart) in PLOTS.iter().zip(charts(cfg, log)) {
        let path = out_dir.join(name);
        let svg = plot::render(&chart);
        write_atomic(&path, |w| w.write_all(svg.as_bytes()))?;
        plots.push(path);
    }
    Ok(OutputBundle { log_csv, metrics_json, plots })
}
