//! Deterministic result serialization.
//!
//! All floating-point values are written as fixed 9-fractional-digit
//! decimals, so identical runs produce byte-identical files. Metrics go to
//! one CSV table; activation histories (when recorded) go to dense
//! space-delimited matrices, one file per layer per trial, one row per time
//! step; tract trajectories go to two-column CSV tables.

use fieldplan_core::{ActivationHistory, ExperimentResult};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Fixed-format float: nine digits after the decimal point, `nan` for
/// missing values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.9}")
    }
}

/// (trial index, trial label, layer name, history).
pub type HeatmapEntry = (usize, String, String, ActivationHistory);

/// (trial index, trial label, trajectory).
pub type TrajectoryEntry = (usize, String, Vec<(f64, f64)>);

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub trial_label: String,
    pub peak_position: Option<f64>,
    pub threshold_onset: Option<f64>,
    pub shift_from_baseline: Option<f64>,
}

/// Everything a run wants written to disk.
#[derive(Debug, Default)]
pub struct ResultBundle {
    pub metrics: Vec<MetricsRow>,
    pub heatmaps: Vec<HeatmapEntry>,
    pub trajectories: Vec<TrajectoryEntry>,
}

impl ResultBundle {
    pub fn from_experiment(result: &ExperimentResult) -> Self {
        let baseline = result.trials.first().and_then(|t| t.peak_position);
        let mut bundle = ResultBundle::default();
        for (idx, trial) in result.trials.iter().enumerate() {
            let shift = match (baseline, trial.peak_position) {
                (Some(b), Some(p)) => Some(p - b),
                _ => None,
            };
            bundle.metrics.push(MetricsRow {
                trial_label: trial.label.clone(),
                peak_position: trial.peak_position,
                threshold_onset: trial.threshold_onset,
                shift_from_baseline: shift,
            });
            if let Some(history) = &trial.field_history {
                for (layer, hist) in history {
                    bundle
                        .heatmaps
                        .push((idx, trial.label.clone(), layer.clone(), hist.clone()));
                }
            }
            if let Some(traj) = &trial.tract_trajectory {
                bundle
                    .trajectories
                    .push((idx, trial.label.clone(), traj.clone()));
            }
        }
        bundle
    }
}

/// Write the bundle under `out_dir`, returning every file written.
pub fn write_results(bundle: &ResultBundle, out_dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();

    let metrics_path = out_dir.join("metrics.csv");
    {
        let mut text =
            String::from("trial_label,peak_position,threshold_onset,shift_from_baseline\n");
        for row in &bundle.metrics {
            let opt = |v: Option<f64>| fmt_f64(v.unwrap_or(f64::NAN));
            text.push_str(&format!(
                "{},{},{},{}\n",
                row.trial_label,
                opt(row.peak_position),
                opt(row.threshold_onset),
                opt(row.shift_from_baseline),
            ));
        }
        write_atomic(&metrics_path, text.as_bytes())?;
        written.push(metrics_path);
    }

    for (idx, label, layer, hist) in &bundle.heatmaps {
        let path = out_dir.join(format!("heatmap_{idx:02}_{label}_{layer}.txt"));
        let mut buf = Vec::with_capacity(hist.n_rows() * hist.n_points() * 13);
        for row in hist.rows() {
            let mut first = true;
            for &v in row {
                if !first {
                    buf.push(b' ');
                }
                buf.extend_from_slice(fmt_f64(v).as_bytes());
                first = false;
            }
            buf.push(b'\n');
        }
        write_atomic(&path, &buf)?;
        written.push(path);
    }

    for (idx, label, traj) in &bundle.trajectories {
        let path = out_dir.join(format!("trajectory_{idx:02}_{label}.csv"));
        let mut text = String::from("t,x_tv\n");
        for &(t, x) in traj {
            text.push_str(&format!("{},{}\n", fmt_f64(t), fmt_f64(x)));
        }
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }

    Ok(written)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))?;
    Ok(())
}
