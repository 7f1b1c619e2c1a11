//! Experiment orchestration and CSV emission: the characteristic-parameter
//! table and the plot-ready distribution, log-profile, and variance files.
//!
//! All files are plain CSV with `#`-prefixed header comments carrying the
//! config hash and master seed. Formatting uses fixed precision and ensembles
//! are bitwise deterministic, so a repeated run writes identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::RunConfig;
use crate::disorder::DisorderSpec;
use crate::ensemble::{run_ensemble, EnsembleError, EnsembleSummary};
use crate::fit::{
    fit_spatial_profile_pinned, fit_variance_power_law, FitError, SpatialFit, TemporalFit,
};
use crate::walk::Distribution;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("fit failed for p = {p}: {source}")]
    Fit { p: f64, source: FitError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

/// One table row: fitted exponents and scale factors for a disorder level.
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub p: f64,
    /// Step at which the spatial profile was fitted.
    pub t_fit: usize,
    pub spatial: SpatialFit,
    pub temporal: TemporalFit,
}

/// Everything produced by a `reproduce-table` run.
#[derive(Debug)]
pub struct TableArtifact {
    pub rows: Vec<TableRow>,
    pub csv_path: PathBuf,
    pub text_path: PathBuf,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn header(config: &RunConfig, extra: &str) -> String {
    let mut s = format!(
        "# config_hash={:016x} master_seed={} maps={} steps={}\n",
        config.hash(),
        config.master_seed,
        config.maps,
        config.steps
    );
    if !extra.is_empty() {
        let _ = writeln!(s, "# {extra}");
    }
    s
}

fn p_tag(p: f64) -> String {
    format!("{p:.3}").replace('.', "_")
}

fn disorder_spec(config: &RunConfig, p: f64) -> DisorderSpec {
    DisorderSpec {
        p,
        maps: config.maps,
        steps: config.steps,
        recorded_steps: config.recorded_steps.clone(),
        master_seed: config.master_seed,
        resample: config.resample,
    }
}

/// Run the ensemble for every disorder level and fit both exponents.
///
/// The spatial profile is fitted at the largest recorded step; the variance
/// power law is fitted over all recorded steps.
pub fn table_rows(config: &RunConfig) -> Result<Vec<TableRow>, ReportError> {
    let t_fit = *config
        .recorded_steps
        .iter()
        .max()
        .expect("validated config has recorded steps");
    let mut rows = Vec::with_capacity(config.p_values.len());
    for &p in &config.p_values {
        let summary = run_ensemble(&disorder_spec(config, p))?;
        rows.push(row_from_summary(config, &summary, t_fit)?);
    }
    Ok(rows)
}

/// Fit one summary into a table row; split out so forced single-map
/// summaries can be fitted the same way.
///
/// The spatial fit restricts the distribution to the configured window
/// (dropping the light-cone front) and pins the decay coefficient to the
/// windowed distribution's own spread; the temporal fit uses the full
/// variance series.
pub fn row_from_summary(
    config: &RunConfig,
    summary: &EnsembleSummary,
    t_fit: usize,
) -> Result<TableRow, ReportError> {
    let p = summary.spec.p;
    let dist = summary
        .distribution_at(t_fit)
        .expect("t_fit is a recorded step");
    let windowed = dist
        .restricted(config.effective_fit_window() as i64)
        .map_err(|_| ReportError::Fit {
            p,
            source: FitError::DegenerateProfile("no probability mass inside the fit window"),
        })?;
    let spatial =
        fit_spatial_profile_pinned(&windowed, config.min_prob, config.b_min, config.b_max)
            .map_err(|source| ReportError::Fit { p, source })?;
    let temporal = fit_variance_power_law(&summary.variance_series)
        .map_err(|source| ReportError::Fit { p, source })?;
    Ok(TableRow {
        p,
        t_fit,
        spatial,
        temporal,
    })
}

/// Run the full pipeline and write `table.csv` plus an aligned `table.txt`
/// under the configured output directory.
pub fn reproduce_table(config: &RunConfig) -> Result<TableArtifact, ReportError> {
    let rows = table_rows(config)?;

    let mut csv = header(
        config,
        "columns: p,t,b,stderr_b,delta,stderr_delta,two_d,stderr_two_d,c_squared",
    );
    csv.push_str("p,t,b,stderr_b,delta,stderr_delta,two_d,stderr_two_d,c_squared\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{:.3},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            row.p,
            row.t_fit,
            row.spatial.b,
            row.spatial.stderr_b,
            row.spatial.delta,
            row.spatial.stderr_delta,
            row.temporal.two_d,
            row.temporal.stderr_two_d,
            row.temporal.c_squared,
        );
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:>5}  {:>16}  {:>16}  {:>16}  {:>10}",
        "p", "b", "delta", "2d", "c^2"
    );
    for row in &rows {
        let _ = writeln!(
            text,
            "{:>5.3}  {:>7.3} ± {:>6.3}  {:>7.4} ± {:>6.4}  {:>7.3} ± {:>6.3}  {:>10.3}",
            row.p,
            row.spatial.b,
            row.spatial.stderr_b,
            row.spatial.delta,
            row.spatial.stderr_delta,
            row.temporal.two_d,
            row.temporal.stderr_two_d,
            row.temporal.c_squared,
        );
    }

    let csv_path = config.output_dir.join("table.csv");
    let text_path = config.output_dir.join("table.txt");
    write_file(&csv_path, &csv)?;
    write_file(&text_path, &text)?;
    Ok(TableArtifact {
        rows,
        csv_path,
        text_path,
    })
}

/// Files produced by a `simulate` run.
#[derive(Debug)]
pub struct DistributionArtifacts {
    pub distribution_files: Vec<PathBuf>,
    pub row_normalized_files: Vec<PathBuf>,
    pub log_profile_files: Vec<PathBuf>,
    pub variance_file: PathBuf,
}

/// Run the ensembles and emit, per disorder level, the averaged
/// distributions, a row-max-normalized variant (heat-map convention: each
/// step's row is scaled to peak 1), and log-profile data for plotting, plus
/// one variance file spanning all levels.
pub fn emit_distribution_data(config: &RunConfig) -> Result<DistributionArtifacts, ReportError> {
    let mut distribution_files = Vec::new();
    let mut row_normalized_files = Vec::new();
    let mut log_profile_files = Vec::new();
    let mut variance = header(config, "columns: p,t,variance");
    variance.push_str("p,t,variance\n");

    for &p in &config.p_values {
        let summary = run_ensemble(&disorder_spec(config, p))?;
        let tag = p_tag(p);

        let mut dist_csv = header(config, &format!("columns: t,x,P_mean  p={p:.3}"));
        dist_csv.push_str("t,x,P_mean\n");
        for (t, dist) in &summary.averaged_distributions {
            for (x, prob) in dist.iter() {
                let _ = writeln!(dist_csv, "{t},{x},{prob:.10e}");
            }
        }
        let path = config.output_dir.join(format!("dist_p{tag}.csv"));
        write_file(&path, &dist_csv)?;
        distribution_files.push(path);

        let mut norm_csv = header(config, &format!("columns: t,x,P_rownorm  p={p:.3}"));
        norm_csv.push_str("t,x,P_rownorm\n");
        for (t, dist) in &summary.averaged_distributions {
            let peak = dist.probs().iter().cloned().fold(0.0f64, f64::max);
            for (x, prob) in dist.iter() {
                let _ = writeln!(norm_csv, "{t},{x},{:.10e}", prob / peak);
            }
        }
        let path = config.output_dir.join(format!("dist_rownorm_p{tag}.csv"));
        write_file(&path, &norm_csv)?;
        row_normalized_files.push(path);

        let mut log_csv = header(
            config,
            &format!("columns: t,x,ln_P  p={p:.3}  min_prob={}", config.min_prob),
        );
        log_csv.push_str("t,x,ln_P\n");
        for (t, dist) in &summary.averaged_distributions {
            for (x, prob) in dist.iter().filter(|&(_, prob)| prob > config.min_prob) {
                let _ = writeln!(log_csv, "{t},{x},{:.10e}", prob.ln());
            }
        }
        let path = config.output_dir.join(format!("logprofile_p{tag}.csv"));
        write_file(&path, &log_csv)?;
        log_profile_files.push(path);

        for &(t, var) in &summary.variance_series {
            let _ = writeln!(variance, "{p:.3},{t},{var:.10e}");
        }
    }

    let variance_file = config.output_dir.join("variance.csv");
    write_file(&variance_file, &variance)?;
    Ok(DistributionArtifacts {
        distribution_files,
        row_normalized_files,
        log_profile_files,
        variance_file,
    })
}

/// Parse a `t,x,P_mean` CSV back into per-step distributions.
///
/// Accepts the files written by [`emit_distribution_data`]; comment lines
/// start with `#` and the header row is required.
pub fn parse_distribution_csv(path: &Path) -> Result<Vec<(usize, Distribution)>, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |reason: String| ReportError::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut rows: Vec<(usize, i64, f64)> = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "t,x,P_mean" {
                return Err(bad(format!(
                    "line {}: expected header `t,x,P_mean`, got `{line}`",
                    lineno + 1
                )));
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let parse_err = |field: &str| bad(format!("line {}: bad {field}", lineno + 1));
        let t = fields
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| parse_err("t"))?;
        let x = fields
            .next()
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or_else(|| parse_err("x"))?;
        let prob = fields
            .next()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| parse_err("P_mean"))?;
        rows.push((t, x, prob));
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    let half_width = rows
        .iter()
        .map(|&(_, x, _)| x.unsigned_abs())
        .max()
        .unwrap() as usize;
    let mut steps: Vec<usize> = rows.iter().map(|&(t, _, _)| t).collect();
    steps.sort_unstable();
    steps.dedup();
    let mut out = Vec::with_capacity(steps.len());
    for &t in &steps {
        let mut probs = vec![0.0; 2 * half_width + 1];
        for &(rt, x, prob) in &rows {
            if rt == t {
                probs[(x + half_width as i64) as usize] = prob;
            }
        }
        let dist = Distribution::from_probs(half_width, probs)
            .map_err(|e| bad(format!("step {t}: {e}")))?;
        out.push((t, dist));
    }
    Ok(out)
}
