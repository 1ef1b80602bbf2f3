//! Experiment orchestration and run-directory input/output.
//!
//! A run simulates `replicates` independent trajectories (replicate r draws
//! its stream seed from the base seed), estimates each with the truncated
//! recursion, records checkpointed traces, aggregates them into a report,
//! and optionally certifies the excitation geometry. Replicates are
//! dispatched to a bounded worker pool; all file writing happens on the
//! calling thread in replicate order, so identical configs produce
//! byte-identical output trees.
//!
//! Everything written is re-ingestible: `report_from_dir` reconstructs the
//! traces from the estimate CSVs alone and reproduces the verdicts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::diagnostics::{aggregate, DiagnosticsReport, ReplicateTrace};
use crate::error::{Error, Result};
use crate::estimator::{error_metrics, rls_init, rls_step, truncated_regressor, EigenTrack};
use crate::excitation::{
    box_count, choose_delta_star, default_probes_per_box, jordan_boundary_check, sphere_infimum,
    Domain,
};
use crate::models::{ModelSpec, NoiseSpec};
use crate::rng::{replicate_seed, SplitMix64};
use crate::sim::{count_recurrence, simulate, Trajectory};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "NLAR_LSE_THREADS";

/// Everything produced for one replicate.
#[derive(Debug, Clone)]
pub struct ReplicateOutput {
    pub trajectory: Trajectory,
    pub trace: ReplicateTrace,
    /// Parameter estimate snapshots per checkpoint, for the trace CSV.
    pub theta_rows: Vec<Vec<f64>>,
}

/// Full in-memory result of a run.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub replicates: Vec<ReplicateOutput>,
    pub report: DiagnosticsReport,
    pub excitation: Option<CertificationReport>,
}

impl ExperimentOutput {
    /// True when every configured expectation holds, including the
    /// excitation-certification expectation when that block is present.
    pub fn all_pass(&self) -> bool {
        self.report.all_criteria_pass() && self.excitation.as_ref().map(|c| c.pass).unwrap_or(true)
    }
}

/// Simulates and estimates one replicate, recording a checkpointed trace.
///
/// Checkpoints beyond the recorded data of a stopped (diverged) run repeat
/// the final state with the frozen visit count, keeping every trace on the
/// shared grid.
pub fn run_replicate(
    model: &ModelSpec,
    noise: &NoiseSpec,
    config: &ExperimentConfig,
    checkpoints: &[usize],
    replicate: usize,
) -> Result<ReplicateOutput> {
    let seed = replicate_seed(config.seed, replicate as u64);
    let trajectory = simulate(
        model,
        noise,
        config.t_max as usize,
        seed,
        config.divergence_threshold,
    )?;
    let counter = count_recurrence(
        &trajectory,
        config.m_threshold,
        checkpoints,
        config.omega_min_fraction,
    )?;
    let m = model.regressor().dim();
    let c_phi = config.effective_c_phi();
    let theta0 = config.theta0_or_zeros(m);
    let mut state = rls_init(&theta0, Some(c_phi))?;

    let mut trace = ReplicateTrace {
        replicate,
        seed,
        horizon: config.t_max as usize,
        m_threshold: config.m_threshold,
        checkpoints: checkpoints.to_vec(),
        err2: Vec::with_capacity(checkpoints.len()),
        lambda_min: Vec::with_capacity(checkpoints.len()),
        lambda_max: Vec::with_capacity(checkpoints.len()),
        n_t: Vec::with_capacity(checkpoints.len()),
        r_t: Vec::with_capacity(checkpoints.len()),
        diverged: trajectory.diverged(),
    };
    let mut theta_rows = Vec::with_capacity(checkpoints.len());
    let mut eigen_track = EigenTrack::default();

    let steps_available = trajectory.last_time();
    let mut cp_idx = 0usize;
    let record = |state: &crate::estimator::EstimatorState,
                  cp_idx: usize,
                  eigen_track: &mut EigenTrack,
                  trace: &mut ReplicateTrace,
                  theta_rows: &mut Vec<Vec<f64>>|
     -> Result<()> {
        let (lo, hi) = eigen_track.record(checkpoints[cp_idx], state)?;
        let metrics = error_metrics(state.theta_hat(), model.theta(), lo, hi);
        trace.err2.push(metrics.err2);
        trace.lambda_min.push(lo);
        trace.lambda_max.push(hi);
        trace.n_t.push(counter.counts[cp_idx]);
        trace.r_t.push(state.r_t());
        theta_rows.push(state.theta_hat().to_vec());
        Ok(())
    };

    for t in 0..steps_available {
        let phi = truncated_regressor(model.regressor(), &trajectory, t, c_phi)?;
        rls_step(&mut state, &phi, trajectory.values()[t + 1])?;
        while cp_idx < checkpoints.len() && checkpoints[cp_idx] == state.step_count() {
            record(
                &state,
                cp_idx,
                &mut eigen_track,
                &mut trace,
                &mut theta_rows,
            )?;
            cp_idx += 1;
        }
    }
    while cp_idx < checkpoints.len() {
        record(
            &state,
            cp_idx,
            &mut eigen_track,
            &mut trace,
            &mut theta_rows,
        )?;
        cp_idx += 1;
    }
    Ok(ReplicateOutput {
        trajectory,
        trace,
        theta_rows,
    })
}

fn worker_count(config: &ExperimentConfig) -> usize {
    let mut limit = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    if let Ok(env) = std::env::var(THREADS_ENV) {
        if let Ok(n) = env.trim().parse::<usize>() {
            if n >= 1 {
                limit = limit.min(n);
            }
        }
    }
    if let Some(n) = config.threads {
        if n >= 1 {
            limit = limit.min(n);
        }
    }
    limit.min(config.replicates as usize).max(1)
}

/// Runs every replicate (in a bounded worker pool), aggregates, and runs the
/// excitation certification when configured.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let model = config.build_model()?;
    let noise = config.build_noise()?;
    let checkpoints = config.checkpoint_times();
    let replicates = config.replicates as usize;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outputs: Result<Vec<ReplicateOutput>> = pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map(|r| run_replicate(&model, &noise, config, &checkpoints, r))
            .collect()
    });
    let outputs = outputs?;

    let traces: Vec<ReplicateTrace> = outputs.iter().map(|o| o.trace.clone()).collect();
    let report = aggregate(
        &traces,
        config.digest(),
        config.omega_min_fraction,
        &config.criteria,
    )?;
    let excitation = match &config.excitation {
        Some(_) => Some(certify_excitation(config)?),
        None => None,
    };
    Ok(ExperimentOutput {
        replicates: outputs,
        report,
        excitation,
    })
}

/// Excitation certification written to `excitation.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub model: String,
    pub domain_label: String,
    pub domain_boxes: Vec<BoxBounds>,
    pub certified: bool,
    /// Whether the outcome matched the configured expectation.
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub infimum_value: f64,
    pub infimum_direction: Vec<f64>,
    pub box_ratios: Vec<BoxRatioRow>,
    pub jordan_series: Vec<JordanRow>,
    pub seeds: SeedRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxRatioRow {
    pub r: usize,
    #[serde(rename = "K")]
    pub count: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JordanRow {
    pub r: usize,
    pub covered_volume: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub base: u64,
    pub excitation: u64,
}

/// Runs the excitation block: threshold selection over the grid, then cell
/// counts and the vanishing-cover series at the certified (or worst-found)
/// direction.
pub fn certify_excitation(config: &ExperimentConfig) -> Result<CertificationReport> {
    let exc = config
        .excitation
        .as_ref()
        .ok_or_else(|| Error::Config("no excitation block configured".into()))?;
    let model = config.build_model()?;
    let map = model.regressor();
    let domain: Domain = exc.domain.build()?;
    let budget = exc.budget();
    let excitation_seed = SplitMix64::new(config.seed ^ 0xE5C1_7A71).next_u64();

    let attempt = choose_delta_star(
        map,
        &domain,
        &exc.delta_grid,
        exc.min_measure,
        budget,
        excitation_seed,
    );
    let (certified, delta_star, failure, infimum) = match attempt {
        Ok((delta, result)) => (true, Some(delta), None, result),
        Err(Error::CertificationFailure(msg)) => {
            // Report the worst direction at the smallest threshold anyway.
            let fallback =
                sphere_infimum(map, &domain, exc.delta_grid[0], budget, excitation_seed)?;
            (false, None, Some(msg), fallback)
        }
        Err(e) => return Err(e),
    };

    let probe_delta = delta_star.unwrap_or(exc.delta_grid[0]);
    let region = domain.bounding_box();
    let probes = exc
        .probes_per_box
        .unwrap_or_else(|| default_probes_per_box(region.dim()));
    let mut box_ratios = Vec::with_capacity(exc.box_r.len());
    for &r in &exc.box_r {
        let result = box_count(map, &infimum.direction, probe_delta, &region, r, probes)?;
        box_ratios.push(BoxRatioRow {
            r,
            count: result.count,
            ratio: result.ratio,
        });
    }
    let jordan =
        jordan_boundary_check(map, &domain, &infimum.direction, probe_delta, &exc.jordan_r)?;
    let jordan_series = exc
        .jordan_r
        .iter()
        .zip(jordan)
        .map(|(&r, covered_volume)| JordanRow { r, covered_volume })
        .collect();

    Ok(CertificationReport {
        model: model.name().to_string(),
        domain_label: domain.label().to_string(),
        domain_boxes: domain
            .boxes()
            .iter()
            .map(|b| BoxBounds {
                lo: b.lo().to_vec(),
                hi: b.hi().to_vec(),
            })
            .collect(),
        certified,
        pass: certified == exc.expect_certification,
        delta_star,
        failure,
        infimum_value: infimum.value,
        infimum_direction: infimum.direction,
        box_ratios,
        jordan_series,
        seeds: SeedRecord {
            base: config.seed,
            excitation: excitation_seed,
        },
    })
}

// ---------------------------------------------------------------------------
// Run-directory layout and writers
// ---------------------------------------------------------------------------

fn trajectory_csv_path(dir: &Path, replicate: usize) -> PathBuf {
    dir.join(format!("trajectory_r{replicate:03}.csv"))
}

fn trajectory_meta_path(dir: &Path, replicate: usize) -> PathBuf {
    dir.join(format!("trajectory_r{replicate:03}.meta.json"))
}

fn estimate_csv_path(dir: &Path, replicate: usize) -> PathBuf {
    dir.join(format!("estimate_r{replicate:03}.csv"))
}

fn estimate_meta_path(dir: &Path, replicate: usize) -> PathBuf {
    dir.join(format!("estimate_r{replicate:03}.meta.json"))
}

/// Sidecar metadata for one trajectory CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub replicate: usize,
    pub seed: u64,
    pub model: String,
    pub noise: String,
    pub horizon: usize,
    pub recorded: usize,
    pub diverged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_time: Option<usize>,
}

/// Sidecar metadata for one estimate CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateMeta {
    pub replicate: usize,
    pub seed: u64,
    pub horizon: usize,
    pub m_threshold: f64,
    pub dim: usize,
    pub diverged: bool,
}

pub fn write_config(dir: &Path, config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut file = fs::File::create(dir.join("config.json"))?;
    writeln!(file, "{}", crate::config::to_json_pretty(config))?;
    Ok(())
}

pub fn write_trajectory(
    dir: &Path,
    replicate: usize,
    traj: &Trajectory,
    horizon: usize,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = String::with_capacity(traj.values().len() * 24);
    csv.push_str("t,y\n");
    for (t, y) in traj.values().iter().enumerate() {
        csv.push_str(&format!("{t},{y}\n"));
    }
    fs::write(trajectory_csv_path(dir, replicate), csv)?;
    let meta = TrajectoryMeta {
        replicate,
        seed: traj.seed(),
        model: traj.model_name().to_string(),
        noise: traj.noise_tag().to_string(),
        horizon,
        recorded: traj.values().len(),
        diverged: traj.diverged(),
        divergence_time: traj.divergence_time(),
    };
    write_json(&trajectory_meta_path(dir, replicate), &meta)
}

pub fn write_estimate(dir: &Path, output: &ReplicateOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let trace = &output.trace;
    let dim = output.theta_rows.first().map(|r| r.len()).unwrap_or(0);
    let mut csv = String::new();
    csv.push('t');
    for j in 0..dim {
        csv.push_str(&format!(",theta_hat_{j}"));
    }
    csv.push_str(",err2,lambda_min,lambda_max,r_t,N_t\n");
    for (i, &t) in trace.checkpoints.iter().enumerate() {
        csv.push_str(&format!("{t}"));
        for v in &output.theta_rows[i] {
            csv.push_str(&format!(",{v}"));
        }
        csv.push_str(&format!(
            ",{},{},{},{},{}\n",
            trace.err2[i], trace.lambda_min[i], trace.lambda_max[i], trace.r_t[i], trace.n_t[i]
        ));
    }
    fs::write(estimate_csv_path(dir, trace.replicate), csv)?;
    let meta = EstimateMeta {
        replicate: trace.replicate,
        seed: trace.seed,
        horizon: trace.horizon,
        m_threshold: trace.m_threshold,
        dim,
        diverged: trace.diverged,
    };
    write_json(&estimate_meta_path(dir, trace.replicate), &meta)
}

pub fn write_report(dir: &Path, report: &DiagnosticsReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;
    let mut csv = String::new();
    csv.push_str("replicate,final_err2,ratio_floor,rate_c,recurrence\n");
    for row in &report.replicates {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.replicate, row.final_err2, row.ratio_floor, row.rate_c, row.recurrence
        ));
    }
    fs::write(dir.join("summary.csv"), csv)?;
    Ok(())
}

pub fn write_excitation(dir: &Path, report: &CertificationReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("excitation.json"), report)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serialize {}: {e}", path.display())))?;
    let mut file = fs::File::create(path)?;
    writeln!(file, "{text}")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Writes the complete artifact tree for a run.
pub fn write_run(dir: &Path, config: &ExperimentConfig, output: &ExperimentOutput) -> Result<()> {
    write_config(dir, config)?;
    for rep in &output.replicates {
        write_trajectory(dir, rep.trace.replicate, &rep.trajectory, rep.trace.horizon)?;
        write_estimate(dir, rep)?;
    }
    write_report(dir, &output.report)?;
    if let Some(cert) = &output.excitation {
        write_excitation(dir, cert)?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(field: &str, path: &Path, line: usize) -> Result<T> {
    field.parse().map_err(|_| {
        Error::Parse(format!(
            "{}: line {line}: cannot parse value '{field}'",
            path.display()
        ))
    })
}

/// Rebuilds one replicate trace from its estimate CSV and sidecar.
pub fn read_estimate(dir: &Path, replicate: usize) -> Result<ReplicateTrace> {
    let meta: EstimateMeta = read_json(&estimate_meta_path(dir, replicate))?;
    let path = estimate_csv_path(dir, replicate);
    let text = fs::read_to_string(&path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let expected_cols = 1 + meta.dim + 5;
    if header.split(',').count() != expected_cols {
        return Err(Error::Parse(format!(
            "{}: header has wrong column count",
            path.display()
        )));
    }
    let mut trace = ReplicateTrace {
        replicate: meta.replicate,
        seed: meta.seed,
        horizon: meta.horizon,
        m_threshold: meta.m_threshold,
        checkpoints: Vec::new(),
        err2: Vec::new(),
        lambda_min: Vec::new(),
        lambda_max: Vec::new(),
        n_t: Vec::new(),
        r_t: Vec::new(),
        diverged: meta.diverged,
    };
    for (line_no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::Parse(format!(
                "{}: line {line_no}: expected {expected_cols} columns",
                path.display()
            )));
        }
        trace
            .checkpoints
            .push(parse_field(fields[0], &path, line_no)?);
        let tail = &fields[1 + meta.dim..];
        trace.err2.push(parse_field(tail[0], &path, line_no)?);
        trace.lambda_min.push(parse_field(tail[1], &path, line_no)?);
        trace.lambda_max.push(parse_field(tail[2], &path, line_no)?);
        trace.r_t.push(parse_field(tail[3], &path, line_no)?);
        trace.n_t.push(parse_field(tail[4], &path, line_no)?);
    }
    trace.validate()?;
    Ok(trace)
}

/// Re-ingests a run directory and recomputes the diagnostics report from the
/// exported files alone.
pub fn report_from_dir(dir: &Path) -> Result<DiagnosticsReport> {
    let config = crate::config::parse_config(dir.join("config.json"))?;
    let mut traces = Vec::with_capacity(config.replicates as usize);
    for r in 0..config.replicates as usize {
        traces.push(read_estimate(dir, r)?);
    }
    aggregate(
        &traces,
        config.digest(),
        config.omega_min_fraction,
        &config.criteria,
    )
}
