//! Aggregation of per-replicate traces into empirical consistency signatures.
//!
//! A run produces one [`ReplicateTrace`] per replicate: squared parameter
//! error, information-matrix eigenvalue extremes, and compact-set visit
//! counts, all on a shared checkpoint grid. The diagnostics reduce those to
//! the signatures the asymptotic theory predicts: λ_min growing in lockstep
//! with N_t (a ratio with a positive floor), squared error enveloped by
//! log N_t / N_t, stationary λ_min(T)/T for stable linear models, and a
//! recurrent/divergent classification of each path.
//!
//! "liminf"-style statistics are approximated by the minimum over the final
//! few log-spaced checkpoints; a finite-horizon surrogate, recorded as such.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Checkpointed series recorded while estimating one replicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateTrace {
    pub replicate: usize,
    pub seed: u64,
    /// Nominal horizon T (recorded data may stop earlier on divergence).
    pub horizon: usize,
    /// Ball radius M the visit counts were taken at.
    pub m_threshold: f64,
    pub checkpoints: Vec<usize>,
    pub err2: Vec<f64>,
    pub lambda_min: Vec<f64>,
    pub lambda_max: Vec<f64>,
    pub n_t: Vec<u64>,
    pub r_t: Vec<f64>,
    pub diverged: bool,
}

impl ReplicateTrace {
    pub fn validate(&self) -> Result<()> {
        let len = self.checkpoints.len();
        if len == 0 {
            return Err(Error::invalid("trace needs at least one checkpoint"));
        }
        if [
            self.err2.len(),
            self.lambda_min.len(),
            self.lambda_max.len(),
            self.n_t.len(),
            self.r_t.len(),
        ]
        .iter()
        .any(|&l| l != len)
        {
            return Err(Error::invalid(
                "trace series must share the checkpoint grid",
            ));
        }
        if self
            .lambda_min
            .iter()
            .zip(self.lambda_max.iter())
            .any(|(lo, hi)| lo > hi)
        {
            return Err(Error::invalid("lambda_min must not exceed lambda_max"));
        }
        Ok(())
    }

    /// Value of a series at the latest checkpoint not exceeding `t`.
    fn index_at(&self, t: usize) -> Option<usize> {
        self.checkpoints.iter().rposition(|&c| c <= t)
    }
}

/// Pointwise λ_min(t) / max(N_t, 1), with a flag wherever the denominator
/// was clamped because the path had not yet visited the ball.
#[derive(Debug, Clone)]
pub struct RatioSeries {
    pub values: Vec<f64>,
    pub clamped: Vec<bool>,
}

pub fn ratio_series(trace: &ReplicateTrace) -> RatioSeries {
    let mut values = Vec::with_capacity(trace.checkpoints.len());
    let mut clamped = Vec::with_capacity(trace.checkpoints.len());
    for (lo, &n) in trace.lambda_min.iter().zip(trace.n_t.iter()) {
        let denom = n.max(1) as f64;
        values.push(lo / denom);
        clamped.push(n == 0);
    }
    RatioSeries { values, clamped }
}

/// Smallest constant c with err2 ≤ c·log(N_t)/N_t along the observed path:
/// the max over checkpoints (with N_t ≥ 3) of err2·N_t/log N_t.
pub fn rate_fit(trace: &ReplicateTrace) -> f64 {
    trace
        .err2
        .iter()
        .zip(trace.n_t.iter())
        .filter(|(_, &n)| n >= 3)
        .map(|(&e, &n)| e * n as f64 / (n as f64).ln())
        .fold(0.0, f64::max)
}

/// Finite-sample proxy for the trichotomy "visits a compact set infinitely
/// often / escapes / unclear".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recurrence {
    Recurrent,
    Divergent,
    Indeterminate,
}

impl std::fmt::Display for Recurrence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Recurrence::Recurrent => "recurrent",
            Recurrence::Divergent => "divergent",
            Recurrence::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

/// Divergent when the path escaped or its visit count froze over the second
/// half of the horizon; Recurrent when the final count covers at least
/// `omega_min_fraction` of the horizon; Indeterminate otherwise.
pub fn classify_recurrence(trace: &ReplicateTrace, omega_min_fraction: f64) -> Recurrence {
    let (n_final, n_half) = visit_counts(trace);
    if trace.diverged || n_final == n_half {
        return Recurrence::Divergent;
    }
    if n_final as f64 >= omega_min_fraction * trace.horizon as f64 {
        return Recurrence::Recurrent;
    }
    Recurrence::Indeterminate
}

/// (N_T, N_{T/2}) read off the checkpoint grid.
fn visit_counts(trace: &ReplicateTrace) -> (u64, u64) {
    let final_idx = trace.index_at(trace.horizon).unwrap_or(0);
    let half_idx = trace.index_at(trace.horizon / 2).unwrap_or(0);
    (trace.n_t[final_idx], trace.n_t[half_idx])
}

/// Expectations a run is checked against; each block is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CriteriaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<RecurrenceExpectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_floor: Option<RatioFloorCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen_rate: Option<EigenRateCheck>,
}

impl CriteriaConfig {
    pub fn is_empty(&self) -> bool {
        self.recurrence.is_none()
            && self.consistency.is_none()
            && self.ratio_floor.is_none()
            && self.eigen_rate.is_none()
    }
}

/// At least `min_fraction` of the replicates classify as `class`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceExpectation {
    pub class: Recurrence,
    #[serde(default = "default_min_fraction")]
    pub min_fraction: f64,
}

/// Median final err2 within `err2_factor`·log(N_T)/N_T (medians across
/// replicates), and the median err2 series decreasing across at least
/// `decreasing_fraction` of consecutive checkpoints beyond `after`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyCheck {
    #[serde(default = "default_err2_factor")]
    pub err2_factor: f64,
    #[serde(default = "default_decreasing_fraction")]
    pub decreasing_fraction: f64,
    #[serde(default = "default_after")]
    pub after: usize,
}

/// Per replicate, the minimum of λ_min/N_t over the last `final_window`
/// checkpoints stays above `floor_factor` times its value at `reference_t`,
/// and the ratio is positive at every checkpoint past `positive_after`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RatioFloorCheck {
    #[serde(default = "default_floor_factor")]
    pub floor_factor: f64,
    pub reference_t: usize,
    #[serde(default = "default_final_window")]
    pub final_window: usize,
    #[serde(default = "default_min_fraction")]
    pub min_fraction: f64,
    #[serde(default = "default_after")]
    pub positive_after: usize,
}

/// Per replicate, λ_min(T)/T within `rel_tol` of λ_min(T/2)/(T/2).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EigenRateCheck {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_min_fraction")]
    pub min_fraction: f64,
}

fn default_min_fraction() -> f64 {
    0.9
}
fn default_err2_factor() -> f64 {
    10.0
}
fn default_decreasing_fraction() -> f64 {
    0.9
}
fn default_after() -> usize {
    1000
}
fn default_floor_factor() -> f64 {
    0.5
}
fn default_final_window() -> usize {
    5
}
fn default_rel_tol() -> f64 {
    0.2
}

/// One row of the human-readable summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub replicate: usize,
    pub seed: u64,
    pub final_err2: f64,
    /// min of λ_min/N_t over the final checkpoints (liminf surrogate).
    pub ratio_floor: f64,
    pub rate_c: f64,
    pub recurrence: Recurrence,
    pub n_final: u64,
    pub n_half: u64,
    pub diverged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RecurrenceCounts {
    pub recurrent: usize,
    pub divergent: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Short description of the model/config the traces came from.
    pub digest: String,
    pub replicate_count: usize,
    pub median_final_err2: f64,
    pub median_final_n: f64,
    pub median_rate_c: f64,
    pub max_rate_c: f64,
    pub recurrence: RecurrenceCounts,
    pub replicates: Vec<ReplicateSummary>,
    pub criteria: Vec<CriterionVerdict>,
}

impl DiagnosticsReport {
    pub fn all_criteria_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// The liminf surrogate: minimum ratio over the last `window` checkpoints.
fn final_ratio_floor(trace: &ReplicateTrace, window: usize) -> f64 {
    let ratios = ratio_series(trace);
    let start = ratios.values.len().saturating_sub(window.max(1));
    ratios.values[start..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Reduces traces to medians, per-replicate summaries, and verdicts for the
/// configured expectations. Deterministic in its inputs.
pub fn aggregate(
    traces: &[ReplicateTrace],
    digest: impl Into<String>,
    omega_min_fraction: f64,
    criteria: &CriteriaConfig,
) -> Result<DiagnosticsReport> {
    if traces.is_empty() {
        return Err(Error::invalid("need at least one replicate trace"));
    }
    for trace in traces {
        trace.validate()?;
    }
    let final_window = criteria
        .ratio_floor
        .as_ref()
        .map(|c| c.final_window)
        .unwrap_or(default_final_window());

    let mut summaries = Vec::with_capacity(traces.len());
    let mut counts = RecurrenceCounts::default();
    for trace in traces {
        let class = classify_recurrence(trace, omega_min_fraction);
        match class {
            Recurrence::Recurrent => counts.recurrent += 1,
            Recurrence::Divergent => counts.divergent += 1,
            Recurrence::Indeterminate => counts.indeterminate += 1,
        }
        let (n_final, n_half) = visit_counts(trace);
        summaries.push(ReplicateSummary {
            replicate: trace.replicate,
            seed: trace.seed,
            final_err2: *trace.err2.last().unwrap(),
            ratio_floor: final_ratio_floor(trace, final_window),
            rate_c: rate_fit(trace),
            recurrence: class,
            n_final,
            n_half,
            diverged: trace.diverged,
        });
    }

    let mut final_err2: Vec<f64> = summaries.iter().map(|s| s.final_err2).collect();
    let mut final_n: Vec<f64> = summaries.iter().map(|s| s.n_final as f64).collect();
    let mut rate_cs: Vec<f64> = summaries.iter().map(|s| s.rate_c).collect();
    let median_final_err2 = median(&mut final_err2);
    let median_final_n = median(&mut final_n);
    let median_rate_c = median(&mut rate_cs);
    let max_rate_c = rate_cs.iter().copied().fold(0.0, f64::max);

    let mut verdicts = Vec::new();
    if let Some(expect) = &criteria.recurrence {
        let hits = summaries
            .iter()
            .filter(|s| s.recurrence == expect.class)
            .count();
        let frac = hits as f64 / summaries.len() as f64;
        verdicts.push(CriterionVerdict {
            name: "recurrence".into(),
            pass: frac >= expect.min_fraction,
            detail: format!(
                "{hits}/{} replicates classified {}, need fraction {}",
                summaries.len(),
                expect.class,
                expect.min_fraction
            ),
        });
    }
    if let Some(check) = &criteria.consistency {
        let envelope = if median_final_n >= 3.0 {
            check.err2_factor * median_final_n.ln() / median_final_n
        } else {
            f64::INFINITY
        };
        let level_pass = median_final_err2 <= envelope;

        // Median err2 across replicates at each checkpoint past `after`.
        let grid = &traces[0].checkpoints;
        let mut medians = Vec::new();
        for (idx, &t) in grid.iter().enumerate() {
            if t <= check.after {
                continue;
            }
            let mut column: Vec<f64> = traces.iter().map(|tr| tr.err2[idx]).collect();
            medians.push(median(&mut column));
        }
        let pairs = medians.len().saturating_sub(1);
        let decreasing = medians.windows(2).filter(|w| w[1] < w[0]).count();
        let trend_pass =
            pairs == 0 || decreasing as f64 >= check.decreasing_fraction * pairs as f64;

        verdicts.push(CriterionVerdict {
            name: "consistency".into(),
            pass: level_pass && trend_pass,
            detail: format!(
                "median final err2 {median_final_err2:.6e} vs envelope {envelope:.6e}; \
                 {decreasing}/{pairs} consecutive median decreases"
            ),
        });
    }
    if let Some(check) = &criteria.ratio_floor {
        let mut hits = 0usize;
        for trace in traces {
            let ratios = ratio_series(trace);
            let reference = trace
                .index_at(check.reference_t)
                .map(|i| ratios.values[i])
                .unwrap_or(f64::INFINITY);
            let floor = final_ratio_floor(trace, check.final_window);
            let positive = trace
                .checkpoints
                .iter()
                .zip(ratios.values.iter())
                .filter(|(&t, _)| t > check.positive_after)
                .all(|(_, &v)| v > 0.0);
            if floor >= check.floor_factor * reference && positive {
                hits += 1;
            }
        }
        let frac = hits as f64 / traces.len() as f64;
        verdicts.push(CriterionVerdict {
            name: "ratio_floor".into(),
            pass: frac >= check.min_fraction,
            detail: format!(
                "{hits}/{} replicates hold the floor at factor {} of t={}",
                traces.len(),
                check.floor_factor,
                check.reference_t
            ),
        });
    }
    if let Some(check) = &criteria.eigen_rate {
        let mut hits = 0usize;
        for trace in traces {
            let f_idx = trace.index_at(trace.horizon).unwrap_or(0);
            let h_idx = trace.index_at(trace.horizon / 2).unwrap_or(0);
            let a = trace.lambda_min[f_idx] / trace.checkpoints[f_idx] as f64;
            let b = trace.lambda_min[h_idx] / trace.checkpoints[h_idx] as f64;
            if (a - b).abs() <= check.rel_tol * b {
                hits += 1;
            }
        }
        let frac = hits as f64 / traces.len() as f64;
        verdicts.push(CriterionVerdict {
            name: "eigen_rate".into(),
            pass: frac >= check.min_fraction,
            detail: format!(
                "{hits}/{} replicates keep lambda_min(T)/T within {} of the half-horizon value",
                traces.len(),
                check.rel_tol
            ),
        });
    }

    Ok(DiagnosticsReport {
        digest: digest.into(),
        replicate_count: traces.len(),
        median_final_err2,
        median_final_n,
        median_rate_c,
        max_rate_c,
        recurrence: counts,
        replicates: summaries,
        criteria: verdicts,
    })
}
