//! Experiment configuration: JSON schema, validation, and builders.
//!
//! A config file fully determines a run: model family and parameters, noise,
//! horizon, replicate count, base seed, thresholds, checkpoint layout, the
//! optional excitation-certification block, and the optional expectation
//! blocks the run is judged against. Unknown keys are rejected, defaults are
//! filled on parse, and a config round-trips losslessly through
//! serialization. See SCHEMA.md for the documented format.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::CriteriaConfig;
use crate::error::{Error, Result};
use crate::excitation::{BoxRegion, Domain, InfimumBudget};
use crate::models::{make_exar, make_linear_ar, make_tar, ModelSpec, NoiseSpec, ScalarFn};
use crate::sim::checkpoint_grid;

/// Tagged model description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    LinearAr {
        theta: Vec<f64>,
    },
    Tar {
        theta: Vec<f64>,
        /// Closed intervals [a, b], one per coefficient.
        regions: Vec<[f64; 2]>,
        #[serde(default)]
        gain: GainConfig,
    },
    Exar {
        /// Redundant with the coefficient lengths; checked when present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        alphas: Vec<f64>,
        betas: Vec<f64>,
        gamma: f64,
    },
}

/// Scalar gain g for the threshold family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(rename_all = "snake_case")]
pub enum GainConfig {
    /// g(x) = x (the familiar threshold model).
    #[default]
    Identity,
    /// g ≡ 1.
    Unit,
    /// g(x) = x^exponent.
    Power { exponent: u32 },
}

impl GainConfig {
    fn build(self) -> ScalarFn {
        match self {
            GainConfig::Identity => Arc::new(|x: f64| x),
            GainConfig::Unit => Arc::new(|_: f64| 1.0),
            GainConfig::Power { exponent } => Arc::new(move |x: f64| x.powi(exponent as i32)),
        }
    }
}

/// Tagged noise description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum NoiseConfig {
    #[default]
    StandardNormal,
    Uniform {
        a: f64,
        b: f64,
    },
    TruncatedMixture {
        weights: Vec<f64>,
        sigmas: Vec<f64>,
        cutoff: f64,
    },
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CheckpointConfig {
    /// Number of log-spaced checkpoints between t=10 and T.
    #[serde(default = "default_checkpoint_count")]
    pub count: usize,
    /// Extra times always included (T/2 and T are included regardless).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<usize>,
}

impl Default for CheckpointConfig {
    fn default() -> Self {
        CheckpointConfig {
            count: default_checkpoint_count(),
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub boxes: Vec<BoxConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl DomainConfig {
    pub fn build(&self) -> Result<Domain> {
        let boxes = self
            .boxes
            .iter()
            .map(|b| BoxRegion::new(b.lo.clone(), b.hi.clone()))
            .collect::<Result<Vec<_>>>()?;
        Domain::new(boxes, self.label.clone().unwrap_or_else(|| "E".to_string()))
    }
}

/// Excitation-certification block.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExcitationConfig {
    pub domain: DomainConfig,
    /// Response thresholds, sorted ascending.
    pub delta_grid: Vec<f64>,
    /// Direction-infimum requirement for certification.
    pub min_measure: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_polish_iters")]
    pub polish_iters: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
    /// Grid refinements for the level-boundary cell counts.
    #[serde(default = "default_grid_refinements")]
    pub box_r: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes_per_box: Option<usize>,
    #[serde(default = "default_grid_refinements")]
    pub jordan_r: Vec<usize>,
    /// Whether certification is expected to succeed (negative controls set
    /// this to false and pass when certification fails).
    #[serde(default = "default_true")]
    pub expect_certification: bool,
}

impl ExcitationConfig {
    pub fn budget(&self) -> InfimumBudget {
        InfimumBudget {
            coarse_directions: self.directions,
            polish_iters: self.polish_iters,
            mc_samples: self.mc_samples,
        }
    }
}

/// The root configuration object.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Horizon (number of simulated steps).
    #[serde(rename = "T")]
    pub t_max: i64,
    #[serde(default = "default_replicates")]
    pub replicates: i64,
    pub seed: u64,
    /// Ball radius for the visit counts N_t(M).
    #[serde(rename = "M", default = "default_m_threshold")]
    pub m_threshold: f64,
    /// Truncation radius; defaults per model family when absent.
    #[serde(rename = "C_phi", default, skip_serializing_if = "Option::is_none")]
    pub c_phi: Option<f64>,
    #[serde(default = "default_divergence_threshold")]
    pub divergence_threshold: f64,
    #[serde(default = "default_omega_min_fraction")]
    pub omega_min_fraction: f64,
    #[serde(default)]
    pub checkpoints: CheckpointConfig,
    /// Initial estimate; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    /// Worker-pool cap; also bounded by NLAR_LSE_THREADS and the machine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "CriteriaConfig::is_empty")]
    pub criteria: CriteriaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excitation: Option<ExcitationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn default_checkpoint_count() -> usize {
    40
}
fn default_replicates() -> i64 {
    1
}
fn default_m_threshold() -> f64 {
    10.0
}
fn default_divergence_threshold() -> f64 {
    1e12
}
fn default_omega_min_fraction() -> f64 {
    0.5
}
fn default_directions() -> usize {
    200
}
fn default_polish_iters() -> usize {
    200
}
fn default_mc_samples() -> u64 {
    20_000
}
fn default_grid_refinements() -> Vec<usize> {
    vec![8, 16, 32, 64]
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_max < 1 {
            return Err(Error::Config(format!(
                "field \"T\" must be at least 1, got {}",
                self.t_max
            )));
        }
        if self.replicates < 1 {
            return Err(Error::Config(format!(
                "field \"replicates\" must be at least 1, got {}",
                self.replicates
            )));
        }
        if !(self.m_threshold > 0.0) {
            return Err(Error::Config("field \"M\" must be positive".into()));
        }
        if let Some(c) = self.c_phi {
            if !(c > 0.0) {
                return Err(Error::Config("field \"C_phi\" must be positive".into()));
            }
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::Config(
                "field \"divergence_threshold\" must be positive".into(),
            ));
        }
        if !(self.omega_min_fraction > 0.0 && self.omega_min_fraction <= 1.0) {
            return Err(Error::Config(
                "field \"omega_min_fraction\" must lie in (0, 1]".into(),
            ));
        }
        if self.checkpoints.count < 2 {
            return Err(Error::Config(
                "field \"checkpoints.count\" must be at least 2".into(),
            ));
        }
        let model = self.build_model()?;
        if let Some(theta0) = &self.theta0 {
            if theta0.len() != model.regressor().dim() {
                return Err(Error::Config(format!(
                    "field \"theta0\" has length {}, model dimension is {}",
                    theta0.len(),
                    model.regressor().dim()
                )));
            }
        }
        self.build_noise()?;
        if let Some(exc) = &self.excitation {
            let domain = exc.domain.build()?;
            if domain.dim() != model.regressor().arity() {
                return Err(Error::Config(format!(
                    "field \"excitation.domain\" has dimension {}, model window length is {}",
                    domain.dim(),
                    model.regressor().arity()
                )));
            }
            if exc.delta_grid.is_empty() || exc.delta_grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(
                    "field \"excitation.delta_grid\" must be non-empty and sorted ascending".into(),
                ));
            }
            if !(exc.min_measure > 0.0) {
                return Err(Error::Config(
                    "field \"excitation.min_measure\" must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<ModelSpec> {
        match &self.model {
            ModelConfig::LinearAr { theta } => make_linear_ar(theta),
            ModelConfig::Tar {
                theta,
                regions,
                gain,
            } => {
                let regions: Vec<(f64, f64)> = regions.iter().map(|r| (r[0], r[1])).collect();
                make_tar(gain.build(), theta, &regions)
            }
            ModelConfig::Exar {
                n,
                alphas,
                betas,
                gamma,
            } => {
                if let Some(n) = n {
                    if *n != alphas.len() {
                        return Err(Error::Config(format!(
                            "field \"n\" is {n} but {} alpha coefficients were given",
                            alphas.len()
                        )));
                    }
                }
                make_exar(alphas, betas, *gamma)
            }
        }
    }

    pub fn build_noise(&self) -> Result<NoiseSpec> {
        match &self.noise {
            NoiseConfig::StandardNormal => Ok(NoiseSpec::standard_normal()),
            NoiseConfig::Uniform { a, b } => NoiseSpec::uniform(*a, *b),
            NoiseConfig::TruncatedMixture {
                weights,
                sigmas,
                cutoff,
            } => NoiseSpec::truncated_mixture(weights, sigmas, *cutoff),
            NoiseConfig::Zero => Ok(NoiseSpec::zero()),
        }
    }

    /// Truncation radius: the configured value, or the per-family default
    /// (threshold models cover their regions plus one; others use 10).
    pub fn effective_c_phi(&self) -> f64 {
        if let Some(c) = self.c_phi {
            return c;
        }
        match &self.model {
            ModelConfig::Tar { regions, .. } => {
                let radius = regions
                    .iter()
                    .flat_map(|r| [r[0].abs(), r[1].abs()])
                    .fold(0.0, f64::max);
                radius + 1.0
            }
            _ => 10.0,
        }
    }

    pub fn checkpoint_times(&self) -> Vec<usize> {
        checkpoint_grid(
            self.t_max as usize,
            self.checkpoints.count,
            &self.checkpoints.extra,
        )
    }

    pub fn theta0_or_zeros(&self, dim: usize) -> Vec<f64> {
        self.theta0.clone().unwrap_or_else(|| vec![0.0; dim])
    }

    /// Stable one-line description for reports.
    pub fn digest(&self) -> String {
        let model = match &self.model {
            ModelConfig::LinearAr { theta } => format!("linear_ar(m={})", theta.len()),
            ModelConfig::Tar { theta, .. } => format!("tar(m={})", theta.len()),
            ModelConfig::Exar { alphas, gamma, .. } => {
                format!("exar(n={},gamma={gamma})", alphas.len())
            }
        };
        format!(
            "{model} T={} replicates={} seed={} M={} C_phi={}",
            self.t_max,
            self.replicates,
            self.seed,
            self.m_threshold,
            self.effective_c_phi()
        )
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn to_json_pretty(config: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serialization cannot fail")
}
