//! Regressor maps, model specifications, and noise families.
//!
//! A model is y_{t+1} = θᵀφ(y_t, …, y_{t−n+1}) + offset(y_t) + w_{t+1}, where
//! φ is a known map from the length-n output window (newest first) to ℝᵐ, θ is
//! the unknown coefficient vector, and `offset` is an optional known dynamic
//! that is simulated but never estimated (the piecewise-linear drift of the
//! threshold family lives there).
//!
//! Built-in families:
//! - linear AR: φ is the identity on the window, m = n;
//! - threshold AR: φ_j(y) = g(y)·1{y ∈ D_j} over disjoint regions, window
//!   length 1, drift y·1{y outside all regions} as the known offset;
//! - exponential AR: per-lag pairs (z_j, z_j e^{−γ z_1²}), m = 2n; the shared
//!   gaussian factor depends on the newest output only, so the map is not
//!   separable across lags.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Scalar basis function used inside separable maps and offsets.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Structural kind of a regressor map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegressorKind {
    /// Output stacks per-lag blocks φ⁽ⁱ⁾(z_i); `lag_dims[i]` is the i-th block size.
    Separable { lag_dims: Vec<usize> },
    /// No per-lag factorization is assumed.
    General,
}

/// A known map φ: ℝⁿ → ℝᵐ applied to output windows ordered newest first.
#[derive(Clone)]
pub struct RegressorMap {
    name: String,
    arity: usize,
    dim: usize,
    kind: RegressorKind,
    eval_fn: VectorFn,
}

impl std::fmt::Debug for RegressorMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegressorMap")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .finish()
    }
}

impl RegressorMap {
    /// Builds a separable map from per-lag lists of scalar basis functions.
    ///
    /// The output stacks col{φ⁽¹⁾(z₁), …, φ⁽ⁿ⁾(zₙ)}; m = Σᵢ mᵢ.
    pub fn separable(name: impl Into<String>, bases: Vec<Vec<ScalarFn>>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::invalid("separable map needs at least one lag"));
        }
        if let Some(i) = bases.iter().position(|b| b.is_empty()) {
            return Err(Error::invalid(format!("lag {i} has an empty basis list")));
        }
        let lag_dims: Vec<usize> = bases.iter().map(|b| b.len()).collect();
        let arity = bases.len();
        let dim = lag_dims.iter().sum();
        let bases = Arc::new(bases);
        let eval_fn: VectorFn = Arc::new(move |window, out| {
            let mut k = 0;
            for (z, lag) in window.iter().zip(bases.iter()) {
                for f in lag {
                    out[k] = f(*z);
                    k += 1;
                }
            }
        });
        Ok(RegressorMap {
            name: name.into(),
            arity,
            dim,
            kind: RegressorKind::Separable { lag_dims },
            eval_fn,
        })
    }

    /// Builds a general (non-separable) map from an arbitrary evaluator.
    pub fn general(
        name: impl Into<String>,
        arity: usize,
        dim: usize,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if arity == 0 || dim == 0 {
            return Err(Error::invalid("arity and dimension must be positive"));
        }
        Ok(RegressorMap {
            name: name.into(),
            arity,
            dim,
            kind: RegressorKind::General,
            eval_fn: Arc::new(eval),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Window length n.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Output dimension m.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &RegressorKind {
        &self.kind
    }

    /// Evaluates φ on a window (y_t, y_{t−1}, …, y_{t−n+1}), newest first.
    ///
    /// Errors on a wrong window length and on non-finite output components.
    pub fn eval(&self, window: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(window, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant of [`eval`](Self::eval) for hot loops.
    pub fn eval_into(&self, window: &[f64], out: &mut [f64]) -> Result<()> {
        if window.len() != self.arity {
            return Err(Error::invalid(format!(
                "window length {} does not match arity {}",
                window.len(),
                self.arity
            )));
        }
        debug_assert_eq!(out.len(), self.dim);
        (self.eval_fn)(window, out);
        if let Some(j) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                step: j,
                message: format!("regressor '{}' produced a non-finite component", self.name),
            });
        }
        Ok(())
    }
}

/// A regressor map plus the true coefficient vector that generates data.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    regressor: RegressorMap,
    theta: Vec<f64>,
    offset: Option<ScalarFn>,
}

impl std::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("regressor", &self.regressor)
            .field("theta", &self.theta)
            .field("has_offset", &self.offset.is_some())
            .finish()
    }
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, regressor: RegressorMap, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != regressor.dim() {
            return Err(Error::invalid(format!(
                "theta length {} does not match regressor dimension {}",
                theta.len(),
                regressor.dim()
            )));
        }
        if !theta.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("theta must be finite"));
        }
        Ok(ModelSpec {
            name: name.into(),
            regressor,
            theta,
            offset: None,
        })
    }

    /// Attaches a known, non-estimated dynamic added to θᵀφ during simulation.
    pub fn with_offset(mut self, offset: ScalarFn) -> Self {
        self.offset = Some(offset);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn regressor(&self) -> &RegressorMap {
        &self.regressor
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// The known drift evaluated at the latest output (zero when absent).
    pub fn offset(&self, y_last: f64) -> f64 {
        match &self.offset {
            Some(f) => f(y_last),
            None => 0.0,
        }
    }
}

/// Linear AR(n): identity basis per lag, m = n.
pub fn make_linear_ar(theta: &[f64]) -> Result<ModelSpec> {
    if theta.is_empty() {
        return Err(Error::invalid("linear AR needs at least one coefficient"));
    }
    let bases: Vec<Vec<ScalarFn>> = theta
        .iter()
        .map(|_| vec![Arc::new(|z: f64| z) as ScalarFn])
        .collect();
    let map = RegressorMap::separable(format!("linear_ar(n={})", theta.len()), bases)?;
    ModelSpec::new("linear_ar", map, theta.to_vec())
}

/// Threshold AR: φ_j(y) = g(y)·1{y ∈ D_j} over pairwise-disjoint compact
/// intervals, plus the known drift y·1{y outside all regions}.
///
/// Regions are closed; a point on a shared endpoint belongs to the
/// lowest-indexed containing region. Regions whose interiors overlap are
/// rejected.
pub fn make_tar(g: ScalarFn, theta: &[f64], regions: &[(f64, f64)]) -> Result<ModelSpec> {
    if theta.is_empty() || regions.len() != theta.len() {
        return Err(Error::invalid(
            "threshold AR needs one region per coefficient",
        ));
    }
    for (j, &(a, b)) in regions.iter().enumerate() {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!(
                "region {j} must be a finite interval of positive length"
            )));
        }
    }
    for i in 0..regions.len() {
        for j in (i + 1)..regions.len() {
            let lo = regions[i].0.max(regions[j].0);
            let hi = regions[i].1.min(regions[j].1);
            if lo < hi {
                return Err(Error::invalid(format!(
                    "regions {i} and {j} overlap on ({lo}, {hi})"
                )));
            }
        }
    }
    let regions: Arc<Vec<(f64, f64)>> = Arc::new(regions.to_vec());
    let mut bases_for_lag: Vec<ScalarFn> = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let g = g.clone();
        let regions = regions.clone();
        bases_for_lag.push(Arc::new(move |y: f64| match owning_region(&regions, y) {
            Some(owner) if owner == j => g(y),
            _ => 0.0,
        }));
    }
    let map =
        RegressorMap::separable(format!("tar(regions={})", theta.len()), vec![bases_for_lag])?;
    let drift_regions = regions.clone();
    let drift: ScalarFn = Arc::new(move |y: f64| {
        if owning_region(&drift_regions, y).is_none() {
            y
        } else {
            0.0
        }
    });
    Ok(ModelSpec::new("tar", map, theta.to_vec())?.with_offset(drift))
}

fn owning_region(regions: &[(f64, f64)], y: f64) -> Option<usize> {
    regions.iter().position(|&(a, b)| a <= y && y <= b)
}

/// Exponential AR: y_{t+1} = Σ_j (α_j + β_j e^{−γ y_t²}) y_{t−j+1} + w_{t+1}.
///
/// The regressor is general with m = 2n: components (z_j, z_j e^{−γ z₁²})
/// interleaved, θ = (α₁, β₁, …, αₙ, βₙ).
pub fn make_exar(alphas: &[f64], betas: &[f64], gamma: f64) -> Result<ModelSpec> {
    if alphas.is_empty() || alphas.len() != betas.len() {
        return Err(Error::invalid(
            "exponential AR needs matching alpha/beta vectors",
        ));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma must be a positive real"));
    }
    let n = alphas.len();
    let map = RegressorMap::general(
        format!("exar(n={n},gamma={gamma})"),
        n,
        2 * n,
        move |window, out| {
            let damp = (-gamma * window[0] * window[0]).exp();
            for (j, &z) in window.iter().enumerate() {
                out[2 * j] = z;
                out[2 * j + 1] = z * damp;
            }
        },
    )?;
    let mut theta = Vec::with_capacity(2 * n);
    for (a, b) in alphas.iter().zip(betas.iter()) {
        theta.push(*a);
        theta.push(*b);
    }
    ModelSpec::new("exar", map, theta)
}

/// Builds a separable map directly from per-lag basis lists.
pub fn make_separable(bases: Vec<Vec<ScalarFn>>) -> Result<RegressorMap> {
    let n = bases.len();
    let m: usize = bases.iter().map(|b| b.len()).sum();
    RegressorMap::separable(format!("separable(n={n},m={m})"), bases)
}

/// Evaluates a regressor map on a window; see [`RegressorMap::eval`].
pub fn eval_regressor(map: &RegressorMap, window: &[f64]) -> Result<Vec<f64>> {
    map.eval(window)
}

/// Noise family driving the simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseFamily {
    StandardNormal,
    /// Uniform on [a, b] with a = −b < 0 (zero mean).
    Uniform {
        a: f64,
        b: f64,
    },
    /// Finite mixture of zero-mean gaussians truncated to [−cutoff, cutoff].
    TruncatedMixture {
        weights: Vec<f64>,
        sigmas: Vec<f64>,
        cutoff: f64,
    },
    /// Identically zero; degenerate test noise, satisfies no noise assumption.
    Zero,
}

/// A noise family plus the metadata the estimation theory cares about.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    family: NoiseFamily,
    /// Declared finite absolute moment order β (metadata; must exceed 2
    /// where the constant-parameter theory is invoked).
    pub moment_order: f64,
    /// Density bounded below on every proper interval of ℝ.
    pub density_positive_everywhere: bool,
    /// Density bounded above on ℝ.
    pub density_sup_finite: bool,
    /// Gaussian noise suitable for the conjugate posterior view.
    pub gaussian: bool,
    /// Meets the full constant-parameter noise assumption.
    pub a1_prime_compliant: bool,
}

impl NoiseSpec {
    pub fn standard_normal() -> Self {
        NoiseSpec {
            family: NoiseFamily::StandardNormal,
            moment_order: f64::INFINITY,
            density_positive_everywhere: true,
            density_sup_finite: true,
            gaussian: true,
            a1_prime_compliant: true,
        }
    }

    /// Uniform noise on [a, b]. Requires a = −b < 0 so the declared mean is 0.
    ///
    /// Bounded support means the density vanishes off [a, b], so this family
    /// is flagged as violating the everywhere-positive density requirement;
    /// it still simulates.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < 0.0 && 0.0 < b && a == -b) {
            return Err(Error::invalid(
                "uniform noise requires a = -b < 0 (zero mean)",
            ));
        }
        Ok(NoiseSpec {
            family: NoiseFamily::Uniform { a, b },
            moment_order: f64::INFINITY,
            density_positive_everywhere: false,
            density_sup_finite: true,
            gaussian: false,
            a1_prime_compliant: false,
        })
    }

    /// Mixture of zero-mean gaussians truncated to [−cutoff, cutoff].
    pub fn truncated_mixture(weights: &[f64], sigmas: &[f64], cutoff: f64) -> Result<Self> {
        if weights.is_empty() || weights.len() != sigmas.len() {
            return Err(Error::invalid(
                "mixture needs matching weight/sigma vectors",
            ));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::invalid("mixture cutoff must be positive"));
        }
        if weights.iter().any(|w| *w <= 0.0) || sigmas.iter().any(|s| *s <= 0.0) {
            return Err(Error::invalid("weights and sigmas must be positive"));
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(NoiseSpec {
            family: NoiseFamily::TruncatedMixture {
                weights,
                sigmas: sigmas.to_vec(),
                cutoff,
            },
            moment_order: f64::INFINITY,
            density_positive_everywhere: false,
            density_sup_finite: true,
            gaussian: false,
            a1_prime_compliant: false,
        })
    }

    /// Degenerate zero noise for deterministic tests.
    pub fn zero() -> Self {
        NoiseSpec {
            family: NoiseFamily::Zero,
            moment_order: f64::INFINITY,
            density_positive_everywhere: false,
            density_sup_finite: false,
            gaussian: false,
            a1_prime_compliant: false,
        }
    }

    pub fn family(&self) -> &NoiseFamily {
        &self.family
    }

    /// Short tag recorded in trajectory metadata.
    pub fn tag(&self) -> String {
        match &self.family {
            NoiseFamily::StandardNormal => "standard_normal".to_string(),
            NoiseFamily::Uniform { a, b } => format!("uniform({a},{b})"),
            NoiseFamily::TruncatedMixture { weights, .. } => {
                format!("truncated_mixture(k={})", weights.len())
            }
            NoiseFamily::Zero => "zero".to_string(),
        }
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> f64 {
        match &self.family {
            NoiseFamily::StandardNormal => rng.next_normal(),
            NoiseFamily::Uniform { a, b } => rng.uniform(*a, *b),
            NoiseFamily::TruncatedMixture {
                weights,
                sigmas,
                cutoff,
            } => {
                let u = rng.next_f64();
                let mut acc = 0.0;
                let mut sigma = sigmas[sigmas.len() - 1];
                for (w, s) in weights.iter().zip(sigmas.iter()) {
                    acc += w;
                    if u < acc {
                        sigma = *s;
                        break;
                    }
                }
                loop {
                    let x = sigma * rng.next_normal();
                    if x.abs() <= *cutoff {
                        return x;
                    }
                }
            }
            NoiseFamily::Zero => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_x() -> ScalarFn {
        Arc::new(|z: f64| z)
    }

    #[test]
    fn linear_ar_is_identity_per_lag() {
        let model = make_linear_ar(&[0.5]).unwrap();
        assert_eq!(model.regressor().dim(), 1);
        assert_eq!(model.regressor().eval(&[3.0]).unwrap(), vec![3.0]);

        let model = make_linear_ar(&[0.5, -0.7]).unwrap();
        assert_eq!(model.regressor().dim(), 2);
        assert_eq!(
            model.regressor().eval(&[3.0, -1.0]).unwrap(),
            vec![3.0, -1.0]
        );
    }

    #[test]
    fn linear_ar_rejects_empty_theta() {
        assert!(make_linear_ar(&[]).is_err());
    }

    #[test]
    fn explosive_linear_ar_constructs() {
        let model = make_linear_ar(&[1.5]).unwrap();
        assert_eq!(model.theta(), &[1.5]);
    }

    #[test]
    fn tar_indicator_and_drift() {
        let model = make_tar(unit_x(), &[0.5, -0.7], &[(-2.0, 0.0), (0.0, 2.0)]).unwrap();
        // y inside D1: only the first component responds.
        assert_eq!(model.regressor().eval(&[-1.0]).unwrap(), vec![-1.0, 0.0]);
        // y inside D2.
        assert_eq!(model.regressor().eval(&[1.5]).unwrap(), vec![0.0, 1.5]);
        // Shared endpoint 0 belongs to the lowest-indexed region.
        assert_eq!(model.regressor().eval(&[0.0]).unwrap(), vec![0.0, 0.0]);
        // Outside every region the regressor is zero and the drift is active.
        assert_eq!(model.regressor().eval(&[3.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(model.offset(3.0), 3.0);
        assert_eq!(model.offset(-1.0), 0.0);
    }

    #[test]
    fn tar_window_outside_region_gives_zero_component() {
        let model = make_tar(unit_x(), &[0.3], &[(-2.0, 0.0)]).unwrap();
        assert_eq!(model.regressor().eval(&[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn tar_quadratic_gain_on_region() {
        let g: ScalarFn = Arc::new(|x: f64| x * x);
        let model = make_tar(g, &[0.3], &[(0.0, 1.0)]).unwrap();
        assert_eq!(model.regressor().eval(&[0.5]).unwrap(), vec![0.25]);
    }

    #[test]
    fn tar_rejects_overlapping_regions() {
        let err = make_tar(unit_x(), &[0.1, 0.2], &[(-1.0, 0.5), (0.0, 1.0)]);
        assert!(err.is_err());
    }

    #[test]
    fn tar_allows_touching_endpoints() {
        assert!(make_tar(unit_x(), &[0.1, 0.2], &[(-1.0, 0.0), (0.0, 1.0)]).is_ok());
    }

    #[test]
    fn exar_structure_and_values() {
        let model = make_exar(&[0.3], &[0.2], 1.0).unwrap();
        assert_eq!(model.regressor().dim(), 2);
        assert_eq!(model.theta(), &[0.3, 0.2]);
        assert_eq!(model.regressor().eval(&[0.0]).unwrap(), vec![0.0, 0.0]);
        let phi = model.regressor().eval(&[1.0]).unwrap();
        assert_eq!(phi[0], 1.0);
        assert!((phi[1] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((phi[1] - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn exar_gaussian_factor_uses_newest_lag_only() {
        let model = make_exar(&[0.1, 0.2], &[0.3, 0.4], 2.0).unwrap();
        let phi = model.regressor().eval(&[1.0, 5.0]).unwrap();
        let damp = (-2.0f64).exp();
        assert_eq!(phi[0], 1.0);
        assert!((phi[1] - damp).abs() < 1e-15);
        assert_eq!(phi[2], 5.0);
        assert!((phi[3] - 5.0 * damp).abs() < 1e-14);
        assert!(matches!(model.regressor().kind(), RegressorKind::General));
    }

    #[test]
    fn exar_rejects_nonpositive_gamma() {
        assert!(make_exar(&[0.1], &[0.1], 0.0).is_err());
        assert!(make_exar(&[0.1], &[0.1], -1.0).is_err());
    }

    #[test]
    fn separable_stacks_blocks() {
        let bases: Vec<Vec<ScalarFn>> = vec![vec![Arc::new(|z: f64| z), Arc::new(|z: f64| z * z)]];
        let map = make_separable(bases).unwrap();
        assert_eq!(map.eval(&[2.0]).unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn separable_identity_matches_linear_ar_shape() {
        let bases: Vec<Vec<ScalarFn>> = vec![vec![unit_x()], vec![unit_x()]];
        let map = make_separable(bases).unwrap();
        assert_eq!(map.dim(), 2);
        assert_eq!(map.eval(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn separable_sine_at_zero() {
        let bases: Vec<Vec<ScalarFn>> = vec![vec![Arc::new(f64::sin)]];
        let map = make_separable(bases).unwrap();
        assert_eq!(map.eval(&[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn separable_rejects_empty_lag() {
        let bases: Vec<Vec<ScalarFn>> = vec![vec![unit_x()], vec![]];
        assert!(make_separable(bases).is_err());
    }

    #[test]
    fn eval_rejects_wrong_window_length() {
        let model = make_linear_ar(&[0.5, 0.5]).unwrap();
        assert!(model.regressor().eval(&[1.0]).is_err());
    }

    #[test]
    fn eval_rejects_non_finite_output() {
        let map = RegressorMap::general("bad", 1, 1, |w, out| {
            out[0] = 1.0 / (w[0] - w[0]); // NaN for every input
        })
        .unwrap();
        assert!(matches!(map.eval(&[1.0]), Err(Error::Numeric { .. })));
    }

    #[test]
    fn builtin_families_are_finite_on_random_windows() {
        let mut rng = SplitMix64::new(0xF00D);
        let models = vec![
            make_linear_ar(&[0.5, -0.7]).unwrap(),
            make_tar(unit_x(), &[0.5, -0.7], &[(-2.0, 0.0), (0.0, 2.0)]).unwrap(),
            make_exar(&[0.3, 0.1], &[0.2, -0.1], 1.0).unwrap(),
        ];
        for model in &models {
            let map = model.regressor();
            for _ in 0..1000 {
                let window: Vec<f64> = (0..map.arity()).map(|_| rng.uniform(-50.0, 50.0)).collect();
                let phi = map.eval(&window).unwrap();
                assert_eq!(phi.len(), map.dim());
                assert!(phi.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn uniform_noise_requires_symmetric_support() {
        assert!(NoiseSpec::uniform(-1.0, 1.0).is_ok());
        assert!(NoiseSpec::uniform(-1.0, 2.0).is_err());
        assert!(NoiseSpec::uniform(0.0, 1.0).is_err());
        let spec = NoiseSpec::uniform(-1.0, 1.0).unwrap();
        assert!(!spec.a1_prime_compliant);
        assert!(!spec.density_positive_everywhere);
    }

    #[test]
    fn standard_normal_is_compliant() {
        let spec = NoiseSpec::standard_normal();
        assert!(spec.gaussian);
        assert!(spec.a1_prime_compliant);
        assert!(spec.moment_order > 2.0);
    }

    #[test]
    fn truncated_mixture_samples_within_cutoff() {
        let spec = NoiseSpec::truncated_mixture(&[0.7, 0.3], &[0.5, 2.0], 3.0).unwrap();
        let mut rng = SplitMix64::new(11);
        for _ in 0..10_000 {
            assert!(spec.sample(&mut rng).abs() <= 3.0);
        }
    }
}
