//! Numeric certificates for the excitation geometry.
//!
//! For a regressor map φ and a bounded domain E, the quantities of interest
//! are the Lebesgue measure of high-response sets {y ∈ E : |φᵀ(y)x| > δ},
//! its infimum over unit directions x, the largest response threshold δ*
//! keeping that infimum away from zero, grid counts of cells touching the
//! level sets (which must grow like r^{n−1}, one dimension below the grid),
//! the vanishing-cover check for level-set boundaries, and the
//! volume-preservation property of the noise-to-window shear map.
//!
//! Measures are estimated by plain Monte Carlo with binomial error bars;
//! level-set membership of a grid cell is decided by probing a fixed lattice
//! of points and asking for values on both closed sides of the threshold.
//! Equality counts for both sides, so a cell whose face carries the level
//! exactly is counted along with its neighbor.

use crate::error::{Error, Result};
use crate::models::RegressorMap;
use crate::rng::SplitMix64;

/// Hard cap on rⁿ in grid scans.
const BOX_BUDGET: u64 = 1 << 24;

/// An axis-aligned box Π[lo_i, hi_i].
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("box needs matching non-empty bounds"));
        }
        for (a, b) in lo.iter().zip(hi.iter()) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::invalid(format!(
                    "box interval [{a}, {b}] must be finite with positive length"
                )));
            }
        }
        Ok(BoxRegion { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(a, b)| b - a)
            .product()
    }

    /// Closed membership.
    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(p, (a, b))| *a <= *p && *p <= *b)
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Vec<f64> {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(a, b)| rng.uniform(*a, *b))
            .collect()
    }

    /// True when `other` fits inside this box (closed comparison).
    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.dim() == other.dim()
            && self.lo.iter().zip(other.lo.iter()).all(|(a, b)| a <= b)
            && self.hi.iter().zip(other.hi.iter()).all(|(a, b)| a >= b)
    }
}

/// A bounded probe domain: a finite union of boxes of equal dimension.
#[derive(Debug, Clone)]
pub struct Domain {
    boxes: Vec<BoxRegion>,
    label: String,
    cumulative_volume: Vec<f64>,
}

impl Domain {
    pub fn new(boxes: Vec<BoxRegion>, label: impl Into<String>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::invalid("domain needs at least one box"));
        }
        let dim = boxes[0].dim();
        if boxes.iter().any(|b| b.dim() != dim) {
            return Err(Error::invalid("domain boxes must share one dimension"));
        }
        let mut cumulative_volume = Vec::with_capacity(boxes.len());
        let mut acc = 0.0;
        for b in &boxes {
            acc += b.volume();
            cumulative_volume.push(acc);
        }
        Ok(Domain {
            boxes,
            label: label.into(),
            cumulative_volume,
        })
    }

    /// Single-box domain Π[lo_i, hi_i].
    pub fn single(lo: Vec<f64>, hi: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Domain::new(vec![BoxRegion::new(lo, hi)?], label)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn volume(&self) -> f64 {
        *self.cumulative_volume.last().unwrap()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(point))
    }

    /// Uniform sample: box chosen by volume weight, then uniform inside.
    pub fn sample(&self, rng: &mut SplitMix64) -> Vec<f64> {
        let u = rng.next_f64() * self.volume();
        let idx = self
            .cumulative_volume
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.boxes.len() - 1);
        self.boxes[idx].sample(rng)
    }

    /// Smallest box containing every member box.
    pub fn bounding_box(&self) -> BoxRegion {
        let dim = self.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for b in &self.boxes {
            for i in 0..dim {
                lo[i] = lo[i].min(b.lo[i]);
                hi[i] = hi[i].max(b.hi[i]);
            }
        }
        BoxRegion { lo, hi }
    }
}

/// Monte Carlo estimate of ℓ({y ∈ E : |φᵀ(y)x| > δ}).
#[derive(Debug, Clone)]
pub struct ExcitationEstimate {
    pub direction: Vec<f64>,
    pub delta: f64,
    pub samples: u64,
    pub hits: u64,
    /// Volume estimate, in the units of vol(E).
    pub measure: f64,
    /// 95% binomial confidence half-width in the same units.
    pub ci_half_width: f64,
}

fn normalize_direction(x: &[f64]) -> Result<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "direction must be a unit vector (norm {norm})"
        )));
    }
    Ok(x.iter().map(|v| v / norm).collect())
}

pub fn measure_excitation(
    map: &RegressorMap,
    domain: &Domain,
    x: &[f64],
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<ExcitationEstimate> {
    if domain.dim() != map.arity() {
        return Err(Error::invalid(format!(
            "domain dimension {} does not match map arity {}",
            domain.dim(),
            map.arity()
        )));
    }
    if x.len() != map.dim() {
        return Err(Error::invalid(format!(
            "direction length {} does not match map dimension {}",
            x.len(),
            map.dim()
        )));
    }
    if samples < 1000 {
        return Err(Error::invalid("need at least 1000 samples"));
    }
    if !(delta >= 0.0) {
        return Err(Error::invalid("threshold must be non-negative"));
    }
    let x = normalize_direction(x)?;
    let mut rng = SplitMix64::new(seed);
    let mut phi = vec![0.0; map.dim()];
    let mut hits = 0u64;
    for _ in 0..samples {
        let point = domain.sample(&mut rng);
        map.eval_into(&point, &mut phi)?;
        let response: f64 = phi.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        if response.abs() > delta {
            hits += 1;
        }
    }
    let vol = domain.volume();
    let p = hits as f64 / samples as f64;
    Ok(ExcitationEstimate {
        direction: x,
        delta,
        samples,
        hits,
        measure: vol * p,
        ci_half_width: 1.96 * vol * (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

/// Sampling budget for the direction search.
#[derive(Debug, Clone, Copy)]
pub struct InfimumBudget {
    /// Directions drawn uniformly on the sphere in the coarse stage.
    pub coarse_directions: usize,
    /// Derivative-free refinement iterations per retained candidate.
    pub polish_iters: usize,
    /// Monte Carlo samples per measure evaluation.
    pub mc_samples: u64,
}

impl Default for InfimumBudget {
    fn default() -> Self {
        InfimumBudget {
            coarse_directions: 200,
            polish_iters: 200,
            mc_samples: 20_000,
        }
    }
}

/// Result of the sphere infimum search (best effort; budget recorded).
#[derive(Debug, Clone)]
pub struct InfimumResult {
    pub direction: Vec<f64>,
    pub value: f64,
    pub budget: InfimumBudget,
}

/// Approximates inf over unit x of ℓ({y ∈ E : |φᵀ(y)x| > δ}).
///
/// Coarse stage draws directions uniformly on the sphere (normalized
/// gaussian vectors); the best few candidates are refined by random
/// coordinate perturbation with a radius that halves after every 25
/// non-improving steps. All measure evaluations share one sample stream so
/// comparisons between directions are paired.
pub fn sphere_infimum(
    map: &RegressorMap,
    domain: &Domain,
    delta: f64,
    budget: InfimumBudget,
    seed: u64,
) -> Result<InfimumResult> {
    if budget.coarse_directions < 100 {
        return Err(Error::invalid("need at least 100 coarse directions"));
    }
    let m = map.dim();
    let measure_seed = SplitMix64::new(seed).next_u64();
    let mut direction_rng = SplitMix64::new(seed ^ 0xD1CE);
    let eval = |x: &[f64]| -> Result<f64> {
        Ok(measure_excitation(map, domain, x, delta, budget.mc_samples, measure_seed)?.measure)
    };

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::with_capacity(budget.coarse_directions);
    for _ in 0..budget.coarse_directions {
        let x = direction_rng.unit_vector(m);
        let value = eval(&x)?;
        candidates.push((value, x));
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    candidates.truncate(3);

    let mut best = candidates[0].clone();
    for (start_value, start_x) in candidates {
        let mut current = (start_value, start_x);
        let mut radius = 0.5;
        let mut stale = 0usize;
        for _ in 0..budget.polish_iters {
            let mut proposal = current.1.clone();
            let coord = (direction_rng.next_u64() % m as u64) as usize;
            proposal[coord] += radius * direction_rng.uniform(-1.0, 1.0);
            let norm = proposal.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-9 {
                continue;
            }
            for v in proposal.iter_mut() {
                *v /= norm;
            }
            let value = eval(&proposal)?;
            if value < current.0 {
                current = (value, proposal);
                stale = 0;
            } else {
                stale += 1;
                if stale >= 25 {
                    radius *= 0.5;
                    stale = 0;
                }
            }
        }
        if current.0 < best.0 {
            best = current;
        }
    }

    Ok(InfimumResult {
        direction: best.1,
        value: best.0,
        budget,
    })
}

/// Largest δ in the grid whose sphere infimum stays at or above `min_measure`.
///
/// The grid must be sorted ascending; the search walks it from the top so the
/// first qualifying threshold is the answer. Failure signals a degenerate
/// direction (or an impossible requirement or starved budget).
pub fn choose_delta_star(
    map: &RegressorMap,
    domain: &Domain,
    delta_grid: &[f64],
    min_measure: f64,
    budget: InfimumBudget,
    seed: u64,
) -> Result<(f64, InfimumResult)> {
    if delta_grid.is_empty() {
        return Err(Error::invalid("threshold grid must be non-empty"));
    }
    if delta_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("threshold grid must be sorted ascending"));
    }
    if delta_grid[0] <= 0.0 {
        return Err(Error::invalid("thresholds must be positive"));
    }
    if !(min_measure > 0.0) {
        return Err(Error::invalid("measure requirement must be positive"));
    }
    for &delta in delta_grid.iter().rev() {
        let result = sphere_infimum(map, domain, delta, budget, seed)?;
        if result.value >= min_measure {
            return Ok((delta, result));
        }
    }
    Err(Error::CertificationFailure(format!(
        "no threshold in the grid keeps the direction infimum above {min_measure} \
         (degenerate direction, impossible requirement, or budget too small)"
    )))
}

/// Count of grid cells meeting a level-set boundary.
#[derive(Debug, Clone)]
pub struct BoxCountResult {
    pub region: BoxRegion,
    pub subdivisions: usize,
    pub direction: Vec<f64>,
    pub delta: f64,
    pub count: u64,
    /// count / r^{n−1}; bounded in r when the boundary is a hypersurface.
    pub ratio: f64,
}

/// Default probe count per cell: the 2ⁿ corners plus a 3ⁿ sub-grid.
pub fn default_probes_per_box(dim: usize) -> usize {
    (1usize << dim) + 3usize.pow(dim as u32)
}

/// Walks every cell of the r-per-axis partition of `region`, evaluating
/// `field` on a g-per-axis probe lattice (corners included) and counting the
/// cell when probe values land on both closed sides of `delta`. `field`
/// returns None for probes that fall outside the participating set.
fn count_level_cells(
    region: &BoxRegion,
    r: usize,
    probes_per_box: usize,
    delta: f64,
    mut field: impl FnMut(&[f64]) -> Result<Option<f64>>,
) -> Result<u64> {
    let n = region.dim();
    let total_cells = (r as u64)
        .checked_pow(n as u32)
        .filter(|&c| c <= BOX_BUDGET);
    let Some(_) = total_cells else {
        return Err(Error::ResourceLimit(format!(
            "{r}^{n} cells exceeds the grid budget of {BOX_BUDGET}"
        )));
    };
    // Largest per-axis lattice size whose total stays within probes_per_box.
    let mut g = 2usize;
    while (g + 1).pow(n as u32) <= probes_per_box {
        g += 1;
    }

    let widths: Vec<f64> = region
        .lo
        .iter()
        .zip(region.hi.iter())
        .map(|(a, b)| (b - a) / r as f64)
        .collect();

    let mut cell = vec![0usize; n];
    let mut probe = vec![0usize; n];
    let mut point = vec![0.0; n];
    let mut count = 0u64;
    loop {
        // Probe the current cell.
        let mut has_ge = false;
        let mut has_le = false;
        probe.iter_mut().for_each(|p| *p = 0);
        'probes: loop {
            for i in 0..n {
                let cell_lo = region.lo[i] + widths[i] * cell[i] as f64;
                point[i] = cell_lo + widths[i] * probe[i] as f64 / (g - 1) as f64;
            }
            if let Some(value) = field(&point)? {
                if value >= delta {
                    has_ge = true;
                }
                if value <= delta {
                    has_le = true;
                }
                if has_ge && has_le {
                    break 'probes;
                }
            }
            // Advance the probe lattice index.
            let mut i = 0;
            loop {
                if i == n {
                    break 'probes;
                }
                probe[i] += 1;
                if probe[i] < g {
                    break;
                }
                probe[i] = 0;
                i += 1;
            }
        }
        if has_ge && has_le {
            count += 1;
        }
        // Advance the cell index.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(count);
            }
            cell[i] += 1;
            if cell[i] < r {
                break;
            }
            cell[i] = 0;
            i += 1;
        }
    }
}

/// Counts cells of the rⁿ partition of O meeting ∂{y : φᵀ(y)x > δ}.
pub fn box_count(
    map: &RegressorMap,
    x: &[f64],
    delta: f64,
    region: &BoxRegion,
    r: usize,
    probes_per_box: usize,
) -> Result<BoxCountResult> {
    if region.dim() != map.arity() {
        return Err(Error::invalid(format!(
            "box dimension {} does not match map arity {}",
            region.dim(),
            map.arity()
        )));
    }
    if x.len() != map.dim() {
        return Err(Error::invalid("direction length does not match map"));
    }
    if r < 2 {
        return Err(Error::invalid("need at least 2 subdivisions per axis"));
    }
    let n = region.dim();
    if probes_per_box < (1usize << n) {
        return Err(Error::invalid(format!(
            "need at least 2^{n} probes per cell (the corners)"
        )));
    }
    let mut phi = vec![0.0; map.dim()];
    let count = count_level_cells(region, r, probes_per_box, delta, |point| {
        map.eval_into(point, &mut phi)?;
        Ok(Some(
            phi.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>(),
        ))
    })?;
    let ratio = count as f64 / (r as f64).powi(n as i32 - 1);
    Ok(BoxCountResult {
        region: region.clone(),
        subdivisions: r,
        direction: x.to_vec(),
        delta,
        count,
        ratio,
    })
}

/// Grid-cover volumes of the level set {y ∈ Ē : |φᵀ(y)x| = δ} at a sequence
/// of refinements, over the bounding box of E.
///
/// Each entry is K·vol(O)/rⁿ; the series must trend to zero when the level
/// set has vanishing grid cover.
pub fn jordan_boundary_check(
    map: &RegressorMap,
    domain: &Domain,
    x: &[f64],
    delta: f64,
    r_sequence: &[usize],
) -> Result<Vec<f64>> {
    if r_sequence.is_empty() || r_sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("refinements must be strictly increasing"));
    }
    if x.len() != map.dim() {
        return Err(Error::invalid("direction length does not match map"));
    }
    let region = domain.bounding_box();
    let n = region.dim();
    if n != map.arity() {
        return Err(Error::invalid("domain dimension does not match map arity"));
    }
    let probes = default_probes_per_box(n);
    let vol = region.volume();
    let mut series = Vec::with_capacity(r_sequence.len());
    let mut phi = vec![0.0; map.dim()];
    for &r in r_sequence {
        if r < 2 {
            return Err(Error::invalid("need at least 2 subdivisions per axis"));
        }
        let count = count_level_cells(&region, r, probes, delta, |point| {
            if !domain.contains(point) {
                return Ok(None);
            }
            map.eval_into(point, &mut phi)?;
            let response: f64 = phi.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            Ok(Some(response.abs()))
        })?;
        series.push(count as f64 * vol / (r as f64).powi(n as i32));
    }
    Ok(series)
}

/// Outcome of the shear volume-preservation test.
#[derive(Debug, Clone)]
pub struct ShearTestResult {
    /// vol(B) · hits/samples, the Monte Carlo preimage volume.
    pub estimate: f64,
    /// vol(O), which the preimage volume equals exactly.
    pub exact: f64,
    pub hits: u64,
    pub samples: u64,
    pub bounding_volume: f64,
}

/// Runs the driving chain d_k = ς_k + xᵀφ(d_{k−1}, …, d_{k−n}) for
/// k = n+1..2n and returns (d_{2n}, …, d_{n+1}), newest first.
///
/// `history` is (d_n, …, d_1) newest first; `sigma` is (ς_{2n}, …, ς_{n+1})
/// in the same order as the output.
fn shear_chain(
    map: &RegressorMap,
    x: &[f64],
    history: &[f64],
    sigma: &[f64],
    window: &mut [f64],
    phi: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    let n = map.arity();
    // d indexed 1..=2n; slot j holds d_{j+1}.
    let mut d = vec![0.0; 2 * n];
    for (j, &y) in history.iter().enumerate() {
        d[n - 1 - j] = y;
    }
    for k in (n + 1)..=(2 * n) {
        for j in 0..n {
            window[j] = d[k - 2 - j];
        }
        map.eval_into(window, phi)?;
        let drive: f64 = phi.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        d[k - 1] = sigma[2 * n - k] + drive;
    }
    for j in 0..n {
        out[j] = d[2 * n - 1 - j];
    }
    Ok(())
}

/// Conservative bound on the preimage {ς : chain output ∈ O} of the shear
/// chain, coordinate by coordinate.
///
/// The k-th noise coordinate satisfies ς_k = d_k − xᵀφ(window), where the
/// window mixes fixed history values with output coordinates pinned to O.
/// The drive range over each partial window box is bracketed by a dense
/// sample lattice (`grid` points per free axis) and inflated by `margin`
/// of its width; φ is an opaque function here, so lattice bracketing stands
/// in for interval arithmetic.
pub fn shear_bounding_box(
    map: &RegressorMap,
    x: &[f64],
    history: &[f64],
    target: &BoxRegion,
    grid: usize,
    margin: f64,
) -> Result<BoxRegion> {
    let n = map.arity();
    if history.len() != n || target.dim() != n {
        return Err(Error::invalid(
            "history and target box must match the map arity",
        ));
    }
    if x.len() != map.dim() {
        return Err(Error::invalid("drive vector length does not match map"));
    }
    if grid < 2 {
        return Err(Error::invalid("need at least 2 grid points per axis"));
    }
    let mut phi = vec![0.0; map.dim()];
    let mut window = vec![0.0; n];
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    // target slot j holds the interval of d_{2n-j}; free coordinates of the
    // window for step k are d_{n+1}..d_{k-1}.
    for k in (n + 1)..=(2 * n) {
        let free = k - 1 - n;
        let mut drive_lo = f64::INFINITY;
        let mut drive_hi = f64::NEG_INFINITY;
        let mut index = vec![0usize; free];
        loop {
            for j in 0..n {
                let src = k - 1 - n + n - 1 - j; // absolute index of d_{k-1-j}, zero-based
                debug_assert_eq!(src, k - 2 - j);
                window[j] = if src >= n {
                    // d_{src+1} ranges over its target interval.
                    let slot = 2 * n - (src + 1);
                    let f = if free == 0 {
                        0.0
                    } else {
                        index[src - n] as f64 / (grid - 1) as f64
                    };
                    target.lo[slot] + f * (target.hi[slot] - target.lo[slot])
                } else {
                    history[n - 1 - src]
                };
            }
            map.eval_into(&window, &mut phi)?;
            let drive: f64 = phi.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            drive_lo = drive_lo.min(drive);
            drive_hi = drive_hi.max(drive);
            // Advance the lattice over the free coordinates.
            let mut i = 0;
            loop {
                if i == free {
                    break;
                }
                index[i] += 1;
                if index[i] < grid {
                    break;
                }
                index[i] = 0;
                i += 1;
            }
            if free == 0 || index.iter().all(|&v| v == 0) {
                break;
            }
        }
        let pad = margin * (drive_hi - drive_lo) + 1e-9 * (1.0 + drive_lo.abs() + drive_hi.abs());
        let slot = 2 * n - k;
        lo[slot] = target.lo[slot] - (drive_hi + pad);
        hi[slot] = target.hi[slot] - (drive_lo - pad);
    }
    BoxRegion::new(lo, hi)
}

const SHEAR_CHECK_GRID: usize = 64;

/// Monte Carlo check that the shear chain preserves volume: the preimage of
/// the target box O has Lebesgue measure exactly vol(O).
///
/// `bounding` must contain the preimage; the bound is re-derived from the
/// chain (lattice bracketing, no inflation) and a box that fails to cover it
/// is rejected as invalid. Sampling ς uniformly in the bounding box then
/// makes vol(B)·hits/samples an unbiased estimate of the preimage volume.
pub fn shear_volume_test(
    map: &RegressorMap,
    x: &[f64],
    history: &[f64],
    target: &BoxRegion,
    bounding: &BoxRegion,
    samples: u64,
    seed: u64,
) -> Result<ShearTestResult> {
    if samples < 100_000 {
        return Err(Error::invalid("need at least 1e5 samples"));
    }
    let required = shear_bounding_box(map, x, history, target, SHEAR_CHECK_GRID, 0.0)?;
    if !bounding.contains_box(&required) {
        return Err(Error::invalid(format!(
            "invalid bounding box: preimage bound {:?} is not contained",
            required
        )));
    }
    let n = map.arity();
    let mut rng = SplitMix64::new(seed);
    let mut window = vec![0.0; n];
    let mut phi = vec![0.0; map.dim()];
    let mut out = vec![0.0; n];
    let mut hits = 0u64;
    for _ in 0..samples {
        let sigma = bounding.sample(&mut rng);
        shear_chain(map, x, history, &sigma, &mut window, &mut phi, &mut out)?;
        if target.contains(&out) {
            hits += 1;
        }
    }
    let bounding_volume = bounding.volume();
    Ok(ShearTestResult {
        estimate: bounding_volume * hits as f64 / samples as f64,
        exact: target.volume(),
        hits,
        samples,
        bounding_volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_exar, make_linear_ar, make_separable, ScalarFn};
    use std::sync::Arc;

    fn identity_1d() -> RegressorMap {
        make_linear_ar(&[0.5]).unwrap().regressor().clone()
    }

    fn interval(lo: f64, hi: f64) -> Domain {
        Domain::single(vec![lo], vec![hi], "E").unwrap()
    }

    #[test]
    fn measure_of_identity_tail_set() {
        // {y in (-1,1): |y| > 0.5} has length 1.
        let est = measure_excitation(&identity_1d(), &interval(-1.0, 1.0), &[1.0], 0.5, 40_000, 7)
            .unwrap();
        assert!((est.measure - 1.0).abs() < 3.0 * est.ci_half_width.max(0.01));

        // Threshold above the sup yields the empty set.
        let est =
            measure_excitation(&identity_1d(), &interval(-1.0, 1.0), &[1.0], 2.0, 1000, 7).unwrap();
        assert_eq!(est.measure, 0.0);

        // delta = 0 leaves only the measure-zero zero set out.
        let est = measure_excitation(&identity_1d(), &interval(-1.0, 1.0), &[1.0], 0.0, 40_000, 7)
            .unwrap();
        assert!((est.measure - 2.0).abs() < 0.01);
    }

    #[test]
    fn measure_rejects_non_unit_direction() {
        let err = measure_excitation(&identity_1d(), &interval(-1.0, 1.0), &[1.5], 0.5, 1000, 7);
        assert!(err.is_err());
    }

    #[test]
    fn measure_is_monotone_in_delta_with_paired_samples() {
        let map = make_separable(vec![vec![
            Arc::new(|z: f64| z) as ScalarFn,
            Arc::new(|z: f64| z * z) as ScalarFn,
        ]])
        .unwrap();
        let domain = interval(-1.0, 1.0);
        let x = [0.6, 0.8];
        let mut prev = f64::INFINITY;
        for delta in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let est = measure_excitation(&map, &domain, &x, delta, 5000, 99).unwrap();
            assert!(est.measure <= prev);
            prev = est.measure;
        }
    }

    #[test]
    fn measure_is_even_in_direction() {
        let map = make_exar(&[0.1], &[0.1], 1.0).unwrap().regressor().clone();
        let domain = interval(-2.0, 2.0);
        let x = [0.6, -0.8];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = measure_excitation(&map, &domain, &x, 0.3, 5000, 5).unwrap();
        let b = measure_excitation(&map, &domain, &neg, 0.3, 5000, 5).unwrap();
        assert_eq!(a.hits, b.hits);
        assert_eq!(a.measure, b.measure);
    }

    #[test]
    fn infimum_detects_duplicated_basis_degeneracy() {
        // phi(y) = (y, y): x = (1,-1)/sqrt(2) annihilates it everywhere.
        let map = make_separable(vec![vec![
            Arc::new(|z: f64| z) as ScalarFn,
            Arc::new(|z: f64| z) as ScalarFn,
        ]])
        .unwrap();
        let domain = interval(-1.0, 1.0);
        let result = sphere_infimum(
            &map,
            &domain,
            0.1,
            InfimumBudget {
                coarse_directions: 200,
                polish_iters: 100,
                mc_samples: 2000,
            },
            21,
        )
        .unwrap();
        assert!(
            result.value <= 1e-3 * domain.volume(),
            "value {}",
            result.value
        );
        // The degenerate direction has equal and opposite components.
        let s = result.direction[0] + result.direction[1];
        assert!(s.abs() < 0.15, "direction {:?}", result.direction);
    }

    #[test]
    fn infimum_of_scalar_identity_is_symmetric() {
        let domain = interval(-1.0, 1.0);
        let result = sphere_infimum(
            &identity_1d(),
            &domain,
            0.5,
            InfimumBudget {
                coarse_directions: 100,
                polish_iters: 50,
                mc_samples: 5000,
            },
            3,
        )
        .unwrap();
        let direct = measure_excitation(&identity_1d(), &domain, &[1.0], 0.5, 5000, 3).unwrap();
        assert!((result.value - direct.measure).abs() < 0.1);
    }

    #[test]
    fn delta_star_on_scalar_identity() {
        // Analytic measures on (-1,1): 1.8, 1.5, 1.0 for deltas .1, .25, .5.
        let domain = interval(-1.0, 1.0);
        let budget = InfimumBudget {
            coarse_directions: 100,
            polish_iters: 50,
            mc_samples: 4000,
        };
        let (delta_star, result) =
            choose_delta_star(&identity_1d(), &domain, &[0.1, 0.25, 0.5], 0.4, budget, 17).unwrap();
        assert_eq!(delta_star, 0.5);
        assert!((result.value - 1.0).abs() < 0.1);
    }

    #[test]
    fn delta_star_fails_on_degenerate_map() {
        let map = make_separable(vec![vec![
            Arc::new(|z: f64| z) as ScalarFn,
            Arc::new(|z: f64| z) as ScalarFn,
        ]])
        .unwrap();
        let domain = interval(-1.0, 1.0);
        let budget = InfimumBudget {
            coarse_directions: 150,
            polish_iters: 50,
            mc_samples: 2000,
        };
        let err = choose_delta_star(&map, &domain, &[0.1, 0.25], 0.05, budget, 5);
        assert!(matches!(err, Err(Error::CertificationFailure(_))));
    }

    #[test]
    fn delta_star_fails_on_impossible_requirement() {
        let domain = interval(-1.0, 1.0);
        let budget = InfimumBudget {
            coarse_directions: 100,
            polish_iters: 20,
            mc_samples: 2000,
        };
        let err = choose_delta_star(
            &identity_1d(),
            &domain,
            &[0.1],
            domain.volume() + 1.0,
            budget,
            5,
        );
        assert!(matches!(err, Err(Error::CertificationFailure(_))));
    }

    #[test]
    fn box_count_brackets_scalar_level_point() {
        // f(y) = y on [0,1], delta = 0.5, r = 10: exactly the two cells
        // [0.4,0.5] and [0.5,0.6] carry values on both sides.
        let region = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        let result = box_count(&identity_1d(), &[1.0], 0.5, &region, 10, 5).unwrap();
        assert_eq!(result.count, 2);
        assert_eq!(result.ratio, 2.0);
    }

    #[test]
    fn box_count_zero_when_level_out_of_range() {
        let region = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        let result = box_count(&identity_1d(), &[1.0], 2.0, &region, 16, 5).unwrap();
        assert_eq!(result.count, 0);
    }

    #[test]
    fn box_count_line_in_the_plane() {
        // phi = identity in the plane, x = (1,0), delta = 0: the level line
        // is a grid line for even r, so both adjacent columns count.
        let map = make_linear_ar(&[0.1, 0.1]).unwrap().regressor().clone();
        let region = BoxRegion::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        for r in [8usize, 16, 32, 64] {
            let result = box_count(&map, &[1.0, 0.0], 0.0, &region, r, 13).unwrap();
            assert_eq!(result.count as usize, 2 * r);
            assert!(result.ratio <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn box_count_validates_inputs() {
        let region = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        assert!(box_count(&identity_1d(), &[1.0], 0.5, &region, 1, 5).is_err());
        assert!(box_count(&identity_1d(), &[1.0], 0.5, &region, 4, 1).is_err());
        assert!(matches!(
            box_count(&identity_1d(), &[1.0], 0.5, &region, 1 << 25, 5),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn box_count_ratio_bounded_across_refinements_for_identity_maps() {
        // For identity maps the level boundary is a hyperplane, so the
        // normalized count K/r^{n-1} must stay within a fixed factor over
        // all refinements.
        let mut rng = SplitMix64::new(0xB0C5);
        for n in [1usize, 2] {
            let map = make_linear_ar(&vec![0.5; n]).unwrap().regressor().clone();
            let region = BoxRegion::new(vec![-1.0; n], vec![1.0; n]).unwrap();
            let probes = default_probes_per_box(n);
            for _ in 0..20 {
                let x = rng.unit_vector(n);
                // Keep the level set crossing the interior properly.
                let span: f64 = x.iter().map(|v| v.abs()).sum();
                let delta = rng.uniform(-0.5, 0.5) * span;
                let ratios: Vec<f64> = [8usize, 16, 32, 64, 128, 256]
                    .iter()
                    .map(|&r| {
                        box_count(&map, &x, delta, &region, r, probes)
                            .unwrap()
                            .ratio
                    })
                    .collect();
                let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                assert!(
                    max <= 4.0 * min,
                    "n={n}: ratios {ratios:?} exceed the factor-4 band"
                );
            }
        }
    }

    #[test]
    fn jordan_cover_shrinks_on_scalar_level_set() {
        // Level set {|y| = 0.5} in [0,1]: two cells at every even r, so the
        // covered volume is 2/r.
        let domain = Domain::single(vec![0.0], vec![1.0], "O").unwrap();
        let series =
            jordan_boundary_check(&identity_1d(), &domain, &[1.0], 0.5, &[8, 16, 32]).unwrap();
        assert_eq!(series, vec![0.25, 0.125, 0.0625]);
    }

    #[test]
    fn jordan_cover_empty_for_constant_map_off_level() {
        let map = RegressorMap::general("const", 1, 1, |_, out| out[0] = 3.0).unwrap();
        let domain = interval(-1.0, 1.0);
        let series = jordan_boundary_check(&map, &domain, &[1.0], 0.5, &[8, 16, 32]).unwrap();
        assert_eq!(series, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn jordan_cover_shrinks_for_exar_level_sets() {
        let map = make_exar(&[0.2, 0.1], &[0.3, -0.2], 1.0)
            .unwrap()
            .regressor()
            .clone();
        let domain = Domain::single(vec![-1.0, -1.0], vec![1.0, 1.0], "E").unwrap();
        let mut rng = SplitMix64::new(404);
        for _ in 0..3 {
            let x = rng.unit_vector(4);
            let series = jordan_boundary_check(&map, &domain, &x, 0.2, &[8, 16, 32, 64]).unwrap();
            for w in series.windows(2) {
                assert!(w[1] <= w[0] * 1.15 + 1e-12, "series {series:?}");
            }
            if series[0] > 0.0 {
                assert!(series[3] < series[0] / 4.0, "series {series:?}");
            }
        }
    }

    #[test]
    fn shear_translation_preserves_length() {
        // n = 1: the chain is a translation, so the preimage is an interval
        // of exactly the target length.
        let map = identity_1d();
        let target = BoxRegion::new(vec![0.3], vec![1.1]).unwrap();
        let bounding = shear_bounding_box(&map, &[0.7], &[2.0], &target, 16, 0.3).unwrap();
        let result =
            shear_volume_test(&map, &[0.7], &[2.0], &target, &bounding, 200_000, 31).unwrap();
        let p = result.exact / result.bounding_volume;
        let sigma = result.bounding_volume * (p * (1.0 - p) / result.samples as f64).sqrt();
        assert!((result.estimate - result.exact).abs() <= 3.0 * sigma);
    }

    #[test]
    fn shear_with_zero_drive_is_identity() {
        let map = identity_1d();
        let target = BoxRegion::new(vec![-0.5], vec![0.5]).unwrap();
        let bounding = shear_bounding_box(&map, &[0.0], &[1.0], &target, 8, 0.5).unwrap();
        let result =
            shear_volume_test(&map, &[0.0], &[1.0], &target, &bounding, 100_000, 9).unwrap();
        let p = result.exact / result.bounding_volume;
        let sigma = result.bounding_volume * (p * (1.0 - p) / result.samples as f64).sqrt();
        assert!((result.estimate - result.exact).abs() <= 3.0 * sigma);
    }

    #[test]
    fn shear_rejects_undersized_bounding_box() {
        let map = identity_1d();
        let target = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        let too_small = BoxRegion::new(vec![0.0], vec![0.1]).unwrap();
        assert!(shear_volume_test(&map, &[0.9], &[5.0], &target, &too_small, 100_000, 1).is_err());
    }

    #[test]
    fn shear_exar_plane_preserves_volume() {
        let model = make_exar(&[0.2, -0.1], &[0.1, 0.3], 1.0).unwrap();
        let map = model.regressor();
        let x = [0.4, -0.2, 0.1, 0.3];
        let history = [0.5, -0.7];
        let target = BoxRegion::new(vec![-0.6, 0.2], vec![0.4, 1.0]).unwrap();
        let bounding = shear_bounding_box(map, &x, &history, &target, 32, 0.3).unwrap();
        let result =
            shear_volume_test(map, &x, &history, &target, &bounding, 1_000_000, 77).unwrap();
        let rel = (result.estimate - result.exact).abs() / result.exact;
        assert!(rel <= 0.05, "relative error {rel}");
    }

    #[test]
    fn domain_union_volume_and_sampling() {
        let domain = Domain::new(
            vec![
                BoxRegion::new(vec![-2.0], vec![-1.0]).unwrap(),
                BoxRegion::new(vec![1.0], vec![3.0]).unwrap(),
            ],
            "split",
        )
        .unwrap();
        assert_eq!(domain.volume(), 3.0);
        let mut rng = SplitMix64::new(8);
        let mut right = 0;
        for _ in 0..3000 {
            let p = domain.sample(&mut rng);
            assert!(domain.contains(&p));
            if p[0] > 0.0 {
                right += 1;
            }
        }
        // Two thirds of the mass sits in the right box.
        let frac = right as f64 / 3000.0;
        assert!((frac - 2.0 / 3.0).abs() < 0.05);
        let bb = domain.bounding_box();
        assert_eq!(bb.lo(), &[-2.0]);
        assert_eq!(bb.hi(), &[3.0]);
    }
}
