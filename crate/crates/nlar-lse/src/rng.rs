//! Deterministic seedable random number generation.
//!
//! All randomness in the toolkit flows through [`SplitMix64`], a counter-based
//! generator: the state advances by a fixed Weyl increment and each output is a
//! finalizer hash of the counter. The same seed always yields the same stream,
//! independent of platform, which is what the reproducibility contracts
//! (bit-identical trajectories, byte-identical run outputs) rest on.
//!
//! Standard-normal variates use the Marsaglia polar method; the spare variate
//! of each accepted pair is cached, so a generator instance emits normals in a
//! fixed, documented order.

const WEYL: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer of the splitmix64 generator: a bijective avalanche hash on u64.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the stream seed for replicate `r` from a base seed.
///
/// Replicates run concurrently without coordination; each gets an
/// independent stream via `mix(base ^ (r+1)·WEYL)`. The `+1` keeps
/// replicate 0 distinct from the base stream itself.
pub fn replicate_seed(base_seed: u64, replicate: u64) -> u64 {
    mix(base_seed ^ replicate.wrapping_add(1).wrapping_mul(WEYL))
}

/// Counter-based 64-bit generator (splitmix64).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 {
            state: seed,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(WEYL);
        mix(self.state)
    }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }

    /// A unit vector uniform on the sphere in `dim` dimensions
    /// (normalized standard-normal components).
    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.next_normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                return v.iter().map(|x| x / norm).collect();
            }
        }
    }
}
