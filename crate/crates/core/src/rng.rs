//! Deterministic random substreams.
//!
//! Every parallel unit of work (annulus, pair, Monte Carlo block) draws from its
//! own ChaCha stream keyed by `(seed, keys)`, so results do not depend on how
//! rayon schedules the work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Domain tags keep substreams of different subsystems apart.
pub mod domain {
    pub const SAMPLE: u64 = 1;
    pub const PAIRS: u64 = 2;
    pub const MONTE_CARLO: u64 = 3;
    pub const REFERENCE: u64 = 4;
    pub const RESTART: u64 = 5;
    pub const NEIGHBORHOOD: u64 = 6;
    pub const PROBE: u64 = 7;
    pub const DERIVED: u64 = 8;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(keys: &[u64]) -> u64 {
    keys.iter().fold(0x6A09_E667_F3BC_C908, |acc, &k| splitmix(acc ^ splitmix(k)))
}

/// Independent generator for the unit of work identified by `keys`.
pub fn substream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mix(keys));
    rng
}

/// A new 64-bit seed derived from `seed` and `keys` (for handing to nested operations).
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    splitmix(seed ^ mix(keys))
}

/// Uniform random unit vector in `n` dimensions.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = crate::vecops::normalize(&v) {
            return u;
        }
    }
}

/// Uniform point in the open unit interval `(0, 1]`.
#[inline]
pub fn unit_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Uniform point in the ball of the given radius.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    let u = unit_vector(rng, n);
    let r = radius * unit_open(rng).powf(1.0 / n as f64);
    u.into_iter().map(|x| x * r).collect()
}

/// Log-uniform radius in `(lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let t = unit_open(rng);
    let r = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
    r.clamp(lo * (1.0 + 1e-15), hi).max(f64::MIN_POSITIVE)
}

/// Uniform-volume point in the annulus `inner < |x| <= outer`.
pub fn in_annulus<R: Rng + ?Sized>(rng: &mut R, n: usize, inner: f64, outer: f64) -> Vec<f64> {
    let u = unit_vector(rng, n);
    let nf = n as f64;
    let lo = (inner / outer).powf(nf);
    let t = lo + (1.0 - lo) * unit_open(rng);
    let r = (outer * t.powf(1.0 / nf)).clamp(inner * (1.0 + 1e-15), outer);
    u.into_iter().map(|x| x * r).collect()
}
