//! Seeded random streams. Every consumer derives its own stream from the
//! master seed so that, for example, changing the dropout draw count never
//! perturbs the shuffle order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream identifiers used with [`derive_seed`].
pub mod stream {
    pub const PRESENCE: u64 = 1;
    pub const SENSOR: u64 = 10;
    pub const INTERFERENCE: u64 = 20;
    pub const NOISE: u64 = 30;
    pub const INIT: u64 = 100;
    pub const SHUFFLE: u64 = 101;
    pub const DROPOUT: u64 = 102;
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer applied to `master ^ stream * golden`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derived_rng(master: u64, stream: u64) -> Rng {
    rng_from_seed(derive_seed(master, stream))
}

/// Uniform sample in `[-bound, bound)`.
pub fn uniform_symmetric(rng: &mut Rng, bound: f64) -> f64 {
    use rand::Rng as _;
    (rng.random::<f64>() * 2.0 - 1.0) * bound
}
