use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A seeded random stream, independent of every other stream id.
///
/// Identical `(seed, stream)` pairs produce identical draw sequences on all
/// platforms. One stream is allocated per MAC entity and per noise process
/// so that changing one scenario knob does not perturb unrelated draws.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> RngStream {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { rng }
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u32) -> u32 {
        debug_assert!(n > 0);
        self.rng.gen_range(0..n)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.unit() < p
    }

    /// Exponential with the given mean, for arrival processes.
    pub fn exp(&mut self, mean: f64) -> f64 {
        let u = 1.0 - self.unit(); // in (0, 1]
        -mean * u.ln()
    }
}
