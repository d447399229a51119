//! Deterministic randomness.
//!
//! Every random draw in this crate flows through the splitmix64 generator
//! with Box-Muller normals, so any experiment reproduces bit-for-bit from its
//! seed in any implementation of the same recipe.

/// The splitmix64 PRNG (Steele, Lea, Flood; the `java.util.SplittableRandom`
/// finalizer). State advances by the 64-bit golden ratio and each output is
/// the mixed state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// A uniform draw in the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normals.
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// A uniform integer in `0..bound`.
    pub fn next_below(&mut self, bound: u32) -> u32 {
        debug_assert!(bound > 0);
        (self.next_u64() % u64::from(bound)) as u32
    }
}

/// Derives an independent child seed from a root seed, a check index, and a
/// trial index. Failing trials replay in isolation from the derived seed.
pub fn derive_seed(root: u64, check_index: u64, trial_index: u64) -> u64 {
    let mut g = SplitMix64::new(root ^ check_index.wrapping_mul(0xA076_1D64_78BD_642F));
    let mixed = g.next_u64() ^ trial_index.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    SplitMix64::new(mixed).next_u64()
}
