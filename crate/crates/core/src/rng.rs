//! Seeded generator shared by image degradation and identifier minting.
//!
//! The algorithm is fixed: SplitMix64 state advance, uniform doubles from the
//! top 53 bits, and Box–Muller for Gaussian draws (the second draw of each
//! pair is cached). Output for a given seed never changes between releases.

/// SplitMix64 pseudo-random generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_gaussian: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_gaussian: None,
        }
    }

    /// Seeds from system entropy.
    pub fn from_entropy() -> Self {
        Self::new(rand::random::<u64>())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in the half-open interval (0, 1].
    pub fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        let u1 = self.next_unit();
        let u2 = self.next_unit();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_gaussian = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// 16 lowercase hex characters.
    pub fn next_hex_id(&mut self) -> String {
        format!("{:016x}", self.next_u64())
    }
}

/// Thread-safe source of 16-hex-character identifiers. Seeded sources are
/// reproducible; unseeded ones draw their seed from system entropy.
#[derive(Debug)]
pub struct IdSource {
    rng: parking_lot::Mutex<SplitMix64>,
}

impl IdSource {
    pub fn new(seed: Option<u64>) -> Self {
        let rng = match seed {
            Some(s) => SplitMix64::new(s),
            None => SplitMix64::from_entropy(),
        };
        Self {
            rng: parking_lot::Mutex::new(rng),
        }
    }

    pub fn next_id(&self) -> String {
        self.rng.lock().next_hex_id()
    }
}
