//! System parameters shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RpssError};

/// Largest array size whose factorial fits in a `u64`.
pub const MAX_ARRAY_SIZE: usize = 20;

/// Residue widths that pack evenly into a byte.
pub const BYTE_WIDTHS: [u32; 4] = [1, 2, 4, 8];

/// Parameters of one sorting system: array size `N`, successes per cycle `m`
/// and the output modulus `R`.
///
/// The success probability `1/N!` is kept as the exact integer `N!`; callers
/// convert to floating point only where they need it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct RpssConfig {
    array_size: usize,
    successes: u32,
    modulus: u64,
    factorial: u64,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    array_size: usize,
    successes: u32,
    modulus: u64,
}

impl TryFrom<RawConfig> for RpssConfig {
    type Error = RpssError;

    fn try_from(raw: RawConfig) -> Result<Self> {
        RpssConfig::new(raw.array_size, raw.successes, raw.modulus)
    }
}

impl From<RpssConfig> for RawConfig {
    fn from(cfg: RpssConfig) -> Self {
        RawConfig {
            array_size: cfg.array_size,
            successes: cfg.successes,
            modulus: cfg.modulus,
        }
    }
}

pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

impl RpssConfig {
    /// Validates `2 <= N <= 20`, `m >= 1` and `R >= 1`.
    ///
    /// `R = 1` is accepted so the analytics can be evaluated at the trivial
    /// modulus; byte assembly additionally requires [`Self::output_bits`].
    pub fn new(array_size: usize, successes: u32, modulus: u64) -> Result<Self> {
        if !(2..=MAX_ARRAY_SIZE).contains(&array_size) {
            return Err(RpssError::InvalidConfig(format!(
                "array size must be in 2..={MAX_ARRAY_SIZE}, got {array_size}"
            )));
        }
        if successes == 0 {
            return Err(RpssError::InvalidConfig(
                "success count must be at least 1".into(),
            ));
        }
        if modulus == 0 {
            return Err(RpssError::InvalidConfig(
                "modulus must be at least 1".into(),
            ));
        }
        let factorial = factorial(array_size).expect("N <= 20 fits in u64");
        Ok(RpssConfig {
            array_size,
            successes,
            modulus,
            factorial,
        })
    }

    /// Configuration for `n`-bit output, `R = 2^n`.
    pub fn with_bits(array_size: usize, successes: u32, bits: u32) -> Result<Self> {
        if !BYTE_WIDTHS.contains(&bits) {
            return Err(RpssError::InvalidConfig(format!(
                "output bits must be one of {BYTE_WIDTHS:?}, got {bits}"
            )));
        }
        Self::new(array_size, successes, 1u64 << bits)
    }

    pub fn array_size(&self) -> usize {
        self.array_size
    }

    pub fn successes(&self) -> u32 {
        self.successes
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `N!`, the reciprocal of the per-trial success probability.
    pub fn factorial(&self) -> u64 {
        self.factorial
    }

    pub fn success_prob(&self) -> f64 {
        1.0 / self.factorial as f64
    }

    /// `1 - 1/N!`, formed from the exact ratio `(N! - 1) / N!`.
    pub fn failure_prob(&self) -> f64 {
        (self.factorial - 1) as f64 / self.factorial as f64
    }

    /// Same system with a different modulus.
    pub fn with_modulus(&self, modulus: u64) -> Result<Self> {
        Self::new(self.array_size, self.successes, modulus)
    }

    /// Same system with a different success count.
    pub fn with_successes(&self, successes: u32) -> Result<Self> {
        Self::new(self.array_size, successes, self.modulus)
    }

    /// `n` such that `R = 2^n` and `n` divides 8, if any.
    pub fn output_bits(&self) -> Option<u32> {
        if !self.modulus.is_power_of_two() {
            return None;
        }
        let bits = self.modulus.trailing_zeros();
        BYTE_WIDTHS.contains(&bits).then_some(bits)
    }

    /// Expected trials per cycle, `M = m N!`.
    pub fn expected_trials(&self) -> u128 {
        self.successes as u128 * self.factorial as u128
    }

    /// `C_cycle = m N! N`.
    pub fn cycle_cost(&self) -> u128 {
        self.expected_trials() * self.array_size as u128
    }

    /// `C_byte = (8/n) C_cycle`; `None` when the modulus is not a byte width.
    pub fn byte_cost(&self) -> Option<u128> {
        self.output_bits()
            .map(|bits| (8 / bits) as u128 * self.cycle_cost())
    }
}

impl std::fmt::Display for RpssConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N={} m={} R={} (N!={})",
            self.array_size, self.successes, self.modulus, self.factorial
        )
    }
}
