use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::config::RpssConfig;
use crate::error::{Result, RpssError};
use crate::jitter::JitterModel;

use super::nb::pgf_unchecked;
use super::{compose_cf, nb_pmf, nb_tail, ComplexValue};

/// Inversion output more negative than this is a numerical failure rather
/// than round-off.
const NEGATIVE_LIMIT: f64 = -1e-9;
const SUM_TOLERANCE: f64 = 1e-9;

/// Default guard on the truncation point of the brute-force series.
pub const DEFAULT_TRIAL_CAP: u64 = 10_000_000;

/// A probability vector over `Z_R` with its uniformity summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueDistribution {
    pub modulus: u64,
    pub probabilities: Vec<f64>,
    /// `max_r |p_r - 1/R|`
    pub max_deviation: f64,
    pub shannon_entropy_bits: f64,
    pub min_entropy_bits: f64,
}

impl ResidueDistribution {
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(RpssError::Empty);
        }
        if let Some((r, &v)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_nan() || **v < 0.0)
        {
            return Err(RpssError::NegativeProbability {
                residue: r,
                value: v,
            });
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(RpssError::Domain(format!(
                "residue probabilities sum to {total}"
            )));
        }
        let modulus = probabilities.len() as u64;
        let uniform = 1.0 / modulus as f64;
        let max_deviation = probabilities
            .iter()
            .map(|p| (p - uniform).abs())
            .fold(0.0, f64::max);
        let shannon_entropy_bits = -probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.log2())
            .sum::<f64>();
        let max_p = probabilities.iter().copied().fold(0.0, f64::max);
        Ok(ResidueDistribution {
            modulus,
            probabilities,
            max_deviation,
            shannon_entropy_bits,
            min_entropy_bits: -max_p.log2(),
        })
    }

    /// `max_deviation` relative to `1/R`, in percent.
    pub fn max_deviation_percent(&self) -> f64 {
        100.0 * self.max_deviation * self.modulus as f64
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, other: &ResidueDistribution) -> f64 {
        assert_eq!(self.modulus, other.modulus, "moduli differ");
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Inverse DFT over `Z_R` of the transform values `F(omega_k)`,
/// `omega_k = 2 pi k / R`.
fn invert_on_roots<F>(modulus: u64, mut transform: F) -> Result<ResidueDistribution>
where
    F: FnMut(usize, f64) -> Result<ComplexValue>,
{
    let r_len = modulus as usize;
    let twiddles: Vec<ComplexValue> = (0..r_len)
        .map(|j| ComplexValue::from_polar(1.0, -TAU * j as f64 / modulus as f64))
        .collect();
    let mut values = Vec::with_capacity(r_len);
    values.push(ComplexValue::new(1.0, 0.0));
    for k in 1..r_len {
        values.push(transform(k, TAU * k as f64 / modulus as f64)?);
    }
    let mut probs = Vec::with_capacity(r_len);
    for r in 0..r_len {
        let acc: ComplexValue = values
            .iter()
            .enumerate()
            .map(|(k, v)| v * twiddles[(r * k) % r_len])
            .sum();
        let p = acc.re / modulus as f64;
        if p < NEGATIVE_LIMIT {
            return Err(RpssError::NegativeProbability {
                residue: r,
                value: p,
            });
        }
        // negative round-off above NEGATIVE_LIMIT is zeroed
        probs.push(p.max(0.0));
    }
    ResidueDistribution::from_probabilities(probs)
}

/// Law of `N_p mod R` from the generating function on the roots of unity.
pub fn mod_residue_np(cfg: &RpssConfig) -> Result<ResidueDistribution> {
    invert_on_roots(cfg.modulus(), |_, omega| {
        Ok(pgf_unchecked(cfg, ComplexValue::from_polar(1.0, omega)))
    })
}

/// Law of `T mod R` from the composed characteristic function.
pub fn mod_residue_t(cfg: &RpssConfig, jitter: &JitterModel) -> Result<ResidueDistribution> {
    invert_on_roots(cfg.modulus(), |_, omega| compose_cf(cfg, jitter, omega))
}

/// Output of the brute-force series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedResidue {
    pub distribution: ResidueDistribution,
    /// `P(N_p > terms)`, the mass not represented.
    pub tail_mass: f64,
    /// Largest trial count included.
    pub terms: u64,
}

/// Law of `T mod R` as `sum_k P(N_p = k) * (X^{*k} mod R)`, built by iterated
/// cyclic convolution and truncated once the remaining tail is below
/// `tail_eps`.
pub fn exact_t_mod(
    cfg: &RpssConfig,
    jitter: &JitterModel,
    tail_eps: f64,
) -> Result<TruncatedResidue> {
    exact_t_mod_with_cap(cfg, jitter, tail_eps, DEFAULT_TRIAL_CAP)
}

pub fn exact_t_mod_with_cap(
    cfg: &RpssConfig,
    jitter: &JitterModel,
    tail_eps: f64,
    cap: u64,
) -> Result<TruncatedResidue> {
    if !(tail_eps > 0.0 && tail_eps <= 1e-6) {
        return Err(RpssError::Domain(format!(
            "tail_eps must lie in (0, 1e-6], got {tail_eps}"
        )));
    }
    let modulus = cfg.modulus() as usize;
    let step: Vec<(usize, f64)> = jitter
        .residues(cfg.modulus())
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > 0.0)
        .collect();

    let mut power = vec![0.0; modulus];
    power[0] = 1.0;
    let mut scratch = vec![0.0; modulus];
    let mut acc = vec![0.0; modulus];
    let m = cfg.successes() as u64;
    let mut k = 0u64;
    let tail = loop {
        k += 1;
        if k > cap {
            return Err(RpssError::TruncationCap { needed: k, cap });
        }
        scratch.iter_mut().for_each(|v| *v = 0.0);
        for (r, &mass) in power.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(s, p) in &step {
                let idx = if r + s >= modulus {
                    r + s - modulus
                } else {
                    r + s
                };
                scratch[idx] += mass * p;
            }
        }
        std::mem::swap(&mut power, &mut scratch);
        if k < m {
            continue;
        }
        let weight = nb_pmf(cfg, k as i64)?;
        acc.iter_mut()
            .zip(&power)
            .for_each(|(a, &v)| *a += weight * v);
        let tail = nb_tail(cfg, k);
        if tail < tail_eps {
            break tail;
        }
    };
    Ok(TruncatedResidue {
        distribution: ResidueDistribution::from_probabilities(acc)?,
        tail_mass: tail,
        terms: k,
    })
}
