use crate::config::RpssConfig;
use crate::error::{Result, RpssError};
use crate::jitter::JitterModel;

use super::{ComplexValue, MomentSet};

/// `ln C(n, k)` as a sum of `k` logarithms; exact enough for small `k`.
fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `P(N_p = k)`: probability the `m`-th success lands on trial `k`.
///
/// Evaluated as `exp(ln C(k-1, m-1) + m ln p + (k-m) ln(1-p))`.
pub fn nb_pmf(cfg: &RpssConfig, k: i64) -> Result<f64> {
    if k < 0 {
        return Err(RpssError::Domain(format!("trial count {k} is negative")));
    }
    let k = k as u64;
    let m = cfg.successes() as u64;
    if k < m {
        return Ok(0.0);
    }
    let p = cfg.success_prob();
    let ln = ln_binomial(k - 1, m - 1) + m as f64 * p.ln() + (k - m) as f64 * (-p).ln_1p();
    Ok(ln.exp())
}

/// `P(N_p > k)`, i.e. fewer than `m` successes in the first `k` trials.
pub fn nb_tail(cfg: &RpssConfig, k: u64) -> f64 {
    let m = cfg.successes() as u64;
    if k < m {
        return 1.0;
    }
    let p = cfg.success_prob();
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    (0..m)
        .map(|j| (ln_binomial(k, j) + j as f64 * ln_p + (k - j) as f64 * ln_q).exp())
        .sum::<f64>()
        .min(1.0)
}

pub(crate) fn pgf_unchecked(cfg: &RpssConfig, z: ComplexValue) -> ComplexValue {
    let p = cfg.success_prob();
    // 1 - (1-p) z, arranged to stay accurate near z = 1
    let denom = (ComplexValue::new(1.0, 0.0) - z) + z * p;
    (z * p / denom).powu(cfg.successes())
}

/// Probability generating function `(p z / (1 - (1-p) z))^m`.
pub fn nb_pgf(cfg: &RpssConfig, z: ComplexValue) -> Result<ComplexValue> {
    if z.norm() * cfg.failure_prob() >= 1.0 {
        return Err(RpssError::Domain(format!(
            "|z| = {} is outside the radius of convergence 1/(1-p)",
            z.norm()
        )));
    }
    Ok(pgf_unchecked(cfg, z))
}

/// Closed-form cumulants of the trial count.
pub fn nb_moments(cfg: &RpssConfig) -> MomentSet {
    let m = cfg.successes() as f64;
    let p = cfg.success_prob();
    let q = cfg.failure_prob();
    let k1 = m / p;
    let k2 = m * q / (p * p);
    let k3 = m * q * (2.0 - p) / p.powi(3);
    let k4 = m * q * (6.0 - 6.0 * p + p * p) / p.powi(4);
    MomentSet::from_cumulants([k1, k2, k3, k4])
}

/// Characteristic function of `T` through the generating function of `N_p`:
/// `phi_T(omega) = G(phi_X(omega))`.
pub fn compose_cf(cfg: &RpssConfig, jitter: &JitterModel, omega: f64) -> Result<ComplexValue> {
    if omega == 0.0 {
        return Ok(ComplexValue::new(1.0, 0.0));
    }
    let phi = jitter.cf(omega);
    let p = cfg.success_prob();
    let denom = (ComplexValue::new(1.0, 0.0) - phi) + phi * p;
    if denom.norm() < 1e-300 {
        return Err(RpssError::Singular { omega });
    }
    Ok((phi * p / denom).powu(cfg.successes()))
}
