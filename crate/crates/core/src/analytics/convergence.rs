use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::config::RpssConfig;
use crate::error::{Result, RpssError};
use crate::jitter::JitterModel;

use super::ComplexValue;

/// Per-mode geometric factors and the resulting uniformity bounds.
///
/// `rho_n_modes[k - 1]` is the factor for `omega_k = 2 pi k / R`,
/// `k = 1 .. R-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub modulus: u64,
    pub successes: u32,
    pub rho_n_modes: Vec<f64>,
    pub rho_n: f64,
    /// `((R-1)/R) rho_N^m`
    pub bound_n: f64,
    pub rho_t_modes: Option<Vec<f64>>,
    /// Equals 1 when the jitter is lattice-supported on a sublattice that
    /// aliases a mode; the bound is then vacuous.
    pub rho_t: Option<f64>,
    pub bound_t: Option<f64>,
}

impl ConvergenceReport {
    pub fn rho_n_pow_m(&self) -> f64 {
        self.rho_n.powi(self.successes as i32)
    }
}

fn factor(z: ComplexValue, factorial: f64) -> f64 {
    (z / ((ComplexValue::new(1.0, 0.0) - z) * factorial + z)).norm()
}

fn bound(rho: f64, cfg: &RpssConfig) -> f64 {
    let r = cfg.modulus() as f64;
    (r - 1.0) / r * rho.powi(cfg.successes() as i32)
}

/// `rho_{N,k} = |1 / ((1 - e^{i w_k}) N! + e^{i w_k})|` and, given a jitter
/// law, `rho_{T,k}` with `phi_X(w_k)` in place of `e^{i w_k}`.
pub fn convergence_report(
    cfg: &RpssConfig,
    jitter: Option<&JitterModel>,
) -> Result<ConvergenceReport> {
    if cfg.modulus() < 2 {
        return Err(RpssError::InvalidConfig(
            "convergence factors need a modulus of at least 2".into(),
        ));
    }
    let modulus = cfg.modulus();
    let factorial = cfg.factorial() as f64;
    let omegas: Vec<f64> = (1..modulus)
        .map(|k| TAU * k as f64 / modulus as f64)
        .collect();
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);

    let rho_n_modes: Vec<f64> = omegas
        .iter()
        .map(|&w| factor(ComplexValue::from_polar(1.0, w), factorial))
        .collect();
    let rho_n = max(&rho_n_modes);

    let rho_t_modes: Option<Vec<f64>> =
        jitter.map(|j| omegas.iter().map(|&w| factor(j.cf(w), factorial)).collect());
    let rho_t = rho_t_modes.as_deref().map(max);

    Ok(ConvergenceReport {
        modulus,
        successes: cfg.successes(),
        bound_n: bound(rho_n, cfg),
        bound_t: rho_t.map(|r| bound(r, cfg)),
        rho_n_modes,
        rho_n,
        rho_t_modes,
        rho_t,
    })
}
