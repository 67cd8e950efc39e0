use serde::{Deserialize, Serialize};

use crate::config::RpssConfig;
use crate::jitter::JitterModel;

use super::nb_moments;

/// First four moments of a law, stored as cumulants plus the derived shape
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `kappa_1 .. kappa_4`
    pub cumulants: [f64; 4],
}

impl MomentSet {
    /// Shape coefficients are NaN when the variance is zero.
    pub fn from_cumulants(cumulants: [f64; 4]) -> Self {
        let [k1, k2, k3, k4] = cumulants;
        let (skewness, excess_kurtosis) = if k2 > 0.0 {
            (k3 / k2.powf(1.5), k4 / (k2 * k2))
        } else {
            (f64::NAN, f64::NAN)
        };
        MomentSet {
            mean: k1,
            variance: k2,
            skewness,
            excess_kurtosis,
            cumulants,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Cumulants of the compound sum by total cumulance over `N_p`.
pub fn t_moments(cfg: &RpssConfig, jitter: &JitterModel) -> MomentSet {
    let [n1, n2, n3, n4] = nb_moments(cfg).cumulants;
    let mu = jitter.mean();
    let s2 = jitter.variance();
    let x3 = jitter.cumulant3();
    let x4 = jitter.cumulant4();

    let k1 = mu * n1;
    let k2 = mu * mu * n2 + s2 * n1;
    let k3 = mu.powi(3) * n3 + 3.0 * mu * s2 * n2 + x3 * n1;
    let k4 =
        mu.powi(4) * n4 + 6.0 * mu * mu * s2 * n3 + (4.0 * mu * x3 + 3.0 * s2 * s2) * n2 + x4 * n1;
    MomentSet::from_cumulants([k1, k2, k3, k4])
}
