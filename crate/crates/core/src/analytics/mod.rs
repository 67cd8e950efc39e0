//! Exact distribution theory of the permutation count `N_p ~ NB(m, 1/N!)`
//! and the compound elapsed time `T = X_1 + ... + X_{N_p}`.
//!
//! Everything here is a pure function of its inputs. Residue laws modulo `R`
//! are obtained by inverting the generating function on the `R`-th roots of
//! unity; [`exact_t_mod`] computes the same law by brute-force convolution and
//! serves as the independent cross-check.

mod convergence;
mod moments;
mod nb;
mod residue;

pub use convergence::{convergence_report, ConvergenceReport};
pub use moments::{t_moments, MomentSet};
pub use nb::{compose_cf, nb_moments, nb_pgf, nb_pmf, nb_tail};
pub use residue::{
    exact_t_mod, exact_t_mod_with_cap, mod_residue_np, mod_residue_t, ResidueDistribution,
    TruncatedResidue, DEFAULT_TRIAL_CAP,
};

/// Carrier for generating-function and characteristic-function values.
pub type ComplexValue = num_complex::Complex64;
