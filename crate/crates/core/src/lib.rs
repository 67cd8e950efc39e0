//! Random permutation sorting as an entropy source.
//!
//! A cycle shuffles an `N`-element array until it has come out sorted `m`
//! times. The trial count `N_p` is negative binomial with success
//! probability `1/N!`; the elapsed ticks `T` are a compound sum of per-trial
//! runtimes. Both are reduced modulo `R = 2^n` and the residues are packed
//! into bytes, with the elapsed ticks fed back into the engine seed.
//!
//! - [`analytics`]: closed-form laws, exact residue distributions, convergence factors.
//! - [`engine`]: the shuffle-until-sorted engine and permutation bookkeeping.
//! - [`jitter`] and [`timer`]: per-trial runtime models and tick sources.
//! - [`pipeline`]: residue reduction, byte assembly and feedback reseeding.
//! - [`stats`]: stream statistics and moment comparison.
//! - [`planner`]: parameter search with exact cost accounting.

pub mod analytics;
pub mod config;
pub mod engine;
pub mod error;
pub mod jitter;
pub mod pipeline;
pub mod planner;
pub mod rng;
pub mod stats;
pub mod timer;

pub use analytics::{ComplexValue, ConvergenceReport, MomentSet, ResidueDistribution};
pub use config::RpssConfig;
pub use engine::{CycleSample, CycleTrace, Permutation, SortingEngine};
pub use error::{Result, RpssError};
pub use jitter::{JitterModel, NamedJitterPreset};
pub use pipeline::{OutputSource, Pipeline, PipelineState};
pub use planner::PlanRow;
pub use rng::{EngineRng, SeededRng};
pub use stats::{MomentComparison, StatsReport};
pub use timer::{RealTimer, SimulatedTimer, TimerSource};
