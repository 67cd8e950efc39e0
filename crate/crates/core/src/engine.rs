//! The sorting process itself: shuffle an `N`-element array until it is
//! ascending, `m` times, timing every trial.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::RpssConfig;
use crate::error::{Result, RpssError};
use crate::rng::{Bound, EngineRng};
use crate::timer::{elapsed, TimerSource};

/// Default limit on trials in one cycle before the rng is declared broken.
pub const DEFAULT_TRIAL_GUARD: u64 = 1_000_000_000;

/// Deltas at or above this many ticks are "too big" for per-trial reports.
pub const DEFAULT_TOO_BIG_CUTOFF: u64 = 500;

/// A bijection on `0..n`, stored as its image table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_vec(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &v in &mapping {
            if v >= mapping.len() || std::mem::replace(&mut seen[v], true) {
                return Err(RpssError::NotAPermutation(format!("{mapping:?}")));
            }
        }
        Ok(Permutation(mapping))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`, i.e. `i -> self[other[i]]`.
    ///
    /// Rearranging an array `a` by `p` gives `a ∘ p`, so applying `p` then `q`
    /// is `compose(p, q)`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "permutation sizes differ");
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }
}

/// Fisher–Yates: for `i = N-1 .. 1`, swap `i` with a uniform `j in [0, i]`.
pub fn shuffle<T, R: EngineRng + ?Sized>(array: &mut [T], rng: &mut R) {
    for i in (1..array.len()).rev() {
        let j = rng.bounded(i as u64 + 1) as usize;
        array.swap(i, j);
    }
}

fn shuffle_with<T, R: EngineRng + ?Sized>(array: &mut [T], rng: &mut R, bounds: &[Bound]) {
    for i in (1..array.len()).rev() {
        let j = rng.draw(&bounds[i]) as usize;
        array.swap(i, j);
    }
}

fn is_ascending<T: PartialOrd>(array: &[T]) -> bool {
    array.windows(2).all(|w| w[0] < w[1])
}

/// Permutations applied between two sorted states, together with the
/// arrangement the segment started from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSegment {
    pub disorder: Permutation,
    pub applied: Vec<Permutation>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleTrace {
    pub trial_ticks: Vec<u64>,
    pub segments: Vec<TraceSegment>,
}

/// Observables of one cycle: trials `n_p` and total ticks `t_ticks` until
/// the `m`-th sort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSample {
    pub n_p: u64,
    pub t_ticks: u64,
    pub successes: u32,
    /// Trials whose delta reached the too-big cutoff. Their ticks are still
    /// part of `t_ticks`.
    pub too_big: u64,
    pub trace: Option<CycleTrace>,
}

/// Reusable engine for one configuration.
#[derive(Debug, Clone)]
pub struct SortingEngine {
    cfg: RpssConfig,
    bounds: Vec<Bound>,
    array: Vec<u8>,
    trial_guard: u64,
    too_big_cutoff: u64,
}

impl SortingEngine {
    pub fn new(cfg: RpssConfig) -> Self {
        let n = cfg.array_size();
        SortingEngine {
            cfg,
            bounds: (0..n as u64).map(|i| Bound::new(i + 1)).collect(),
            array: (0..n as u8).collect(),
            trial_guard: DEFAULT_TRIAL_GUARD,
            too_big_cutoff: DEFAULT_TOO_BIG_CUTOFF,
        }
    }

    pub fn with_trial_guard(mut self, guard: u64) -> Self {
        self.trial_guard = guard;
        self
    }

    pub fn with_too_big_cutoff(mut self, cutoff: u64) -> Self {
        self.too_big_cutoff = cutoff;
        self
    }

    pub fn config(&self) -> &RpssConfig {
        &self.cfg
    }

    pub fn too_big_cutoff(&self) -> u64 {
        self.too_big_cutoff
    }

    /// Run trials until `m` sorts.
    ///
    /// The array starts sorted and receives one untimed shuffle. Each trial
    /// then applies a fresh uniform permutation to the current arrangement,
    /// so every trial succeeds with probability exactly `1/N!`. The timer
    /// brackets only the shuffle and the sortedness test.
    pub fn run_cycle<R, T>(
        &mut self,
        rng: &mut R,
        timer: &mut T,
        trace: bool,
    ) -> Result<CycleSample>
    where
        R: EngineRng + ?Sized,
        T: TimerSource + ?Sized,
    {
        if trace {
            return self.run_traced(rng, timer);
        }
        let m = self.cfg.successes();
        let array = &mut self.array;
        array.iter_mut().enumerate().for_each(|(i, v)| *v = i as u8);
        shuffle_with(array, rng, &self.bounds);

        let (mut n_p, mut t_ticks, mut too_big, mut successes) = (0u64, 0u64, 0u64, 0u32);
        loop {
            if n_p >= self.trial_guard {
                return Err(RpssError::TrialGuard(self.trial_guard));
            }
            let before = timer.tick_before();
            shuffle_with(array, rng, &self.bounds);
            let sorted = is_ascending(array);
            let after = timer.tick_after();

            let delta = elapsed(before, after);
            n_p += 1;
            t_ticks = t_ticks.wrapping_add(delta);
            too_big += (delta >= self.too_big_cutoff) as u64;
            if sorted {
                successes += 1;
                if successes == m {
                    break;
                }
            }
        }
        Ok(CycleSample {
            n_p,
            t_ticks,
            successes,
            too_big,
            trace: None,
        })
    }

    // Same draws as the untraced path, but each trial's permutation is built
    // on an identity table first and then applied, so it can be recorded.
    fn run_traced<R, T>(&mut self, rng: &mut R, timer: &mut T) -> Result<CycleSample>
    where
        R: EngineRng + ?Sized,
        T: TimerSource + ?Sized,
    {
        let n = self.cfg.array_size();
        let m = self.cfg.successes();
        let mut state = Permutation::identity(n);
        shuffle_with(&mut state.0, rng, &self.bounds);

        let mut trace = CycleTrace::default();
        let mut segment = TraceSegment {
            disorder: state.clone(),
            applied: Vec::new(),
        };
        let (mut n_p, mut t_ticks, mut too_big, mut successes) = (0u64, 0u64, 0u64, 0u32);
        loop {
            if n_p >= self.trial_guard {
                return Err(RpssError::TrialGuard(self.trial_guard));
            }
            let before = timer.tick_before();
            let mut step = Permutation::identity(n);
            shuffle_with(&mut step.0, rng, &self.bounds);
            state = state.compose(&step);
            let sorted = state.is_identity();
            let after = timer.tick_after();

            let delta = elapsed(before, after);
            n_p += 1;
            t_ticks = t_ticks.wrapping_add(delta);
            too_big += (delta >= self.too_big_cutoff) as u64;
            trace.trial_ticks.push(delta);
            segment.applied.push(step);
            if sorted {
                successes += 1;
                let next = TraceSegment {
                    disorder: state.clone(),
                    applied: Vec::new(),
                };
                trace.segments.push(std::mem::replace(&mut segment, next));
                if successes == m {
                    break;
                }
            }
        }
        self.array
            .iter_mut()
            .zip(state.as_slice())
            .for_each(|(a, &v)| *a = v as u8);
        Ok(CycleSample {
            n_p,
            t_ticks,
            successes,
            too_big,
            trace: Some(trace),
        })
    }
}

/// One cycle with a fresh engine and the default guards.
pub fn run_cycle<R, T>(
    cfg: &RpssConfig,
    rng: &mut R,
    timer: &mut T,
    trace: bool,
) -> Result<CycleSample>
where
    R: EngineRng + ?Sized,
    T: TimerSource + ?Sized,
{
    SortingEngine::new(*cfg).run_cycle(rng, timer, trace)
}

/// True iff applying `trace` left to right undoes `disorder`, i.e. the
/// composed product equals `disorder^{-1}`.
pub fn verify_composition(trace: &[Permutation], disorder: &Permutation) -> Result<bool> {
    let n = disorder.len();
    if let Some(bad) = trace.iter().find(|p| p.len() != n) {
        return Err(RpssError::LengthMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    let product = trace
        .iter()
        .fold(Permutation::identity(n), |acc, p| acc.compose(p));
    Ok(product == disorder.inverse())
}

/// Per-trial tick frequencies, excluding too-big deltas.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TickHistogram {
    pub cutoff: u64,
    pub counts: BTreeMap<u64, u64>,
    pub excluded: u64,
}

impl TickHistogram {
    pub fn new(cutoff: u64) -> Self {
        TickHistogram {
            cutoff,
            ..Default::default()
        }
    }

    pub fn record(&mut self, delta: u64) {
        if delta >= self.cutoff {
            self.excluded += 1;
        } else {
            *self.counts.entry(delta).or_default() += 1;
        }
    }

    pub fn recorded(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Sample mean and standard deviation of the recorded deltas.
    pub fn mean_std(&self) -> Option<(f64, f64)> {
        let n = self.recorded() as f64;
        if n == 0.0 {
            return None;
        }
        let mean = self
            .counts
            .iter()
            .map(|(&t, &c)| t as f64 * c as f64)
            .sum::<f64>()
            / n;
        let var = self
            .counts
            .iter()
            .map(|(&t, &c)| (t as f64 - mean).powi(2) * c as f64)
            .sum::<f64>()
            / n;
        Some((mean, var.sqrt()))
    }

    /// `tick,count` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tick,count")?;
        for (t, c) in &self.counts {
            writeln!(out, "{t},{c}")?;
        }
        Ok(())
    }
}
