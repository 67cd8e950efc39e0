//! Tick sources bracketing each permutation trial.

use std::time::Instant;

use crate::jitter::JitterModel;
use crate::rng::SeededRng;

/// A counter read before and after each trial body.
pub trait TimerSource {
    fn tick_before(&mut self) -> u64;
    fn tick_after(&mut self) -> u64;
}

/// Elapsed ticks between a before/after pair, clamped at zero.
#[inline]
pub fn elapsed(before: u64, after: u64) -> u64 {
    after.saturating_sub(before)
}

impl<T: TimerSource + ?Sized> TimerSource for &mut T {
    fn tick_before(&mut self) -> u64 {
        (**self).tick_before()
    }

    fn tick_after(&mut self) -> u64 {
        (**self).tick_after()
    }
}

/// Virtual clock advanced by draws from a [`JitterModel`].
///
/// The `k`-th delta depends only on the timer seed and `k`, so runs are
/// reproducible. The model can be swapped mid-run to emulate a change in
/// machine load.
#[derive(Debug, Clone)]
pub struct SimulatedTimer {
    model: JitterModel,
    rng: SeededRng,
    clock: u64,
    draws: u64,
}

impl SimulatedTimer {
    pub fn new(model: JitterModel, seed: u64) -> Self {
        SimulatedTimer {
            model,
            rng: SeededRng::new(seed),
            clock: 0,
            draws: 0,
        }
    }

    pub fn model(&self) -> &JitterModel {
        &self.model
    }

    pub fn set_model(&mut self, model: JitterModel) {
        self.model = model;
    }

    /// Deltas produced so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

impl TimerSource for SimulatedTimer {
    fn tick_before(&mut self) -> u64 {
        self.clock
    }

    fn tick_after(&mut self) -> u64 {
        let step = self.model.sample(&mut self.rng);
        self.draws += 1;
        self.clock = self.clock.wrapping_add(step);
        self.clock
    }
}

/// The platform's highest-resolution counter: the TSC on x86_64, otherwise
/// monotonic nanoseconds. One tick is one raw increment.
#[derive(Debug, Clone)]
pub struct RealTimer {
    #[cfg_attr(target_arch = "x86_64", allow(dead_code))]
    origin: Instant,
}

impl Default for RealTimer {
    fn default() -> Self {
        RealTimer {
            origin: Instant::now(),
        }
    }
}

impl RealTimer {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn read(&self) -> u64 {
        #[cfg(target_arch = "x86_64")]
        {
            // SAFETY: rdtsc is available on every x86_64 processor.
            unsafe { core::arch::x86_64::_rdtsc() }
        }
        #[cfg(not(target_arch = "x86_64"))]
        {
            self.origin.elapsed().as_nanos() as u64
        }
    }
}

impl TimerSource for RealTimer {
    #[inline]
    fn tick_before(&mut self) -> u64 {
        self.read()
    }

    #[inline]
    fn tick_after(&mut self) -> u64 {
        self.read()
    }
}

/// Fixed tick per trial. Handy in tests.
#[derive(Debug, Clone, Copy)]
pub struct ConstantTimer {
    step: u64,
    clock: u64,
}

impl ConstantTimer {
    pub fn new(step: u64) -> Self {
        ConstantTimer { step, clock: 0 }
    }
}

impl TimerSource for ConstantTimer {
    fn tick_before(&mut self) -> u64 {
        self.clock
    }

    fn tick_after(&mut self) -> u64 {
        self.clock += self.step;
        self.clock
    }
}
