//! Entropy purification: reduce each cycle's observables modulo `R`, pack the
//! residues into bytes and feed the elapsed ticks back into the engine seed.

use serde::{Deserialize, Serialize};

use crate::config::{RpssConfig, BYTE_WIDTHS};
use crate::engine::{CycleSample, SortingEngine};
use crate::error::{Result, RpssError};
use crate::rng::SeededRng;
use crate::timer::TimerSource;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// `(n_p mod R, t_ticks mod R)`.
pub fn reduce(sample: &CycleSample, modulus: u64) -> (u64, u64) {
    (sample.n_p % modulus, sample.t_ticks % modulus)
}

/// Mixing step `s_{k+1} = h(s_k, eta_k)`.
///
/// `eta` is spread by the golden-ratio multiplier, xored into the state and
/// passed through the 64-bit multiply-xorshift finalizer.
pub fn reseed(state: u64, eta: u64) -> u64 {
    let mut z = state ^ eta.wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_width(bits: u32) -> Result<()> {
    if BYTE_WIDTHS.contains(&bits) {
        Ok(())
    } else {
        Err(RpssError::InvalidConfig(format!(
            "residue width must be one of {BYTE_WIDTHS:?}, got {bits}"
        )))
    }
}

/// Packs `8/n` consecutive `n`-bit residues per byte, first residue in the
/// most significant position.
#[derive(Debug, Clone)]
pub struct ByteAssembler {
    bits: u32,
    acc: u8,
    filled: u32,
}

impl ByteAssembler {
    pub fn new(bits: u32) -> Result<Self> {
        check_width(bits)?;
        Ok(ByteAssembler {
            bits,
            acc: 0,
            filled: 0,
        })
    }

    /// Adds one residue; returns a byte when one completes.
    pub fn push(&mut self, residue: u64) -> Option<u8> {
        let mask = ((1u16 << self.bits) - 1) as u8;
        self.acc = ((self.acc as u16) << self.bits) as u8 | (residue as u8 & mask);
        self.filled += self.bits;
        if self.filled == 8 {
            let byte = self.acc;
            self.acc = 0;
            self.filled = 0;
            Some(byte)
        } else {
            None
        }
    }

    /// Residues waiting for a complete byte.
    pub fn pending(&self) -> u32 {
        self.filled / self.bits
    }
}

/// Packs a residue stream; an incomplete trailing group is dropped.
pub fn assemble_bytes(residues: &[u64], bits: u32) -> Result<Vec<u8>> {
    let mut asm = ByteAssembler::new(bits)?;
    Ok(residues.iter().filter_map(|&r| asm.push(r)).collect())
}

/// Inverse of [`assemble_bytes`] on complete groups.
pub fn disassemble_bytes(bytes: &[u8], bits: u32) -> Result<Vec<u64>> {
    check_width(bits)?;
    let per_byte = 8 / bits;
    let mask = (1u16 << bits) - 1;
    Ok(bytes
        .iter()
        .flat_map(|&b| {
            (0..per_byte)
                .rev()
                .map(move |i| ((b as u16 >> (i * bits)) & mask) as u64)
        })
        .collect())
}

/// Which observable feeds the output stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputSource {
    /// `N_p mod R`, the generator output.
    #[default]
    PermutationCount,
    /// `T mod R`, a diagnostic probe of the timing channel.
    ElapsedTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    /// Current feedback seed `s_k`.
    pub seed: u64,
    pub cycle_index: u64,
    pub cfg: RpssConfig,
    pub source: OutputSource,
    pub reseed_enabled: bool,
}

impl PipelineState {
    pub fn new(cfg: RpssConfig, seed: u64) -> Self {
        PipelineState {
            seed,
            cycle_index: 0,
            cfg,
            source: OutputSource::PermutationCount,
            reseed_enabled: true,
        }
    }
}

/// Both residue streams of one run, for the timing-probe analysis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProbeOutput {
    pub count_bytes: Vec<u8>,
    pub time_bytes: Vec<u8>,
}

/// A running generator: engine, engine rng, timer and feedback state.
///
/// After every cycle with reseeding on, `s_{k+1} = reseed(s_k, t_ticks)`
/// and the engine rng is rekeyed from `s_{k+1}`.
#[derive(Debug, Clone)]
pub struct Pipeline<T> {
    state: PipelineState,
    engine: SortingEngine,
    rng: SeededRng,
    timer: T,
    bits: u32,
}

impl<T: TimerSource> Pipeline<T> {
    pub fn new(state: PipelineState, engine_seed: u64, timer: T) -> Result<Self> {
        let bits = state.cfg.output_bits().ok_or_else(|| {
            RpssError::InvalidConfig(format!(
                "modulus {} is not 2^n with n in {BYTE_WIDTHS:?}",
                state.cfg.modulus()
            ))
        })?;
        Ok(Pipeline {
            engine: SortingEngine::new(state.cfg),
            rng: SeededRng::new(engine_seed),
            state,
            timer,
            bits,
        })
    }

    pub fn with_engine(mut self, engine: SortingEngine) -> Self {
        self.engine = engine;
        self
    }

    pub fn state(&self) -> &PipelineState {
        &self.state
    }

    pub fn timer(&self) -> &T {
        &self.timer
    }

    pub fn timer_mut(&mut self) -> &mut T {
        &mut self.timer
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Runs one cycle and applies the feedback step. Returns the sample and
    /// its `(count, time)` residues.
    pub fn next_cycle(&mut self) -> Result<(CycleSample, (u64, u64))> {
        let sample = self
            .engine
            .run_cycle(&mut self.rng, &mut self.timer, false)?;
        let residues = reduce(&sample, self.state.cfg.modulus());
        if self.state.reseed_enabled {
            self.state.seed = reseed(self.state.seed, sample.t_ticks);
            self.rng.reseed(self.state.seed);
        }
        self.state.cycle_index += 1;
        Ok((sample, residues))
    }

    /// Exactly `byte_count` bytes from the selected source.
    pub fn generate(&mut self, byte_count: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(byte_count);
        let mut asm = ByteAssembler::new(self.bits)?;
        while out.len() < byte_count {
            let (_, (n, t)) = self.next_cycle()?;
            let residue = match self.state.source {
                OutputSource::PermutationCount => n,
                OutputSource::ElapsedTime => t,
            };
            out.extend(asm.push(residue));
        }
        Ok(out)
    }

    /// `byte_count` bytes of each residue stream from the same cycles.
    pub fn generate_with_probe(&mut self, byte_count: usize) -> Result<ProbeOutput> {
        let mut out = ProbeOutput {
            count_bytes: Vec::with_capacity(byte_count),
            time_bytes: Vec::with_capacity(byte_count),
        };
        let mut count_asm = ByteAssembler::new(self.bits)?;
        let mut time_asm = ByteAssembler::new(self.bits)?;
        while out.count_bytes.len() < byte_count {
            let (_, (n, t)) = self.next_cycle()?;
            out.count_bytes.extend(count_asm.push(n));
            out.time_bytes.extend(time_asm.push(t));
        }
        Ok(out)
    }
}
