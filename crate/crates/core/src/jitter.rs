//! Discrete per-trial runtime laws on integer ticks, their file format and the
//! shipped presets.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RpssError};
use crate::rng::{Bound, EngineRng};

const SUM_TOLERANCE: f64 = 1e-12;
const UNIT_BITS: u64 = 1 << 53;
const UNIT_SCALE: f64 = 1.0 / UNIT_BITS as f64;

/// Finite distribution of the runtime of one permutation trial, in ticks.
///
/// Support points with zero mass are dropped. Models built from frequency
/// counts keep the integer counts and sample from them exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct JitterModel {
    ticks: Vec<u64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    counts: Option<Counts>,
    mean: f64,
    variance: f64,
    third_central: f64,
    fourth_central: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Counts {
    per_tick: Vec<u64>,
    cumulative: Vec<u64>,
    total: u64,
    draw: Bound,
}

/// On-disk form: `{"ticks": [...], "probs": [...]}` or
/// `{"ticks": [...], "counts": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JitterFile {
    Counts { ticks: Vec<u64>, counts: Vec<u64> },
    Probs { ticks: Vec<u64>, probs: Vec<f64> },
}

impl JitterModel {
    /// Build from `(tick, probability)` pairs.
    pub fn from_probs(ticks: &[u64], probs: &[f64]) -> Result<Self> {
        if ticks.len() != probs.len() {
            return Err(RpssError::InvalidJitter(format!(
                "{} ticks but {} probabilities",
                ticks.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(RpssError::InvalidJitter(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(RpssError::InvalidJitter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        check_distinct(ticks)?;
        let mut pairs: Vec<(u64, f64)> = ticks
            .iter()
            .copied()
            .zip(probs.iter().copied())
            .filter(|&(_, p)| p > 0.0)
            .collect();
        pairs.sort_by_key(|&(t, _)| t);
        Ok(Self::assemble(pairs, None))
    }

    /// Normalize a frequency table of `(tick, count)` rows.
    pub fn from_table_counts(rows: &[(u64, u64)]) -> Result<Self> {
        let ticks: Vec<u64> = rows.iter().map(|r| r.0).collect();
        check_distinct(&ticks)?;
        let total: u64 = rows.iter().map(|r| r.1).sum();
        if total == 0 {
            return Err(RpssError::InvalidJitter("all counts are zero".into()));
        }
        let mut rows: Vec<(u64, u64)> = rows.iter().copied().filter(|r| r.1 > 0).collect();
        rows.sort_by_key(|r| r.0);
        let pairs = rows
            .iter()
            .map(|&(t, c)| (t, c as f64 / total as f64))
            .collect();
        let per_tick: Vec<u64> = rows.iter().map(|r| r.1).collect();
        let cumulative = per_tick
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Ok(Self::assemble(
            pairs,
            Some(Counts {
                per_tick,
                cumulative,
                total,
                draw: Bound::new(total),
            }),
        ))
    }

    /// A row of frequencies indexed by tick value `0, 1, 2, ...`.
    pub fn from_frequency_row(counts: &[u64]) -> Result<Self> {
        let rows: Vec<(u64, u64)> = counts
            .iter()
            .enumerate()
            .map(|(t, &c)| (t as u64, c))
            .collect();
        Self::from_table_counts(&rows)
    }

    /// Point mass at `tick`.
    pub fn degenerate(tick: u64) -> Self {
        Self::from_table_counts(&[(tick, 1)]).expect("single positive count")
    }

    fn assemble(pairs: Vec<(u64, f64)>, counts: Option<Counts>) -> Self {
        let ticks: Vec<u64> = pairs.iter().map(|p| p.0).collect();
        let probs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let cumulative = match &counts {
            Some(c) => c
                .cumulative
                .iter()
                .map(|&k| k as f64 / c.total as f64)
                .collect(),
            None => probs
                .iter()
                .scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect(),
        };
        let mean: f64 = pairs.iter().map(|&(t, p)| t as f64 * p).sum();
        let central = |k: i32| -> f64 {
            pairs
                .iter()
                .map(|&(t, p)| (t as f64 - mean).powi(k) * p)
                .sum()
        };
        JitterModel {
            variance: central(2),
            third_central: central(3),
            fourth_central: central(4),
            ticks,
            probs,
            cumulative,
            counts,
            mean,
        }
    }

    pub fn from_file(file: JitterFile) -> Result<Self> {
        match file {
            JitterFile::Probs { ticks, probs } => Self::from_probs(&ticks, &probs),
            JitterFile::Counts { ticks, counts } => {
                if ticks.len() != counts.len() {
                    return Err(RpssError::InvalidJitter(format!(
                        "{} ticks but {} counts",
                        ticks.len(),
                        counts.len()
                    )));
                }
                let rows: Vec<(u64, u64)> = ticks.into_iter().zip(counts).collect();
                Self::from_table_counts(&rows)
            }
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> JitterFile {
        match &self.counts {
            Some(c) => JitterFile::Counts {
                ticks: self.ticks.clone(),
                counts: c.per_tick.clone(),
            },
            None => JitterFile::Probs {
                ticks: self.ticks.clone(),
                probs: self.probs.clone(),
            },
        }
    }

    /// Support points with positive mass, ascending.
    pub fn support(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.ticks.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn ticks(&self) -> &[u64] {
        &self.ticks
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `tick` (zero off the support).
    pub fn prob_of(&self, tick: u64) -> f64 {
        self.ticks
            .binary_search(&tick)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    /// Total sample count when built from frequencies.
    pub fn sample_size(&self) -> Option<u64> {
        self.counts.as_ref().map(|c| c.total)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Third cumulant, equal to the third central moment.
    pub fn cumulant3(&self) -> f64 {
        self.third_central
    }

    /// Fourth cumulant, `mu_4 - 3 sigma^4`.
    pub fn cumulant4(&self) -> f64 {
        self.fourth_central - 3.0 * self.variance * self.variance
    }

    pub fn max_tick(&self) -> u64 {
        *self.ticks.last().expect("support is never empty")
    }

    /// Characteristic function `E[exp(i omega X)]`.
    pub fn cf(&self, omega: f64) -> Complex64 {
        self.support()
            .map(|(t, p)| Complex64::from_polar(p, omega * t as f64))
            .sum()
    }

    /// Law of `X mod modulus` as a dense vector.
    pub fn residues(&self, modulus: u64) -> Vec<f64> {
        let mut out = vec![0.0; modulus as usize];
        for (t, p) in self.support() {
            out[(t % modulus) as usize] += p;
        }
        out
    }

    /// Same law translated by `shift` ticks.
    pub fn shifted(&self, shift: u64) -> Self {
        let pairs = self.support().map(|(t, p)| (t + shift, p)).collect();
        Self::assemble(pairs, self.counts.clone())
    }

    /// Same law translated by `-shift` ticks. Fails if any tick would go
    /// negative.
    pub fn shifted_down(&self, shift: u64) -> Result<Self> {
        let lowest = self.ticks[0];
        if shift > lowest {
            return Err(RpssError::InvalidJitter(format!(
                "cannot shift support starting at {lowest} down by {shift}"
            )));
        }
        let pairs = self.support().map(|(t, p)| (t - shift, p)).collect();
        Ok(Self::assemble(pairs, self.counts.clone()))
    }

    /// Inverse-CDF sample using one bounded draw.
    ///
    /// Count-backed models draw in `[0, total)` and are exact; probability
    /// models draw a 53-bit uniform.
    pub fn sample<R: EngineRng + ?Sized>(&self, rng: &mut R) -> u64 {
        let idx = match &self.counts {
            Some(c) => {
                let w = rng.draw(&c.draw);
                c.cumulative.partition_point(|&k| k <= w)
            }
            None => {
                let u = (rng.next_u64() >> 11) as f64 * UNIT_SCALE;
                self.cumulative.partition_point(|&k| k <= u)
            }
        };
        self.ticks[idx.min(self.ticks.len() - 1)]
    }
}

fn check_distinct(ticks: &[u64]) -> Result<()> {
    if ticks.is_empty() {
        return Err(RpssError::InvalidJitter("empty support".into()));
    }
    let mut sorted = ticks.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(RpssError::InvalidJitter(format!(
            "tick {} listed twice",
            w[0]
        )));
    }
    Ok(())
}

/// A model addressable by name from the command line.
#[derive(Debug, Clone)]
pub struct NamedJitterPreset {
    pub name: &'static str,
    pub model: JitterModel,
    pub provenance: &'static str,
}

struct PresetSpec {
    name: &'static str,
    rows: &'static [(u64, u64)],
    provenance: &'static str,
}

const PRESETS: &[PresetSpec] = &[
    PresetSpec {
        name: "unit",
        rows: &[(1, 1)],
        provenance: "every trial costs one tick; elapsed time equals the trial count",
    },
    PresetSpec {
        name: "two-point",
        rows: &[(1, 3), (2, 2)],
        provenance: "X in {1, 2} with probabilities {0.6, 0.4}",
    },
    PresetSpec {
        name: "heavy-tail",
        rows: &[(0, 500), (1, 9000), (2, 400), (3, 99), (500, 1)],
        provenance: "low-tick mode with a 1e-4 chance of a 500-tick outlier",
    },
    PresetSpec {
        name: "fat-like",
        rows: &[(0, 4000), (1, 5595), (11, 400), (150, 5)],
        provenance:
            "mean ~1.07 ticks; N=4, m=4 elapsed time mean ~103, skew ~1.3, excess kurtosis ~2.9",
    },
    PresetSpec {
        name: "skinny-like",
        rows: &[(0, 6200), (1, 2980), (2, 600), (11, 200), (150, 20)],
        provenance:
            "mean ~0.94 ticks; N=4, m=4 elapsed time mean ~90, skew ~1.9, excess kurtosis ~4.2",
    },
    PresetSpec {
        name: "ultra-skinny-like",
        rows: &[(0, 4400), (1, 5579), (4, 20), (200, 1)],
        provenance:
            "mean ~0.59 ticks; N=4, m=4 elapsed time mean ~56, skew ~2.6, excess kurtosis ~14.7",
    },
    PresetSpec {
        name: "baseline",
        rows: &[
            (1, 1500),
            (2, 4000),
            (3, 3000),
            (4, 1000),
            (6, 400),
            (9, 100),
        ],
        provenance: "quiet-machine law with mean ~2.5 ticks",
    },
    PresetSpec {
        name: "table2-n7-a",
        rows: &[(1, 453), (2, 538), (3, 2), (4, 2), (6, 1), (7, 2)],
        provenance: "measured frequencies, N=7 run 1",
    },
    PresetSpec {
        name: "table2-n7-b",
        rows: &[(1, 490), (2, 502), (3, 4), (4, 2), (7, 1), (8, 1)],
        provenance: "measured frequencies, N=7 run 2",
    },
    PresetSpec {
        name: "table2-n7-d",
        rows: &[
            (2, 11),
            (3, 873),
            (4, 91),
            (5, 12),
            (6, 2),
            (7, 2),
            (8, 3),
            (9, 1),
            (11, 1),
        ],
        provenance: "measured frequencies, N=7 run 4",
    },
    PresetSpec {
        name: "table2-n6-a",
        rows: &[(1, 675), (2, 311), (3, 3), (4, 4), (5, 1), (6, 4), (7, 1)],
        provenance: "measured frequencies, N=6 run 1",
    },
    PresetSpec {
        name: "table2-n6-c",
        rows: &[
            (1, 307),
            (2, 607),
            (3, 23),
            (4, 17),
            (5, 36),
            (6, 2),
            (7, 1),
        ],
        provenance: "measured frequencies, N=6 run 3",
    },
    PresetSpec {
        name: "table2-n5-a",
        rows: &[(1, 853), (2, 137), (3, 5), (4, 1), (5, 1)],
        provenance: "measured frequencies, N=5 run 1",
    },
    PresetSpec {
        name: "table2-n5-b",
        rows: &[
            (1, 506),
            (2, 385),
            (3, 86),
            (4, 6),
            (5, 4),
            (6, 2),
            (7, 3),
            (10, 1),
        ],
        provenance: "measured frequencies, N=5 run 2",
    },
    PresetSpec {
        name: "table2-n4-a",
        rows: &[(0, 42), (1, 946), (2, 8), (3, 2), (4, 1)],
        provenance: "measured frequencies, N=4 run 1",
    },
    PresetSpec {
        name: "table2-n4-c",
        rows: &[(1, 747), (2, 187), (3, 56), (4, 2), (5, 2), (6, 3), (8, 1)],
        provenance: "measured frequencies, N=4 run 3",
    },
];

/// Every shipped preset.
pub fn presets() -> Vec<NamedJitterPreset> {
    PRESETS
        .iter()
        .map(|spec| NamedJitterPreset {
            name: spec.name,
            model: JitterModel::from_table_counts(spec.rows).expect("preset rows are valid"),
            provenance: spec.provenance,
        })
        .collect()
}

pub fn preset(name: &str) -> Result<JitterModel> {
    PRESETS
        .iter()
        .find(|spec| spec.name == name)
        .map(|spec| JitterModel::from_table_counts(spec.rows).expect("preset rows are valid"))
        .ok_or_else(|| RpssError::UnknownPreset(name.to_string()))
}
