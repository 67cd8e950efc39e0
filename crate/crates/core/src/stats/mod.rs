//! Measurement of symbol streams and theory-vs-sample moment comparison.
//!
//! Entropies are plug-in estimates from empirical frequencies; no bias
//! correction is applied. `min_entropy_bits` is likewise the plug-in
//! `-log2 max f_i`, not an SP 800-90B estimate.

mod special;

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::analytics::MomentSet;
use crate::error::{Result, RpssError};

pub use special::{chi_square_p_value, gamma_p, gamma_q, ln_gamma};

/// Streaming central-moment accumulator (one-pass update of `M2..M4`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Unbiased variance and bias-corrected `G1`, `G2`. Shape entries are NaN
    /// when the sample is too small or constant.
    pub fn finish(&self) -> SampleMoments {
        let n = self.n as f64;
        let nan = f64::NAN;
        if self.n == 0 {
            return SampleMoments {
                count: 0,
                mean: nan,
                variance: nan,
                skewness: nan,
                excess_kurtosis: nan,
            };
        }
        let variance = if self.n > 1 { self.m2 / (n - 1.0) } else { nan };
        let (m2, m3, m4) = (self.m2 / n, self.m3 / n, self.m4 / n);
        let skewness = if self.n > 2 && m2 > 0.0 {
            (n * (n - 1.0)).sqrt() / (n - 2.0) * m3 / m2.powf(1.5)
        } else {
            nan
        };
        let excess_kurtosis = if self.n > 3 && m2 > 0.0 {
            let g2 = m4 / (m2 * m2) - 3.0;
            (n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * g2 + 6.0)
        } else {
            nan
        };
        SampleMoments {
            count: self.n,
            mean: self.mean,
            variance,
            skewness,
            excess_kurtosis,
        }
    }
}

impl Extend<f64> for MomentAccumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMoments {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl SampleMoments {
    /// Moment estimates of a finite sample.
    pub fn of<I: IntoIterator<Item = f64>>(samples: I) -> Self {
        let mut acc = MomentAccumulator::new();
        acc.extend(samples);
        acc.finish()
    }

    /// The same four quantities read off a theoretical moment set.
    pub fn from_theory(theory: &MomentSet) -> Self {
        SampleMoments {
            count: 0,
            mean: theory.mean,
            variance: theory.variance,
            skewness: theory.skewness,
            excess_kurtosis: theory.excess_kurtosis,
        }
    }
}

/// Relative tolerances used to flag each compared moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentTolerances {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Default for MomentTolerances {
    fn default() -> Self {
        MomentTolerances {
            mean: 0.001,
            variance: 0.01,
            skewness: 0.02,
            excess_kurtosis: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub name: &'static str,
    pub empirical: f64,
    pub theory: f64,
    /// `|empirical - theory| / |theory|`; absolute difference when theory is 0.
    pub relative_diff: f64,
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentComparison {
    pub sample_count: u64,
    pub rows: Vec<ComparisonRow>,
}

impl MomentComparison {
    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| r.within)
    }

    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for MomentComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>16} {:>16} {:>12} {:>10}  ok",
            "moment", "empirical", "theory", "rel.diff", "tol"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<16} {:>16.6} {:>16.6} {:>12.3e} {:>10.3e}  {}",
                r.name,
                r.empirical,
                r.theory,
                r.relative_diff,
                r.tolerance,
                if r.within { "yes" } else { "NO" }
            )?;
        }
        Ok(())
    }
}

fn relative_diff(empirical: f64, theory: f64) -> f64 {
    let diff = (empirical - theory).abs();
    if theory == 0.0 {
        diff
    } else {
        diff / theory.abs()
    }
}

/// Side-by-side sample and theoretical moments with per-row flags.
pub fn compare_moments(
    empirical: &SampleMoments,
    theory: &MomentSet,
    tol: &MomentTolerances,
) -> MomentComparison {
    let rows = [
        ("mean", empirical.mean, theory.mean, tol.mean),
        (
            "variance",
            empirical.variance,
            theory.variance,
            tol.variance,
        ),
        (
            "skewness",
            empirical.skewness,
            theory.skewness,
            tol.skewness,
        ),
        (
            "excess_kurtosis",
            empirical.excess_kurtosis,
            theory.excess_kurtosis,
            tol.excess_kurtosis,
        ),
    ]
    .into_iter()
    .map(|(name, e, t, tolerance)| {
        let relative_diff = relative_diff(e, t);
        ComparisonRow {
            name,
            empirical: e,
            theory: t,
            relative_diff,
            tolerance,
            within: relative_diff <= tolerance,
        }
    })
    .collect();
    MomentComparison {
        sample_count: empirical.count,
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub sample_count: u64,
    pub alphabet: usize,
    pub histogram: Vec<u64>,
    pub shannon_entropy_bits: f64,
    /// Plug-in `-log2 max f_i`.
    pub min_entropy_bits: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    /// `max_i |f_i - 1/A|`.
    pub max_deviation: f64,
    /// `max_deviation` relative to `1/A`, in percent.
    pub max_deviation_percent: f64,
    pub moments: SampleMoments,
    pub serial_correlation_lag1: f64,
    pub warnings: Vec<String>,
}

/// Full report on a stream of symbols in `[0, alphabet)`.
pub fn analyze(symbols: &[u64], alphabet: usize) -> Result<StatsReport> {
    if symbols.is_empty() {
        return Err(RpssError::Empty);
    }
    if alphabet < 2 {
        return Err(RpssError::Domain(format!(
            "alphabet must have at least 2 symbols, got {alphabet}"
        )));
    }
    let mut histogram = vec![0u64; alphabet];
    let mut acc = MomentAccumulator::new();
    for &s in symbols {
        let slot = histogram.get_mut(s as usize).ok_or_else(|| {
            RpssError::Domain(format!("symbol {s} outside alphabet of size {alphabet}"))
        })?;
        *slot += 1;
        acc.push(s as f64);
    }
    let mut report = report_from_histogram(histogram)?;
    report.moments = acc.finish();
    report.serial_correlation_lag1 = serial_correlation(symbols, report.moments.mean);
    Ok(report)
}

/// Histogram-derived fields only; moments and serial correlation are NaN.
pub fn report_from_histogram(histogram: Vec<u64>) -> Result<StatsReport> {
    let alphabet = histogram.len();
    let n: u64 = histogram.iter().sum();
    if n == 0 {
        return Err(RpssError::Empty);
    }
    if alphabet < 2 {
        return Err(RpssError::Domain(
            "alphabet must have at least 2 symbols".into(),
        ));
    }
    let nf = n as f64;
    let a = alphabet as f64;
    let shannon = -histogram
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / nf;
            f * f.log2()
        })
        .sum::<f64>();
    let max_count = *histogram.iter().max().expect("nonempty histogram");
    let expected = nf / a;
    let chi_square = histogram
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let dof = alphabet as u64 - 1;
    let max_deviation = histogram
        .iter()
        .map(|&c| (c as f64 / nf - 1.0 / a).abs())
        .fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if n < 10 * alphabet as u64 {
        warnings.push(format!(
            "{n} samples for {alphabet} symbols; at least {} recommended",
            10 * alphabet
        ));
    }
    Ok(StatsReport {
        sample_count: n,
        alphabet,
        shannon_entropy_bits: shannon.clamp(0.0, a.log2()),
        min_entropy_bits: -(max_count as f64 / nf).log2().min(0.0),
        chi_square,
        degrees_of_freedom: dof,
        p_value: chi_square_p_value(chi_square, dof),
        max_deviation,
        max_deviation_percent: 100.0 * max_deviation * a,
        moments: MomentAccumulator::new().finish(),
        serial_correlation_lag1: f64::NAN,
        histogram,
        warnings,
    })
}

/// Lag-1 autocorrelation of symbol values around `mean`.
pub fn serial_correlation(symbols: &[u64], mean: f64) -> f64 {
    if symbols.len() < 2 {
        return f64::NAN;
    }
    let denom: f64 = symbols.iter().map(|&s| (s as f64 - mean).powi(2)).sum();
    let num: f64 = symbols
        .windows(2)
        .map(|w| (w[0] as f64 - mean) * (w[1] as f64 - mean))
        .sum();
    num / denom
}

impl StatsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `symbol,count` rows.
    pub fn write_histogram_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "symbol,count")?;
        for (s, c) in self.histogram.iter().enumerate() {
            writeln!(out, "{s},{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 12] = [
            ("samples", self.sample_count.to_string()),
            ("alphabet", self.alphabet.to_string()),
            (
                "shannon entropy",
                format!("{:.6} bits", self.shannon_entropy_bits),
            ),
            (
                "min-entropy (plug-in)",
                format!("{:.6} bits", self.min_entropy_bits),
            ),
            (
                "chi-square",
                format!("{:.4} (dof {})", self.chi_square, self.degrees_of_freedom),
            ),
            ("p-value", format!("{:.6}", self.p_value)),
            (
                "max deviation",
                format!(
                    "{:.3e} ({:.4}%)",
                    self.max_deviation, self.max_deviation_percent
                ),
            ),
            ("mean", format!("{:.6}", self.moments.mean)),
            ("variance", format!("{:.6}", self.moments.variance)),
            ("skewness", format!("{:.6}", self.moments.skewness)),
            (
                "excess kurtosis",
                format!("{:.6}", self.moments.excess_kurtosis),
            ),
            (
                "serial corr. lag 1",
                format!("{:.6}", self.serial_correlation_lag1),
            ),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<22} {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Kolmogorov-Smirnov distance between a sample and Uniform(0, 1).
pub fn ks_uniform_statistic(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i as f64 + 1.0) / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
