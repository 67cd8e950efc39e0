//! Enumeration of `(N, m)` configurations for an output width, with exact
//! cost accounting and the reference parameter table.

use std::fmt::Write as _;
use std::io::Write;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::analytics::convergence_report;
use crate::config::{RpssConfig, BYTE_WIDTHS, MAX_ARRAY_SIZE};
use crate::error::{Result, RpssError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanRow {
    pub bits: u32,
    pub modulus: u64,
    pub array_size: usize,
    pub successes: u32,
    pub factorial: u64,
    /// `M = m N!`
    pub expected_trials: u128,
    pub rho_n: f64,
    pub rho_n_pow_m: f64,
    /// `((R-1)/R) rho_N^m`
    pub bound: f64,
    /// `m N! N`
    pub cycle_cost: u128,
    /// `(8/n) m N! N`
    pub byte_cost: u128,
    /// Smallest qualifying `m` for this `N`.
    pub minimal_m: bool,
}

impl PlanRow {
    pub fn for_config(cfg: &RpssConfig) -> Result<Self> {
        let bits = cfg.output_bits().ok_or_else(|| {
            RpssError::InvalidConfig(format!(
                "modulus {} is not a byte-packing width",
                cfg.modulus()
            ))
        })?;
        let report = convergence_report(cfg, None)?;
        Ok(PlanRow {
            bits,
            modulus: cfg.modulus(),
            array_size: cfg.array_size(),
            successes: cfg.successes(),
            factorial: cfg.factorial(),
            expected_trials: cfg.expected_trials(),
            rho_n: report.rho_n,
            rho_n_pow_m: report.rho_n_pow_m(),
            bound: report.bound_n,
            cycle_cost: cfg.cycle_cost(),
            byte_cost: cfg.byte_cost().expect("byte width checked above"),
            minimal_m: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRequest {
    pub bits: u32,
    pub threshold: f64,
    pub array_sizes: RangeInclusive<usize>,
    pub successes: RangeInclusive<u32>,
}

/// Every `(N, m)` within bounds with `rho_N^m < threshold`, cheapest first.
pub fn plan(req: &PlanRequest) -> Result<Vec<PlanRow>> {
    if !BYTE_WIDTHS.contains(&req.bits) {
        return Err(RpssError::InvalidConfig(format!(
            "output width must be one of {BYTE_WIDTHS:?}, got {}",
            req.bits
        )));
    }
    if !(req.threshold > 0.0 && req.threshold <= 1.0) {
        return Err(RpssError::Domain(format!(
            "threshold must lie in (0, 1], got {}",
            req.threshold
        )));
    }
    let n_lo = (*req.array_sizes.start()).max(2);
    let n_hi = (*req.array_sizes.end()).min(MAX_ARRAY_SIZE);
    let m_lo = (*req.successes.start()).max(1);
    let m_hi = *req.successes.end();

    let mut rows = Vec::new();
    for n in n_lo..=n_hi {
        let mut first = true;
        for m in m_lo..=m_hi {
            let cfg = RpssConfig::with_bits(n, m, req.bits)?;
            let mut row = PlanRow::for_config(&cfg)?;
            if row.rho_n_pow_m < req.threshold {
                row.minimal_m = first;
                first = false;
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return Err(RpssError::Domain(format!(
            "no configuration with N in {n_lo}..={n_hi}, m in {m_lo}..={m_hi} reaches rho_N^m < {}",
            req.threshold
        )));
    }
    rows.sort_by(|a, b| {
        (a.byte_cost, a.array_size, a.successes).cmp(&(b.byte_cost, b.array_size, b.successes))
    });
    Ok(rows)
}

/// A row of the published parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub bits: u32,
    pub array_size: usize,
    pub successes: u32,
    /// The `rho_N^m` value as published.
    pub reported_rho_pow_m: f64,
}

pub const REFERENCE_TABLE: [ReferenceRow; 7] = [
    ReferenceRow {
        bits: 1,
        array_size: 2,
        successes: 12,
        reported_rho_pow_m: 0.0003,
    },
    ReferenceRow {
        bits: 1,
        array_size: 3,
        successes: 3,
        reported_rho_pow_m: 0.010,
    },
    ReferenceRow {
        bits: 2,
        array_size: 3,
        successes: 5,
        reported_rho_pow_m: 0.004,
    },
    ReferenceRow {
        bits: 2,
        array_size: 4,
        successes: 2,
        reported_rho_pow_m: 0.010,
    },
    ReferenceRow {
        bits: 4,
        array_size: 4,
        successes: 4,
        reported_rho_pow_m: 0.001,
    },
    ReferenceRow {
        bits: 4,
        array_size: 5,
        successes: 2,
        reported_rho_pow_m: 0.006,
    },
    ReferenceRow {
        bits: 8,
        array_size: 5,
        successes: 5,
        reported_rho_pow_m: 0.001,
    },
];

/// Threshold the reference rows are checked against.
pub const REFERENCE_THRESHOLD: f64 = 0.011;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceComparison {
    pub row: PlanRow,
    pub reported_rho_pow_m: f64,
    /// Recomputed minus reported. Informational.
    pub diff: f64,
    pub below_threshold: bool,
    pub note: Option<String>,
}

/// The reference grid recomputed from the convergence factor, beside the
/// published column.
pub fn reference_comparison() -> Result<Vec<ReferenceComparison>> {
    REFERENCE_TABLE
        .iter()
        .map(|r| {
            let cfg = RpssConfig::with_bits(r.array_size, r.successes, r.bits)?;
            let row = PlanRow::for_config(&cfg)?;
            let below_threshold = row.rho_n_pow_m < REFERENCE_THRESHOLD;
            let note = (!below_threshold).then(|| {
                format!(
                    "recomputed rho_N^m = {:.3e} is not below {REFERENCE_THRESHOLD}",
                    row.rho_n_pow_m
                )
            });
            Ok(ReferenceComparison {
                diff: row.rho_n_pow_m - r.reported_rho_pow_m,
                reported_rho_pow_m: r.reported_rho_pow_m,
                row,
                below_threshold,
                note,
            })
        })
        .collect()
}

const CSV_HEADER: &str = "n,R,N,m,N!,M,rho_N^m,bound,C_cycle,C_byte,minimal_m";

fn csv_fields(r: &PlanRow) -> String {
    format!(
        "{},{},{},{},{},{},{:.6e},{:.6e},{},{},{}",
        r.bits,
        r.modulus,
        r.array_size,
        r.successes,
        r.factorial,
        r.expected_trials,
        r.rho_n_pow_m,
        r.bound,
        r.cycle_cost,
        r.byte_cost,
        r.minimal_m
    )
}

pub fn write_plan_csv<W: Write>(rows: &[PlanRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", csv_fields(r))?;
    }
    Ok(())
}

pub fn write_reference_csv<W: Write>(rows: &[ReferenceComparison], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER},reported_rho_N^m,diff,below_threshold")?;
    for c in rows {
        writeln!(
            out,
            "{},{},{:.6e},{}",
            csv_fields(&c.row),
            c.reported_rho_pow_m,
            c.diff,
            c.below_threshold
        )?;
    }
    Ok(())
}

fn table_header() -> String {
    format!(
        "{:>2} {:>5} {:>3} {:>3} {:>8} {:>9} {:>11} {:>11} {:>11} {:>11} {:>4}",
        "n", "R", "N", "m", "N!", "M", "rho_N^m", "bound", "C_cycle", "C_byte", "min"
    )
}

fn table_fields(r: &PlanRow) -> String {
    format!(
        "{:>2} {:>5} {:>3} {:>3} {:>8} {:>9} {:>11.3e} {:>11.3e} {:>11} {:>11} {:>4}",
        r.bits,
        r.modulus,
        r.array_size,
        r.successes,
        r.factorial,
        r.expected_trials,
        r.rho_n_pow_m,
        r.bound,
        r.cycle_cost,
        r.byte_cost,
        if r.minimal_m { "*" } else { "" }
    )
}

pub fn format_plan_table(rows: &[PlanRow]) -> String {
    let mut s = table_header();
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", table_fields(r));
    }
    s
}

pub fn format_reference_table(rows: &[ReferenceComparison]) -> String {
    let mut s = format!("{} {:>10} {:>11}\n", table_header(), "reported", "diff");
    for c in rows {
        let _ = writeln!(
            s,
            "{} {:>10} {:>11.3e}",
            table_fields(&c.row),
            c.reported_rho_pow_m,
            c.diff
        );
        if let Some(note) = &c.note {
            let _ = writeln!(s, "   note: {note}");
        }
    }
    s
}
