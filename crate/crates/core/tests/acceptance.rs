//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any gating criterion fails.
//!
//! Seeds are fixed up front; rerunning produces identical numbers except for
//! the real-timer criterion, which is reported but never gates.

use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use rpss_core::analytics::{
    convergence_report, exact_t_mod, mod_residue_np, mod_residue_t, nb_moments,
};
use rpss_core::engine::{verify_composition, SortingEngine};
use rpss_core::jitter::{preset, JitterModel};
use rpss_core::pipeline::{Pipeline, PipelineState, ProbeOutput};
use rpss_core::planner::{
    format_reference_table, plan, reference_comparison, PlanRequest, REFERENCE_TABLE,
};
use rpss_core::rng::{EngineRng, SeededRng};
use rpss_core::stats::{
    analyze, chi_square_p_value, ks_critical_value, ks_uniform_statistic, SampleMoments,
    StatsReport,
};
use rpss_core::timer::{ConstantTimer, RealTimer, SimulatedTimer};
use rpss_core::RpssConfig;

const ENGINE_SEED: u64 = 0x5EED_0001;
const TIMER_SEED: u64 = 0x5EED_0002;
const FEEDBACK_SEED: u64 = 0x5EED_0003;

const BYTE_STREAM_LEN: usize = 1_000_000;
const BASELINE_JITTER: &str = "table2-n5-a";

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn bytes_report(bytes: &[u8]) -> StatsReport {
    let symbols: Vec<u64> = bytes.iter().map(|&b| b as u64).collect();
    analyze(&symbols, 256).expect("nonempty stream")
}

fn c1_nb_theory() -> Outcome {
    let cfg = RpssConfig::new(4, 4, 16).unwrap();
    let t = nb_moments(&cfg);
    let pass = (t.mean - 96.0).abs() < 1e-9
        && (t.variance - 2208.0).abs() < 1e-9
        && (t.skewness - 1.0002).abs() <= 1e-4
        && (t.excess_kurtosis - 1.5005).abs() <= 1e-4;
    Outcome::new(
        pass,
        format!(
            "mean={:.4} var={:.4} g1={:.6} g2={:.6}",
            t.mean, t.variance, t.skewness, t.excess_kurtosis
        ),
    )
}

fn c2_nb_empirical() -> Outcome {
    let cfg = RpssConfig::new(4, 4, 16).unwrap();
    let mut engine = SortingEngine::new(cfg);
    let mut rng = SeededRng::new(ENGINE_SEED);
    let mut timer = ConstantTimer::new(1);
    let m = SampleMoments::of(
        (0..1_000_000).map(|_| engine.run_cycle(&mut rng, &mut timer, false).unwrap().n_p as f64),
    );
    let pass = (m.mean - 96.0).abs() <= 0.15
        && (m.variance - 2208.0).abs() <= 25.0
        && (m.skewness - 1.00).abs() <= 0.02
        && (m.excess_kurtosis - 1.50).abs() <= 0.10;
    Outcome::new(
        pass,
        format!(
            "1e6 cycles: mean={:.4} var={:.2} g1={:.4} g2={:.4}",
            m.mean, m.variance, m.skewness, m.excess_kurtosis
        ),
    )
}

fn c3_composition_law() -> Outcome {
    let jitters: [(&str, JitterModel); 3] = [
        ("unit", JitterModel::degenerate(1)),
        ("two-point", preset("two-point").unwrap()),
        ("heavy-tail", preset("heavy-tail").unwrap()),
    ];
    let mut worst = (0.0f64, String::new());
    let mut count = 0;
    for n in [2usize, 3, 4] {
        for m in [1u32, 2, 4] {
            for r in [2u64, 8, 16] {
                for (name, jitter) in &jitters {
                    let cfg = RpssConfig::new(n, m, r).unwrap();
                    let fast = mod_residue_t(&cfg, jitter).unwrap();
                    let slow = exact_t_mod(&cfg, jitter, 1e-12).unwrap();
                    let diff = fast.max_abs_diff(&slow.distribution);
                    if diff >= worst.0 {
                        worst = (diff, format!("N={n} m={m} R={r} {name}"));
                    }
                    count += 1;
                }
            }
        }
    }
    Outcome::new(
        worst.0 < 1e-9,
        format!(
            "{count} configs, worst |diff|={:.2e} at {}",
            worst.0, worst.1
        ),
    )
}

fn c4_theorem_bound() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for row in REFERENCE_TABLE {
        let cfg = RpssConfig::with_bits(row.array_size, row.successes, row.bits).unwrap();
        let next = cfg.with_successes(row.successes + 1).unwrap();
        let report = convergence_report(&cfg, None).unwrap();
        let dev = mod_residue_np(&cfg).unwrap().max_deviation;
        let dev_next = mod_residue_np(&next).unwrap().max_deviation;
        let ratio = dev_next / dev;
        // At R = 2 a single mode contributes and the bound holds with
        // equality, so it is compared with a relative float slack.
        let bound_ok = dev <= report.bound_n * (1.0 + 1e-9);
        let decay_ok = ratio <= report.rho_n + 1e-9;
        pass &= bound_ok && decay_ok;
        parts.push(format!(
            "(N={},m={},R={}: dev/bound={:.3} ratio/rho={:.3})",
            row.array_size,
            row.successes,
            cfg.modulus(),
            dev / report.bound_n,
            ratio / report.rho_n
        ));
    }
    Outcome::new(pass, parts.join(" "))
}

fn c5_four_bit_uniformity() -> Outcome {
    let cfg = RpssConfig::with_bits(4, 4, 4).unwrap();
    let timer = SimulatedTimer::new(preset("table2-n4-a").unwrap(), TIMER_SEED);
    let mut pipeline =
        Pipeline::new(PipelineState::new(cfg, FEEDBACK_SEED), ENGINE_SEED, timer).unwrap();
    let residues: Vec<u64> = (0..1_000_000)
        .map(|_| pipeline.next_cycle().unwrap().1 .0)
        .collect();
    let r = analyze(&residues, 16).unwrap();
    let pass =
        r.max_deviation_percent < 1.0 && r.shannon_entropy_bits >= 3.9999 && r.p_value > 0.01;
    Outcome::new(
        pass,
        format!(
            "1e6 cycles: max dev={:.3}% H={:.6} chi2={:.2} p={:.4}",
            r.max_deviation_percent, r.shannon_entropy_bits, r.chi_square, r.p_value
        ),
    )
}

fn byte_pipeline() -> Pipeline<SimulatedTimer> {
    let cfg = RpssConfig::with_bits(5, 5, 8).unwrap();
    let timer = SimulatedTimer::new(preset(BASELINE_JITTER).unwrap(), TIMER_SEED);
    Pipeline::new(PipelineState::new(cfg, FEEDBACK_SEED), ENGINE_SEED, timer).unwrap()
}

fn c6_eight_bit_uniformity(baseline: &ProbeOutput) -> Outcome {
    let r = bytes_report(&baseline.count_bytes);
    let pass = r.shannon_entropy_bits >= 7.999 && r.min_entropy_bits >= 7.9 && r.p_value > 0.001;
    Outcome::new(
        pass,
        format!(
            "1e6 bytes: H={:.6} H_min={:.4} chi2={:.2} p={:.4}",
            r.shannon_entropy_bits, r.min_entropy_bits, r.chi_square, r.p_value
        ),
    )
}

fn c7_perturbation(baseline: &ProbeOutput) -> Outcome {
    let variant = preset(BASELINE_JITTER).unwrap().shifted_down(1).unwrap();
    let mut pipeline = byte_pipeline();
    let mut first = pipeline.generate_with_probe(BYTE_STREAM_LEN / 2).unwrap();
    pipeline.timer_mut().set_model(variant);
    let second = pipeline.generate_with_probe(BYTE_STREAM_LEN / 2).unwrap();
    first.count_bytes.extend(second.count_bytes);
    first.time_bytes.extend(second.time_bytes);

    let t_before = bytes_report(&baseline.time_bytes);
    let t_after = bytes_report(&first.time_bytes);
    let n_after = bytes_report(&first.count_bytes);
    let growth = t_after.chi_square / t_before.chi_square;
    let pass = growth >= 1.5 && n_after.shannon_entropy_bits >= 7.999 && n_after.p_value > 0.01;
    Outcome::new(
        pass,
        format!(
            "t-probe chi2 {:.1} -> {:.1} (x{:.2}); n_p stream H={:.6} p={:.4}",
            t_before.chi_square,
            t_after.chi_square,
            growth,
            n_after.shannon_entropy_bits,
            n_after.p_value
        ),
    )
}

fn c8_composition_invariant() -> Outcome {
    let mut checked = 0usize;
    let mut failures = 0usize;
    for (i, n) in [3usize, 4, 5].into_iter().enumerate() {
        let cfg = RpssConfig::new(n, 4, 16).unwrap();
        let mut engine = SortingEngine::new(cfg);
        let mut rng = SeededRng::new(ENGINE_SEED + i as u64);
        let mut timer = ConstantTimer::new(1);
        let mut segments = 0;
        while segments < 3_334 {
            let sample = engine.run_cycle(&mut rng, &mut timer, true).unwrap();
            for seg in sample.trace.unwrap().segments {
                if !verify_composition(&seg.applied, &seg.disorder).unwrap() {
                    failures += 1;
                }
                segments += 1;
            }
        }
        checked += segments;
    }
    Outcome::new(
        failures == 0 && checked >= 10_000,
        format!("{checked} segments over N in {{3,4,5}}, {failures} failures"),
    )
}

fn c9_planner() -> Outcome {
    let rows = plan(&PlanRequest {
        bits: 8,
        threshold: 0.011,
        array_sizes: 2..=6,
        successes: 1..=8,
    })
    .unwrap();
    let target = rows.iter().find(|r| r.array_size == 5 && r.successes == 5);
    let reference = reference_comparison().unwrap();
    println!("{}", format_reference_table(&reference).trim_end());
    let pass = matches!(target, Some(r) if r.expected_trials == 600 && r.byte_cost == 3000)
        && reference.len() == REFERENCE_TABLE.len();
    Outcome::new(
        pass,
        match target {
            Some(r) => format!(
                "{} rows; N=5 m=5: M={} C_byte={} rho^m={:.3e}",
                rows.len(),
                r.expected_trials,
                r.byte_cost,
                r.rho_n_pow_m
            ),
            None => format!("{} rows; N=5 m=5 missing", rows.len()),
        },
    )
}

fn c10_calibration() -> Outcome {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let p = chi_square_p_value(15.0, 15);
    let independent = ChiSquared::new(15.0).unwrap().sf(15.0);

    let streams = 1000;
    let mut rng = SeededRng::new(ENGINE_SEED);
    let p_values: Vec<f64> = (0..streams)
        .map(|_| {
            let symbols: Vec<u64> = (0..10_000).map(|_| rng.bounded(256)).collect();
            analyze(&symbols, 256).unwrap().p_value
        })
        .collect();
    let d = ks_uniform_statistic(&p_values);
    let crit = ks_critical_value(streams, 0.01);
    let pass = (p - 0.4514).abs() <= 5e-4 && (p - independent).abs() <= 1e-9 && d < crit;
    Outcome::new(
        pass,
        format!(
            "p(15,15)={p:.6} (independent {independent:.6}); KS D={d:.4} < {crit:.4} over {streams} streams"
        ),
    )
}

fn c11_real_timer() -> Outcome {
    let cfg = RpssConfig::with_bits(5, 5, 8).unwrap();
    let mut pipeline = Pipeline::new(
        PipelineState::new(cfg, FEEDBACK_SEED),
        ENGINE_SEED,
        RealTimer::new(),
    )
    .unwrap();
    match pipeline.generate(100_000) {
        Ok(bytes) => {
            let r = bytes_report(&bytes);
            Outcome::new(
                r.shannon_entropy_bits >= 7.95,
                format!(
                    "1e5 bytes: H={:.5} p={:.4}",
                    r.shannon_entropy_bits, r.p_value
                ),
            )
        }
        Err(e) => Outcome::new(false, format!("engine error: {e}")),
    }
}

fn report(id: u32, name: &str, gating: bool, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    let note = if gating { "" } else { " [non-gating]" };
    println!(
        "criterion {id:>2} {verdict} {name}{note}: {} ({:.1}s)",
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().flush();
    outcome.pass || !gating
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, "negative binomial theory", true, c1_nb_theory);
    ok &= report(2, "negative binomial empirical", true, c2_nb_empirical);
    ok &= report(3, "composition law", true, c3_composition_law);
    ok &= report(4, "convergence bound", true, c4_theorem_bound);
    ok &= report(5, "4-bit uniformity", true, c5_four_bit_uniformity);

    let start = Instant::now();
    let baseline = byte_pipeline()
        .generate_with_probe(BYTE_STREAM_LEN)
        .expect("baseline stream");
    println!(
        "baseline 8-bit stream generated ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
    ok &= report(6, "8-bit uniformity", true, || {
        c6_eight_bit_uniformity(&baseline)
    });
    ok &= report(7, "perturbation decoupling", true, || {
        c7_perturbation(&baseline)
    });
    ok &= report(
        8,
        "composition of permutations",
        true,
        c8_composition_invariant,
    );
    ok &= report(9, "parameter planner", true, c9_planner);
    ok &= report(10, "statistics calibration", true, c10_calibration);
    let gate_real = std::env::var_os("RPSS_GATE_REAL_TIMER").is_some();
    ok &= report(11, "real timer", gate_real, c11_real_timer);

    if ok {
        println!("acceptance: all gating criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
