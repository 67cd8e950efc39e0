use std::collections::BTreeMap;
use std::fs::{self, File};
use std::hash::BuildHasher;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use rpss_core::analytics::{convergence_report, exact_t_mod, mod_residue_np, mod_residue_t};
use rpss_core::engine::{SortingEngine, TickHistogram};
use rpss_core::jitter::{preset, JitterModel};
use rpss_core::pipeline::{disassemble_bytes, OutputSource, Pipeline, PipelineState};
use rpss_core::planner::{
    format_plan_table, format_reference_table, plan, reference_comparison, write_plan_csv,
    write_reference_csv, PlanRequest,
};
use rpss_core::rng::SeededRng;
use rpss_core::stats::{analyze, report_from_histogram, StatsReport};
use rpss_core::timer::{RealTimer, SimulatedTimer, TimerSource};
use rpss_core::{ResidueDistribution, RpssConfig, RpssError};
use serde_json::json;

use crate::args::{
    AnalyzeArgs, Format, GenerateArgs, JitterArgs, Mode, PlanArgs, SimulateArgs, TableFormat,
    VerifyLawArgs,
};

#[derive(Debug)]
pub enum CliError {
    /// Arguments that parse but do not form a valid request.
    Usage(String),
    Runtime(String),
}

impl From<RpssError> for CliError {
    fn from(e: RpssError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn fresh_seed() -> u64 {
    std::collections::hash_map::RandomState::new().hash_one(SystemTime::now())
}

fn config(array_size: usize, successes: u32, modulus: u64) -> CliResult<RpssConfig> {
    RpssConfig::new(array_size, successes, modulus).map_err(|e| CliError::Usage(e.to_string()))
}

fn load_jitter(args: &JitterArgs) -> CliResult<Option<JitterModel>> {
    match (&args.jitter, &args.jitter_file) {
        (Some(name), _) => preset(name)
            .map(Some)
            .map_err(|e| CliError::Usage(e.to_string())),
        (None, Some(path)) => Ok(Some(JitterModel::load(path)?)),
        (None, None) => Ok(None),
    }
}

fn require_jitter(args: &JitterArgs, what: &str) -> CliResult<JitterModel> {
    load_jitter(args)?.ok_or_else(|| {
        CliError::Usage(format!(
            "{what} needs a jitter source (--jitter or --jitter-file)"
        ))
    })
}

fn jitter_label(args: &JitterArgs) -> String {
    match (&args.jitter, &args.jitter_file) {
        (Some(name), _) => name.clone(),
        (None, Some(path)) => path.display().to_string(),
        (None, None) => "real timer".into(),
    }
}

fn buffered(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        CliError::Runtime(format!("{}: {e}", path.display()))
    })?))
}

struct StreamSeeds {
    engine: u64,
    timer: Option<u64>,
    feedback: u64,
}

fn run_stream<T: TimerSource>(
    state: PipelineState,
    engine_seed: u64,
    timer: T,
    count: usize,
    out: &mut dyn Write,
) -> CliResult<u64> {
    let mut pipeline = Pipeline::new(state, engine_seed, timer)?;
    const CHUNK: usize = 1 << 16;
    let mut left = count;
    while left > 0 {
        let take = left.min(CHUNK);
        out.write_all(&pipeline.generate(take)?)?;
        left -= take;
    }
    out.flush()?;
    Ok(pipeline.state().cycle_index)
}

pub fn generate(args: &GenerateArgs) -> CliResult {
    let cfg = RpssConfig::with_bits(args.shape.array_size, args.shape.successes, args.bits)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let jitter = match args.mode {
        Mode::Sim => Some(require_jitter(&args.jitter, "sim mode")?),
        Mode::Real => {
            if args.seeds.timer_seed.is_some() {
                return Err(CliError::Usage(
                    "--timer-seed is only valid in sim mode".into(),
                ));
            }
            if args.jitter.is_set() {
                return Err(CliError::Usage(
                    "jitter models are only valid in sim mode".into(),
                ));
            }
            None
        }
    };
    if args.streams == 0 {
        return Err(CliError::Usage("--streams must be at least 1".into()));
    }
    if args.streams > 1 && args.output.is_none() {
        return Err(CliError::Usage(
            "--streams above 1 requires --output".into(),
        ));
    }

    let base = StreamSeeds {
        engine: args.seeds.engine_seed.unwrap_or_else(fresh_seed),
        timer: jitter
            .as_ref()
            .map(|_| args.seeds.timer_seed.unwrap_or_else(fresh_seed)),
        feedback: args.feedback_seed.unwrap_or_else(fresh_seed),
    };
    let streams: Vec<(StreamSeeds, Option<PathBuf>)> = (0..args.streams as u64)
        .map(|i| {
            let seeds = StreamSeeds {
                engine: base.engine.wrapping_add(i),
                timer: base.timer.map(|t| t.wrapping_add(i)),
                feedback: base.feedback.wrapping_add(i),
            };
            let path = match (&args.output, args.streams) {
                (Some(p), 1) => Some(p.clone()),
                (Some(p), _) => Some(PathBuf::from(format!("{}.{i}", p.display()))),
                (None, _) => None,
            };
            (seeds, path)
        })
        .collect();

    let run_one = |seeds: &StreamSeeds, path: &Option<PathBuf>| -> CliResult<u64> {
        let mut state = PipelineState::new(cfg, seeds.feedback);
        state.reseed_enabled = !args.no_reseed;
        if args.probe_time {
            state.source = OutputSource::ElapsedTime;
        }
        let mut sink: Box<dyn Write> = match path {
            Some(p) => Box::new(buffered(p)?),
            None => Box::new(io::stdout().lock()),
        };
        match (&jitter, seeds.timer) {
            (Some(model), Some(ts)) => run_stream(
                state,
                seeds.engine,
                SimulatedTimer::new(model.clone(), ts),
                args.count,
                &mut sink,
            ),
            _ => run_stream(state, seeds.engine, RealTimer::new(), args.count, &mut sink),
        }
    };

    let cycles: Vec<CliResult<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = streams
            .iter()
            .map(|(seeds, path)| scope.spawn(|| run_one(seeds, path)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("generator thread panicked"))
            .collect()
    });

    let mut err = io::stderr().lock();
    writeln!(
        err,
        "config: {cfg}; mode: {}; jitter: {}; reseed: {}; source: {}",
        match args.mode {
            Mode::Sim => "sim",
            Mode::Real => "real",
        },
        jitter_label(&args.jitter),
        if args.no_reseed { "off" } else { "on" },
        if args.probe_time {
            "T mod R"
        } else {
            "N_p mod R"
        },
    )?;
    let mut failure = None;
    for ((seeds, path), result) in streams.iter().zip(cycles) {
        let target = path
            .as_ref()
            .map_or("stdout".to_string(), |p| p.display().to_string());
        let timer = seeds.timer.map_or("-".to_string(), |t| t.to_string());
        match result {
            Ok(c) => writeln!(
                err,
                "{target}: {} bytes, {c} cycles; seeds engine={} timer={timer} feedback={}",
                args.count, seeds.engine, seeds.feedback
            )?,
            Err(e) => {
                writeln!(
                    err,
                    "{target}: failed; seeds engine={} timer={timer} feedback={}",
                    seeds.engine, seeds.feedback
                )?;
                failure.get_or_insert(e);
            }
        }
    }
    failure.map_or(Ok(()), Err)
}

pub fn analyze_file(args: &AnalyzeArgs) -> CliResult {
    let bytes = fs::read(&args.input)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.input.display())))?;
    let symbols = disassemble_bytes(&bytes, args.bits)?;
    let report = analyze(&symbols, 1 << args.bits)?;
    emit_report(&report, args.format)?;
    if let Some(path) = &args.histogram_csv {
        let mut out = buffered(path)?;
        report.write_histogram_csv(&mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn emit_report(report: &StatsReport, format: Format) -> CliResult {
    let mut out = io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", report.to_json()?)?,
        Format::Text => write!(out, "{report}")?,
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

pub fn plan_configs(args: &PlanArgs) -> CliResult {
    let req = PlanRequest {
        bits: args.bits,
        threshold: args.threshold,
        array_sizes: args.min_array_size..=args.max_array_size,
        successes: args.min_successes..=args.max_successes,
    };
    if !(req.threshold > 0.0 && req.threshold <= 1.0) {
        return Err(CliError::Usage(format!(
            "--threshold must lie in (0, 1], got {}",
            req.threshold
        )));
    }
    let rows = plan(&req)?;
    let mut out = io::stdout().lock();
    match args.format {
        TableFormat::Table => write!(out, "{}", format_plan_table(&rows))?,
        TableFormat::Csv => write_plan_csv(&rows, &mut out)?,
    }
    if args.reference {
        let reference = reference_comparison()?;
        writeln!(out)?;
        match args.format {
            TableFormat::Table => write!(out, "{}", format_reference_table(&reference))?,
            TableFormat::Csv => write_reference_csv(&reference, &mut out)?,
        }
    }
    Ok(())
}

struct MonteCarlo {
    cycles: u64,
    count: Vec<u64>,
    time: Vec<u64>,
}

/// `(max |f_r - P_r|, max relative deviation from 1/R in percent, residues outside 3 sigma)`.
fn band_summary(counts: &[u64], theory: &ResidueDistribution) -> (f64, f64, usize) {
    let n: u64 = counts.iter().sum();
    let r = counts.len() as f64;
    let (mut max_diff, mut max_dev, mut outside) = (0.0f64, 0.0f64, 0);
    for (&c, &p) in counts.iter().zip(&theory.probabilities) {
        let f = c as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        max_diff = max_diff.max((f - p).abs());
        max_dev = max_dev.max((f - 1.0 / r).abs() * r * 100.0);
        if (f - p).abs() > 3.0 * sigma {
            outside += 1;
        }
    }
    (max_diff, max_dev, outside)
}

pub fn verify_law(args: &VerifyLawArgs) -> CliResult {
    let cfg = config(args.shape.array_size, args.shape.successes, args.modulus)?;
    let jitter = require_jitter(&args.jitter, "verify-law")?;
    let law_t = mod_residue_t(&cfg, &jitter)?;
    let law_n = mod_residue_np(&cfg)?;
    let oracle = exact_t_mod(&cfg, &jitter, args.tail_eps)?;
    let diff = law_t.max_abs_diff(&oracle.distribution);
    let convergence = (cfg.modulus() >= 2)
        .then(|| convergence_report(&cfg, Some(&jitter)))
        .transpose()?;

    let engine_seed = args.seeds.engine_seed.unwrap_or_else(fresh_seed);
    let timer_seed = args.seeds.timer_seed.unwrap_or_else(fresh_seed);
    let mc = match args.monte_carlo {
        Some(cycles) => {
            let mut engine = SortingEngine::new(cfg);
            let mut rng = SeededRng::new(engine_seed);
            let mut timer = SimulatedTimer::new(jitter.clone(), timer_seed);
            let r = cfg.modulus() as usize;
            let (mut count, mut time) = (vec![0u64; r], vec![0u64; r]);
            for _ in 0..cycles {
                let s = engine.run_cycle(&mut rng, &mut timer, false)?;
                count[(s.n_p % r as u64) as usize] += 1;
                time[(s.t_ticks % r as u64) as usize] += 1;
            }
            Some(MonteCarlo {
                cycles,
                count,
                time,
            })
        }
        None => None,
    };

    let mut out = io::stdout().lock();
    match args.format {
        Format::Json => {
            let mc_json = mc.as_ref().map(|mc| {
                let (nd, np, no) = band_summary(&mc.count, &law_n);
                let (td, tp, to) = band_summary(&mc.time, &law_t);
                json!({
                    "cycles": mc.cycles,
                    "n_p": {"max_abs_diff": nd, "max_deviation_percent": np, "outside_3sigma": no},
                    "t": {"max_abs_diff": td, "max_deviation_percent": tp, "outside_3sigma": to},
                })
            });
            let value = json!({
                "config": cfg,
                "jitter": jitter_label(&args.jitter),
                "seeds": {"engine": engine_seed, "timer": timer_seed},
                "tail_eps": args.tail_eps,
                "oracle_terms": oracle.terms,
                "oracle_tail_mass": oracle.tail_mass,
                "max_abs_diff": diff,
                "t_law": law_t.probabilities,
                "n_p_law": law_n.probabilities,
                "convergence": convergence,
                "monte_carlo": mc_json,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        }
        Format::Text => {
            writeln!(out, "config            {cfg}")?;
            writeln!(out, "jitter            {}", jitter_label(&args.jitter))?;
            writeln!(
                out,
                "seeds             engine={engine_seed} timer={timer_seed}"
            )?;
            writeln!(
                out,
                "oracle            {} terms, tail mass {:.3e} (tail_eps {:.1e})",
                oracle.terms, oracle.tail_mass, args.tail_eps
            )?;
            writeln!(out, "CF vs oracle      max |diff| = {diff:.3e}")?;
            if let Some(c) = &convergence {
                writeln!(
                    out,
                    "N_p bound         rho_N = {:.6}, bound = {:.3e}, actual max dev = {:.3e}",
                    c.rho_n, c.bound_n, law_n.max_deviation
                )?;
                if let (Some(rho), Some(bound)) = (c.rho_t, c.bound_t) {
                    writeln!(
                        out,
                        "T bound           rho_T = {rho:.6}, bound = {bound:.3e}, actual max dev = {:.3e}",
                        law_t.max_deviation
                    )?;
                }
            }
            if let Some(mc) = &mc {
                for (name, counts, law) in [("N_p", &mc.count, &law_n), ("T", &mc.time, &law_t)] {
                    let (d, p, o) = band_summary(counts, law);
                    writeln!(
                        out,
                        "MC {name:<3} ({} cycles) max |f - P| = {d:.3e}, max dev from 1/R = {p:.3}%, {o} of {} outside 3 sigma",
                        mc.cycles,
                        counts.len()
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn write_value_hist(path: &Path, hist: &BTreeMap<u64, u64>) -> CliResult {
    let mut out = buffered(path)?;
    writeln!(out, "value,count")?;
    for (v, c) in hist {
        writeln!(out, "{v},{c}")?;
    }
    out.flush()?;
    Ok(())
}

fn write_symbol_hist(path: &Path, counts: Vec<u64>) -> CliResult {
    let mut out = buffered(path)?;
    report_from_histogram(counts)?.write_histogram_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CliResult {
    let cfg = config(args.shape.array_size, args.shape.successes, args.modulus)?;
    let jitter = require_jitter(&args.jitter, "simulate")?;
    if args.cycles == 0 {
        return Err(CliError::Usage("--cycles must be at least 1".into()));
    }
    let engine_seed = args.seeds.engine_seed.unwrap_or_else(fresh_seed);
    let timer_seed = args.seeds.timer_seed.unwrap_or_else(fresh_seed);
    fs::create_dir_all(&args.output_dir)?;

    let mut engine = SortingEngine::new(cfg).with_too_big_cutoff(args.too_big);
    let mut rng = SeededRng::new(engine_seed);
    let mut timer = SimulatedTimer::new(jitter, timer_seed);
    let r = cfg.modulus();
    let mut cycles_csv = buffered(&args.output_dir.join("cycles.csv"))?;
    writeln!(cycles_csv, "cycle,n_p,t_ticks")?;
    let (mut n_hist, mut t_hist) = (BTreeMap::new(), BTreeMap::new());
    let (mut n_res, mut t_res) = (vec![0u64; r as usize], vec![0u64; r as usize]);
    let mut ticks = TickHistogram::new(args.too_big);
    let mut too_big = 0u64;
    for k in 0..args.cycles {
        let s = engine.run_cycle(&mut rng, &mut timer, args.trace)?;
        writeln!(cycles_csv, "{k},{},{}", s.n_p, s.t_ticks)?;
        *n_hist.entry(s.n_p).or_insert(0u64) += 1;
        *t_hist.entry(s.t_ticks).or_insert(0u64) += 1;
        n_res[(s.n_p % r) as usize] += 1;
        t_res[(s.t_ticks % r) as usize] += 1;
        too_big += s.too_big;
        if let Some(trace) = s.trace {
            trace.trial_ticks.iter().for_each(|&d| ticks.record(d));
        }
    }
    cycles_csv.flush()?;
    let dir = &args.output_dir;
    write_value_hist(&dir.join("n_p_hist.csv"), &n_hist)?;
    write_value_hist(&dir.join("t_hist.csv"), &t_hist)?;
    write_symbol_hist(&dir.join("n_p_residues.csv"), n_res)?;
    write_symbol_hist(&dir.join("t_residues.csv"), t_res)?;
    if args.trace {
        let mut out = buffered(&dir.join("trial_ticks.csv"))?;
        ticks.write_csv(&mut out)?;
        out.flush()?;
    }

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&json!({
            "config": cfg,
            "jitter": jitter_label(&args.jitter),
            "seeds": {"engine": engine_seed, "timer": timer_seed},
            "cycles": args.cycles,
            "too_big_trials": too_big,
            "output_dir": dir,
        }))?
    )?;
    Ok(())
}
