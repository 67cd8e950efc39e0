use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rpss_core::analytics::{nb_pmf, t_moments};
use rpss_core::jitter::preset;
use rpss_core::stats::{chi_square_p_value, SampleMoments};
use rpss_core::RpssConfig;
use serde_json::Value;

fn rpss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SIM_SEEDS: [&str; 6] = [
    "--engine-seed",
    "11",
    "--timer-seed",
    "12",
    "--feedback-seed",
    "13",
];

fn generate_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["generate", "-o", path_str(path)];
    args.extend_from_slice(extra);
    rpss(&args)
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(code(&rpss(&["--help"])), 0);
    assert_eq!(code(&rpss(&["--version"])), 0);
    assert_eq!(code(&rpss(&[])), 1);
    assert_eq!(code(&rpss(&["frobnicate"])), 1);
    assert_eq!(
        code(&rpss(&[
            "generate", "--count", "4", "-n", "3", "--jitter", "unit"
        ])),
        1
    );
    assert_eq!(code(&rpss(&["plan", "--threshold", "0"])), 1);
}

#[test]
fn sim_mode_needs_jitter_and_real_mode_refuses_timer_seed() {
    let out = rpss(&["generate", "--count", "4"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("jitter"));
    let out = rpss(&[
        "generate",
        "--mode",
        "real",
        "--timer-seed",
        "1",
        "--count",
        "4",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(
        code(&rpss(&[
            "generate",
            "--jitter",
            "no-such-preset",
            "--count",
            "4"
        ])),
        1
    );
}

#[test]
fn generate_is_reproducible_and_echoes_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    let mut args = vec![
        "-N", "4", "-m", "2", "-n", "4", "--jitter", "fat-like", "--count", "3000",
    ];
    args.extend_from_slice(&SIM_SEEDS);
    let out = generate_to(&a, &args);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&generate_to(&b, &args)), 0);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes.len(), 3000);
    assert_eq!(bytes, fs::read(&b).unwrap());
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(
        summary.contains("engine=11 timer=12 feedback=13"),
        "{summary}"
    );
    assert!(summary.contains("6000 cycles"), "{summary}");
    assert!(out.stdout.is_empty());
}

#[test]
fn reseed_flag_changes_the_stream() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    let mut args = vec![
        "-N", "3", "-m", "2", "--jitter", "fat-like", "--count", "64",
    ];
    args.extend_from_slice(&SIM_SEEDS);
    generate_to(&a, &args);
    args.push("--no-reseed");
    generate_to(&b, &args);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn zero_count_writes_an_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.bin");
    let mut args = vec!["--jitter", "unit", "--count", "0"];
    args.extend_from_slice(&SIM_SEEDS);
    assert_eq!(code(&generate_to(&path, &args)), 0);
    assert_eq!(fs::metadata(&path).unwrap().len(), 0);
}

#[test]
fn generate_to_stdout() {
    let mut args = vec![
        "generate", "-N", "3", "-m", "1", "-n", "8", "--jitter", "unit", "--count", "100",
    ];
    args.extend_from_slice(&SIM_SEEDS);
    let out = rpss(&args);
    assert_eq!(code(&out), 0);
    assert_eq!(out.stdout.len(), 100);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stdout: 100 bytes"));
}

#[test]
fn streams_go_to_separate_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("s.bin");
    let mut args = vec![
        "-N",
        "3",
        "-m",
        "2",
        "--jitter",
        "two-point",
        "--count",
        "256",
        "--streams",
        "3",
    ];
    args.extend_from_slice(&SIM_SEEDS);
    assert_eq!(code(&generate_to(&base, &args)), 0);
    let files: Vec<Vec<u8>> = (0..3)
        .map(|i| fs::read(dir.path().join(format!("s.bin.{i}"))).unwrap())
        .collect();
    assert!(files.iter().all(|f| f.len() == 256));
    assert_ne!(files[0], files[1]);
    assert_ne!(files[1], files[2]);
    // --streams above 1 without a file target is a usage error
    assert_eq!(
        code(&rpss(&[
            "generate",
            "--jitter",
            "unit",
            "--count",
            "1",
            "--streams",
            "2"
        ])),
        1
    );
}

#[test]
fn real_mode_runs() {
    let out = rpss(&[
        "generate",
        "--mode",
        "real",
        "-N",
        "3",
        "-m",
        "2",
        "--count",
        "32",
        "--engine-seed",
        "5",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(out.stdout.len(), 32);
    assert!(String::from_utf8_lossy(&out.stderr).contains("timer=-"));
}

#[test]
fn analyze_reference_files() {
    let dir = tempfile::tempdir().unwrap();
    let cycling = dir.path().join("cycling.bin");
    fs::write(
        &cycling,
        (0..256 * 20).map(|i| i as u8).collect::<Vec<u8>>(),
    )
    .unwrap();
    let hist = dir.path().join("hist.csv");
    let out = rpss(&[
        "analyze",
        path_str(&cycling),
        "--format",
        "json",
        "--histogram-csv",
        path_str(&hist),
    ]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["shannon_entropy_bits"], 8.0);
    assert_eq!(report["chi_square"], 0.0);
    assert_eq!(report["p_value"], 1.0);
    let csv = fs::read_to_string(&hist).unwrap();
    assert!(csv.starts_with("symbol,count\n0,20\n"));
    assert_eq!(csv.lines().count(), 257);

    let zeros = dir.path().join("zeros.bin");
    fs::write(&zeros, vec![0u8; 4096]).unwrap();
    let report = stdout_json(&rpss(&["analyze", path_str(&zeros), "--format", "json"]));
    assert_eq!(report["shannon_entropy_bits"], 0.0);

    // 4-bit symbols: every byte 0xA5 splits into 10 and 5
    let nibbles = dir.path().join("nibbles.bin");
    fs::write(&nibbles, vec![0xA5u8; 100]).unwrap();
    let report = stdout_json(&rpss(&[
        "analyze",
        path_str(&nibbles),
        "-n",
        "4",
        "--format",
        "json",
    ]));
    assert_eq!(report["sample_count"], 200);
    assert_eq!(report["histogram"][10], 100);
    assert_eq!(report["shannon_entropy_bits"], 1.0);

    let text = rpss(&["analyze", path_str(&zeros)]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("chi-square"));
    assert_eq!(code(&rpss(&["analyze", "/nonexistent/file"])), 2);
}

#[test]
fn generated_bytes_pass_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.bin");
    let mut args = vec![
        "-N",
        "5",
        "-m",
        "5",
        "-n",
        "8",
        "--jitter",
        "table2-n5-a",
        "--count",
        "20000",
    ];
    args.extend_from_slice(&SIM_SEEDS);
    assert_eq!(code(&generate_to(&path, &args)), 0);
    let report = stdout_json(&rpss(&["analyze", path_str(&path), "--format", "json"]));
    let p = report["p_value"].as_f64().unwrap();
    assert!(p > 0.001, "p={p}");
}

#[test]
fn plan_outputs() {
    let out = rpss(&[
        "plan",
        "-n",
        "8",
        "--threshold",
        "0.01",
        "--max-array-size",
        "6",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    let row = csv
        .lines()
        .find(|l| l.starts_with("8,256,5,5,120,600,"))
        .expect("N=5 m=5 row");
    assert_eq!(row.split(',').nth(9), Some("3000"));

    let out = rpss(&[
        "plan",
        "-n",
        "4",
        "--threshold",
        "1",
        "--max-array-size",
        "4",
        "--max-successes",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().count(),
        1 + 3 * 3
    );

    let out = rpss(&["plan", "--reference"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("reported"));

    assert_eq!(code(&rpss(&["plan", "--threshold", "1e-30"])), 2);
}

fn verify_diff(args: &[&str]) -> f64 {
    let mut all = vec!["verify-law", "--format", "json"];
    all.extend_from_slice(args);
    let out = rpss(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    stdout_json(&out)["max_abs_diff"].as_f64().unwrap()
}

#[test]
fn verify_law_cross_checks() {
    assert!(verify_diff(&["-N", "4", "-m", "3", "-R", "16", "--jitter", "unit"]) < 1e-12);
    assert!(verify_diff(&["-N", "3", "-m", "2", "-R", "8", "--jitter", "two-point"]) < 1e-9);
    assert_eq!(code(&rpss(&["verify-law", "-N", "3", "-m", "2"])), 1);
}

#[test]
fn verify_law_monte_carlo_bands() {
    let out = rpss(&[
        "verify-law",
        "-N",
        "4",
        "-m",
        "4",
        "-R",
        "16",
        "--jitter",
        "table2-n4-a",
        "--monte-carlo",
        "100000",
        "--engine-seed",
        "3",
        "--timer-seed",
        "4",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["seeds"]["engine"], 3);
    // 16 residues at 3 sigma: a handful of exceedances at most
    assert!(v["monte_carlo"]["n_p"]["outside_3sigma"].as_u64().unwrap() <= 2);
    assert!(
        v["monte_carlo"]["n_p"]["max_deviation_percent"]
            .as_f64()
            .unwrap()
            < 5.0
    );
}

#[test]
fn jitter_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("jitter.json");
    fs::write(&path, r#"{"ticks": [1, 2], "counts": [3, 2]}"#).unwrap();
    let a = verify_diff(&[
        "-N",
        "3",
        "-m",
        "2",
        "-R",
        "8",
        "--jitter-file",
        path_str(&path),
    ]);
    assert!(a < 1e-9);
    fs::write(&path, r#"{"ticks": [1, 2], "probs": [0.5, 0.6]}"#).unwrap();
    assert_eq!(
        code(&rpss(&["verify-law", "--jitter-file", path_str(&path)])),
        2
    );
}

fn simulate(dir: &Path, args: &[&str]) -> Value {
    let mut all = vec!["simulate", "--output-dir", path_str(dir)];
    all.extend_from_slice(args);
    let out = rpss(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    stdout_json(&out)
}

fn column(path: &Path, idx: usize) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn simulate_single_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let v = simulate(
        dir.path(),
        &[
            "-N",
            "3",
            "-m",
            "1",
            "--jitter",
            "unit",
            "--cycles",
            "1",
            "--engine-seed",
            "1",
            "--timer-seed",
            "2",
            "--trace",
        ],
    );
    assert_eq!(v["seeds"]["timer"], 2);
    let cycles = fs::read_to_string(dir.path().join("cycles.csv")).unwrap();
    let lines: Vec<&str> = cycles.lines().collect();
    assert_eq!(lines[0], "cycle,n_p,t_ticks");
    assert_eq!(lines.len(), 2);
    // unit runtime: ticks equal trials
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[1], fields[2]);
    for f in [
        "n_p_hist.csv",
        "t_hist.csv",
        "n_p_residues.csv",
        "t_residues.csv",
        "trial_ticks.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(fs::read_to_string(dir.path().join("trial_ticks.csv"))
        .unwrap()
        .starts_with("tick,count\n1,"));
}

#[test]
fn simulated_counts_have_negative_binomial_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cycles = 100_000u64;
    simulate(
        dir.path(),
        &[
            "-N",
            "4",
            "-m",
            "4",
            "--jitter",
            "unit",
            "--cycles",
            "100000",
            "--engine-seed",
            "21",
            "--timer-seed",
            "22",
        ],
    );
    let cfg = RpssConfig::new(4, 4, 16).unwrap();
    let hist = fs::read_to_string(dir.path().join("n_p_hist.csv")).unwrap();
    let mut observed = vec![0u64; 2000];
    for line in hist.lines().skip(1) {
        let (v, c) = line.split_once(',').unwrap();
        observed[v.parse::<usize>().unwrap().min(1999)] += c.parse::<u64>().unwrap();
    }
    // pooled bins with expected count >= 5
    let (mut chi, mut bins, mut e, mut o) = (0.0, 0u64, 0.0, 0u64);
    let mut expected_total = 0.0;
    for (k, &obs) in observed.iter().enumerate().take(1999) {
        let p = nb_pmf(&cfg, k as i64).unwrap() * cycles as f64;
        e += p;
        o += obs;
        expected_total += p;
        if e >= 5.0 {
            chi += (o as f64 - e).powi(2) / e;
            bins += 1;
            e = 0.0;
            o = 0;
        }
    }
    let tail = cycles as f64 - expected_total + e;
    chi += ((o + observed[1999]) as f64 - tail).powi(2) / tail;
    bins += 1;
    let p = chi_square_p_value(chi, bins - 1);
    assert!(p > 0.001, "chi={chi} bins={bins} p={p}");
}

#[test]
fn phenotype_kurtosis_ordering() {
    let kurtosis = |name: &str| {
        let dir = tempfile::tempdir().unwrap();
        simulate(
            dir.path(),
            &[
                "-N",
                "4",
                "-m",
                "4",
                "--jitter",
                name,
                "--cycles",
                "40000",
                "--engine-seed",
                "7",
                "--timer-seed",
                "8",
            ],
        );
        SampleMoments::of(column(&dir.path().join("cycles.csv"), 2)).excess_kurtosis
    };
    let (fat, ultra) = (kurtosis("fat-like"), kurtosis("ultra-skinny-like"));
    assert!(ultra > fat, "fat {fat}, ultra {ultra}");

    let cfg = RpssConfig::new(4, 4, 16).unwrap();
    let theory = t_moments(&cfg, &preset("ultra-skinny-like").unwrap());
    assert!(theory.excess_kurtosis > t_moments(&cfg, &preset("fat-like").unwrap()).excess_kurtosis);
}

#[test]
fn simulate_requires_jitter() {
    let dir = tempfile::tempdir().unwrap();
    let out = rpss(&[
        "simulate",
        "--cycles",
        "1",
        "--output-dir",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 1);
}
