use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const OPTIMAL: &str = "FFHFHFHHFFFFFHFHHHHH";

fn dtqw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtqw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = dtqw(args);
    assert!(
        out.status.success(),
        "dtqw {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {stderr}"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Rows of a CSV file after the header, split on commas.
fn rows(path: &Path) -> Vec<Vec<String>> {
    read(path)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn out_dir(tmp: &TempDir, name: &str) -> String {
    tmp.path().join(name).to_string_lossy().into_owned()
}

#[test]
fn walk_writes_trajectory_and_normalized_distribution() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "walk");
    ok(&["walk", "--theta", "51", "--phi", "0", "--steps", "20", "--sequence", OPTIMAL, "--out", &out]);
    let dir = Path::new(&out);
    for f in ["trajectory.csv", "distribution.csv", "run_config.toml"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let header = read(&dir.join("trajectory.csv")).lines().next().unwrap().to_string();
    assert_eq!(header, "t,j,re_a,im_a,re_b,im_b,probability");
    let total: f64 = rows(&dir.join("distribution.csv"))
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn ordered_walk_spreads_faster_than_the_disordered_one() {
    let tmp = TempDir::new().unwrap();
    let m2 = |dir: &str| -> f64 {
        rows(&Path::new(dir).join("distribution.csv"))
            .iter()
            .map(|r| {
                let j: f64 = r[0].parse().unwrap();
                j * j * r[1].parse::<f64>().unwrap()
            })
            .sum()
    };
    let ordered = out_dir(&tmp, "ordered");
    let disordered = out_dir(&tmp, "disordered");
    ok(&["walk", "--steps", "20", "--ordered", "H", "--out", &ordered]);
    ok(&["walk", "--steps", "20", "--sequence", OPTIMAL, "--out", &disordered]);
    assert!(m2(&ordered) > m2(&disordered));
}

#[test]
fn zero_steps_are_rejected_with_json_error() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "zero");
    let result = dtqw(&["walk", "--steps", "0", "--out", &out]);
    let err = error_json(&result);
    assert_eq!(err["error"], "config");
    assert!(!Path::new(&out).exists());
}

#[test]
fn bad_flags_and_angles_are_reported_as_json() {
    assert_eq!(error_json(&dtqw(&["walk", "--no-such-flag"]))["error"], "usage");
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "angle");
    let err = error_json(&dtqw(&["walk", "--steps", "3", "--theta", "200", "--out", &out]));
    assert_eq!(err["error"], "compute");
    let err = error_json(&dtqw(&["walk", "--steps", "3", "--sequence", "HHX", "--out", &out]));
    assert_eq!(err["error"], "compute");
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "twice");
    ok(&["walk", "--steps", "4", "--out", &out]);
    let before = read(&Path::new(&out).join("trajectory.csv"));
    let err = error_json(&dtqw(&["walk", "--steps", "5", "--out", &out]));
    assert_eq!(err["error"], "exists");
    assert_eq!(read(&Path::new(&out).join("trajectory.csv")), before);
    ok(&["walk", "--steps", "5", "--out", &out, "--force"]);
    assert_ne!(read(&Path::new(&out).join("trajectory.csv")), before);
}

#[test]
fn config_echo_reproduces_byte_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let first = out_dir(&tmp, "first");
    let second = out_dir(&tmp, "second");
    ok(&["tomo", "--steps", "12", "--random", "static_dynamic", "--seed", "5", "--shot-seed", "9", "--out", &first]);
    let echo = Path::new(&first).join("run_config.toml");
    ok(&["tomo", "--config", echo.to_str().unwrap(), "--out", &second]);
    for f in ["counts.csv", "sites.csv", "tomography.json"] {
        assert_eq!(
            read(&Path::new(&first).join(f)),
            read(&Path::new(&second).join(f)),
            "{f} differs"
        );
    }
}

#[test]
fn config_file_is_validated_and_flags_win() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");

    std::fs::write(&cfg, "schema_version = 1\nsteps = 3\nunknown_key = 1\n").unwrap();
    let out = out_dir(&tmp, "a");
    assert_eq!(error_json(&dtqw(&["walk", "--config", cfg.to_str().unwrap(), "--out", &out]))["error"], "config");

    std::fs::write(&cfg, "steps = 3\n").unwrap();
    assert_eq!(error_json(&dtqw(&["walk", "--config", cfg.to_str().unwrap(), "--out", &out]))["error"], "config");

    std::fs::write(&cfg, "schema_version = 1\ncommand = \"sweep\"\n").unwrap();
    assert_eq!(error_json(&dtqw(&["walk", "--config", cfg.to_str().unwrap(), "--out", &out]))["error"], "config");

    std::fs::write(&cfg, "schema_version = 1\nsteps = 3\nsequence = \"HHF\"\n").unwrap();
    ok(&["walk", "--config", cfg.to_str().unwrap(), "--steps", "6", "--ordered", "F", "--out", &out]);
    let echo = read(&Path::new(&out).join("run_config.toml"));
    assert!(echo.contains("steps = 6"), "{echo}");
    assert!(echo.contains("coin = \"F\""), "{echo}");
    assert!(!echo.contains("sequence"), "{echo}");
}

#[test]
fn entropy_curves_for_three_phases() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "entropy");
    ok(&[
        "entropy", "--init", "51:0", "--init", "51:90", "--init", "51:180", "--steps", "20", "--out", &out,
    ]);
    let dir = Path::new(&out);
    let expected_final = [0.6245, 0.8686, 0.9773];
    for (phi, want) in ["0", "90", "180"].iter().zip(expected_final) {
        let curve = rows(&dir.join(format!("entropy_theta51_phi{phi}.csv")));
        assert_eq!(curve.len(), 21);
        assert_eq!(curve[0], vec!["0".to_string(), "0".to_string()]);
        let last: f64 = curve[20][1].parse().unwrap();
        assert!((last - want).abs() < 5e-4, "phi={phi}: {last}");
    }
    assert_eq!(rows(&dir.join("entropy_summary.csv")).len(), 3);
}

#[test]
fn disordered_sequence_entropies_cluster_near_one() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "disordered");
    ok(&[
        "entropy", "--init", "51:0", "--init", "51:90", "--init", "51:180", "--init", "51:270", "--sequence", OPTIMAL,
        "--out", &out, "--format", "json",
    ]);
    let summary: Value = serde_json::from_str(&read(&Path::new(&out).join("entropy_summary.json"))).unwrap();
    let finals: Vec<f64> = summary
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["final_entropy"].as_f64().unwrap())
        .collect();
    assert_eq!(finals.len(), 4);
    for s in finals {
        assert!((0.96..=1.0).contains(&s), "{s}");
    }
}

#[test]
fn sweep_report_and_worker_independence() {
    let tmp = TempDir::new().unwrap();
    let one = out_dir(&tmp, "one");
    let four = out_dir(&tmp, "four");
    ok(&["sweep", "--n", "12", "--workers", "1", "--out", &one]);
    ok(&["sweep", "--n", "12", "--workers", "4", "--out", &four]);
    for f in ["sweep_report.json", "histogram.csv", "top_sequences.csv"] {
        assert_eq!(read(&Path::new(&one).join(f)), read(&Path::new(&four).join(f)), "{f}");
    }
    let report: Value = serde_json::from_str(&read(&Path::new(&one).join("sweep_report.json"))).unwrap();
    assert_eq!(report["count"], 4096);
    assert!(report.get("wall_time_s").is_none());
    assert_eq!(rows(&Path::new(&one).join("top_sequences.csv")).len(), 10);
}

#[test]
fn full_sweep_fraction_above_point_nine() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "full");
    ok(&["sweep", "--n", "20", "--theta", "51", "--phi", "0", "--out", &out]);
    let report: Value = serde_json::from_str(&read(&Path::new(&out).join("sweep_report.json"))).unwrap();
    let fraction = report["fraction_above"].as_f64().unwrap();
    let mean = report["mean_entropy"].as_f64().unwrap();
    assert!((fraction - 0.73).abs() < 0.02, "{fraction}");
    assert!((mean - 0.924).abs() < 0.005, "{mean}");
}

#[test]
fn lz_on_the_bundled_fixture() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "lz");
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/reference_sequences.txt");
    let stdout = ok(&["lz", "--file", fixture, "--out", &out]);
    // the fourth listed value (8) disagrees with the parse rule, which gives 7
    assert!(stdout.contains("complexities (3,3,5,7,7,7,6,6,6,7,7,6)"), "{stdout}");
    assert!(stdout.contains("HFHHFHFFFHHHHFFHHFHF"), "{stdout}");
    let table = rows(&Path::new(&out).join("lz.csv"));
    assert_eq!(table.len(), 12);
    assert_eq!(table[0][2], "1·0·101010101010101010·");
}

#[test]
fn fit_sources() {
    let tmp = TempDir::new().unwrap();
    let classical = out_dir(&tmp, "classical");
    ok(&["fit", "--classical", "--out", &classical]);
    let fit: Value = serde_json::from_str(&read(&Path::new(&classical).join("fit.json"))).unwrap();
    assert!((fit["exponent"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    // refit the written series file
    let series = Path::new(&classical).join("moments.csv");
    let refit = out_dir(&tmp, "refit");
    ok(&["fit", "--series", series.to_str().unwrap(), "--method", "loglog", "--out", &refit]);
    let fit: Value = serde_json::from_str(&read(&Path::new(&refit).join("fit.json"))).unwrap();
    assert!((fit["exponent"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let ordered = out_dir(&tmp, "ordered");
    ok(&["fit", "--steps", "20", "--out", &ordered]);
    let fit: Value = serde_json::from_str(&read(&Path::new(&ordered).join("fit.json"))).unwrap();
    assert!((fit["exponent"].as_f64().unwrap() - 2.0).abs() < 0.1);

    let both = out_dir(&tmp, "both");
    assert_eq!(error_json(&dtqw(&["fit", "--classical", "--ensemble", "5", "--out", &both]))["error"], "config");
}

#[test]
fn noiseless_tomography_matches_the_exact_entropy() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "tomo");
    ok(&["tomo", "--steps", "20", "--noiseless", "--out", &out]);
    let result: Value = serde_json::from_str(&read(&Path::new(&out).join("tomography.json"))).unwrap();
    let s = result["entropy"].as_f64().unwrap();
    let exact = result["exact_entropy"].as_f64().unwrap();
    assert!((s - exact).abs() < 1e-9);
    assert!((result["rho_c_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let counts = read(&Path::new(&out).join("counts.csv"));
    assert!(counts.starts_with("j,basis,outcome,count\n"));
}

#[test]
fn json_format_mirrors_csv_tables() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "json");
    ok(&["walk", "--steps", "3", "--format", "json", "--out", &out]);
    let traj: Value = serde_json::from_str(&read(&Path::new(&out).join("trajectory.json"))).unwrap();
    let records = traj.as_array().unwrap();
    assert_eq!(records.len(), 1 + 3 + 5 + 7);
    assert_eq!(records[0]["re_a"], 0.90258528435);
    assert!(!Path::new(&out).join("trajectory.csv").exists());
}
