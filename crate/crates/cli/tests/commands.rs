use std::path::Path;
use std::process::Command;

use stockfft_cli::signal_file::SignalFile;
use stockfft_cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn stockfft(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("stockfft").chain(args.iter().copied()), &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_reports_kind_and_rejects_bad_sizes() {
    let single = stockfft(&["plan", "--size", "4096"]);
    assert_eq!(single.code, EXIT_OK, "{}", single.stderr);
    assert!(single.stdout.contains("kind: single_threadgroup"));
    assert!(single.stdout.contains("barriers: 6"));

    let split = stockfft(&["plan", "--size", "8192"]);
    assert_eq!(split.code, EXIT_OK);
    assert!(split.stdout.contains("kind: four_step"));
    assert!(split.stdout.contains("split: 2 x 4096"));

    let bad = stockfft(&["plan", "--size", "4095"]);
    assert_eq!(bad.code, EXIT_USAGE);
    assert!(bad.stderr.contains("power of two"));

    assert_eq!(stockfft(&["plan"]).code, EXIT_USAGE);
    assert_eq!(stockfft(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(stockfft(&["--help"]).code, EXIT_OK);
}

#[test]
fn plan_json_is_parseable() {
    let o = stockfft(&["--json", "plan", "--size", "1024", "--policy", "radix4"]);
    assert_eq!(o.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["n"], 1024);
}

#[test]
fn intel_preset_splits_earlier() {
    let o = stockfft(&["--preset", "intel-eu", "plan", "--size", "1024"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("kind: four_step"));
    assert!(o.stdout.contains("block size: 256"));
}

#[test]
fn hardware_file_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.toml");
    let mut hw = stockfft_core::HardwareModel::apple_m1();
    hw.threadgroup_memory_bytes = 8192;
    std::fs::write(&path, hw.to_toml_string()).unwrap();
    let o = stockfft(&["--hardware", path_str(&path), "plan", "--size", "4096"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("block size: 1024"), "{}", o.stdout);

    std::fs::write(&path, "not_a_field = 1\n").unwrap();
    assert_eq!(stockfft(&["--hardware", path_str(&path), "plan", "--size", "64"]).code, EXIT_FAILURE);
}

#[test]
fn run_transforms_a_delta_into_ones_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("delta.bin");
    let spectrum = dir.path().join("spectrum.bin");
    let back = dir.path().join("back.bin");
    for n in ["1024", "8192"] {
        let g = stockfft(&["generate", "--size", n, "--batch", "3", "--kind", "delta", "--output", path_str(&input)]);
        assert_eq!(g.code, EXIT_OK, "{}", g.stderr);
        let r = stockfft(&["run", "--input", path_str(&input), "--output", path_str(&spectrum), "--size", n]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
        let SignalFile::Single(y) = SignalFile::read(&spectrum).unwrap() else { panic!("precision changed") };
        assert_eq!(y.len(), 3 * n.parse::<usize>().unwrap());
        for c in &y {
            assert!((c.re - 1.0).abs() < 1e-6 && c.im.abs() < 1e-6, "{c:?}");
        }
        let i = stockfft(&["run", "--input", path_str(&spectrum), "--output", path_str(&back), "--size", n, "--inverse"]);
        assert_eq!(i.code, EXIT_OK, "{}", i.stderr);
        let SignalFile::Single(x) = SignalFile::read(&back).unwrap() else { panic!("precision changed") };
        let SignalFile::Single(orig) = SignalFile::read(&input).unwrap() else { unreachable!() };
        for (a, b) in x.iter().zip(&orig) {
            assert!((a.re - b.re).abs() < 1e-6 && (a.im - b.im).abs() < 1e-6);
        }
    }
}

#[test]
fn run_keeps_double_precision() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("c.bin");
    let output = dir.path().join("o.bin");
    stockfft(&["generate", "--size", "64", "--kind", "constant", "--precision", "double", "--output", path_str(&input)]);
    let r = stockfft(&["run", "--input", path_str(&input), "--output", path_str(&output), "--size", "64"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let SignalFile::Double(y) = SignalFile::read(&output).unwrap() else { panic!("expected double output") };
    assert!((y[0].re - 64.0).abs() < 1e-12);
    assert!(y[1..].iter().all(|c| c.norm_sqr() < 1e-20));
}

#[test]
fn run_rejects_size_mismatch_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.bin");
    let output = dir.path().join("y.bin");
    stockfft(&["generate", "--size", "64", "--output", path_str(&input)]);
    let wrong = stockfft(&["run", "--input", path_str(&input), "--output", path_str(&output), "--size", "128"]);
    assert_eq!(wrong.code, EXIT_FAILURE);
    let batch = stockfft(&["run", "--input", path_str(&input), "--output", path_str(&output), "--size", "64", "--batch", "2"]);
    assert_eq!(batch.code, EXIT_FAILURE);
    let missing = dir.path().join("absent.bin");
    let gone = stockfft(&["run", "--input", path_str(&missing), "--output", path_str(&output), "--size", "64"]);
    assert_eq!(gone.code, EXIT_FAILURE);
}

#[test]
fn validate_small_sizes_pass() {
    let o = stockfft(&["validate", "--sizes", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("result: PASS"));

    let d = stockfft(&["--json", "validate", "--sizes", "2..1024", "--precision", "double", "--trials", "2"]);
    assert_eq!(d.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&d.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["worst"]["worst"]["relative_l2"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["rows"].as_array().unwrap().len(), 20);
}

#[test]
fn validate_covers_the_four_step_path() {
    let o = stockfft(&["--preset", "intel-eu", "validate", "--sizes", "1024,4096", "--trials", "1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    assert!(o.stdout.contains("four_step"));
    assert!(o.stdout.contains("multi_level_four_step"));
}

#[test]
fn validate_rejects_bad_arguments() {
    assert_eq!(stockfft(&["validate", "--sizes", "4096..256"]).code, EXIT_USAGE);
    assert_eq!(stockfft(&["validate", "--sizes", "100"]).code, EXIT_USAGE);
    assert_eq!(stockfft(&["validate", "--sizes", "8", "--trials", "0"]).code, EXIT_USAGE);
    assert_eq!(stockfft(&["validate", "--sizes", "8", "--precision", "half"]).code, EXIT_USAGE);
}

#[test]
fn cost_ranks_radix8_first_at_4096() {
    let o = stockfft(&["--json", "cost", "--size", "4096"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let rows: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["design"], "radix8");
    let times: Vec<f64> = rows.iter().map(|r| r["estimate"]["predicted_seconds"].as_f64().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));

    let text = stockfft(&["cost", "--size", "1024", "--designs", "radix4,radix8"]);
    assert_eq!(text.code, EXIT_OK);
    assert!(text.stdout.contains("predicted_us"));
}

#[test]
fn cost_rejects_unusable_designs() {
    assert_eq!(stockfft(&["cost", "--size", "8192", "--designs", "shuffle"]).code, EXIT_USAGE);
    assert_eq!(stockfft(&["cost", "--size", "256", "--designs", "radix16"]).code, EXIT_USAGE);
    let big = stockfft(&["--json", "cost", "--size", "8192"]);
    assert_eq!(big.code, EXIT_OK);
    let rows: serde_json::Value = serde_json::from_str(&big.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    names
}

#[test]
fn emit_writes_kernels_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = stockfft(&["emit", "--size", "4096", "--out-dir", path_str(dir.path())]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(listing(dir.path()), ["fft_4096.dispatch.json", "fft_4096_r8888.metal"]);
    let text = std::fs::read_to_string(dir.path().join("fft_4096_r8888.metal")).unwrap();
    assert_eq!(text.matches("threadgroup_barrier(").count(), 6);

    let big = tempfile::tempdir().unwrap();
    let o = stockfft(&["emit", "--size", "8192", "--out-dir", path_str(big.path())]);
    assert_eq!(o.code, EXIT_OK);
    let metal: Vec<String> = listing(big.path()).into_iter().filter(|n| n.ends_with(".metal")).collect();
    assert_eq!(metal.len(), 3, "{metal:?}");
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(big.path().join("fft_8192.dispatch.json")).unwrap()).unwrap();
    assert_eq!(sidecar["dispatches"].as_array().unwrap().len(), 3);
}

#[test]
fn emit_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(stockfft(&["emit", "--size", "65536", "--out-dir", path_str(d.path())]).code, EXIT_OK);
    }
    let names = listing(a.path());
    assert_eq!(names, listing(b.path()));
    for name in names {
        assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap(), "{name}");
    }
}

#[test]
fn bench_reports_host_figures() {
    let o = stockfft(&["--json", "bench", "--size", "256", "--iterations", "3", "--warmup", "1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["label"], "host-cpu");
    assert!(v["median_seconds_per_fft"].as_f64().unwrap() > 0.0);
    assert!(v["host_gflops"].as_f64().unwrap() > 0.0);
    let text = stockfft(&["bench", "--size", "8192", "--iterations", "1", "--warmup", "0"]);
    assert_eq!(text.code, EXIT_OK);
    assert!(text.stdout.contains("not GPU"));
    assert_eq!(stockfft(&["bench", "--size", "256", "--iterations", "0"]).code, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_stockfft");
    let ok = Command::new(bin).args(["plan", "--size", "256"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).args(["plan", "--size", "300"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(!bad.stderr.is_empty());
}
