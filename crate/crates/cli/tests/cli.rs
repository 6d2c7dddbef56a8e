use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbmcompose"))
        .args(args)
        .current_dir(dir)
        .env_remove("RBMCOMPOSE_OUT_DIR")
        .env_remove("RBMCOMPOSE_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn build_reports_exported_terminals() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["build", "fa1", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5 exported terminals"), "{}", stdout(&o));
    let o = run(dir.path(), &["build", "adder16", "--base", "fa4", "--out-dir", "out"]);
    assert!(stdout(&o).contains("50 exported terminals"), "{}", stdout(&o));
    assert!(dir.path().join("out/adder16_fa4.json").is_file());
    assert!(dir.path().join("out/adder16_fa4.terminals.json").is_file());
}

#[test]
fn build_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        let o = run(dir.path(), &["build", "mult4", "--out-dir", d]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["mult4.json", "mult4.terminals.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rbmcompose"))
        .args(["build", "and"])
        .current_dir(dir.path())
        .env("RBMCOMPOSE_OUT_DIR", "envout")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("envout/and.json").is_file());
    assert!(dir.path().join("envout/build.manifest.json").is_file());
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["solve", "--model", "adder4", "--op", "add", "--width", "4", "--set", "A=3", "--set", "B=9", "--exact"];
    let ok = run(dir.path(), &[&base[..], &["--expect", "S=12"]].concat());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(stdout(&ok).contains("S=12"));
    let wrong = run(dir.path(), &[&base[..], &["--expect", "S=1"]].concat());
    assert_eq!(wrong.status.code(), Some(1));
    let missing = run(dir.path(), &["solve", "--model", "adder4", "--op", "add", "--width", "4"]);
    assert_eq!(missing.status.code(), Some(2));
    let usage = run(dir.path(), &["solve", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
    let no_model = run(dir.path(), &["solve", "--model", "nowhere.json", "--op", "add", "--width", "1", "--set", "A=1", "--set", "B=1"]);
    assert_eq!(no_model.status.code(), Some(2));
}

#[test]
fn subtraction_recovers_the_operand() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["solve", "--model", "adder4", "--op", "subtract", "--width", "4", "--set", "S=3", "--set", "B=9", "--exact", "--expect", "A=10"],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("rank,A,Cout,weight,frequency\n1,10,1,"), "{csv}");
}

#[test]
fn saved_model_solves_like_the_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(run(p, &["build", "adder4", "--sharpness", "6"]).status.code(), Some(0));
    let args = |model: &str, out: &str| -> Vec<String> {
        ["solve", "--model", model, "--op", "add", "--width", "4", "--set", "A=7", "--set", "B=8", "--samples", "2000"]
            .iter()
            .map(|s| s.to_string())
            .chain(["--sharpness", "6", "--out-dir", out].map(String::from))
            .collect()
    };
    let from_file = args("adder4.json", "f");
    let from_builtin = args("adder4", "b");
    run(p, &from_file.iter().map(String::as_str).collect::<Vec<_>>());
    run(p, &from_builtin.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(
        fs::read(p.join("f/solution.csv")).unwrap(),
        fs::read(p.join("b/solution.csv")).unwrap()
    );
}

#[test]
fn clamped_operands_are_not_reported_as_answers() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["solve", "--model", "mult2", "--op", "multiply", "--width", "2", "--set", "A=3", "--set", "B=2", "--exact"]);
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("rank,P,weight,frequency\n1,6,"), "{csv}");
}

#[test]
fn sat_from_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("f.cnf"), "p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n").unwrap();
    let o = run(dir.path(), &["solve", "--op", "sat", "--cnf", "f.cnf", "--sharpness", "6", "--samples", "5000"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bench_rejects_empty_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.toml"),
        "checkpoints = []\n[[models]]\nname = \"m\"\nmodel = \"adder2\"\n[[tasks]]\noperation = \"add\"\nwidth = 2\ncount = 2\n",
    )
    .unwrap();
    let o = run(dir.path(), &["bench", "s.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty checkpoint"));
}

#[test]
fn bench_models_resolve_relative_to_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::create_dir(p.join("suite")).unwrap();
    run(p, &["build", "dfa2", "--out-dir", "suite"]);
    fs::write(
        p.join("suite/s.json"),
        r#"{"checkpoints": [10, 40], "models": [{"name": "from4", "model": "adder4", "base": "dfa2.json"},
            {"name": "fa", "model": "adder4", "sharpness": 6.0}],
            "tasks": [{"operation": "add", "width": 4, "count": 4}]}"#,
    )
    .unwrap();
    let o = run(p, &["bench", "suite/s.json", "--out-dir", "res"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["curve_from4_add4.csv", "curve_fa_add4.csv", "bench_summary.csv"] {
        assert!(p.join("res").join(f).is_file(), "{f}");
    }
    let manifest = fs::read_to_string(p.join("res/bench.manifest.json")).unwrap();
    assert!(manifest.contains(&p.join("suite/dfa2.json").to_string_lossy().into_owned()));
}

#[test]
fn train_writes_model_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["train", "adder1", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let metrics = fs::read_to_string(dir.path().join("adder1.metrics.csv")).unwrap();
    assert!(metrics.starts_with("stage,k,epoch,reconstruction_error,task_accuracy,log_likelihood\n"));
    let o = run(dir.path(), &["solve", "--model", "adder1.json", "--op", "add", "--width", "1", "--set", "A=1", "--set", "B=1", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_file_supplies_defaults_and_replay_keeps_them() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("c.toml"), "[train]\nepochs_per_stage = 3\nk_max = 3\n").unwrap();
    run(p, &["train", "mult1", "--config", "c.toml", "--out-dir", "a"]);
    let m = fs::read_to_string(p.join("a/train.manifest.json")).unwrap();
    assert!(m.contains("\"epochs_per_stage\": 3"), "{m}");
    fs::remove_file(p.join("c.toml")).unwrap();
    let o = run(p, &["replay", "a/train.manifest.json", "--out-dir", "b"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read(p.join("a/mult1.metrics.csv")).unwrap(),
        fs::read(p.join("b/mult1.metrics.csv")).unwrap()
    );
}

#[test]
fn diagnose_and_inspect_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(p, &["diagnose", "--model", "fa1", "--table", "adder1"]);
    assert_eq!(o.status.code(), Some(0));
    let d = fs::read_to_string(p.join("diagnose.csv")).unwrap();
    assert!(d.starts_with("metric,value\n"));
    let valid: f64 = d
        .lines()
        .find_map(|l| l.strip_prefix("valid_mass,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(valid >= 0.97);
    let o = run(p, &["inspect", "--model", "fa1", "--dump-weights"]);
    assert_eq!(o.status.code(), Some(0));
    let w = fs::read_to_string(p.join("weights.csv")).unwrap();
    assert_eq!(w.lines().count(), 1 + 8);
    assert!(fs::read_to_string(p.join("inspect.csv")).unwrap().contains("n_exported,5\n"));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("s.toml"),
        "checkpoints = [50]\n[sampler]\nchains = 4\n[[models]]\nname = \"m\"\nmodel = \"adder3\"\nsharpness = 6.0\n\
         [[tasks]]\noperation = \"add\"\nwidth = 3\ncount = 6\n",
    )
    .unwrap();
    for (threads, out) in [("1", "t1"), ("3", "t3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_rbmcompose"))
            .args(["bench", "s.toml", "--out-dir", out])
            .current_dir(p)
            .env("RBMCOMPOSE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(
        fs::read(p.join("t1/curve_m_add3.csv")).unwrap(),
        fs::read(p.join("t3/curve_m_add3.csv")).unwrap()
    );
    let bad = Command::new(env!("CARGO_BIN_EXE_rbmcompose"))
        .args(["build", "and"])
        .current_dir(p)
        .env("RBMCOMPOSE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
