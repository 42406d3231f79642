use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hubs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubs")).current_dir(dir).args(args).output().expect("spawn hubs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const GRAPH: &str = r#"
version = 1
[model]
f = { kind = "power", alpha = 0.3 }
[simulate]
n_max = 2000
reps = 6
until = { size = 300 }
race_steps = 100
"#;

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "g.toml", GRAPH);
    for cmd in ["simulate-graph", "simulate-ctbp", "race"] {
        let a = hubs(d, &[cmd, "--config", "g.toml", "--threads", "1", "--out", "a"]);
        let b = hubs(d, &[cmd, "--config", "g.toml", "--threads", "3", "--out", "b"]);
        assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(code(&b), 0);
        for entry in fs::read_dir(d.join("a")).unwrap() {
            let name = entry.unwrap().file_name();
            let x = fs::read(d.join("a").join(&name)).unwrap();
            let y = fs::read(d.join("b").join(&name)).unwrap();
            assert_eq!(x, y, "{cmd}: {name:?} differs");
        }
    }
}

#[test]
fn experiment_outputs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let args = ["experiment", "embedding_equivalence", "--reps", "400", "--seed", "7"];
    let a = hubs(d, &[&args[..], &["--out", "a", "--threads", "1"]].concat());
    let b = hubs(d, &[&args[..], &["--out", "b", "--threads", "4"]].concat());
    assert_eq!(code(&a), code(&b));
    for f in ["summary.csv", "trajectories.csv", "metadata.json"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let summary = fs::read_to_string(d.join("a/summary.csv")).unwrap();
    assert!(summary.starts_with("metric,estimate,ci_lo,ci_hi,predicted,verdict,tolerance\n"));
}

#[test]
fn seed_changes_results() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "g.toml", GRAPH);
    hubs(d, &["simulate-graph", "--config", "g.toml", "--seed", "1", "--out", "a"]);
    hubs(d, &["simulate-graph", "--config", "g.toml", "--seed", "2", "--out", "b"]);
    assert_ne!(fs::read(d.join("a/trajectories.csv")).unwrap(), fs::read(d.join("b/trajectories.csv")).unwrap());
}

#[test]
fn failed_verdict_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hubs(tmp.path(), &["experiment", "mdp_rates", "--out", "o"]);
    assert_eq!(code(&o), 4);
    let summary = fs::read_to_string(tmp.path().join("o/summary.csv")).unwrap();
    assert!(summary.contains("ratio.final"));
    assert!(summary.contains(",fail,"));
}

#[test]
fn resource_cap_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "r.toml", "version = 1\n[model]\nf = { kind = \"affine\", alpha = 1.0 }\n[simulate]\nn_max = 100000\n[resources]\nmax_vertices = 100\n");
    let o = hubs(d, &["simulate-graph", "--config", "r.toml"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("max_vertices"));
}

#[test]
fn config_errors_exit_2_and_list_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "bad.toml", "version = 1\n[model]\nf = { kind = \"power\", alpha = -1.0 }\ncolour = 3\n[simulate]\nn_max = 0\n");
    let o = hubs(d, &["simulate-graph", "--config", "bad.toml"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("colour"), "{err}");
    assert!(err.contains("alpha"), "{err}");
    assert!(err.contains("n_max"), "{err}");

    assert_eq!(code(&hubs(d, &["experiment", "no_such_suite"])), 2);
    assert_eq!(code(&hubs(d, &["simulate-graph", "--config", "missing.toml"])), 2);
    // a model-driven command without a model
    assert_eq!(code(&hubs(d, &["race"])), 2);
}

#[test]
fn regime_mismatch_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "u.toml", "version = 1\n[experiment]\nname = \"uniform_tree\"\n[model]\nf = { kind = \"power\", alpha = 0.3 }\n");
    let o = hubs(d, &["experiment", "uniform_tree", "--config", "u.toml"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("uniform_tree"));
}

#[test]
fn malthusian_prints_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "a.toml", "version = 1\n[model]\nf = { kind = \"affine\", alpha = 1.0 }\n");
    let o = hubs(d, &["malthusian", "--config", "a.toml", "--out", "m"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    let lambda: f64 = out.trim().strip_prefix("lambda* = ").unwrap().parse().unwrap();
    assert!((lambda - 3.0).abs() < 1e-8, "{lambda}");
    assert!(d.join("m/malthusian.json").exists());
}

#[test]
fn calibrate_writes_versioned_file() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hubs(tmp.path(), &["calibrate", "mdp_rates", "--out", "c"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("c/acceptance-mdp_rates-v1.toml")).unwrap();
    assert!(text.contains("[thresholds]"));
    assert!(text.contains("[[pilot]]"));
}
