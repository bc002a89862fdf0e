use std::path::Path;
use std::process::{Command, Output};

fn safin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_safin")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = safin(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn pipeline_is_deterministic_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "3", "synth", "planner", "--n", "40", "--out", "p.csv"]);
    ok(d, &["--seed", "3", "synth", "assessor", "--n", "3000", "--out", "a.csv"]);
    std::fs::create_dir(d.join("models")).unwrap();
    for (kind, data, file) in [("long", "p.csv", "long.mlp"), ("lat", "p.csv", "lat.mlp"), ("assessor", "a.csv", "assessor.mlp")] {
        let out = format!("models/{file}");
        ok(d, &["--seed", "3", "train", kind, "--data", data, "--out", &out, "--epochs", "2"]);
    }
    let config = "seed = 3\n[experiment]\nclass = \"custom\"\na_xl = [-6.0, 0.0]\ndelta_p = [7.0, 17.0]\nn = 60\n";
    std::fs::write(d.join("exp.toml"), config).unwrap();
    let run = |out: &str, workers: &str| {
        let table = ok(d, &["--config", "exp.toml", "--workers", workers, "experiment", "--out", out]);
        (table, std::fs::read(d.join(out)).unwrap())
    };
    let first = run("e1.csv", "1");
    assert_eq!(first, run("e2.csv", "1"));
    assert_eq!(first, run("e3.csv", "2"));
    assert!(first.0.contains("custom"));

    let t1 = ok(d, &["--seed", "3", "run", "--planner", "safin", "--index", "4", "--out", "t1.csv"]);
    let t2 = ok(d, &["--seed", "3", "run", "--planner", "safin", "--index", "4", "--out", "t2.csv"]);
    assert_eq!(t1, t2);
    assert_eq!(std::fs::read(d.join("t1.csv")).unwrap(), std::fs::read(d.join("t2.csv")).unwrap());

    ok(d, &["--seed", "3", "assess-sweep", "--n", "500", "--out", "s.csv"]);
    let sweep = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 16);
}

#[test]
fn bad_inputs_fail_with_a_located_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.csv"), "py,vx,vy,gap_lead,v_xl,gap_follow,v_xf,ax,ay\n0,1,2,3,4,5,6,7,8\n0,1,2,3,4,5,6,7,nan\n").unwrap();
    let out = safin(d, &["train", "long", "--data", "bad.csv", "--out", "m.mlp"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("ay"), "{err}");

    std::fs::write(d.join("c.toml"), "[run]\nepisodes = 3\n").unwrap();
    let out = safin(d, &["--config", "c.toml", "run", "--out", "x.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("episodes"));

    let out = safin(d, &["run", "--models", "missing", "--out", "x.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}
