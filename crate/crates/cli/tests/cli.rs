use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netsimp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netsimp")).args(args).output().unwrap()
}

fn write_graph(dir: &Path) -> String {
    let mut text = String::from("# two triangles and a bridge\n");
    for (u, v) in [(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4), (6, 7), (7, 8)] {
        text.push_str(&format!("{u} {v}\n"));
    }
    let path = dir.join("g.txt");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn simplify_writes_edges_and_mapping() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path());
    let out = dir.path().join("out.txt");
    let map = dir.path().join("map.csv");
    let o = netsimp(&[
        "simplify",
        "--input",
        &input,
        "--method",
        "bf",
        "--s",
        "0.5",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
        "--mapping",
        map.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mapping = fs::read_to_string(&map).unwrap();
    assert_eq!(mapping.lines().count(), 9);
    assert_eq!(mapping.lines().filter(|l| l.contains(",1,") || l.contains(",true,")).count(), 4, "{mapping}");
    assert!(fs::read_to_string(&out).unwrap().starts_with('#'));

    let again = dir.path().join("again.txt");
    netsimp(&[
        "simplify",
        "--input",
        &input,
        "--method",
        "bf",
        "--s",
        "0.5",
        "--seed",
        "3",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn simplify_checks_size_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path());
    let out = dir.path().join("o.txt");
    let o = netsimp(&["simplify", "--input", &input, "--method", "cg", "--s", "0.5", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let o = netsimp(&["simplify", "--input", &input, "--method", "cg", "--c", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let o = netsimp(&["simplify", "--input", &input, "--method", "rn", "--s", "1.5", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn props_prints_globals() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path());
    let o = netsimp(&["props", "--input", &input]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["nodes"], 8);
    let out = dir.path().join("props");
    assert!(netsimp(&["props", "--input", &input, "--out", out.to_str().unwrap()]).status.success());
    let degree = fs::read_to_string(out.join("degree.csv")).unwrap();
    assert_eq!(degree.lines().count(), 9);
}

#[test]
fn run_then_assess() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path());
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "methods = [\"RN\", \"BF\", \"CG\"]\nsizes = [0.25, 0.5]\nradii = [1, 2]\nrepetitions = 2\n\
             [[datasets]]\nname = \"file\"\npath = {input:?}\n\
             [[datasets]]\nname = \"pa\"\nsynthetic = {{ model = \"preferential-attachment\", k = 2, n = 50, seed = 1 }}\n"
        ),
    )
    .unwrap();
    let out = dir.path().join("results");
    let o = netsimp(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "manifest.json",
        "store.json",
        "similarity.csv",
        "correlations.csv",
        "assessments.json",
        "verdicts.csv",
        "plotdata/mean_local_a.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    // the grid has no s = 0.1, so the default comparison fails by name
    let o = netsimp(&["assess", "--store", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("RN"));
    let o = netsimp(&["assess", "--store", out.to_str().unwrap(), "--at-size", "0.25", "--at-c", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("file:") && text.contains("degree (A):"), "{text}");

    // the thread count does not change the results
    let single = dir.path().join("single");
    netsimp(&["run", "--config", config.to_str().unwrap(), "--out", single.to_str().unwrap(), "--jobs", "1"]);
    assert_eq!(fs::read(out.join("store.json")).unwrap(), fs::read(single.join("store.json")).unwrap());
}

#[test]
fn partial_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("loops.txt"), "a a\nb b\n").unwrap();
    let config = dir.path().join("run.toml");
    fs::write(&config, "methods = [\"RN\", \"RL\"]\nsizes = [0.5, 1.0]\nrepetitions = 1\n[[datasets]]\nname = \"l\"\npath = \"loops.txt\"\n").unwrap();
    let out = dir.path().join("r");
    let o = netsimp(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(fs::read_to_string(out.join("tasks.csv")).unwrap().contains("failed"));
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(&config, "repetitions = 0\n[[datasets]]\nname = \"x\"\npath = \"missing.txt\"\n").unwrap();
    let o = netsimp(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("repetitions") && err.contains("missing.txt"), "{err}");
}
