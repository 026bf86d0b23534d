use std::fs;
use std::process::{Command, Output};

fn hybridopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridopt")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn lists_builtin_functions() {
    let out = hybridopt(&["list-functions"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["shekel", "composition", "sine_permutation"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn missing_config_is_an_error() {
    let out = hybridopt(&["run", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("hybridopt: error:"));
}

#[test]
fn bad_usage_exits_2() {
    assert_eq!(hybridopt(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bench_then_summarize_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results");
    let config = dir.path().join("bench.json");
    fs::write(
        &config,
        format!(
            r#"{{"functions": ["composition"], "methods": ["hybrid", "random_search"], "n": 2,
                "iters": 8, "seeds": [1, 2], "output_dir": {:?}}}"#,
            results.to_str().unwrap()
        ),
    )
    .unwrap();

    let out = hybridopt(&["bench", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    // per-run report lines come first, then the summary CSV
    let header = csv.lines().position(|l| l.starts_with("function,method,seeds")).expect("csv header");
    let lines: Vec<&str> = csv.lines().skip(header).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().any(|l| l.starts_with("composition,hybrid,2,")));
    assert!(lines.iter().any(|l| l.starts_with("composition,random_search,2,")));

    fs::remove_file(results.join("summary.csv")).unwrap();
    let out = hybridopt(&["summarize", results.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(results.join("summary.csv")).unwrap().lines().count(), 3);

    let out = hybridopt(&["plot", results.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_dir(results.join("plots")).unwrap().count(), 2);
}

#[test]
fn run_rejects_multiple_methods() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(&config, r#"{"function": "shekel", "methods": ["hybrid", "rounded_bo"], "iters": 2, "seeds": [1]}"#).unwrap();
    let out = hybridopt(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
