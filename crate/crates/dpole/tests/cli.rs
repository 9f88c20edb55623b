mod common;

use common::{dpole, dpole_ok, read, without_compute, write};
use dpole::artifact::{load_artifact, EPISODES_FILE};
use dpole::sweep::{run_dir_name, SweepIndex, INDEX_FILE};

#[test]
fn run_writes_header_plus_one_row_per_episode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    dpole_ok(&["run", "--seed", "4", "--out", out.to_str().unwrap()]);
    let csv = read(&out.join(EPISODES_FILE));
    assert_eq!(csv.lines().count(), 1001);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
    assert_eq!(
        csv.lines().next().unwrap(),
        "episode,steps,terminal_cause,compute_ns"
    );
    let run = load_artifact(&out).unwrap();
    assert_eq!(run.records.len(), 1000);
    assert_eq!(run.config.seed, 4);
    assert!(out.join("actor.net").is_file() && out.join("critic.net").is_file());
}

#[test]
fn identical_runs_match_modulo_compute_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"episodes": 200, "rehearsal": {"strategy": "batch", "pseudo_count": 4}}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        dpole_ok(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let (ca, cb) = (read(&a.join(EPISODES_FILE)), read(&b.join(EPISODES_FILE)));
    assert_eq!(without_compute(&ca), without_compute(&cb));
    assert_eq!(read(&a.join("actor.net")), read(&b.join("actor.net")));
}

#[test]
fn overrides_take_precedence_over_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"episodes": 50, "seed": 1, "observation": "full"}"#,
    );
    let out = dir.path().join("r");
    dpole_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--episodes",
        "7",
        "--seed",
        "3",
        "--strategy",
        "ortho",
        "--pseudo-count",
        "2",
        "--reinit-every",
        "5",
        "--apply-to",
        "critic",
        "--observation",
        "partial",
        "--out",
        out.to_str().unwrap(),
    ]);
    let run = load_artifact(&out).unwrap();
    assert_eq!(run.records.len(), 7);
    let c = &run.config;
    assert_eq!(c.seed, 3);
    assert_eq!(c.rehearsal.pseudo_count, 2);
    assert_eq!(c.rehearsal.reinit_every, 5);
    assert_eq!(c.rehearsal.strategy.to_string(), "ortho");
    assert_eq!(c.rehearsal.apply_to.to_string(), "critic");
    assert_eq!(c.observation, dpole_core::observe::Mode::Partial);
}

#[test]
fn sweep_runs_the_cross_product() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let grid = dir.path().join("grid.json");
    write(
        &cfg,
        r#"{"episodes": 30, "rehearsal": {"strategy": "batch"}}"#,
    );
    write(&grid, r#"{"pseudo_count": [0, 8]}"#);
    let out = dir.path().join("sweep");
    dpole_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        grid.to_str().unwrap(),
        "--seeds",
        "1..5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let index: SweepIndex = serde_json::from_str(&read(&out.join(INDEX_FILE))).unwrap();
    assert_eq!(index.runs.len(), 10);
    for r in &index.runs {
        assert!(r.error.is_none());
        assert_eq!(load_artifact(&out.join(&r.path)).unwrap().records.len(), 30);
    }
    assert!(out.join("sweep_report.txt").is_file());
    assert!(out.join("sweep_report.json").is_file());
}

#[test]
fn sweep_cells_equal_solo_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let grid = dir.path().join("grid.json");
    write(&cfg, r#"{"episodes": 150}"#);
    write(
        &grid,
        r#"[{"strategy": "none"}, {"strategy": "batch", "pseudo_count": 4, "reinit_every": 3}, {"strategy": "ortho"}]"#,
    );
    let out = dir.path().join("sweep");
    dpole_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        grid.to_str().unwrap(),
        "--seeds",
        "2,3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let solo = dir.path().join("solo");
    dpole_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--strategy",
        "batch",
        "--pseudo-count",
        "4",
        "--reinit-every",
        "3",
        "--out",
        solo.to_str().unwrap(),
    ]);
    let cell = read(&out.join(run_dir_name(1, 3)).join(EPISODES_FILE));
    assert_eq!(
        without_compute(&cell),
        without_compute(&read(&solo.join(EPISODES_FILE)))
    );
}

#[test]
fn compare_self_and_swap() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    dpole_ok(&[
        "run",
        "--episodes",
        "120",
        "--seed",
        "1",
        "--out",
        a.to_str().unwrap(),
    ]);
    dpole_ok(&[
        "run",
        "--episodes",
        "120",
        "--seed",
        "2",
        "--out",
        b.to_str().unwrap(),
    ]);
    let json = |x: &std::path::Path, y: &std::path::Path| -> serde_json::Value {
        let out = dpole_ok(&[
            "compare",
            x.to_str().unwrap(),
            y.to_str().unwrap(),
            "--json",
        ]);
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let same = json(&a, &a);
    assert!(same["difference"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| d.as_f64() == Some(0.0)));
    assert_eq!(same["welch"]["t"].as_f64(), Some(0.0));
    assert_eq!(same["welch"]["p"].as_f64(), Some(1.0));

    let (ab, ba) = (json(&a, &b), json(&b, &a));
    let neg: Vec<f64> = ba["difference"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| -d.as_f64().unwrap())
        .collect();
    let fwd: Vec<f64> = ab["difference"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_f64().unwrap())
        .collect();
    assert_eq!(fwd, neg);
    assert_eq!(
        ab["welch"]["t"].as_f64().unwrap(),
        -ba["welch"]["t"].as_f64().unwrap()
    );
    assert_eq!(ab["welch"]["p"], ba["welch"]["p"]);
    assert_eq!(ab["a"]["moving_average"].as_array().unwrap().len(), 111);

    let report = dir.path().join("report");
    let text = dpole_ok(&[
        "compare",
        a.join(EPISODES_FILE).to_str().unwrap(),
        b.to_str().unwrap(),
        "--ma-window",
        "20",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(String::from_utf8(text.stdout).unwrap().contains("welch t"));
    assert!(report.join("comparison.txt").is_file() && report.join("comparison.json").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, r#"{"episodes": 0}"#);
    let out = dir.path().join("x");
    let r = dpole(&[
        "run",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("episodes"));

    let typo = dir.path().join("typo.json");
    write(&typo, r#"{"agent": {"gama": 0.9}}"#);
    let r = dpole(&[
        "run",
        "--config",
        typo.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(1));

    let missing = dir.path().join("nope.json");
    let r = dpole(&[
        "run",
        "--config",
        missing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(3));

    // A regular file where the run directory should go.
    let blocker = dir.path().join("file");
    write(&blocker, "");
    let r = dpole(&[
        "run",
        "--episodes",
        "1",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(3));

    let r = dpole(&[
        "compare",
        missing.to_str().unwrap(),
        missing.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(3));

    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    dpole_ok(&["run", "--episodes", "5", "--out", a.to_str().unwrap()]);
    dpole_ok(&["run", "--episodes", "6", "--out", b.to_str().unwrap()]);
    let r = dpole(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));

    let r = dpole(&["run", "--episodes", "3"]);
    assert_eq!(r.status.code(), Some(1));
}
