use std::path::Path;
use std::process::{Command, Output};

use hdgen::cli::config::{example, Experiment, ExperimentConfig};
use hdgen::cli::experiments::synth_gap;
use hdgen::cli::run;

const KINDS: [&str; 6] = ["simulate", "dimension", "tailindex", "synth-gap", "mlp-gap", "bound"];

fn hdgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdgen")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const TAILINDEX: &str = r#"
seed = 4
repetitions = 3
[experiment]
kind = "tailindex"
group_alphas = [1.3, 1.8]
steps = 4000
"#;

#[test]
fn every_example_config_parses() {
    for kind in KINDS {
        let cfg = ExperimentConfig::from_toml_str(example(kind).unwrap()).unwrap();
        assert_eq!(cfg.experiment.name(), kind);
    }
    let out = hdgen(&["--example", "bound"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), example("bound").unwrap());
    assert_eq!(hdgen(&["--example", "nope"]).status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_csv_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "t.toml", TAILINDEX);
    let mut csvs = Vec::new();
    for (dir, threads) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out_dir = tmp.path().join(dir);
        let out = hdgen(&[
            "--config",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read(out_dir.join("tailindex.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);

    let other = tmp.path().join("d");
    hdgen(&["--config", &cfg, "--out", other.to_str().unwrap(), "--seed", "5"]);
    assert_ne!(std::fs::read(other.join("tailindex.csv")).unwrap(), csvs[0]);
}

#[test]
fn rows_carry_config_hash_and_sidecar_records_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "t.toml", TAILINDEX);
    let out_dir = tmp.path().join("o");
    assert_eq!(
        hdgen(&["--config", &cfg, "--out", out_dir.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("tailindex.config.json")).unwrap()).unwrap();
    let hash = sidecar["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 16);
    assert_eq!(sidecar["partial"], false);
    assert_eq!(sidecar["config"]["experiment"]["kind"], "tailindex");
    let csv = std::fs::read_to_string(out_dir.join("tailindex.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().ends_with(",config_hash"));
    assert!(lines.all(|l| l.ends_with(hash)));

    let json_dir = tmp.path().join("j");
    hdgen(&[
        "--config",
        &cfg,
        "--out",
        json_dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(json_dir.join("tailindex_beta.json")).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_configs_exit_with_two_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("never");
    let bad = [
        TAILINDEX.replace("1.8", "2.5"),
        TAILINDEX.replace("steps", "stepz"),
        TAILINDEX.replace("repetitions = 3", "repetitions = 0"),
        "seed = 1\n[experiment]\nkind = \"warp\"\n".to_string(),
        "[experiment]\nkind = \"synth-gap\"\npopulation = 10\nns = [20]\n".to_string(),
        "[experiment]\nkind = \"bound\"\nsweep = \"gamma\"\nvalues = [1.5]\n[experiment.inputs]\nloss_bound = 1.0\nlipschitz = 1.0\nn = 100\ngamma = 0.1\nd_h = 1.0\n".to_string(),
    ];
    for (i, text) in bad.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("bad{i}.toml"), text);
        let out = hdgen(&["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "case {i}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let missing = tmp.path().join("missing.toml");
    assert_eq!(hdgen(&["--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn exhausted_budget_exits_with_three_and_flags_partial() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "seed = 1\nrepetitions = 4\nmax_seconds = 1e-9\n[experiment]\nkind = \"synth-gap\"\npopulation = 1000\nns = [10]\n";
    let cfg = write(tmp.path(), "p.toml", text);
    let out_dir = tmp.path().join("o");
    let out = hdgen(&["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("synth-gap.config.json")).unwrap()).unwrap();
    assert_eq!(sidecar["partial"], true);
}

fn small_synth(extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        "seed = 2\n[experiment]\nkind = \"synth-gap\"\npopulation = 500\nstep = 0.02\nsubsets = 4\n{extra}"
    ))
    .unwrap()
}

#[test]
fn training_set_equal_to_population_has_zero_gap() {
    let cfg = small_synth("alphas = [1.5]\nns = [500]\n");
    let out = run(&cfg).unwrap();
    let table = out.tables.iter().find(|t| t.name == "synth_gap").unwrap();
    assert_eq!(table.floats("mean_gap"), vec![0.0]);
}

#[test]
fn single_cell_is_reproducible() {
    let cfg = small_synth("alphas = [1.0]\nns = [50]\n");
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.tables.iter().find(|t| t.name == "synth_gap").unwrap().rows.len(), 1);
}

#[test]
fn training_sets_are_shared_across_alphas() {
    let cfg = small_synth("ns = [20, 100]\n");
    let Experiment::SynthGap(c) = &cfg.experiment else {
        unreachable!()
    };
    let sets = synth_gap::training_sets(c, cfg.seed, 0);
    assert_eq!(sets, synth_gap::training_sets(c, cfg.seed, 0));
    assert_eq!(sets.len(), 2);
    assert!(sets[1]
        .iter()
        .all(|s| s.len() == 100 && s.windows(2).all(|w| w[0] < w[1])));
    assert_ne!(sets, synth_gap::training_sets(c, cfg.seed, 1));
}
