use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GOLDEN_REPORTS: [&str; 8] = [
    "accuracy_summary.csv",
    "accuracy_thread_hyb-500.30.csv",
    "confusion_thread_hyb-500.30.csv",
    "correlation_threads.csv",
    "correlation_users.csv",
    "multicommunity.csv",
    "scores_thread_word_only.csv",
    "topic_words_lda-8.csv",
];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn commlang(config: &Path, workspace: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commlang"))
        .arg("--config")
        .arg(config)
        .arg("--workspace")
        .arg(workspace)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The fixture config with one JSON pointer replaced, written next to the
/// fixture data so relative paths still resolve.
fn edited_config(dir: &Path, pointer: &str, value: serde_json::Value) -> PathBuf {
    let mut config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixtures().join("config.json")).unwrap()).unwrap();
    for key in ["posts", "comments"] {
        let abs: Vec<String> = config["paths"][key]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| fixtures().join(p.as_str().unwrap()).display().to_string())
            .collect();
        config["paths"][key] = serde_json::json!(abs);
    }
    let corpus = fixtures().join(config["paths"]["tagger_corpus"].as_str().unwrap());
    config["paths"]["tagger_corpus"] = serde_json::json!(corpus.display().to_string());
    if !pointer.is_empty() {
        // missing sections are created on the way down
        let mut target = &mut config;
        for key in pointer.trim_start_matches('/').split('/') {
            target = &mut target[key];
        }
        *target = value;
    }
    let name = format!("config{}.json", pointer.replace('/', "_"));
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn every_stage_has_a_subcommand() {
    let out = Command::new(env!("CARGO_BIN_EXE_commlang")).arg("--help").output().unwrap();
    let help = String::from_utf8_lossy(&out.stdout);
    for cmd in [
        "ingest",
        "split",
        "train-tagger",
        "build-vocab",
        "train-style",
        "train-topic",
        "profile",
        "classify",
        "correlate",
        "report",
        "all",
    ] {
        assert!(help.contains(cmd), "missing {cmd} in\n{help}");
    }
}

#[test]
fn classify_before_training_exits_2() {
    let ws = tempfile::tempdir().unwrap();
    let config = fixtures().join("config.json");
    for stage in ["ingest", "split", "train-tagger", "build-vocab"] {
        let out = commlang(&config, ws.path(), &[stage]);
        assert!(out.status.success(), "{stage}: {}", stderr(&out));
    }
    let out = commlang(&config, ws.path(), &["classify"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("train-style"), "{}", stderr(&out));
}

#[test]
fn invalid_config_exits_1_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    let bad_k = edited_config(dir.path(), "/topic/k", serde_json::json!([8, 0]));
    let out = commlang(&bad_k, &ws, &["ingest"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("topic.k[1]"), "{}", stderr(&out));

    let unknown = edited_config(dir.path(), "/thresholds/min_comments", serde_json::json!(3));
    let out = commlang(&unknown, &ws, &["ingest"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("thresholds"), "{}", stderr(&out));

    let wrong_type = edited_config(dir.path(), "/seeds", serde_json::json!({"split": "one"}));
    let out = commlang(&wrong_type, &ws, &["ingest"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("seeds.split"), "{}", stderr(&out));
}

#[test]
fn changed_config_makes_downstream_stages_stale() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    let config = edited_config(dir.path(), "", serde_json::Value::Null);
    for stage in ["ingest", "split", "train-tagger"] {
        let out = commlang(&config, &ws, &[stage]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let reseeded = edited_config(dir.path(), "/seeds/split", serde_json::json!(99));
    let out = commlang(&reseeded, &ws, &["build-vocab"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).to_lowercase().contains("stale"), "{}", stderr(&out));

    // the override touches every seed, so it changes the hash too
    let out = Command::new(env!("CARGO_BIN_EXE_commlang"))
        .arg("--config")
        .arg(&config)
        .arg("--workspace")
        .arg(&ws)
        .args(["--seed-override", "5", "build-vocab"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    // rerunning the upstream stages with the new config clears it
    for stage in ["ingest", "split", "train-tagger", "build-vocab"] {
        let out = commlang(&reseeded, &ws, &[stage]);
        assert!(out.status.success(), "{stage}: {}", stderr(&out));
    }
}

#[test]
fn usage_errors_exit_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_commlang")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_reports_match_golden_files() {
    let ws = tempfile::tempdir().unwrap();
    let out = commlang(&fixtures().join("config.json"), ws.path(), &["all", "--threads", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let golden = fixtures().join("golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in GOLDEN_REPORTS {
        let got = fs::read_to_string(ws.path().join("reports").join(name)).unwrap();
        assert!(got.starts_with("# config_hash="), "{name}");
        if update {
            fs::create_dir_all(&golden).unwrap();
            fs::write(golden.join(name), &got).unwrap();
        }
        let want = fs::read_to_string(golden.join(name)).unwrap();
        assert_eq!(got, want, "{name} differs from its golden copy");
    }
}
