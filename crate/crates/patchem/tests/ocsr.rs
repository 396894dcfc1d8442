use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use patchem::adapter::SubprocessAdapter;
use patchem::config::AdapterConfig;
use patchem::ocsr::{read_manifest, run_ocsr, AdapterSet, ManifestItem};
use patchem_core::arbiter::{recognize_all, AdapterError, Depiction, IssueKind, Recognizer};

const BIN: &str = env!("CARGO_BIN_EXE_patchem");

fn mock(mode: &str) -> Vec<String> {
    vec![BIN.into(), "mock-adapter".into(), "--mode".into(), mode.into()]
}

const SMILES: [&str; 10] = [
    "CCO",
    "c1ccccc1",
    "CC(=O)O",
    "CCN(CC)CC",
    "c1ccncc1",
    "OC1CCCCC1",
    "CC(C)Cc1ccccc1",
    "O=C(N)c1ccccc1",
    "C#N",
    "ClCCl",
];

fn write_manifest(dir: &Path, n: usize, missing: bool) -> PathBuf {
    let mut lines = String::new();
    for i in 0..n {
        let s = SMILES[i % SMILES.len()];
        let name = format!("img{i:03}.dep");
        std::fs::write(dir.join(&name), Depiction::record(s).payload()).unwrap();
        let item = ManifestItem {
            image_path: name,
            truth_smiles: s.into(),
        };
        lines.push_str(&serde_json::to_string(&item).unwrap());
        lines.push('\n');
    }
    if missing {
        lines.push_str("{\"image_path\":\"absent.dep\",\"truth_smiles\":\"C\"}\n");
    }
    let p = dir.join("manifest.jsonl");
    std::fs::write(&p, lines).unwrap();
    p
}

fn adapters(recognizers: &[&str]) -> AdapterSet {
    AdapterSet::from_config(&AdapterConfig {
        recognizers: recognizers.iter().map(|m| mock(m)).collect(),
        timeout_ms: Some(10_000),
        ..Default::default()
    })
}

#[test]
fn truth_mock_scores_every_image() {
    let dir = tempfile::tempdir().unwrap();
    let items = read_manifest(&write_manifest(dir.path(), 100, false)).unwrap();
    let report = run_ocsr(&items, &adapters(&["truth"])).unwrap();
    assert_eq!(report.n_items, 100);
    assert_eq!(report.accuracy, 100.0);
    assert_eq!(report.n_errors, 0);
}

#[test]
fn missing_image_is_an_item_error() {
    let dir = tempfile::tempdir().unwrap();
    let items = read_manifest(&write_manifest(dir.path(), 4, true)).unwrap();
    let report = run_ocsr(&items, &adapters(&["truth"])).unwrap();
    assert_eq!(report.n_items, 5);
    assert_eq!(report.n_errors, 1);
    assert_eq!(report.accuracy, 80.0);
    assert!(report.items[4].error.is_some());
}

#[test]
fn arbitration_beats_every_single_recognizer() {
    let dir = tempfile::tempdir().unwrap();
    let items = read_manifest(&write_manifest(dir.path(), 20, false)).unwrap();
    let report = run_ocsr(&items, &adapters(&["fixed:CCO", "crash", "truth", "fixed:c1ccccc1"])).unwrap();
    let best_solo = report.solo_accuracy.iter().cloned().fold(0.0, f64::max);
    assert!(report.accuracy >= best_solo);
    assert_eq!(report.accuracy, 100.0);
    assert!(report.items.iter().all(|i| i.selected_model == Some(3)
        || i.candidates[0].correct && i.selected_model == Some(1)
        || i.candidates[3].correct && i.selected_model == Some(1)));
}

#[test]
fn timeouts_and_crashes_are_unreachable() {
    let slow = SubprocessAdapter::new(mock("sleep:5000"), Duration::from_millis(200));
    let start = Instant::now();
    let r = slow.recognize(&Depiction::record("CCO"));
    assert!(matches!(r, Err(AdapterError::Unreachable(_))), "{r:?}");
    assert!(start.elapsed() < Duration::from_secs(3));

    let crash = SubprocessAdapter::new(mock("crash"), Duration::from_secs(10));
    assert!(matches!(
        crash.recognize(&Depiction::record("CCO")),
        Err(AdapterError::Unreachable(_))
    ));

    let fail = SubprocessAdapter::new(mock("fail"), Duration::from_secs(10));
    assert!(matches!(
        fail.recognize(&Depiction::record("CCO")),
        Err(AdapterError::Reported(_))
    ));

    let truth = SubprocessAdapter::new(mock("truth"), Duration::from_secs(10));
    let list: [&dyn Recognizer; 2] = [&slow, &truth];
    let cands = recognize_all(&Depiction::record("OCC"), &list).unwrap();
    assert_eq!(
        cands[0].issue.as_ref().map(|i| i.kind),
        Some(IssueKind::AdapterUnreachable)
    );
    assert!(!cands[0].valid);
    assert_eq!(cands[1].standardized.as_deref(), Some("CCO"));
}

#[test]
fn out_of_range_score_invalidates_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path(), 2, false);
    let o = Command::new(BIN)
        .args(["ocsr", manifest.to_str().unwrap(), "--recognizer"])
        .arg(format!("{BIN} mock-adapter --mode truth"))
        .arg("--evaluator")
        .arg(format!("{BIN} mock-adapter --mode score:1.7"))
        .args(["--format", "json"])
        .env_remove("PATCHEM_CONFIG")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_items"], 2);
    assert_eq!(v["items"][0]["candidates"][0]["issue"]["kind"], "evaluator_protocol");
}
