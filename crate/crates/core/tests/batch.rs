//! Batch refinery: determinism, error isolation and manifest contents.

mod common;

use phase_refinery::pipeline::{refine_batch, MANIFEST_NAME};
use phase_refinery::{BitDepth, ColorPolicy, RefineryConfig};
use tempfile::TempDir;

use common::*;

fn outputs_without_manifest(root: &std::path::Path) -> Vec<(std::path::PathBuf, Vec<u8>)> {
    tree_bytes(root)
        .into_iter()
        .filter(|(p, _)| p.as_os_str() != MANIFEST_NAME)
        .collect()
}

#[test]
fn outputs_independent_of_worker_count() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("in");
    write_fixture_set(&input, 50);
    let config = RefineryConfig::default();
    let runs: Vec<_> = [1, 4, 8]
        .into_iter()
        .map(|workers| {
            let out = tmp.path().join(format!("out{workers}"));
            let manifest = refine_batch(&input, &out, &config, workers).unwrap();
            (outputs_without_manifest(&out), manifest.payload_digest())
        })
        .collect();
    assert_eq!(runs[0].0.len(), 50);
    for run in &runs[1..] {
        assert_eq!(run, &runs[0]);
    }
}

#[test]
fn outputs_independent_of_creation_order() {
    let tmp = TempDir::new().unwrap();
    let forward = tmp.path().join("forward");
    write_fixture_set(&forward, 12);
    // same files, created in reverse order
    let reverse = tmp.path().join("reverse");
    for (rel, bytes) in tree_bytes(&forward).into_iter().rev() {
        let dest = reverse.join(rel);
        std::fs::create_dir_all(dest.parent().unwrap()).unwrap();
        std::fs::write(dest, bytes).unwrap();
    }
    let config = RefineryConfig::default();
    let a = refine_batch(&forward, tmp.path().join("a"), &config, 3).unwrap();
    let b = refine_batch(&reverse, tmp.path().join("b"), &config, 5).unwrap();
    assert_eq!(a.payload_digest(), b.payload_digest());
    assert_eq!(outputs_without_manifest(&tmp.path().join("a")), outputs_without_manifest(&tmp.path().join("b")));
}

#[test]
fn corrupt_input_does_not_disturb_others() {
    let tmp = TempDir::new().unwrap();
    let clean = tmp.path().join("clean");
    write_fixture_set(&clean, 9);
    let dirty = tmp.path().join("dirty");
    for (rel, bytes) in tree_bytes(&clean) {
        let dest = dirty.join(rel);
        std::fs::create_dir_all(dest.parent().unwrap()).unwrap();
        std::fs::write(dest, bytes).unwrap();
    }
    std::fs::write(dirty.join("broken.png"), b"\x89PNG truncated").unwrap();

    let config = RefineryConfig::default();
    let a = refine_batch(&clean, tmp.path().join("a"), &config, 2).unwrap();
    let b = refine_batch(&dirty, tmp.path().join("b"), &config, 2).unwrap();
    assert_eq!((a.total(), a.failures()), (9, 0));
    assert_eq!((b.total(), b.failures(), b.processed()), (10, 1, 9));
    assert_eq!(outputs_without_manifest(&tmp.path().join("a")), outputs_without_manifest(&tmp.path().join("b")));
}

#[test]
fn manifest_lines_parse_and_share_config_digest() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("in");
    write_fixture_set(&input, 6);
    let out = tmp.path().join("out");
    let config = RefineryConfig::default();
    refine_batch(&input, &out, &config, 2).unwrap();
    let text = std::fs::read_to_string(out.join(MANIFEST_NAME)).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0]["kind"], "header");
    assert_eq!(lines[0]["total_images"], 6);
    assert_eq!(lines[0]["failures"], 0);
    let digest = config.digest();
    for line in &lines {
        assert_eq!(line["config_digest"], digest.as_str());
    }
    for rec in &lines[1..] {
        assert_eq!(rec["kind"], "record");
        assert_eq!(rec["output_digest"].as_str().unwrap().len(), 64);
        assert!(rec["elapsed_ms"].is_number());
        let output = out.join(rec["output"].as_str().unwrap());
        assert!(output.is_file(), "{}", output.display());
    }
}

#[test]
fn config_changes_change_digest_and_outputs() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("in");
    write_fixture_set(&input, 3);
    let base = RefineryConfig::default();
    let mut eight = base;
    eight.output_bit_depth = BitDepth::Eight;
    let mut color = base;
    color.color_policy = ColorPolicy::PerChannel;
    let digests: Vec<String> = [base, eight, color]
        .iter()
        .enumerate()
        .map(|(i, cfg)| refine_batch(&input, tmp.path().join(format!("o{i}")), cfg, 1).unwrap().payload_digest())
        .collect();
    assert_ne!(digests[0], digests[1]);
    assert_ne!(digests[0], digests[2]);
    assert_ne!(digests[1], digests[2]);
}
