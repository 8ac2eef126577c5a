#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use citescope::{load_config, run_pipeline, LoadedConfig, Overrides, PipelineError, RunManifest, RunOptions, Stage};
use tempfile::TempDir;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// Fresh copy of the toy inputs (without reference outputs).
pub fn toy_workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture_dir();
    copy_dir(&src.join("snapshot"), &dir.path().join("snapshot"));
    for f in ["citescope.toml", "seeds.tsv", "exclusions.txt"] {
        fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    dir
}

pub fn load(dir: &Path) -> LoadedConfig {
    load_config(&dir.join("citescope.toml"), &Overrides::default()).unwrap()
}

pub fn run(dir: &Path, stages: &[Stage]) -> Result<RunManifest, PipelineError> {
    run_pipeline(&load(dir), &RunOptions { stages: stages.to_vec(), force: false })
}

pub fn run_all(dir: &Path) -> RunManifest {
    run(dir, &Stage::ALL).unwrap()
}

/// Every file under `root` by relative path, the manifest excepted (it
/// carries timestamps).
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                if rel != "manifest.json" {
                    out.insert(rel, fs::read(&path).unwrap());
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Differences between a pipeline output directory and the reference
/// outputs; empty when they agree byte for byte.
pub fn diff_with_expected(out: &Path) -> Vec<String> {
    let got = read_tree(out);
    let want = read_tree(&fixture_dir().join("expected"));
    let mut problems = Vec::new();
    for (rel, bytes) in &want {
        match got.get(rel) {
            None => problems.push(format!("missing {rel}")),
            Some(b) if b != bytes => problems.push(format!("differs: {rel}")),
            _ => {}
        }
    }
    problems.extend(got.keys().filter(|k| !want.contains_key(*k)).map(|k| format!("unexpected {k}")));
    problems
}
