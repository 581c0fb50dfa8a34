#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tdff_core::Config;

/// Writes a two-stream config under `dir` and returns its path.
pub fn write_config(dir: &Path, out: &str, subjects: usize, sigma: f64, extra: &str) -> PathBuf {
    let text = format!(
        r#"[data]
metadata = "data/metadata.csv"
streams = [
    {{ name = "A", dim = 16, path = "data/a.tdff" }},
    {{ name = "B", dim = 16, path = "data/b.tdff" }},
]
{extra}
[output]
dir = "{out}"

[eval]
far_targets = [0.01, 0.1]
fpir_targets = [0.1]
ranks = [1, 3]

[synthetic]
n_subjects = {subjects}
media_per_subject = 6
frames_per_video = 3
dim = 16
noise_sigma = {sigma}
seed = 11
n_splits = 2
"#
    );
    let path = dir.join(format!("{out}.toml"));
    std::fs::write(&path, text).unwrap();
    path
}

pub fn load(path: &Path) -> Config {
    Config::load(path).unwrap()
}

/// Relative path → contents for every file below `root`.
pub fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}
