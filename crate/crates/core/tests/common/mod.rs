#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use archforge_core::build::{Project, ProjectConfig};

pub const MYNAT: &str = include_str!("../fixtures/mynat/Example.lean");
pub const ADD_COMM: &str = include_str!("../fixtures/addcomm/AddComm.lean");

/// A project in a temporary directory, using the default configuration.
pub struct Scratch {
    pub dir: tempfile::TempDir,
    pub config: ProjectConfig,
}

impl Scratch {
    pub fn new(files: &[(&str, &str)]) -> Scratch {
        let s = Scratch {
            dir: tempfile::tempdir().unwrap(),
            config: ProjectConfig::default(),
        };
        for (rel, text) in files {
            s.write(rel, text);
        }
        s
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root().join(rel)
    }

    pub fn write(&self, rel: &str, text: &str) {
        let p = self.path(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path(rel)).unwrap()
    }

    pub fn remove(&self, rel: &str) {
        fs::remove_file(self.path(rel)).unwrap();
    }

    pub fn project(&self) -> Project {
        Project::new(self.root(), self.config.clone()).unwrap()
    }

    pub fn out(&self) -> PathBuf {
        self.project().out_dir()
    }
}

/// Every file under `dir`, keyed by relative path with `/` separators.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.unwrap();
        if entry.file_type().is_file() {
            let rel = entry.path().strip_prefix(dir).unwrap();
            let key = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            out.insert(key, fs::read(entry.path()).unwrap());
        }
    }
    out
}

/// Names of files that differ between two trees.
pub fn tree_diff(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter(|k| a.get(*k) != b.get(*k))
        .cloned()
        .collect()
}
