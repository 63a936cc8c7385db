//! Applying a conversion plan with hash checks and atomic writes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::plan::ConversionPlan;
use crate::error::{Error, Result};
use crate::hash::content_hash;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplySummary {
    pub source: usize,
    pub latex: usize,
    pub skipped: usize,
}

enum Edit<'a> {
    Insert(usize, &'a str),
    Replace(usize, usize, &'a str),
}

impl Edit<'_> {
    fn start(&self) -> usize {
        match self {
            Edit::Insert(at, _) | Edit::Replace(at, _, _) => *at,
        }
    }
}

fn splice(path: &Path, text: &str, edits: &[Edit]) -> Result<String> {
    let mut out = String::with_capacity(text.len() + 256);
    let mut cursor = 0;
    for edit in edits {
        let start = edit.start();
        if start < cursor || start > text.len() || !text.is_char_boundary(start) {
            return Err(Error::Config(format!(
                "{}: conversion edits overlap or fall outside the file",
                path.display()
            )));
        }
        out.push_str(&text[cursor..start]);
        match edit {
            Edit::Insert(_, s) => {
                out.push_str(s);
                cursor = start;
            }
            Edit::Replace(_, end, s) => {
                out.push_str(s);
                cursor = *end;
            }
        }
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}

/// New contents of every file the plan touches, after checking that each
/// file still has the hash seen while planning.
pub fn preview_plan(plan: &ConversionPlan) -> Result<BTreeMap<PathBuf, String>> {
    let mut edits: BTreeMap<&PathBuf, Vec<Edit>> = BTreeMap::new();
    for e in &plan.source_edits {
        edits
            .entry(&e.file)
            .or_default()
            .push(Edit::Insert(e.insert_at, &e.text));
    }
    for e in &plan.latex_edits {
        edits.entry(&e.file).or_default().push(Edit::Replace(
            e.replace_span.0,
            e.replace_span.1,
            &e.replacement,
        ));
    }
    let mut out = BTreeMap::new();
    for (path, mut list) in edits {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if plan.file_hashes.get(path) != Some(&content_hash(text.as_bytes())) {
            return Err(Error::StaleFile(path.clone()));
        }
        list.sort_by_key(Edit::start);
        out.insert(path.clone(), splice(path, &text, &list)?);
    }
    Ok(out)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    if let Ok(meta) = fs::metadata(path) {
        let _ = fs::set_permissions(tmp.path(), meta.permissions());
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Applies `plan`. Every file is checked before anything is written, so a
/// stale file aborts the whole plan.
pub fn apply_plan(plan: &ConversionPlan) -> Result<ApplySummary> {
    let contents = preview_plan(plan)?;
    for (path, text) in &contents {
        write_atomic(path, text)?;
    }
    Ok(ApplySummary {
        source: plan.source_edits.len(),
        latex: plan.latex_edits.len(),
        skipped: plan.skipped.len(),
    })
}
