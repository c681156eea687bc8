//! Checks the example corpus against its manifest and frozen golden outputs.
//!
//! `manifest.toml` lists one `[[entry]]` per model file with the expected
//! diagnostics counts, precedence edges and chronology count. Golden files
//! live in `golden/` and are named `<entry>.<artifact>`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::changes::enumerate_chronologies;
use crate::document::Document;
use crate::dsl::{parse_named, Parsed};
use crate::export::{to_dot, to_json, trace_to_json, ExportOptions, Target};
use crate::report;
use crate::sim::simulate;
use crate::time::TimeValue;

/// Horizon used for corpus simulations.
pub const HORIZON: TimeValue = TimeValue::from_micros(1_000_000);

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(rename = "entry")]
    pub entries: Vec<CorpusEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub model: String,
    pub errors: usize,
    pub warnings: usize,
    /// Edges written as `C1 -> C3 (flow)`.
    pub precedence: Vec<String>,
    pub chronologies: u64,
    #[serde(default)]
    pub scenarios: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad manifest: {0}")]
    Manifest(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryReport {
    pub name: String,
    pub failures: Vec<String>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusReport {
    pub entries: Vec<EntryReport>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(EntryReport::passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let status = if e.passed() { "pass" } else { "FAIL" };
            out.push_str(&format!("{status} {}\n", e.name));
            for f in &e.failures {
                out.push_str(&format!("  {f}\n"));
            }
        }
        out
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    let text = read(&dir.join("manifest.toml"))?;
    toml::from_str(&text).map_err(|e| CorpusError::Manifest(e.to_string()))
}

/// Parses an entry's model file.
pub fn load_entry(dir: &Path, entry: &CorpusEntry) -> Result<Result<Parsed, String>, CorpusError> {
    let text = read(&dir.join(&entry.model))?;
    Ok(parse_named(&text, &entry.model).map_err(|e| e.to_string()))
}

/// Every golden artifact of an entry as `(file name, content)`.
pub fn render_goldens(entry: &CorpusEntry, doc: &Document) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let name = &entry.name;
    for (target, suffix) in [
        (Target::Static, "static.dot"),
        (Target::Dynamic, "dynamic.dot"),
        (Target::Behavior, "behavior.dot"),
    ] {
        let opts = ExportOptions {
            target,
            show_anchors: true,
            ..Default::default()
        };
        let text = to_dot(doc, &opts).unwrap_or_else(|e| format!("error: {e}\n"));
        out.push((format!("{name}.{suffix}"), text));
    }
    out.push((format!("{name}.json"), to_json(doc)));
    let order = doc
        .precedence(false)
        .map(|dag| report::order(&dag))
        .unwrap_or_else(|e| format!("error: {e}\n"));
    out.push((format!("{name}.order.txt"), order));
    let chron = doc
        .precedence(false)
        .map_err(|e| e.to_string())
        .and_then(|dag| enumerate_chronologies(&dag, 1000).map_err(|e| e.to_string()))
        .map(|c| report::chronologies(&c))
        .unwrap_or_else(|e| format!("error: {e}\n"));
    out.push((format!("{name}.chronologies.txt"), chron));
    for scenario in &entry.scenarios {
        let run = doc
            .behavior_model(false)
            .map_err(|e| e.to_string())
            .and_then(|b| {
                let s = doc
                    .scenario(scenario)
                    .ok_or_else(|| format!("no scenario `{scenario}`"))?;
                simulate(&b, &doc.dynamic, &doc.constraints, s, HORIZON).map_err(|e| e.to_string())
            });
        match run {
            Ok(trace) => {
                out.push((format!("{name}.{scenario}.trace.txt"), trace.to_text()));
                out.push((
                    format!("{name}.{scenario}.trace.json"),
                    trace_to_json(&trace),
                ));
            }
            Err(e) => out.push((
                format!("{name}.{scenario}.trace.txt"),
                format!("error: {e}\n"),
            )),
        }
    }
    out
}

fn check_entry(dir: &Path, entry: &CorpusEntry) -> Result<EntryReport, CorpusError> {
    let mut failures = Vec::new();
    let parsed = match load_entry(dir, entry)? {
        Ok(p) => p,
        Err(e) => {
            return Ok(EntryReport {
                name: entry.name.clone(),
                failures: vec![format!("does not parse: {e}")],
            })
        }
    };
    let doc = &parsed.document;

    let (errors, warnings) = (
        parsed.warnings.error_count(),
        parsed.warnings.warning_count(),
    );
    if (errors, warnings) != (entry.errors, entry.warnings) {
        failures.push(format!(
            "diagnostics: expected {} errors, {} warnings; got {errors}, {warnings}",
            entry.errors, entry.warnings
        ));
    }

    match doc.precedence(false) {
        Ok(dag) => {
            let got: Vec<String> = dag
                .edges()
                .iter()
                .map(|e| format!("{} -> {} ({})", e.before, e.after, e.cause))
                .collect();
            let mut want = entry.precedence.clone();
            want.sort();
            let mut got_sorted = got.clone();
            got_sorted.sort();
            if want != got_sorted {
                failures.push(format!("precedence: expected {want:?}, got {got:?}"));
            }
            match enumerate_chronologies(&dag, 1) {
                Ok(c) if c.total == entry.chronologies => {}
                Ok(c) => failures.push(format!(
                    "chronologies: expected {}, got {}",
                    entry.chronologies, c.total
                )),
                Err(e) => failures.push(format!("chronologies: {e}")),
            }
        }
        Err(e) => failures.push(format!("precedence: {e}")),
    }

    for (file, content) in render_goldens(entry, doc) {
        let path = dir.join("golden").join(&file);
        match fs::read_to_string(&path) {
            Ok(golden) if golden == content => {}
            Ok(_) => failures.push(format!("golden {file} differs")),
            Err(_) => failures.push(format!("golden {file} missing")),
        }
    }
    Ok(EntryReport {
        name: entry.name.clone(),
        failures,
    })
}

/// Runs every manifest entry against its expectations and goldens.
pub fn corpus_check(dir: &Path) -> Result<CorpusReport, CorpusError> {
    let manifest = load_manifest(dir)?;
    let entries = manifest
        .entries
        .iter()
        .map(|e| check_entry(dir, e))
        .collect::<Result<_, _>>()?;
    Ok(CorpusReport { entries })
}

/// Regenerates all golden files from the model files.
pub fn bless(dir: &Path) -> Result<(), CorpusError> {
    let manifest = load_manifest(dir)?;
    let golden = dir.join("golden");
    fs::create_dir_all(&golden).map_err(|source| CorpusError::Io {
        path: golden.clone(),
        source,
    })?;
    for entry in &manifest.entries {
        let parsed = load_entry(dir, entry)?.map_err(CorpusError::Manifest)?;
        for (file, content) in render_goldens(entry, &parsed.document) {
            let path = golden.join(file);
            fs::write(&path, content).map_err(|source| CorpusError::Io { path, source })?;
        }
    }
    Ok(())
}
