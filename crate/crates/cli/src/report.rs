//! Run reports: one row per input file plus aggregate counts, printed as
//! text or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct FileRow {
    pub file: String,
    pub trees: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extract_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Totals {
    pub files: usize,
    pub trees: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patterns: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub malicious: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benign: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub false_positives: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub false_negatives: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extract_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub mode: &'static str,
    pub files: Vec<FileRow>,
    pub totals: Totals,
}

impl RunReport {
    pub fn new(mode: &'static str, files: Vec<FileRow>) -> Self {
        let totals = Totals {
            files: files.len(),
            trees: files.iter().map(|f| f.trees).sum(),
            extract_ms: if files.is_empty() { None } else { files.iter().map(|f| f.extract_ms).sum() },
            ..Totals::default()
        };
        RunReport { mode, files, totals }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for f in &self.files {
            match (f.verdict, &f.witness) {
                (Some(v), Some(w)) => writeln!(s, "{v} {} witness={w}", f.file),
                (Some(v), None) => writeln!(s, "{v} {}", f.file),
                (None, _) => writeln!(s, "{} trees={}", f.file, f.trees),
            }
            .unwrap();
            if let Some(ms) = f.extract_ms {
                writeln!(s, "  extracted {} trees in {ms:.2} ms", f.trees).unwrap();
            }
        }
        let t = &self.totals;
        let mut summary = format!("files={} trees={}", t.files, t.trees);
        let extra = [
            ("patterns", t.patterns),
            ("malicious", t.malicious),
            ("benign", t.benign),
            ("false_positives", t.false_positives),
            ("false_negatives", t.false_negatives),
        ];
        for (k, v) in extra {
            if let Some(v) = v {
                write!(summary, " {k}={v}").unwrap();
            }
        }
        if let Some(ms) = t.extract_ms {
            write!(summary, " extract_ms={ms:.2}").unwrap();
        }
        writeln!(s, "{summary}").unwrap();
        s
    }
}

/// Label manifest: a tab-separated `file<TAB>label` table with a header
/// row. Paths are relative to the manifest's directory.
pub struct Labels {
    by_path: BTreeMap<PathBuf, String>,
}

impl Labels {
    pub fn load(path: &Path) -> Result<Labels> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut by_path = BTreeMap::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let Some((file, label)) = line.split_once('\t') else {
                bail!("{}: line {}: expected `file<TAB>label`", path.display(), i + 1);
            };
            let label = label.trim();
            if label != "malicious" && label != "benign" {
                bail!("{}: line {}: unknown label `{label}`", path.display(), i + 1);
            }
            by_path.insert(normalize(&base.join(file)), label.to_string());
        }
        Ok(Labels { by_path })
    }

    pub fn get(&self, file: &Path) -> Option<&str> {
        self.by_path.get(&normalize(file)).map(String::as_str)
    }
}

fn normalize(p: &Path) -> PathBuf {
    std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf())
}
