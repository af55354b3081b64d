//! Signature database: the mined patterns plus the parameters they were
//! learned with, in a line-oriented text format.
//!
//! ```text
//! malsig-db
//! version 1
//! threshold 0.6
//! height 2
//! patterns 2
//! CopyFile(1(0))
//! GetModuleFileName(1(0),2>1(CopyFile))
//! ```
//!
//! Patterns are canonical renderings in ascending order, one per line. The
//! automaton is rebuilt from them on load.

use std::collections::BTreeSet;

use thiserror::Error;

use super::Helta;
use crate::trees::{parse_scdt, Scdt};

pub const DB_VERSION: u32 = 1;

const MAGIC: &str = "malsig-db";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("signature database line {line}: {message}")]
pub struct DbError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignatureDb {
    pub threshold: f64,
    pub height: usize,
    pub patterns: BTreeSet<Scdt>,
}

impl SignatureDb {
    pub fn automaton(&self) -> Helta {
        Helta::infer(&self.patterns)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{MAGIC}\nversion {DB_VERSION}\nthreshold {}\nheight {}\npatterns {}\n",
            self.threshold,
            self.height,
            self.patterns.len()
        );
        for p in &self.patterns {
            s.push_str(&p.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<SignatureDb, DbError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| DbError { line: 0, message: format!("unexpected end of file, expected {what}") })
        };
        let err = |line: usize, message: String| DbError { line, message };

        let (n, magic) = next("header")?;
        if magic != MAGIC {
            return Err(err(n, format!("expected `{MAGIC}` header")));
        }
        let field = |(n, l): (usize, &str), key: &str| -> Result<String, DbError> {
            l.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| err(n, format!("expected `{key} <value>`")))
        };
        let v = next("version")?;
        let version: u32 = field(v, "version")?.parse().map_err(|_| err(v.0, "invalid version".into()))?;
        if version != DB_VERSION {
            return Err(err(v.0, format!("unsupported version {version}")));
        }
        let t = next("threshold")?;
        let threshold: f64 = field(t, "threshold")?.parse().map_err(|_| err(t.0, "invalid threshold".into()))?;
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(err(t.0, format!("threshold {threshold} outside (0, 1]")));
        }
        let h = next("height")?;
        let height: usize = field(h, "height")?.parse().map_err(|_| err(h.0, "invalid height".into()))?;
        let c = next("patterns")?;
        let count: usize = field(c, "patterns")?.parse().map_err(|_| err(c.0, "invalid pattern count".into()))?;

        let mut patterns = BTreeSet::new();
        let mut last: Option<Scdt> = None;
        for _ in 0..count {
            let (n, l) = next("pattern")?;
            let p = parse_scdt(l).map_err(|e| err(n, e.to_string()))?;
            if p.to_string() != l {
                return Err(err(n, "pattern is not in canonical form".into()));
            }
            if last.as_ref().is_some_and(|q| *q >= p) {
                return Err(err(n, "patterns are not strictly ascending".into()));
            }
            last = Some(p.clone());
            patterns.insert(p);
        }
        if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(err(n, "trailing content after the last pattern".into()));
        }
        Ok(SignatureDb { threshold, height, patterns })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db() -> SignatureDb {
        SignatureDb {
            threshold: 0.6,
            height: 2,
            patterns: ["GetModuleFileName(1(0),2>1(CopyFile))", "CopyFile(1(0))"]
                .iter()
                .map(|s| parse_scdt(s).unwrap())
                .collect(),
        }
    }

    #[test]
    fn round_trip() {
        let d = db();
        let text = d.to_text();
        assert_eq!(
            text,
            "malsig-db\nversion 1\nthreshold 0.6\nheight 2\npatterns 2\nCopyFile(1(0))\nGetModuleFileName(1(0),2>1(CopyFile))\n"
        );
        assert_eq!(SignatureDb::from_text(&text).unwrap(), d);
    }

    #[test]
    fn corrupt_inputs() {
        let good = db().to_text();
        let cases = [
            String::new(),
            good.replace("malsig-db", "other"),
            good.replace("version 1", "version 9"),
            good.replace("threshold 0.6", "threshold 1.5"),
            good.replace("patterns 2", "patterns 3"),
            good.replace("CopyFile(1(0))\n", "CopyFile(1(0)\n"),
            good.replace("CopyFile(1(0))\nGetModuleFileName(1(0),2>1(CopyFile))", "GetModuleFileName(1(0),2>1(CopyFile))\nCopyFile(1(0))"),
            format!("{good}junk\n"),
        ];
        for c in cases {
            assert!(SignatureDb::from_text(&c).is_err(), "{c:?}");
        }
    }

    #[test]
    fn empty_pattern_set() {
        let d = SignatureDb { threshold: 1.0, height: 0, patterns: BTreeSet::new() };
        let back = SignatureDb::from_text(&d.to_text()).unwrap();
        assert_eq!(back, d);
        assert!(back.automaton().patterns().is_empty());
    }
}
