//! Line-oriented `key = value` configuration files. `#` starts a comment,
//! blank lines are skipped, keys may repeat (fee tiers, overrides), and
//! numeric values accept plain fractions like `1/7` so probabilities stay
//! exact in the source file.

use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct KvError {
    pub line: u32,
    pub message: String,
}

fn err(line: u32, message: impl Into<String>) -> KvError {
    KvError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: u32,
}

/// A parsed config file: ordered entries plus positioned typed accessors.
#[derive(Debug, Clone, Default)]
pub struct KvFile {
    entries: Vec<KvEntry>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx as u32 + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(
                    line,
                    format!("expected `key = value`, got {content:?}"),
                ));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(err(line, "empty key before `=`"));
            }
            entries.push(KvEntry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(KvFile { entries })
    }

    pub fn entries(&self) -> &[KvEntry] {
        &self.entries
    }

    /// Last occurrence wins for scalar keys.
    pub fn get(&self, key: &str) -> Option<&KvEntry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a KvEntry> {
        self.entries.iter().filter(move |e| e.key == key)
    }

    /// Errors on keys outside the allowed set, naming the line. Catches
    /// typos that would otherwise silently fall back to defaults.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), KvError> {
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        for e in &self.entries {
            if !allowed.contains(e.key.as_str()) {
                return Err(err(e.line, format!("unknown key {:?}", e.key)));
            }
        }
        Ok(())
    }

    pub fn f64_value(&self, key: &str) -> Result<Option<f64>, KvError> {
        self.get(key)
            .map(|e| parse_f64(&e.value, e.line))
            .transpose()
    }

    pub fn u32_value(&self, key: &str) -> Result<Option<u32>, KvError> {
        self.get(key)
            .map(|e| {
                e.value.parse::<u32>().map_err(|_| {
                    err(
                        e.line,
                        format!("expected a non-negative integer, got {:?}", e.value),
                    )
                })
            })
            .transpose()
    }

    pub fn u64_value(&self, key: &str) -> Result<Option<u64>, KvError> {
        self.get(key)
            .map(|e| {
                e.value.parse::<u64>().map_err(|_| {
                    err(
                        e.line,
                        format!("expected a non-negative integer, got {:?}", e.value),
                    )
                })
            })
            .transpose()
    }

    pub fn i64_value(&self, key: &str) -> Result<Option<i64>, KvError> {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<i64>()
                    .map_err(|_| err(e.line, format!("expected an integer, got {:?}", e.value)))
            })
            .transpose()
    }
}

/// Accepts decimals, `a/b` fractions, and the words `inf`/`unlimited`.
pub fn parse_f64(value: &str, line: u32) -> Result<f64, KvError> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("unlimited") {
        return Ok(f64::INFINITY);
    }
    if let Some((num, den)) = v.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| err(line, format!("bad fraction numerator {:?}", num.trim())))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| err(line, format!("bad fraction denominator {:?}", den.trim())))?;
        if d == 0.0 {
            return Err(err(line, "fraction denominator is zero"));
        }
        return Ok(n / d);
    }
    v.parse()
        .map_err(|_| err(line, format!("expected a number, got {v:?}")))
}
