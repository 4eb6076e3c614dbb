//! Run manifests: a JSON record emitted next to every run's outputs so a
//! result can be traced back to exact inputs. Input files are identified
//! by SHA-256 digest; the effective settings snapshot covers values that
//! came from defaults or flags rather than files. The duration field is
//! wall-clock and is the one field exempt from the byte-identical rerun
//! guarantee.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    /// Path as given on the command line → SHA-256 of the file bytes.
    pub inputs: BTreeMap<String, String>,
    /// Effective settings after defaults and flag overrides.
    pub settings: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_ms: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            inputs: BTreeMap::new(),
            settings: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_ms: 0,
        }
    }

    pub fn record_input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.insert(path.to_string(), sha256_hex(bytes));
    }

    pub fn record_setting(&mut self, key: &str, value: impl ToString) {
        self.settings.insert(key.to_string(), value.to_string());
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
