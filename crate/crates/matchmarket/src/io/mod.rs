//! File formats and run provenance: market CSV/JSON, matching CSV,
//! key-value configs, and the per-run manifest.

pub mod config;
pub mod kv;
pub mod manifest;
pub mod market_file;
pub mod matching_file;

pub use config::{parse_cost_config, parse_sim_config, CostConfig, SimFileConfig};
pub use kv::{KvError, KvFile};
pub use manifest::{sha256_hex, RunManifest};
pub use market_file::{parse_market_csv, parse_market_json, parse_market_text, MarketFileError};
pub use matching_file::{parse_matching_csv, write_matching_csv, MatchingFileError};
