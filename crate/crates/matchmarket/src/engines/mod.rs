//! Matching engines: deferred acceptance over strict lists, the tiered
//! diagonal-order pool plan, and an exhaustive stable-matching enumerator
//! used as a test oracle.

mod boston_pool;
mod enumerate;
mod gale_shapley;
mod trace;

pub use boston_pool::{boston_pool, boston_pool_traced, PairingOrder};
pub use enumerate::{
    enumerate_stable_matchings, enumerate_stable_matchings_bounded, DEFAULT_ENUMERATION_BOUND,
};
pub use gale_shapley::{gale_shapley, gale_shapley_traced};
pub use trace::{render_trace, TraceEvent};

use thiserror::Error;

/// Which side issues proposals in deferred acceptance. The proposing side
/// receives its side-optimal stable matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposingSide {
    Applicants,
    Programs,
}


#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("deferred acceptance requires strict program lists; program `{0}` uses tiers")]
    TieredProgram(String),
    #[error("the pool plan requires tiered program lists; program `{0}` uses a strict list")]
    StrictProgram(String),
    #[error(
        "instance too large to enumerate: about {estimate} candidate assignments exceeds the bound {bound}"
    )]
    TooLarge { estimate: u64, bound: u64 },
}
