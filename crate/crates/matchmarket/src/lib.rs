//! Two-sided matching markets: engines, stability audits, ranking-game
//! payoffs, application-season economics, and a seeded Monte Carlo
//! simulator.
//!
//! The library is the product; start with the runnable examples, one per
//! capability:
//!
//! - `gale_shapley`: deferred acceptance from either side of a market
//! - `boston_pool`: the historical tiered priority plan and the blocking
//!   pair it creates
//! - `stability_audit`: finding blocking pairs and enumerating every
//!   stable matching
//! - `payoff_tables`: normal-form tables for the rank/don't-rank game and
//!   the full-list dominance check
//! - `application_costs`: tiered fees, expected interviews, and the
//!   optimal application count
//! - `simulate_market`: the match-probability curve over thousands of
//!   seeded replicas
//! - `escalation`: the application arms race under iterated best response
//!
//! A thin `matchmarket` binary exposes the same capabilities over CSV and
//! key-value files (`match`, `verify`, `payoff`, `cost`, `simulate`); see
//! [`cli::run_cli`].

pub mod cli;
pub mod cost;
pub mod engines;
pub mod io;
pub mod market;
pub mod payoff;
pub mod sim;
pub mod stability;

pub use cost::{
    application_cost, cost_profile, expected_interviews, expected_program_payoff,
    expected_total_spend, optimal_application_count, total_expected_payoff, Budget, BudgetMode,
    Cents, CostSpec, FeeSchedule, FeeTier,
};
pub use engines::{
    boston_pool, boston_pool_traced, enumerate_stable_matchings, gale_shapley, gale_shapley_traced,
    EngineError, PairingOrder, ProposingSide,
};
pub use market::{ApplicantId, MarketInstance, Matching, ProgramId, RawMarket};
pub use payoff::{
    build_payoff_table, check_rank_all_dominance, resolve_and_pay, ActionMode, PayoffSpec,
    PayoffTable, PayoffValue, PlayerId, RankPayoffs, StrategyProfile,
};
pub use sim::{
    escalation_dynamics, simulate_market, CapacityDist, CurvePoint, EscalationRound, MatchCurve,
    ReplicaSummary, Screening, SimConfig, SimError, SimResult,
};
pub use stability::{find_blocking_pairs, is_stable, BlockingPair, StabilityError};
