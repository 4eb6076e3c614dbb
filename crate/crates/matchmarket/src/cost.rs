//! Money and time economics of applying: a tiered cumulative fee schedule,
//! expected payoff per application, budget feasibility, and an exhaustive
//! optimizer for how many programs to apply to.
//!
//! Fees are integer cents so cumulative costs carry no float drift.
//! Expectations (interview counts, payoffs, spend) are f64 in the same
//! cents scale.

use thiserror::Error;

pub type Cents = i64;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("fee schedule needs at least one tier")]
    EmptySchedule,
    #[error("fee tier {index} threshold must exceed the previous threshold")]
    NonIncreasingThreshold { index: usize },
    #[error("only the last fee tier may be open-ended")]
    OpenTierNotLast { index: usize },
    #[error("the last fee tier must be open-ended")]
    BoundedTail,
    #[error("negative fee in tier {index}")]
    NegativeFee { index: usize },
    #[error("{field} is {got}; must lie in [{low}, {high}]")]
    OutOfRange {
        field: &'static str,
        got: f64,
        low: f64,
        high: f64,
    },
    #[error("{field} is negative: {got}")]
    NegativeValue { field: &'static str, got: f64 },
    #[error("rejected payoff {rejected} exceeds interviewed payoff {interviewed}")]
    RejectedAboveInterviewed { interviewed: f64, rejected: f64 },
    #[error("override position 0; positions are 1-based")]
    ZeroPosition,
    #[error("duplicate override for position {0}")]
    DuplicateOverride(u32),
    #[error("negative budget")]
    NegativeBudget,
}

/// One fee tier: applications after the previous tier's threshold up to
/// `up_to` (inclusive; `None` = unbounded) cost `flat` once when the tier
/// is entered plus `per_app` for each application inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeeTier {
    pub up_to: Option<u32>,
    pub flat: Cents,
    pub per_app: Cents,
}

/// Validated cumulative fee schedule. Thresholds strictly increase and the
/// final tier is open-ended, so the cost of any count is defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeeSchedule {
    tiers: Vec<FeeTier>,
}

impl FeeSchedule {
    pub fn new(tiers: Vec<FeeTier>) -> Result<Self, CostError> {
        if tiers.is_empty() {
            return Err(CostError::EmptySchedule);
        }
        let mut prev = 0u32;
        for (index, tier) in tiers.iter().enumerate() {
            if tier.flat < 0 || tier.per_app < 0 {
                return Err(CostError::NegativeFee { index });
            }
            match tier.up_to {
                Some(hi) => {
                    if hi <= prev {
                        return Err(CostError::NonIncreasingThreshold { index });
                    }
                    prev = hi;
                }
                None if index + 1 != tiers.len() => {
                    return Err(CostError::OpenTierNotLast { index });
                }
                None => {}
            }
        }
        if tiers.last().unwrap().up_to.is_some() {
            return Err(CostError::BoundedTail);
        }
        Ok(FeeSchedule { tiers })
    }

    pub fn tiers(&self) -> &[FeeTier] {
        &self.tiers
    }

    /// Cumulative cost of `q` applications. Non-decreasing, zero at zero.
    pub fn cost(&self, q: u32) -> Cents {
        let mut total = 0i64;
        let mut prev = 0u32;
        for tier in &self.tiers {
            if q <= prev {
                break;
            }
            let hi = tier.up_to.unwrap_or(u32::MAX);
            let covered = q.min(hi) - prev;
            if covered > 0 {
                total += tier.flat + tier.per_app * covered as i64;
            }
            prev = hi;
        }
        total
    }
}

/// Replaces the shared per-application parameters for one application
/// position (1-based). Unset fields fall back to the spec's scalars.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PositionOverride {
    pub position: u32,
    pub interview_prob: Option<f64>,
    pub interview_cost_mean: Option<f64>,
    pub interview_time: Option<f64>,
    pub payoff_if_interviewed: Option<f64>,
    pub payoff_if_rejected: Option<f64>,
}

/// Everything the applicant-side economics depend on: the fee schedule and
/// the per-application scalars (interview probability, mean interview cost,
/// time per interview, expected payoff conditional on interviewing or not).
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub fees: FeeSchedule,
    pub interview_prob: f64,
    pub interview_cost_mean: f64,
    pub interview_time: f64,
    pub payoff_if_interviewed: f64,
    pub payoff_if_rejected: f64,
    pub overrides: Vec<PositionOverride>,
}

impl CostSpec {
    pub fn validate(&self) -> Result<(), CostError> {
        if !(0.0..=1.0).contains(&self.interview_prob) {
            return Err(CostError::OutOfRange {
                field: "interview_prob",
                got: self.interview_prob,
                low: 0.0,
                high: 1.0,
            });
        }
        for (field, value) in [
            ("interview_cost_mean", self.interview_cost_mean),
            ("interview_time", self.interview_time),
            ("payoff_if_rejected", self.payoff_if_rejected),
        ] {
            if value < 0.0 {
                return Err(CostError::NegativeValue { field, got: value });
            }
        }
        if self.payoff_if_interviewed < self.payoff_if_rejected {
            return Err(CostError::RejectedAboveInterviewed {
                interviewed: self.payoff_if_interviewed,
                rejected: self.payoff_if_rejected,
            });
        }
        let mut seen = Vec::new();
        for o in &self.overrides {
            if o.position == 0 {
                return Err(CostError::ZeroPosition);
            }
            if seen.contains(&o.position) {
                return Err(CostError::DuplicateOverride(o.position));
            }
            seen.push(o.position);
            if let Some(p) = o.interview_prob {
                if !(0.0..=1.0).contains(&p) {
                    return Err(CostError::OutOfRange {
                        field: "override interview_prob",
                        got: p,
                        low: 0.0,
                        high: 1.0,
                    });
                }
            }
        }
        Ok(())
    }

    fn params_at(&self, position: u32) -> Params {
        let base = Params {
            prob: self.interview_prob,
            cost: self.interview_cost_mean,
            time: self.interview_time,
            pay_interviewed: self.payoff_if_interviewed,
            pay_rejected: self.payoff_if_rejected,
        };
        match self.overrides.iter().find(|o| o.position == position) {
            None => base,
            Some(o) => Params {
                prob: o.interview_prob.unwrap_or(base.prob),
                cost: o.interview_cost_mean.unwrap_or(base.cost),
                time: o.interview_time.unwrap_or(base.time),
                pay_interviewed: o.payoff_if_interviewed.unwrap_or(base.pay_interviewed),
                pay_rejected: o.payoff_if_rejected.unwrap_or(base.pay_rejected),
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Params {
    prob: f64,
    cost: f64,
    time: f64,
    pay_interviewed: f64,
    pay_rejected: f64,
}

impl Params {
    /// Expected value of one application: interview with probability p and
    /// collect the interviewed payoff minus the interview cost, otherwise
    /// collect the rejected payoff. Application fees are NOT included; they
    /// accrue through the schedule, not per application.
    fn expected_payoff(&self) -> f64 {
        self.prob * (self.pay_interviewed - self.cost) + (1.0 - self.prob) * self.pay_rejected
    }
}

/// Money and time available for the whole application season.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub money: Cents,
    pub time: f64,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget {
        money: i64::MAX,
        time: f64::INFINITY,
    };

    pub fn validate(&self) -> Result<(), CostError> {
        if self.money < 0 || self.time < 0.0 {
            return Err(CostError::NegativeBudget);
        }
        Ok(())
    }
}

/// How interview expenses count against the budget: weighted by interview
/// probability (the planning default) or in full for every application, as
/// if every interview materializes. The mode never changes expected VALUE,
/// only feasibility.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BudgetMode {
    #[default]
    Expected,
    WorstCase,
}

/// Cumulative application fees for `q` applications.
pub fn application_cost(q: u32, spec: &CostSpec) -> Cents {
    spec.fees.cost(q)
}

/// Expected value of one application at the spec's shared scalars.
pub fn expected_program_payoff(spec: &CostSpec) -> f64 {
    Params {
        prob: spec.interview_prob,
        cost: spec.interview_cost_mean,
        time: spec.interview_time,
        pay_interviewed: spec.payoff_if_interviewed,
        pay_rejected: spec.payoff_if_rejected,
    }
    .expected_payoff()
}

/// Expected number of interviews from `q` applications.
pub fn expected_interviews(q: u32, spec: &CostSpec) -> f64 {
    (1..=q).map(|i| spec.params_at(i).prob).sum()
}

fn interview_weight(p: f64, mode: BudgetMode) -> f64 {
    match mode {
        BudgetMode::Expected => p,
        BudgetMode::WorstCase => 1.0,
    }
}

/// Application fees plus interview expenses under the given budget mode.
pub fn expected_total_spend(q: u32, spec: &CostSpec, mode: BudgetMode) -> f64 {
    let interviews: f64 = (1..=q)
        .map(|i| {
            let p = spec.params_at(i);
            interview_weight(p.prob, mode) * p.cost
        })
        .sum();
    application_cost(q, spec) as f64 + interviews
}

fn time_spend(q: u32, spec: &CostSpec, mode: BudgetMode) -> f64 {
    (1..=q)
        .map(|i| {
            let p = spec.params_at(i);
            interview_weight(p.prob, mode) * p.time
        })
        .sum()
}

/// Net expected value of applying to `q` programs, and whether `q` fits the
/// budget. Value is the summed per-application expected payoff minus the
/// cumulative fees. Feasibility compares fee-plus-interview spend against
/// the money budget and interview hours against the time budget; both
/// spends are non-decreasing in `q`, so feasibility is monotone.
pub fn total_expected_payoff(
    q: u32,
    spec: &CostSpec,
    budget: &Budget,
    mode: BudgetMode,
) -> (f64, bool) {
    let gross: f64 = (1..=q).map(|i| spec.params_at(i).expected_payoff()).sum();
    let value = gross - application_cost(q, spec) as f64;
    let feasible = expected_total_spend(q, spec, mode) <= budget.money as f64
        && time_spend(q, spec, mode) <= budget.time;
    (value, feasible)
}

/// Scans q = 0..=q_max over the feasible counts and returns the value
/// maximizer, ties going to the smaller count. Zero applications are
/// always feasible, so there is always an answer.
pub fn optimal_application_count(
    spec: &CostSpec,
    budget: &Budget,
    q_max: u32,
    mode: BudgetMode,
) -> (u32, f64) {
    let mut best = (0u32, 0.0f64);
    for q in 1..=q_max {
        let (value, feasible) = total_expected_payoff(q, spec, budget, mode);
        if feasible && value > best.1 {
            best = (q, value);
        }
    }
    best
}

/// One row of the per-count cost breakdown emitted by reports.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub q: u32,
    pub fees: Cents,
    pub expected_interviews: f64,
    pub expected_spend: f64,
    pub value: f64,
    pub feasible: bool,
}

/// The full breakdown for q = 0..=q_max.
pub fn cost_profile(
    spec: &CostSpec,
    budget: &Budget,
    q_max: u32,
    mode: BudgetMode,
) -> Vec<CostRow> {
    (0..=q_max)
        .map(|q| {
            let (value, feasible) = total_expected_payoff(q, spec, budget, mode);
            CostRow {
                q,
                fees: application_cost(q, spec),
                expected_interviews: expected_interviews(q, spec),
                expected_spend: expected_total_spend(q, spec, mode),
                value,
                feasible,
            }
        })
        .collect()
}
