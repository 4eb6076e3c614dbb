//! Typed loaders for the two config kinds: application-season cost files
//! and simulation files. A simulation file embeds the full cost block so
//! escalation rounds can price applications. All money keys are integer
//! cents; probabilities accept fractions.

use super::kv::{parse_f64, KvError, KvFile};
use crate::cost::{Budget, CostSpec, FeeSchedule, FeeTier, PositionOverride};
use crate::sim::{CapacityDist, Screening, SimConfig};

const COST_KEYS: &[&str] = &[
    "tier",
    "interview_prob",
    "interview_cost_cents",
    "interview_hours",
    "payoff_interviewed_cents",
    "payoff_rejected_cents",
    "override",
    "programs",
    "budget_cents",
    "budget_hours",
];

const SIM_KEYS: &[&str] = &[
    "applicants",
    "capacity",
    "applications_per_applicant",
    "screening",
    "correlation",
    "replicas",
    "seed",
    "rounds",
];

fn err(line: u32, message: impl Into<String>) -> KvError {
    KvError {
        line,
        message: message.into(),
    }
}

/// Everything the `cost` subcommand needs: the season economics, the
/// budget, and how far the optimizer scan runs.
#[derive(Debug, Clone)]
pub struct CostConfig {
    pub spec: CostSpec,
    pub budget: Budget,
    pub programs: u32,
}

fn parse_tier(value: &str, line: u32) -> Result<FeeTier, KvError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(err(
            line,
            format!("tier wants `<up_to|open> <flat_cents> <per_app_cents>`, got {value:?}"),
        ));
    }
    let up_to = if parts[0].eq_ignore_ascii_case("open") {
        None
    } else {
        Some(
            parts[0]
                .parse::<u32>()
                .map_err(|_| err(line, format!("bad tier bound {:?}", parts[0])))?,
        )
    };
    let flat = parts[1]
        .parse()
        .map_err(|_| err(line, format!("bad flat fee {:?}", parts[1])))?;
    let per_app = parts[2]
        .parse()
        .map_err(|_| err(line, format!("bad per-application fee {:?}", parts[2])))?;
    Ok(FeeTier {
        up_to,
        flat,
        per_app,
    })
}

fn parse_override(value: &str, line: u32) -> Result<PositionOverride, KvError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(err(
            line,
            format!("override wants `<position> <field> <value>`, got {value:?}"),
        ));
    }
    let position = parts[0]
        .parse()
        .map_err(|_| err(line, format!("bad override position {:?}", parts[0])))?;
    let v = parse_f64(parts[2], line)?;
    let mut o = PositionOverride {
        position,
        interview_prob: None,
        interview_cost_mean: None,
        interview_time: None,
        payoff_if_interviewed: None,
        payoff_if_rejected: None,
    };
    match parts[1] {
        "interview_prob" => o.interview_prob = Some(v),
        "interview_cost_cents" => o.interview_cost_mean = Some(v),
        "interview_hours" => o.interview_time = Some(v),
        "payoff_interviewed_cents" => o.payoff_if_interviewed = Some(v),
        "payoff_rejected_cents" => o.payoff_if_rejected = Some(v),
        other => return Err(err(line, format!("unknown override field {other:?}"))),
    }
    Ok(o)
}

fn cost_block(kv: &KvFile, default_prob: f64) -> Result<(CostSpec, Budget), KvError> {
    let mut tiers = Vec::new();
    for e in kv.get_all("tier") {
        tiers.push(parse_tier(&e.value, e.line)?);
    }
    if tiers.is_empty() {
        tiers.push(FeeTier {
            up_to: None,
            flat: 0,
            per_app: 0,
        });
    }
    let fees = FeeSchedule::new(tiers).map_err(|e| {
        err(
            kv.get_all("tier").last().map_or(0, |t| t.line),
            e.to_string(),
        )
    })?;
    let mut overrides = Vec::new();
    for e in kv.get_all("override") {
        overrides.push(parse_override(&e.value, e.line)?);
    }
    let spec = CostSpec {
        fees,
        interview_prob: kv.f64_value("interview_prob")?.unwrap_or(default_prob),
        interview_cost_mean: kv.f64_value("interview_cost_cents")?.unwrap_or(0.0),
        interview_time: kv.f64_value("interview_hours")?.unwrap_or(0.0),
        payoff_if_interviewed: kv.f64_value("payoff_interviewed_cents")?.unwrap_or(0.0),
        payoff_if_rejected: kv.f64_value("payoff_rejected_cents")?.unwrap_or(0.0),
        overrides,
    };
    let budget = Budget {
        money: kv.i64_value("budget_cents")?.unwrap_or(i64::MAX),
        time: kv.f64_value("budget_hours")?.unwrap_or(f64::INFINITY),
    };
    Ok((spec, budget))
}

pub fn parse_cost_config(text: &str) -> Result<CostConfig, KvError> {
    let kv = KvFile::parse(text)?;
    kv.check_keys(COST_KEYS)?;
    let (spec, budget) = cost_block(&kv, 0.5)?;
    let programs = kv
        .u32_value("programs")?
        .ok_or_else(|| err(0, "missing required key `programs` (optimizer scan bound)"))?;
    Ok(CostConfig {
        spec,
        budget,
        programs,
    })
}

/// A simulation file: the market draw parameters plus an embedded cost
/// block (used by escalation; defaults to free applications with a
/// nominal match payoff when omitted).
#[derive(Debug, Clone)]
pub struct SimFileConfig {
    pub sim: SimConfig,
    pub spec: CostSpec,
    pub budget: Budget,
    pub rounds: u32,
}

fn parse_capacity(value: &str, line: u32) -> Result<CapacityDist, KvError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let nums: Result<Vec<u32>, _> = parts.iter().map(|p| p.parse::<u32>()).collect();
    match nums
        .map_err(|_| err(line, format!("bad capacity {value:?}")))?
        .as_slice()
    {
        [c] => Ok(CapacityDist::Fixed(*c)),
        [lo, hi] => Ok(CapacityDist::UniformInclusive(*lo, *hi)),
        _ => Err(err(line, "capacity wants one seat count or `<lo> <hi>`")),
    }
}

fn parse_screening(value: &str, line: u32) -> Result<Screening, KvError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    match parts.as_slice() {
        ["bernoulli", p] => Ok(Screening::Bernoulli(parse_f64(p, line)?)),
        ["topk", k] => {
            Ok(Screening::TopK(k.parse().map_err(|_| {
                err(line, format!("bad top-k count {k:?}"))
            })?))
        }
        _ => Err(err(
            line,
            format!("screening wants `bernoulli <p>` or `topk <k>`, got {value:?}"),
        )),
    }
}

pub fn parse_sim_config(text: &str) -> Result<SimFileConfig, KvError> {
    let kv = KvFile::parse(text)?;
    let allowed: Vec<&str> = SIM_KEYS.iter().chain(COST_KEYS.iter()).copied().collect();
    kv.check_keys(&allowed)?;

    let require = |key: &str| {
        kv.get(key)
            .ok_or_else(|| err(0, format!("missing required key `{key}`")))
    };
    let applicants =
        require("applicants").and_then(|_| Ok(kv.u32_value("applicants")?.unwrap()))?;
    let programs = require("programs").and_then(|_| Ok(kv.u32_value("programs")?.unwrap()))?;
    let q = require("applications_per_applicant")
        .and_then(|_| Ok(kv.u32_value("applications_per_applicant")?.unwrap()))?;
    let cap = require("capacity").and_then(|e| parse_capacity(&e.value, e.line))?;
    let screening = require("screening").and_then(|e| parse_screening(&e.value, e.line))?;

    let default_prob = match screening {
        Screening::Bernoulli(p) => p,
        Screening::TopK(_) => 0.5,
    };
    let (spec, budget) = cost_block(&kv, default_prob)?;
    let spec = CostSpec {
        payoff_if_interviewed: if kv.get("payoff_interviewed_cents").is_some() {
            spec.payoff_if_interviewed
        } else {
            100_000.0
        },
        ..spec
    };

    Ok(SimFileConfig {
        sim: SimConfig {
            applicants,
            programs,
            capacity: cap,
            applications_per_applicant: q,
            screening,
            correlation: kv.f64_value("correlation")?.unwrap_or(0.5),
            replicas: kv.u32_value("replicas")?.unwrap_or(1_000),
            seed: kv.u64_value("seed")?.unwrap_or(0),
        },
        spec,
        budget,
        rounds: kv.u32_value("rounds")?.unwrap_or(5),
    })
}
