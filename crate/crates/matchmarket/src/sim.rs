//! Seeded Monte Carlo over synthetic markets. Each replica draws a market
//! from a latent-quality preference model, screens applications into
//! program rank lists, resolves with applicant-proposing deferred
//! acceptance, and records how often applicants matched given how many
//! programs ranked them. Aggregation is pure integer counting, so a config
//! (seed included) pins every output bit regardless of how replicas are
//! scheduled across threads.
//!
//! Replica r draws from a ChaCha8 stream seeded by a splitmix64 mix of the
//! root seed and r: substreams are independent of worker assignment and of
//! each other.

use crate::cost::{optimal_application_count, Budget, BudgetMode, CostSpec};
use crate::engines::{gale_shapley, ProposingSide};
use crate::market::{ApplicantId, MarketInstance, PreferenceList, ProgramId, ProgramPrefs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{field} must be positive")]
    NotPositive { field: &'static str },
    #[error("{field} is {got}; must lie in [0, 1]")]
    OutOfRange { field: &'static str, got: f64 },
    #[error("applications per applicant ({q}) exceeds program count ({p})")]
    TooManyApplications { q: u32, p: u32 },
    #[error("capacity range {lo}..={hi} is empty or starts at zero")]
    BadCapacityRange { lo: u32, hi: u32 },
}

/// How a program turns its applicant pool into a rank list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Screening {
    /// Rank each applicant independently with this probability.
    Bernoulli(f64),
    /// Rank the best k of the pool by the program's perceived score.
    TopK(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityDist {
    Fixed(u32),
    /// Uniform over lo..=hi seats.
    UniformInclusive(u32, u32),
}

/// One simulated market draw: sizes, seats, how applicants pick where to
/// apply, how programs screen, how aligned everyone's tastes are
/// (correlation 0 = idiosyncratic, 1 = a single shared quality ranking),
/// and the replication/seeding parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub applicants: u32,
    pub programs: u32,
    pub capacity: CapacityDist,
    pub applications_per_applicant: u32,
    pub screening: Screening,
    pub correlation: f64,
    pub replicas: u32,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        for (field, value) in [
            ("applicants", self.applicants),
            ("programs", self.programs),
            ("replicas", self.replicas),
        ] {
            if value == 0 {
                return Err(SimError::NotPositive { field });
            }
        }
        if self.applications_per_applicant > self.programs {
            return Err(SimError::TooManyApplications {
                q: self.applications_per_applicant,
                p: self.programs,
            });
        }
        if !(0.0..=1.0).contains(&self.correlation) {
            return Err(SimError::OutOfRange {
                field: "correlation",
                got: self.correlation,
            });
        }
        if let Screening::Bernoulli(p) = self.screening {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::OutOfRange {
                    field: "screening probability",
                    got: p,
                });
            }
        }
        match self.capacity {
            CapacityDist::Fixed(c) if c == 0 => {
                return Err(SimError::BadCapacityRange { lo: c, hi: c });
            }
            CapacityDist::UniformInclusive(lo, hi) if lo == 0 || hi < lo => {
                return Err(SimError::BadCapacityRange { lo, hi });
            }
            _ => {}
        }
        Ok(())
    }
}

/// One curve point. `n_exactly_k` and `matched_exactly_k` are the raw
/// tallies this and every higher point were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub k: u32,
    /// Empirical P(matched | ranked by at least k programs).
    pub cum_match_prob: f64,
    /// Binomial standard error of that estimate.
    pub stderr: f64,
    pub n_at_least_k: u64,
    pub n_exactly_k: u64,
    pub matched_exactly_k: u64,
}

/// Match probability as a function of how many programs ranked the
/// applicant, with raw counts. Points run k = 0..=K where K is the largest
/// observed rank count.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchCurve {
    pub points: Vec<CurvePoint>,
    pub replicas: u32,
}

/// Per-replica conservation record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicaSummary {
    pub matched: u32,
    pub filled_seats: u32,
    pub total_seats: u32,
    pub ranked_events: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub curve: MatchCurve,
    pub per_replica: Vec<ReplicaSummary>,
    /// Fraction of applicant-replicas that matched.
    pub match_rate: f64,
    /// Mean number of programs ranking an applicant.
    pub mean_ranks_per_applicant: f64,
    pub total_applications: u64,
    pub total_ranks: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn substream(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

struct ReplicaOutcome {
    /// n_by_k[k] = applicants ranked by exactly k programs.
    n_by_k: Vec<u64>,
    matched_by_k: Vec<u64>,
    summary: ReplicaSummary,
    applications: u64,
}

fn run_replica(config: &SimConfig, replica: u32) -> ReplicaOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(substream(config.seed, replica as u64));
    let n = config.applicants as usize;
    let p = config.programs as usize;
    let q = config.applications_per_applicant as usize;
    let corr = config.correlation;

    let applicant_quality: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    let program_quality: Vec<f64> = (0..p).map(|_| rng.gen()).collect();

    // Applicants apply to the q programs they perceive best. Perceived
    // value blends the program's quality with private noise; ties (only
    // possible at corr = 1) break by program index.
    let mut applied: Vec<Vec<ProgramId>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut perceived: Vec<(f64, usize)> = program_quality
            .iter()
            .enumerate()
            .map(|(j, &quality)| (corr * quality + (1.0 - corr) * rng.gen::<f64>(), j))
            .collect();
        perceived.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        applied.push(perceived[..q].iter().map(|&(_, j)| ProgramId(j)).collect());
    }

    // Programs score their pool the same way, then screen it into a rank
    // list. Draw order is fixed (programs by index, pool by applicant
    // index) so the stream is reproducible.
    let mut pools: Vec<Vec<ApplicantId>> = vec![Vec::new(); p];
    for (i, programs) in applied.iter().enumerate() {
        for &prog in programs {
            pools[prog.0].push(ApplicantId(i));
        }
    }
    let mut rank_lists: Vec<Vec<ApplicantId>> = Vec::with_capacity(p);
    for pool in &pools {
        let mut scored: Vec<(f64, ApplicantId)> = pool
            .iter()
            .map(|&a| {
                (
                    corr * applicant_quality[a.0] + (1.0 - corr) * rng.gen::<f64>(),
                    a,
                )
            })
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let ranked: Vec<ApplicantId> = match config.screening {
            Screening::Bernoulli(prob) => scored
                .into_iter()
                .filter(|_| rng.gen_bool(prob))
                .map(|(_, a)| a)
                .collect(),
            Screening::TopK(k) => {
                scored.truncate(k as usize);
                scored.into_iter().map(|(_, a)| a).collect()
            }
        };
        rank_lists.push(ranked);
    }

    let capacities: Vec<u32> = (0..p)
        .map(|_| match config.capacity {
            CapacityDist::Fixed(c) => c,
            CapacityDist::UniformInclusive(lo, hi) => rng.gen_range(lo..=hi),
        })
        .collect();
    let total_seats: u32 = capacities.iter().sum();

    let market = MarketInstance::from_parts(
        (0..n).map(|i| format!("a{i}")).collect(),
        (0..p).map(|j| format!("p{j}")).collect(),
        capacities,
        applied
            .iter()
            .cloned()
            .map(|l| PreferenceList::new(l).unwrap())
            .collect(),
        rank_lists
            .iter()
            .cloned()
            .map(|l| ProgramPrefs::Strict(PreferenceList::new(l).unwrap()))
            .collect(),
    )
    .expect("generated market is structurally valid");
    let matching = gale_shapley(&market, ProposingSide::Applicants).expect("strict lists");

    let mut ranked_count = vec![0u32; n];
    for list in &rank_lists {
        for a in list {
            ranked_count[a.0] += 1;
        }
    }
    let mut n_by_k = vec![0u64; q + 1];
    let mut matched_by_k = vec![0u64; q + 1];
    let mut matched = 0u32;
    for (i, &k) in ranked_count.iter().enumerate() {
        n_by_k[k as usize] += 1;
        if matching.program_of(ApplicantId(i)).is_some() {
            matched_by_k[k as usize] += 1;
            matched += 1;
        }
    }
    ReplicaOutcome {
        n_by_k,
        matched_by_k,
        summary: ReplicaSummary {
            matched,
            filled_seats: matching.filled_seats() as u32,
            total_seats,
            ranked_events: ranked_count.iter().map(|&k| k as u64).sum(),
        },
        applications: (n * q) as u64,
    }
}

fn curve_from_totals(n_by_k: &[u64], matched_by_k: &[u64], replicas: u32) -> MatchCurve {
    let k_max = n_by_k.iter().rposition(|&c| c > 0).unwrap_or(0);
    let mut points = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let n_tail: u64 = n_by_k[k..].iter().sum();
        let m_tail: u64 = matched_by_k[k..].iter().sum();
        let prob = if n_tail == 0 {
            0.0
        } else {
            m_tail as f64 / n_tail as f64
        };
        let stderr = if n_tail == 0 {
            0.0
        } else {
            (prob * (1.0 - prob) / n_tail as f64).sqrt()
        };
        points.push(CurvePoint {
            k: k as u32,
            cum_match_prob: prob,
            stderr,
            n_at_least_k: n_tail,
            n_exactly_k: n_by_k[k],
            matched_exactly_k: matched_by_k[k],
        });
    }
    MatchCurve { points, replicas }
}

/// Runs every replica (concurrently when a rayon pool is available),
/// aggregates integer tallies in replica order, and derives the curve from
/// the totals.
pub fn simulate_market(config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    let outcomes: Vec<ReplicaOutcome> = (0..config.replicas)
        .into_par_iter()
        .map(|r| run_replica(config, r))
        .collect();

    let q = config.applications_per_applicant as usize;
    let mut n_by_k = vec![0u64; q + 1];
    let mut matched_by_k = vec![0u64; q + 1];
    let mut per_replica = Vec::with_capacity(outcomes.len());
    let mut total_applications = 0u64;
    for outcome in &outcomes {
        for k in 0..=q {
            n_by_k[k] += outcome.n_by_k[k];
            matched_by_k[k] += outcome.matched_by_k[k];
        }
        per_replica.push(outcome.summary);
        total_applications += outcome.applications;
    }

    let population = config.applicants as u64 * config.replicas as u64;
    let total_matched: u64 = per_replica.iter().map(|s| s.matched as u64).sum();
    let total_ranks: u64 = per_replica.iter().map(|s| s.ranked_events).sum();
    Ok(SimResult {
        curve: curve_from_totals(&n_by_k, &matched_by_k, config.replicas),
        per_replica,
        match_rate: total_matched as f64 / population as f64,
        mean_ranks_per_applicant: total_ranks as f64 / population as f64,
        total_applications,
        total_ranks,
    })
}

/// One round of the application race.
#[derive(Debug, Clone, PartialEq)]
pub struct EscalationRound {
    pub round: u32,
    /// Applications every applicant submitted this round.
    pub applications: u32,
    pub mean_interviews: f64,
    /// Ranks per application observed this round; feeds the next round's
    /// best response.
    pub empirical_interview_prob: f64,
}

/// Iterated best response on application counts. Round 0 plays the
/// config's count; each later round replays the market at the count that
/// maximizes expected value under `spec` and `budget`, with the interview
/// probability replaced by the previous round's observed rate. Applicants
/// are parameter-identical, so the per-round mean count IS the count.
pub fn escalation_dynamics(
    config: &SimConfig,
    rounds: u32,
    spec: &CostSpec,
    budget: &Budget,
    mode: BudgetMode,
) -> Result<Vec<EscalationRound>, SimError> {
    config.validate()?;
    let mut series = Vec::with_capacity(rounds as usize);
    let mut q = config.applications_per_applicant;
    for round in 0..rounds {
        let round_config = SimConfig {
            applications_per_applicant: q,
            seed: substream(config.seed, 0x5eed_0000_0000_0000 | round as u64),
            ..config.clone()
        };
        let result = simulate_market(&round_config)?;
        let empirical = if result.total_applications == 0 {
            spec.interview_prob
        } else {
            result.total_ranks as f64 / result.total_applications as f64
        };
        series.push(EscalationRound {
            round,
            applications: q,
            mean_interviews: result.mean_ranks_per_applicant,
            empirical_interview_prob: empirical,
        });
        let next_spec = CostSpec {
            interview_prob: empirical,
            ..spec.clone()
        };
        q = optimal_application_count(&next_spec, budget, config.programs, mode).0;
    }
    Ok(series)
}
