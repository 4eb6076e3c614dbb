//! Deferred acceptance with one proposing side and many-to-one capacities.

use std::collections::VecDeque;

use super::{EngineError, ProposingSide, TraceEvent};
use crate::market::{ApplicantId, MarketInstance, Matching, ProgramId};

/// Runs deferred acceptance. Proposers are processed from a queue seeded in
/// canonical id order; each free proposer works down its own list, a holder
/// keeps the best mutually-ranked proposals seen so far, and displaced
/// proposers re-enter the queue. Holds become final only at termination, so
/// the result is stable and optimal for the proposing side. A pair is only
/// ever formed when both sides ranked each other.
///
/// Requires strict lists on every program; tiered programs are rejected.
pub fn gale_shapley(market: &MarketInstance, side: ProposingSide) -> Result<Matching, EngineError> {
    run(market, side, canonical_order(market, side), None)
}

/// Same as [`gale_shapley`], additionally appending one event per proposal,
/// hold, rejection, and displacement to `events`.
pub fn gale_shapley_traced(
    market: &MarketInstance,
    side: ProposingSide,
    events: &mut Vec<TraceEvent>,
) -> Result<Matching, EngineError> {
    run(market, side, canonical_order(market, side), Some(events))
}

fn canonical_order(market: &MarketInstance, side: ProposingSide) -> Vec<usize> {
    match side {
        ProposingSide::Applicants => (0..market.applicant_count()).collect(),
        ProposingSide::Programs => (0..market.program_count()).collect(),
    }
}

/// Test hook: the stable outcome is independent of the initial queue order.
#[cfg(test)]
pub(crate) fn gale_shapley_with_order(
    market: &MarketInstance,
    side: ProposingSide,
    order: Vec<usize>,
) -> Result<Matching, EngineError> {
    run(market, side, order, None)
}

fn run(
    market: &MarketInstance,
    side: ProposingSide,
    order: Vec<usize>,
    trace: Option<&mut Vec<TraceEvent>>,
) -> Result<Matching, EngineError> {
    for p in market.program_ids() {
        if !market.program_pref(p).is_strict() {
            return Err(EngineError::TieredProgram(
                market.program_name(p).to_string(),
            ));
        }
    }
    match side {
        ProposingSide::Applicants => Ok(applicants_propose(market, order, trace)),
        ProposingSide::Programs => Ok(programs_propose(market, order, trace)),
    }
}

fn applicants_propose(
    market: &MarketInstance,
    order: Vec<usize>,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> Matching {
    let mut next = vec![0usize; market.applicant_count()];
    let mut held: Vec<Option<ProgramId>> = vec![None; market.applicant_count()];
    let mut pools: Vec<Vec<ApplicantId>> = vec![Vec::new(); market.program_count()];
    let mut queue: VecDeque<ApplicantId> = order.into_iter().map(ApplicantId).collect();

    while let Some(a) = queue.pop_front() {
        let list = market.applicant_pref(a);
        while next[a.0] < list.len() {
            let p = list.as_slice()[next[a.0]];
            next[a.0] += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceEvent::Propose {
                    applicant: a,
                    program: p,
                });
            }
            let Some(key) = market.program_key_of(p, a) else {
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent::Reject {
                        program: p,
                        applicant: a,
                    });
                }
                continue;
            };
            if pools[p.0].len() < market.capacity(p) as usize {
                pools[p.0].push(a);
                held[a.0] = Some(p);
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent::Hold {
                        program: p,
                        applicant: a,
                    });
                }
                break;
            }
            // Pool is full: displace the weakest incumbent if this proposal
            // outranks it, otherwise reject the proposal.
            let (slot, &worst) = pools[p.0]
                .iter()
                .enumerate()
                .max_by_key(|(_, &b)| {
                    market
                        .program_key_of(p, b)
                        .expect("pool members are ranked")
                })
                .expect("full pool is non-empty");
            if key
                < market
                    .program_key_of(p, worst)
                    .expect("pool members are ranked")
            {
                pools[p.0][slot] = a;
                held[a.0] = Some(p);
                held[worst.0] = None;
                queue.push_back(worst);
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent::Displace {
                        program: p,
                        out: worst,
                        in_: a,
                    });
                }
                break;
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceEvent::Reject {
                    program: p,
                    applicant: a,
                });
            }
        }
    }
    Matching::new(market, held).expect("deferred acceptance respects capacities")
}

fn programs_propose(
    market: &MarketInstance,
    order: Vec<usize>,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> Matching {
    let mut next = vec![0usize; market.program_count()];
    let mut free: Vec<u32> = market.program_ids().map(|p| market.capacity(p)).collect();
    let mut held: Vec<Option<ProgramId>> = vec![None; market.applicant_count()];
    let mut queue: VecDeque<ProgramId> = order.into_iter().map(ProgramId).collect();

    while let Some(p) = queue.pop_front() {
        let list = match market.program_pref(p) {
            crate::market::ProgramPrefs::Strict(list) => list,
            crate::market::ProgramPrefs::Tiered(_) => unreachable!("checked in run()"),
        };
        while free[p.0] > 0 && next[p.0] < list.len() {
            let a = list.as_slice()[next[p.0]];
            next[p.0] += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceEvent::ProgramPropose {
                    program: p,
                    applicant: a,
                });
            }
            let Some(rank) = market.rank_of_program(a, p) else {
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent::Reject {
                        program: p,
                        applicant: a,
                    });
                }
                continue;
            };
            match held[a.0] {
                None => {
                    held[a.0] = Some(p);
                    free[p.0] -= 1;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEvent::Hold {
                            program: p,
                            applicant: a,
                        });
                    }
                }
                Some(current) => {
                    let current_rank = market
                        .rank_of_program(a, current)
                        .expect("held offers are mutually ranked");
                    if rank < current_rank {
                        held[a.0] = Some(p);
                        free[p.0] -= 1;
                        free[current.0] += 1;
                        queue.push_back(current);
                        if let Some(t) = trace.as_deref_mut() {
                            t.push(TraceEvent::ApplicantTradeUp {
                                applicant: a,
                                out: current,
                                in_: p,
                            });
                        }
                    } else if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEvent::Reject {
                            program: p,
                            applicant: a,
                        });
                    }
                }
            }
        }
    }
    Matching::new(market, held).expect("deferred acceptance respects capacities")
}
