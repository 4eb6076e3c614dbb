//! Tiered pool matching: programs sort applicants into priority tiers, and
//! pairing sweeps a diagonal order over (program tier, applicant rank).
//! Matches are final as soon as they are made, which is what lets unstable
//! outcomes arise.

use super::{EngineError, TraceEvent};
use crate::market::{MarketInstance, Matching, ProgramId, ProgramPrefs};

/// The diagonal sweep order over (tier t, applicant rank k). Diagonal d
/// first emits (d, k) for k = 1..d-1 with k increasing, then (t, d) for
/// t = 1..d with t increasing. The sequence is infinite; callers bound it.
///
/// First nine cells:
/// (1,1), (2,1), (1,2), (2,2), (3,1), (3,2), (1,3), (2,3), (3,3).
#[derive(Debug, Clone)]
pub struct PairingOrder {
    d: u32,
    stage: Stage,
}

#[derive(Debug, Clone)]
enum Stage {
    Row(u32),
    Col(u32),
}

impl PairingOrder {
    pub fn new() -> Self {
        Self {
            d: 1,
            stage: Stage::Row(1),
        }
    }
}

impl Default for PairingOrder {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for PairingOrder {
    /// (tier, applicant rank), both 1-based.
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        loop {
            match self.stage {
                Stage::Row(k) if k < self.d => {
                    self.stage = Stage::Row(k + 1);
                    return Some((self.d, k));
                }
                Stage::Row(_) => self.stage = Stage::Col(1),
                Stage::Col(t) if t <= self.d => {
                    self.stage = Stage::Col(t + 1);
                    return Some((t, self.d));
                }
                Stage::Col(_) => {
                    self.d += 1;
                    self.stage = Stage::Row(1);
                }
            }
        }
    }
}

/// Runs the pool plan. At cell (t, k) every still-unmatched applicant who
/// put some program at rank k and sits in that program's tier t is matched
/// to it while seats remain; programs are visited in canonical id order and
/// tier members in within-tier order. Matches are final. The sweep stops
/// after diagonal max(largest tier count, longest applicant list).
///
/// Requires tiered lists on every program; strict programs are rejected.
pub fn boston_pool(market: &MarketInstance) -> Result<Matching, EngineError> {
    run(market, None)
}

/// Same as [`boston_pool`], appending one event per match made to `events`.
pub fn boston_pool_traced(
    market: &MarketInstance,
    events: &mut Vec<TraceEvent>,
) -> Result<Matching, EngineError> {
    run(market, Some(events))
}

fn run(
    market: &MarketInstance,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> Result<Matching, EngineError> {
    let mut max_tiers = 0u32;
    for p in market.program_ids() {
        match market.program_pref(p) {
            ProgramPrefs::Tiered(t) => max_tiers = max_tiers.max(t.tier_count() as u32),
            ProgramPrefs::Strict(_) => {
                return Err(EngineError::StrictProgram(
                    market.program_name(p).to_string(),
                ))
            }
        }
    }
    let max_list = market
        .applicant_ids()
        .map(|a| market.applicant_pref(a).len() as u32)
        .max()
        .unwrap_or(0);
    let last_diagonal = max_tiers.max(max_list);

    let mut assignment: Vec<Option<ProgramId>> = vec![None; market.applicant_count()];
    let mut filled = vec![0u32; market.program_count()];

    // Along the sweep, max(t, k) is the diagonal index and never decreases,
    // so a plain take_while bounds the iteration.
    for (t, k) in PairingOrder::new().take_while(|&(t, k)| t.max(k) <= last_diagonal) {
        for p in market.program_ids() {
            if filled[p.0] >= market.capacity(p) {
                continue;
            }
            let ProgramPrefs::Tiered(tiers) = market.program_pref(p) else {
                unreachable!("checked above")
            };
            let Some(tier) = tiers.tiers().get(t as usize - 1) else {
                continue;
            };
            for &a in tier {
                if assignment[a.0].is_none() && market.rank_of_program(a, p) == Some(k) {
                    assignment[a.0] = Some(p);
                    filled[p.0] += 1;
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.push(TraceEvent::PoolMatch {
                            tier: t,
                            rank: k,
                            applicant: a,
                            program: p,
                        });
                    }
                    if filled[p.0] >= market.capacity(p) {
                        break;
                    }
                }
            }
        }
    }
    Ok(Matching::new(market, assignment).expect("pool plan respects capacities"))
}
