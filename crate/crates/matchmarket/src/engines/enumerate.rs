//! Exhaustive stable-matching enumeration. Exponential by nature; it exists
//! as an independent oracle for the engines, so it shares no code path with
//! them beyond the market types and the blocking-pair check.

use super::EngineError;
use crate::market::{MarketInstance, Matching, ProgramId};
use crate::stability::find_blocking_pairs;

pub const DEFAULT_ENUMERATION_BOUND: u64 = 1_000_000;

/// Enumerates every stable matching, in canonical order (lexicographic by
/// per-applicant assignment, unmatched first). See
/// [`enumerate_stable_matchings_bounded`] for the size guard.
pub fn enumerate_stable_matchings(market: &MarketInstance) -> Result<Vec<Matching>, EngineError> {
    enumerate_stable_matchings_bounded(market, DEFAULT_ENUMERATION_BOUND)
}

/// Walks every capacity-respecting assignment built from mutually-ranked
/// pairs and keeps those with no blocking pair. Errors before doing any
/// work when the candidate count `prod(1 + mutual options per applicant)`
/// exceeds `bound`.
pub fn enumerate_stable_matchings_bounded(
    market: &MarketInstance,
    bound: u64,
) -> Result<Vec<Matching>, EngineError> {
    let options: Vec<Vec<ProgramId>> = market
        .applicant_ids()
        .map(|a| {
            market
                .applicant_pref(a)
                .iter()
                .filter(|&p| market.mutually_ranked(a, p))
                .collect()
        })
        .collect();
    let mut estimate: u64 = 1;
    for opts in &options {
        estimate = estimate.saturating_mul(opts.len() as u64 + 1);
    }
    if estimate > bound {
        return Err(EngineError::TooLarge { estimate, bound });
    }

    let mut stable = Vec::new();
    let mut assignment: Vec<Option<ProgramId>> = vec![None; market.applicant_count()];
    let mut free: Vec<u32> = market.program_ids().map(|p| market.capacity(p)).collect();
    descend(market, &options, 0, &mut assignment, &mut free, &mut stable);
    stable.sort();
    Ok(stable)
}

fn descend(
    market: &MarketInstance,
    options: &[Vec<ProgramId>],
    a: usize,
    assignment: &mut Vec<Option<ProgramId>>,
    free: &mut Vec<u32>,
    out: &mut Vec<Matching>,
) {
    if a == options.len() {
        let m = Matching::new(market, assignment.clone()).expect("capacity tracked in descent");
        if find_blocking_pairs(market, &m)
            .expect("candidates pair only mutually-ranked sides")
            .is_empty()
        {
            out.push(m);
        }
        return;
    }
    descend(market, options, a + 1, assignment, free, out);
    for &p in &options[a] {
        if free[p.0] > 0 {
            free[p.0] -= 1;
            assignment[a] = Some(p);
            descend(market, options, a + 1, assignment, free, out);
            assignment[a] = None;
            free[p.0] += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{gale_shapley, ProposingSide};
    use crate::market::{RawMarket, RawProgramPrefs};

    fn strict(names: &[&str]) -> RawProgramPrefs {
        RawProgramPrefs::Strict {
            strict: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn contested_two_by_two_has_unique_stable_matching() {
        let market = RawMarket {
            applicants: vec!["A".into(), "B".into()],
            programs: vec!["P1".into(), "P2".into()],
            applicant_prefs: [
                ("A".to_string(), vec!["P1".to_string(), "P2".to_string()]),
                ("B".to_string(), vec!["P1".to_string(), "P2".to_string()]),
            ]
            .into(),
            program_prefs: [
                ("P1".to_string(), strict(&["B", "A"])),
                ("P2".to_string(), strict(&["A", "B"])),
            ]
            .into(),
            ..RawMarket::default()
        }
        .validate()
        .unwrap();
        let all = enumerate_stable_matchings(&market).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(
            all[0],
            gale_shapley(&market, ProposingSide::Applicants).unwrap()
        );
    }

    #[test]
    fn cyclic_preferences_yield_two_stable_matchings() {
        // A: P1 > P2, B: P2 > P1, P1: B > A, P2: A > B. Each side-optimal
        // matching is stable and they differ.
        let market = RawMarket {
            applicants: vec!["A".into(), "B".into()],
            programs: vec!["P1".into(), "P2".into()],
            applicant_prefs: [
                ("A".to_string(), vec!["P1".to_string(), "P2".to_string()]),
                ("B".to_string(), vec!["P2".to_string(), "P1".to_string()]),
            ]
            .into(),
            program_prefs: [
                ("P1".to_string(), strict(&["B", "A"])),
                ("P2".to_string(), strict(&["A", "B"])),
            ]
            .into(),
            ..RawMarket::default()
        }
        .validate()
        .unwrap();
        let all = enumerate_stable_matchings(&market).unwrap();
        assert_eq!(all.len(), 2);
        let applicant_optimal = gale_shapley(&market, ProposingSide::Applicants).unwrap();
        let program_optimal = gale_shapley(&market, ProposingSide::Programs).unwrap();
        assert!(all.contains(&applicant_optimal));
        assert!(all.contains(&program_optimal));
        assert_ne!(applicant_optimal, program_optimal);
    }

    #[test]
    fn isolated_participants_stay_unmatched_in_all() {
        let market = RawMarket {
            applicants: vec!["A".into(), "Z".into()],
            programs: vec!["P1".into()],
            applicant_prefs: [("A".to_string(), vec!["P1".to_string()])].into(),
            program_prefs: [("P1".to_string(), strict(&["A"]))].into(),
            ..RawMarket::default()
        }
        .validate()
        .unwrap();
        let all = enumerate_stable_matchings(&market).unwrap();
        assert_eq!(all.len(), 1);
        let z = market.applicant_index("Z").unwrap();
        assert_eq!(all[0].program_of(z), None);
        assert_eq!(all[0].matched_count(), 1);
    }

    #[test]
    fn empty_market_has_the_empty_matching() {
        let market = RawMarket::default().validate().unwrap();
        let all = enumerate_stable_matchings(&market).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].matched_count(), 0);
    }

    #[test]
    fn candidate_bound_is_enforced() {
        let names: Vec<String> = (0..8).map(|i| format!("a{i}")).collect();
        let progs: Vec<String> = (0..4).map(|j| format!("p{j}")).collect();
        let market = RawMarket {
            applicants: names.clone(),
            programs: progs.clone(),
            applicant_prefs: names.iter().map(|a| (a.clone(), progs.clone())).collect(),
            program_prefs: progs
                .iter()
                .map(|p| {
                    (
                        p.clone(),
                        RawProgramPrefs::Strict {
                            strict: names.clone(),
                        },
                    )
                })
                .collect(),
            ..RawMarket::default()
        }
        .validate()
        .unwrap();
        let err = enumerate_stable_matchings_bounded(&market, 1000).unwrap_err();
        assert_eq!(
            err,
            EngineError::TooLarge {
                estimate: 5u64.pow(8),
                bound: 1000
            }
        );
    }
}
