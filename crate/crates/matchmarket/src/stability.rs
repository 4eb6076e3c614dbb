//! Blocking-pair detection. A matching is stable exactly when no
//! mutually-ranked (applicant, program) pair would both rather be together
//! than stay with their current assignments.

use thiserror::Error;

use crate::market::{ApplicantId, MarketInstance, Matching, PrefKey, ProgramId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabilityError {
    #[error("matching has {got} entries but the market has {expected} applicants")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matching pairs applicant `{applicant}` with program `{program}` but {side} never ranked the other")]
    UnrankedPairing {
        applicant: String,
        program: String,
        side: &'static str,
    },
}

/// A pair that would defect together. Gains are scalar rank improvements;
/// `None` means the move is from unmatched (applicant side) or into a free
/// seat (program side), an unbounded improvement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingPair {
    pub applicant: ApplicantId,
    pub program: ProgramId,
    pub applicant_gain: Option<u32>,
    pub program_gain: Option<u32>,
}

/// Returns every blocking pair in canonical order (applicant index, then
/// program index). A program with a free seat blocks with any mutually
/// ranked applicant who prefers it; a full program blocks when it strictly
/// prefers the applicant to its weakest current assignee, where tiered
/// preference compares (tier, within-tier position) lexicographically.
///
/// Errors when the matching pairs two sides that did not both rank each
/// other; such an assignment is outside the model.
pub fn find_blocking_pairs(
    market: &MarketInstance,
    matching: &Matching,
) -> Result<Vec<BlockingPair>, StabilityError> {
    if matching.assignment().len() != market.applicant_count() {
        return Err(StabilityError::DimensionMismatch {
            expected: market.applicant_count(),
            got: matching.assignment().len(),
        });
    }
    for (a, p) in matching.pairs() {
        let side = if market.rank_of_program(a, p).is_none() {
            Some("the applicant")
        } else if market.program_key_of(p, a).is_none() {
            Some("the program")
        } else {
            None
        };
        if let Some(side) = side {
            return Err(StabilityError::UnrankedPairing {
                applicant: market.applicant_name(a).to_string(),
                program: market.program_name(p).to_string(),
                side,
            });
        }
    }

    let mut blocking = Vec::new();
    for a in market.applicant_ids() {
        let current_rank = matching
            .program_of(a)
            .map(|p| market.rank_of_program(a, p).expect("validated above"));
        for p in market.applicant_pref(a).iter() {
            if matching.program_of(a) == Some(p) {
                continue;
            }
            let candidate_rank = market
                .rank_of_program(a, p)
                .expect("listed program is ranked");
            let applicant_gain = match current_rank {
                None => None,
                Some(held) if candidate_rank < held => Some(held - candidate_rank),
                Some(_) => continue,
            };
            let Some(candidate_key) = market.program_key_of(p, a) else {
                continue;
            };
            let program_gain = program_side_gain(market, matching, p, a, candidate_key);
            if let Some(program_gain) = program_gain {
                blocking.push(BlockingPair {
                    applicant: a,
                    program: p,
                    applicant_gain,
                    program_gain,
                });
            }
        }
    }
    blocking.sort_by_key(|b| (b.applicant, b.program));
    Ok(blocking)
}

/// `Some(gain)` when the program would take the applicant: `Some(None)` for
/// a free seat, `Some(Some(d))` when it would displace a weaker assignee
/// `d` scalar positions below the candidate. `None` when it would not.
fn program_side_gain(
    market: &MarketInstance,
    matching: &Matching,
    p: ProgramId,
    a: ApplicantId,
    candidate_key: PrefKey,
) -> Option<Option<u32>> {
    let held = matching.assigned_to(p);
    if held.len() < market.capacity(p) as usize {
        return Some(None);
    }
    let worst = held
        .iter()
        .copied()
        .max_by_key(|&b| market.program_key_of(p, b).expect("validated above"))
        .expect("full program holds someone");
    if candidate_key < market.program_key_of(p, worst).expect("validated above") {
        let prefs = market.program_pref(p);
        let gain = prefs.scalar_rank(worst).expect("validated above")
            - prefs.scalar_rank(a).expect("candidate is ranked");
        Some(Some(gain))
    } else {
        None
    }
}

/// True exactly when [`find_blocking_pairs`] returns no pairs.
pub fn is_stable(market: &MarketInstance, matching: &Matching) -> Result<bool, StabilityError> {
    Ok(find_blocking_pairs(market, matching)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{boston_pool, gale_shapley, ProposingSide};
    use crate::market::{RawMarket, RawProgramPrefs};

    fn strict(names: &[&str]) -> RawProgramPrefs {
        RawProgramPrefs::Strict {
            strict: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn two_by_two() -> MarketInstance {
        RawMarket {
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
        .unwrap()
    }

    fn pair_names(market: &MarketInstance, pairs: &[BlockingPair]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|b| {
                (
                    market.applicant_name(b.applicant).to_string(),
                    market.program_name(b.program).to_string(),
                )
            })
            .collect()
    }

    #[test]
    fn deferred_acceptance_output_is_stable() {
        let market = two_by_two();
        let m = gale_shapley(&market, ProposingSide::Applicants).unwrap();
        assert!(is_stable(&market, &m).unwrap());
    }

    #[test]
    fn swapped_assignment_blocks() {
        let market = two_by_two();
        // A on P1, B on P2: both B and P1 would rather have each other.
        let m = Matching::new(
            &market,
            vec![
                Some(market.program_index("P1").unwrap()),
                Some(market.program_index("P2").unwrap()),
            ],
        )
        .unwrap();
        let pairs = find_blocking_pairs(&market, &m).unwrap();
        assert_eq!(
            pair_names(&market, &pairs),
            vec![("B".to_string(), "P1".to_string())]
        );
        assert_eq!(pairs[0].applicant_gain, Some(1));
        assert_eq!(pairs[0].program_gain, Some(1));
    }

    #[test]
    fn empty_matching_blocks_on_any_mutual_pair() {
        let market = two_by_two();
        let m = Matching::empty(&market);
        assert!(!is_stable(&market, &m).unwrap());
        let pairs = find_blocking_pairs(&market, &m).unwrap();
        // Every mutually ranked pair blocks against empty seats.
        assert_eq!(pairs.len(), 4);
        assert!(pairs
            .iter()
            .all(|b| b.applicant_gain.is_none() && b.program_gain.is_none()));
    }

    #[test]
    fn unranked_pairing_is_an_error() {
        let market = RawMarket {
            applicants: vec!["A".into()],
            programs: vec!["P1".into()],
            applicant_prefs: [("A".to_string(), vec!["P1".to_string()])].into(),
            ..RawMarket::default()
        }
        .validate()
        .unwrap();
        let m = Matching::new(&market, vec![Some(ProgramId(0))]).unwrap();
        let err = find_blocking_pairs(&market, &m).unwrap_err();
        assert_eq!(
            err,
            StabilityError::UnrankedPairing {
                applicant: "A".into(),
                program: "P1".into(),
                side: "the program",
            }
        );
    }

    #[test]
    fn pool_sweep_output_blocks_with_tier_gains() {
        let market = crate::engines::test_fixtures::instability_instance();
        let m = boston_pool(&market).unwrap();
        let pairs = find_blocking_pairs(&market, &m).unwrap();
        assert_eq!(
            pair_names(&market, &pairs),
            vec![("A".to_string(), "P2".to_string())]
        );
        // A is unmatched; P2 would displace B (flattened position 2 vs 1).
        assert_eq!(pairs[0].applicant_gain, None);
        assert_eq!(pairs[0].program_gain, Some(1));
    }

    #[test]
    fn removing_the_programs_listing_clears_the_pair() {
        let market = crate::engines::test_fixtures::instability_instance();
        let m = boston_pool(&market).unwrap();
        let mut raw = market.to_raw();
        // Drop P2 from A's list; the former blocking pair can no longer form.
        raw.applicant_prefs.insert("A".into(), vec!["P1".into()]);
        let reduced = raw.validate().unwrap();
        let m2 = Matching::new(&reduced, m.assignment().to_vec()).unwrap();
        let pairs = find_blocking_pairs(&reduced, &m2).unwrap();
        assert!(pair_names(&reduced, &pairs)
            .iter()
            .all(|(a, p)| !(a == "A" && p == "P2")));
    }
}
