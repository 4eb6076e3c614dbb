//! The rank/not-rank game played over a market. Every participant submits a
//! subset of their true preference list (order preserved), the submitted
//! lists are resolved with applicant-proposing deferred acceptance, and each
//! side is paid per counterpart they submitted: a rank-indexed amount that
//! depends on whether the pair matched. Payments are keyed by the rank in
//! the TRUE list, not the submitted one; dropping entries changes who
//! matches, never how much a given counterpart is worth.
//!
//! Payoffs are plain integers (scale currency outside this module) so table
//! cells compare exactly.

use crate::engines::{gale_shapley, ProposingSide};
use crate::market::{
    ApplicantId, MarketInstance, Matching, PreferenceList, ProgramId, ProgramPrefs,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type PayoffValue = u64;

/// Most players a table may have with binary actions (2^n profiles).
pub const EXTREMES_PLAYER_LIMIT: usize = 12;
/// Most players a table may have when every list subset is an action.
pub const SUBSET_PLAYER_LIMIT: usize = 3;
/// Longest list a player may have in subset-action mode (2^len actions).
pub const SUBSET_LIST_LIMIT: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PayoffError {
    #[error("{status} payoff table rises at rank {rank}; worse ranks may not pay more")]
    RisingRankTable { status: &'static str, rank: u32 },
    #[error("{status} payoff tail exceeds the last table entry")]
    TailAboveTable { status: &'static str },
    #[error("unmatched payoff exceeds matched payoff at rank {rank}")]
    UnmatchedAboveMatched { rank: u32 },
    #[error("submission mask for {side} {name} has {got} entries, their list has {expected}")]
    ProfileShape {
        side: &'static str,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("program {0} ranks by tiers; the ranking game needs strict lists")]
    TieredProgram(String),
    #[error("player {0} listed twice")]
    DuplicatePlayer(String),
    #[error("no {side} with index {index}")]
    UnknownPlayer { side: &'static str, index: usize },
    #[error("{players} players exceeds the {limit}-player limit for {mode} actions")]
    TooManyPlayers {
        players: usize,
        limit: usize,
        mode: &'static str,
    },
    #[error("{name} ranks {len} counterparts; subset actions allow at most {limit}")]
    ListTooLong {
        name: String,
        len: usize,
        limit: usize,
    },
}

/// Payment as a function of (rank, matched?). Explicit per-rank values with
/// a tail for ranks past the table. Invariants: non-increasing in rank
/// (tail included) and matched pays at least unmatched at every rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankPayoffs {
    matched: Vec<PayoffValue>,
    matched_tail: PayoffValue,
    unmatched: Vec<PayoffValue>,
    unmatched_tail: PayoffValue,
}

impl RankPayoffs {
    pub fn new(
        matched: Vec<PayoffValue>,
        matched_tail: PayoffValue,
        unmatched: Vec<PayoffValue>,
        unmatched_tail: PayoffValue,
    ) -> Result<Self, PayoffError> {
        let table = RankPayoffs {
            matched,
            matched_tail,
            unmatched,
            unmatched_tail,
        };
        table.check_non_increasing(&table.matched, table.matched_tail, "matched")?;
        table.check_non_increasing(&table.unmatched, table.unmatched_tail, "unmatched")?;
        let ranks = table.matched.len().max(table.unmatched.len()) as u32 + 1;
        for rank in 1..=ranks {
            if table.value(rank, false) > table.value(rank, true) {
                return Err(PayoffError::UnmatchedAboveMatched { rank });
            }
        }
        Ok(table)
    }

    /// Same payment at every rank.
    pub fn flat(matched: PayoffValue, unmatched: PayoffValue) -> Result<Self, PayoffError> {
        Self::new(Vec::new(), matched, Vec::new(), unmatched)
    }

    fn check_non_increasing(
        &self,
        values: &[PayoffValue],
        tail: PayoffValue,
        status: &'static str,
    ) -> Result<(), PayoffError> {
        for (i, pair) in values.windows(2).enumerate() {
            if pair[1] > pair[0] {
                return Err(PayoffError::RisingRankTable {
                    status,
                    rank: i as u32 + 2,
                });
            }
        }
        if let Some(&last) = values.last() {
            if tail > last {
                return Err(PayoffError::TailAboveTable { status });
            }
        }
        Ok(())
    }

    /// Payment for a counterpart held at 1-based `rank`.
    pub fn value(&self, rank: u32, matched: bool) -> PayoffValue {
        let (values, tail) = if matched {
            (&self.matched, self.matched_tail)
        } else {
            (&self.unmatched, self.unmatched_tail)
        };
        values.get(rank as usize - 1).copied().unwrap_or(tail)
    }
}

/// The two payment functions of the game: one shared by applicants, one by
/// programs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffSpec {
    pub applicant: RankPayoffs,
    pub program: RankPayoffs,
}

/// Unvalidated mirror of [`PayoffSpec`] for serialization.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawPayoffSpec {
    pub applicant: RawRankPayoffs,
    pub program: RawRankPayoffs,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawRankPayoffs {
    #[serde(default)]
    pub matched: Vec<PayoffValue>,
    #[serde(default)]
    pub matched_tail: PayoffValue,
    #[serde(default)]
    pub unmatched: Vec<PayoffValue>,
    #[serde(default)]
    pub unmatched_tail: PayoffValue,
}

impl RawPayoffSpec {
    pub fn validate(self) -> Result<PayoffSpec, PayoffError> {
        Ok(PayoffSpec {
            applicant: self.applicant.validate()?,
            program: self.program.validate()?,
        })
    }
}

impl RawRankPayoffs {
    pub fn validate(self) -> Result<RankPayoffs, PayoffError> {
        RankPayoffs::new(
            self.matched,
            self.matched_tail,
            self.unmatched,
            self.unmatched_tail,
        )
    }
}

/// Which entries of their true list each participant submits. A mask index
/// is a position in the true list; `true` keeps that entry. Relative order
/// cannot be changed, only membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfile {
    applicant_keep: Vec<Vec<bool>>,
    program_keep: Vec<Vec<bool>>,
}

impl StrategyProfile {
    /// Everyone submits their full list.
    pub fn rank_all(market: &MarketInstance) -> Self {
        StrategyProfile {
            applicant_keep: market
                .applicant_ids()
                .map(|a| vec![true; market.applicant_pref(a).len()])
                .collect(),
            program_keep: market
                .program_ids()
                .map(|p| vec![true; market.program_pref(p).ranked_count()])
                .collect(),
        }
    }

    pub fn new(
        market: &MarketInstance,
        applicant_keep: Vec<Vec<bool>>,
        program_keep: Vec<Vec<bool>>,
    ) -> Result<Self, PayoffError> {
        let mut profile = Self::rank_all(market);
        if applicant_keep.len() != profile.applicant_keep.len() {
            return Err(PayoffError::ProfileShape {
                side: "applicant",
                name: "side".into(),
                expected: profile.applicant_keep.len(),
                got: applicant_keep.len(),
            });
        }
        if program_keep.len() != profile.program_keep.len() {
            return Err(PayoffError::ProfileShape {
                side: "program",
                name: "side".into(),
                expected: profile.program_keep.len(),
                got: program_keep.len(),
            });
        }
        for (a, keep) in applicant_keep.into_iter().enumerate() {
            profile.set_applicant(market, ApplicantId(a), keep)?;
        }
        for (p, keep) in program_keep.into_iter().enumerate() {
            profile.set_program(market, ProgramId(p), keep)?;
        }
        Ok(profile)
    }

    pub fn set_applicant(
        &mut self,
        market: &MarketInstance,
        a: ApplicantId,
        keep: Vec<bool>,
    ) -> Result<(), PayoffError> {
        let expected = market.applicant_pref(a).len();
        if keep.len() != expected {
            return Err(PayoffError::ProfileShape {
                side: "applicant",
                name: market.applicant_name(a).to_string(),
                expected,
                got: keep.len(),
            });
        }
        self.applicant_keep[a.0] = keep;
        Ok(())
    }

    pub fn set_program(
        &mut self,
        market: &MarketInstance,
        p: ProgramId,
        keep: Vec<bool>,
    ) -> Result<(), PayoffError> {
        let expected = market.program_pref(p).ranked_count();
        if keep.len() != expected {
            return Err(PayoffError::ProfileShape {
                side: "program",
                name: market.program_name(p).to_string(),
                expected,
                got: keep.len(),
            });
        }
        self.program_keep[p.0] = keep;
        Ok(())
    }

    pub fn applicant_keep(&self, a: ApplicantId) -> &[bool] {
        &self.applicant_keep[a.0]
    }

    pub fn program_keep(&self, p: ProgramId) -> &[bool] {
        &self.program_keep[p.0]
    }
}

/// What everyone got paid, and the matching that paid it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffOutcome {
    pub applicants: Vec<PayoffValue>,
    pub programs: Vec<PayoffValue>,
    pub matching: Matching,
}

impl PayoffOutcome {
    pub fn of(&self, player: PlayerId) -> PayoffValue {
        match player {
            PlayerId::Applicant(a) => self.applicants[a.0],
            PlayerId::Program(p) => self.programs[p.0],
        }
    }
}

/// Resolves the submitted lists with applicant-proposing deferred acceptance
/// and pays both sides. An applicant is paid per program they submitted:
/// the matched amount for their assignment, the unmatched amount otherwise.
/// A program is paid likewise per applicant it submitted, matched meaning
/// the applicant holds one of its seats. Submitting nothing pays zero.
pub fn resolve_and_pay(
    market: &MarketInstance,
    profile: &StrategyProfile,
    spec: &PayoffSpec,
) -> Result<PayoffOutcome, PayoffError> {
    if let Some(p) = market
        .program_ids()
        .find(|&p| !market.program_pref(p).is_strict())
    {
        return Err(PayoffError::TieredProgram(
            market.program_name(p).to_string(),
        ));
    }
    // Re-validate shapes so a profile built against one market cannot be
    // replayed against another of different dimensions.
    if profile.applicant_keep.len() != market.applicant_count()
        || profile.program_keep.len() != market.program_count()
    {
        return Err(PayoffError::ProfileShape {
            side: "applicant",
            name: "side".into(),
            expected: market.applicant_count(),
            got: profile.applicant_keep.len(),
        });
    }

    let applicant_prefs: Vec<PreferenceList<ProgramId>> = market
        .applicant_ids()
        .map(|a| {
            let keep = &profile.applicant_keep[a.0];
            let list = market.applicant_pref(a);
            shape_ok(
                "applicant",
                market.applicant_name(a),
                list.len(),
                keep.len(),
            )?;
            Ok(submitted(list, keep))
        })
        .collect::<Result<_, PayoffError>>()?;
    let program_prefs: Vec<ProgramPrefs> = market
        .program_ids()
        .map(|p| {
            let keep = &profile.program_keep[p.0];
            let ProgramPrefs::Strict(list) = market.program_pref(p) else {
                unreachable!()
            };
            shape_ok("program", market.program_name(p), list.len(), keep.len())?;
            Ok(ProgramPrefs::Strict(submitted(list, keep)))
        })
        .collect::<Result<_, PayoffError>>()?;

    let effective = market
        .with_prefs(applicant_prefs, program_prefs)
        .expect("submitted lists are sublists of valid lists");
    let matching =
        gale_shapley(&effective, ProposingSide::Applicants).expect("all lists are strict");

    let applicants = market
        .applicant_ids()
        .map(|a| {
            market
                .applicant_pref(a)
                .iter()
                .enumerate()
                .filter(|&(i, _)| profile.applicant_keep[a.0][i])
                .map(|(i, p)| {
                    spec.applicant
                        .value(i as u32 + 1, matching.program_of(a) == Some(p))
                })
                .sum()
        })
        .collect();
    let programs = market
        .program_ids()
        .map(|p| {
            let ProgramPrefs::Strict(list) = market.program_pref(p) else {
                unreachable!()
            };
            list.iter()
                .enumerate()
                .filter(|&(i, _)| profile.program_keep[p.0][i])
                .map(|(i, a)| {
                    spec.program
                        .value(i as u32 + 1, matching.program_of(a) == Some(p))
                })
                .sum()
        })
        .collect();
    Ok(PayoffOutcome {
        applicants,
        programs,
        matching,
    })
}

fn shape_ok(
    side: &'static str,
    name: &str,
    expected: usize,
    got: usize,
) -> Result<(), PayoffError> {
    if expected == got {
        Ok(())
    } else {
        Err(PayoffError::ProfileShape {
            side,
            name: name.to_string(),
            expected,
            got,
        })
    }
}

fn submitted<T: Copy + Ord + std::fmt::Debug>(
    list: &PreferenceList<T>,
    keep: &[bool],
) -> PreferenceList<T> {
    let kept: Vec<T> = list
        .iter()
        .enumerate()
        .filter(|&(i, _)| keep[i])
        .map(|(_, x)| x)
        .collect();
    PreferenceList::new(kept).expect("sublist of a duplicate-free list")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlayerId {
    Applicant(ApplicantId),
    Program(ProgramId),
}

/// Action granularity for tables and dominance checks. `Extremes` gives
/// every player two actions, submit-all or submit-nothing; `Subsets` gives
/// every subset of the list. Subset games blow up as 2^(len·players), hence
/// the much tighter limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    Extremes,
    Subsets,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub label: String,
    pub keep: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    /// One action index per table player, aligned with `PayoffTable::players`.
    pub action_indices: Vec<usize>,
    /// This profile's payoff per table player, same alignment.
    pub payoffs: Vec<PayoffValue>,
}

/// Normal-form table over a chosen set of players. Non-players are pinned
/// to submitting their full list. Entries enumerate action profiles with
/// the FIRST player varying slowest; each player's last action is always
/// submit-all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffTable {
    pub players: Vec<PlayerId>,
    pub player_names: Vec<String>,
    pub actions: Vec<Vec<Action>>,
    pub entries: Vec<TableEntry>,
}

impl PayoffTable {
    pub fn entry(&self, action_indices: &[usize]) -> Option<&TableEntry> {
        if action_indices.len() != self.players.len() {
            return None;
        }
        let mut index = 0usize;
        for (i, &ai) in action_indices.iter().enumerate() {
            if ai >= self.actions[i].len() {
                return None;
            }
            index = index * self.actions[i].len() + ai;
        }
        self.entries.get(index)
    }
}

/// Enumerates every action profile of `players` (all other participants
/// submit everything) and resolves each one.
pub fn build_payoff_table(
    market: &MarketInstance,
    spec: &PayoffSpec,
    players: &[PlayerId],
    mode: ActionMode,
) -> Result<PayoffTable, PayoffError> {
    for (i, player) in players.iter().enumerate() {
        check_player(market, *player)?;
        if players[..i].contains(player) {
            return Err(PayoffError::DuplicatePlayer(player_name(market, *player)));
        }
    }
    match mode {
        ActionMode::Extremes => {
            if players.len() > EXTREMES_PLAYER_LIMIT {
                return Err(PayoffError::TooManyPlayers {
                    players: players.len(),
                    limit: EXTREMES_PLAYER_LIMIT,
                    mode: "two-point",
                });
            }
        }
        ActionMode::Subsets => {
            if players.len() > SUBSET_PLAYER_LIMIT {
                return Err(PayoffError::TooManyPlayers {
                    players: players.len(),
                    limit: SUBSET_PLAYER_LIMIT,
                    mode: "subset",
                });
            }
            for &player in players {
                let len = list_len(market, player);
                if len > SUBSET_LIST_LIMIT {
                    return Err(PayoffError::ListTooLong {
                        name: player_name(market, player),
                        len,
                        limit: SUBSET_LIST_LIMIT,
                    });
                }
            }
        }
    }

    let actions: Vec<Vec<Action>> = players
        .iter()
        .map(|&player| action_set(market, player, mode))
        .collect();
    let player_names: Vec<String> = players
        .iter()
        .map(|&player| player_name(market, player))
        .collect();

    let total: usize = actions.iter().map(|a| a.len()).product();
    let mut entries = Vec::with_capacity(total);
    let mut indices = vec![0usize; players.len()];
    for _ in 0..total {
        let mut profile = StrategyProfile::rank_all(market);
        for (i, &player) in players.iter().enumerate() {
            let keep = actions[i][indices[i]].keep.clone();
            match player {
                PlayerId::Applicant(a) => profile.set_applicant(market, a, keep)?,
                PlayerId::Program(p) => profile.set_program(market, p, keep)?,
            }
        }
        let outcome = resolve_and_pay(market, &profile, spec)?;
        entries.push(TableEntry {
            action_indices: indices.clone(),
            payoffs: players.iter().map(|&player| outcome.of(player)).collect(),
        });
        for i in (0..players.len()).rev() {
            indices[i] += 1;
            if indices[i] < actions[i].len() {
                break;
            }
            indices[i] = 0;
        }
    }
    Ok(PayoffTable {
        players: players.to_vec(),
        player_names,
        actions,
        entries,
    })
}

fn check_player(market: &MarketInstance, player: PlayerId) -> Result<(), PayoffError> {
    match player {
        PlayerId::Applicant(a) if a.0 >= market.applicant_count() => {
            Err(PayoffError::UnknownPlayer {
                side: "applicant",
                index: a.0,
            })
        }
        PlayerId::Program(p) if p.0 >= market.program_count() => Err(PayoffError::UnknownPlayer {
            side: "program",
            index: p.0,
        }),
        _ => Ok(()),
    }
}

fn list_len(market: &MarketInstance, player: PlayerId) -> usize {
    match player {
        PlayerId::Applicant(a) => market.applicant_pref(a).len(),
        PlayerId::Program(p) => market.program_pref(p).ranked_count(),
    }
}

fn player_name(market: &MarketInstance, player: PlayerId) -> String {
    match player {
        PlayerId::Applicant(a) => market.applicant_name(a).to_string(),
        PlayerId::Program(p) => market.program_name(p).to_string(),
    }
}

fn counterpart_names(market: &MarketInstance, player: PlayerId) -> Vec<String> {
    match player {
        PlayerId::Applicant(a) => market
            .applicant_pref(a)
            .iter()
            .map(|p| market.program_name(p).to_string())
            .collect(),
        PlayerId::Program(p) => match market.program_pref(p) {
            ProgramPrefs::Strict(list) => list
                .iter()
                .map(|a| market.applicant_name(a).to_string())
                .collect(),
            ProgramPrefs::Tiered(t) => t
                .flatten()
                .iter()
                .map(|a| market.applicant_name(a).to_string())
                .collect(),
        },
    }
}

fn action_set(market: &MarketInstance, player: PlayerId, mode: ActionMode) -> Vec<Action> {
    let len = list_len(market, player);
    match mode {
        ActionMode::Extremes => vec![
            Action {
                label: "rank-none".into(),
                keep: vec![false; len],
            },
            Action {
                label: "rank-all".into(),
                keep: vec![true; len],
            },
        ],
        ActionMode::Subsets => {
            let names = counterpart_names(market, player);
            (0u32..1 << len)
                .map(|bits| {
                    let keep: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                    let kept: Vec<&str> = names
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| keep[i])
                        .map(|(_, n)| n.as_str())
                        .collect();
                    Action {
                        label: format!("rank{{{}}}", kept.join("+")),
                        keep,
                    }
                })
                .collect()
        }
    }
}

/// A profile at which some player beats their submit-all action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceCounterexample {
    pub player: String,
    pub better_action: String,
    pub full_list_payoff: PayoffValue,
    pub deviation_payoff: PayoffValue,
    /// Every other player's action at the offending profile.
    pub opponent_actions: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceReport {
    pub mode: ActionMode,
    pub players: usize,
    pub comparisons: u64,
    pub counterexamples: Vec<DominanceCounterexample>,
}

impl DominanceReport {
    /// True when submitting the full list was weakly optimal for everyone.
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Tests, for every participant at once, whether submitting the full true
/// list weakly dominates the alternatives: for each player and each profile
/// of everyone else's actions, the full list must pay at least as much as
/// each alternative action. Subset actions are used when the whole game is
/// small enough, binary submit-all/submit-nothing otherwise.
pub fn check_rank_all_dominance(
    market: &MarketInstance,
    spec: &PayoffSpec,
) -> Result<DominanceReport, PayoffError> {
    let players: Vec<PlayerId> = market
        .applicant_ids()
        .map(PlayerId::Applicant)
        .chain(market.program_ids().map(PlayerId::Program))
        .collect();
    let longest = players
        .iter()
        .map(|&pl| list_len(market, pl))
        .max()
        .unwrap_or(0);
    let mode = if players.len() <= SUBSET_PLAYER_LIMIT && longest <= SUBSET_LIST_LIMIT {
        ActionMode::Subsets
    } else {
        ActionMode::Extremes
    };
    let table = build_payoff_table(market, spec, &players, mode)?;

    let counts: Vec<usize> = table.actions.iter().map(|a| a.len()).collect();
    let mut strides = vec![1usize; players.len()];
    for i in (0..players.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * counts[i + 1];
    }

    let mut comparisons = 0u64;
    let mut counterexamples = Vec::new();
    for (row, entry) in table.entries.iter().enumerate() {
        for i in 0..players.len() {
            let full = counts[i] - 1;
            let chosen = entry.action_indices[i];
            if chosen == full {
                continue;
            }
            comparisons += 1;
            let full_row = row + (full - chosen) * strides[i];
            let full_list_payoff = table.entries[full_row].payoffs[i];
            if entry.payoffs[i] > full_list_payoff {
                counterexamples.push(DominanceCounterexample {
                    player: table.player_names[i].clone(),
                    better_action: table.actions[i][chosen].label.clone(),
                    full_list_payoff,
                    deviation_payoff: entry.payoffs[i],
                    opponent_actions: (0..players.len())
                        .filter(|&j| j != i)
                        .map(|j| {
                            (
                                table.player_names[j].clone(),
                                table.actions[j][entry.action_indices[j]].label.clone(),
                            )
                        })
                        .collect(),
                });
            }
        }
    }
    Ok(DominanceReport {
        mode,
        players: players.len(),
        comparisons,
        counterexamples,
    })
}
