//! Market domain types: participants, preference structures, capacities, and
//! validated instances.
//!
//! Identifiers are opaque strings at the file-format boundary. Validation
//! canonicalizes them to dense indexes (sorted by id string), so rank lookups
//! inside the engines are O(1) table reads instead of list scans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense index of an applicant within a validated market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ApplicantId(pub usize);

/// Dense index of a program within a validated market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProgramId(pub usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarketError {
    #[error("duplicate id `{id}` in {context}")]
    DuplicateId { id: String, context: String },
    #[error("unknown id `{id}` referenced by {owner}")]
    UnknownId { owner: String, id: String },
    #[error("capacity of program `{program}` must be positive, got {got}")]
    NonPositiveCapacity { program: String, got: i64 },
    #[error("tier {tier} of program `{program}` is empty")]
    EmptyTier { program: String, tier: usize },
    #[error("expected {expected} entries for {context}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },
    #[error("{side} index {index} is out of range")]
    IndexOutOfRange { side: &'static str, index: usize },
    #[error("program `{program}` holds {assigned} applicants but has capacity {capacity}")]
    CapacityExceeded {
        program: String,
        assigned: usize,
        capacity: u32,
    },
    #[error("applicant `{applicant}` is assigned to more than one program")]
    DoubleAssignment { applicant: String },
}

/// Strict ordinal preference order. The entry at position k-1 has rank k;
/// ranks are therefore contiguous and duplicate-free by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceList<T> {
    order: Vec<T>,
}

impl<T> Default for PreferenceList<T> {
    fn default() -> Self {
        Self { order: Vec::new() }
    }
}

impl<T: Copy + Ord> PreferenceList<T> {
    /// Builds a list from most- to least-preferred. Returns the first
    /// duplicated entry on failure.
    pub fn new(order: Vec<T>) -> Result<Self, T> {
        let mut seen = order.clone();
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                return Err(w[0]);
            }
        }
        Ok(Self { order })
    }

    /// 1-based rank of `entry`, or `None` when the entry is not ranked.
    pub fn rank_of(&self, entry: T) -> Option<u32> {
        self.order
            .iter()
            .position(|&x| x == entry)
            .map(|i| i as u32 + 1)
    }

    /// Entry holding 1-based rank `rank`.
    pub fn at_rank(&self, rank: u32) -> Option<T> {
        if rank == 0 {
            return None;
        }
        self.order.get(rank as usize - 1).copied()
    }

    pub fn contains(&self, entry: T) -> bool {
        self.order.contains(&entry)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        self.order.iter().copied()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.order
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TierError {
    #[error("tier {tier} is empty")]
    Empty { tier: usize },
    #[error("duplicate member across tiers")]
    Duplicate { member: ApplicantId },
}

/// Ordered tiers of applicants. Tier 1 outranks tier 2 and so on; members
/// within a tier are ordered, and that order is the only tie-breaker the
/// tiered engine uses. No applicant may appear in two tiers and no tier may
/// be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieredPreferenceList {
    tiers: Vec<Vec<ApplicantId>>,
}

impl TieredPreferenceList {
    pub fn new(tiers: Vec<Vec<ApplicantId>>) -> Result<Self, TierError> {
        let mut all: Vec<ApplicantId> = Vec::new();
        for (i, tier) in tiers.iter().enumerate() {
            if tier.is_empty() {
                return Err(TierError::Empty { tier: i + 1 });
            }
            all.extend_from_slice(tier);
        }
        let mut sorted = all.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(TierError::Duplicate { member: w[0] });
            }
        }
        Ok(Self { tiers })
    }

    /// (tier, within-tier position), both 1-based.
    pub fn key_of(&self, a: ApplicantId) -> Option<(u32, u32)> {
        for (t, tier) in self.tiers.iter().enumerate() {
            if let Some(pos) = tier.iter().position(|&x| x == a) {
                return Some((t as u32 + 1, pos as u32 + 1));
            }
        }
        None
    }

    /// Flattened 1-based position: members of earlier tiers count first.
    pub fn global_rank(&self, a: ApplicantId) -> Option<u32> {
        let mut before = 0u32;
        for tier in &self.tiers {
            if let Some(pos) = tier.iter().position(|&x| x == a) {
                return Some(before + pos as u32 + 1);
            }
            before += tier.len() as u32;
        }
        None
    }

    pub fn contains(&self, a: ApplicantId) -> bool {
        self.key_of(a).is_some()
    }

    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    pub fn member_count(&self) -> usize {
        self.tiers.iter().map(Vec::len).sum()
    }

    pub fn tiers(&self) -> &[Vec<ApplicantId>] {
        &self.tiers
    }

    /// Concatenates tiers in order into a strict list.
    pub fn flatten(&self) -> PreferenceList<ApplicantId> {
        let order: Vec<ApplicantId> = self.tiers.iter().flatten().copied().collect();
        PreferenceList::new(order).expect("tier members are duplicate-free")
    }
}

/// Program-side preference strength; lower compares as more preferred.
/// Strict lists map rank r to (r, 0); tiered lists map to (tier, position).
/// Keys are only comparable within a single program's list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrefKey(pub u32, pub u32);

/// A program ranks applicants either with a strict list or with tiers,
/// never a mix of the two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProgramPrefs {
    Strict(PreferenceList<ApplicantId>),
    Tiered(TieredPreferenceList),
}

impl ProgramPrefs {
    pub fn is_strict(&self) -> bool {
        matches!(self, ProgramPrefs::Strict(_))
    }

    pub fn key_of(&self, a: ApplicantId) -> Option<PrefKey> {
        match self {
            ProgramPrefs::Strict(list) => list.rank_of(a).map(|r| PrefKey(r, 0)),
            ProgramPrefs::Tiered(t) => t.key_of(a).map(|(tier, pos)| PrefKey(tier, pos)),
        }
    }

    pub fn contains(&self, a: ApplicantId) -> bool {
        self.key_of(a).is_some()
    }

    pub fn ranked_count(&self) -> usize {
        match self {
            ProgramPrefs::Strict(list) => list.len(),
            ProgramPrefs::Tiered(t) => t.member_count(),
        }
    }

    /// Scalar preference position used when reporting how much a program
    /// gains from a swap: strict rank, or flattened tier position.
    pub fn scalar_rank(&self, a: ApplicantId) -> Option<u32> {
        match self {
            ProgramPrefs::Strict(list) => list.rank_of(a),
            ProgramPrefs::Tiered(t) => t.global_rank(a),
        }
    }
}

/// Serialized mirror of a market, as found in input files. Maps keep file
/// output deterministic. `capacities` entries default to 1 when omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RawMarket {
    pub applicants: Vec<String>,
    pub programs: Vec<String>,
    #[serde(default)]
    pub capacities: BTreeMap<String, i64>,
    #[serde(default)]
    pub applicant_prefs: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub program_prefs: BTreeMap<String, RawProgramPrefs>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawProgramPrefs {
    Strict { strict: Vec<String> },
    Tiered { tiers: Vec<Vec<String>> },
}

impl RawMarket {
    /// Validates and canonicalizes into a `MarketInstance`.
    pub fn validate(&self) -> Result<MarketInstance, MarketError> {
        MarketInstance::from_raw(self)
    }
}

/// A validated, immutable market: both id sets, one strict preference list
/// per applicant, one strict or tiered list per program, and positive seat
/// capacities. Engines never pair two sides unless both ranked each other.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    applicant_names: Vec<String>,
    program_names: Vec<String>,
    capacities: Vec<u32>,
    applicant_prefs: Vec<PreferenceList<ProgramId>>,
    program_prefs: Vec<ProgramPrefs>,
    // O(1) lookup tables derived from the lists above.
    applicant_rank: Vec<Vec<Option<u32>>>,
    program_key: Vec<Vec<Option<PrefKey>>>,
}

fn sorted_unique(names: &[String], context: &str) -> Result<Vec<String>, MarketError> {
    let mut out = names.to_vec();
    out.sort();
    for w in out.windows(2) {
        if w[0] == w[1] {
            return Err(MarketError::DuplicateId {
                id: w[0].clone(),
                context: context.to_string(),
            });
        }
    }
    Ok(out)
}

impl MarketInstance {
    /// Canonicalizes ids (sorted order), checks every referenced id exists,
    /// capacities are positive, lists are duplicate-free, and tiers are
    /// non-empty.
    pub fn from_raw(raw: &RawMarket) -> Result<Self, MarketError> {
        let applicant_names = sorted_unique(&raw.applicants, "applicant ids")?;
        let program_names = sorted_unique(&raw.programs, "program ids")?;
        let a_index: BTreeMap<&str, usize> = applicant_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let p_index: BTreeMap<&str, usize> = program_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();

        let mut capacities = vec![1u32; program_names.len()];
        for (name, &cap) in &raw.capacities {
            let &idx = p_index
                .get(name.as_str())
                .ok_or_else(|| MarketError::UnknownId {
                    owner: "the capacity table".to_string(),
                    id: name.clone(),
                })?;
            if cap <= 0 {
                return Err(MarketError::NonPositiveCapacity {
                    program: name.clone(),
                    got: cap,
                });
            }
            capacities[idx] = cap as u32;
        }

        let mut applicant_prefs = vec![PreferenceList::default(); applicant_names.len()];
        for (name, listed) in &raw.applicant_prefs {
            let &owner = a_index
                .get(name.as_str())
                .ok_or_else(|| MarketError::UnknownId {
                    owner: "the applicant preference table".to_string(),
                    id: name.clone(),
                })?;
            let mut order = Vec::with_capacity(listed.len());
            for entry in listed {
                let &p = p_index
                    .get(entry.as_str())
                    .ok_or_else(|| MarketError::UnknownId {
                        owner: format!("applicant `{name}`"),
                        id: entry.clone(),
                    })?;
                order.push(ProgramId(p));
            }
            applicant_prefs[owner] =
                PreferenceList::new(order).map_err(|dup| MarketError::DuplicateId {
                    id: program_names[dup.0].clone(),
                    context: format!("the preference list of applicant `{name}`"),
                })?;
        }

        let mut program_prefs =
            vec![ProgramPrefs::Strict(PreferenceList::default()); program_names.len()];
        for (name, prefs) in &raw.program_prefs {
            let &owner = p_index
                .get(name.as_str())
                .ok_or_else(|| MarketError::UnknownId {
                    owner: "the program preference table".to_string(),
                    id: name.clone(),
                })?;
            let resolve = |entry: &String| -> Result<ApplicantId, MarketError> {
                a_index
                    .get(entry.as_str())
                    .map(|&a| ApplicantId(a))
                    .ok_or_else(|| MarketError::UnknownId {
                        owner: format!("program `{name}`"),
                        id: entry.clone(),
                    })
            };
            program_prefs[owner] = match prefs {
                RawProgramPrefs::Strict { strict } => {
                    let order = strict.iter().map(resolve).collect::<Result<Vec<_>, _>>()?;
                    ProgramPrefs::Strict(PreferenceList::new(order).map_err(|dup| {
                        MarketError::DuplicateId {
                            id: applicant_names[dup.0].clone(),
                            context: format!("the preference list of program `{name}`"),
                        }
                    })?)
                }
                RawProgramPrefs::Tiered { tiers } => {
                    let resolved = tiers
                        .iter()
                        .map(|tier| tier.iter().map(resolve).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()?;
                    ProgramPrefs::Tiered(TieredPreferenceList::new(resolved).map_err(
                        |e| match e {
                            TierError::Empty { tier } => MarketError::EmptyTier {
                                program: name.clone(),
                                tier,
                            },
                            TierError::Duplicate { member } => MarketError::DuplicateId {
                                id: applicant_names[member.0].clone(),
                                context: format!("the tiers of program `{name}`"),
                            },
                        },
                    )?)
                }
            };
        }

        Self::from_parts(
            applicant_names,
            program_names,
            capacities,
            applicant_prefs,
            program_prefs,
        )
    }

    /// Programmatic constructor. Index order follows the given name order;
    /// names must be unique, capacities positive, and list entries in range.
    pub fn from_parts(
        applicant_names: Vec<String>,
        program_names: Vec<String>,
        capacities: Vec<u32>,
        applicant_prefs: Vec<PreferenceList<ProgramId>>,
        program_prefs: Vec<ProgramPrefs>,
    ) -> Result<Self, MarketError> {
        sorted_unique(&applicant_names, "applicant ids")?;
        sorted_unique(&program_names, "program ids")?;
        let n = applicant_names.len();
        let p = program_names.len();
        let dims = [
            ("capacities", capacities.len(), p),
            ("applicant preference lists", applicant_prefs.len(), n),
            ("program preference lists", program_prefs.len(), p),
        ];
        for (context, got, expected) in dims {
            if got != expected {
                return Err(MarketError::DimensionMismatch {
                    context: context.to_string(),
                    expected,
                    got,
                });
            }
        }
        for (i, &cap) in capacities.iter().enumerate() {
            if cap == 0 {
                return Err(MarketError::NonPositiveCapacity {
                    program: program_names[i].clone(),
                    got: 0,
                });
            }
        }
        for prefs in &applicant_prefs {
            for ProgramId(idx) in prefs.iter() {
                if idx >= p {
                    return Err(MarketError::IndexOutOfRange {
                        side: "program",
                        index: idx,
                    });
                }
            }
        }
        for prefs in &program_prefs {
            let members: Vec<ApplicantId> = match prefs {
                ProgramPrefs::Strict(list) => list.iter().collect(),
                ProgramPrefs::Tiered(t) => t.tiers().iter().flatten().copied().collect(),
            };
            for ApplicantId(idx) in members {
                if idx >= n {
                    return Err(MarketError::IndexOutOfRange {
                        side: "applicant",
                        index: idx,
                    });
                }
            }
        }

        let mut applicant_rank = vec![vec![None; p]; n];
        for (a, prefs) in applicant_prefs.iter().enumerate() {
            for (pos, ProgramId(prog)) in prefs.iter().enumerate() {
                applicant_rank[a][prog] = Some(pos as u32 + 1);
            }
        }
        let mut program_key = vec![vec![None; n]; p];
        for (prog, prefs) in program_prefs.iter().enumerate() {
            for (a, key) in program_key[prog].iter_mut().enumerate() {
                *key = prefs.key_of(ApplicantId(a));
            }
        }

        Ok(Self {
            applicant_names,
            program_names,
            capacities,
            applicant_prefs,
            program_prefs,
            applicant_rank,
            program_key,
        })
    }

    pub fn to_raw(&self) -> RawMarket {
        let applicant_prefs = self
            .applicant_prefs
            .iter()
            .enumerate()
            .map(|(a, prefs)| {
                (
                    self.applicant_names[a].clone(),
                    prefs
                        .iter()
                        .map(|p| self.program_names[p.0].clone())
                        .collect(),
                )
            })
            .collect();
        let program_prefs = self
            .program_prefs
            .iter()
            .enumerate()
            .map(|(p, prefs)| {
                let raw = match prefs {
                    ProgramPrefs::Strict(list) => RawProgramPrefs::Strict {
                        strict: list
                            .iter()
                            .map(|a| self.applicant_names[a.0].clone())
                            .collect(),
                    },
                    ProgramPrefs::Tiered(t) => RawProgramPrefs::Tiered {
                        tiers: t
                            .tiers()
                            .iter()
                            .map(|tier| {
                                tier.iter()
                                    .map(|a| self.applicant_names[a.0].clone())
                                    .collect()
                            })
                            .collect(),
                    },
                };
                (self.program_names[p].clone(), raw)
            })
            .collect();
        RawMarket {
            applicants: self.applicant_names.clone(),
            programs: self.program_names.clone(),
            capacities: self
                .capacities
                .iter()
                .enumerate()
                .map(|(p, &c)| (self.program_names[p].clone(), c as i64))
                .collect(),
            applicant_prefs,
            program_prefs,
        }
    }

    pub fn applicant_count(&self) -> usize {
        self.applicant_names.len()
    }

    pub fn program_count(&self) -> usize {
        self.program_names.len()
    }

    pub fn applicant_ids(&self) -> impl Iterator<Item = ApplicantId> {
        (0..self.applicant_count()).map(ApplicantId)
    }

    pub fn program_ids(&self) -> impl Iterator<Item = ProgramId> {
        (0..self.program_count()).map(ProgramId)
    }

    pub fn applicant_name(&self, a: ApplicantId) -> &str {
        &self.applicant_names[a.0]
    }

    pub fn program_name(&self, p: ProgramId) -> &str {
        &self.program_names[p.0]
    }

    pub fn applicant_index(&self, name: &str) -> Option<ApplicantId> {
        self.applicant_names
            .iter()
            .position(|n| n == name)
            .map(ApplicantId)
    }

    pub fn program_index(&self, name: &str) -> Option<ProgramId> {
        self.program_names
            .iter()
            .position(|n| n == name)
            .map(ProgramId)
    }

    pub fn capacity(&self, p: ProgramId) -> u32 {
        self.capacities[p.0]
    }

    /// Total seat count. Recomputed on every call so it can never go stale.
    pub fn total_capacity(&self) -> u64 {
        self.capacities.iter().map(|&c| c as u64).sum()
    }

    pub fn applicant_pref(&self, a: ApplicantId) -> &PreferenceList<ProgramId> {
        &self.applicant_prefs[a.0]
    }

    pub fn program_pref(&self, p: ProgramId) -> &ProgramPrefs {
        &self.program_prefs[p.0]
    }

    /// 1-based rank applicant `a` gave program `p`, if ranked.
    pub fn rank_of_program(&self, a: ApplicantId, p: ProgramId) -> Option<u32> {
        self.applicant_rank[a.0][p.0]
    }

    /// Preference key program `p` holds for applicant `a`, if ranked.
    pub fn program_key_of(&self, p: ProgramId, a: ApplicantId) -> Option<PrefKey> {
        self.program_key[p.0][a.0]
    }

    pub fn mutually_ranked(&self, a: ApplicantId, p: ProgramId) -> bool {
        self.applicant_rank[a.0][p.0].is_some() && self.program_key[p.0][a.0].is_some()
    }

    pub fn all_programs_strict(&self) -> bool {
        self.program_prefs.iter().all(ProgramPrefs::is_strict)
    }

    pub fn all_programs_tiered(&self) -> bool {
        self.program_prefs.iter().all(|p| !p.is_strict())
    }

    /// Copy of the market with every tiered list concatenated into a strict
    /// list (tier order, then within-tier order). Strict lists are unchanged.
    pub fn flatten_tiers(&self) -> MarketInstance {
        let program_prefs = self
            .program_prefs
            .iter()
            .map(|prefs| match prefs {
                ProgramPrefs::Strict(list) => ProgramPrefs::Strict(list.clone()),
                ProgramPrefs::Tiered(t) => ProgramPrefs::Strict(t.flatten()),
            })
            .collect();
        Self::from_parts(
            self.applicant_names.clone(),
            self.program_names.clone(),
            self.capacities.clone(),
            self.applicant_prefs.clone(),
            program_prefs,
        )
        .expect("flattening preserves validity")
    }

    /// Copy of the market with replaced preference lists, keeping ids and
    /// capacities. Used to build profile-restricted markets.
    pub fn with_prefs(
        &self,
        applicant_prefs: Vec<PreferenceList<ProgramId>>,
        program_prefs: Vec<ProgramPrefs>,
    ) -> Result<MarketInstance, MarketError> {
        Self::from_parts(
            self.applicant_names.clone(),
            self.program_names.clone(),
            self.capacities.clone(),
            applicant_prefs,
            program_prefs,
        )
    }
}

/// An assignment of applicants to programs plus its derived inverse.
/// Capacity-respecting and mutually consistent by construction; matched
/// pairs are final (no tentative state is ever exposed).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching {
    assignment: Vec<Option<ProgramId>>,
    assigned: Vec<Vec<ApplicantId>>,
}

impl Matching {
    pub fn new(
        market: &MarketInstance,
        assignment: Vec<Option<ProgramId>>,
    ) -> Result<Self, MarketError> {
        if assignment.len() != market.applicant_count() {
            return Err(MarketError::DimensionMismatch {
                context: "the matching assignment".to_string(),
                expected: market.applicant_count(),
                got: assignment.len(),
            });
        }
        let mut assigned = vec![Vec::new(); market.program_count()];
        for (a, &slot) in assignment.iter().enumerate() {
            if let Some(ProgramId(p)) = slot {
                if p >= market.program_count() {
                    return Err(MarketError::IndexOutOfRange {
                        side: "program",
                        index: p,
                    });
                }
                assigned[p].push(ApplicantId(a));
            }
        }
        for (p, held) in assigned.iter().enumerate() {
            let capacity = market.capacities[p];
            if held.len() > capacity as usize {
                return Err(MarketError::CapacityExceeded {
                    program: market.program_names[p].clone(),
                    assigned: held.len(),
                    capacity,
                });
            }
        }
        Ok(Self {
            assignment,
            assigned,
        })
    }

    pub fn empty(market: &MarketInstance) -> Self {
        Self {
            assignment: vec![None; market.applicant_count()],
            assigned: vec![Vec::new(); market.program_count()],
        }
    }

    pub fn program_of(&self, a: ApplicantId) -> Option<ProgramId> {
        self.assignment[a.0]
    }

    /// Applicants held by `p`, in canonical applicant-index order.
    pub fn assigned_to(&self, p: ProgramId) -> &[ApplicantId] {
        &self.assigned[p.0]
    }

    pub fn assignment(&self) -> &[Option<ProgramId>] {
        &self.assignment
    }

    pub fn matched_count(&self) -> usize {
        self.assignment.iter().filter(|s| s.is_some()).count()
    }

    pub fn filled_seats(&self) -> usize {
        self.assigned.iter().map(Vec::len).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (ApplicantId, ProgramId)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(a, slot)| slot.map(|p| (ApplicantId(a), p)))
    }
}
