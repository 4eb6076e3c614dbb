//! Market files. Two formats share one loader: a row-oriented CSV and a
//! JSON object mirroring the validated instance. Every structural
//! complaint carries the offending line; semantic complaints come from
//! market validation verbatim.
//!
//! CSV rows are `side,id,rank_or_tier,within_tier,counterpart_id`:
//!
//! ```text
//! applicant,A,1,,P1      A ranks P1 first
//! program,P1,1,,A        P1 (strict) ranks A first
//! program,P2,2,1,B       P2 tier 2, first within the tier, is B
//! capacity,P1,3,,        P1 has 3 seats (default 1)
//! ```
//!
//! A program is declared by a preference or capacity row; an applicant by
//! a preference row. Counterpart ids must resolve to declared
//! participants, so typos fail loudly instead of minting ghosts.

use crate::market::{
    ApplicantId, MarketError, MarketInstance, PreferenceList, ProgramId, ProgramPrefs, RawMarket,
    TieredPreferenceList,
};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MarketFileError {
    #[error("line {line}: {message}")]
    Csv { line: u32, message: String },
    #[error("{0}")]
    Json(String),
    #[error(transparent)]
    Market(#[from] MarketError),
}

fn bad(line: u32, message: impl Into<String>) -> MarketFileError {
    MarketFileError::Csv {
        line,
        message: message.into(),
    }
}

struct PrefRow {
    ordinal: u32,
    within: Option<u32>,
    counterpart: String,
    line: u32,
}

#[derive(Default)]
struct CsvDraft {
    applicant_order: Vec<String>,
    program_order: Vec<String>,
    applicant_rows: BTreeMap<String, Vec<PrefRow>>,
    program_rows: BTreeMap<String, Vec<PrefRow>>,
    capacities: BTreeMap<String, (u32, u32)>,
}

fn field(parts: &[&str], idx: usize) -> String {
    parts.get(idx).map_or("", |s| s.trim()).to_string()
}

fn parse_ordinal(text: &str, line: u32, what: &str) -> Result<u32, MarketFileError> {
    match text.parse::<u32>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(bad(
            line,
            format!("{what} must be a positive integer, got {text:?}"),
        )),
    }
}

fn collect_rows(text: &str) -> Result<CsvDraft, MarketFileError> {
    let mut draft = CsvDraft::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u32 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').collect();
        let side = field(&parts, 0).to_ascii_lowercase();
        if side == "side" {
            continue; // header row
        }
        if parts.len() > 5 {
            return Err(bad(
                line,
                format!("expected at most 5 fields, got {}", parts.len()),
            ));
        }
        let id = field(&parts, 1);
        if id.is_empty() {
            return Err(bad(line, "empty id in field 2"));
        }
        match side.as_str() {
            "applicant" | "program" => {
                let ordinal = parse_ordinal(
                    &field(&parts, 2),
                    line,
                    if side == "applicant" {
                        "rank"
                    } else {
                        "rank or tier"
                    },
                )?;
                let within_text = field(&parts, 3);
                let within = if within_text.is_empty() {
                    None
                } else {
                    Some(parse_ordinal(&within_text, line, "within-tier position")?)
                };
                let counterpart = field(&parts, 4);
                if counterpart.is_empty() {
                    return Err(bad(line, "empty counterpart id in field 5"));
                }
                if side == "applicant" {
                    if within.is_some() {
                        return Err(bad(line, "applicant rows take no within-tier position"));
                    }
                    draft
                        .applicant_rows
                        .entry(id.clone())
                        .or_insert_with(|| {
                            draft.applicant_order.push(id.clone());
                            Vec::new()
                        })
                        .push(PrefRow {
                            ordinal,
                            within,
                            counterpart,
                            line,
                        });
                } else {
                    draft
                        .program_rows
                        .entry(id.clone())
                        .or_insert_with(|| {
                            draft.program_order.push(id.clone());
                            Vec::new()
                        })
                        .push(PrefRow {
                            ordinal,
                            within,
                            counterpart,
                            line,
                        });
                }
            }
            "capacity" => {
                let seats = parse_ordinal(&field(&parts, 2), line, "capacity")?;
                if !field(&parts, 3).is_empty() || !field(&parts, 4).is_empty() {
                    return Err(bad(
                        line,
                        "capacity rows take only `capacity,<program>,<seats>,,`",
                    ));
                }
                if draft.capacities.insert(id.clone(), (seats, line)).is_some() {
                    return Err(bad(line, format!("capacity of `{id}` set twice")));
                }
                if !draft.program_rows.contains_key(&id) && !draft.program_order.contains(&id) {
                    draft.program_order.push(id);
                }
            }
            other => {
                return Err(bad(
                    line,
                    format!("unknown row kind {other:?} (want applicant, program, or capacity)"),
                ))
            }
        }
    }
    Ok(draft)
}

/// Sorts by ordinal and demands exactly 1..=n, blaming the first row that
/// breaks the run.
fn contiguous<'a>(
    rows: &'a mut [PrefRow],
    owner: &str,
    what: &str,
) -> Result<&'a [PrefRow], MarketFileError> {
    rows.sort_by_key(|r| (r.ordinal, r.line));
    for (i, row) in rows.iter().enumerate() {
        let want = i as u32 + 1;
        if row.ordinal != want {
            return Err(bad(
                row.line,
                format!(
                    "{owner}: {what} {} where {want} was expected ({what}s must be contiguous from 1)",
                    row.ordinal
                ),
            ));
        }
    }
    Ok(rows)
}

fn strict_list<T: Copy + Ord>(
    rows: &mut [PrefRow],
    owner: &str,
    lookup: &BTreeMap<String, T>,
    counterpart_kind: &str,
) -> Result<PreferenceList<T>, MarketFileError> {
    let ordered = contiguous(rows, owner, "rank")?;
    let mut ids = Vec::with_capacity(ordered.len());
    for row in ordered {
        let Some(&id) = lookup.get(&row.counterpart) else {
            return Err(bad(
                row.line,
                format!(
                    "{owner} ranks unknown {counterpart_kind} `{}`",
                    row.counterpart
                ),
            ));
        };
        ids.push((id, row.line, row.counterpart.clone()));
    }
    PreferenceList::new(ids.iter().map(|&(id, _, _)| id).collect()).map_err(|dup| {
        let hit = ids.iter().filter(|&&(id, _, _)| id == dup).nth(1).unwrap();
        bad(hit.1, format!("{owner} ranks `{}` twice", hit.2))
    })
}

fn assemble(mut draft: CsvDraft) -> Result<MarketInstance, MarketFileError> {
    let applicant_index: BTreeMap<String, ApplicantId> = draft
        .applicant_order
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), ApplicantId(i)))
        .collect();
    let program_index: BTreeMap<String, ProgramId> = draft
        .program_order
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), ProgramId(i)))
        .collect();

    let mut applicant_prefs = Vec::with_capacity(draft.applicant_order.len());
    for name in &draft.applicant_order {
        let rows = draft.applicant_rows.get_mut(name).unwrap();
        applicant_prefs.push(strict_list(
            rows,
            &format!("applicant `{name}`"),
            &program_index,
            "program",
        )?);
    }

    let mut program_prefs = Vec::with_capacity(draft.program_order.len());
    for name in &draft.program_order {
        let owner = format!("program `{name}`");
        let Some(rows) = draft.program_rows.get_mut(name) else {
            program_prefs.push(ProgramPrefs::Strict(
                PreferenceList::new(Vec::new()).unwrap(),
            ));
            continue;
        };
        let tiered = rows.iter().any(|r| r.within.is_some());
        if tiered {
            if let Some(mixed) = rows.iter().find(|r| r.within.is_none()) {
                return Err(bad(
                    mixed.line,
                    format!("{owner} mixes tier rows and plain rank rows"),
                ));
            }
            let mut by_tier: BTreeMap<u32, Vec<PrefRow>> = BTreeMap::new();
            for row in rows.drain(..) {
                by_tier.entry(row.ordinal).or_default().push(PrefRow {
                    ordinal: row.within.unwrap(),
                    within: None,
                    counterpart: row.counterpart,
                    line: row.line,
                });
            }
            let mut tiers = Vec::with_capacity(by_tier.len());
            for (i, (tier_no, mut members)) in by_tier.into_iter().enumerate() {
                let want = i as u32 + 1;
                if tier_no != want {
                    let first = members.iter().map(|r| r.line).min().unwrap();
                    return Err(bad(
                        first,
                        format!("{owner}: tier {tier_no} where {want} was expected (tiers must be contiguous from 1)"),
                    ));
                }
                let list = strict_list(
                    &mut members,
                    &format!("{owner} tier {tier_no}"),
                    &applicant_index,
                    "applicant",
                )?;
                tiers.push(list.as_slice().to_vec());
            }
            program_prefs.push(ProgramPrefs::Tiered(
                TieredPreferenceList::new(tiers).expect("tiers are non-empty and duplicate-free"),
            ));
        } else {
            program_prefs.push(ProgramPrefs::Strict(strict_list(
                rows,
                &owner,
                &applicant_index,
                "applicant",
            )?));
        }
    }

    let capacities = draft
        .program_order
        .iter()
        .map(|name| draft.capacities.get(name).map_or(1, |&(seats, _)| seats))
        .collect();
    Ok(MarketInstance::from_parts(
        draft.applicant_order,
        draft.program_order,
        capacities,
        applicant_prefs,
        program_prefs,
    )?)
}

pub fn parse_market_csv(text: &str) -> Result<MarketInstance, MarketFileError> {
    assemble(collect_rows(text)?)
}

pub fn parse_market_json(text: &str) -> Result<MarketInstance, MarketFileError> {
    let raw: RawMarket =
        serde_json::from_str(text).map_err(|e| MarketFileError::Json(e.to_string()))?;
    Ok(raw.validate()?)
}

/// Dispatches on content: JSON when the first non-blank byte is `{`.
pub fn parse_market_text(text: &str) -> Result<MarketInstance, MarketFileError> {
    if text.trim_start().starts_with('{') {
        parse_market_json(text)
    } else {
        parse_market_csv(text)
    }
}
