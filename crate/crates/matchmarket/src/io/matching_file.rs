//! Matching CSV: one `applicant,program` row per applicant, empty program
//! field for the unmatched. The writer emits applicants in market order so
//! output is stable; the reader accepts any row order but insists every
//! applicant appears exactly once.

use crate::market::{MarketInstance, Matching, ProgramId};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatchingFileError {
    #[error("line {line}: {message}")]
    Csv { line: u32, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn bad(line: u32, message: impl Into<String>) -> MatchingFileError {
    MatchingFileError::Csv {
        line,
        message: message.into(),
    }
}

pub fn write_matching_csv(market: &MarketInstance, matching: &Matching) -> String {
    let mut out = String::from("applicant,program\n");
    for a in market.applicant_ids() {
        let program = matching
            .program_of(a)
            .map_or("", |p| market.program_name(p));
        out.push_str(market.applicant_name(a));
        out.push(',');
        out.push_str(program);
        out.push('\n');
    }
    out
}

pub fn parse_matching_csv(
    text: &str,
    market: &MarketInstance,
) -> Result<Matching, MatchingFileError> {
    let mut assignment: Vec<Option<Option<ProgramId>>> = vec![None; market.applicant_count()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u32 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').collect();
        if parts.len() > 2 {
            return Err(bad(
                line,
                format!("expected `applicant,program`, got {trimmed:?}"),
            ));
        }
        let applicant = parts[0].trim();
        if applicant.eq_ignore_ascii_case("applicant") {
            continue; // header
        }
        let Some(a) = market.applicant_index(applicant) else {
            return Err(bad(line, format!("unknown applicant `{applicant}`")));
        };
        let program_field = parts.get(1).map_or("", |s| s.trim());
        let program = if program_field.is_empty() {
            None
        } else {
            match market.program_index(program_field) {
                Some(p) => Some(p),
                None => return Err(bad(line, format!("unknown program `{program_field}`"))),
            }
        };
        if assignment[a.0].replace(program).is_some() {
            return Err(bad(line, format!("applicant `{applicant}` listed twice")));
        }
    }
    for (i, slot) in assignment.iter().enumerate() {
        if slot.is_none() {
            let name = market.applicant_name(crate::market::ApplicantId(i));
            return Err(MatchingFileError::Invalid(format!(
                "applicant `{name}` has no row (unmatched applicants still need `{name},`)"
            )));
        }
    }
    Matching::new(market, assignment.into_iter().map(Option::unwrap).collect())
        .map_err(|e| MatchingFileError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{gale_shapley, ProposingSide};
    use crate::io::market_file::parse_market_csv;

    fn market() -> MarketInstance {
        parse_market_csv(
            "applicant,A,1,,P\napplicant,B,1,,P\nprogram,P,1,,A\nprogram,P,2,,B\ncapacity,P,2,,\n",
        )
        .unwrap()
    }

    #[test]
    fn writer_then_reader_is_identity() {
        let m = market();
        let matched = gale_shapley(&m, ProposingSide::Applicants).unwrap();
        let text = write_matching_csv(&m, &matched);
        assert_eq!(parse_matching_csv(&text, &m).unwrap(), matched);
    }

    #[test]
    fn unmatched_rows_have_an_empty_program_field() {
        let m = parse_market_csv("applicant,A,1,,P\ncapacity,P,1,,\n").unwrap();
        let matched = gale_shapley(&m, ProposingSide::Applicants).unwrap();
        let text = write_matching_csv(&m, &matched);
        assert_eq!(text, "applicant,program\nA,\n");
        assert_eq!(parse_matching_csv(&text, &m).unwrap(), matched);
    }

    #[test]
    fn unknown_names_and_duplicates_are_positioned() {
        let m = market();
        assert_eq!(
            parse_matching_csv("applicant,program\nA,P\nB,\nGhost,P\n", &m).unwrap_err(),
            MatchingFileError::Csv {
                line: 4,
                message: "unknown applicant `Ghost`".into()
            }
        );
        assert_eq!(
            parse_matching_csv("A,P\nA,\nB,\n", &m).unwrap_err(),
            MatchingFileError::Csv {
                line: 2,
                message: "applicant `A` listed twice".into()
            }
        );
    }

    #[test]
    fn missing_applicant_row_is_an_error() {
        let m = market();
        match parse_matching_csv("A,P\n", &m).unwrap_err() {
            MatchingFileError::Invalid(msg) => assert!(msg.contains("`B`")),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn capacity_violations_surface_from_the_constructor() {
        let m = parse_market_csv(
            "applicant,A,1,,P\napplicant,B,1,,P\nprogram,P,1,,A\nprogram,P,2,,B\n",
        )
        .unwrap();
        match parse_matching_csv("A,P\nB,P\n", &m).unwrap_err() {
            MatchingFileError::Invalid(msg) => assert!(msg.contains("capacity")),
            other => panic!("unexpected: {other:?}"),
        }
    }
}
