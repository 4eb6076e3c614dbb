// Audit an arbitrary assignment for blocking pairs, then enumerate every
// stable matching the market admits.

use matchmarket::io::parse_market_csv;
use matchmarket::market::{Matching, ProgramId};
use matchmarket::{enumerate_stable_matchings, find_blocking_pairs};

fn main() {
    let csv = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/market_2x2.csv"
    ))
    .unwrap();
    let market = parse_market_csv(&csv).unwrap();

    // hand both applicants their first choice's seat order: A->α, B->β
    let naive = Matching::new(&market, vec![Some(ProgramId(0)), Some(ProgramId(1))]).unwrap();
    let blocks = find_blocking_pairs(&market, &naive).unwrap();
    println!("naive assignment has {} blocking pair(s):", blocks.len());
    for b in &blocks {
        println!(
            "  {} + {} (applicant moves up {:?} ranks, program gains {:?})",
            market.applicant_name(b.applicant),
            market.program_name(b.program),
            b.applicant_gain,
            b.program_gain
        );
    }
    assert!(!blocks.is_empty());

    let all = enumerate_stable_matchings(&market).unwrap();
    println!("stable matchings in this market: {}", all.len());
    for (i, m) in all.iter().enumerate() {
        let pairs: Vec<String> = market
            .applicant_ids()
            .filter_map(|a| {
                m.program_of(a)
                    .map(|p| format!("{}->{}", market.applicant_name(a), market.program_name(p)))
            })
            .collect();
        println!("  #{}: {}", i + 1, pairs.join(", "));
    }
}
