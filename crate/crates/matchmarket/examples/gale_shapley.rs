// Deferred acceptance on a contested 2x2 market, from both sides.

use matchmarket::io::parse_market_csv;
use matchmarket::{gale_shapley, is_stable, ProposingSide};

fn main() {
    let csv = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/market_2x2.csv"
    ))
    .unwrap();
    let market = parse_market_csv(&csv).unwrap();

    for side in [ProposingSide::Applicants, ProposingSide::Programs] {
        let matching = gale_shapley(&market, side).unwrap();
        println!("{side:?} propose:");
        for a in market.applicant_ids() {
            let program = matching
                .program_of(a)
                .map_or("-", |p| market.program_name(p));
            println!("  {} -> {}", market.applicant_name(a), program);
        }
        // stability is an engine postcondition, not luck
        assert!(is_stable(&market, &matching).unwrap());
    }

    // Everyone wanted α, but this market has a single stable outcome,
    // so the proposing side makes no difference here.
    let a = gale_shapley(&market, ProposingSide::Applicants).unwrap();
    let b = gale_shapley(&market, ProposingSide::Programs).unwrap();
    assert_eq!(a, b);
    println!("both sides agree: the stable outcome is unique in this market");
}
