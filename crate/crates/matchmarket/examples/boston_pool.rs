// The historical tiered priority plan can strand an applicant a program
// actually preferred. Deferred acceptance on the same market cannot.

use matchmarket::io::parse_market_csv;
use matchmarket::{boston_pool, find_blocking_pairs, gale_shapley, PairingOrder, ProposingSide};

fn main() {
    let first: Vec<(u32, u32)> = PairingOrder::new().take(9).collect();
    println!("pairing order sweep: {first:?}");

    let csv = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/boston_instability.csv"
    ))
    .unwrap();
    let market = parse_market_csv(&csv).unwrap();

    let priority = boston_pool(&market).unwrap();
    println!("priority pairing:");
    for a in market.applicant_ids() {
        let program = priority
            .program_of(a)
            .map_or("unmatched", |p| market.program_name(p));
        println!("  {} -> {}", market.applicant_name(a), program);
    }

    let blocks = find_blocking_pairs(&market, &priority).unwrap();
    for b in &blocks {
        println!(
            "blocking pair: {} and {} would both rather pair up",
            market.applicant_name(b.applicant),
            market.program_name(b.program)
        );
    }
    assert_eq!(blocks.len(), 1);

    // flattening tier order into strict lists lets deferred acceptance run
    let flat = market.flatten_tiers();
    let deferred = gale_shapley(&flat, ProposingSide::Applicants).unwrap();
    assert!(find_blocking_pairs(&market, &deferred).unwrap().is_empty());
    println!("deferred acceptance on the flattened market: stable");
}
