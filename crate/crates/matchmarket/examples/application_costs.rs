// Season economics under a tiered fee schedule: what q applications cost,
// how many interviews to expect, and where expected value peaks.

use matchmarket::io::parse_cost_config;
use matchmarket::{
    application_cost, expected_interviews, expected_total_spend, optimal_application_count,
    BudgetMode,
};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/ophtho2019.cfg"
    ))
    .unwrap();
    let cfg = parse_cost_config(&text).unwrap();

    println!("fee schedule (cumulative, cents):");
    for q in [1, 10, 11, 40, 41, 116] {
        println!("  A({q:3}) = {:7}", application_cost(q, &cfg.spec));
    }
    // the steps are exact integers; expectations below are not
    assert_eq!(application_cost(10, &cfg.spec), 6_000);
    assert_eq!(application_cost(116, &cfg.spec), 317_000);

    let q = cfg.programs;
    println!(
        "at q = {q}: {:.3} expected interviews, {:.1} cents expected spend",
        expected_interviews(q, &cfg.spec),
        expected_total_spend(q, &cfg.spec, BudgetMode::Expected)
    );

    let (q_star, value) =
        optimal_application_count(&cfg.spec, &cfg.budget, cfg.programs, BudgetMode::Expected);
    println!("optimal application count: {q_star} (expected net value {value:.1} cents)");
    assert_eq!(q_star, 116);
}
