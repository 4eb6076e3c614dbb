// Monte Carlo match curve: the more programs rank you, the likelier you
// match, saturating well before the full list.

use matchmarket::io::parse_sim_config;
use matchmarket::{simulate_market, SimConfig};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/sim_desk.cfg"
    ))
    .unwrap();
    let cfg = parse_sim_config(&text).unwrap();
    let sim = SimConfig {
        replicas: 400,
        ..cfg.sim
    };

    let result = simulate_market(&sim).unwrap();
    println!(
        "{} replicas, match rate {:.3}, mean times ranked {:.2}",
        sim.replicas, result.match_rate, result.mean_ranks_per_applicant
    );
    println!("  k   P(match | ranked >= k)   stderr      n");
    for pt in &result.curve.points {
        println!(
            "{:3}        {:.4}             {:.4}  {:6}",
            pt.k, pt.cum_match_prob, pt.stderr, pt.n_at_least_k
        );
    }

    // rerunning the same config is bit-identical, thread count included
    assert_eq!(simulate_market(&sim).unwrap(), result);
}
