// The applications arms race: replay the season, letting applicants
// best-respond to last season's observed interview rate. With cheap
// applications the count climbs until every program is applied to.

use matchmarket::{
    escalation_dynamics, Budget, BudgetMode, CapacityDist, CostSpec, FeeSchedule, FeeTier,
    Screening, SimConfig,
};

fn main() {
    let sim = SimConfig {
        applicants: 30,
        programs: 10,
        capacity: CapacityDist::Fixed(1),
        applications_per_applicant: 2,
        screening: Screening::Bernoulli(0.35),
        correlation: 0.5,
        replicas: 200,
        seed: 1952,
    };
    let spec = CostSpec {
        fees: FeeSchedule::new(vec![FeeTier {
            up_to: None,
            flat: 0,
            per_app: 500,
        }])
        .unwrap(),
        interview_prob: 0.35,
        interview_cost_mean: 0.0,
        interview_time: 0.0,
        payoff_if_interviewed: 200_000.0,
        payoff_if_rejected: 0.0,
        overrides: Vec::new(),
    };

    let rounds =
        escalation_dynamics(&sim, 6, &spec, &Budget::UNLIMITED, BudgetMode::Expected).unwrap();
    println!("round  q   mean interviews   observed rank rate");
    for r in &rounds {
        println!(
            "{:5} {:3}      {:7.3}            {:.4}",
            r.round, r.applications, r.mean_interviews, r.empirical_interview_prob
        );
    }

    // seats are scarce (10 < 30), so the best response is the whole list
    assert_eq!(rounds.last().unwrap().applications, sim.programs);
    for w in rounds.windows(2) {
        assert!(w[1].applications >= w[0].applications);
    }
}
