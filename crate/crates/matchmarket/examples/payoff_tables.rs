// Normal-form tables for the ranking game, and the reason nobody
// strategically shortens their list: submitting everything is weakly
// dominant.

use matchmarket::{
    build_payoff_table, check_rank_all_dominance, ActionMode, PayoffSpec, PlayerId, RankPayoffs,
    RawMarket,
};

fn one_by_one() -> RawMarket {
    RawMarket {
        applicants: vec!["A".into()],
        programs: vec!["P".into()],
        capacities: [("P".into(), 1)].into(),
        applicant_prefs: [("A".into(), vec!["P".into()])].into(),
        program_prefs: [(
            "P".into(),
            matchmarket::market::RawProgramPrefs::Strict {
                strict: vec!["A".into()],
            },
        )]
        .into(),
    }
}

fn main() {
    let market = one_by_one().validate().unwrap();
    let spec = PayoffSpec {
        applicant: RankPayoffs::flat(10, 0).unwrap(),
        program: RankPayoffs::flat(10, 0).unwrap(),
    };

    // 1x1 game: each side either submits its one-entry list or nothing
    let players = vec![
        PlayerId::Applicant(matchmarket::ApplicantId(0)),
        PlayerId::Program(matchmarket::ProgramId(0)),
    ];
    let table = build_payoff_table(&market, &spec, &players, ActionMode::Subsets).unwrap();
    println!("1x1 ranking game ({} profiles):", table.entries.len());
    for entry in &table.entries {
        let labels: Vec<&str> = entry
            .action_indices
            .iter()
            .enumerate()
            .map(|(pl, &a)| table.actions[pl][a].label.as_str())
            .collect();
        println!("  {:28} -> payoffs {:?}", labels.join(" / "), entry.payoffs);
    }
    // both ranking beats any unilateral deviation; the (10, 10) cell is the
    // dominant corner
    let both_rank = table.entries.last().unwrap();
    assert_eq!(both_rank.payoffs, vec![10, 10]);

    let report = check_rank_all_dominance(&market, &spec).unwrap();
    println!(
        "full-list dominance on the 1x1 game: {} ({} comparisons)",
        if report.holds() { "holds" } else { "fails" },
        report.comparisons
    );
    assert!(report.holds());
}
