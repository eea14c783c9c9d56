//! Hermetic harvest runs at configured per-spec satisfaction ratios: the
//! measured pass-rate table reproduces the knobs within binomial tolerance,
//! and every emitted dataset entry re-verifies clean.

mod common;

use common::system;
use plancheck::checker::verify_all;
use plancheck::compile::tree2fsa;
use plancheck::harvest::{
    harvest, stats, validate_dataset, HarvestConfig, MockGenerator, TemplateFamily,
};
use plancheck::plan::{parse_plan, resolve_plan};
use plancheck::system::{build_transition_system, SystemSpec};

fn tasks(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("task number {i}")).collect()
}

fn run_rates(
    system: &SystemSpec,
    family: TemplateFamily,
    ratios: &[f64],
    seed: u64,
) -> (Vec<f64>, plancheck::harvest::HarvestOutcome) {
    let client = MockGenerator::new(family, ratios.to_vec(), seed);
    let outcome = harvest(
        &client,
        system,
        &tasks(40),
        &HarvestConfig {
            seeds_per_task: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let report = stats(&outcome.records).unwrap();
    (report.rows.iter().map(|r| r.pass_rate).collect(), outcome)
}

#[test]
fn fetch_and_robot_dog_rates_match_their_knobs() {
    let cb = system("codebotler");
    let (rates, _) = run_rates(&cb, TemplateFamily::Fetch, &[0.7], 2);
    assert!(
        (rates[0] - 0.7).abs() <= 0.05,
        "fetch rate {} out of tolerance",
        rates[0]
    );

    let dog = system("robot_dog");
    let (rates, _) = run_rates(&dog, TemplateFamily::RobotDog, &[0.65, 0.45, 0.9], 2);
    for (got, want) in rates.iter().zip([0.65, 0.45, 0.9]) {
        assert!(
            (got - want).abs() <= 0.05,
            "rate {got} out of tolerance for target {want}"
        );
    }
}

#[test]
fn emitted_dataset_reverifies_and_validates() {
    let dog = system("robot_dog");
    let (_, outcome) = run_rates(&dog, TemplateFamily::RobotDog, &[0.65, 0.45, 0.9], 2);
    assert!(!outcome.dataset.is_empty());

    let ts = build_transition_system(&dog).unwrap();
    let specs: Vec<_> = dog.specs.iter().map(|(_, f)| f.clone()).collect();
    for entry in &outcome.dataset {
        let plan = parse_plan(&entry.completion).unwrap();
        let fsa = tree2fsa(&resolve_plan(&plan, &dog)).fsa;
        let verdicts = verify_all(&fsa, &ts, &specs).unwrap();
        assert!(verdicts.iter().all(|v| v.passed()), "dataset entry re-failed");
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dog.jsonl");
    plancheck::harvest::emit_dataset(&outcome.dataset, &path, false).unwrap();
    assert_eq!(validate_dataset(&path).unwrap(), outcome.dataset.len());
}
