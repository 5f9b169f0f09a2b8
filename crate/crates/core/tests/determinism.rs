mod common;

use common::load_config;
use ozone_risk::engine::{run_risk, run_simulation, write_person_records, RunOptions, RunSummary};
use ozone_risk::variability::Redraw;

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let mut config = load_config("epa_mss2013.toml");
    config.population.size = 400;
    config.variability.redraw = Redraw::Hourly;
    let inputs = config.to_inputs().unwrap();
    let render = |threads| {
        let run = run_risk(&inputs, &config.risk, &RunOptions::with_threads(threads)).unwrap();
        let mut bytes = Vec::new();
        write_person_records(&run.records, &mut bytes).unwrap();
        (bytes, RunSummary::new(&inputs, &config.risk, &run).to_json())
    };
    let one = render(1);
    for threads in [2, 4, 8] {
        assert_eq!(render(threads), one, "{threads} threads");
    }
}

#[test]
fn persons_do_not_depend_on_population_size() {
    let mut config = load_config("epa_mss2012.toml");
    config.population.size = 50;
    let small = run_simulation(&config.to_inputs().unwrap(), &RunOptions::default()).unwrap();
    config.population.size = 120;
    let large = run_simulation(&config.to_inputs().unwrap(), &RunOptions::default()).unwrap();
    assert_eq!(small[..], large[..50]);
}

#[test]
fn seed_changes_results() {
    let mut config = load_config("zero_ozone_mss2012.toml");
    config.population.size = 200;
    let a = run_risk(&config.to_inputs().unwrap(), &config.risk, &RunOptions::default()).unwrap();
    config.master_seed += 1;
    let b = run_risk(&config.to_inputs().unwrap(), &config.risk, &RunOptions::default()).unwrap();
    assert_ne!(a.records, b.records);
}
