//! Writes an hourly ozone series to CSV, reads it back, and runs a short
//! season against it. Any `timestamp,ppb` file covering every hour of the
//! season can be used the same way via `ozone_file` in a config.
//!
//!     cargo run --release --example custom_ozone_csv

use ozone_risk::config::parse_config;
use ozone_risk::engine::{run_risk, RunOptions};
use ozone_risk::population::{load_ozone_series, OzoneSeries, Scenario, Season, SyntheticOzone};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let season: Season = "2017-06-01:2017-08-31".parse()?;
    let path = std::env::temp_dir().join("ozone_risk_example.csv");

    let params = SyntheticOzone { peak_ppb: 90.0, ..SyntheticOzone::default() };
    let written = OzoneSeries::synthetic(season, &params, 1)?;
    written.write_csv(std::fs::File::create(&path)?)?;
    let ozone = load_ozone_series(&path, season)?;
    let drift = ozone.hourly_ppb().iter().zip(written.hourly_ppb()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(drift <= 5e-4, "round trip drifted by {drift}");
    println!("{} hourly values in {}", ozone.hourly_ppb().len(), path.display());

    let config = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/epa_mss2012.toml"))?;
    let mut inputs = config.to_inputs()?;
    inputs.season = season;
    inputs.population_size = 5_000;
    inputs.scenario = Scenario::ambient(ozone);
    let run = run_risk(&inputs, &config.risk, &RunOptions::default())?;
    let worst = run.records.iter().map(|r| r.max_dfev1).fold(f64::MIN, f64::max);
    println!(
        "summer at 90 ppb peaks: {:.2}% reach 10% at least once (largest decrement {worst:.1}%)",
        run.estimate.percent_of_population
    );
    Ok(())
}
