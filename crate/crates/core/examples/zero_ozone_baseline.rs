//! Noise-only baseline: with `beta3 = 0` every decrement is a bare `nu1`
//! draw, so the simulated risk can be compared with the closed form.
//!
//!     cargo run --release --example zero_ozone_baseline [population]

use ozone_risk::config::parse_config;
use ozone_risk::engine::{run_risk, RunOptions};
use ozone_risk::oracle::zero_ozone_risk;
use ozone_risk::variability::Redraw;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let population = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let mut config = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/zero_ozone_mss2012.toml"))?;
    config.population.size = population;

    println!("{:>7} {:>8} {:>10} {:>10} {:>8}", "redraw", "bound", "simulated", "oracle", "se");
    for redraw in [Redraw::Daily, Redraw::Hourly] {
        for bound in [2.0, 3.0, f64::INFINITY] {
            config.variability.redraw = redraw;
            config.variability.bound_nu1 = bound;
            let inputs = config.to_inputs()?;
            let run = run_risk(&inputs, &config.risk, &RunOptions::default())?;
            let draws = match redraw {
                Redraw::Daily => u64::from(inputs.season.n_days()),
                Redraw::Hourly => inputs.season.n_hours() as u64,
            };
            let exact = zero_ozone_risk(config.risk.threshold, config.exposure_response.sigma_nu1, bound, draws);
            println!(
                "{:>7} {:>8} {:>9.2}% {:>9.2}% {:>8.2}",
                redraw.label(),
                bound,
                run.estimate.percent_of_population,
                exact,
                run.estimate.standard_error()
            );
        }
    }
    Ok(())
}
