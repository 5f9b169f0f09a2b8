//! Daily against hourly redraws of the within-person terms, for both
//! response functions under the default +-2 sd bounds.
//!
//!     cargo run --release --example redraw_frequency [population]

use ozone_risk::config::parse_config;
use ozone_risk::engine::{run_risk, RunOptions};
use ozone_risk::variability::Redraw;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let population: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5_000);
    println!("{:>8} {:>9} {:>9} {:>7}", "", "daily", "hourly", "se");
    for file in ["epa_mss2012.toml", "epa_mss2013.toml"] {
        let mut config = parse_config(format!("{}/configs/{file}", env!("CARGO_MANIFEST_DIR")))?;
        config.population.size = population;
        let mut risks = Vec::new();
        for redraw in [Redraw::Daily, Redraw::Hourly] {
            config.variability.redraw = redraw;
            let run = run_risk(&config.to_inputs()?, &config.risk, &RunOptions::default())?;
            risks.push(run.estimate);
        }
        println!(
            "{:>8} {:>8.2}% {:>8.2}% {:>7.2}",
            config.exposure_response.variant.label(),
            risks[0].percent_of_population,
            risks[1].percent_of_population,
            risks[1].standard_error()
        );
    }
    Ok(())
}
