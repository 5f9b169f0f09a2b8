//! Joint sweep of the `nu1` and `nu2` bounds under MSS2013, printed as a
//! matrix with `nu2` down the rows and `nu1` across the columns.
//!
//!     cargo run --release --example joint_grid [population]

use ozone_risk::config::parse_config;
use ozone_risk::engine::RunOptions;
use ozone_risk::sweep::{emit_table, run_sweep, SweepSpec, SweptTerms};
use ozone_risk::variability::Redraw;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let population: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1_000);
    let config = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/epa_mss2013.toml"))?;
    let mut inputs = config.to_inputs()?;
    inputs.population_size = population;
    let mut spec = SweepSpec::new(inputs, SweptTerms::Joint);
    spec.grid = vec![0.0, 1.0, 2.0, 3.0, 4.0];
    spec.query = config.risk;

    let result = run_sweep(&spec, &RunOptions::default())?;
    for freq in [Redraw::Daily, Redraw::Hourly] {
        println!("{} redraws, {population} persons (rows: nu2 bound, columns: nu1 bound)", freq.label());
        print!("{:>6}", "");
        for b in &spec.grid {
            print!("{b:>8}");
        }
        println!();
        for (i, row) in result.series(freq).chunks(spec.grid.len()).enumerate() {
            print!("{:>6}", spec.grid[i]);
            for cell in row {
                print!("{:>8.2}", cell.risk_pct);
            }
            println!();
        }
        println!();
    }
    std::fs::create_dir_all("target/joint_grid")?;
    emit_table(&result, "target/joint_grid/sweep_joint.csv")?;
    Ok(())
}
