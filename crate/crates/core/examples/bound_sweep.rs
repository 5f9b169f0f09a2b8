//! Sweeps the bound on one error term over 0 to 4 sd for daily and hourly
//! redraws, writing a CSV table and an SVG chart.
//!
//!     cargo run --release --example bound_sweep [u|nu1|nu2] [population] [out_dir]

use ozone_risk::config::parse_config;
use ozone_risk::engine::RunOptions;
use ozone_risk::er_model::Variant;
use ozone_risk::sweep::{emit_chart, emit_table, run_sweep, SweepSpec, SweptTerms};
use ozone_risk::variability::Redraw;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let terms: SweptTerms = args.next().unwrap_or_else(|| "nu1".into()).parse()?;
    let population: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2_000);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "target/bound_sweep".into()));

    let file = if terms == SweptTerms::Single(ozone_risk::variability::Term::Nu2) { "epa_mss2013.toml" } else { "epa_mss2012.toml" };
    let config = parse_config(format!("{}/configs/{file}", env!("CARGO_MANIFEST_DIR")))?;
    let mut inputs = config.to_inputs()?;
    inputs.population_size = population;
    let mut spec = SweepSpec::new(inputs, terms);
    spec.query = config.risk;

    let result = run_sweep(&spec, &RunOptions::default())?;
    std::fs::create_dir_all(&out)?;
    let stem = format!("sweep_{}", terms.label());
    emit_table(&result, out.join(format!("{stem}.csv")))?;
    emit_chart(&result, out.join(format!("{stem}.svg")))?;

    let variant = if spec.base.er.variant == Variant::Mss2012 { "MSS2012" } else { "MSS2013" };
    println!("{variant}, bound on {} swept, {population} persons", terms.label());
    println!("{:>6} {:>9} {:>9}", "bound", "daily", "hourly");
    let (daily, hourly) = (result.series(Redraw::Daily), result.series(Redraw::Hourly));
    for (d, h) in daily.iter().zip(&hourly) {
        println!("{:>6} {:>8.2}% {:>8.2}%", d.swept_bound(), d.risk_pct, h.risk_pct);
    }
    println!("wrote {}", out.display());
    Ok(())
}
