//! Random streams are keyed by (seed, person, term), so results do not
//! depend on thread count or the order persons are simulated in.
//!
//!     cargo run --release --example reproducible_streams

use ozone_risk::config::parse_config;
use ozone_risk::engine::{run_risk, write_person_records, RunOptions};
use ozone_risk::variability::{RandomStream, StreamTag};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: Vec<f64> = (0..3).map(|p| RandomStream::new(42, p, StreamTag::Nu1).standard_normal()).collect();
    let b: Vec<f64> = (0..3).rev().map(|p| RandomStream::new(42, p, StreamTag::Nu1).standard_normal()).collect();
    println!("first nu1 variate of persons 0..3: {a:.4?} (reverse order: {b:.4?})");

    let mut config = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/epa_mss2012.toml"))?;
    config.population.size = 2_000;
    let inputs = config.to_inputs()?;
    let mut outputs = Vec::new();
    for threads in [1, 2, 4] {
        let run = run_risk(&inputs, &config.risk, &RunOptions::with_threads(threads))?;
        let mut bytes = Vec::new();
        write_person_records(&run.records, &mut bytes)?;
        println!("{threads} thread(s): risk {:.2}%, {} bytes of records", run.estimate.percent_of_population, bytes.len());
        outputs.push(bytes);
    }
    println!("identical: {}", outputs.windows(2).all(|w| w[0] == w[1]));
    Ok(())
}
