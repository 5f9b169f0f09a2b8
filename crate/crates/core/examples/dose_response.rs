//! One afternoon of exercise followed by rest: accumulated dose and the
//! median decrement every 15 minutes.
//!
//!     cargo run --example dose_response

use ozone_risk::config::parse_config;
use ozone_risk::er_model::{dose_step, effective_dose, median_response, DoseState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/epa_mss2012.toml"))?.exposure_response;
    let (age, bmi) = (10.0, 17.5);
    let mut state = DoseState::at_rest();
    println!("{:>6} {:>6} {:>6} {:>8} {:>8}", "minute", "ppm", "V", "dose", "median");
    for step in 0..24 {
        let (c, v) = if step < 12 { (0.08, 55.0) } else { (0.024, 8.0) };
        state = dose_step(state, c, v, 15.0, &spec)?;
        let m = median_response(effective_dose(state.x, &spec), age, bmi, &spec);
        println!("{:>6} {:>6} {:>6} {:>8.1} {:>7.2}%", state.t, c, v, state.x, m);
    }
    println!("steady state at 80 ppb, V = 55: {:.1}", spec.steady_state_dose(0.08, 55.0));
    Ok(())
}
