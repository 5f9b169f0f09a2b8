//! Closed-form probability of at least one decrement of 10% or more in a
//! noise-only population, over bounds and numbers of draws.
//!
//!     cargo run --example oracle_table

use ozone_risk::oracle::{p_at_least_one, p_no_decrement, ExceedanceQuery};

fn main() {
    let threshold = 10.0;
    let bounds = [2.0, 2.5, 3.0, 3.5, 4.0, f64::INFINITY];
    for (name, sigma) in [("MSS2012", 4.13), ("MSS2013", 3.02)] {
        let x = threshold / sigma;
        println!("{name}: sigma_nu1 = {sigma}, threshold = {x:.4} sd");
        println!("{:>8} {:>12} {:>10} {:>10}", "bound", "P(single)", "275 days", "6600 hours");
        for b in bounds {
            let q = |t| ExceedanceQuery { x_sd: x, b_sd: b, t };
            println!(
                "{:>8} {:>12.3e} {:>9.2}% {:>9.2}%",
                b,
                1.0 - p_no_decrement(&q(1)),
                100.0 * p_at_least_one(&q(275)),
                100.0 * p_at_least_one(&q(6600))
            );
        }
        println!();
    }
}
