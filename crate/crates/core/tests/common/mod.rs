#![allow(dead_code)]

use std::path::PathBuf;

use ozone_risk::config::{parse_config, RunConfig};
use ozone_risk::variability::{sample_truncated, RandomStream, StreamTag};
use rayon::prelude::*;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn load_config(name: &str) -> RunConfig {
    parse_config(config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Standard normal CDF from the Taylor series
/// `0.5 + phi(z) * sum z^(2n+1) / (2n+1)!!`, summed until the terms vanish.
/// Accurate to a few ulp of 0.5 for |z| <= 9.
pub fn normal_cdf_series(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let mut compensation = 0.0;
    let z2 = z * z;
    let mut k = 1.0;
    loop {
        k += 2.0;
        term *= z2 / k;
        let y = term - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-300 || term.abs() < sum.abs() * 1e-18 {
            break;
        }
    }
    let phi = (-0.5 * z2).exp() / (2.0 * std::f64::consts::PI).sqrt();
    0.5 + phi * sum
}

/// Outcome of a direct simulation of the exceedance process.
#[derive(Debug, Clone, Copy)]
pub struct BruteForce {
    pub p: f64,
    pub trials: u64,
}

/// Fraction of `trials` sequences of `t` unit-sd draws, each truncated to
/// `|z| <= b` by discard-and-redraw, in which some draw reaches `x`.
pub fn brute_force_exceedance(x: f64, b: f64, t: u64, trials: u64, seed: u64) -> BruteForce {
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = RandomStream::new(seed, trial, StreamTag::Nu1);
            for _ in 0..t {
                let z = sample_truncated(&mut stream, 1.0, b).expect("bound is wide enough");
                if z >= x {
                    return 1;
                }
            }
            0
        })
        .sum();
    BruteForce { p: hits as f64 / trials as f64, trials }
}

pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
