//! Closed-form exceedance probabilities for noise-only scenarios.
//!
//! With no ozone effect a decrement can only come from the additive term
//! `nu1`, a normal truncated at `±b` sd. For a threshold `x` sd,
//!
//! ```text
//! P_nd = (Φ(x) − Φ(−b)) / (Φ(b) − Φ(−b))     one draw stays below x
//! P_d  = 1 − P_nd^t                           at least one of t draws reaches x
//! ```
//!
//! Under the exposure-proportional variant the `nu2` term is multiplied by
//! the median response, which is zero without ozone, so the same formulas
//! apply with that variant's `sigma_nu1`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

/// Complementary error function, after W. J. Cody's rational Chebyshev
/// approximations (Math. Comp. 23, 1969). Relative error near 1e-16 in f64.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= 0.46875 {
        return 1.0 - x * erf_small(y * y);
    }
    let upper = if y >= 26.543 {
        0.0
    } else if y <= 4.0 {
        erfcx_mid(y) * exp_neg_square(y)
    } else {
        erfcx_large(y) * exp_neg_square(y)
    };
    if x < 0.0 {
        2.0 - upper
    } else {
        upper
    }
}

pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        x * erf_small(y * y)
    } else if x < 0.0 {
        erfc(y) - 1.0
    } else {
        1.0 - erfc(y)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(z)` without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 0.0;
    }
    if z == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Variance of a standard normal truncated symmetrically at `±b`, times
/// `sigma²`: `sigma² (1 − 2 b φ(b) / (2Φ(b) − 1))`.
pub fn truncated_normal_variance(sigma: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    if b.is_infinite() {
        return sigma * sigma;
    }
    let mass = 1.0 - 2.0 * normal_sf(b);
    sigma * sigma * (1.0 - 2.0 * b * normal_pdf(b) / mass)
}

// exp(-y²) evaluated in two pieces to limit cancellation for large y.
fn exp_neg_square(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

fn erf_small(z: f64) -> f64 {
    const A: [f64; 5] = [
        3.161_123_743_870_565_6,
        1.138_641_541_510_501_6e2,
        3.774_852_376_853_020_2e2,
        3.209_377_589_138_469_5e3,
        1.857_777_061_846_031_5e-1,
    ];
    const B: [f64; 4] = [
        2.360_129_095_234_412_1e1,
        2.440_246_379_344_441_7e2,
        1.282_616_526_077_372_3e3,
        2.844_236_833_439_170_6e3,
    ];
    let mut num = A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + A[i]) * z;
        den = (den + B[i]) * z;
    }
    (num + A[3]) / (den + B[3])
}

fn erfcx_mid(y: f64) -> f64 {
    const C: [f64; 9] = [
        5.641_884_969_886_700_9e-1,
        8.883_149_794_388_376,
        6.611_919_063_714_163e1,
        2.986_351_381_974_001_3e2,
        8.819_522_212_417_691e2,
        1.712_047_612_634_070_6e3,
        2.051_078_377_826_071_5e3,
        1.230_339_354_797_997_2e3,
        2.153_115_354_744_038_5e-8,
    ];
    const D: [f64; 8] = [
        1.574_492_611_070_983_5e1,
        1.176_939_508_913_125e2,
        5.371_811_018_620_099e2,
        1.621_389_574_566_690_2e3,
        3.290_799_235_733_459_7e3,
        4.362_619_090_143_247e3,
        3.439_367_674_143_721_6e3,
        1.230_339_354_803_749_4e3,
    ];
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    (num + C[7]) / (den + D[7])
}

fn erfcx_large(y: f64) -> f64 {
    const P: [f64; 6] = [
        3.053_266_349_612_323_4e-1,
        3.603_448_999_498_044_4e-1,
        1.257_817_261_112_292_5e-1,
        1.608_378_514_874_227_7e-2,
        6.587_491_615_298_378e-4,
        1.631_538_713_730_209_8e-2,
    ];
    const Q: [f64; 5] = [
        2.568_520_192_289_822,
        1.872_952_849_923_460_4,
        5.279_051_029_514_284e-1,
        6.051_834_131_244_132e-2,
        2.335_204_976_268_691_8e-3,
    ];
    const FRAC_1_SQRT_PI: f64 = 5.641_895_835_477_562_9e-1;
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    (FRAC_1_SQRT_PI - r) / y
}

/// Threshold and bound in standard deviations of the additive term, and
/// the number of independent draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceedanceQuery {
    pub x_sd: f64,
    pub b_sd: f64,
    pub t: u64,
}

/// Probability that a single truncated draw stays below `x` sd.
/// Returns 1 when the bound does not exceed the threshold.
pub fn p_no_decrement(q: &ExceedanceQuery) -> f64 {
    if q.b_sd <= q.x_sd {
        return 1.0;
    }
    let lower = normal_cdf(-q.b_sd);
    (normal_cdf(q.x_sd) - lower) / (normal_cdf(q.b_sd) - lower)
}

/// `1 − P_nd`, evaluated from upper tails so that values near zero keep
/// their precision.
pub fn p_single_exceedance(q: &ExceedanceQuery) -> f64 {
    if q.b_sd <= q.x_sd {
        return 0.0;
    }
    let mass = 1.0 - 2.0 * normal_sf(q.b_sd);
    ((normal_sf(q.x_sd) - normal_sf(q.b_sd)) / mass).clamp(0.0, 1.0)
}

/// Probability of at least one draw reaching `x` sd among `t` draws.
pub fn p_at_least_one(q: &ExceedanceQuery) -> f64 {
    if q.t == 0 {
        return 0.0;
    }
    let p = p_single_exceedance(q);
    if p >= 1.0 {
        return 1.0;
    }
    -(q.t as f64 * (-p).ln_1p()).exp_m1()
}

/// Percentage of a noise-only population reaching `threshold` percent
/// decrement at least once over `t` draws of `nu1`.
pub fn zero_ozone_risk(threshold: f64, sigma_nu1: f64, b_sd: f64, t: u64) -> f64 {
    if sigma_nu1 <= 0.0 {
        return if threshold > 0.0 { 0.0 } else { 100.0 };
    }
    let q = ExceedanceQuery { x_sd: threshold / sigma_nu1, b_sd, t };
    100.0 * p_at_least_one(&q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_anchors() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_eq!(normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(normal_cdf(f64::NEG_INFINITY), 0.0);
        assert!((normal_cdf(40.0) - 1.0).abs() < 1e-300 + f64::EPSILON);
        for i in -800..=800 {
            let z = f64::from(i) / 100.0;
            assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() <= 1e-12, "z = {z}");
        }
    }

    #[test]
    fn erf_known_values() {
        // Abramowitz & Stegun table 7.1.
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erfc(2.0) - 0.004_677_734_981_047_266).abs() < 1e-17);
        assert!((erf(-1.0) + 0.842_700_792_949_714_9).abs() < 1e-15);
    }

    #[test]
    fn no_decrement_edge_cases() {
        let q = |x_sd, b_sd| ExceedanceQuery { x_sd, b_sd, t: 1 };
        assert_eq!(p_no_decrement(&q(2.0, 2.0)), 1.0);
        assert_eq!(p_no_decrement(&q(2.5, 2.0)), 1.0);
        assert_eq!(p_no_decrement(&q(0.0, f64::INFINITY)), 0.5);
        let unbounded = p_no_decrement(&q(2.4213, f64::INFINITY));
        assert_eq!(unbounded, normal_cdf(2.4213));
        assert!((unbounded - 0.992_267_445_777).abs() < 1e-12);
    }

    #[test]
    fn at_least_one_edge_cases() {
        let q = ExceedanceQuery { x_sd: 1.0, b_sd: 3.0, t: 0 };
        assert_eq!(p_at_least_one(&q), 0.0);
        let mut last = 0.0;
        for t in [1, 2, 10, 275, 6600] {
            let p = p_at_least_one(&ExceedanceQuery { t, ..q });
            assert!(p > last || (p == 1.0 && t > 10), "t={t}");
            last = p;
        }
        let direct = 1.0 - p_no_decrement(&ExceedanceQuery { t: 24, ..q }).powi(24);
        assert!((p_at_least_one(&ExceedanceQuery { t: 24, ..q }) - direct).abs() < 1e-13);
    }

    #[test]
    fn zero_ozone_risk_cases() {
        assert_eq!(zero_ozone_risk(10.0, 4.13, 2.0, 275), 0.0);
        assert_eq!(zero_ozone_risk(10.0, 3.02, 2.0, 6600), 0.0);
        assert_eq!(zero_ozone_risk(10.0, 0.0, f64::INFINITY, 275), 0.0);
        let r = zero_ozone_risk(10.0, 4.13, f64::INFINITY, 275);
        assert!((r - 88.2).abs() < 0.1, "{r}");
        let r = zero_ozone_risk(10.0, 3.02, f64::INFINITY, 275);
        assert!((r - 12.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn truncated_variance_reference_value() {
        let sd = truncated_normal_variance(1.0, 2.0).sqrt();
        assert!((sd - 0.8796).abs() < 1e-4, "{sd}");
        assert_eq!(truncated_normal_variance(4.13, 0.0), 0.0);
        assert_eq!(truncated_normal_variance(2.0, f64::INFINITY), 4.0);
    }
}
