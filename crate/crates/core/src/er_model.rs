//! Exposure-response math: accumulated dose, response threshold, the
//! sigmoid median response and the assembled lung-function decrement.
//!
//! Units are fixed at this layer: concentration in ppm, ventilation in
//! L/min/m² of body surface area and time in minutes. Decrements are in
//! percent, with positive values meaning worse lung function.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErModelError {
    #[error("non-finite input to dose step: {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("dose step requires dt > 0, got {0}")]
    NonPositiveStep(f64),
    #[error("negative {name} ({value}) is not a valid exposure input")]
    Negative { name: &'static str, value: f64 },
    #[error("invalid exposure-response parameters: {0}")]
    InvalidSpec(String),
}

/// Which error specification the response function uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Additive error only: `E = nu1`.
    #[serde(rename = "MSS2012")]
    Mss2012,
    /// Additive plus exposure-proportional error: `E = nu1 + nu2 * exp(U) * M`.
    #[serde(rename = "MSS2013")]
    Mss2013,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Mss2012 => "MSS2012",
            Variant::Mss2013 => "MSS2013",
        }
    }
}

/// Coefficients and error-term standard deviations of one
/// exposure-response function. There is no coefficient numbered 7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErFunctionSpec {
    pub variant: Variant,
    /// Intercept of the response amplitude (percent).
    pub beta1: f64,
    /// Age slope of the response amplitude (percent per year).
    pub beta2: f64,
    /// Sigmoid steepness in inverse dose units.
    pub beta3: f64,
    /// Sigmoid offset (dimensionless).
    pub beta4: f64,
    /// Dose decay rate, 1/min.
    pub beta5: f64,
    /// Ventilation exponent.
    pub beta6: f64,
    /// BMI slope of the response amplitude (percent per kg/m²).
    pub beta8: f64,
    /// Response threshold in dose units.
    pub beta9: f64,
    pub sigma_u: f64,
    pub sigma_nu1: f64,
    pub sigma_nu2: f64,
    /// Centering age, years.
    pub age_mean: f64,
    /// Centering BMI, kg/m².
    pub bmi_mean: f64,
}

impl ErFunctionSpec {
    pub fn validate(&self) -> Result<(), ErModelError> {
        let fields = [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("beta4", self.beta4),
            ("beta5", self.beta5),
            ("beta6", self.beta6),
            ("beta8", self.beta8),
            ("beta9", self.beta9),
            ("sigma_u", self.sigma_u),
            ("sigma_nu1", self.sigma_nu1),
            ("sigma_nu2", self.sigma_nu2),
            ("age_mean", self.age_mean),
            ("bmi_mean", self.bmi_mean),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ErModelError::InvalidSpec(format!("{name} must be finite, got {value}")));
            }
        }
        for (name, value) in [("sigma_u", self.sigma_u), ("sigma_nu1", self.sigma_nu1), ("sigma_nu2", self.sigma_nu2)] {
            if value < 0.0 {
                return Err(ErModelError::InvalidSpec(format!("{name} must be >= 0, got {value}")));
            }
        }
        if self.beta5 <= 0.0 {
            return Err(ErModelError::InvalidSpec(format!("beta5 must be > 0, got {}", self.beta5)));
        }
        if self.beta9 < 0.0 {
            return Err(ErModelError::InvalidSpec(format!("beta9 must be >= 0, got {}", self.beta9)));
        }
        if self.beta4 <= -1.0 {
            return Err(ErModelError::InvalidSpec(format!("beta4 must be > -1, got {}", self.beta4)));
        }
        Ok(())
    }

    /// The same function with `beta3 = 0`, under which ozone has no effect.
    pub fn without_ozone_effect(mut self) -> Self {
        self.beta3 = 0.0;
        self
    }

    /// Response amplitude `N = beta1 + beta2 (age - mean) + beta8 (bmi - mean)`.
    pub fn amplitude(&self, age: f64, bmi: f64) -> f64 {
        self.beta1 + self.beta2 * (age - self.age_mean) + self.beta8 * (bmi - self.bmi_mean)
    }

    /// Dose approached under constant exposure, `(c / beta5) * v^beta6`.
    pub fn steady_state_dose(&self, c: f64, v: f64) -> f64 {
        c / self.beta5 * v.powf(self.beta6)
    }
}

/// Accumulated ozone exposure at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoseState {
    pub x: f64,
    /// Minutes since season start.
    pub t: f64,
}

impl DoseState {
    pub fn at_rest() -> Self {
        Self::default()
    }
}

/// Advances the dose through one event of constant concentration `c` (ppm)
/// and ventilation `v` lasting `dt` minutes.
pub fn dose_step(
    state: DoseState,
    c: f64,
    v: f64,
    dt: f64,
    spec: &ErFunctionSpec,
) -> Result<DoseState, ErModelError> {
    for (name, value) in [("x", state.x), ("t", state.t), ("c", c), ("v", v), ("dt", dt)] {
        if !value.is_finite() {
            return Err(ErModelError::NonFinite { name, value });
        }
    }
    if dt <= 0.0 {
        return Err(ErModelError::NonPositiveStep(dt));
    }
    for (name, value) in [("x", state.x), ("c", c), ("v", v)] {
        if value < 0.0 {
            return Err(ErModelError::Negative { name, value });
        }
    }
    let decay = (-spec.beta5 * dt).exp();
    Ok(DoseState {
        x: advance(state.x, decay, drive(c, v, spec)),
        t: state.t + dt,
    })
}

/// `(c / beta5) * v^beta6`, skipping the power when there is no exposure.
#[inline]
pub(crate) fn drive(c: f64, v: f64, spec: &ErFunctionSpec) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c / spec.beta5 * v.powf(spec.beta6)
    }
}

#[inline]
pub(crate) fn advance(x: f64, decay: f64, drive: f64) -> f64 {
    (x * decay + drive * (1.0 - decay)).max(0.0)
}

/// Dose above the response threshold, `max(0, x - beta9)`.
pub fn effective_dose(x: f64, spec: &ErFunctionSpec) -> f64 {
    (x - spec.beta9).max(0.0)
}

/// The bracketed sigmoid term `M`. Zero at zero effective dose and
/// identically zero when `beta3 = 0`. Negative amplitudes pass through.
pub fn median_response(x_eff: f64, age: f64, bmi: f64, spec: &ErFunctionSpec) -> f64 {
    let n = spec.amplitude(age, bmi);
    sigmoid_response(n, x_eff, spec)
}

#[inline]
pub(crate) fn sigmoid_response(n: f64, x_eff: f64, spec: &ErFunctionSpec) -> f64 {
    n / (1.0 + spec.beta4 * (-spec.beta3 * x_eff).exp()) - n / (1.0 + spec.beta4)
}

/// Assembles the decrement from the median response and the error draws.
/// `nu2` is ignored under the additive-only variant.
pub fn dfev1(m: f64, u: f64, nu1: f64, nu2: f64, spec: &ErFunctionSpec) -> f64 {
    let scaled = u.exp() * m;
    match spec.variant {
        Variant::Mss2012 => scaled + nu1,
        Variant::Mss2013 => scaled + nu1 + nu2 * scaled,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Arbitrary but plausible coefficients; no test depends on their provenance.
    pub(crate) fn test_spec(variant: Variant) -> ErFunctionSpec {
        ErFunctionSpec {
            variant,
            beta1: 10.9,
            beta2: -0.21,
            beta3: 0.0132,
            beta4: 143.0,
            beta5: 0.0088,
            beta6: 0.84,
            beta8: 0.05,
            beta9: 12.0,
            sigma_u: 0.96,
            sigma_nu1: 4.13,
            sigma_nu2: 1.47,
            age_mean: 23.8,
            bmi_mean: 23.1,
        }
    }

    #[test]
    fn zero_concentration_is_pure_decay() {
        let spec = test_spec(Variant::Mss2012);
        let s = dose_step(DoseState { x: 50.0, t: 0.0 }, 0.0, 30.0, 45.0, &spec).unwrap();
        assert_eq!(s.x, 50.0 * (-spec.beta5 * 45.0).exp());
        assert_eq!(s.t, 45.0);
    }

    #[test]
    fn long_step_reaches_fixed_point() {
        let spec = test_spec(Variant::Mss2012);
        let (c, v) = (0.07, 25.0);
        let s = dose_step(DoseState::at_rest(), c, v, 1.0e5, &spec).unwrap();
        let fixed = spec.steady_state_dose(c, v);
        assert!((s.x - fixed).abs() <= 1e-12 * fixed);
    }

    #[test]
    fn dose_step_rejects_bad_inputs() {
        let spec = test_spec(Variant::Mss2012);
        let rest = DoseState::at_rest();
        assert!(matches!(dose_step(rest, f64::NAN, 1.0, 1.0, &spec), Err(ErModelError::NonFinite { .. })));
        assert!(matches!(dose_step(rest, 0.1, f64::INFINITY, 1.0, &spec), Err(ErModelError::NonFinite { .. })));
        assert!(matches!(dose_step(rest, 0.1, 1.0, 0.0, &spec), Err(ErModelError::NonPositiveStep(_))));
        assert!(matches!(dose_step(rest, -0.1, 1.0, 1.0, &spec), Err(ErModelError::Negative { .. })));
    }

    #[test]
    fn threshold_boundaries() {
        let spec = test_spec(Variant::Mss2012);
        assert_eq!(effective_dose(spec.beta9, &spec), 0.0);
        assert_eq!(effective_dose(0.0, &spec), 0.0);
        assert_eq!(effective_dose(spec.beta9 + 1.0, &spec), 1.0);
    }

    #[test]
    fn median_response_zero_cases() {
        let spec = test_spec(Variant::Mss2013);
        for (age, bmi) in [(5.0, 14.0), (18.0, 30.0), (60.0, 40.0)] {
            assert_eq!(median_response(0.0, age, bmi, &spec), 0.0);
        }
        let flat = spec.without_ozone_effect();
        for x in [0.0, 1.0, 250.0, 1e6] {
            assert_eq!(median_response(x, 10.0, 17.0, &flat), 0.0);
        }
    }

    #[test]
    fn median_response_asymptote() {
        let spec = test_spec(Variant::Mss2012);
        let n = spec.amplitude(10.0, 17.0);
        let limit = n * spec.beta4 / (1.0 + spec.beta4);
        let m = median_response(1e5, 10.0, 17.0, &spec);
        assert!((m - limit).abs() < 1e-12 * limit.abs());
    }

    #[test]
    fn dfev1_noise_only_extremes() {
        let s12 = ErFunctionSpec { sigma_nu1: 4.13, ..test_spec(Variant::Mss2012) };
        let s13 = ErFunctionSpec { sigma_nu1: 3.02, ..test_spec(Variant::Mss2013) };
        assert_eq!(dfev1(0.0, 1.7, 0.0, 0.0, &s12), 0.0);
        assert_eq!(dfev1(0.0, 0.3, 2.0 * s12.sigma_nu1, 0.0, &s12), 8.26);
        assert_eq!(dfev1(0.0, -0.3, 2.0 * s13.sigma_nu1, 0.9, &s13), 6.04);
    }

    #[test]
    fn mss2012_ignores_nu2() {
        let spec = test_spec(Variant::Mss2012);
        assert_eq!(dfev1(2.0, 0.5, 1.0, 3.0, &spec), dfev1(2.0, 0.5, 1.0, 0.0, &spec));
    }

    #[test]
    fn validate_rejects_bad_specs() {
        let base = test_spec(Variant::Mss2013);
        assert!(base.validate().is_ok());
        assert!(ErFunctionSpec { beta5: 0.0, ..base }.validate().is_err());
        assert!(ErFunctionSpec { beta9: -1.0, ..base }.validate().is_err());
        assert!(ErFunctionSpec { sigma_nu1: -0.1, ..base }.validate().is_err());
        assert!(ErFunctionSpec { beta1: f64::NAN, ..base }.validate().is_err());
    }

    proptest! {
        #[test]
        fn semigroup_identity(x0 in 0.0..500.0f64, c in 0.0..0.2f64, v in 0.0..60.0f64, dt in 0.01..600.0f64) {
            let spec = test_spec(Variant::Mss2012);
            let s0 = DoseState { x: x0, t: 0.0 };
            let whole = dose_step(s0, c, v, dt, &spec).unwrap();
            let half = dose_step(s0, c, v, dt / 2.0, &spec).unwrap();
            let halves = dose_step(half, c, v, dt / 2.0, &spec).unwrap();
            let scale = whole.x.abs().max(1e-300);
            prop_assert!((whole.x - halves.x).abs() <= 1e-12 * scale, "{} vs {}", whole.x, halves.x);
        }

        #[test]
        fn dose_monotone_in_c_and_v(x0 in 0.0..300.0f64, c in 0.0..0.2f64, dc in 0.0..0.1f64,
                                    v in 0.0..60.0f64, dv in 0.0..20.0f64, dt in 1.0..60.0f64) {
            let spec = test_spec(Variant::Mss2012);
            let s0 = DoseState { x: x0, t: 0.0 };
            let base = dose_step(s0, c, v, dt, &spec).unwrap().x;
            prop_assert!(base >= 0.0);
            prop_assert!(dose_step(s0, c + dc, v, dt, &spec).unwrap().x >= base);
            prop_assert!(dose_step(s0, c, v + dv, dt, &spec).unwrap().x >= base);
        }

        #[test]
        fn median_response_monotone(x in 0.0..2000.0f64, dx in 0.0..200.0f64, age in 5u32..=18, bmi in 13.0..35.0f64) {
            let spec = test_spec(Variant::Mss2012);
            let age = f64::from(age);
            prop_assume!(spec.amplitude(age, bmi) > 0.0);
            prop_assert!(median_response(x + dx, age, bmi, &spec) >= median_response(x, age, bmi, &spec));
        }

        #[test]
        fn mss2013_reduces_to_mss2012_without_nu2(m in -5.0..15.0f64, u in -3.0..3.0f64, nu1 in -12.0..12.0f64) {
            let s12 = test_spec(Variant::Mss2012);
            let s13 = test_spec(Variant::Mss2013);
            prop_assert_eq!(dfev1(m, u, nu1, 0.0, &s13), dfev1(m, u, nu1, 0.0, &s12));
        }
    }

    #[test]
    fn zero_ozone_season_decays_to_rest() {
        let spec = test_spec(Variant::Mss2012);
        let mut s = DoseState { x: 400.0, t: 0.0 };
        for _ in 0..(275 * 24) {
            s = dose_step(s, 0.0, 20.0, 60.0, &spec).unwrap();
        }
        assert!(s.x < 1e-100);
        assert_eq!(median_response(effective_dose(s.x, &spec), 10.0, 17.0, &spec), 0.0);
    }
}
