//! Bounded error-term sampling and redraw scheduling.
//!
//! `U` is drawn once per person. `nu1` and `nu2` are drawn once per draw
//! epoch, which is a simulated day or a clock hour depending on
//! [`Redraw`]. All draws come from a normal distribution truncated at
//! `±bound * sigma` by discard-and-redraw.

mod stream;

pub use stream::{RandomStream, StreamTag};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::er_model::{ErFunctionSpec, Variant};

pub const MINUTES_PER_DAY: u32 = 1440;
pub const MINUTES_PER_HOUR: u32 = 60;

/// Rejections allowed before a truncated draw is declared misconfigured.
pub const MAX_REJECTIONS: u32 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariabilityError {
    #[error("truncated draw rejected {MAX_REJECTIONS} times (sigma = {sigma}, bound = {bound_sd} sd)")]
    RejectionCapExceeded { sigma: f64, bound_sd: f64 },
    #[error("minute {minute} is outside the {n_days}-day season")]
    OutOfSeason { minute: u32, n_days: u32 },
    #[error("invalid variability setting: {0}")]
    Invalid(String),
}

/// How often `nu1` and `nu2` are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Redraw {
    Daily,
    Hourly,
}

impl Redraw {
    pub fn label(self) -> &'static str {
        match self {
            Redraw::Daily => "daily",
            Redraw::Hourly => "hourly",
        }
    }
}

impl std::str::FromStr for Redraw {
    type Err = VariabilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" => Ok(Redraw::Daily),
            "hourly" => Ok(Redraw::Hourly),
            other => Err(VariabilityError::Invalid(format!("unknown redraw frequency `{other}`"))),
        }
    }
}

/// Which clock hours are evaluated under hourly redraws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HourlyPolicy {
    /// Only hours in which some event starts get a draw and an evaluation.
    #[default]
    EventHours,
    /// Events are split at clock-hour boundaries so that all 24 hours of
    /// every day are evaluated with their own draw.
    AllClockHours,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariabilityConfig {
    /// Truncation of `U` in standard deviations; may be infinite.
    #[serde(deserialize_with = "de_bound")]
    pub bound_u: f64,
    #[serde(deserialize_with = "de_bound")]
    pub bound_nu1: f64,
    #[serde(deserialize_with = "de_bound")]
    pub bound_nu2: f64,
    pub redraw: Redraw,
    #[serde(default)]
    pub hourly_policy: HourlyPolicy,
}

impl Default for VariabilityConfig {
    fn default() -> Self {
        Self::epa_default()
    }
}

impl VariabilityConfig {
    /// ±2 sd on every term, daily redraws.
    pub fn epa_default() -> Self {
        Self {
            bound_u: 2.0,
            bound_nu1: 2.0,
            bound_nu2: 2.0,
            redraw: Redraw::Daily,
            hourly_policy: HourlyPolicy::EventHours,
        }
    }

    pub fn unbounded(redraw: Redraw) -> Self {
        Self {
            bound_u: f64::INFINITY,
            bound_nu1: f64::INFINITY,
            bound_nu2: f64::INFINITY,
            redraw,
            hourly_policy: HourlyPolicy::EventHours,
        }
    }

    pub fn bound(&self, term: Term) -> f64 {
        match term {
            Term::U => self.bound_u,
            Term::Nu1 => self.bound_nu1,
            Term::Nu2 => self.bound_nu2,
        }
    }

    pub fn set_bound(&mut self, term: Term, bound_sd: f64) {
        match term {
            Term::U => self.bound_u = bound_sd,
            Term::Nu1 => self.bound_nu1 = bound_sd,
            Term::Nu2 => self.bound_nu2 = bound_sd,
        }
    }

    pub fn validate(&self) -> Result<(), VariabilityError> {
        for term in Term::ALL {
            let b = self.bound(term);
            if b.is_nan() || b < 0.0 {
                return Err(VariabilityError::Invalid(format!(
                    "bound_{} must be >= 0 or inf, got {b}",
                    term.label()
                )));
            }
        }
        Ok(())
    }
}

/// Parses a bound in sd: a number, or `"inf"` / `"unbounded"`.
pub fn parse_bound(s: &str) -> Result<f64, VariabilityError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "unbounded" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| VariabilityError::Invalid(format!("`{s}` is not a bound (number or inf)"))),
    }
}

fn de_bound<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Number(v) => Ok(v),
        Raw::Int(v) => Ok(v as f64),
        Raw::Text(s) => parse_bound(&s).map_err(serde::de::Error::custom),
    }
}

/// One of the three error terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    U,
    Nu1,
    Nu2,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::U, Term::Nu1, Term::Nu2];

    pub fn label(self) -> &'static str {
        match self {
            Term::U => "u",
            Term::Nu1 => "nu1",
            Term::Nu2 => "nu2",
        }
    }

    pub fn tag(self) -> StreamTag {
        match self {
            Term::U => StreamTag::U,
            Term::Nu1 => StreamTag::Nu1,
            Term::Nu2 => StreamTag::Nu2,
        }
    }

    pub fn sigma(self, spec: &ErFunctionSpec) -> f64 {
        match self {
            Term::U => spec.sigma_u,
            Term::Nu1 => spec.sigma_nu1,
            Term::Nu2 => spec.sigma_nu2,
        }
    }
}

impl std::str::FromStr for Term {
    type Err = VariabilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u" => Ok(Term::U),
            "nu1" => Ok(Term::Nu1),
            "nu2" => Ok(Term::Nu2),
            other => Err(VariabilityError::Invalid(format!("unknown error term `{other}`"))),
        }
    }
}

/// Draws from `Normal(0, sigma²)` conditioned on `|draw| <= bound_sd * sigma`,
/// discarding and redrawing out-of-bound values.
pub fn sample_truncated(
    stream: &mut RandomStream,
    sigma: f64,
    bound_sd: f64,
) -> Result<f64, VariabilityError> {
    if sigma == 0.0 || bound_sd == 0.0 {
        return Ok(0.0);
    }
    let limit = bound_sd * sigma;
    for _ in 0..MAX_REJECTIONS {
        let draw = sigma * stream.standard_normal();
        if draw.abs() <= limit {
            return Ok(draw);
        }
    }
    Err(VariabilityError::RejectionCapExceeded { sigma, bound_sd })
}

/// The period a set of `nu1`/`nu2` draws applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DrawEpoch {
    pub day_index: u32,
    /// Clock hour, always 0 under daily redraws.
    pub hour_index: u32,
}

impl DrawEpoch {
    /// Unique across the season; hour 0 of a day shares its code with the
    /// daily epoch of that day.
    pub fn code(self) -> u64 {
        u64::from(self.day_index) * 24 + u64::from(self.hour_index)
    }
}

/// Maps an event start (minutes since season start) to its draw epoch.
pub fn epoch_of(event_start: u32, redraw: Redraw, n_days: u32) -> Result<DrawEpoch, VariabilityError> {
    let day_index = event_start / MINUTES_PER_DAY;
    if day_index >= n_days {
        return Err(VariabilityError::OutOfSeason { minute: event_start, n_days });
    }
    let hour_index = match redraw {
        Redraw::Daily => 0,
        Redraw::Hourly => (event_start % MINUTES_PER_DAY) / MINUTES_PER_HOUR,
    };
    Ok(DrawEpoch { day_index, hour_index })
}

/// The three streams belonging to one simulated person.
#[derive(Debug, Clone)]
pub struct PersonStreams {
    pub u: RandomStream,
    pub nu1: RandomStream,
    pub nu2: RandomStream,
}

impl PersonStreams {
    pub fn new(master_seed: u64, person_index: u64) -> Self {
        Self {
            u: RandomStream::new(master_seed, person_index, StreamTag::U),
            nu1: RandomStream::new(master_seed, person_index, StreamTag::Nu1),
            nu2: RandomStream::new(master_seed, person_index, StreamTag::Nu2),
        }
    }
}

/// The person's sensitivity draw. Always taken from the start of the
/// stream, so repeated queries return the same value.
pub fn person_u(
    stream: &RandomStream,
    spec: &ErFunctionSpec,
    config: &VariabilityConfig,
) -> Result<f64, VariabilityError> {
    let mut s = stream.child(0);
    sample_truncated(&mut s, spec.sigma_u, config.bound_u)
}

/// `(nu1, nu2)` for one epoch; a pure function of the streams' identities
/// and the epoch. `nu2` is zero under the additive-only variant.
pub fn epoch_noise(
    streams: &PersonStreams,
    epoch: DrawEpoch,
    spec: &ErFunctionSpec,
    config: &VariabilityConfig,
) -> Result<(f64, f64), VariabilityError> {
    let code = epoch.code();
    let nu1 = sample_truncated(&mut streams.nu1.child(code), spec.sigma_nu1, config.bound_nu1)?;
    let nu2 = match spec.variant {
        Variant::Mss2012 => 0.0,
        Variant::Mss2013 => sample_truncated(&mut streams.nu2.child(code), spec.sigma_nu2, config.bound_nu2)?,
    };
    Ok((nu1, nu2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::er_model::tests::test_spec;
    use proptest::prelude::*;

    #[test]
    fn zero_bound_or_sigma_gives_zero() {
        let mut s = RandomStream::new(1, 2, StreamTag::Nu1);
        assert_eq!(sample_truncated(&mut s, 4.13, 0.0).unwrap(), 0.0);
        assert_eq!(sample_truncated(&mut s, 0.0, 2.0).unwrap(), 0.0);
        assert_eq!(s.counter(), 0);
    }

    #[test]
    fn bound_two_stays_within_8_26() {
        let mut s = RandomStream::new(3, 0, StreamTag::Nu1);
        for _ in 0..200_000 {
            let v = sample_truncated(&mut s, 4.13, 2.0).unwrap();
            assert!(v.abs() <= 8.26);
        }
    }

    #[test]
    fn unbounded_draws_are_plain_normal() {
        let mut s = RandomStream::new(3, 0, StreamTag::Nu1);
        let mut reference = s.clone();
        for _ in 0..1000 {
            let v = sample_truncated(&mut s, 2.0, f64::INFINITY).unwrap();
            assert_eq!(v, 2.0 * reference.standard_normal());
        }
    }

    #[test]
    fn tiny_bound_hits_rejection_cap() {
        let mut s = RandomStream::new(5, 0, StreamTag::U);
        let err = sample_truncated(&mut s, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, VariabilityError::RejectionCapExceeded { .. }));
    }

    #[test]
    fn epoch_calendar_arithmetic() {
        assert_eq!(epoch_of(0, Redraw::Daily, 275).unwrap(), DrawEpoch { day_index: 0, hour_index: 0 });
        assert_eq!(epoch_of(1500, Redraw::Hourly, 275).unwrap(), DrawEpoch { day_index: 1, hour_index: 1 });
        assert_eq!(epoch_of(1500, Redraw::Daily, 275).unwrap(), DrawEpoch { day_index: 1, hour_index: 0 });
        assert_eq!(epoch_of(30, Redraw::Hourly, 275).unwrap(), epoch_of(59, Redraw::Hourly, 275).unwrap());
        assert_ne!(epoch_of(59, Redraw::Hourly, 275).unwrap(), epoch_of(60, Redraw::Hourly, 275).unwrap());
        assert!(matches!(
            epoch_of(275 * 1440, Redraw::Daily, 275),
            Err(VariabilityError::OutOfSeason { .. })
        ));
    }

    #[test]
    fn person_u_contract() {
        let spec = test_spec(Variant::Mss2012);
        let cfg = VariabilityConfig::epa_default();
        let a = PersonStreams::new(99, 0);
        let b = PersonStreams::new(99, 1);
        let ua = person_u(&a.u, &spec, &cfg).unwrap();
        assert_eq!(ua, person_u(&a.u, &spec, &cfg).unwrap());
        assert_ne!(ua, person_u(&b.u, &spec, &cfg).unwrap());
        assert!(ua.abs() <= 2.0 * spec.sigma_u);
        let none = VariabilityConfig { bound_u: 0.0, ..cfg };
        assert_eq!(person_u(&a.u, &spec, &none).unwrap(), 0.0);
    }

    #[test]
    fn epoch_noise_contract() {
        let spec = test_spec(Variant::Mss2013);
        let cfg = VariabilityConfig::epa_default();
        let streams = PersonStreams::new(4, 17);
        let e = DrawEpoch { day_index: 12, hour_index: 5 };
        assert_eq!(epoch_noise(&streams, e, &spec, &cfg).unwrap(), epoch_noise(&streams, e, &spec, &cfg).unwrap());

        let daily: Vec<_> = (0..24)
            .map(|h| epoch_of(12 * 1440 + h * 60, Redraw::Daily, 275).unwrap())
            .map(|e| epoch_noise(&streams, e, &spec, &cfg).unwrap())
            .collect();
        assert!(daily.windows(2).all(|w| w[0] == w[1]));

        let s12 = test_spec(Variant::Mss2012);
        for d in 0..50 {
            let (_, nu2) = epoch_noise(&streams, DrawEpoch { day_index: d, hour_index: 0 }, &s12, &cfg).unwrap();
            assert_eq!(nu2, 0.0);
        }
    }

    #[test]
    fn distinct_pairs_per_season() {
        let spec = test_spec(Variant::Mss2013);
        let streams = PersonStreams::new(8, 3);
        let n_days = 275;
        for (redraw, expected) in [(Redraw::Daily, 275usize), (Redraw::Hourly, 275 * 24)] {
            let cfg = VariabilityConfig { redraw, ..VariabilityConfig::epa_default() };
            let mut pairs = std::collections::BTreeSet::new();
            for minute in (0..n_days * 1440).step_by(30) {
                let e = epoch_of(minute, redraw, n_days).unwrap();
                let (a, b) = epoch_noise(&streams, e, &spec, &cfg).unwrap();
                pairs.insert((a.to_bits(), b.to_bits()));
            }
            assert_eq!(pairs.len(), expected);
        }
    }

    #[test]
    fn validate_bounds() {
        let mut cfg = VariabilityConfig::epa_default();
        assert!(cfg.validate().is_ok());
        cfg.bound_nu1 = f64::INFINITY;
        assert!(cfg.validate().is_ok());
        cfg.bound_nu2 = -1.0;
        assert!(cfg.validate().is_err());
        cfg.bound_nu2 = f64::NAN;
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn samples_respect_bounds(seed in any::<u64>(), sigma in 0.0..10.0f64, bound in 0.05..5.0f64) {
            let mut s = RandomStream::new(seed, 0, StreamTag::Nu1);
            for _ in 0..64 {
                let v = sample_truncated(&mut s, sigma, bound).unwrap();
                prop_assert!(v.abs() <= bound * sigma);
            }
        }
    }
}
