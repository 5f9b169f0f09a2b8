//! Synthetic inputs: persons, season-long activity timelines and ambient
//! ozone. These stand in for census demographics, activity diaries and
//! monitored air quality, none of which ship with this crate.

mod ozone;
mod season;

pub use ozone::{load_ozone_series, OzoneSeries, SyntheticOzone};
pub use season::Season;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::variability::{RandomStream, StreamTag, MINUTES_PER_DAY};

#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("ozone series has {found} hourly rows, season needs {expected}")]
    OzoneLength { expected: usize, found: usize },
    #[error("ozone file line {line}: {message}")]
    OzoneValue { line: usize, message: String },
    #[error("invalid season: {0}")]
    Season(String),
    #[error("invalid activity template: {0}")]
    Template(String),
    #[error("{0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<std::io::Error> for PopulationError {
    fn from(e: std::io::Error) -> Self {
        PopulationError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Person {
    pub id: u64,
    pub age: u32,
    /// kg/m².
    pub bmi: f64,
    /// Sensitivity draw; zero until the engine assigns it.
    pub u: f64,
}

/// Age range and an age-conditional lognormal BMI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demographics {
    pub age_min: u32,
    pub age_max: u32,
    /// Median BMI at `age_min`, kg/m².
    pub bmi_median_at_age_min: f64,
    /// Increase in median BMI per year of age.
    pub bmi_median_slope: f64,
    pub bmi_log_sd: f64,
}

impl Default for Demographics {
    fn default() -> Self {
        Self {
            age_min: 5,
            age_max: 18,
            bmi_median_at_age_min: 15.5,
            bmi_median_slope: 0.5,
            bmi_log_sd: 0.15,
        }
    }
}

impl Demographics {
    pub fn validate(&self) -> Result<(), PopulationError> {
        if self.age_min > self.age_max {
            return Err(PopulationError::Invalid(format!(
                "empty age range {}..={}",
                self.age_min, self.age_max
            )));
        }
        if !(self.bmi_median_at_age_min > 0.0) || !self.bmi_median_slope.is_finite() {
            return Err(PopulationError::Invalid("BMI median must be positive and finite".into()));
        }
        let top = self.bmi_median(self.age_max);
        if !(top > 0.0) {
            return Err(PopulationError::Invalid(format!("median BMI at age {} is {top}", self.age_max)));
        }
        if !(self.bmi_log_sd >= 0.0) || !self.bmi_log_sd.is_finite() {
            return Err(PopulationError::Invalid("bmi_log_sd must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn bmi_median(&self, age: u32) -> f64 {
        self.bmi_median_at_age_min + self.bmi_median_slope * f64::from(age - self.age_min)
    }
}

/// Person `index` of the synthetic population; independent of every other
/// index, so populations can be generated in any order.
pub fn generate_person(index: u64, demographics: &Demographics, seed: u64) -> Person {
    let mut s = RandomStream::new(seed, index, StreamTag::Demographics);
    let span = u64::from(demographics.age_max - demographics.age_min) + 1;
    let offset = ((s.uniform() * span as f64) as u64).min(span - 1);
    let age = demographics.age_min + offset as u32;
    let bmi = demographics.bmi_median(age) * (demographics.bmi_log_sd * s.standard_normal()).exp();
    Person { id: index, age, bmi, u: 0.0 }
}

pub fn generate_population(n: usize, demographics: &Demographics, seed: u64) -> Result<Vec<Person>, PopulationError> {
    if n == 0 {
        return Err(PopulationError::Invalid("population size must be > 0".into()));
    }
    demographics.validate()?;
    Ok((0..n as u64).map(|i| generate_person(i, demographics, seed)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Indoor,
    Outdoor,
}

/// One block of the daily activity cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityBlock {
    /// Local clock time `HH:MM` at which the block begins.
    pub start: String,
    /// Minutes, 1 to 60.
    pub duration: u32,
    /// L/min/m² of body surface area.
    pub ventilation: f64,
    pub location: Location,
}

impl ActivityBlock {
    pub fn new(start: &str, duration: u32, ventilation: f64, location: Location) -> Self {
        Self { start: start.to_string(), duration, ventilation, location }
    }

    fn start_minute(&self) -> Result<u32, PopulationError> {
        let bad = || PopulationError::Template(format!("bad block start `{}`, expected HH:MM", self.start));
        let (h, m) = self.start.split_once(':').ok_or_else(bad)?;
        let h: u32 = h.trim().parse().map_err(|_| bad())?;
        let m: u32 = m.trim().parse().map_err(|_| bad())?;
        if h >= 24 || m >= 60 {
            return Err(bad());
        }
        Ok(h * 60 + m)
    }
}

/// A 24-hour cycle of activity blocks repeated every day of the season,
/// with a single attenuation factor per location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityTemplate {
    pub indoor_factor: f64,
    pub outdoor_factor: f64,
    /// Log-scale sd of a per-person, per-day ventilation multiplier.
    pub ventilation_log_sd: f64,
    /// Share of persons who take part in outdoor blocks.
    #[serde(default = "one")]
    pub outdoor_participation: f64,
    /// Ventilation of non-participants during outdoor blocks, which they
    /// spend indoors.
    #[serde(default = "sedentary")]
    pub sedentary_ventilation: f64,
    pub blocks: Vec<ActivityBlock>,
}

fn one() -> f64 {
    1.0
}

fn sedentary() -> f64 {
    9.0
}

impl Default for ActivityTemplate {
    /// A school-age day: sleep, indoor time, and three hours of vigorous
    /// outdoor play in the afternoon. Ventilation rates are illustrative,
    /// not derived from physiology tables.
    fn default() -> Self {
        use Location::*;
        let mut blocks = Vec::new();
        for h in 0..7 {
            blocks.push(ActivityBlock::new(&format!("{h:02}:00"), 60, 5.0, Indoor));
        }
        for h in 7..14 {
            blocks.push(ActivityBlock::new(&format!("{h:02}:00"), 60, 9.0, Indoor));
        }
        for (i, v) in [32.0, 54.0, 60.0, 60.0, 54.0, 32.0].into_iter().enumerate() {
            let minute = 14 * 60 + 30 * i;
            blocks.push(ActivityBlock::new(&format!("{:02}:{:02}", minute / 60, minute % 60), 30, v, Outdoor));
        }
        for h in 17..22 {
            blocks.push(ActivityBlock::new(&format!("{h:02}:00"), 60, 8.0, Indoor));
        }
        for h in 22..24 {
            blocks.push(ActivityBlock::new(&format!("{h:02}:00"), 60, 5.0, Indoor));
        }
        Self {
            indoor_factor: 0.3,
            outdoor_factor: 1.0,
            ventilation_log_sd: 0.2,
            outdoor_participation: 0.4,
            sedentary_ventilation: 9.0,
            blocks,
        }
    }
}

impl ActivityTemplate {
    /// Checks that blocks are ordered, contiguous, 1–60 minutes long and
    /// cover exactly one day starting at midnight.
    pub fn validate(&self) -> Result<(), PopulationError> {
        if self.blocks.is_empty() {
            return Err(PopulationError::Template("no blocks".into()));
        }
        for (name, v) in [("indoor_factor", self.indoor_factor), ("outdoor_factor", self.outdoor_factor), ("ventilation_log_sd", self.ventilation_log_sd), ("sedentary_ventilation", self.sedentary_ventilation)] {
            if !v.is_finite() || v < 0.0 {
                return Err(PopulationError::Template(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.outdoor_participation) {
            return Err(PopulationError::Template(format!("outdoor_participation must be in [0, 1], got {}", self.outdoor_participation)));
        }
        let mut expected = 0;
        for block in &self.blocks {
            let start = block.start_minute()?;
            if start != expected {
                return Err(PopulationError::Template(format!(
                    "block at {} should start at {:02}:{:02}; blocks must tile the day in order",
                    block.start,
                    expected / 60,
                    expected % 60
                )));
            }
            if !(1..=60).contains(&block.duration) {
                return Err(PopulationError::Template(format!("block at {} lasts {} min, must be 1..=60", block.start, block.duration)));
            }
            if !block.ventilation.is_finite() || block.ventilation < 0.0 {
                return Err(PopulationError::Template(format!("block at {} has invalid ventilation {}", block.start, block.ventilation)));
            }
            expected += block.duration;
        }
        if expected != MINUTES_PER_DAY {
            return Err(PopulationError::Template(format!("blocks cover {expected} minutes, a day has {MINUTES_PER_DAY}")));
        }
        Ok(())
    }

    fn factor(&self, location: Location) -> f64 {
        match location {
            Location::Indoor => self.indoor_factor,
            Location::Outdoor => self.outdoor_factor,
        }
    }
}

/// A stretch of time with constant concentration and ventilation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    /// Minutes since season start.
    pub start: u32,
    /// Minutes, 1 to 60.
    pub duration: u32,
    /// ppm.
    pub concentration: f64,
    /// L/min/m².
    pub ventilation: f64,
}

impl EventRecord {
    pub fn end(&self) -> u32 {
        self.start + self.duration
    }
}

/// Lays the template over every day of the season. Each event's
/// concentration is the ambient value for the hour the event starts in,
/// times the location factor, in ppm.
pub fn generate_timeline(
    person: &Person,
    template: &ActivityTemplate,
    season: &Season,
    ozone: &OzoneSeries,
    seed: u64,
) -> Result<Vec<EventRecord>, PopulationError> {
    template.validate()?;
    if ozone.season() != season {
        return Err(PopulationError::Invalid("ozone series belongs to a different season".into()));
    }
    let mut events = Vec::with_capacity(season.n_days() as usize * template.blocks.len());
    fill_timeline(person, template, season, ozone, seed, &mut events);
    Ok(events)
}

/// [`generate_timeline`] without validation, reusing `events`.
pub(crate) fn fill_timeline(
    person: &Person,
    template: &ActivityTemplate,
    season: &Season,
    ozone: &OzoneSeries,
    seed: u64,
    events: &mut Vec<EventRecord>,
) {
    events.clear();
    let activity = RandomStream::new(seed, person.id, StreamTag::Activity);
    let sd = template.ventilation_log_sd;
    let participates = activity.child(u64::MAX).uniform() < template.outdoor_participation;
    for day in 0..season.n_days() {
        let multiplier = if sd > 0.0 {
            (sd * activity.child(u64::from(day)).standard_normal() - 0.5 * sd * sd).exp()
        } else {
            1.0
        };
        let mut start = day * MINUTES_PER_DAY;
        for block in &template.blocks {
            let hour = (start / 60) as usize;
            let (location, ventilation) = match block.location {
                Location::Outdoor if !participates => (Location::Indoor, template.sedentary_ventilation),
                location => (location, block.ventilation),
            };
            events.push(EventRecord {
                start,
                duration: block.duration,
                concentration: ozone.ppm(hour) * template.factor(location),
                ventilation: ventilation * multiplier,
            });
            start += block.duration;
        }
    }
}

/// The ambient input of a run, plus whether ozone is switched off in the
/// response function.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ozone: OzoneSeries,
    /// When set, the response function runs with `beta3 = 0`.
    pub beta3_zero: bool,
}

impl Scenario {
    pub fn ambient(ozone: OzoneSeries) -> Self {
        Self { ozone, beta3_zero: false }
    }
}

/// The noise-only baseline: `beta3 = 0` with an all-zero series.
pub fn zero_ozone_scenario(season: Season) -> Scenario {
    Scenario { ozone: OzoneSeries::zeros(season), beta3_zero: true }
}
