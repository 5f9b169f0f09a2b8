//! Season simulation per person and aggregation to a population risk.
//!
//! For each event, in time order: advance the dose over the event, apply
//! the response threshold, evaluate the median response, fetch the error
//! draws for the event's epoch and record the decrement at the event end.
//! A day's value is the maximum over the events starting that day. Dose
//! carries over between days; every season starts at rest.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::er_model::{advance, drive, dfev1, effective_dose, sigmoid_response, ErFunctionSpec, ErModelError};
use crate::population::{self, ActivityTemplate, Demographics, EventRecord, Person, PopulationError, Scenario, Season};
use crate::variability::{
    epoch_of, epoch_noise, person_u, DrawEpoch, HourlyPolicy, PersonStreams, Redraw, VariabilityConfig,
    VariabilityError, MINUTES_PER_DAY, MINUTES_PER_HOUR,
};

/// Upper bound on the number of per-person failures kept in an error.
const MAX_REPORTED_FAILURES: usize = 10;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid exposure-response function: {0}")]
    Model(#[from] ErModelError),
    #[error("invalid variability settings: {0}")]
    Variability(#[from] VariabilityError),
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error("invalid risk query: {0}")]
    Query(String),
    #[error("timeline problem for person {person}: {message}")]
    Timeline { person: u64, message: String },
    #[error("{count} persons failed; first: {}", .first.iter().map(|(id, m)| format!("#{id}: {m}")).collect::<Vec<_>>().join("; "))]
    PersonFailures { count: usize, first: Vec<(u64, String)> },
    #[error("cannot aggregate an empty result set")]
    EmptyResults,
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonResult {
    pub person_id: u64,
    /// Maximum event-end decrement of each season day, percent.
    pub daily_max_dfev1: Vec<f64>,
    /// Set when the person's response amplitude is negative.
    pub negative_amplitude: bool,
}

impl SeasonResult {
    pub fn exceedance_days(&self, threshold: f64) -> u32 {
        self.daily_max_dfev1.iter().filter(|d| **d >= threshold).count() as u32
    }

    pub fn max_dfev1(&self) -> f64 {
        self.daily_max_dfev1.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Counts persons with at least `min_days` days at or above `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskQuery {
    /// Percent decrement.
    pub threshold: f64,
    pub min_days: u32,
}

impl Default for RiskQuery {
    fn default() -> Self {
        Self { threshold: 10.0, min_days: 1 }
    }
}

impl RiskQuery {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(EngineError::Query(format!("threshold must be > 0, got {}", self.threshold)));
        }
        if self.min_days < 1 {
            return Err(EngineError::Query("min_days must be >= 1".into()));
        }
        Ok(())
    }

    pub fn is_met(&self, exceedance_days: u32) -> bool {
        exceedance_days >= self.min_days
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub percent_of_population: f64,
    pub n_exceeding: u64,
    pub n_total: u64,
}

impl RiskEstimate {
    pub fn from_counts(n_exceeding: u64, n_total: u64) -> Self {
        Self {
            percent_of_population: 100.0 * n_exceeding as f64 / n_total as f64,
            n_exceeding,
            n_total,
        }
    }

    /// Binomial standard error of the percentage.
    pub fn standard_error(&self) -> f64 {
        let p = self.n_exceeding as f64 / self.n_total as f64;
        100.0 * (p * (1.0 - p) / self.n_total as f64).sqrt()
    }
}

pub fn aggregate_risk(results: &[SeasonResult], query: &RiskQuery) -> Result<RiskEstimate, EngineError> {
    query.validate()?;
    if results.is_empty() {
        return Err(EngineError::EmptyResults);
    }
    let n = results.iter().filter(|r| query.is_met(r.exceedance_days(query.threshold))).count();
    Ok(RiskEstimate::from_counts(n as u64, results.len() as u64))
}

/// Simulates one person's season. `person.u` must already hold the
/// sensitivity draw; `spec` is used as given.
pub fn simulate_person(
    person: &Person,
    timeline: &[EventRecord],
    spec: &ErFunctionSpec,
    config: &VariabilityConfig,
    streams: &PersonStreams,
    n_days: u32,
) -> Result<SeasonResult, EngineError> {
    let kernel = Kernel::new(spec);
    let mut daily = vec![f64::NEG_INFINITY; n_days as usize];
    kernel.run(person, timeline, config, streams, &mut daily)?;
    Ok(SeasonResult {
        person_id: person.id,
        daily_max_dfev1: daily,
        negative_amplitude: spec.amplitude(f64::from(person.age), person.bmi) < 0.0,
    })
}

/// Per-spec constants reused across all events and persons.
struct Kernel<'a> {
    spec: &'a ErFunctionSpec,
    /// `exp(-beta5 * d)` for whole-minute durations `d` in 0..=60.
    decay: [f64; 61],
}

impl<'a> Kernel<'a> {
    fn new(spec: &'a ErFunctionSpec) -> Self {
        let mut decay = [1.0; 61];
        for (d, slot) in decay.iter_mut().enumerate() {
            *slot = (-spec.beta5 * d as f64).exp();
        }
        Self { spec, decay }
    }

    fn run(
        &self,
        person: &Person,
        timeline: &[EventRecord],
        config: &VariabilityConfig,
        streams: &PersonStreams,
        daily: &mut [f64],
    ) -> Result<(), EngineError> {
        let spec = self.spec;
        let n_days = daily.len() as u32;
        let split = config.redraw == Redraw::Hourly && config.hourly_policy == HourlyPolicy::AllClockHours;
        let amplitude = spec.amplitude(f64::from(person.age), person.bmi);
        let timeline_error = |message: String| EngineError::Timeline { person: person.id, message };

        let mut x = 0.0;
        let mut expected_start = 0u32;
        let mut current: Option<(DrawEpoch, f64, f64)> = None;
        for event in timeline {
            if event.start != expected_start {
                return Err(timeline_error(format!("event at minute {} leaves a gap or overlap (expected {expected_start})", event.start)));
            }
            if !(1..=60).contains(&event.duration) {
                return Err(timeline_error(format!("event at minute {} lasts {} min", event.start, event.duration)));
            }
            if !(event.concentration >= 0.0 && event.ventilation >= 0.0)
                || !event.concentration.is_finite()
                || !event.ventilation.is_finite()
            {
                return Err(timeline_error(format!("event at minute {} has invalid exposure inputs", event.start)));
            }
            expected_start = event.end();
            let drive = drive(event.concentration, event.ventilation, spec);

            let mut start = event.start;
            let end = event.end();
            while start < end {
                let piece_end = if split { end.min((start / MINUTES_PER_HOUR + 1) * MINUTES_PER_HOUR) } else { end };
                x = advance(x, self.decay[(piece_end - start) as usize], drive);

                let epoch = epoch_of(start, config.redraw, n_days)?;
                let (nu1, nu2) = match current {
                    Some((e, a, b)) if e == epoch => (a, b),
                    _ => {
                        let pair = epoch_noise(streams, epoch, spec, config)?;
                        current = Some((epoch, pair.0, pair.1));
                        pair
                    }
                };
                let m = sigmoid_response(amplitude, effective_dose(x, spec), spec);
                let value = dfev1(m, person.u, nu1, nu2, spec);
                let day = &mut daily[(start / MINUTES_PER_DAY) as usize];
                if value > *day {
                    *day = value;
                }
                start = piece_end;
            }
        }
        if expected_start != n_days * MINUTES_PER_DAY {
            return Err(timeline_error(format!("timeline ends at minute {expected_start}, season has {}", n_days * MINUTES_PER_DAY)));
        }
        Ok(())
    }
}

/// Everything a run depends on besides thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationInputs {
    pub er: ErFunctionSpec,
    pub variability: VariabilityConfig,
    pub demographics: Demographics,
    pub template: ActivityTemplate,
    pub season: Season,
    pub scenario: Scenario,
    pub population_size: usize,
    pub master_seed: u64,
}

impl SimulationInputs {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.er.validate()?;
        self.variability.validate()?;
        self.demographics.validate()?;
        self.template.validate()?;
        if self.population_size == 0 {
            return Err(PopulationError::Invalid("population size must be > 0".into()).into());
        }
        if self.scenario.ozone.season() != &self.season {
            return Err(PopulationError::Invalid("ozone series does not match the season".into()).into());
        }
        Ok(())
    }

    /// The response function actually evaluated, with `beta3 = 0` in the
    /// zero-ozone scenario.
    pub fn effective_spec(&self) -> ErFunctionSpec {
        if self.scenario.beta3_zero {
            self.er.without_ozone_effect()
        } else {
            self.er
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn with_threads(threads: usize) -> Self {
        Self { threads: Some(threads) }
    }

    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, EngineError> {
        match self.threads {
            None => Ok(f()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
                Ok(pool.install(f))
            }
        }
    }
}

fn simulate_index(
    index: u64,
    inputs: &SimulationInputs,
    spec: &ErFunctionSpec,
    kernel: &Kernel<'_>,
    events: &mut Vec<EventRecord>,
) -> Result<SeasonResult, EngineError> {
    let mut person = population::generate_person(index, &inputs.demographics, inputs.master_seed);
    let streams = PersonStreams::new(inputs.master_seed, index);
    person.u = person_u(&streams.u, spec, &inputs.variability)?;
    population::fill_timeline(&person, &inputs.template, &inputs.season, &inputs.scenario.ozone, inputs.master_seed, events);
    let mut daily = vec![f64::NEG_INFINITY; inputs.season.n_days() as usize];
    kernel.run(&person, events, &inputs.variability, &streams, &mut daily)?;
    Ok(SeasonResult {
        person_id: index,
        daily_max_dfev1: daily,
        negative_amplitude: spec.amplitude(f64::from(person.age), person.bmi) < 0.0,
    })
}

fn collect_ordered<T>(results: Vec<(u64, Result<T, EngineError>)>) -> Result<Vec<T>, EngineError> {
    let mut ok = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut count = 0;
    for (id, r) in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                count += 1;
                if failures.len() < MAX_REPORTED_FAILURES {
                    failures.push((id, e.to_string()));
                }
            }
        }
    }
    if count > 0 {
        return Err(EngineError::PersonFailures { count, first: failures });
    }
    Ok(ok)
}

fn map_persons<T: Send>(
    inputs: &SimulationInputs,
    options: &RunOptions,
    f: impl Fn(SeasonResult) -> T + Sync + Send,
) -> Result<Vec<T>, EngineError> {
    inputs.validate()?;
    let spec = inputs.effective_spec();
    let kernel = Kernel::new(&spec);
    let n = inputs.population_size as u64;
    let results = options.install(|| {
        (0..n)
            .into_par_iter()
            .map_init(Vec::new, |events, i| (i, simulate_index(i, inputs, &spec, &kernel, events).map(&f)))
            .collect::<Vec<_>>()
    })?;
    collect_ordered(results)
}

/// Simulates every person; results are ordered by person id and do not
/// depend on the number of threads.
pub fn run_simulation(inputs: &SimulationInputs, options: &RunOptions) -> Result<Vec<SeasonResult>, EngineError> {
    map_persons(inputs, options, |r| r)
}

/// One line of the per-person output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersonRecord {
    pub person_id: u64,
    pub exceedance_days: u32,
    pub max_dfev1: f64,
    #[serde(skip)]
    pub negative_amplitude: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRun {
    pub records: Vec<PersonRecord>,
    pub estimate: RiskEstimate,
}

impl RiskRun {
    pub fn negative_amplitude_persons(&self) -> u64 {
        self.records.iter().filter(|r| r.negative_amplitude).count() as u64
    }
}

/// Runs the population and folds each season straight into a
/// [`PersonRecord`], without keeping daily series in memory.
pub fn run_risk(inputs: &SimulationInputs, query: &RiskQuery, options: &RunOptions) -> Result<RiskRun, EngineError> {
    query.validate()?;
    let threshold = query.threshold;
    let records = map_persons(inputs, options, |r| PersonRecord {
        person_id: r.person_id,
        exceedance_days: r.exceedance_days(threshold),
        max_dfev1: r.max_dfev1(),
        negative_amplitude: r.negative_amplitude,
    })?;
    let n = records.iter().filter(|r| query.is_met(r.exceedance_days)).count();
    let estimate = RiskEstimate::from_counts(n as u64, records.len() as u64);
    Ok(RiskRun { records, estimate })
}

/// Writes one JSON object per line: person id, exceedance-day count and
/// season maximum decrement.
pub fn write_person_records<W: Write>(records: &[PersonRecord], mut out: W) -> Result<(), EngineError> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Run-level summary written next to the per-person records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub risk_pct: f64,
    pub n_exceeding: u64,
    pub n_total: u64,
    pub standard_error_pct: f64,
    pub threshold: f64,
    pub min_days: u32,
    pub variant: &'static str,
    pub redraw: &'static str,
    pub bound_u_sd: f64,
    pub bound_nu1_sd: f64,
    pub bound_nu2_sd: f64,
    pub beta3_zero: bool,
    pub master_seed: u64,
    pub negative_amplitude_persons: u64,
}

impl RunSummary {
    pub fn new(inputs: &SimulationInputs, query: &RiskQuery, run: &RiskRun) -> Self {
        let v = &inputs.variability;
        Self {
            risk_pct: run.estimate.percent_of_population,
            n_exceeding: run.estimate.n_exceeding,
            n_total: run.estimate.n_total,
            standard_error_pct: run.estimate.standard_error(),
            threshold: query.threshold,
            min_days: query.min_days,
            variant: inputs.er.variant.label(),
            redraw: v.redraw.label(),
            bound_u_sd: v.bound_u,
            bound_nu1_sd: v.bound_nu1,
            bound_nu2_sd: v.bound_nu2,
            beta3_zero: inputs.scenario.beta3_zero,
            master_seed: inputs.master_seed,
            negative_amplitude_persons: run.negative_amplitude_persons(),
        }
    }

    /// JSON with infinite bounds spelled `"inf"`.
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("summary serializes");
        for key in ["bound_u_sd", "bound_nu1_sd", "bound_nu2_sd"] {
            let bound = match key {
                "bound_u_sd" => self.bound_u_sd,
                "bound_nu1_sd" => self.bound_nu1_sd,
                _ => self.bound_nu2_sd,
            };
            if bound.is_infinite() {
                value[key] = serde_json::Value::String("inf".into());
            }
        }
        serde_json::to_string_pretty(&value).expect("summary serializes")
    }
}
