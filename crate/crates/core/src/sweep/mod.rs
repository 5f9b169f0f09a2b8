//! Sensitivity sweeps over error-term bounds and redraw frequency.
//!
//! Every cell of a sweep reuses the base inputs and master seed, so cells
//! differ only in their bounds and frequency (common random numbers).

mod chart;
mod table;

pub use chart::emit_chart;
pub use table::{emit_table, write_table, TABLE_HEADER};
pub(crate) use table::fmt_bound;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run_risk, EngineError, RiskQuery, RunOptions, SimulationInputs};
use crate::er_model::Variant;
use crate::variability::{Redraw, Term};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("i/o error writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Which bounds vary across cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweptTerms {
    Single(Term),
    /// `nu1` and `nu2` varied together over the grid's cross product.
    Joint,
}

impl SweptTerms {
    pub fn label(self) -> &'static str {
        match self {
            SweptTerms::Single(t) => t.label(),
            SweptTerms::Joint => "nu1+nu2",
        }
    }

    fn involves_nu2(self) -> bool {
        matches!(self, SweptTerms::Single(Term::Nu2) | SweptTerms::Joint)
    }
}

impl std::str::FromStr for SweptTerms {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "joint" | "nu1+nu2" | "nu1xnu2" => Ok(SweptTerms::Joint),
            other => other
                .parse::<Term>()
                .map(SweptTerms::Single)
                .map_err(|e| SweepError::Invalid(e.to_string())),
        }
    }
}

/// The default grid: 0 to 4 sd in steps of 0.5.
pub fn default_grid() -> Vec<f64> {
    (0..=8).map(|i| f64::from(i) * 0.5).collect()
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: SimulationInputs,
    pub query: RiskQuery,
    pub terms: SweptTerms,
    /// Bounds in sd, strictly ascending.
    pub grid: Vec<f64>,
    pub frequencies: Vec<Redraw>,
    /// Bound applied to every term that is not swept.
    pub fixed_bound: f64,
}

impl SweepSpec {
    pub fn new(base: SimulationInputs, terms: SweptTerms) -> Self {
        Self {
            base,
            query: RiskQuery::default(),
            terms,
            grid: default_grid(),
            frequencies: vec![Redraw::Daily, Redraw::Hourly],
            fixed_bound: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.grid.is_empty() {
            return Err(SweepError::Invalid("bound grid is empty".into()));
        }
        if self.grid.iter().any(|b| b.is_nan() || *b < 0.0) {
            return Err(SweepError::Invalid("bounds must be >= 0".into()));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(SweepError::Invalid("bound grid must be strictly ascending".into()));
        }
        if self.frequencies.is_empty() {
            return Err(SweepError::Invalid("no redraw frequencies given".into()));
        }
        if !(self.fixed_bound >= 0.0) {
            return Err(SweepError::Invalid(format!("fixed bound must be >= 0, got {}", self.fixed_bound)));
        }
        if self.terms.involves_nu2() && self.base.er.variant != Variant::Mss2013 {
            return Err(SweepError::Invalid("nu2 only exists in the MSS2013 response function".into()));
        }
        self.query.validate()?;
        Ok(())
    }

    /// Cell bounds `(u, nu1, nu2)` and frequency, in output order.
    pub fn cells(&self) -> Vec<([f64; 3], Redraw)> {
        let mut cells = Vec::new();
        for &freq in &self.frequencies {
            match self.terms {
                SweptTerms::Single(term) => {
                    for &b in &self.grid {
                        let mut bounds = [self.fixed_bound; 3];
                        bounds[term_index(term)] = b;
                        cells.push((bounds, freq));
                    }
                }
                SweptTerms::Joint => {
                    for &b2 in &self.grid {
                        for &b1 in &self.grid {
                            cells.push(([self.fixed_bound, b1, b2], freq));
                        }
                    }
                }
            }
        }
        cells
    }
}

fn term_index(term: Term) -> usize {
    match term {
        Term::U => 0,
        Term::Nu1 => 1,
        Term::Nu2 => 2,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub term: SweptTerms,
    pub bound_u: f64,
    pub bound_nu1: f64,
    pub bound_nu2: f64,
    pub frequency: Redraw,
    pub risk_pct: f64,
    pub n_exceed: u64,
    pub n_total: u64,
    pub master_seed: u64,
}

impl SweepRow {
    /// Bound of the swept term (the `nu1` bound for joint sweeps).
    pub fn swept_bound(&self) -> f64 {
        match self.term {
            SweptTerms::Single(Term::U) => self.bound_u,
            SweptTerms::Single(Term::Nu2) => self.bound_nu2,
            _ => self.bound_nu1,
        }
    }

    pub fn standard_error(&self) -> f64 {
        let p = self.n_exceed as f64 / self.n_total as f64;
        100.0 * (p * (1.0 - p) / self.n_total as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct CellFailure {
    pub bounds: [f64; 3],
    pub frequency: Redraw,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub terms: SweptTerms,
    pub threshold: f64,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    /// Rows of one frequency, in grid order.
    pub fn series(&self, frequency: Redraw) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.frequency == frequency).collect()
    }
}

/// Runs every cell. A failing cell is recorded and the sweep continues.
pub fn run_sweep(spec: &SweepSpec, options: &RunOptions) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let cells = spec.cells();
    let run_cell = |(bounds, freq): &([f64; 3], Redraw)| {
        let mut inputs = spec.base.clone();
        inputs.variability.bound_u = bounds[0];
        inputs.variability.bound_nu1 = bounds[1];
        inputs.variability.bound_nu2 = bounds[2];
        inputs.variability.redraw = *freq;
        run_risk(&inputs, &spec.query, &RunOptions::default())
    };
    let outcomes = match options.threads {
        None => cells.par_iter().map(run_cell).collect::<Vec<_>>(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| EngineError::ThreadPool(e.to_string()))?
            .install(|| cells.par_iter().map(run_cell).collect::<Vec<_>>()),
    };

    let mut rows = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    for ((bounds, frequency), outcome) in cells.into_iter().zip(outcomes) {
        match outcome {
            Ok(run) => rows.push(SweepRow {
                term: spec.terms,
                bound_u: bounds[0],
                bound_nu1: bounds[1],
                bound_nu2: bounds[2],
                frequency,
                risk_pct: run.estimate.percent_of_population,
                n_exceed: run.estimate.n_exceeding,
                n_total: run.estimate.n_total,
                master_seed: spec.base.master_seed,
            }),
            Err(e) => failures.push(CellFailure { bounds, frequency, message: e.to_string() }),
        }
    }
    Ok(SweepResult { terms: spec.terms, threshold: spec.query.threshold, rows, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::er_model::tests::test_spec;
    use crate::population::{zero_ozone_scenario, ActivityTemplate, Demographics, Season};
    use crate::variability::VariabilityConfig;

    fn base(variant: Variant, n: usize) -> SimulationInputs {
        let season: Season = "2017-06-01:2017-06-10".parse().unwrap();
        SimulationInputs {
            er: test_spec(variant),
            variability: VariabilityConfig::epa_default(),
            demographics: Demographics::default(),
            template: ActivityTemplate::default(),
            season,
            scenario: zero_ozone_scenario(season),
            population_size: n,
            master_seed: 11,
        }
    }

    #[test]
    fn single_term_cell_count() {
        let mut spec = SweepSpec::new(base(Variant::Mss2012, 20), SweptTerms::Single(Term::Nu1));
        spec.grid = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let result = run_sweep(&spec, &RunOptions::default()).unwrap();
        assert_eq!(result.rows.len(), 10);
        assert!(result.failures.is_empty());
        assert_eq!(result.series(Redraw::Hourly).len(), 5);
        assert!(result.rows.iter().all(|r| r.bound_u == 2.0 && r.bound_nu2 == 2.0));
    }

    #[test]
    fn joint_grid_has_table_shape() {
        let mut spec = SweepSpec::new(base(Variant::Mss2013, 5), SweptTerms::Joint);
        spec.grid = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let cells = spec.cells();
        assert_eq!(cells.len(), 50);
        assert_eq!(cells[1], ([2.0, 1.0, 0.0], Redraw::Daily));
        assert_eq!(cells[5], ([2.0, 0.0, 1.0], Redraw::Daily));
        assert_eq!(cells[25].1, Redraw::Hourly);
    }

    #[test]
    fn validation() {
        let mut spec = SweepSpec::new(base(Variant::Mss2012, 5), SweptTerms::Single(Term::Nu2));
        assert!(matches!(spec.validate(), Err(SweepError::Invalid(_))));
        spec.terms = SweptTerms::Joint;
        assert!(spec.validate().is_err());
        spec.terms = SweptTerms::Single(Term::U);
        assert!(spec.validate().is_ok());
        spec.grid = vec![1.0, 0.5];
        assert!(spec.validate().is_err());
        spec.grid = vec![];
        assert!(spec.validate().is_err());
        spec.grid = vec![-1.0, 0.0];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn failing_cells_are_recorded() {
        let mut spec = SweepSpec::new(base(Variant::Mss2012, 3), SweptTerms::Single(Term::Nu1));
        // A vanishing bound exhausts the rejection cap.
        spec.grid = vec![1e-12, 2.0];
        spec.frequencies = vec![Redraw::Daily];
        let result = run_sweep(&spec, &RunOptions::default()).unwrap();
        assert_eq!(result.rows.len(), 1);
        assert_eq!(result.failures.len(), 1);
        assert!(result.failures[0].message.contains("rejected"));
    }

    #[test]
    fn parse_terms() {
        assert_eq!("nu1".parse::<SweptTerms>().unwrap(), SweptTerms::Single(Term::Nu1));
        assert_eq!("joint".parse::<SweptTerms>().unwrap(), SweptTerms::Joint);
        assert!("nu3".parse::<SweptTerms>().is_err());
    }
}
