use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::PopulationError;

/// An inclusive range of calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeasonDates", into = "SeasonDates")]
pub struct Season {
    start: NaiveDate,
    end: NaiveDate,
    n_days: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeasonDates {
    start: String,
    end: String,
}

impl TryFrom<SeasonDates> for Season {
    type Error = PopulationError;

    fn try_from(d: SeasonDates) -> Result<Self, Self::Error> {
        Season::new(parse_date(&d.start)?, parse_date(&d.end)?)
    }
}

impl From<Season> for SeasonDates {
    fn from(s: Season) -> Self {
        SeasonDates { start: s.start.to_string(), end: s.end.to_string() }
    }
}

fn parse_date(s: &str) -> Result<NaiveDate, PopulationError> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| PopulationError::Season(format!("bad date `{s}`: {e}")))
}

impl Season {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, PopulationError> {
        if end < start {
            return Err(PopulationError::Season(format!("season end {end} precedes start {start}")));
        }
        let n_days = u32::try_from((end - start).num_days() + 1)
            .map_err(|_| PopulationError::Season("season too long".into()))?;
        Ok(Self { start, end, n_days })
    }

    /// The March 1 – November 30 ozone season of `year`.
    pub fn ozone_season(year: i32) -> Self {
        let start = NaiveDate::from_ymd_opt(year, 3, 1).expect("valid date");
        let end = NaiveDate::from_ymd_opt(year, 11, 30).expect("valid date");
        Self::new(start, end).expect("ordered dates")
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn n_days(&self) -> u32 {
        self.n_days
    }

    pub fn n_hours(&self) -> usize {
        self.n_days as usize * 24
    }

    pub fn n_minutes(&self) -> u32 {
        self.n_days * 1440
    }

    /// Local timestamp at the start of season hour `index`.
    pub fn hour_timestamp(&self, index: usize) -> NaiveDateTime {
        self.start.and_hms_opt(0, 0, 0).expect("midnight") + Duration::hours(index as i64)
    }
}

impl std::str::FromStr for Season {
    type Err = PopulationError;

    /// Parses `YYYY-MM-DD:YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| PopulationError::Season(format!("expected START:END, got `{s}`")))?;
        Season::new(parse_date(a)?, parse_date(b)?)
    }
}
