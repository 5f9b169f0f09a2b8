use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::{PopulationError, Season};
use crate::variability::{RandomStream, StreamTag};

/// Hourly ambient ozone in ppb, one value per season hour.
#[derive(Debug, Clone, PartialEq)]
pub struct OzoneSeries {
    season: Season,
    ppb: Vec<f64>,
}

impl OzoneSeries {
    pub fn new(season: Season, ppb: Vec<f64>) -> Result<Self, PopulationError> {
        if ppb.len() != season.n_hours() {
            return Err(PopulationError::OzoneLength { expected: season.n_hours(), found: ppb.len() });
        }
        if let Some((i, v)) = ppb.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(PopulationError::OzoneValue { line: i + 2, message: format!("{v} ppb is not a valid concentration") });
        }
        Ok(Self { season, ppb })
    }

    pub fn zeros(season: Season) -> Self {
        Self { season, ppb: vec![0.0; season.n_hours()] }
    }

    pub fn constant(season: Season, ppb: f64) -> Result<Self, PopulationError> {
        Self::new(season, vec![ppb; season.n_hours()])
    }

    /// A diurnal series with afternoon peaks, a mid-season maximum and
    /// lognormal day-to-day variation. Deterministic in `seed`.
    pub fn synthetic(season: Season, params: &SyntheticOzone, seed: u64) -> Result<Self, PopulationError> {
        params.validate()?;
        let stream = RandomStream::new(seed, 0, StreamTag::Ambient);
        let n_days = season.n_days();
        let mut ppb = Vec::with_capacity(season.n_hours());
        for day in 0..n_days {
            let z = stream.child(u64::from(day)).standard_normal();
            let sd = params.day_log_sd;
            let seasonal = 1.0 - params.seasonal_swing * (1.0 - (PI * (f64::from(day) + 0.5) / f64::from(n_days)).sin());
            let peak = params.peak_ppb * seasonal * (sd * z - 0.5 * sd * sd).exp();
            for hour in 0..24 {
                let phase = 2.0 * PI * (f64::from(hour) - params.peak_hour) / 24.0;
                let shape = phase.cos().max(0.0).powi(2);
                ppb.push(params.background_ppb + (peak - params.background_ppb).max(0.0) * shape);
            }
        }
        Self::new(season, ppb)
    }

    pub fn season(&self) -> &Season {
        &self.season
    }

    pub fn hourly_ppb(&self) -> &[f64] {
        &self.ppb
    }

    pub fn is_all_zero(&self) -> bool {
        self.ppb.iter().all(|v| *v == 0.0)
    }

    /// Concentration in ppm for season hour `index`.
    pub fn ppm(&self, index: usize) -> f64 {
        self.ppb[index] / 1000.0
    }

    pub fn read_csv<R: Read>(reader: R, season: Season) -> Result<Self, PopulationError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| PopulationError::OzoneValue { line: 1, message: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != ["timestamp", "ppb"] {
            return Err(PopulationError::OzoneValue {
                line: 1,
                message: format!("expected header `timestamp,ppb`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut ppb = Vec::with_capacity(season.n_hours());
        let mut rows = 0;
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            rows += 1;
            let record = record.map_err(|e| PopulationError::OzoneValue { line, message: e.to_string() })?;
            if record.len() != 2 {
                return Err(PopulationError::OzoneValue { line, message: format!("expected 2 fields, found {}", record.len()) });
            }
            if i >= season.n_hours() {
                continue;
            }
            let stamp = parse_timestamp(&record[0])
                .ok_or_else(|| PopulationError::OzoneValue { line, message: format!("malformed timestamp `{}`", &record[0]) })?;
            let expected = season.hour_timestamp(i);
            if stamp != expected {
                return Err(PopulationError::OzoneValue {
                    line,
                    message: format!("timestamp {} does not match season hour {}", stamp.format("%Y-%m-%dT%H:%M"), expected.format("%Y-%m-%dT%H:%M")),
                });
            }
            let value: f64 = record[1]
                .parse()
                .map_err(|_| PopulationError::OzoneValue { line, message: format!("malformed concentration `{}`", &record[1]) })?;
            if !value.is_finite() || value < 0.0 {
                return Err(PopulationError::OzoneValue { line, message: format!("concentration {value} ppb must be finite and >= 0") });
            }
            ppb.push(value);
        }
        if rows != season.n_hours() {
            return Err(PopulationError::OzoneLength { expected: season.n_hours(), found: rows });
        }
        Ok(Self { season, ppb })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PopulationError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["timestamp", "ppb"])?;
        for (i, v) in self.ppb.iter().enumerate() {
            let stamp = self.season.hour_timestamp(i).format("%Y-%m-%dT%H:%M").to_string();
            w.write_record([stamp, format!("{v:.3}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    ["%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
}

/// Loads the hourly `timestamp,ppb` CSV for `season`.
pub fn load_ozone_series(path: impl AsRef<Path>, season: Season) -> Result<OzoneSeries, PopulationError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| PopulationError::Io(format!("{}: {e}", path.display())))?;
    OzoneSeries::read_csv(std::io::BufReader::new(file), season)
}

/// Parameters of [`OzoneSeries::synthetic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticOzone {
    /// Overnight floor, ppb.
    pub background_ppb: f64,
    /// Typical afternoon peak at mid-season, ppb.
    pub peak_ppb: f64,
    /// Clock hour of the daily peak.
    pub peak_hour: f64,
    /// Fractional reduction of the peak at the season edges.
    pub seasonal_swing: f64,
    /// Log-scale sd of the day-to-day peak multiplier.
    pub day_log_sd: f64,
}

impl Default for SyntheticOzone {
    fn default() -> Self {
        Self { background_ppb: 25.0, peak_ppb: 75.0, peak_hour: 15.0, seasonal_swing: 0.3, day_log_sd: 0.25 }
    }
}

impl SyntheticOzone {
    fn validate(&self) -> Result<(), PopulationError> {
        let ok = self.background_ppb >= 0.0
            && self.peak_ppb >= 0.0
            && (0.0..24.0).contains(&self.peak_hour)
            && (0.0..=1.0).contains(&self.seasonal_swing)
            && self.day_log_sd >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(PopulationError::Invalid(format!("invalid synthetic ozone parameters {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_for(season: Season, rows: usize, value: &str) -> String {
        let mut s = String::from("timestamp,ppb\n");
        for i in 0..rows {
            s.push_str(&format!("{},{value}\n", season.hour_timestamp(i).format("%Y-%m-%dT%H:%M")));
        }
        s
    }

    #[test]
    fn accepts_full_season() {
        let season = Season::ozone_season(2017);
        let series = OzoneSeries::read_csv(csv_for(season, 6600, "70").as_bytes(), season).unwrap();
        assert_eq!(series.hourly_ppb().len(), 6600);
        assert_eq!(series.ppm(100), 0.07);
    }

    #[test]
    fn rejects_short_and_long_files() {
        let season = Season::ozone_season(2017);
        let err = OzoneSeries::read_csv(csv_for(season, 6599, "70").as_bytes(), season).unwrap_err();
        assert!(matches!(err, PopulationError::OzoneLength { expected: 6600, found: 6599 }), "{err}");
        let err = OzoneSeries::read_csv(csv_for(season, 6601, "70").as_bytes(), season).unwrap_err();
        assert!(matches!(err, PopulationError::OzoneLength { expected: 6600, found: 6601 }), "{err}");
    }

    #[test]
    fn rejects_negative_values_with_line() {
        let season = Season::ozone_season(2017);
        let mut text = csv_for(season, 6600, "40");
        text = text.replacen("2017-03-01T05:00,40", "2017-03-01T05:00,-5", 1);
        let err = OzoneSeries::read_csv(text.as_bytes(), season).unwrap_err();
        match err {
            PopulationError::OzoneValue { line, .. } => assert_eq!(line, 7),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_malformed_rows() {
        let season = "2017-03-01:2017-03-01".parse::<Season>().unwrap();
        let good = csv_for(season, 24, "1.5");
        let bad_value = good.replacen("T03:00,1.5", "T03:00,abc", 1);
        assert!(matches!(OzoneSeries::read_csv(bad_value.as_bytes(), season), Err(PopulationError::OzoneValue { line: 5, .. })));
        let bad_stamp = good.replacen("2017-03-01T03:00", "2017-03-01T04:00", 1);
        assert!(matches!(OzoneSeries::read_csv(bad_stamp.as_bytes(), season), Err(PopulationError::OzoneValue { line: 5, .. })));
        let bad_header = good.replacen("timestamp,ppb", "time,ozone", 1);
        assert!(matches!(OzoneSeries::read_csv(bad_header.as_bytes(), season), Err(PopulationError::OzoneValue { line: 1, .. })));
        let extra_field = good.replacen("T03:00,1.5", "T03:00,1.5,7", 1);
        assert!(OzoneSeries::read_csv(extra_field.as_bytes(), season).is_err());
    }

    #[test]
    fn write_then_read() {
        let season = "2017-06-01:2017-06-03".parse::<Season>().unwrap();
        let params = SyntheticOzone { background_ppb: 20.0, peak_ppb: 80.0, peak_hour: 15.0, seasonal_swing: 0.2, day_log_sd: 0.2 };
        let series = OzoneSeries::synthetic(season, &params, 5).unwrap();
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        let back = OzoneSeries::read_csv(buf.as_slice(), season).unwrap();
        for (a, b) in series.hourly_ppb().iter().zip(back.hourly_ppb()) {
            assert!((a - b).abs() <= 5e-4);
        }
    }

    #[test]
    fn synthetic_peaks_in_afternoon() {
        let season = Season::ozone_season(2017);
        let params = SyntheticOzone { background_ppb: 20.0, peak_ppb: 80.0, peak_hour: 15.0, seasonal_swing: 0.2, day_log_sd: 0.0 };
        let series = OzoneSeries::synthetic(season, &params, 1).unwrap();
        let day: Vec<f64> = series.hourly_ppb()[137 * 24..138 * 24].to_vec();
        let argmax = day.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(argmax, 15);
        assert_eq!(day[3], 20.0);
        assert!(series.hourly_ppb().iter().all(|v| *v >= 0.0));
    }
}
