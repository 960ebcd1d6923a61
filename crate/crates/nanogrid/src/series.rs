//! Timestamped input series (irradiance, ambient temperature) with
//! zero-order hold between samples, and the two-column CSV format they are
//! stored in.

use chrono::{DateTime, Utc};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {0}: bad timestamp '{1}'")]
    BadTimestamp(usize, String),
    #[error("row {0}: bad value '{1}'")]
    BadValue(usize, String),
    #[error("row {0}: timestamp {1} repeats or precedes the previous row")]
    NotMonotone(usize, DateTime<Utc>),
    #[error("series is empty")]
    Empty,
    #[error("expected header 'timestamp,value', got '{0}'")]
    BadHeader(String),
}

/// Sorted timestamped samples held constant within each interval.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    times: Vec<DateTime<Utc>>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(samples: Vec<(DateTime<Utc>, f64)>) -> Result<Self, SeriesError> {
        if samples.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (k, pair) in samples.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(SeriesError::NotMonotone(k + 2, pair[1].0));
            }
        }
        let (times, values) = samples.into_iter().unzip();
        Ok(TimeSeries { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_time(&self) -> DateTime<Utc> {
        self.times[0]
    }

    pub fn last_time(&self) -> DateTime<Utc> {
        *self.times.last().unwrap()
    }

    /// Sample cadence in seconds, when uniform.
    pub fn cadence_seconds(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = (self.times[1] - self.times[0]).num_milliseconds() as f64 / 1000.0;
        for pair in self.times.windows(2) {
            let step = (pair[1] - pair[0]).num_milliseconds() as f64 / 1000.0;
            if (step - dt).abs() > 1e-9 {
                return None;
            }
        }
        Some(dt)
    }

    /// Value at `t` under zero-order hold: the sample at or before `t`
    /// (first sample before the series starts).
    pub fn at(&self, t: DateTime<Utc>) -> f64 {
        match self.times.binary_search(&t) {
            Ok(k) => self.values[k],
            Err(0) => self.values[0],
            Err(k) => self.values[k - 1],
        }
    }

    /// Parses the `timestamp,value` CSV format with ISO-8601 UTC timestamps.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self, SeriesError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        {
            let headers = rdr.headers()?;
            let normalized: Vec<String> =
                headers.iter().map(|h| h.trim().to_lowercase()).collect();
            if normalized != ["timestamp", "value"] {
                return Err(SeriesError::BadHeader(headers.iter().collect::<Vec<_>>().join(",")));
            }
        }
        let mut samples = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let record = record?;
            let row = k + 2; // line number including header
            let ts_text = record.get(0).unwrap_or("");
            let ts = DateTime::parse_from_rfc3339(ts_text)
                .map_err(|_| SeriesError::BadTimestamp(row, ts_text.to_string()))?
                .with_timezone(&Utc);
            let value_text = record.get(1).unwrap_or("");
            let value: f64 = value_text
                .parse()
                .map_err(|_| SeriesError::BadValue(row, value_text.to_string()))?;
            if let Some(&prev) = samples.last().map(|(t, _)| t) {
                if ts <= prev {
                    return Err(SeriesError::NotMonotone(row, ts));
                }
            }
            samples.push((ts, value));
        }
        TimeSeries::new(samples)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("timestamp,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{},{v}\n", t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)));
        }
        out
    }
}
