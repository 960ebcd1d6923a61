//! Load banks: parallel sets of resistive lamps and fans switched per-minute
//! by a relay schedule, plus the schedule text format.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rows of a daily relay schedule (one per minute).
pub const MINUTES_PER_DAY: usize = 1440;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule has {0} rows, expected {expected}", expected = MINUTES_PER_DAY)]
    WrongRowCount(usize),
    #[error("row {row}, column {col}: '{token}' is not an integer")]
    BadToken {
        row: usize,
        col: usize,
        token: String,
    },
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("schedule is empty")]
    Empty,
    #[error("schedule has {got} columns but the load bank maps {expected} devices")]
    ColumnMismatch { got: usize, expected: usize },
}

/// One switchable device in a load bank, with the schedule column that
/// drives its relay.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LoadDevice {
    Lamp {
        rated_v: f64,
        rated_w: f64,
        column: usize,
    },
    Fan {
        resistance: f64,
        column: usize,
    },
}

impl LoadDevice {
    pub fn resistance(&self) -> f64 {
        match self {
            LoadDevice::Lamp { rated_v, rated_w, .. } => lamp_resistance(*rated_v, *rated_w),
            LoadDevice::Fan { resistance, .. } => *resistance,
        }
    }

    pub fn column(&self) -> usize {
        match self {
            LoadDevice::Lamp { column, .. } | LoadDevice::Fan { column, .. } => *column,
        }
    }
}

/// Parallel association of individually switched resistive devices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadBankSpec {
    pub devices: Vec<LoadDevice>,
}

impl LoadBankSpec {
    /// Bank of `n_lamps` identical lamps followed by `n_fans` fans, with
    /// schedule columns assigned in order.
    pub fn lamps_and_fans(
        n_lamps: usize,
        lamp_v: f64,
        lamp_w: f64,
        n_fans: usize,
        fan_resistance: f64,
    ) -> Self {
        let mut devices = Vec::new();
        for k in 0..n_lamps {
            devices.push(LoadDevice::Lamp {
                rated_v: lamp_v,
                rated_w: lamp_w,
                column: k,
            });
        }
        for k in 0..n_fans {
            devices.push(LoadDevice::Fan {
                resistance: fan_resistance,
                column: n_lamps + k,
            });
        }
        LoadBankSpec { devices }
    }

    pub fn n_devices(&self) -> usize {
        self.devices.len()
    }

    /// Equivalent resistance of the devices flagged on in `on_mask`
    /// (indexed like `devices`). `None` means every device is off and the
    /// bank is an open circuit.
    pub fn equivalent_resistance(&self, on_mask: &[bool]) -> Option<f64> {
        assert_eq!(on_mask.len(), self.devices.len(), "mask length mismatch");
        let g: f64 = self
            .devices
            .iter()
            .zip(on_mask)
            .filter(|(_, &on)| on)
            .map(|(d, _)| 1.0 / d.resistance())
            .sum();
        if g > 0.0 {
            Some(1.0 / g)
        } else {
            None
        }
    }

    /// On-mask for this bank from a schedule row, through each device's
    /// relay column.
    pub fn mask_from_row(&self, row: &[u32]) -> Vec<bool> {
        self.devices
            .iter()
            .map(|d| row.get(d.column()).copied().unwrap_or(0) != 0)
            .collect()
    }
}

/// Resistance of an incandescent lamp from its rating.
pub fn lamp_resistance(v_nom: f64, p_nom: f64) -> f64 {
    assert!(p_nom > 0.0, "rated power must be positive");
    v_nom * v_nom / p_nom
}

/// Fitted equivalent resistance of the bench-tested DC fan, ohm.
pub const FAN_RESISTANCE: f64 = 62.24;

/// Daily relay schedule: 1440 rows (one per minute), one column per relay,
/// nonzero = on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSchedule {
    rows: Vec<Vec<u32>>,
    n_columns: usize,
}

impl LoadSchedule {
    pub fn all_off(n_columns: usize) -> Self {
        LoadSchedule {
            rows: vec![vec![0; n_columns]; MINUTES_PER_DAY],
            n_columns,
        }
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn row(&self, minute_of_day: usize) -> &[u32] {
        &self.rows[minute_of_day % MINUTES_PER_DAY]
    }

    pub fn set(&mut self, minute: usize, column: usize, on: bool) {
        self.rows[minute][column] = u32::from(on);
    }

    /// Turns a device on for a minute range [from, to).
    pub fn set_range(&mut self, from_minute: usize, to_minute: usize, column: usize) {
        for m in from_minute..to_minute.min(MINUTES_PER_DAY) {
            self.rows[m][column] = 1;
        }
    }

    /// Canonical text form: one row per line, space-separated integers.
    pub fn serialize_text(&self) -> String {
        let mut out = String::with_capacity(MINUTES_PER_DAY * (2 * self.n_columns));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses the schedule text format: whitespace- or comma-separated integers,
/// exactly 1440 rows, rectangular. Errors report the offending row/column.
pub fn parse_load_schedule(text: &str) -> Result<LoadSchedule, ScheduleError> {
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(MINUTES_PER_DAY);
    let mut n_columns = None;
    for (row_idx, line) in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
    {
        let mut row = Vec::new();
        for (col_idx, token) in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            let value = token.parse::<u32>().map_err(|_| ScheduleError::BadToken {
                row: row_idx + 1,
                col: col_idx + 1,
                token: token.to_string(),
            })?;
            row.push(value);
        }
        match n_columns {
            None => n_columns = Some(row.len()),
            Some(expected) if expected != row.len() => {
                return Err(ScheduleError::RaggedRow {
                    row: row_idx + 1,
                    got: row.len(),
                    expected,
                });
            }
            _ => {}
        }
        rows.push(row);
    }
    let n_columns = n_columns.ok_or(ScheduleError::Empty)?;
    if rows.len() != MINUTES_PER_DAY {
        return Err(ScheduleError::WrongRowCount(rows.len()));
    }
    Ok(LoadSchedule { rows, n_columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lamp_resistance_examples() {
        assert_relative_eq!(lamp_resistance(24.0, 40.0), 14.4);
        assert_relative_eq!(lamp_resistance(24.0, 24.0), 24.0);
        assert_relative_eq!(lamp_resistance(12.0, 40.0), 3.6);
    }

    #[test]
    fn five_lamps_in_parallel() {
        let bank = LoadBankSpec::lamps_and_fans(5, 24.0, 40.0, 0, FAN_RESISTANCE);
        let r = bank.equivalent_resistance(&[true; 5]).unwrap();
        assert_relative_eq!(r, 2.88);
    }

    #[test]
    fn single_fan() {
        let bank = LoadBankSpec::lamps_and_fans(0, 24.0, 40.0, 1, FAN_RESISTANCE);
        let r = bank.equivalent_resistance(&[true]).unwrap();
        assert_relative_eq!(r, 62.24);
    }

    #[test]
    fn all_off_is_open_circuit() {
        let bank = LoadBankSpec::lamps_and_fans(5, 24.0, 40.0, 1, FAN_RESISTANCE);
        assert!(bank.equivalent_resistance(&[false; 6]).is_none());
    }

    #[test]
    fn parallel_resistance_below_minimum_device() {
        let bank = LoadBankSpec::lamps_and_fans(3, 24.0, 40.0, 2, FAN_RESISTANCE);
        for mask_bits in 1_u32..(1 << 5) {
            let mask: Vec<bool> = (0..5).map(|k| mask_bits & (1 << k) != 0).collect();
            let r = bank.equivalent_resistance(&mask).unwrap();
            let min_active = bank
                .devices
                .iter()
                .zip(&mask)
                .filter(|(_, &on)| on)
                .map(|(d, _)| d.resistance())
                .fold(f64::INFINITY, f64::min);
            assert!(r <= min_active + 1e-12);
        }
    }

    #[test]
    fn parse_all_zeros() {
        let text = "0 0 0\n".repeat(MINUTES_PER_DAY);
        let schedule = parse_load_schedule(&text).unwrap();
        assert_eq!(schedule.n_columns(), 3);
        assert!(schedule.row(720).iter().all(|&x| x == 0));
    }

    #[test]
    fn parse_places_device_on_at_minute() {
        let mut lines: Vec<String> = vec!["0,0,0,0".to_string(); MINUTES_PER_DAY];
        lines[420] = "0,0,0,1".to_string();
        let schedule = parse_load_schedule(&lines.join("\n")).unwrap();
        assert_eq!(schedule.row(420)[3], 1);
        assert_eq!(schedule.row(419)[3], 0);
    }

    #[test]
    fn parse_rejects_short_file() {
        let text = "0 0\n".repeat(MINUTES_PER_DAY - 1);
        match parse_load_schedule(&text) {
            Err(ScheduleError::WrongRowCount(n)) => assert_eq!(n, MINUTES_PER_DAY - 1),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_bad_token_with_location() {
        let mut lines: Vec<String> = vec!["0 0".to_string(); MINUTES_PER_DAY];
        lines[10] = "0 x".to_string();
        match parse_load_schedule(&lines.join("\n")) {
            Err(ScheduleError::BadToken { row, col, token }) => {
                assert_eq!((row, col), (11, 2));
                assert_eq!(token, "x");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        let mut lines: Vec<String> = vec!["0 0".to_string(); MINUTES_PER_DAY];
        lines[3] = "0 0 0".to_string();
        assert!(matches!(
            parse_load_schedule(&lines.join("\n")),
            Err(ScheduleError::RaggedRow { row: 4, .. })
        ));
    }

    #[test]
    fn serialize_parse_round_trip_is_exact() {
        let mut schedule = LoadSchedule::all_off(4);
        schedule.set_range(400, 900, 0);
        schedule.set_range(1100, 1440, 3);
        let text = schedule.serialize_text();
        let parsed = parse_load_schedule(&text).unwrap();
        assert_eq!(parsed, schedule);
        assert_eq!(parsed.serialize_text(), text);
    }
}
