//! Scenario and network description files: versioned, human-readable TOML
//! documents referencing the time-series CSVs and relay schedules, resolved
//! into the in-memory structures the engine runs on.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;
use thiserror::Error;

use crate::battery::{BatteryParams, BatteryState};
use crate::controller::ControllerConfig;
use crate::loads::{self, LoadBankSpec, LoadSchedule};
use crate::network::Network;
use crate::pv::{PvArrayConfig, PvDatasheet, PvModuleParams};
use crate::series::{SeriesError, TimeSeries};

/// Scenario document version this build understands.
pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Series {
        path: PathBuf,
        source: SeriesError,
    },
    #[error("{path}: {source}")]
    Schedule {
        path: PathBuf,
        source: loads::ScheduleError,
    },
    #[error("unsupported scenario version {0} (expected {SCENARIO_VERSION})")]
    Version(u32),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("{0}")]
    Invalid(String),
    #[error("pv extraction failed for '{id}': {source}")]
    Extraction {
        id: String,
        source: crate::pv::PvError,
    },
}

fn read_file(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One generation/storage system ready to simulate.
#[derive(Debug, Clone)]
pub struct GssSetup {
    pub id: String,
    pub bus: String,
    pub array: PvArrayConfig,
    pub battery: Option<(BatteryParams, BatteryState)>,
    pub controller: ControllerConfig,
}

/// One load bank ready to simulate.
#[derive(Debug, Clone)]
pub struct LoadBankSetup {
    pub id: String,
    pub bus: String,
    pub spec: LoadBankSpec,
    pub schedule: LoadSchedule,
}

/// Fully resolved simulation scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub gss: Vec<GssSetup>,
    pub load_banks: Vec<LoadBankSetup>,
    pub irradiance: TimeSeries,
    pub ambient_temp: TimeSeries,
    pub dt_s: f64,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

// ---------------------------------------------------------------------------
// Raw document shapes
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    version: u32,
    network: NetworkRefDoc,
    time: TimeDoc,
    series: SeriesDoc,
    #[serde(default)]
    gss: Vec<GssDoc>,
    #[serde(default)]
    load_bank: Vec<LoadBankDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkRefDoc {
    file: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeDoc {
    /// ISO-8601 UTC timestamp.
    start: String,
    /// ISO-8601 UTC timestamp.
    end: String,
    dt_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesDoc {
    /// Path to the irradiance CSV, W/m².
    irradiance: String,
    /// Path to the ambient temperature CSV, °C.
    ambient_temp: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GssDoc {
    id: String,
    /// Bus id; defaults to the network attachment entry for `id`.
    bus: Option<String>,
    pv: PvDoc,
    battery: Option<BatteryDoc>,
    #[serde(default)]
    controller: ControllerDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PvDoc {
    /// Module preset name, e.g. "yingli-yl245p29b".
    preset: Option<String>,
    /// Explicit datasheet values (used when no preset is given).
    module: Option<PvDatasheet>,
    /// Series resistance override; extracted from the datasheet when absent.
    r_s: Option<f64>,
    r_p: Option<f64>,
    n_modules_series: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatteryDoc {
    /// Bank preset name, e.g. "optima-d27m-bank".
    preset: Option<String>,
    params: Option<BatteryParams>,
    initial_soc: f64,
    initial_soh: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerDoc {
    /// Preset name ("table-2.4-vrla-24" or "gedae-configured"); the factory
    /// VRLA/24 V values apply when absent.
    preset: Option<String>,
    v_abs: Option<f64>,
    v_flt: Option<f64>,
    v_desc: Option<f64>,
    v_rec: Option<f64>,
    absorb_duration_s: Option<f64>,
    i_charge_max: Option<f64>,
    i_load_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadBankDoc {
    id: String,
    bus: Option<String>,
    /// Path to the 1440-row relay schedule.
    schedule: String,
    #[serde(default)]
    lamps: Option<LampsDoc>,
    #[serde(default)]
    fans: Option<FansDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LampsDoc {
    count: usize,
    rated_v: f64,
    rated_w: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FansDoc {
    count: usize,
    resistance: f64,
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Parses a network description file.
pub fn load_network(path: &Path) -> Result<Network, ScenarioError> {
    let text = read_file(path)?;
    let network: Network = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    network
        .validate()
        .map_err(|e| ScenarioError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(network)
}

fn load_series(path: &Path) -> Result<TimeSeries, ScenarioError> {
    let file = fs::File::open(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    TimeSeries::from_csv_reader(file).map_err(|source| ScenarioError::Series {
        path: path.to_path_buf(),
        source,
    })
}

fn resolve_pv(doc: &PvDoc, id: &str) -> Result<PvArrayConfig, ScenarioError> {
    let datasheet = match (&doc.preset, &doc.module) {
        (Some(name), None) => match name.as_str() {
            "yingli-yl245p29b" => PvDatasheet::yingli_yl245p29b(),
            other => return Err(ScenarioError::UnknownPreset(other.to_string())),
        },
        (None, Some(module)) => module.clone(),
        _ => {
            return Err(ScenarioError::Invalid(format!(
                "gss '{id}': give exactly one of pv.preset or pv.module"
            )))
        }
    };
    let module = match (doc.r_s, doc.r_p) {
        (Some(r_s), Some(r_p)) => PvModuleParams {
            datasheet,
            r_s,
            r_p,
        },
        (None, None) => datasheet
            .into_module()
            .map_err(|source| ScenarioError::Extraction {
                id: id.to_string(),
                source,
            })?,
        _ => {
            return Err(ScenarioError::Invalid(format!(
                "gss '{id}': r_s and r_p must be given together"
            )))
        }
    };
    module
        .validate()
        .map_err(|e| ScenarioError::Invalid(format!("gss '{id}': {e}")))?;
    Ok(PvArrayConfig::new(module, doc.n_modules_series))
}

fn resolve_battery(
    doc: &BatteryDoc,
    id: &str,
    ambient_at_start: f64,
) -> Result<(BatteryParams, BatteryState), ScenarioError> {
    let mut params = match (&doc.preset, &doc.params) {
        (Some(name), None) => match name.as_str() {
            "optima-d27m-bank" => BatteryParams::optima_d27m_bank(),
            other => return Err(ScenarioError::UnknownPreset(other.to_string())),
        },
        (None, Some(p)) => p.clone(),
        _ => {
            return Err(ScenarioError::Invalid(format!(
                "gss '{id}': give exactly one of battery.preset or battery.params"
            )))
        }
    };
    if params.c10 <= 0.0 {
        params.c10 = params.derive_c10();
    }
    if !(0.0..=1.0).contains(&doc.initial_soc) {
        return Err(ScenarioError::Invalid(format!(
            "gss '{id}': initial_soc must be in [0, 1]"
        )));
    }
    let mut state = BatteryState::resting(&params, doc.initial_soc, ambient_at_start);
    if let Some(soh) = doc.initial_soh {
        if !(0.0..=1.0).contains(&soh) {
            return Err(ScenarioError::Invalid(format!(
                "gss '{id}': initial_soh must be in [0, 1]"
            )));
        }
        state.soh = soh;
    }
    Ok((params, state))
}

fn resolve_controller(doc: &ControllerDoc, id: &str) -> Result<ControllerConfig, ScenarioError> {
    let mut cfg = match &doc.preset {
        Some(name) => ControllerConfig::preset(name)
            .ok_or_else(|| ScenarioError::UnknownPreset(name.clone()))?,
        None => ControllerConfig::vrla_24v(),
    };
    if let Some(v) = doc.v_abs {
        cfg.v_abs = v;
    }
    if let Some(v) = doc.v_flt {
        cfg.v_flt = v;
    }
    if let Some(v) = doc.v_desc {
        cfg.v_desc = v;
    }
    if let Some(v) = doc.v_rec {
        cfg.v_rec = v;
    }
    if let Some(v) = doc.absorb_duration_s {
        cfg.absorb_duration = v;
    }
    if let Some(v) = doc.i_charge_max {
        cfg.i_charge_max = v;
    }
    if let Some(v) = doc.i_load_max {
        cfg.i_load_max = v;
    }
    cfg.validate()
        .map_err(|e| ScenarioError::Invalid(format!("gss '{id}': {e}")))?;
    Ok(cfg)
}

impl Scenario {
    /// Loads and resolves a scenario file. Referenced paths are taken
    /// relative to the scenario file's directory.
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = read_file(path)?;
        let doc: ScenarioDoc = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if doc.version != SCENARIO_VERSION {
            return Err(ScenarioError::Version(doc.version));
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &str| -> PathBuf {
            let candidate = Path::new(p);
            if candidate.is_absolute() {
                candidate.to_path_buf()
            } else {
                base.join(candidate)
            }
        };
        let parse_time = |field: &str, text: &str| -> Result<DateTime<Utc>, ScenarioError> {
            DateTime::parse_from_rfc3339(text)
                .map(|t| t.with_timezone(&Utc))
                .map_err(|e| ScenarioError::Invalid(format!("time.{field} '{text}': {e}")))
        };
        let start = parse_time("start", &doc.time.start)?;
        let end = parse_time("end", &doc.time.end)?;

        let network = load_network(&resolve(&doc.network.file))?;
        let irradiance = load_series(&resolve(&doc.series.irradiance))?;
        let ambient_temp = load_series(&resolve(&doc.series.ambient_temp))?;
        let ambient_at_start = ambient_temp.at(start);

        let mut gss = Vec::new();
        for g in &doc.gss {
            let bus = match &g.bus {
                Some(b) => b.clone(),
                None => network
                    .attachments
                    .get(&g.id)
                    .cloned()
                    .ok_or_else(|| {
                        ScenarioError::Invalid(format!(
                            "gss '{}': no bus given and no attachment in the network file",
                            g.id
                        ))
                    })?,
            };
            let array = resolve_pv(&g.pv, &g.id)?;
            let battery = g
                .battery
                .as_ref()
                .map(|b| resolve_battery(b, &g.id, ambient_at_start))
                .transpose()?;
            let controller = resolve_controller(&g.controller, &g.id)?;
            gss.push(GssSetup {
                id: g.id.clone(),
                bus,
                array,
                battery,
                controller,
            });
        }
        gss.sort_by(|a, b| a.id.cmp(&b.id));

        let mut load_banks = Vec::new();
        for lb in &doc.load_bank {
            let bus = match &lb.bus {
                Some(b) => b.clone(),
                None => network
                    .attachments
                    .get(&lb.id)
                    .cloned()
                    .ok_or_else(|| {
                        ScenarioError::Invalid(format!(
                            "load bank '{}': no bus given and no attachment in the network file",
                            lb.id
                        ))
                    })?,
            };
            let schedule_path = resolve(&lb.schedule);
            let schedule_text = read_file(&schedule_path)?;
            let schedule =
                loads::parse_load_schedule(&schedule_text).map_err(|source| {
                    ScenarioError::Schedule {
                        path: schedule_path.clone(),
                        source,
                    }
                })?;
            let lamps = lb.lamps.as_ref().map_or((0, 24.0, 40.0), |l| {
                (l.count, l.rated_v, l.rated_w)
            });
            let fans = lb
                .fans
                .as_ref()
                .map_or((0, loads::FAN_RESISTANCE), |f| (f.count, f.resistance));
            let spec = LoadBankSpec::lamps_and_fans(lamps.0, lamps.1, lamps.2, fans.0, fans.1);
            if schedule.n_columns() < spec.n_devices() {
                return Err(ScenarioError::Schedule {
                    path: schedule_path,
                    source: loads::ScheduleError::ColumnMismatch {
                        got: schedule.n_columns(),
                        expected: spec.n_devices(),
                    },
                });
            }
            load_banks.push(LoadBankSetup {
                id: lb.id.clone(),
                bus,
                spec,
                schedule,
            });
        }
        load_banks.sort_by(|a, b| a.id.cmp(&b.id));

        let scenario = Scenario {
            network,
            gss,
            load_banks,
            irradiance,
            ambient_temp,
            dt_s: doc.time.dt_s,
            start,
            end,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.dt_s > 0.0) {
            return Err(ScenarioError::Invalid("dt_s must be positive".into()));
        }
        if self.end < self.start {
            return Err(ScenarioError::Invalid("end precedes start".into()));
        }
        let dt_ms = self.dt_s * 1000.0;
        if (dt_ms - dt_ms.round()).abs() > 1e-9 {
            return Err(ScenarioError::Invalid(
                "dt_s must be a whole number of milliseconds".into(),
            ));
        }
        self.network
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        for g in &self.gss {
            if self.network.bus_index(&g.bus).is_err() {
                return Err(ScenarioError::Invalid(format!(
                    "gss '{}' attached to unknown bus '{}'",
                    g.id, g.bus
                )));
            }
        }
        for lb in &self.load_banks {
            if self.network.bus_index(&lb.bus).is_err() {
                return Err(ScenarioError::Invalid(format!(
                    "load bank '{}' attached to unknown bus '{}'",
                    lb.id, lb.bus
                )));
            }
        }
        if self.start < self.end {
            for (name, series) in [
                ("irradiance", &self.irradiance),
                ("ambient_temp", &self.ambient_temp),
            ] {
                if series.first_time() > self.start {
                    return Err(ScenarioError::Invalid(format!(
                        "{name} series starts after the simulation window"
                    )));
                }
                let cadence = series.cadence_seconds().unwrap_or(0.0);
                let coverage = series.last_time()
                    + chrono::Duration::milliseconds((cadence * 1000.0) as i64);
                if coverage < self.end {
                    return Err(ScenarioError::Invalid(format!(
                        "{name} series ends before the simulation window"
                    )));
                }
                if let Some(cadence) = series.cadence_seconds() {
                    let ratio = cadence / self.dt_s;
                    if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
                        return Err(ScenarioError::Invalid(format!(
                            "dt_s = {} must divide the {name} cadence of {cadence} s",
                            self.dt_s
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of fixed steps in the window.
    pub fn n_steps(&self) -> usize {
        let span = (self.end - self.start).num_milliseconds() as f64 / 1000.0;
        (span / self.dt_s).round() as usize
    }

    /// Attachment map entries that point at source buses, for powerflow
    /// studies.
    pub fn source_buses(&self) -> BTreeMap<String, String> {
        self.gss
            .iter()
            .map(|g| (g.id.clone(), g.bus.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn minute_series(day: &str, values: impl Fn(usize) -> f64) -> String {
        let mut out = String::from("timestamp,value\n");
        for m in 0..1440 {
            let (h, min) = (m / 60, m % 60);
            out.push_str(&format!("{day}T{h:02}:{min:02}:00Z,{}\n", values(m)));
        }
        out
    }

    fn scaffold(dir: &Path) -> PathBuf {
        let network = toml::to_string(&Network::dcdn_12bus()).unwrap();
        write(dir, "grid.network", &network);
        write(
            dir,
            "irradiance.csv",
            &minute_series("2018-10-23", |m| {
                let x = m as f64 / 1440.0;
                (1000.0 * (std::f64::consts::PI * (x - 0.25) * 2.0).sin()).max(0.0)
            }),
        );
        write(
            dir,
            "temperature.csv",
            &minute_series("2018-10-23", |_| 28.0),
        );
        let schedule = crate::loads::LoadSchedule::all_off(6).serialize_text();
        write(dir, "lb.schedule", &schedule);
        write(
            dir,
            "day.scenario",
            r#"
version = 1

[network]
file = "grid.network"

[time]
start = "2018-10-23T00:00:00Z"
end = "2018-10-23T00:10:00Z"
dt_s = 1.0

[series]
irradiance = "irradiance.csv"
ambient_temp = "temperature.csv"

[[gss]]
id = "gss1"
[gss.pv]
preset = "yingli-yl245p29b"
n_modules_series = 2
r_s = 0.313
r_p = 1300.0
[gss.battery]
preset = "optima-d27m-bank"
initial_soc = 0.7
[gss.controller]
preset = "table-2.4-vrla-24"

[[load_bank]]
id = "lb1"
schedule = "lb.schedule"
lamps = { count = 5, rated_v = 24.0, rated_w = 40.0 }
fans = { count = 1, resistance = 62.24 }
"#,
        )
    }

    #[test]
    fn loads_and_resolves_scenario() {
        let dir = tempfile::tempdir().unwrap();
        let path = scaffold(dir.path());
        let scenario = Scenario::load(&path).unwrap();
        assert_eq!(scenario.gss.len(), 1);
        assert_eq!(scenario.gss[0].bus, "N1");
        assert_eq!(scenario.load_banks[0].bus, "N2");
        assert_eq!(scenario.n_steps(), 600);
        let (params, state) = scenario.gss[0].battery.as_ref().unwrap();
        assert!(params.c10 > 0.0);
        assert_eq!(state.soc, 0.7);
    }

    #[test]
    fn missing_series_file_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = scaffold(dir.path());
        fs::remove_file(dir.path().join("irradiance.csv")).unwrap();
        match Scenario::load(&path) {
            Err(ScenarioError::Io { path, .. }) => {
                assert!(path.to_string_lossy().contains("irradiance.csv"));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = scaffold(dir.path());
        let text = read_file(&path).unwrap().replace("version = 1", "version = 99");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            Scenario::load(&path),
            Err(ScenarioError::Version(99))
        ));
    }

    #[test]
    fn rejects_non_dividing_dt() {
        let dir = tempfile::tempdir().unwrap();
        let path = scaffold(dir.path());
        let text = read_file(&path).unwrap().replace("dt_s = 1.0", "dt_s = 7.0");
        fs::write(&path, text).unwrap();
        assert!(Scenario::load(&path).is_err());
    }

    #[test]
    fn empty_window_is_allowed() {
        let dir = tempfile::tempdir().unwrap();
        let path = scaffold(dir.path());
        let text = read_file(&path)
            .unwrap()
            .replace(
                r#"end = "2018-10-23T00:10:00Z""#,
                r#"end = "2018-10-23T00:00:00Z""#,
            );
        fs::write(&path, text).unwrap();
        let scenario = Scenario::load(&path).unwrap();
        assert_eq!(scenario.n_steps(), 0);
    }
}
