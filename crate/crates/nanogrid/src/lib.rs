//! Simulation toolkit for a low-voltage DC distribution nanogrid fed by
//! photovoltaic generators and lead-acid battery banks through commercial
//! MPPT charge controllers.
//!
//! The crate is organized around the physical subsystems of such a grid:
//!
//! * [`pv`] — single-diode five-parameter PV module/generator model with
//!   datasheet-driven parameter extraction.
//! * [`battery`] — dynamic lead-acid model with charge/discharge/overcharge
//!   regions, state of charge, level of energy, aging and self-discharge.
//! * [`controller`] — three-stage (bulk/absorption/float) MPPT charge
//!   controller with buck-converter loss accounting and load-disconnect
//!   hysteresis.
//! * [`network`] / [`powerflow`] — resistive network description and the
//!   Newton-Raphson DC load flow, including the battery-voltage outer loop.
//! * [`sim`] — fixed-step time-domain engine coupling generation/storage
//!   systems to the network, with a daily energy ledger.
//! * [`loads`], [`sizing`], [`series`], [`scenario`] — load banks and relay
//!   schedules, off-grid sizing formulas, time-series inputs and the
//!   scenario/network file formats.
//! * [`validation`] — independent oracles (dense circuit solve, fine-step
//!   coulomb counting, published-table reproduction) used by the acceptance
//!   suite.

pub mod battery;
pub mod controller;
pub mod loads;
pub mod network;
pub mod powerflow;
pub mod pv;
pub mod scenario;
pub mod series;
pub mod sim;
pub mod sizing;
pub mod validation;

pub use battery::{BatteryParams, BatteryState, Region};
pub use controller::{ChargeStage, ControllerConfig, ControllerState};
pub use network::{Bus, BusKind, Conductor, Network};
pub use powerflow::{FlowProblem, FlowSolution, LoadSpec};
pub use pv::{OperatingEnvironment, PvArrayConfig, PvDatasheet, PvModuleParams};
pub use scenario::Scenario;
pub use sim::{EnergyLedger, SimResult};
