//! Fixed-step time-domain engine: couples the generation/storage systems to
//! the resistive grid in two stages per step (device logic from the previous
//! step's currents, then a network/battery fixed point), advances the device
//! states, and accumulates the daily energy ledger.

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc};
use thiserror::Error;

use crate::battery::{self, BatteryState};
use crate::controller::{
    self, ChargeStage, ControllerState, GssPlan, NIGHT_IRRADIANCE_FLOOR,
};
use crate::powerflow::{self, FlowError};
use crate::pv::OperatingEnvironment;
use crate::scenario::Scenario;

/// Relative source-current change at which the inner loop stops. Tighter
/// than the 0.1 % contract so the energy bookkeeping closes cleanly.
const INNER_TOL: f64 = 1e-5;
/// Inner fixed-point iteration cap per step.
const INNER_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("network solve failed at {t}: {source}")]
    Network {
        t: DateTime<Utc>,
        source: FlowError,
    },
    #[error("device model failed at {t}: {source}")]
    Device {
        t: DateTime<Utc>,
        source: controller::ControllerError,
    },
}

/// Per-step record of one generation/storage system.
#[derive(Debug, Clone)]
pub struct GssTrace {
    pub v_bat: f64,
    pub i_bat: f64,
    pub v_pv: f64,
    pub i_pv: f64,
    pub p_pv: f64,
    pub i_o: f64,
    pub converter_loss_w: f64,
    pub stage: ChargeStage,
    pub load_connected: bool,
    pub curtailed: bool,
}

/// Per-step record of one load bank.
#[derive(Debug, Clone)]
pub struct LbTrace {
    pub v: f64,
    pub i: f64,
    pub p: f64,
}

/// One engine step across the whole grid.
#[derive(Debug, Clone)]
pub struct StepTrace {
    pub t: DateTime<Utc>,
    pub gss: Vec<GssTrace>,
    pub lb: Vec<LbTrace>,
    pub branch_currents: Vec<f64>,
    /// Joule loss over all branches this step, W.
    pub branch_loss_w: f64,
    pub inner_converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    LvdDisconnect,
    LvdReconnect,
    StageChange(ChargeStage, ChargeStage),
    PvOvervoltage,
    LoadOvercurrent,
    InnerLoopNotConverged,
}

#[derive(Debug, Clone)]
pub struct Event {
    pub t: DateTime<Utc>,
    pub device: String,
    pub kind: EventKind,
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.kind {
            EventKind::LvdDisconnect => "load disconnected (low voltage)".to_string(),
            EventKind::LvdReconnect => "load reconnected".to_string(),
            EventKind::StageChange(from, to) => format!("stage {from} -> {to}"),
            EventKind::PvOvervoltage => "pv input opened (overvoltage)".to_string(),
            EventKind::LoadOvercurrent => "load terminal overcurrent".to_string(),
            EventKind::InnerLoopNotConverged => "inner loop not converged".to_string(),
        };
        write!(f, "{} {}: {}", self.t.to_rfc3339(), self.device, what)
    }
}

/// Energy totals over one period (a day or the whole run), kWh.
#[derive(Debug, Clone)]
pub struct LedgerBlock {
    pub label: String,
    /// Energy produced by the generators.
    pub e_gfv_kwh: f64,
    /// Energy consumed by the load banks.
    pub e_bc_kwh: f64,
    /// Net energy into the battery banks (at their terminals).
    pub e_bb_kwh: f64,
    /// Residual: e_gfv - e_bb - e_bc.
    pub e_loss_kwh: f64,
    /// Independent accumulation: branch joule + converter + standby losses.
    pub e_loss_accumulated_kwh: f64,
    /// Supply efficiency (1 - losses/consumption), percent; absent when
    /// nothing was consumed.
    pub eta_supply_pct: Option<f64>,
    /// Per-generator yield, kWh per kWp of rated power.
    pub yields_kwh_per_kwp: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct EnergyLedger {
    pub total: LedgerBlock,
    pub per_day: Vec<LedgerBlock>,
}

/// Complete simulation output.
#[derive(Debug)]
pub struct SimResult {
    pub gss_ids: Vec<String>,
    pub lb_ids: Vec<String>,
    pub branch_names: Vec<String>,
    pub traces: Vec<StepTrace>,
    pub events: Vec<Event>,
    pub ledger: EnergyLedger,
    pub nonconverged_steps: usize,
}

/// Mutable world state carried between steps.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub controllers: Vec<ControllerState>,
    pub batteries: Vec<Option<BatteryState>>,
    /// Grid terminal current of each system at the previous step, A
    /// (positive = into the grid).
    pub grid_currents: Vec<f64>,
    /// Terminal voltage seen at each system's bus at the previous step, V.
    pub node_voltages: Vec<f64>,
}

impl WorldState {
    pub fn initial(scenario: &Scenario) -> Self {
        let controllers = scenario
            .gss
            .iter()
            .map(|_| ControllerState::default())
            .collect();
        let batteries = scenario
            .gss
            .iter()
            .map(|g| g.battery.as_ref().map(|(_, s)| s.clone()))
            .collect();
        let node_voltages = scenario
            .gss
            .iter()
            .map(|g| match &g.battery {
                Some((params, state)) => battery::terminal_voltage(params, state, 0.0).0,
                None => 0.0,
            })
            .collect();
        WorldState {
            controllers,
            batteries,
            grid_currents: vec![0.0; scenario.gss.len()],
            node_voltages,
        }
    }
}

/// How one system presents itself to the grid solve this iteration.
enum GridInterface {
    /// Fixed voltage at the bus (regulated stage).
    Pinned(f64),
    /// Norton equivalent of the battery linearized at the current estimate:
    /// shunt conductance plus current injection.
    Norton { conductance: f64, injection: f64 },
    /// Pure current injection (battery-less system).
    Injection(f64),
    /// Not connected to the grid.
    Detached,
}

struct GssStepPlan {
    plan: GssPlan,
    regulated_setpoint: Option<f64>,
    pv_available: bool,
}

/// Advances the world by one step at time `t`. Returns the new state, the
/// step trace and the events raised.
pub fn step(
    scenario: &Scenario,
    state: &WorldState,
    t: DateTime<Utc>,
) -> Result<(WorldState, StepTrace, Vec<Event>), SimError> {
    let dt = scenario.dt_s;
    let env = OperatingEnvironment {
        irradiance: scenario.irradiance.at(t).max(0.0),
        ambient_temp: scenario.ambient_temp.at(t),
    };
    let conductor_temp = env.ambient_temp;
    let pv_available = env.irradiance >= NIGHT_IRRADIANCE_FLOOR;
    let mut events = Vec::new();

    // Load banks: relay masks for this minute.
    let minute = (t.time().num_seconds_from_midnight() / 60) as usize;
    let mut load_conductances: BTreeMap<String, f64> = BTreeMap::new();
    let mut lb_resistances: Vec<Option<f64>> = Vec::new();
    for lb in &scenario.load_banks {
        let mask = lb.spec.mask_from_row(lb.schedule.row(minute));
        let r = lb.spec.equivalent_resistance(&mask);
        if let Some(r) = r {
            *load_conductances.entry(lb.bus.clone()).or_insert(0.0) += 1.0 / r;
        }
        lb_resistances.push(r);
    }

    // Stage 1: device logic from the previous step's currents.
    let mut controllers = Vec::with_capacity(scenario.gss.len());
    let mut plans = Vec::with_capacity(scenario.gss.len());
    for (k, gss) in scenario.gss.iter().enumerate() {
        let prev_ctrl = &state.controllers[k];
        let battery_pair = gss
            .battery
            .as_ref()
            .map(|(p, _)| (p, state.batteries[k].as_ref().expect("battery state")));
        let v_bat_prev = match battery_pair {
            Some((params, bstate)) => {
                battery::terminal_voltage(params, bstate, bstate.last_current).0
            }
            None => state.node_voltages[k],
        };
        let mut ctrl = controller::step_stage(&gss.controller, prev_ctrl, v_bat_prev, pv_available, dt);
        ctrl = controller::lvd_hysteresis(&gss.controller, &ctrl, v_bat_prev);

        if ctrl.stage != prev_ctrl.stage {
            events.push(Event {
                t,
                device: gss.id.clone(),
                kind: EventKind::StageChange(prev_ctrl.stage, ctrl.stage),
            });
        }
        if ctrl.load_connected != prev_ctrl.load_connected {
            events.push(Event {
                t,
                device: gss.id.clone(),
                kind: if ctrl.load_connected {
                    EventKind::LvdReconnect
                } else {
                    EventKind::LvdDisconnect
                },
            });
        }

        let v_out_guess = if gss.battery.is_some() {
            v_bat_prev.max(1.0)
        } else {
            state.node_voltages[k].max(1.0)
        };
        let mut plan = controller::plan_gss_step(
            &gss.controller,
            ctrl.stage,
            &gss.array,
            &env,
            battery_pair,
            v_out_guess,
            state.grid_currents[k],
        )
        .map_err(|source| SimError::Device { t, source })?;

        // Regulated stage that cannot be held with the available generation
        // falls back to bulk for this step.
        let mut regulated_setpoint = None;
        if matches!(plan.stage, ChargeStage::Absorption | ChargeStage::Float) {
            let required = plan.i_bat_setpoint + state.grid_currents[k];
            if required > plan.i_o_available + controller::feasibility_margin(plan.i_o_available) {
                ctrl = controller::revert_to_bulk(&ctrl);
                plan = controller::plan_gss_step(
                    &gss.controller,
                    ctrl.stage,
                    &gss.array,
                    &env,
                    battery_pair,
                    v_out_guess,
                    state.grid_currents[k],
                )
                .map_err(|source| SimError::Device { t, source })?;
            } else {
                regulated_setpoint = Some(if plan.stage == ChargeStage::Absorption {
                    gss.controller.v_abs
                } else {
                    gss.controller.v_flt
                });
            }
        }
        if plan.pv_overvoltage {
            events.push(Event {
                t,
                device: gss.id.clone(),
                kind: EventKind::PvOvervoltage,
            });
        }
        controllers.push(ctrl);
        plans.push(GssStepPlan {
            plan,
            regulated_setpoint,
            pv_available,
        });
    }

    // Stage 2: fixed point between battery voltages and network currents.
    let mut i_bat = vec![0.0; scenario.gss.len()];
    let mut i_grid = state.grid_currents.clone();
    for (k, _) in scenario.gss.iter().enumerate() {
        i_bat[k] = state.batteries[k].as_ref().map_or(0.0, |s| s.last_current);
    }

    // A battery-backed system that is connected to the grid acts as a
    // voltage source; battery-less systems can only inject into an
    // energized grid.
    let any_voltage_source = scenario
        .gss
        .iter()
        .enumerate()
        .any(|(k, g)| g.battery.is_some() && controllers[k].load_connected);

    let mut solution = None;
    let mut points: Vec<controller::ElectricalPoint> = Vec::new();
    let mut converged = false;
    // The Norton linearization is Newton-like and usually lands in a few
    // iterations; damping guards the steps where region changes or limiter
    // activity make the map non-smooth.
    let mut damping = 1.0_f64;
    let mut prev_worst = f64::INFINITY;

    for _iter in 0..INNER_MAX_ITERATIONS {
        let mut source_voltages = BTreeMap::new();
        let mut conductances = load_conductances.clone();
        let mut injections: BTreeMap<String, f64> = BTreeMap::new();
        let mut interfaces = Vec::with_capacity(scenario.gss.len());
        // Net current each system feeds toward battery + grid (converter
        // output minus any battery-side standby draw).
        let mut i_net = vec![0.0; scenario.gss.len()];
        points.clear();

        for (k, gss) in scenario.gss.iter().enumerate() {
            let splan = &plans[k];
            let connected = controllers[k].load_connected;
            let battery_present = gss.battery.is_some();
            let grid_current_used = if connected { i_grid[k] } else { 0.0 };
            let v_out = match (&gss.battery, splan.regulated_setpoint) {
                (_, Some(v_set)) => v_set,
                (Some((params, _)), None) => {
                    let bstate = state.batteries[k].as_ref().unwrap();
                    battery::terminal_voltage(params, bstate, i_bat[k]).0
                }
                (None, None) => state.node_voltages[k].max(1.0),
            };
            let mut point = controller::resolve_electrical(
                &gss.controller,
                &splan.plan,
                battery_present,
                v_out,
                grid_current_used,
                splan.pv_available,
            );
            if !battery_present && (!connected || !any_voltage_source) {
                // A battery-less controller has no voltage reference here:
                // it neither converts nor injects.
                point = controller::ElectricalPoint {
                    i_pv: 0.0,
                    i_o: 0.0,
                    i_bat: 0.0,
                    losses: Default::default(),
                    converting: false,
                    curtailed: false,
                };
            }
            i_net[k] = if battery_present {
                point.i_bat + grid_current_used
            } else {
                point.i_o
            };

            let interface = if !connected {
                GridInterface::Detached
            } else if let Some(v_set) = splan.regulated_setpoint {
                GridInterface::Pinned(v_set)
            } else if let Some((params, _)) = &gss.battery {
                let bstate = state.batteries[k].as_ref().unwrap();
                let i0 = i_bat[k];
                let h = 1e-3_f64.max(i0.abs() * 1e-4);
                let v0 = battery::terminal_voltage(params, bstate, i0).0;
                let v_plus = battery::terminal_voltage(params, bstate, i0 + h).0;
                let v_minus = battery::terminal_voltage(params, bstate, i0 - h).0;
                let r_b = ((v_plus - v_minus) / (2.0 * h)).max(1e-6);
                GridInterface::Norton {
                    conductance: 1.0 / r_b,
                    injection: i_net[k] - i0 + v0 / r_b,
                }
            } else {
                GridInterface::Injection(point.i_o)
            };
            interfaces.push(interface);
            points.push(point);
        }

        for (k, gss) in scenario.gss.iter().enumerate() {
            match &interfaces[k] {
                GridInterface::Pinned(v) => {
                    source_voltages.insert(gss.bus.clone(), *v);
                }
                GridInterface::Norton {
                    conductance,
                    injection,
                } => {
                    *conductances.entry(gss.bus.clone()).or_insert(0.0) += conductance;
                    *injections.entry(gss.bus.clone()).or_insert(0.0) += injection;
                }
                GridInterface::Injection(i_o) => {
                    *injections.entry(gss.bus.clone()).or_insert(0.0) += i_o;
                }
                GridInterface::Detached => {}
            }
        }

        let sol = powerflow::solve_linear_network(
            &scenario.network,
            conductor_temp,
            &source_voltages,
            &conductances,
            &injections,
        )
        .map_err(|source| SimError::Network { t, source })?;

        // Extract the new grid currents and battery currents.
        let mut worst: f64 = 0.0;
        for (k, gss) in scenario.gss.iter().enumerate() {
            let (i_grid_new, i_bat_new) = match &interfaces[k] {
                GridInterface::Detached => (0.0, i_net[k]),
                GridInterface::Pinned(_) => {
                    let ig = sol.injection_current(&gss.bus).unwrap_or(0.0);
                    (ig, i_net[k] - ig)
                }
                GridInterface::Norton { conductance, .. } => {
                    let v_node = sol.voltages[&gss.bus];
                    let bstate = state.batteries[k].as_ref().unwrap();
                    let (params, _) = gss.battery.as_ref().unwrap();
                    let v0 = battery::terminal_voltage(params, bstate, i_bat[k]).0;
                    let ib = i_bat[k] + (v_node - v0) * conductance;
                    (i_net[k] - ib, ib)
                }
                GridInterface::Injection(i_o) => (*i_o, 0.0),
            };
            let scale = i_grid[k].abs().max(1.0);
            worst = worst.max((i_grid_new - i_grid[k]).abs() / scale);
            let bscale = i_bat[k].abs().max(1.0);
            worst = worst.max((i_bat_new - i_bat[k]).abs() / bscale);
            i_grid[k] += damping * (i_grid_new - i_grid[k]);
            i_bat[k] += damping * (i_bat_new - i_bat[k]);
        }
        solution = Some(sol);
        if worst < INNER_TOL {
            converged = true;
            break;
        }
        if worst > prev_worst {
            damping = (damping * 0.5).max(1.0 / 64.0);
        } else {
            damping = (damping * 1.5).min(1.0);
        }
        prev_worst = worst;
    }
    let solution = solution.expect("at least one network solve");
    if !converged {
        events.push(Event {
            t,
            device: "grid".to_string(),
            kind: EventKind::InnerLoopNotConverged,
        });
        log::warn!("{t}: inner loop not converged; carrying last iterate");
    }

    // Final bookkeeping and state advance.
    let mut gss_traces = Vec::with_capacity(scenario.gss.len());
    let mut next_batteries = Vec::with_capacity(scenario.gss.len());
    let mut node_voltages = Vec::with_capacity(scenario.gss.len());
    for (k, gss) in scenario.gss.iter().enumerate() {
        let point = &points[k];
        let splan = &plans[k];
        let v_bat = match (&gss.battery, splan.regulated_setpoint) {
            (_, Some(v_set)) => v_set,
            (Some((params, _)), None) => {
                let bstate = state.batteries[k].as_ref().unwrap();
                battery::terminal_voltage(params, bstate, i_bat[k]).0
            }
            (None, None) => solution.voltages[&gss.bus],
        };
        if i_grid[k].abs() > gss.controller.i_load_max {
            events.push(Event {
                t,
                device: gss.id.clone(),
                kind: EventKind::LoadOvercurrent,
            });
        }
        let next_battery = match &gss.battery {
            Some((params, _)) => {
                let bstate = state.batteries[k].as_ref().unwrap();
                let stepped = battery::step_state(params, bstate, i_bat[k], env.ambient_temp, dt);
                Some(battery::apply_self_discharge(params, &stepped, dt))
            }
            None => None,
        };
        let p_pv = splan.plan.v_pv * point.i_pv;
        gss_traces.push(GssTrace {
            v_bat,
            i_bat: i_bat[k],
            v_pv: if point.converting { splan.plan.v_pv } else { 0.0 },
            i_pv: point.i_pv,
            p_pv: if point.converting { p_pv } else { 0.0 },
            i_o: point.i_o,
            converter_loss_w: point.losses.total(),
            stage: controllers[k].stage,
            load_connected: controllers[k].load_connected,
            curtailed: point.curtailed,
        });
        next_batteries.push(next_battery);
        node_voltages.push(solution.voltages[&gss.bus]);
    }

    let mut lb_traces = Vec::with_capacity(scenario.load_banks.len());
    for (lb, r) in scenario.load_banks.iter().zip(&lb_resistances) {
        let v = solution.voltages[&lb.bus];
        let (i, p) = match r {
            Some(r) => (v / r, v * v / r),
            None => (0.0, 0.0),
        };
        lb_traces.push(LbTrace { v, i, p });
    }

    let resistances = scenario.network.branch_resistances(conductor_temp);
    let mut branch_currents = Vec::with_capacity(scenario.network.branches.len());
    let mut branch_loss_w = 0.0;
    for (br, r) in scenario.network.branches.iter().zip(&resistances) {
        let i = solution.branch_currents[&format!("{}->{}", br.from, br.to)];
        branch_loss_w += i * i * r;
        branch_currents.push(i);
    }

    let trace = StepTrace {
        t,
        gss: gss_traces,
        lb: lb_traces,
        branch_currents,
        branch_loss_w,
        inner_converged: converged,
    };
    let next = WorldState {
        controllers,
        batteries: next_batteries,
        grid_currents: i_grid,
        node_voltages,
    };
    Ok((next, trace, events))
}

/// Runs the scenario over its whole window.
pub fn run(scenario: &Scenario) -> Result<SimResult, SimError> {
    let n = scenario.n_steps();
    let dt_ms = (scenario.dt_s * 1000.0).round() as i64;
    let mut state = WorldState::initial(scenario);
    let mut traces = Vec::with_capacity(n);
    let mut events = Vec::new();
    let mut nonconverged = 0usize;
    for k in 0..n {
        let t = scenario.start + chrono::Duration::milliseconds(dt_ms * k as i64);
        let (next, trace, mut step_events) = step(scenario, &state, t)?;
        if !trace.inner_converged {
            nonconverged += 1;
        }
        traces.push(trace);
        events.append(&mut step_events);
        state = next;
    }
    let ratings: Vec<(String, f64)> = scenario
        .gss
        .iter()
        .map(|g| (g.id.clone(), g.array.p_mp_stc() / 1000.0))
        .collect();
    let ledger = energy_ledger(&traces, &ratings);
    Ok(SimResult {
        gss_ids: scenario.gss.iter().map(|g| g.id.clone()).collect(),
        lb_ids: scenario.load_banks.iter().map(|l| l.id.clone()).collect(),
        branch_names: scenario
            .network
            .branches
            .iter()
            .map(|b| format!("{}-{}", b.from, b.to))
            .collect(),
        traces,
        events,
        ledger,
        nonconverged_steps: nonconverged,
    })
}

#[derive(Default, Clone)]
struct Accumulator {
    e_gfv_wh: f64,
    e_bc_wh: f64,
    e_bb_wh: f64,
    e_loss_acc_wh: f64,
    per_gss_wh: Vec<f64>,
}

impl Accumulator {
    fn new(n_gss: usize) -> Self {
        Accumulator {
            per_gss_wh: vec![0.0; n_gss],
            ..Default::default()
        }
    }

    fn add(&mut self, a: &StepTrace, b: &StepTrace, dt_s: f64) {
        // Trapezoid between consecutive step samples.
        let h = dt_s / 3600.0;
        let avg = |f: &dyn Fn(&StepTrace) -> f64| 0.5 * (f(a) + f(b)) * h;
        self.e_gfv_wh += avg(&|s| s.gss.iter().map(|g| g.p_pv).sum());
        self.e_bc_wh += avg(&|s| s.lb.iter().map(|l| l.p).sum());
        self.e_bb_wh += avg(&|s| s.gss.iter().map(|g| g.v_bat * g.i_bat).sum());
        self.e_loss_acc_wh += avg(&|s| {
            s.branch_loss_w + s.gss.iter().map(|g| g.converter_loss_w).sum::<f64>()
        });
        for (k, acc) in self.per_gss_wh.iter_mut().enumerate() {
            *acc += 0.5 * (a.gss[k].p_pv + b.gss[k].p_pv) * h;
        }
    }

    fn block(&self, label: String, ratings: &[(String, f64)]) -> LedgerBlock {
        let e_gfv = self.e_gfv_wh / 1000.0;
        let e_bc = self.e_bc_wh / 1000.0;
        let e_bb = self.e_bb_wh / 1000.0;
        let e_loss = e_gfv - e_bb - e_bc;
        let eta = if e_bc > 0.0 {
            Some((1.0 - e_loss / e_bc) * 100.0)
        } else {
            None
        };
        let yields = ratings
            .iter()
            .enumerate()
            .map(|(k, (id, kwp))| {
                let kwh = self.per_gss_wh[k] / 1000.0;
                (id.clone(), if *kwp > 0.0 { kwh / kwp } else { 0.0 })
            })
            .collect();
        LedgerBlock {
            label,
            e_gfv_kwh: e_gfv,
            e_bc_kwh: e_bc,
            e_bb_kwh: e_bb,
            e_loss_kwh: e_loss,
            e_loss_accumulated_kwh: self.e_loss_acc_wh / 1000.0,
            eta_supply_pct: eta,
            yields_kwh_per_kwp: yields,
        }
    }
}

/// Ledger arithmetic on raw period energies (kWh): losses as the balance
/// residual and the supply efficiency.
pub fn ledger_arithmetic(e_gfv_kwh: f64, e_bc_kwh: f64, e_bb_kwh: f64) -> (f64, Option<f64>) {
    let e_loss = e_gfv_kwh - e_bb_kwh - e_bc_kwh;
    let eta = if e_bc_kwh > 0.0 {
        Some((1.0 - e_loss / e_bc_kwh) * 100.0)
    } else {
        None
    };
    (e_loss, eta)
}

/// Builds the energy ledger from step traces by trapezoidal integration,
/// bucketed per calendar day (UTC). `ratings` carries each generator's rated
/// power in kWp for the yield figures.
pub fn energy_ledger(traces: &[StepTrace], ratings: &[(String, f64)]) -> EnergyLedger {
    let n_gss = ratings.len();
    let mut total = Accumulator::new(n_gss);
    let mut days: Vec<(NaiveDate, Accumulator)> = Vec::new();
    if traces.len() >= 2 {
        let dt_s = (traces[1].t - traces[0].t).num_milliseconds() as f64 / 1000.0;
        for pair in traces.windows(2) {
            total.add(&pair[0], &pair[1], dt_s);
            let date = pair[0].t.date_naive();
            match days.last_mut() {
                Some((d, acc)) if *d == date => acc.add(&pair[0], &pair[1], dt_s),
                _ => {
                    let mut acc = Accumulator::new(n_gss);
                    acc.add(&pair[0], &pair[1], dt_s);
                    days.push((date, acc));
                }
            }
        }
        // Final interval: the last sample extends to the window edge.
        let last = traces.last().unwrap();
        total.add(last, last, dt_s);
        if let Some((d, acc)) = days.last_mut() {
            if *d == last.t.date_naive() {
                acc.add(last, last, dt_s);
            }
        }
    } else if traces.len() == 1 {
        days.push((traces[0].t.date_naive(), Accumulator::new(n_gss)));
    }
    EnergyLedger {
        total: total.block("total".to_string(), ratings),
        per_day: days
            .into_iter()
            .map(|(d, acc)| {
                acc.block(
                    format!("{:04}-{:02}-{:02}", d.year(), d.month(), d.day()),
                    ratings,
                )
            })
            .collect(),
    }
}
