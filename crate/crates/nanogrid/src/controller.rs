//! Three-stage (bulk/absorption/float) MPPT charge-controller model: buck
//! converter with conduction, switching, dead-time, inductor and
//! self-consumption losses; stage machine with the absorption timer; and
//! low-voltage load-disconnect hysteresis.
//!
//! The MPPT is modeled as ideal: in the bulk stage the generator operates at
//! the estimated maximum-power voltage, and the duty cycle follows
//! algebraically from the voltage ratio instead of a switching-level control
//! loop.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::battery::{self, BatteryParams, BatteryState};
use crate::pv::{self, OperatingEnvironment, PvArrayConfig};

/// Irradiance below which the controller treats the generator as dark and
/// enters the night stage, W/m².
pub const NIGHT_IRRADIANCE_FLOOR: f64 = 1.0;

/// Slack on the regulated-stage feasibility test. Without it the stage
/// machine chatters between bulk and absorption when the setpoint current
/// rides the available-generation limit.
pub fn feasibility_margin(i_o_available: f64) -> f64 {
    (0.02 * i_o_available).max(0.25)
}

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("duty cycle must be in (0, 1], got {0}")]
    InvalidDuty(f64),
    #[error("conversion efficiency undefined for non-positive input power")]
    NoInputPower,
    #[error("pv error: {0}")]
    Pv(#[from] pv::PvError),
}

/// Converter loss constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ConverterLosses {
    /// MOSFET drain-source on resistance, ohm.
    pub r_ds_on: f64,
    /// Inductor DC resistance, ohm.
    pub r_l: f64,
    /// Dead time per switching edge, s.
    pub t_dead: f64,
    /// Switch rise time, s.
    pub t_s: f64,
    /// Switch fall time, s.
    pub t_d: f64,
    /// Switching frequency, Hz.
    pub f_sw: f64,
    /// Controller self-consumption, W.
    pub p_auto: f64,
}

impl Default for ConverterLosses {
    fn default() -> Self {
        ConverterLosses {
            r_ds_on: 2.5e-3,
            r_l: 3e-3,
            t_dead: 5e-9,
            t_s: 10e-9,
            t_d: 10e-9,
            f_sw: 50e3,
            p_auto: 5.0,
        }
    }
}

impl ConverterLosses {
    pub fn lossless() -> Self {
        ConverterLosses {
            r_ds_on: 0.0,
            r_l: 0.0,
            t_dead: 0.0,
            t_s: 0.0,
            t_d: 0.0,
            f_sw: 0.0,
            p_auto: 0.0,
        }
    }
}

/// Setpoints and limits of one charge controller.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Absorption-stage regulation voltage, V.
    pub v_abs: f64,
    /// Float-stage regulation voltage, V.
    pub v_flt: f64,
    /// Absorption stage duration, s.
    pub absorb_duration: f64,
    /// Low-voltage load disconnect threshold, V.
    pub v_desc: f64,
    /// Load reconnect threshold, V.
    pub v_rec: f64,
    /// Maximum battery charging current, A.
    pub i_charge_max: f64,
    /// Maximum load-terminal current, A.
    pub i_load_max: f64,
    /// Maximum generator operating voltage, V; above it the PV input opens.
    pub v_pv_operating_max: f64,
    /// Absolute generator voltage rating, V.
    pub v_pv_absolute_max: f64,
    #[serde(default)]
    pub loss: ConverterLosses,
}

impl ControllerConfig {
    /// Factory setpoints for a VRLA battery on a 24 V bus.
    pub fn vrla_24v() -> Self {
        ControllerConfig {
            v_abs: 28.8,
            v_flt: 27.0,
            absorb_duration: 7200.0,
            v_desc: 22.8,
            v_rec: 24.8,
            i_charge_max: 20.0,
            i_load_max: 20.0,
            v_pv_operating_max: 90.0,
            v_pv_absolute_max: 100.0,
            loss: ConverterLosses::default(),
        }
    }

    /// Setpoints reconfigured to the battery manufacturer's recommendation
    /// (29.4 V absorption, 26.4 V float).
    pub fn gedae_configured() -> Self {
        ControllerConfig {
            v_abs: 29.4,
            v_flt: 26.4,
            ..Self::vrla_24v()
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "table-2.4-vrla-24" => Some(Self::vrla_24v()),
            "gedae-configured" => Some(Self::gedae_configured()),
            _ => None,
        }
    }

    /// Same preset with an alternative reconnect voltage (some firmware
    /// revisions default to 24.2 V instead of 24.8 V).
    pub fn with_reconnect_voltage(mut self, v_rec: f64) -> Self {
        self.v_rec = v_rec;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_desc < self.v_rec && self.v_rec < self.v_flt && self.v_flt <= self.v_abs) {
            return Err(format!(
                "setpoints must satisfy v_desc < v_rec < v_flt <= v_abs, got {} / {} / {} / {}",
                self.v_desc, self.v_rec, self.v_flt, self.v_abs
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeStage {
    Bulk,
    Absorption,
    Float,
    Night,
}

impl std::fmt::Display for ChargeStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ChargeStage::Bulk => "bulk",
            ChargeStage::Absorption => "absorption",
            ChargeStage::Float => "float",
            ChargeStage::Night => "night",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerState {
    pub stage: ChargeStage,
    pub absorb_elapsed: f64,
    pub load_connected: bool,
    /// Last applied duty cycle.
    pub duty: f64,
}

impl Default for ControllerState {
    fn default() -> Self {
        ControllerState {
            stage: ChargeStage::Night,
            absorb_elapsed: 0.0,
            load_connected: true,
            duty: 1.0,
        }
    }
}

/// Individual converter loss terms at one operating point, W.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossBreakdown {
    pub conduction: f64,
    pub switching: f64,
    pub dead_time: f64,
    pub inductor: f64,
    pub self_consumption: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.conduction + self.switching + self.dead_time + self.inductor + self.self_consumption
    }
}

/// Loss terms for a converter moving `i_pv` at `v_pv` with duty cycle `duty`.
pub fn converter_losses(cfg: &ControllerConfig, v_pv: f64, i_pv: f64, duty: f64) -> LossBreakdown {
    let l = &cfg.loss;
    let i_conv = i_pv / duty;
    LossBreakdown {
        conduction: 2.0 * l.r_ds_on * i_conv * i_conv,
        switching: 0.5 * v_pv * i_conv * l.f_sw * (l.t_s + l.t_d),
        dead_time: 2.0 * v_pv * i_conv * l.t_dead * l.f_sw,
        inductor: l.r_l * i_conv * i_conv,
        self_consumption: l.p_auto,
    }
}

/// Buck converter output current after loss deduction, floored at zero (the
/// converter cannot sink current to feed its own losses).
pub fn buck_output_current(
    cfg: &ControllerConfig,
    v_pv: f64,
    i_pv: f64,
    v_o: f64,
    duty: f64,
) -> Result<f64, ControllerError> {
    if !(duty > 0.0 && duty <= 1.0) {
        return Err(ControllerError::InvalidDuty(duty));
    }
    debug_assert!(v_o > 0.0);
    let losses = converter_losses(cfg, v_pv, i_pv, duty);
    Ok((i_pv / duty - losses.total() / v_o).max(0.0))
}

/// DC/DC conversion efficiency, clamped to [0, 1].
pub fn conversion_efficiency(
    v_pv: f64,
    i_pv: f64,
    v_o: f64,
    i_o: f64,
) -> Result<f64, ControllerError> {
    let p_in = v_pv * i_pv;
    if p_in <= 0.0 {
        return Err(ControllerError::NoInputPower);
    }
    Ok((v_o * i_o / p_in).clamp(0.0, 1.0))
}

/// Advances the charging-stage machine by `dt` seconds.
pub fn step_stage(
    cfg: &ControllerConfig,
    state: &ControllerState,
    v_bat: f64,
    pv_available: bool,
    dt: f64,
) -> ControllerState {
    assert!(dt > 0.0);
    let mut next = state.clone();
    if !pv_available {
        next.stage = ChargeStage::Night;
        return next;
    }
    match state.stage {
        ChargeStage::Night => {
            next.stage = ChargeStage::Bulk;
            next.absorb_elapsed = 0.0;
        }
        ChargeStage::Bulk => {
            if v_bat >= cfg.v_abs {
                next.stage = ChargeStage::Absorption;
                next.absorb_elapsed = 0.0;
            }
        }
        ChargeStage::Absorption => {
            next.absorb_elapsed = (state.absorb_elapsed + dt).min(cfg.absorb_duration);
            if next.absorb_elapsed >= cfg.absorb_duration {
                next.stage = ChargeStage::Float;
            }
        }
        ChargeStage::Float => {}
    }
    next
}

/// Reverts a regulated stage to bulk (used when the regulation setpoint
/// cannot be held with the available generation).
pub fn revert_to_bulk(state: &ControllerState) -> ControllerState {
    ControllerState {
        stage: ChargeStage::Bulk,
        absorb_elapsed: 0.0,
        ..state.clone()
    }
}

/// Low-voltage disconnect hysteresis: opens the load terminal at `v_desc`,
/// closes it again only above `v_rec`.
pub fn lvd_hysteresis(
    cfg: &ControllerConfig,
    state: &ControllerState,
    v_bat: f64,
) -> ControllerState {
    let mut next = state.clone();
    if state.load_connected && v_bat <= cfg.v_desc {
        next.load_connected = false;
    } else if !state.load_connected && v_bat >= cfg.v_rec {
        next.load_connected = true;
    }
    next
}

/// PV-side operating decision of one generation/storage system for a step:
/// where the generator sits on its I-V curve and what the converter pushes
/// out. Computed by [`plan_gss_step`] before the grid is solved.
#[derive(Debug, Clone)]
pub struct GssPlan {
    pub stage: ChargeStage,
    pub v_pv: f64,
    pub i_pv: f64,
    /// Converter output current at the planning voltage, A.
    pub i_o: f64,
    /// Maximum converter output current available at the MPP, A.
    pub i_o_available: f64,
    /// Battery current that holds the regulation setpoint, A (regulated
    /// stages only).
    pub i_bat_setpoint: f64,
    /// True while the converter is actively moving PV power.
    pub converting: bool,
    /// Set when the generator voltage exceeded the operating limit and the
    /// PV input was opened.
    pub pv_overvoltage: bool,
}

/// Result of composing controller, generator and battery for one step at a
/// known grid terminal current.
#[derive(Debug, Clone)]
pub struct GssStepResult {
    pub controller: ControllerState,
    pub battery: Option<BatteryState>,
    pub v_bat: f64,
    pub i_bat: f64,
    pub v_pv: f64,
    pub i_pv: f64,
    pub i_o: f64,
    pub losses: LossBreakdown,
    pub converting: bool,
    /// Charging current hit `i_charge_max` and generation was curtailed.
    pub curtailed: bool,
    pub pv_overvoltage: bool,
    pub load_overcurrent: bool,
}

/// Inverts the output-current relation: the PV current that makes the
/// converter deliver `i_o_target` at the given voltages. Solves the quadratic
/// loss balance in the converted current.
fn pv_current_for_output(
    cfg: &ControllerConfig,
    v_pv: f64,
    v_o: f64,
    i_o_target: f64,
) -> f64 {
    let l = &cfg.loss;
    // i_o = i_conv - [a*i_conv^2 + b*i_conv + p_auto]/v_o with
    // a = 2 r_ds_on + r_l, b = v_pv (0.5 f_sw (t_s+t_d) + 2 t_dead f_sw).
    let a = 2.0 * l.r_ds_on + l.r_l;
    let b = v_pv * (0.5 * l.f_sw * (l.t_s + l.t_d) + 2.0 * l.t_dead * l.f_sw);
    // a/v_o * x^2 + (b/v_o - 1) x + (p_auto/v_o + i_o) = 0
    let qa = a / v_o;
    let qb = b / v_o - 1.0;
    let qc = l.p_auto / v_o + i_o_target;
    let duty = v_o / v_pv;
    if qa.abs() < 1e-15 {
        return (-qc / qb) * duty;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return 0.0;
    }
    // The physical branch is the smaller root (losses grow with current).
    let x = (-qb - disc.sqrt()) / (2.0 * qa);
    (x * duty).max(0.0)
}

/// Plans the PV operating point and converter output for one step, given the
/// previous step's grid current (device logic runs ahead of the grid solve).
pub fn plan_gss_step(
    cfg: &ControllerConfig,
    stage: ChargeStage,
    array: &PvArrayConfig,
    env: &OperatingEnvironment,
    battery: Option<(&BatteryParams, &BatteryState)>,
    v_out_guess: f64,
    grid_current_guess: f64,
) -> Result<GssPlan, ControllerError> {
    let mut plan = GssPlan {
        stage,
        v_pv: 0.0,
        i_pv: 0.0,
        i_o: 0.0,
        i_o_available: 0.0,
        i_bat_setpoint: 0.0,
        converting: false,
        pv_overvoltage: false,
    };
    if stage == ChargeStage::Night {
        return Ok(plan);
    }

    let v_mp = pv::mpp_voltage_estimate(array, env)?;
    if v_mp > cfg.v_pv_operating_max {
        plan.pv_overvoltage = true;
        return Ok(plan);
    }
    let i_mp = pv::iv_current(array, v_mp, env)?;
    let v_o = v_out_guess.max(1.0);
    let duty = (v_o / v_mp).min(1.0);
    let i_o_mpp = buck_output_current(cfg, v_mp, i_mp, v_o, duty)?;
    plan.i_o_available = i_o_mpp;

    match stage {
        ChargeStage::Bulk => {
            plan.v_pv = v_mp;
            plan.i_pv = i_mp;
            plan.i_o = i_o_mpp;
            plan.converting = i_o_mpp > 0.0;
        }
        ChargeStage::Absorption | ChargeStage::Float => {
            let v_set = if stage == ChargeStage::Absorption {
                cfg.v_abs
            } else {
                cfg.v_flt
            };
            let i_bat_req = match battery {
                Some((params, state)) => battery::current_for_voltage(
                    params,
                    state,
                    v_set,
                    -cfg.i_load_max,
                    cfg.i_charge_max,
                    1e-3,
                )
                .unwrap_or(cfg.i_charge_max),
                None => 0.0,
            };
            plan.i_bat_setpoint = i_bat_req;
            let i_o_req = (i_bat_req + grid_current_guess).clamp(0.0, i_o_mpp);
            // Walk the operating point up the I-V curve until the converter
            // output matches the requested current.
            let (v_pv, i_pv) = operating_point_for_output(cfg, array, env, v_mp, v_set, i_o_req)?;
            plan.v_pv = v_pv;
            plan.i_pv = i_pv;
            plan.i_o = buck_output_current(cfg, v_pv, i_pv, v_set, (v_set / v_pv).min(1.0))?;
            plan.converting = plan.i_o > 0.0;
        }
        ChargeStage::Night => unreachable!(),
    }
    Ok(plan)
}

/// Finds the generator voltage in [v_mp, v_oc] at which the converter output
/// equals `i_o_target` (the regulated-stage operating point). Output is
/// monotone decreasing in generator voltage on that interval.
fn operating_point_for_output(
    cfg: &ControllerConfig,
    array: &PvArrayConfig,
    env: &OperatingEnvironment,
    v_mp: f64,
    v_o: f64,
    i_o_target: f64,
) -> Result<(f64, f64), ControllerError> {
    let i_at = |v_pv: f64| -> Result<f64, ControllerError> {
        let i_pv = pv::iv_current(array, v_pv, env)?;
        buck_output_current(cfg, v_pv, i_pv.max(0.0), v_o, (v_o / v_pv).min(1.0))
    };
    if i_at(v_mp)? <= i_o_target {
        return Ok((v_mp, pv::iv_current(array, v_mp, env)?));
    }
    let v_oc = pv::open_circuit_voltage(array, env)?;
    let (mut lo, mut hi) = (v_mp, v_oc.max(v_mp + 1e-6));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if i_at(mid)? > i_o_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    Ok((v, pv::iv_current(array, v, env)?.max(0.0)))
}

/// Electrical operating point after reconciling the planned PV output with
/// the grid current and battery charge limit.
#[derive(Debug, Clone, Copy)]
pub struct ElectricalPoint {
    pub i_pv: f64,
    pub i_o: f64,
    pub i_bat: f64,
    pub losses: LossBreakdown,
    pub converting: bool,
    pub curtailed: bool,
}

/// Reconciles a [`GssPlan`] with the actual output voltage and grid terminal
/// current: recomputes the converter output at `v_out`, applies the charging
/// current limit by backing off the generator, and attributes the controller
/// self-consumption (to the converter while converting, to the battery while
/// merely awake, nothing at night).
pub fn resolve_electrical(
    cfg: &ControllerConfig,
    plan: &GssPlan,
    battery_present: bool,
    v_out: f64,
    grid_current: f64,
    pv_available: bool,
) -> ElectricalPoint {
    let mut point = ElectricalPoint {
        i_pv: 0.0,
        i_o: 0.0,
        i_bat: 0.0,
        losses: LossBreakdown::default(),
        converting: false,
        curtailed: false,
    };

    let mut duty = 1.0;
    if plan.stage != ChargeStage::Night && !plan.pv_overvoltage && plan.i_pv > 0.0 && v_out > 0.0 {
        duty = (v_out / plan.v_pv).min(1.0);
        point.i_pv = plan.i_pv;
        point.i_o = buck_output_current(cfg, plan.v_pv, plan.i_pv, v_out, duty)
            .unwrap_or(0.0);
        point.converting = point.i_o > 0.0;
    }

    if battery_present {
        point.i_bat = point.i_o - grid_current;
        if point.i_bat > cfg.i_charge_max {
            // Back the generator off until the charge limit is met. If the
            // grid alone exceeds the limit the converter shuts off entirely;
            // the reverse-flow excess is beyond the controller's reach.
            let i_o_target = (cfg.i_charge_max + grid_current).max(0.0);
            point.i_o = i_o_target;
            point.i_pv = if i_o_target > 0.0 {
                pv_current_for_output(cfg, plan.v_pv.max(1.0), v_out, i_o_target)
            } else {
                0.0
            };
            point.converting = point.i_o > 0.0;
            point.i_bat = point.i_o - grid_current;
            point.curtailed = true;
        }
    } else {
        point.i_bat = point.i_o - grid_current;
    }

    if point.converting {
        point.losses = converter_losses(cfg, plan.v_pv, point.i_pv, duty);
    } else {
        point.i_pv = 0.0;
        if pv_available {
            // Awake but not converting: self-consumption is drawn from the
            // battery side. Asleep at night it is negligible.
            point.losses.self_consumption = cfg.loss.p_auto;
            if battery_present && v_out > 0.0 {
                point.i_bat -= cfg.loss.p_auto / v_out;
            }
        }
    }
    point
}

/// Composes one full step of a generation/storage system against a known
/// grid terminal current (positive = flowing from this system into the
/// grid). Returns the updated states and the electrical operating point.
#[allow(clippy::too_many_arguments)]
pub fn gss_step(
    cfg: &ControllerConfig,
    state: &ControllerState,
    battery: Option<(&BatteryParams, &BatteryState)>,
    array: &PvArrayConfig,
    env: &OperatingEnvironment,
    grid_terminal_current: f64,
    node_voltage: f64,
    dt: f64,
) -> Result<GssStepResult, ControllerError> {
    let pv_available = env.irradiance >= NIGHT_IRRADIANCE_FLOOR;
    let v_bat_prev = match battery {
        Some((params, st)) => battery::terminal_voltage(params, st, st.last_current).0,
        None => node_voltage,
    };
    let mut ctrl = step_stage(cfg, state, v_bat_prev, pv_available, dt);
    ctrl = lvd_hysteresis(cfg, &ctrl, v_bat_prev);

    let v_out_guess = if battery.is_some() {
        v_bat_prev.max(1.0)
    } else {
        node_voltage.max(1.0)
    };
    let mut plan = plan_gss_step(
        cfg,
        ctrl.stage,
        array,
        env,
        battery,
        v_out_guess,
        grid_terminal_current,
    )?;

    // Regulated stage that cannot be held falls back to bulk for this step.
    if matches!(plan.stage, ChargeStage::Absorption | ChargeStage::Float) {
        let required = plan.i_bat_setpoint + grid_terminal_current;
        if required > plan.i_o_available + feasibility_margin(plan.i_o_available) {
            ctrl = revert_to_bulk(&ctrl);
            plan = plan_gss_step(
                cfg,
                ctrl.stage,
                array,
                env,
                battery,
                v_out_guess,
                grid_terminal_current,
            )?;
        }
    }

    let point = resolve_electrical(
        cfg,
        &plan,
        battery.is_some(),
        v_out_guess,
        grid_terminal_current,
        pv_available,
    );

    let (v_bat, next_battery) = match battery {
        Some((params, st)) => {
            let (v, _) = battery::terminal_voltage(params, st, point.i_bat);
            let stepped = battery::step_state(params, st, point.i_bat, env.ambient_temp, dt);
            let stepped = battery::apply_self_discharge(params, &stepped, dt);
            (v, Some(stepped))
        }
        None => (node_voltage, None),
    };

    ctrl.duty = if point.converting && plan.v_pv > 0.0 {
        (v_bat.max(1.0) / plan.v_pv).min(1.0)
    } else {
        1.0
    };

    Ok(GssStepResult {
        controller: ctrl,
        battery: next_battery,
        v_bat,
        i_bat: point.i_bat,
        v_pv: plan.v_pv,
        i_pv: point.i_pv,
        i_o: point.i_o,
        losses: point.losses,
        converting: point.converting,
        curtailed: point.curtailed,
        pv_overvoltage: plan.pv_overvoltage,
        load_overcurrent: grid_terminal_current.abs() > cfg.i_load_max,
    })
}
