//! Dynamic lead-acid battery model: region-dependent terminal voltage
//! (saturation/overcharge/charge/transition/discharge/overdischarge/
//! exhaustion), coulomb counting for state of charge and level of energy,
//! charging efficiency, aging through a state-of-health indicator, and
//! self-discharge.
//!
//! All empirical equations are written for a 2 V cell; terminal quantities
//! are scaled by the series cell count. A bank of parallel strings is treated
//! as one equivalent battery: current divides equally among strings and
//! capacities add.

use serde::{Deserialize, Serialize};

const HOURS_PER_DAY: f64 = 24.0;
const SECONDS_PER_HOUR: f64 = 3600.0;
/// Floor applied to SoC (discharge side) and 1-SoC (charge side) where the
/// voltage equations are singular.
const SOC_SINGULARITY_FLOOR: f64 = 1e-4;
/// The overcharge voltage is treated as saturated once it has closed this
/// fraction of the gap to the saturation voltage.
const SATURATION_FRACTION: f64 = 0.99;

/// Empirical constants of the cell voltage/capacity equations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryModelConstants {
    pub c_t_coef: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub a_cap: f64,
    pub b_cap: f64,
    pub v_bodc: f64,
    pub k_bodc: f64,
    pub p1_dc: f64,
    pub p2_dc: f64,
    pub p3_dc: f64,
    pub p4_dc: f64,
    pub p5_dc: f64,
    pub a_cmt: f64,
    pub b_cmt: f64,
    pub v_boc: f64,
    pub k_boc: f64,
    pub p1_c: f64,
    pub p2_c: f64,
    pub p3_c: f64,
    pub p4_c: f64,
    pub p5_c: f64,
    pub a_gas: f64,
    pub b_gas: f64,
    pub alpha_gas: f64,
    pub a_fonsc: f64,
    pub b_fonsc: f64,
    pub alpha_fc: f64,
    pub alpha_rdc: f64,
    pub alpha_rc: f64,
    pub a_tau: f64,
    pub b_tau: f64,
    pub c_tau: f64,
}

impl Default for BatteryModelConstants {
    /// Generic constants fitted across commercial lead-acid batteries.
    fn default() -> Self {
        BatteryModelConstants {
            c_t_coef: 1.67,
            alpha_c: 0.005,
            beta_c: 0.0,
            a_cap: 0.67,
            b_cap: 0.9,
            v_bodc: 2.085,
            k_bodc: 0.12,
            p1_dc: 4.0,
            p2_dc: 1.3,
            p3_dc: 0.27,
            p4_dc: 1.5,
            p5_dc: 0.02,
            a_cmt: 20.73,
            b_cmt: 0.55,
            v_boc: 2.0,
            k_boc: 0.16,
            p1_c: 6.0,
            p2_c: 0.86,
            p3_c: 0.48,
            p4_c: 1.2,
            p5_c: 0.036,
            a_gas: 2.24,
            b_gas: 1.97,
            alpha_gas: 0.002,
            a_fonsc: 2.45,
            b_fonsc: 2.011,
            alpha_fc: 0.002,
            alpha_rdc: 0.007,
            alpha_rc: 0.025,
            a_tau: 17.3,
            b_tau: 852.0,
            c_tau: 1.67,
        }
    }
}

/// Aging coefficients. The working-zone rates are per hour of wall time; the
/// thermal term is disabled by default (no published values).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AgingConstants {
    pub alpha_t: f64,
    pub beta_t: f64,
    pub t_ref: f64,
    /// Rate while confined to the charge/discharge regions, per hour.
    pub eta_wz_nominal: f64,
    /// Rate when overcharge or overdischarge is reached, per hour.
    pub eta_wz_deep: f64,
    /// Rate when saturation or exhaustion is reached, per hour.
    pub eta_wz_extreme: f64,
}

impl Default for AgingConstants {
    fn default() -> Self {
        AgingConstants {
            alpha_t: 0.0,
            beta_t: 0.0,
            t_ref: 10.0,
            eta_wz_nominal: 2.7e-7,
            eta_wz_deep: 5.5e-7,
            eta_wz_extreme: 5.5e-6,
        }
    }
}

/// Battery operating regions, ordered from deepest charge-side stress to
/// deepest discharge-side stress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Saturation,
    Overcharge,
    Charge,
    Transition,
    Discharge,
    Overdischarge,
    Exhaustion,
}

impl Region {
    /// Working-zone aging rate for this region, per hour.
    fn eta_wz(self, aging: &AgingConstants) -> f64 {
        match self {
            Region::Saturation | Region::Exhaustion => aging.eta_wz_extreme,
            Region::Overcharge | Region::Overdischarge => aging.eta_wz_deep,
            Region::Charge | Region::Discharge | Region::Transition => aging.eta_wz_nominal,
        }
    }
}

/// Ratings and model constants of one battery bank. `c_nominal` and `c10`
/// are per parallel string; bank capacity scales with `n_strings_parallel`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Nominal capacity of one string at the `n_rate_hours` discharge rate, Ah.
    pub c_nominal: f64,
    /// Rating regime of `c_nominal`, hours (e.g. 20 for a C/20 rating).
    pub n_rate_hours: f64,
    /// Capacity of one string at the 10 h discharge rate, Ah.
    pub c10: f64,
    /// Rated cell voltage, V (2.0 for lead-acid).
    pub v_n_cell: f64,
    /// Series cell count (12 for a 24 V bank).
    pub n_cells_series: u32,
    pub n_strings_parallel: u32,
    #[serde(default)]
    pub constants: BatteryModelConstants,
    #[serde(default)]
    pub aging: AgingConstants,
    /// Current magnitude below which the charge/discharge transition
    /// interpolation applies, A (bank-level).
    #[serde(default = "default_i_delta")]
    pub i_delta: f64,
}

fn default_i_delta() -> f64 {
    0.05
}

impl BatteryParams {
    /// Bank built from four 12 V / 66 Ah (C/20) marine batteries arranged as
    /// two series pairs in parallel: 24 V, 132 Ah at the 20 h rate. The 10 h
    /// capacity is derived from the rate-dependence of the capacity equation.
    pub fn optima_d27m_bank() -> Self {
        let mut params = BatteryParams {
            c_nominal: 66.0,
            n_rate_hours: 20.0,
            c10: 0.0,
            v_n_cell: 2.0,
            n_cells_series: 12,
            n_strings_parallel: 2,
            constants: BatteryModelConstants::default(),
            aging: AgingConstants::default(),
            i_delta: 0.05,
        };
        params.c10 = params.derive_c10();
        params
    }

    /// Capacity at the 10 h rate implied by the capacity/current relation:
    /// the fixed point where discharging at I for 10 h extracts exactly 10·I
    /// ampere-hours (per string, 25 °C, healthy battery).
    pub fn derive_c10(&self) -> f64 {
        let mut lo = 0.01 * self.c_nominal;
        let mut hi = 10.0 * self.c_nominal;
        for _ in 0..200 {
            let i = 0.5 * (lo + hi) / 10.0;
            let c = self.capacity_per_string(i, 25.0, 1.0);
            if c > 10.0 * i {
                lo = 10.0 * i;
            } else {
                hi = 10.0 * i;
            }
            if hi - lo < 1e-10 * self.c_nominal {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn strings(&self) -> f64 {
        f64::from(self.n_strings_parallel)
    }

    pub fn cells(&self) -> f64 {
        f64::from(self.n_cells_series)
    }

    /// Rated bank voltage, V.
    pub fn v_nominal(&self) -> f64 {
        self.v_n_cell * self.cells()
    }

    /// Nominal discharge current of one string, A.
    pub fn i_nominal_string(&self) -> f64 {
        self.c_nominal / self.n_rate_hours
    }

    /// 10 h rate current of one string, A.
    pub fn i10_string(&self) -> f64 {
        self.c10 / 10.0
    }

    fn capacity_per_string(&self, i_string: f64, temp: f64, soh: f64) -> f64 {
        let k = &self.constants;
        let dt = temp - 25.0;
        let eta_c10 = 0.75 * soh + 0.25;
        self.c_nominal * k.c_t_coef * eta_c10
            / (1.0 + k.a_cap * (i_string.abs() / self.i_nominal_string()).powf(k.b_cap))
            * (1.0 + k.alpha_c * dt + k.beta_c * dt * dt)
    }

    /// Maximum bank capacity: open circuit, 25 °C, healthy battery, Ah.
    pub fn c_n(&self) -> f64 {
        self.strings() * self.c_nominal * self.constants.c_t_coef
    }
}

/// Snapshot of the battery state carried between simulation steps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryState {
    /// State of charge, fraction of the instantaneous capacity.
    pub soc: f64,
    /// Level of energy, fraction of the maximum capacity.
    pub loe: f64,
    /// State of health, 1 = new, 0 = fully damaged.
    pub soh: f64,
    /// Battery temperature, °C (equal to ambient; no thermal model).
    pub temp: f64,
    /// Last applied bank current, A; positive charges the bank.
    pub last_current: f64,
    pub region: Region,
    /// SoC recorded when the charge voltage crossed the gasification voltage.
    pub soc_vg: f64,
    /// Stored charge tracked for self-discharge, Ah (bank-level).
    pub stored_charge: f64,
}

impl BatteryState {
    /// Rest state at the given state of charge, with the level of energy
    /// initialized equal to it (the usual test convention).
    pub fn resting(params: &BatteryParams, soc: f64, temp: f64) -> Self {
        assert!((0.0..=1.0).contains(&soc), "soc must be in [0, 1]");
        BatteryState {
            soc,
            loe: soc,
            soh: 1.0,
            temp,
            last_current: 0.0,
            region: Region::Transition,
            soc_vg: soc,
            stored_charge: soc * params.c_n(),
        }
    }
}

/// Bank capacity at the given bank current, temperature and health, Ah.
pub fn capacity(params: &BatteryParams, i_bat: f64, temp: f64, soh: f64) -> f64 {
    params.strings() * params.capacity_per_string(i_bat / params.strings(), temp, soh)
}

/// Charging efficiency for a charging current `i_bat` > 0 at the given state
/// of charge. Approaches 1 for a deeply discharged battery and 0 at full
/// charge.
pub fn charge_efficiency(params: &BatteryParams, i_bat: f64, soc: f64) -> f64 {
    debug_assert!(i_bat > 0.0);
    let k = &params.constants;
    let ratio = (i_bat / params.strings()) / params.i10_string();
    1.0 - (k.a_cmt / (ratio + k.b_cmt) * (soc - 1.0)).exp()
}

/// Discharge-side cell voltage (also used for overdischarge/exhaustion).
fn discharge_cell_voltage(params: &BatteryParams, soc: f64, i_mag_string: f64, dt_b: f64) -> f64 {
    let k = &params.constants;
    let soc = soc.max(SOC_SINGULARITY_FLOOR);
    (k.v_bodc - k.k_bodc * (1.0 - soc))
        - i_mag_string / params.c10
            * (k.p1_dc / (1.0 + i_mag_string.powf(k.p2_dc))
                + k.p3_dc / soc.powf(k.p4_dc)
                + k.p5_dc)
            * (1.0 - k.alpha_rdc * dt_b)
}

/// Charge-side cell voltage, capped at the gasification voltage beyond which
/// the overcharge expression governs.
fn charge_cell_voltage(params: &BatteryParams, soc: f64, i_mag_string: f64, dt_b: f64) -> f64 {
    let k = &params.constants;
    let headroom = (1.0 - soc).max(SOC_SINGULARITY_FLOOR);
    let raw = (k.v_boc + k.k_boc * soc)
        + i_mag_string / params.c10
            * (k.p1_c / (1.0 + i_mag_string.powf(k.p2_c))
                + k.p3_c / headroom.powf(k.p4_c)
                + k.p5_c)
            * (1.0 - k.alpha_rc * dt_b);
    raw.min(gasification_cell_voltage(params, i_mag_string, dt_b))
}

/// Gasification onset voltage per cell.
fn gasification_cell_voltage(params: &BatteryParams, i_mag_string: f64, dt_b: f64) -> f64 {
    let k = &params.constants;
    (k.a_gas + k.b_gas * (1.0 + i_mag_string / params.c10).ln()) * (1.0 - k.alpha_gas * dt_b)
}

/// Saturation (end-of-charge) voltage per cell.
fn saturation_cell_voltage(params: &BatteryParams, i_mag_string: f64, dt_b: f64) -> f64 {
    let k = &params.constants;
    (k.a_fonsc + k.b_fonsc * (1.0 + i_mag_string / params.c10).ln()) * (1.0 - k.alpha_fc * dt_b)
}

/// Time constant of the overcharge voltage rise, hours.
fn overcharge_tau(params: &BatteryParams, i_mag_string: f64) -> f64 {
    let k = &params.constants;
    k.a_tau / (1.0 + k.b_tau * (i_mag_string / params.c10).powf(k.c_tau))
}

/// Overcharge cell voltage: rises from the gasification voltage toward the
/// saturation voltage with time constant tau. The exponent tracks the charge
/// accumulated past the gasification crossing, anchored so it is exactly
/// zero at the crossing instant (before a crossing has been recorded the
/// anchor is the present stored charge, pinning the voltage to V_g).
/// Returns the voltage and the fraction of the gap already closed (used for
/// saturation classification).
fn overcharge_cell_voltage(
    params: &BatteryParams,
    state: &BatteryState,
    i_mag_string: f64,
    dt_b: f64,
) -> (f64, f64) {
    let v_g = gasification_cell_voltage(params, i_mag_string, dt_b);
    let v_ec = saturation_cell_voltage(params, i_mag_string, dt_b);
    let c_string = params.capacity_per_string(i_mag_string, state.temp, state.soh);
    let q_string = state.stored_charge / params.strings();
    let anchor = if matches!(state.region, Region::Overcharge | Region::Saturation) {
        state.soc_vg
    } else {
        q_string / c_string
    };
    let ah_past_crossing = (q_string - anchor * c_string).max(0.0);
    let tau = overcharge_tau(params, i_mag_string);
    let progress = 1.0 - (-ah_past_crossing / (i_mag_string * tau)).exp();
    (v_g + (v_ec - v_g) * progress, progress)
}

/// Terminal voltage of the bank at the given bank current, with the operating
/// region the point falls in. Positive current charges the bank.
pub fn terminal_voltage(params: &BatteryParams, state: &BatteryState, i_bat: f64) -> (f64, Region) {
    let dt_b = state.temp - 25.0;
    let i_string = i_bat / params.strings();
    let cells = params.cells();

    if i_bat.abs() < params.i_delta {
        // Transition region: linear interpolation between the charge and
        // discharge expressions evaluated at the +/- i_delta endpoints.
        let i_delta_string = params.i_delta / params.strings();
        let v_c = charge_cell_voltage(params, state.soc, i_delta_string, dt_b);
        let v_dc = discharge_cell_voltage(params, state.soc, i_delta_string, dt_b);
        let v_cell =
            (v_c - v_dc) / (2.0 * params.i_delta) * i_bat + 0.5 * (v_c + v_dc);
        return (v_cell * cells, Region::Transition);
    }

    if i_bat > 0.0 {
        let i_mag = i_string;
        let v_c = charge_cell_voltage(params, state.soc, i_mag, dt_b);
        let v_g = gasification_cell_voltage(params, i_mag, dt_b);
        if v_c < v_g {
            (v_c * cells, Region::Charge)
        } else {
            let (v_sc, progress) = overcharge_cell_voltage(params, state, i_mag, dt_b);
            let region = if progress >= SATURATION_FRACTION {
                Region::Saturation
            } else {
                Region::Overcharge
            };
            (v_sc * cells, region)
        }
    } else {
        let i_mag = -i_string;
        let v_cell = discharge_cell_voltage(params, state.soc, i_mag, dt_b);
        let v_bank = v_cell * cells;
        let v_n = params.v_nominal();
        let region = if state.soc <= SOC_SINGULARITY_FLOOR || v_bank < 0.7 * v_n {
            Region::Exhaustion
        } else if v_bank <= 0.9 * v_n {
            Region::Overdischarge
        } else {
            Region::Discharge
        };
        (v_bank, region)
    }
}

/// Advances the battery state by `dt_s` seconds at constant bank current
/// `i_bat` and ambient temperature `temp`. Self-discharge is applied
/// separately (see [`apply_self_discharge`]).
pub fn step_state(
    params: &BatteryParams,
    state: &BatteryState,
    i_bat: f64,
    temp: f64,
    dt_s: f64,
) -> BatteryState {
    assert!(dt_s > 0.0, "dt must be positive");
    let dt_h = dt_s / SECONDS_PER_HOUR;
    let mut next = state.clone();
    next.temp = temp;
    next.last_current = i_bat;

    let (_, region) = terminal_voltage(params, state, i_bat);
    // Capture the SoC at the charge -> overcharge crossing; reset on any
    // fresh entry into the gassing regions.
    if matches!(region, Region::Overcharge | Region::Saturation)
        && !matches!(state.region, Region::Overcharge | Region::Saturation)
    {
        next.soc_vg = state.soc;
    }
    next.region = region;

    let eta_ch = if i_bat > 0.0 {
        charge_efficiency(params, i_bat, state.soc)
    } else {
        1.0
    };
    let c_bank = capacity(params, i_bat, temp, state.soh);
    next.soc = (state.soc + eta_ch * i_bat * dt_h / c_bank).clamp(0.0, 1.0);
    next.loe = (state.loe + eta_ch * i_bat * dt_h / params.c_n()).clamp(0.0, 1.0);

    let eta_t = params.aging.alpha_t * (temp - params.aging.t_ref).abs() + params.aging.beta_t;
    next.soh = (state.soh - (eta_t + region.eta_wz(&params.aging)) * dt_h).max(0.0);

    next.stored_charge = next.loe * params.c_n();
    next
}

/// Self-discharge current implied by the stored charge and health, A.
pub fn self_discharge_current(_params: &BatteryParams, state: &BatteryState) -> f64 {
    let eta_q = 0.01 - 0.009 * state.soh;
    eta_q * state.stored_charge / HOURS_PER_DAY
}

/// Applies the self-discharge drift over `dt_s` seconds.
pub fn apply_self_discharge(
    params: &BatteryParams,
    state: &BatteryState,
    dt_s: f64,
) -> BatteryState {
    assert!(dt_s > 0.0, "dt must be positive");
    let dt_h = dt_s / SECONDS_PER_HOUR;
    let i_adc = self_discharge_current(params, state);
    let mut next = state.clone();
    let c_bank = capacity(params, 0.0, state.temp, state.soh);
    next.soc = (state.soc - i_adc * dt_h / c_bank).clamp(0.0, 1.0);
    next.loe = (state.loe - i_adc * dt_h / params.c_n()).clamp(0.0, 1.0);
    next.stored_charge = next.loe * params.c_n();
    next
}

/// Bank current that produces the requested terminal voltage, by bisection.
/// The terminal voltage is nondecreasing in current, so the root is unique.
/// Returns `None` when the target is outside the reachable range.
pub fn current_for_voltage(
    params: &BatteryParams,
    state: &BatteryState,
    v_target: f64,
    i_min: f64,
    i_max: f64,
    tol_a: f64,
) -> Option<f64> {
    let v_lo = terminal_voltage(params, state, i_min).0;
    let v_hi = terminal_voltage(params, state, i_max).0;
    if v_target < v_lo || v_target > v_hi {
        return None;
    }
    let (mut lo, mut hi) = (i_min, i_max);
    while hi - lo > tol_a {
        let mid = 0.5 * (lo + hi);
        if terminal_voltage(params, state, mid).0 < v_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
