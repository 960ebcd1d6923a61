//! Off-grid sizing formulas: corrected consumption, days of autonomy from
//! the worst-month solar resource, battery bank capacity and PV rated power;
//! plus the AC-to-DC consumption conversion and the irradiance-from-reference-
//! module relation.

use serde::{Deserialize, Serialize};

/// Inputs of the sizing calculation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizingInput {
    /// Daily DC consumption, kWh.
    pub daily_dc_load_kwh: f64,
    /// Battery charge/discharge round-trip efficiency.
    pub charge_discharge_eff: f64,
    /// Equivalent full-sun hours of the worst month, kWh/m²/day.
    pub hsp_min: f64,
    /// Maximum allowed depth of discharge.
    pub max_depth_of_discharge: f64,
    /// Generation safety factor (temperature, dirt, wiring losses).
    pub safety_factor: f64,
    /// Rated bank voltage, V.
    pub bank_voltage: f64,
}

impl Default for SizingInput {
    fn default() -> Self {
        SizingInput {
            daily_dc_load_kwh: 1.63,
            charge_discharge_eff: 0.86,
            hsp_min: 4.2,
            max_depth_of_discharge: 0.8,
            safety_factor: 1.25,
            bank_voltage: 24.0,
        }
    }
}

impl SizingInput {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("daily_dc_load_kwh", self.daily_dc_load_kwh),
            ("hsp_min", self.hsp_min),
            ("safety_factor", self.safety_factor),
            ("bank_voltage", self.bank_voltage),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("charge_discharge_eff", self.charge_discharge_eff),
            ("max_depth_of_discharge", self.max_depth_of_discharge),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} must be in (0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SizingResult {
    pub corrected_load_kwh: f64,
    pub autonomy_days: f64,
    pub bank_capacity_wh: f64,
    pub bank_capacity_ah: f64,
    pub pv_rated_wp: f64,
    /// Set when the autonomy formula returned a non-positive value and was
    /// clamped to the floor.
    pub autonomy_clamped: bool,
}

/// Minimum autonomy applied when the empirical formula goes non-positive.
pub const MIN_AUTONOMY_DAYS: f64 = 1.0;

/// Applies the four sizing formulas in order: corrected load, days of
/// autonomy, bank capacity and PV rated power.
pub fn size_system(input: &SizingInput) -> SizingResult {
    let corrected = input.daily_dc_load_kwh / input.charge_discharge_eff;
    let raw_autonomy = -0.48 * input.hsp_min + 4.58;
    let autonomy_clamped = raw_autonomy < MIN_AUTONOMY_DAYS;
    let autonomy = raw_autonomy.max(MIN_AUTONOMY_DAYS);
    if autonomy_clamped {
        log::warn!(
            "autonomy formula returned {raw_autonomy:.2} days for hsp = {}; clamped to {MIN_AUTONOMY_DAYS}",
            input.hsp_min
        );
    }
    let bank_wh = corrected * autonomy / input.max_depth_of_discharge * 1000.0;
    let bank_ah = bank_wh / input.bank_voltage;
    let pv_wp = input.safety_factor * corrected * 1000.0 / input.hsp_min;
    SizingResult {
        corrected_load_kwh: corrected,
        autonomy_days: autonomy,
        bank_capacity_wh: bank_wh,
        bank_capacity_ah: bank_ah,
        pv_rated_wp: pv_wp,
        autonomy_clamped,
    }
}

/// Equipment class for the AC-to-DC consumption conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcLoadKind {
    /// Rectifier + DC regulator front end (TVs, computers, chargers, LEDs).
    Electronic,
    /// Direct AC motor loads (refrigerators, conventional air conditioners).
    Motor,
    /// Inverter-driven air conditioner (rectifier + inverter stages).
    InverterAc,
}

/// Default rectifier efficiency (ideal full-bridge).
pub const ETA_RECTIFIER: f64 = 0.812;
/// Default DC regulator efficiency.
pub const ETA_DC_DC: f64 = 0.98;
/// Default inverter efficiency.
pub const ETA_INVERTER: f64 = 0.98;

/// Equivalent DC consumption of an AC appliance: electronic and inverter
/// loads shed their conversion front end, motor loads gain an inverter.
pub fn dc_equivalent_consumption(
    e_ac_kwh: f64,
    kind: AcLoadKind,
    eta_rect: f64,
    eta_dcdc: f64,
    eta_inv: f64,
) -> f64 {
    assert!(e_ac_kwh >= 0.0);
    match kind {
        AcLoadKind::Electronic | AcLoadKind::InverterAc => e_ac_kwh * eta_dcdc * eta_rect,
        AcLoadKind::Motor => e_ac_kwh / eta_inv,
    }
}

/// Irradiance implied by a reference module's short-circuit current, scaled
/// linearly to the 1000 W/m² calibration point.
pub fn irradiance_from_isc(i_sc_measured: f64, i_sc_stc_ref: f64) -> f64 {
    assert!(i_sc_stc_ref > 0.0, "reference current must be positive");
    1000.0 * i_sc_measured / i_sc_stc_ref
}
