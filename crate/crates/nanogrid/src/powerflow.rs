//! DC load flow: Newton-Raphson solution for networks of voltage sources
//! with constant-power or constant-resistance loads, the direct linear solve
//! used by the time-domain engine, and the outer loop coupling source
//! voltages to the battery model.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::battery::{self, BatteryParams, BatteryState};
use crate::network::{Network, NetworkError};

/// Power mismatch threshold, W.
pub const MISMATCH_TOL_W: f64 = 1e-6;
/// Newton iteration cap.
pub const MAX_ITERATIONS: usize = 50;
/// Relative source-current change at which the battery outer loop stops.
pub const COUPLING_TOL: f64 = 1e-3;
/// Outer loop iteration cap.
pub const COUPLING_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("no source bus in flow problem")]
    NoSource,
    #[error("bus '{0}' has both a source voltage and a load spec")]
    ConflictingSpec(String),
    #[error("singular Jacobian at iteration {0} (isolated load bus?)")]
    SingularJacobian(usize),
    #[error("did not converge in {0} iterations (max mismatch {1:.3e} W)")]
    NotConverged(usize, f64),
    #[error("battery coupling loop did not converge in {0} iterations")]
    CouplingNotConverged(usize),
    #[error("singular network system (no voltage reference?)")]
    SingularSystem,
}

/// Load model at one bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadSpec {
    /// Constant power drawn from the bus, W.
    ConstantPower(f64),
    /// Constant resistance to the return conductor, ohm.
    ConstantResistance(f64),
}

#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub source_voltages: BTreeMap<String, f64>,
    pub loads: BTreeMap<String, LoadSpec>,
    pub conductor_temp: f64,
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub voltages: BTreeMap<String, f64>,
    /// Current per branch, keyed "from->to", positive from -> to.
    pub branch_currents: BTreeMap<String, f64>,
    /// Net power injected into the grid at each bus, W.
    pub bus_injections: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FlowSolution {
    /// Net current injected into the grid at a bus, A.
    pub fn injection_current(&self, bus: &str) -> Option<f64> {
        let v = self.voltages.get(bus)?;
        let p = self.bus_injections.get(bus)?;
        if *v == 0.0 {
            return Some(0.0);
        }
        Some(p / v)
    }

    /// Largest KCL current residual over the given buses, A.
    pub fn kcl_residual(&self, buses: &[&str]) -> f64 {
        let mut worst: f64 = 0.0;
        for &bus in buses {
            let p = self.bus_injections[bus];
            let v = self.voltages[bus];
            let i = if v != 0.0 { p / v } else { 0.0 };
            worst = worst.max(i.abs());
        }
        worst
    }
}

fn solution_from_voltages(
    network: &Network,
    g: &DMatrix<f64>,
    v: &DVector<f64>,
    temp: f64,
    iterations: usize,
    converged: bool,
) -> FlowSolution {
    let mut voltages = BTreeMap::new();
    for (k, bus) in network.buses.iter().enumerate() {
        voltages.insert(bus.id.clone(), v[k]);
    }
    let mut branch_currents = BTreeMap::new();
    let resistances = network.branch_resistances(temp);
    for (br, r) in network.branches.iter().zip(&resistances) {
        let a = voltages[&br.from];
        let b = voltages[&br.to];
        branch_currents.insert(format!("{}->{}", br.from, br.to), (a - b) / r);
    }
    let gv = g * v;
    let mut bus_injections = BTreeMap::new();
    for (k, bus) in network.buses.iter().enumerate() {
        bus_injections.insert(bus.id.clone(), v[k] * gv[k]);
    }
    FlowSolution {
        voltages,
        branch_currents,
        bus_injections,
        iterations,
        converged,
    }
}

/// Newton-Raphson DC load flow. Source buses hold their stated voltages; all
/// other buses iterate on the power mismatch from a flat start at the mean
/// source voltage, with step halving when the mismatch grows.
pub fn newton_raphson_flow(
    problem: &FlowProblem,
    network: &Network,
) -> Result<FlowSolution, FlowError> {
    let g = network.conductance_matrix(problem.conductor_temp)?;
    let n = network.n_buses();
    if problem.source_voltages.is_empty() {
        return Err(FlowError::NoSource);
    }
    for bus in problem.source_voltages.keys() {
        if problem.loads.contains_key(bus) {
            return Err(FlowError::ConflictingSpec(bus.clone()));
        }
        network.bus_index(bus)?;
    }
    for bus in problem.loads.keys() {
        network.bus_index(bus)?;
    }

    let mut v = DVector::zeros(n);
    let flat = problem.source_voltages.values().sum::<f64>()
        / problem.source_voltages.len() as f64;
    let mut unknown = Vec::new();
    for (k, bus) in network.buses.iter().enumerate() {
        match problem.source_voltages.get(&bus.id) {
            Some(&vs) => v[k] = vs,
            None => {
                v[k] = flat;
                unknown.push(k);
            }
        }
    }
    let load_at = |k: usize| problem.loads.get(&network.buses[k].id);

    let mismatch = |v: &DVector<f64>| -> DVector<f64> {
        let gv = &g * v;
        DVector::from_iterator(
            unknown.len(),
            unknown.iter().map(|&k| {
                let p_calc = v[k] * gv[k];
                match load_at(k) {
                    Some(LoadSpec::ConstantPower(p)) => p_calc + p,
                    Some(LoadSpec::ConstantResistance(r)) => p_calc + v[k] * v[k] / r,
                    None => p_calc,
                }
            }),
        )
    };

    let mut dp = mismatch(&v);
    for iter in 0..MAX_ITERATIONS {
        let worst = dp.amax();
        if worst < MISMATCH_TOL_W {
            return Ok(solution_from_voltages(
                network,
                &g,
                &v,
                problem.conductor_temp,
                iter,
                true,
            ));
        }
        // Jacobian of the mismatch w.r.t. the unknown voltages.
        let gv = &g * &v;
        let mut jac = DMatrix::zeros(unknown.len(), unknown.len());
        for (row, &r) in unknown.iter().enumerate() {
            for (col, &s) in unknown.iter().enumerate() {
                jac[(row, col)] = if r == s {
                    let mut d = gv[r] + g[(r, r)] * v[r];
                    if let Some(LoadSpec::ConstantResistance(res)) = load_at(r) {
                        d += 2.0 * v[r] / res;
                    }
                    d
                } else {
                    v[r] * g[(r, s)]
                };
            }
        }
        let lu = jac.lu();
        let dv = lu.solve(&dp).ok_or(FlowError::SingularJacobian(iter))?;

        // Damped update: halve the step while the mismatch gets worse.
        let mut damping = 1.0;
        loop {
            let mut v_try = v.clone();
            for (row, &k) in unknown.iter().enumerate() {
                v_try[k] -= damping * dv[row];
            }
            let dp_try = mismatch(&v_try);
            if dp_try.amax() <= worst || damping < 1.0 / 64.0 {
                v = v_try;
                dp = dp_try;
                break;
            }
            damping *= 0.5;
        }
    }
    let worst = dp.amax();
    if worst < MISMATCH_TOL_W {
        Ok(solution_from_voltages(
            network,
            &g,
            &v,
            problem.conductor_temp,
            MAX_ITERATIONS,
            true,
        ))
    } else {
        Err(FlowError::NotConverged(MAX_ITERATIONS, worst))
    }
}

/// Analytic Jacobian of the power mismatch at a voltage point, exposed for
/// finite-difference verification.
pub fn mismatch_jacobian(
    problem: &FlowProblem,
    network: &Network,
    voltages: &BTreeMap<String, f64>,
) -> Result<DMatrix<f64>, FlowError> {
    let g = network.conductance_matrix(problem.conductor_temp)?;
    let n = network.n_buses();
    let mut v = DVector::zeros(n);
    let mut unknown = Vec::new();
    for (k, bus) in network.buses.iter().enumerate() {
        v[k] = voltages[&bus.id];
        if !problem.source_voltages.contains_key(&bus.id) {
            unknown.push(k);
        }
    }
    let gv = &g * &v;
    let mut jac = DMatrix::zeros(unknown.len(), unknown.len());
    for (row, &r) in unknown.iter().enumerate() {
        for (col, &s) in unknown.iter().enumerate() {
            jac[(row, col)] = if r == s {
                let mut d = gv[r] + g[(r, r)] * v[r];
                if let Some(LoadSpec::ConstantResistance(res)) =
                    problem.loads.get(&network.buses[r].id)
                {
                    d += 2.0 * v[r] / res;
                }
                d
            } else {
                v[r] * g[(r, s)]
            };
        }
    }
    Ok(jac)
}

/// Power mismatch vector at a voltage point (unknown buses only, in bus
/// declaration order), exposed for finite-difference verification.
pub fn mismatch_vector(
    problem: &FlowProblem,
    network: &Network,
    voltages: &BTreeMap<String, f64>,
) -> Result<Vec<f64>, FlowError> {
    let g = network.conductance_matrix(problem.conductor_temp)?;
    let n = network.n_buses();
    let mut v = DVector::zeros(n);
    for (k, bus) in network.buses.iter().enumerate() {
        v[k] = voltages[&bus.id];
    }
    let gv = &g * &v;
    let mut out = Vec::new();
    for (k, bus) in network.buses.iter().enumerate() {
        if problem.source_voltages.contains_key(&bus.id) {
            continue;
        }
        let p_calc = v[k] * gv[k];
        out.push(match problem.loads.get(&bus.id) {
            Some(LoadSpec::ConstantPower(p)) => p_calc + p,
            Some(LoadSpec::ConstantResistance(r)) => p_calc + v[k] * v[k] / r,
            None => p_calc,
        });
    }
    Ok(out)
}

/// Direct solve of the linear network used by the time-domain engine: fixed
/// voltages at source buses, conductance loads, and optional current
/// injections (positive into the bus). Exact for constant-impedance grids.
pub fn solve_linear_network(
    network: &Network,
    temp: f64,
    source_voltages: &BTreeMap<String, f64>,
    load_conductances: &BTreeMap<String, f64>,
    current_injections: &BTreeMap<String, f64>,
) -> Result<FlowSolution, FlowError> {
    let g = network.conductance_matrix(temp)?;
    let n = network.n_buses();
    let mut v = DVector::zeros(n);

    // With no pinned sources and no injections the grid is de-energized;
    // with injections but no shunt anywhere the system is singular and the
    // grid likewise cannot take the current.
    if source_voltages.is_empty() {
        let has_injection = current_injections.values().any(|i| *i != 0.0);
        let has_shunt = load_conductances.values().any(|g| *g > 0.0);
        if !has_injection || !has_shunt {
            return Ok(solution_from_voltages(network, &g, &v, temp, 0, true));
        }
    }

    let mut unknown = Vec::new();
    for (k, bus) in network.buses.iter().enumerate() {
        match source_voltages.get(&bus.id) {
            Some(&vs) => v[k] = vs,
            None => unknown.push(k),
        }
    }
    let m = unknown.len();
    if m > 0 {
        let mut a = DMatrix::zeros(m, m);
        let mut rhs = DVector::zeros(m);
        for (row, &r) in unknown.iter().enumerate() {
            let bus = &network.buses[r];
            let g_load = load_conductances.get(&bus.id).copied().unwrap_or(0.0);
            let inj = current_injections.get(&bus.id).copied().unwrap_or(0.0);
            rhs[row] = inj;
            for c in 0..n {
                if let Some(col) = unknown.iter().position(|&u| u == c) {
                    a[(row, col)] = g[(r, c)];
                } else {
                    rhs[row] -= g[(r, c)] * v[c];
                }
            }
            a[(row, row)] += g_load;
        }
        let lu = a.lu();
        let x = lu.solve(&rhs).ok_or(FlowError::SingularSystem)?;
        for (row, &k) in unknown.iter().enumerate() {
            v[k] = x[row];
        }
    }
    Ok(solution_from_voltages(network, &g, &v, temp, 1, true))
}

/// Outer loop coupling the static flow to the battery voltage model: source
/// voltages follow the battery terminal equation at the currents drawn in
/// the previous flow, iterated until every source current settles.
pub fn coupled_flow_with_batteries(
    network: &Network,
    batteries: &BTreeMap<String, (BatteryParams, BatteryState)>,
    loads: &BTreeMap<String, LoadSpec>,
    conductor_temp: f64,
) -> Result<(FlowSolution, BTreeMap<String, f64>, BTreeMap<String, f64>), FlowError> {
    if batteries.is_empty() {
        return Err(FlowError::NoSource);
    }
    // Initial guess: total load power split equally among sources at the
    // nominal bank voltage.
    let v_nom = batteries
        .values()
        .map(|(p, _)| p.v_nominal())
        .sum::<f64>()
        / batteries.len() as f64;
    let total_power: f64 = loads
        .values()
        .map(|spec| match spec {
            LoadSpec::ConstantPower(p) => *p,
            LoadSpec::ConstantResistance(r) => v_nom * v_nom / r,
        })
        .sum();
    let i_guess = total_power / batteries.len() as f64 / v_nom;
    let mut currents: BTreeMap<String, f64> = batteries
        .keys()
        .map(|bus| (bus.clone(), -i_guess))
        .collect();

    // The raw alternation between battery voltages and flow currents has a
    // loop gain of (battery internal resistance)/(network resistance) and
    // oscillates when the grid is stiff, so the current update is
    // under-relaxed, halving the factor whenever the residual grows.
    let mut relaxation = 1.0_f64;
    let mut prev_residual = f64::INFINITY;

    for _ in 0..COUPLING_MAX_ITERATIONS {
        let mut source_voltages = BTreeMap::new();
        for (bus, (params, state)) in batteries {
            let (v, _) = battery::terminal_voltage(params, state, currents[bus]);
            source_voltages.insert(bus.clone(), v);
        }
        let problem = FlowProblem {
            source_voltages: source_voltages.clone(),
            loads: loads.clone(),
            conductor_temp,
        };
        let solution = newton_raphson_flow(&problem, network)?;

        // Battery current is the negative of the grid injection.
        let mut residual: f64 = 0.0;
        let mut targets = BTreeMap::new();
        for bus in batteries.keys() {
            let i_target = -solution.injection_current(bus).unwrap_or(0.0);
            let i_old = currents[bus];
            residual = residual.max((i_target - i_old).abs() / i_old.abs().max(1e-9));
            targets.insert(bus.clone(), i_target);
        }
        if residual < COUPLING_TOL {
            let voltages = batteries
                .iter()
                .map(|(bus, (params, state))| {
                    let (v, _) = battery::terminal_voltage(params, state, currents[bus]);
                    (bus.clone(), v)
                })
                .collect();
            return Ok((solution, voltages, currents));
        }
        if residual > prev_residual {
            relaxation = (relaxation * 0.5).max(1.0 / 1024.0);
        }
        prev_residual = residual;
        for (bus, i_target) in targets {
            let i_old = currents[&bus];
            currents.insert(bus, i_old + relaxation * (i_target - i_old));
        }
    }
    Err(FlowError::CouplingNotConverged(COUPLING_MAX_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::{BatteryModelConstants, AgingConstants};
    use crate::network::{Branch, Bus, BusKind, Conductor};
    use approx::assert_relative_eq;

    fn chain3(r_ohm: f64) -> Network {
        // Branch lengths chosen so each branch is exactly r_ohm at 20 °C.
        let length = r_ohm / 2.0 / 0.8037 * 1000.0;
        Network {
            buses: vec![
                Bus {
                    id: "1".into(),
                    kind: BusKind::Source,
                },
                Bus {
                    id: "2".into(),
                    kind: BusKind::Load,
                },
                Bus {
                    id: "3".into(),
                    kind: BusKind::Load,
                },
            ],
            branches: vec![
                Branch {
                    from: "1".into(),
                    to: "2".into(),
                    length_m: length,
                },
                Branch {
                    from: "2".into(),
                    to: "3".into(),
                    length_m: length,
                },
            ],
            conductor: Conductor::default(),
            attachments: Default::default(),
        }
    }

    #[test]
    fn zero_load_flow_is_flat() {
        let net = chain3(0.1);
        let problem = FlowProblem {
            source_voltages: BTreeMap::from([("1".to_string(), 24.0)]),
            loads: BTreeMap::new(),
            conductor_temp: 20.0,
        };
        let sol = newton_raphson_flow(&problem, &net).unwrap();
        assert!(sol.converged);
        for v in sol.voltages.values() {
            assert_relative_eq!(*v, 24.0, epsilon = 1e-9);
        }
        for i in sol.branch_currents.values() {
            assert!(i.abs() < 1e-9);
        }
    }

    #[test]
    fn constant_resistance_chain_matches_linear_solve() {
        let net = chain3(0.1);
        let problem = FlowProblem {
            source_voltages: BTreeMap::from([("1".to_string(), 24.0)]),
            loads: BTreeMap::from([
                ("2".to_string(), LoadSpec::ConstantResistance(14.4)),
                ("3".to_string(), LoadSpec::ConstantResistance(14.4)),
            ]),
            conductor_temp: 20.0,
        };
        let sol = newton_raphson_flow(&problem, &net).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 5, "iterations = {}", sol.iterations);

        let lin = solve_linear_network(
            &net,
            20.0,
            &BTreeMap::from([("1".to_string(), 24.0)]),
            &BTreeMap::from([
                ("2".to_string(), 1.0 / 14.4),
                ("3".to_string(), 1.0 / 14.4),
            ]),
            &BTreeMap::new(),
        )
        .unwrap();
        for bus in ["1", "2", "3"] {
            assert_relative_eq!(
                sol.voltages[bus],
                lin.voltages[bus],
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn constant_power_flow_satisfies_kcl() {
        let net = chain3(0.1);
        let problem = FlowProblem {
            source_voltages: BTreeMap::from([("1".to_string(), 24.0)]),
            loads: BTreeMap::from([
                ("2".to_string(), LoadSpec::ConstantPower(40.0)),
                ("3".to_string(), LoadSpec::ConstantPower(40.0)),
            ]),
            conductor_temp: 20.0,
        };
        let sol = newton_raphson_flow(&problem, &net).unwrap();
        assert!(sol.converged);
        // At each load bus the injected power must equal the drawn power.
        for bus in ["2", "3"] {
            assert!(
                (sol.bus_injections[bus] + 40.0).abs() < 1e-6,
                "P({bus}) = {}",
                sol.bus_injections[bus]
            );
        }
    }

    #[test]
    fn ring_survives_single_branch_removal() {
        let mut net = Network::dcdn_12bus();
        net.branches.remove(1); // one ring segment
        let problem = FlowProblem {
            source_voltages: BTreeMap::from([
                ("N1".to_string(), 25.0),
                ("N6".to_string(), 25.0),
                ("N7".to_string(), 25.0),
            ]),
            loads: BTreeMap::from([
                ("N2".to_string(), LoadSpec::ConstantResistance(14.4 / 4.0)),
                ("N3".to_string(), LoadSpec::ConstantResistance(14.4 / 4.0)),
                ("N11".to_string(), LoadSpec::ConstantResistance(14.4 / 3.0)),
            ]),
            conductor_temp: 30.0,
        };
        let sol = newton_raphson_flow(&problem, &net).unwrap();
        assert!(sol.converged);
        for bus in ["N2", "N3", "N11"] {
            assert!(sol.voltages[bus] > 21.0, "V({bus}) = {}", sol.voltages[bus]);
        }
    }

    #[test]
    fn isolated_load_bus_reported_as_error() {
        let mut net = chain3(0.1);
        net.branches.pop();
        let problem = FlowProblem {
            source_voltages: BTreeMap::from([("1".to_string(), 24.0)]),
            loads: BTreeMap::from([("3".to_string(), LoadSpec::ConstantPower(40.0))]),
            conductor_temp: 20.0,
        };
        assert!(newton_raphson_flow(&problem, &net).is_err());
    }

    fn single_string_battery() -> (BatteryParams, BatteryState) {
        let mut p = BatteryParams {
            c_nominal: 100.0,
            n_rate_hours: 20.0,
            c10: 0.0,
            v_n_cell: 2.0,
            n_cells_series: 12,
            n_strings_parallel: 1,
            constants: BatteryModelConstants::default(),
            aging: AgingConstants::default(),
            i_delta: 0.05,
        };
        p.c10 = p.derive_c10();
        let s = BatteryState::resting(&p, 0.8, 25.0);
        (p, s)
    }

    #[test]
    fn coupled_flow_satisfies_both_models() {
        let net = chain3(0.05);
        let (params, state) = single_string_battery();
        let batteries = BTreeMap::from([("1".to_string(), (params.clone(), state.clone()))]);
        let loads = BTreeMap::from([("3".to_string(), LoadSpec::ConstantResistance(14.4))]);
        let (sol, voltages, currents) =
            coupled_flow_with_batteries(&net, &batteries, &loads, 20.0).unwrap();
        let v_src = voltages["1"];
        let i_bat = currents["1"];
        // Battery equation holds at the converged current.
        let (v_model, _) = battery::terminal_voltage(&params, &state, i_bat);
        assert_relative_eq!(v_src, v_model, epsilon = 1e-9);
        // Circuit equations hold: injection current matches -i_bat within
        // the 0.1% loop tolerance.
        let i_inj = sol.injection_current("1").unwrap();
        assert_relative_eq!(-i_bat, i_inj, max_relative = 2e-3);
        assert!(i_bat < 0.0, "battery must be discharging");
    }

    #[test]
    fn symmetric_sources_share_current_equally() {
        // Symmetric H network: two identical sources, one central load.
        let mk = |id: &str, kind| Bus {
            id: id.into(),
            kind,
        };
        let net = Network {
            buses: vec![
                mk("s1", BusKind::Source),
                mk("mid", BusKind::Load),
                mk("s2", BusKind::Source),
            ],
            branches: vec![
                Branch {
                    from: "s1".into(),
                    to: "mid".into(),
                    length_m: 20.0,
                },
                Branch {
                    from: "s2".into(),
                    to: "mid".into(),
                    length_m: 20.0,
                },
            ],
            conductor: Conductor::default(),
            attachments: Default::default(),
        };
        let (params, state) = single_string_battery();
        let batteries = BTreeMap::from([
            ("s1".to_string(), (params.clone(), state.clone())),
            ("s2".to_string(), (params, state)),
        ]);
        let loads = BTreeMap::from([("mid".to_string(), LoadSpec::ConstantResistance(2.88))]);
        let (_, _, currents) = coupled_flow_with_batteries(&net, &batteries, &loads, 20.0).unwrap();
        assert_relative_eq!(currents["s1"], currents["s2"], epsilon = 1e-9);
    }

    #[test]
    fn higher_soc_battery_supplies_more() {
        let mk = |id: &str, kind| Bus {
            id: id.into(),
            kind,
        };
        let net = Network {
            buses: vec![
                mk("s1", BusKind::Source),
                mk("s2", BusKind::Source),
                mk("s3", BusKind::Source),
                mk("mid", BusKind::Load),
            ],
            branches: vec![
                Branch {
                    from: "s1".into(),
                    to: "mid".into(),
                    length_m: 20.0,
                },
                Branch {
                    from: "s2".into(),
                    to: "mid".into(),
                    length_m: 20.0,
                },
                Branch {
                    from: "s3".into(),
                    to: "mid".into(),
                    length_m: 20.0,
                },
            ],
            conductor: Conductor::default(),
            attachments: Default::default(),
        };
        let (params, _) = single_string_battery();
        let batteries = BTreeMap::from([
            (
                "s1".to_string(),
                (params.clone(), BatteryState::resting(&params, 0.5, 25.0)),
            ),
            (
                "s2".to_string(),
                (params.clone(), BatteryState::resting(&params, 0.9, 25.0)),
            ),
            (
                "s3".to_string(),
                (params.clone(), BatteryState::resting(&params, 0.7, 25.0)),
            ),
        ]);
        let loads = BTreeMap::from([("mid".to_string(), LoadSpec::ConstantResistance(2.88))]);
        let (_, _, currents) = coupled_flow_with_batteries(&net, &batteries, &loads, 20.0).unwrap();
        // All discharging; the highest-SoC bank supplies the largest current.
        let supply =
            |bus: &str| -currents[bus];
        assert!(supply("s2") > supply("s3"));
        assert!(supply("s3") > supply("s1"));
    }
}
