// scratch: reproduce one non-converging step and print battery details
use std::path::Path;
use nanogrid::battery;

fn main() {
    let mut scenario = nanogrid::Scenario::load(Path::new("assets/dcdn-day.scenario")).unwrap();
    scenario.end = scenario.start + chrono::Duration::hours(9);
    let mut state = nanogrid::sim::WorldState::initial(&scenario);
    let n = ((scenario.end - scenario.start).num_seconds()) as usize;
    for k in 0..n {
        let t = scenario.start + chrono::Duration::seconds(k as i64);
        let (next, trace, _events) = nanogrid::sim::step(&scenario, &state, t).unwrap();
        if !trace.inner_converged && k > 30000 {
            println!("step {k} ({t}) NOT converged");
            for (g, gt) in trace.gss.iter().enumerate() {
                let gss = &scenario.gss[g];
                let bstate = state.batteries[g].as_ref().unwrap();
                let (v_model, region) = battery::terminal_voltage(
                    &gss.battery.as_ref().unwrap().0, bstate, gt.i_bat);
                println!(
                    "  gss{}: stage={:?} v_bat={:.3} i_bat={:.3} i_o={:.3} i_grid={:.3} soc={:.4} model_v={:.3} {:?}",
                    g + 1, gt.stage, gt.v_bat, gt.i_bat, gt.i_o,
                    next.grid_currents[g], bstate.soc, v_model, region
                );
            }
            if k > 30620 { break; }
        }
        state = next;
    }
}
