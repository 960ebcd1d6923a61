// scratch: inspect the first engine steps
use std::path::Path;

fn main() {
    let mut scenario = nanogrid::Scenario::load(Path::new("assets/dcdn-day.scenario")).unwrap();
    scenario.end = scenario.start + chrono::Duration::seconds(3);
    let mut state = nanogrid::sim::WorldState::initial(&scenario);
    println!("init node_voltages = {:?}", state.node_voltages);
    println!("init grid_currents = {:?}", state.grid_currents);
    for k in 0..3 {
        let t = scenario.start + chrono::Duration::seconds(k);
        let (next, trace, events) = nanogrid::sim::step(&scenario, &state, t).unwrap();
        for (g, gt) in trace.gss.iter().enumerate() {
            println!(
                "t+{k} gss{}: v_bat={:.4} i_bat={:.4} i_o={:.4} stage={:?} conn={} conv_ok={}",
                g + 1, gt.v_bat, gt.i_bat, gt.i_o, gt.stage, gt.load_connected, trace.inner_converged
            );
        }
        println!("   grid_currents -> {:?}", next.grid_currents);
        for e in &events {
            println!("   event: {e}");
        }
        state = next;
    }
}
