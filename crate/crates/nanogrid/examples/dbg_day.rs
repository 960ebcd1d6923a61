// scratch: run the bundled day and print the ledger
use std::path::Path;
use std::time::Instant;

fn main() {
    let scenario = nanogrid::Scenario::load(Path::new("assets/dcdn-day.scenario")).unwrap();
    let t0 = Instant::now();
    let result = nanogrid::sim::run(&scenario).unwrap();
    let wall = t0.elapsed();
    let l = &result.ledger.total;
    println!("wall = {wall:?}  steps = {}  nonconverged = {}", result.traces.len(), result.nonconverged_steps);
    println!(
        "E_GFV = {:.4} kWh  E_BC = {:.4}  E_BB = {:.4}  E_loss = {:.4}  acc = {:.4}  eta = {:?}",
        l.e_gfv_kwh, l.e_bc_kwh, l.e_bb_kwh, l.e_loss_kwh, l.e_loss_accumulated_kwh, l.eta_supply_pct
    );
    for (id, y) in &l.yields_kwh_per_kwp {
        println!("  {id}: {y:.3} kWh/kWp");
    }
    for e in result.events.iter().take(40) {
        println!("  {e}");
    }
    println!("  ... {} events total", result.events.len());
}
