//! One turn of the rotating disc with smooth and rough data side by side,
//! stabilized and plain Galerkin.
//!
//! ```text
//! cargo run --release --example rotating_disc -- 80 1
//! ```

use std::sync::Arc;

use cip_transport::analysis::{l2_error, Region};
use cip_transport::fespace::FeSpace;
use cip_transport::operators::{CipVariant, SystemOperators};
use cip_transport::scenarios::{make_rotating_disc, DiscData};
use cip_transport::timestepper::{run_simulation, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nele: usize = args.first().map_or(Ok(80), |s| s.parse())?;
    let degree: usize = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let scenario = make_rotating_disc(DiscData::Combined);
    let space = FeSpace::new(Arc::new(scenario.mesh(nele)?), degree)?;
    let (_, tc) = scenario.time_config(degree, nele, 0.5)?;
    println!("nele {nele}, P{degree}, {} steps of {:.4e}", tc.steps, tc.dt);
    for gamma in [0.0, 0.001, 0.01] {
        let ops = SystemOperators::assemble(Arc::clone(&space), scenario.velocity.clone(), 0.0, CipVariant::AbsBeta, gamma)?;
        let traj = run_simulation(&scenario, &ops, tc, RunOptions::default(), &mut [])?;
        let exact = |x| scenario.exact_at(x, tc.final_time());
        let global = l2_error(traj.last(), exact, Region::Global)?;
        let smooth = l2_error(traj.last(), exact, Region::HalfplaneXPos)?;
        let energy = traj.diagnostics.last().map_or(0.0, |d| d.energy) / traj.diagnostics[0].energy;
        println!("gamma {gamma:<6} global {global:.4e}  smooth half (x>0) {smooth:.4e}  energy ratio {energy:.6}");
    }
    Ok(())
}
