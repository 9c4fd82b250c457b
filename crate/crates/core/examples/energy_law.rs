//! Discrete energy on the periodic square: Crank-Nicolson conserves the L2
//! norm exactly without stabilization, the CIP term only removes energy.
//!
//! ```text
//! cargo run --release --example energy_law -- 40 2
//! ```

use std::sync::Arc;

use cip_transport::fespace::FeSpace;
use cip_transport::operators::{CipVariant, SystemOperators};
use cip_transport::scenarios::make_periodic_cylinder;
use cip_transport::timestepper::{run_simulation, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nele: usize = args.first().map_or(Ok(40), |s| s.parse())?;
    let degree: usize = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let scenario = make_periodic_cylinder();
    let space = FeSpace::new(Arc::new(scenario.mesh(nele)?), degree)?;
    for (theta, gamma) in [(0.5, 0.0), (0.5, 0.01), (1.0, 0.0)] {
        let ops = SystemOperators::assemble(Arc::clone(&space), scenario.velocity.clone(), 0.0, CipVariant::AbsBeta, gamma)?;
        let (_, tc) = scenario.time_config(degree, nele, theta)?;
        let traj = run_simulation(&scenario, &ops, tc, RunOptions::default(), &mut [])?;
        let d = &traj.diagnostics;
        let rises = d.windows(2).filter(|w| w[1].energy > w[0].energy).count();
        // dissipated energy: (|u^0|^2 - |u^N|^2) / 2
        let lost = 0.5 * (d[0].energy.powi(2) - d[d.len() - 1].energy.powi(2));
        println!(
            "theta {theta} gamma {gamma:<5} |u^N|/|u^0| = {:.12}  steps with growth {rises}  dissipated {lost:.4e}",
            d[d.len() - 1].energy / d[0].energy
        );
    }
    Ok(())
}
