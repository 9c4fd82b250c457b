//! Error history on the square up to t = 3, after the initial data has left
//! the domain. Prints the L2 error at a few times and writes the full trace.
//!
//! ```text
//! cargo run --release --example long_term -- 40 /tmp/longterm.csv
//! ```

use std::io::Write;
use std::sync::Arc;

use cip_transport::analysis::{L2ErrorTrace, Region};
use cip_transport::fespace::FeSpace;
use cip_transport::operators::{CipVariant, SystemOperators};
use cip_transport::scenarios::make_square_transport;
use cip_transport::timestepper::{run_simulation, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nele: usize = args.first().map_or(Ok(40), |s| s.parse())?;
    let scenario = make_square_transport(3.0);
    let space = FeSpace::new(Arc::new(scenario.mesh(nele)?), 1)?;
    let (_, tc) = scenario.time_config(1, nele, 0.5)?;
    let mut out = args.get(1).map(std::fs::File::create).transpose()?;
    if let Some(f) = out.as_mut() {
        writeln!(f, "gamma,t,err_global_L2")?;
    }
    for gamma in [0.0, 0.01] {
        let ops = SystemOperators::assemble(Arc::clone(&space), scenario.velocity.clone(), 0.0, CipVariant::AbsBeta, gamma)?;
        let mut trace = L2ErrorTrace::new(Arc::clone(&scenario.exact), Region::Global);
        run_simulation(&scenario, &ops, tc, RunOptions::default(), &mut [&mut trace])?;
        let at = |t: f64| trace.at(t).unwrap_or(f64::NAN);
        println!(
            "gamma {gamma:<5} t=0.5 {:.3e}  t=1 {:.3e}  t=2 {:.3e}  t=3 {:.3e}",
            at(0.5),
            at(1.0),
            at(2.0),
            at(3.0)
        );
        if let Some(f) = out.as_mut() {
            for (t, e) in &trace.samples {
                writeln!(f, "{gamma},{t:e},{e:e}")?;
            }
        }
    }
    Ok(())
}
