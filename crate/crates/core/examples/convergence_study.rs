//! Refinement study for a named scenario.
//!
//! ```text
//! cargo run --release --example convergence_study -- rotating_disc_smooth 1 0.01 40,80,160 global,matderiv
//! ```

use cip_transport::analysis::ErrorKind;
use cip_transport::scenarios::{run_convergence_study, Scenario, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let scenario: Scenario = arg(0, "rotating_disc_smooth").parse()?;
    let degree: usize = arg(1, "1").parse()?;
    let gamma: f64 = arg(2, "0.01").parse()?;
    let neles = arg(3, "20,40,80").split(',').map(str::parse).collect::<Result<Vec<usize>, _>>()?;
    let errors = arg(4, "global").split(',').map(str::parse).collect::<Result<Vec<ErrorKind>, _>>()?;

    let cfg = StudyConfig::new(degree, neles).with_gamma(gamma).with_errors(&errors);
    let start = std::time::Instant::now();
    let report = run_convergence_study(&scenario, &cfg)?;
    print!("{}", report.to_csv());
    for k in &report.kinds {
        if let Some(r) = report.fitted_rate(*k) {
            println!("# fitted {k}: {r:.3}");
        }
    }
    eprintln!("{} P{degree} gamma={gamma}: {:.1?}", scenario.name, start.elapsed());
    Ok(())
}
