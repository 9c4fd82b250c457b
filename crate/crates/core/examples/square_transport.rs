//! Inflow/outflow transport on the unit square: the plain Galerkin method
//! loses accuracy and its material derivative grows under refinement.
//!
//! ```text
//! cargo run --release --example square_transport -- 20,40,80
//! ```

use cip_transport::analysis::ErrorKind;
use cip_transport::scenarios::{make_square_transport, run_convergence_study, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let neles = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "20,40,80".into())
        .split(',')
        .map(str::parse)
        .collect::<Result<Vec<usize>, _>>()?;
    let scenario = make_square_transport(1.0);
    let kinds = [ErrorKind::GlobalL2, ErrorKind::MaterialDerivative];
    for gamma in [0.0, 0.01] {
        let cfg = StudyConfig::new(1, neles.clone()).with_gamma(gamma).with_errors(&kinds);
        let report = run_convergence_study(&scenario, &cfg)?;
        println!("gamma = {gamma}");
        for l in &report.levels {
            println!(
                "  nele {:>4}: L2 {:.4e}  material derivative {:.4e}",
                l.nele,
                l.get(ErrorKind::GlobalL2).unwrap_or(f64::NAN),
                l.get(ErrorKind::MaterialDerivative).unwrap_or(f64::NAN)
            );
        }
        for k in kinds {
            println!("  fitted rate {k}: {:.3}", report.fitted_rate(k).unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
