//! Rough data measured in a negative norm: for the periodic cylinder the L2
//! error stalls while the discrete dual norm still converges.
//!
//! ```text
//! cargo run --release --example dual_norm -- 20,40,80
//! ```

use cip_transport::analysis::ErrorKind;
use cip_transport::scenarios::{make_periodic_cylinder, run_convergence_study, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let neles = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "20,40,80".into())
        .split(',')
        .map(str::parse)
        .collect::<Result<Vec<usize>, _>>()?;
    let kinds = [ErrorKind::GlobalL2, ErrorKind::DualNorm];
    let cfg = StudyConfig::new(1, neles).with_errors(&kinds);
    let report = run_convergence_study(&make_periodic_cylinder(), &cfg)?;
    print!("{}", report.to_csv());
    for k in kinds {
        println!("# fitted {k}: {:.3}", report.fitted_rate(k).unwrap_or(f64::NAN));
    }
    Ok(())
}
