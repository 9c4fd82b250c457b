//! A posteriori quantity against the true error for the smooth rotating disc.
//!
//! ```text
//! cargo run --release --example estimator -- 40,80,160 0.001
//! ```

use cip_transport::analysis::ErrorKind;
use cip_transport::scenarios::{make_rotating_disc, run_convergence_study, DiscData, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let neles = args
        .first()
        .map_or("40,80,160", String::as_str)
        .split(',')
        .map(str::parse)
        .collect::<Result<Vec<usize>, _>>()?;
    let gamma: f64 = args.get(1).map_or(Ok(0.001), |s| s.parse())?;
    let kinds = [ErrorKind::GlobalL2, ErrorKind::Estimator, ErrorKind::StabIntegral];
    let cfg = StudyConfig::new(1, neles).with_gamma(gamma).with_errors(&kinds);
    let report = run_convergence_study(&make_rotating_disc(DiscData::Smooth), &cfg)?;
    for l in &report.levels {
        let e = l.get(ErrorKind::GlobalL2).unwrap_or(f64::NAN);
        let est = l.get(ErrorKind::Estimator).unwrap_or(f64::NAN);
        println!("nele {:>4}: L2 {e:.4e}  estimator {est:.4e}  ratio {:.2}", l.nele, est / e);
    }
    for k in kinds {
        println!("fitted rate {k}: {:.3}", report.fitted_rate(k).unwrap_or(f64::NAN));
    }
    Ok(())
}
