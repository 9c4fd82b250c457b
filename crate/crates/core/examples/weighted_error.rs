//! Local accuracy: weighted error around the smooth bump of the disc with and
//! without the discontinuous cylinder on the other side.
//!
//! ```text
//! cargo run --release --example weighted_error -- 160 2.0
//! ```

use cip_transport::analysis::{profile, ErrorKind, WeightFunction};
use cip_transport::scenarios::{make_rotating_disc, run_level, DiscData, StudyConfig, WeightParams};
use cip_transport::velocity::VelocityField;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nele: usize = args.first().map_or(Ok(160), |s| s.parse())?;
    let k: f64 = args.get(1).map_or(Ok(2.0), |s| s.parse())?;
    let weight = WeightParams { k, ..WeightParams::default() };

    let h = 2.0 * std::f64::consts::PI / nele as f64;
    let w = WeightFunction::new([0.5, 0.0], weight.r0, k, h, VelocityField::rotation())?;
    println!("sigma = {:.4}; radial profile:", w.sigma());
    for r in [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5] {
        println!("  r = {r:<4} weight {:.4}", w.radial(r));
    }
    println!("  profile(1) = {:.6} (e^-1/2 = {:.6})", profile(1.0), (-0.5f64).exp());

    for gamma in [0.0, 0.001, 0.01] {
        let cfg = StudyConfig::new(1, vec![nele]).with_gamma(gamma).with_errors(&[ErrorKind::WeightedL2]).with_weight(weight);
        let smooth = run_level(&make_rotating_disc(DiscData::Smooth), &cfg, nele)?.get(ErrorKind::WeightedL2).unwrap();
        let combined = run_level(&make_rotating_disc(DiscData::Combined), &cfg, nele)?.get(ErrorKind::WeightedL2).unwrap();
        println!("gamma {gamma:<6} smooth {smooth:.4e} combined {combined:.4e} ratio {:.2}", combined / smooth);
    }
    Ok(())
}
