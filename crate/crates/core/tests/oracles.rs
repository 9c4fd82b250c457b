//! Assembled quantities against independently computed values.

use std::f64::consts::PI;
use std::sync::Arc;

use cip_transport::analysis::{convergence_rates, fitted_rate, l2_error, Region};
use cip_transport::fespace::{interpolate_nodal, L2Projector, FeSpace};
use cip_transport::mesh::{classify_boundary, generate_disc_perturbed, generate_square, Point, DISC_SEED};
use cip_transport::operators::{
    assemble_cip, assemble_convection, assemble_inflow_matrix, assemble_inflow_rhs, assemble_mass, CipVariant,
};
use cip_transport::timestepper::{nominal_h, select_dt, DomainKind, ThetaConfig};
use cip_transport::velocity::VelocityField;

fn gaussian(x: Point) -> f64 {
    (-30.0 * ((x[0] - 0.5).powi(2) + x[1].powi(2))).exp()
}

/// Two triangles of the unit square, P1, beta = (1, 0). Across the diagonal
/// from (0,0) to (1,1) the normal derivative of each hat function jumps by
/// `+-sqrt(2)`: `-` for the diagonal end points, `+` for (1,0) and (0,1).
/// With `h_F^2 = 2` and `|F| = sqrt(2)`:
/// `S = 2 * sqrt(2) * w * 2 * s s^T`, `w = |beta| = 1` or `|beta . n| = 1/sqrt(2)`.
#[test]
fn single_edge_cip_by_hand() {
    let space = FeSpace::new(Arc::new(generate_square(1, false).unwrap()), 1).unwrap();
    let beta = VelocityField::constant([1.0, 0.0]);
    let sign: Vec<f64> = space
        .mesh()
        .vertices
        .iter()
        .map(|p| if (p[0] - p[1]).abs() < 1e-14 { -1.0 } else { 1.0 })
        .collect();
    for (variant, w) in [(CipVariant::AbsBeta, 1.0), (CipVariant::AbsBetaNormal, 0.5f64.sqrt())] {
        let s = assemble_cip(&space, &beta, 0.0, variant).unwrap();
        let scale = 4.0 * 2f64.sqrt() * w;
        for i in 0..4 {
            for j in 0..4 {
                assert!((s.get(i, j) - scale * sign[i] * sign[j]).abs() < 1e-12, "{variant} ({i},{j})");
            }
        }
        // hat difference across the diagonal: u = phi_(1,0) - phi_(0,0)
        let u: Vec<f64> = space
            .mesh()
            .vertices
            .iter()
            .map(|p| match (p[0], p[1]) {
                (x, y) if x == 1.0 && y == 0.0 => 1.0,
                (x, y) if x == 0.0 && y == 0.0 => -1.0,
                _ => 0.0,
            })
            .collect();
        assert!((s.quad_form(&u) - 4.0 * scale).abs() < 1e-12);
    }
}

#[test]
fn dt_rule_arithmetic() {
    let h = nominal_h(DomainKind::Disc, 80);
    assert!((h - 2.0 * PI / 80.0).abs() < 1e-15);
    assert!((select_dt(1, h).unwrap() - PI / 80.0).abs() < 1e-15);
    let dt2 = select_dt(2, h).unwrap();
    assert!((dt2 - 0.011005).abs() < 1e-5, "{dt2}");
    let tc = ThetaConfig::fit(0.5, dt2, 2.0 * PI).unwrap();
    assert!(tc.dt <= dt2 && (tc.steps as f64 * tc.dt - 2.0 * PI).abs() < 1e-12);
    assert_eq!(tc.steps, 571);
    let hs = nominal_h(DomainKind::Square, 40);
    assert_eq!(select_dt(1, hs).unwrap(), 1.0 / 80.0);
}

fn disc_space(nele: usize, k: usize) -> Arc<FeSpace> {
    FeSpace::new(Arc::new(generate_disc_perturbed(nele, DISC_SEED).unwrap()), k).unwrap()
}

#[test]
fn interpolation_and_projection_rates() {
    for k in [1, 2] {
        let mut hs = Vec::new();
        let (mut ei, mut ep) = (Vec::new(), Vec::new());
        // nele = 40 does not yet resolve the Gaussian (h ~ its width)
        for nele in [80, 160, 320] {
            let space = disc_space(nele, k);
            hs.push(nominal_h(DomainKind::Disc, nele));
            let ui = interpolate_nodal(|x, _| gaussian(x), 0.0, &space);
            ei.push(l2_error(&ui, gaussian, Region::Global).unwrap());
            let proj = L2Projector::new(Arc::clone(&space), assemble_mass(&space).unwrap()).unwrap();
            let up = proj.project(|x, _| gaussian(x), 0.0).unwrap();
            ep.push(l2_error(&up, gaussian, Region::Global).unwrap());
        }
        for (i, p) in ei.iter().zip(&ep) {
            assert!(p <= i, "projection is the best L2 approximation");
        }
        let ri = fitted_rate(&hs, &ei).unwrap();
        assert!(ri >= k as f64 + 0.8, "interpolation P{k}: {ri}");
        if k == 1 {
            let rp = fitted_rate(&hs, &ep).unwrap();
            assert!((rp - 2.0).abs() <= 0.2, "projection P1: {rp}");
        }
    }
}

#[test]
fn boundary_flux_identities_on_square() {
    let space = FeSpace::new(Arc::new(generate_square(8, false).unwrap()), 1).unwrap();
    let beta = VelocityField::constant([1.0, 0.0]);
    let a = assemble_convection(&space, &beta, 0.0).unwrap();
    let one = vec![1.0; space.ndof()];
    // 1'(A + A')1 = boundary integral of beta . n
    assert!((2.0 * a.quad_form(&one)).abs() < 1e-13);
    let p = classify_boundary(space.mesh(), &beta, 0.0).unwrap();
    let b = assemble_inflow_matrix(&space, &p, &beta, 0.0).unwrap();
    assert!((b.quad_form(&one) - 1.0).abs() < 1e-13);
    let g: f64 = assemble_inflow_rhs(&space, &p, &beta, |_, _| 1.0, 0.0).unwrap().iter().sum();
    assert!((g - 1.0).abs() < 1e-13);
}

#[test]
fn inflow_data_is_consistent_with_interpolant() {
    let beta = VelocityField::constant([1.0, 0.0]);
    let g = |x: Point, _t: f64| (3.0 * x[1]).sin() + x[1] * x[1];
    for k in [1, 2] {
        let mut hs = Vec::new();
        let mut defects = Vec::new();
        for nele in [8, 16, 32] {
            let space = FeSpace::new(Arc::new(generate_square(nele, false).unwrap()), k).unwrap();
            let p = classify_boundary(space.mesh(), &beta, 0.0).unwrap();
            let b = assemble_inflow_matrix(&space, &p, &beta, 0.0).unwrap();
            let rhs = assemble_inflow_rhs(&space, &p, &beta, g, 0.0).unwrap();
            let bi = b.mul_vec(interpolate_nodal(g, 0.0, &space).coeffs());
            defects.push(rhs.iter().zip(&bi).map(|(a, b)| (a - b).abs()).sum::<f64>());
            hs.push(1.0 / nele as f64);
        }
        for r in convergence_rates(&hs, &defects) {
            assert!(r.unwrap() >= k as f64 + 0.8, "P{k}: {r:?}");
        }
    }
}

#[test]
fn disc_inflow_matrix_vanishes() {
    let beta = VelocityField::rotation();
    let mut norms = Vec::new();
    for nele in [40, 80, 160] {
        let space = disc_space(nele, 1);
        let p = classify_boundary(space.mesh(), &beta, 0.0).unwrap();
        norms.push(assemble_inflow_matrix(&space, &p, &beta, 0.0).unwrap().max_abs());
    }
    assert!(norms.windows(2).all(|w| w[1] <= w[0]), "{norms:?}");
}
