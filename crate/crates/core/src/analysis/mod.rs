//! Error measures: L2 errors on sub-regions, weighted errors, the discrete
//! dual norm, space-time quantities accumulated along a run, and
//! convergence tables.

mod dual;
mod observers;
mod report;
mod weight;

pub use dual::DualNorm;
pub use observers::{
    material_derivative_error, AposterioriEstimator, L2ErrorTrace, MaterialDerivative, StabIntegral,
};
pub use report::{convergence_rates, fitted_rate, ErrorKind, ErrorReport, LevelRecord, RateRow, ERROR_KINDS};
pub use weight::{profile, profile_derivatives, WeightFunction};

use crate::error::Result;
use crate::fespace::{data_degree, FeFunction};
use crate::mesh::Point;
use crate::quadrature::triangle_quadrature;
use crate::sparse::SparseMatrix;

/// Integration region, decided per element by its barycentre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Global,
    HalfplaneXPos,
    Ball { center: Point, radius: f64 },
}

impl Region {
    pub fn contains(&self, x: Point) -> bool {
        match *self {
            Self::Global => true,
            Self::HalfplaneXPos => x[0] > 0.0,
            Self::Ball { center, radius } => (x[0] - center[0]).hypot(x[1] - center[1]) < radius,
        }
    }
}

/// `int w(x) (u_h - u)^2` over elements whose barycentre lies in `region`.
fn weighted_square_error(
    u_h: &FeFunction,
    exact: impl Fn(Point) -> f64,
    weight: impl Fn(Point) -> f64,
    region: Region,
) -> Result<f64> {
    let space = u_h.space();
    let mesh = space.mesh();
    let rule = triangle_quadrature(data_degree(space.degree()))?;
    let mut acc = 0.0;
    for t in 0..mesh.n_triangles() {
        if !region.contains(mesh.barycenter(t)) {
            continue;
        }
        for (x, _, w, basis) in space.quadrature_points(t, &rule) {
            let (v, _) = u_h.combine(t, &basis);
            let e = v - exact(x);
            acc += w * weight(x) * e * e;
        }
    }
    Ok(acc)
}

/// `||u_h - u||_{L2(region)}`.
pub fn l2_error(u_h: &FeFunction, exact: impl Fn(Point) -> f64, region: Region) -> Result<f64> {
    Ok(weighted_square_error(u_h, exact, |_| 1.0, region)?.sqrt())
}

/// `||varpi(., t) (u_h - u)||`.
pub fn weighted_l2_error(
    u_h: &FeFunction,
    exact: impl Fn(Point) -> f64,
    weight: &WeightFunction,
    t: f64,
) -> Result<f64> {
    let flow = weight.velocity().clone();
    // Validate the flow once so the pointwise closure cannot fail.
    flow.backward_flow([0.0, 0.0], t)?;
    let w = |x: Point| {
        let v = weight.eval_at_foot(flow.backward_flow(x, t).expect("checked above"));
        v * v
    };
    Ok(weighted_square_error(u_h, exact, w, Region::Global)?.sqrt())
}

/// `|u|_s = (u^T S u)^{1/2}`, with round-off negatives clamped to zero.
pub fn stab_seminorm(u: &[f64], s: &SparseMatrix) -> f64 {
    s.quad_form(u).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{interpolate_nodal, FeSpace};
    use crate::mesh::{generate_disc, generate_square};
    use crate::operators::{assemble_cip, CipVariant};
    use crate::velocity::VelocityField;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn p1(nele: usize) -> Arc<FeSpace> {
        FeSpace::new(Arc::new(generate_square(nele, false).unwrap()), 1).unwrap()
    }

    #[test]
    fn interpolant_of_space_member_has_zero_error() {
        let s = p1(5);
        let u = interpolate_nodal(|x, _| 2.0 * x[0] - x[1], 0.0, &s);
        assert!(l2_error(&u, |x| 2.0 * x[0] - x[1], Region::Global).unwrap() < 1e-12);
    }

    #[test]
    fn unit_error_on_unit_square() {
        let s = p1(3);
        let u = interpolate_nodal(|_, _| 1.0, 0.0, &s);
        assert!((l2_error(&u, |_| 0.0, Region::Global).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn regions_split_the_disc() {
        let s = FeSpace::new(Arc::new(generate_disc(40).unwrap()), 1).unwrap();
        let u = interpolate_nodal(|_, _| 1.0, 0.0, &s);
        let g = l2_error(&u, |_| 0.0, Region::Global).unwrap().powi(2);
        let half = l2_error(&u, |_| 0.0, Region::HalfplaneXPos).unwrap().powi(2);
        assert!((g - s.mesh().total_area()).abs() < 1e-12);
        assert!((half / g - 0.5).abs() < 0.05);
        let ball = l2_error(&u, |_| 0.0, Region::Ball { center: [0.0, 0.0], radius: 0.5 }).unwrap().powi(2);
        assert!((ball - std::f64::consts::PI * 0.25).abs() < 0.1);
    }

    #[test]
    fn seminorm_of_linear_is_zero() {
        let s = p1(4);
        let cip = assemble_cip(&s, &VelocityField::constant([1.0, 1.0]), 0.0, CipVariant::AbsBeta).unwrap();
        let u = interpolate_nodal(|x, _| 3.0 * x[0] + x[1] - 1.0, 0.0, &s);
        assert!(stab_seminorm(u.coeffs(), &cip).powi(2) < 1e-12);
    }

    #[test]
    fn unit_weight_reduces_to_global_error() {
        let s = p1(6);
        let u = interpolate_nodal(|x, _| x[0] * x[1], 0.0, &s);
        let exact = |x: Point| (x[0] - 0.3).sin();
        let w = WeightFunction::new([0.5, 0.5], 5.0, 2.0, 1.0 / 6.0, VelocityField::constant([1.0, 0.0])).unwrap();
        let a = weighted_l2_error(&u, exact, &w, 0.4).unwrap();
        let b = l2_error(&u, exact, Region::Global).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norms_are_homogeneous(a in -5.0f64..5.0, seed in 0u64..1000) {
            let s = p1(4);
            let f = move |x: Point| ((seed as f64) * 0.01 + 3.0 * x[0]).sin() + x[1];
            let u = interpolate_nodal(|x, _| f(x), 0.0, &s);
            let mut au = u.clone();
            au.coeffs_mut().iter_mut().for_each(|c| *c *= a);
            let e1 = l2_error(&u, |_| 0.0, Region::Global).unwrap();
            let e2 = l2_error(&au, |_| 0.0, Region::Global).unwrap();
            prop_assert!((e2 - a.abs() * e1).abs() < 1e-12 * (1.0 + e2));
            let cip = assemble_cip(&s, &VelocityField::constant([1.0, 0.0]), 0.0, CipVariant::AbsBeta).unwrap();
            let s1 = stab_seminorm(u.coeffs(), &cip);
            let s2 = stab_seminorm(au.coeffs(), &cip);
            prop_assert!((s2 - a.abs() * s1).abs() < 1e-12 * (1.0 + s2));
        }

        #[test]
        fn weighted_error_is_monotone_in_the_weight(r0 in 0.05f64..0.4, dr in 0.0f64..0.3, k in 1.1f64..4.0) {
            let s = p1(6);
            let u = interpolate_nodal(|x, _| x[0], 0.0, &s);
            let exact = |x: Point| (4.0 * x[1]).cos();
            let beta = VelocityField::constant([1.0, 0.0]);
            let small = WeightFunction::new([0.3, 0.5], r0, k, 1.0 / 6.0, beta.clone()).unwrap();
            let large = WeightFunction::new([0.3, 0.5], r0 + dr, k, 1.0 / 6.0, beta).unwrap();
            let a = weighted_l2_error(&u, exact, &small, 0.2).unwrap();
            let b = weighted_l2_error(&u, exact, &large, 0.2).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12));
        }
    }
}
