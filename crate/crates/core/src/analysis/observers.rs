//! Space-time quantities accumulated step by step during a run.
//!
//! Time integrals use the scheme's own rule: one sample per step at
//! `u^{n_theta}` and `t_{n-1} + theta dt`, weighted by `dt`.

use std::sync::Arc;

use crate::analysis::{l2_error, stab_seminorm, Region};
use crate::error::Result;
use crate::fespace::{data_degree, FeFunction, FeSpace, L2Projector};
use crate::mesh::Point;
use crate::operators::{assemble_streamline, SystemOperators};
use crate::quadrature::triangle_quadrature;
use crate::sparse::{dot, SparseMatrix};
use crate::timestepper::{StepObserver, StepView};
use crate::velocity::VelocityField;
use crate::ScalarField;

/// `int (f - (u^n - u^{n-1})/dt - beta . grad u^{n_theta})^2` and
/// `int (f - beta . grad u^{n_theta})^2`, plus the load vector of the latter
/// residual, by quadrature on every element.
fn residual_by_quadrature(
    space: &FeSpace,
    velocity: &VelocityField,
    source: Option<&ScalarField>,
    rate: Option<&[f64]>,
    v: &FeFunction,
    t: f64,
    mut load: Option<&mut [f64]>,
) -> Result<f64> {
    let rule = triangle_quadrature(data_degree(space.degree()))?;
    let mesh = space.mesh();
    let mut acc = 0.0;
    for el in 0..mesh.n_triangles() {
        let dofs = space.element_dofs(el);
        for (x, _, w, basis) in space.quadrature_points(el, &rule) {
            let (_, g) = v.combine(el, &basis);
            let b = velocity.eval(x, t);
            let mut r = source.map_or(0.0, |f| f(x, t)) - (b[0] * g[0] + b[1] * g[1]);
            if let Some(rate) = rate {
                r -= dofs.iter().enumerate().map(|(i, &d)| rate[d] * basis.values[i]).sum::<f64>();
            }
            acc += w * r * r;
            if let Some(load) = load.as_deref_mut() {
                for (i, &d) in dofs.iter().enumerate() {
                    load[d] += w * r * basis.values[i];
                }
            }
        }
    }
    Ok(acc)
}

/// Material-derivative residual
/// `(sum_n dt ||f^{n_theta} - (u^n - u^{n-1})/dt - beta . grad u^{n_theta}||^2)^{1/2}`.
///
/// Without a source the integrand is a quadratic form in the coefficients
/// and is evaluated with `M`, `A` and the streamline matrix `G`; otherwise
/// by quadrature.
pub struct MaterialDerivative {
    space: Arc<FeSpace>,
    velocity: VelocityField,
    source: Option<ScalarField>,
    matrices: Option<(SparseMatrix, SparseMatrix, SparseMatrix)>,
    acc: f64,
}

impl MaterialDerivative {
    pub fn new(ops: &SystemOperators, source: Option<ScalarField>) -> Result<Self> {
        let matrices = match source {
            None => Some((
                ops.mass.clone(),
                ops.convection.clone(),
                assemble_streamline(&ops.space, &ops.velocity, ops.assembled_at)?,
            )),
            Some(_) => None,
        };
        Ok(Self { space: Arc::clone(&ops.space), velocity: ops.velocity.clone(), source, matrices, acc: 0.0 })
    }

    pub fn value(&self) -> f64 {
        self.acc.sqrt()
    }
}

impl StepObserver for MaterialDerivative {
    fn observe(&mut self, view: &StepView<'_>) -> Result<()> {
        let rate: Vec<f64> =
            view.next.coeffs().iter().zip(view.prev.coeffs()).map(|(a, b)| (a - b) / view.dt).collect();
        let v = view.theta_state();
        let r2 = match &self.matrices {
            Some((m, a, g)) => {
                m.quad_form(&rate) + 2.0 * a.bilinear(&rate, v.coeffs()) + g.quad_form(v.coeffs())
            }
            None => residual_by_quadrature(
                &self.space,
                &self.velocity,
                self.source.as_ref(),
                Some(&rate),
                &v,
                view.t_theta(),
                None,
            )?,
        };
        self.acc += view.dt * r2.max(0.0);
        Ok(())
    }
}

/// Material-derivative residual of a stored trajectory (every step kept),
/// by quadrature.
pub fn material_derivative_error(
    states: &[FeFunction],
    dt: f64,
    theta: f64,
    velocity: &VelocityField,
    source: Option<&ScalarField>,
) -> Result<f64> {
    let mut acc = 0.0;
    for (n, pair) in states.windows(2).enumerate() {
        let rate: Vec<f64> = pair[1].coeffs().iter().zip(pair[0].coeffs()).map(|(a, b)| (a - b) / dt).collect();
        let mut v = pair[0].clone();
        v.coeffs_mut().iter_mut().zip(pair[1].coeffs()).for_each(|(p, q)| *p = theta * q + (1.0 - theta) * *p);
        let t = (n as f64 + theta) * dt;
        acc += dt * residual_by_quadrature(pair[0].space(), velocity, source, Some(&rate), &v, t, None)?;
    }
    Ok(acc.sqrt())
}

/// `(sum_n dt |u^{n_theta}|_s^2)^{1/2}`, without the factor gamma.
#[derive(Debug)]
pub struct StabIntegral {
    cip: SparseMatrix,
    acc: f64,
}

impl StabIntegral {
    pub fn new(ops: &SystemOperators) -> Self {
        Self { cip: ops.cip.clone(), acc: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.acc.sqrt()
    }
}

impl StepObserver for StabIntegral {
    fn observe(&mut self, view: &StepView<'_>) -> Result<()> {
        self.acc += view.dt * stab_seminorm(view.theta_state().coeffs(), &self.cip).powi(2);
        Ok(())
    }
}

/// A posteriori bound
///
/// ```text
/// h ||u0 - pi_h u0|| + sum_n dt ( h ||(I - pi_h)(f - beta . grad u^{n_theta})||
///                                 + gamma h^{1/2} |u^{n_theta}|_s )
/// ```
///
/// The infimum over the discrete space is attained by the L2 projection.
pub struct AposterioriEstimator {
    h: f64,
    gamma: f64,
    initial_data: ScalarField,
    source: Option<ScalarField>,
    velocity: VelocityField,
    convection: SparseMatrix,
    cip: SparseMatrix,
    streamline: Option<SparseMatrix>,
    projector: L2Projector,
    initial_term: f64,
    acc: f64,
}

impl AposterioriEstimator {
    pub fn new(ops: &SystemOperators, initial_data: ScalarField, source: Option<ScalarField>, h: f64) -> Result<Self> {
        let streamline = match source {
            None => Some(assemble_streamline(&ops.space, &ops.velocity, ops.assembled_at)?),
            Some(_) => None,
        };
        Ok(Self {
            h,
            gamma: ops.gamma,
            initial_data,
            source,
            velocity: ops.velocity.clone(),
            convection: ops.convection.clone(),
            cip: ops.cip.clone(),
            streamline,
            projector: L2Projector::new(Arc::clone(&ops.space), ops.mass.clone())?,
            initial_term: 0.0,
            acc: 0.0,
        })
    }

    pub fn value(&self) -> f64 {
        self.initial_term + self.acc
    }

    pub fn initial_term(&self) -> f64 {
        self.initial_term
    }

    /// `||(I - pi_h)(f - beta . grad v)||^2` at time `t`.
    fn projection_defect(&self, v: &FeFunction, t: f64) -> Result<f64> {
        match &self.streamline {
            Some(g) => {
                // (beta . grad v, phi_i) = (A v)_i
                let load = self.convection.mul_vec(v.coeffs());
                let p = self.projector.project_load(&load)?;
                Ok(g.quad_form(v.coeffs()) - dot(p.coeffs(), &load))
            }
            None => {
                let space = self.projector.space();
                let mut load = vec![0.0; space.ndof()];
                let full =
                    residual_by_quadrature(space, &self.velocity, self.source.as_ref(), None, v, t, Some(&mut load))?;
                let p = self.projector.project_load(&load)?;
                Ok(full - dot(p.coeffs(), &load))
            }
        }
    }
}

impl StepObserver for AposterioriEstimator {
    fn start(&mut self, initial: &FeFunction) -> Result<()> {
        let u0 = Arc::clone(&self.initial_data);
        self.initial_term = self.h * l2_error(initial, |x: Point| u0(x, 0.0), Region::Global)?;
        Ok(())
    }

    fn observe(&mut self, view: &StepView<'_>) -> Result<()> {
        let v = view.theta_state();
        let defect = self.projection_defect(&v, view.t_theta())?.max(0.0).sqrt();
        let stab = stab_seminorm(v.coeffs(), &self.cip);
        self.acc += view.dt * (self.h * defect + self.gamma * self.h.sqrt() * stab);
        Ok(())
    }
}

/// Error against the exact solution after every step.
pub struct L2ErrorTrace {
    exact: ScalarField,
    region: Region,
    pub samples: Vec<(f64, f64)>,
}

impl std::fmt::Debug for L2ErrorTrace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("L2ErrorTrace").field("region", &self.region).field("samples", &self.samples.len()).finish()
    }
}

impl L2ErrorTrace {
    pub fn new(exact: ScalarField, region: Region) -> Self {
        Self { exact, region, samples: Vec::new() }
    }

    /// Sample closest to time `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.samples
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|s| s.1)
    }
}

impl StepObserver for L2ErrorTrace {
    fn start(&mut self, initial: &FeFunction) -> Result<()> {
        let e = l2_error(initial, |x| (self.exact)(x, 0.0), self.region)?;
        self.samples.push((0.0, e));
        Ok(())
    }

    fn observe(&mut self, view: &StepView<'_>) -> Result<()> {
        let e = l2_error(view.next, |x| (self.exact)(x, view.t), self.region)?;
        self.samples.push((view.t, e));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::interpolate_nodal;
    use crate::mesh::{generate_disc, generate_square};
    use crate::operators::CipVariant;
    use crate::timestepper::{run_from, RunOptions, ThetaConfig};

    fn ops(beta: VelocityField, gamma: f64, k: usize) -> SystemOperators {
        let space = FeSpace::new(Arc::new(generate_disc(16).unwrap()), k).unwrap();
        SystemOperators::assemble(space, beta, 0.0, CipVariant::AbsBeta, gamma).unwrap()
    }

    fn bump(x: Point, _: f64) -> f64 {
        (-8.0 * ((x[0] - 0.3).powi(2) + x[1] * x[1])).exp()
    }

    #[test]
    fn still_trajectory_has_no_material_derivative() {
        let o = ops(VelocityField::zero(), 0.0, 1);
        let mut md = MaterialDerivative::new(&o, None).unwrap();
        let u0 = interpolate_nodal(bump, 0.0, &o.space);
        run_from(u0, None, None, &o, ThetaConfig::new(0.5, 1.0, 5).unwrap(), RunOptions::default(), &mut [&mut md])
            .unwrap();
        assert!(md.value() < 1e-12);
    }

    #[test]
    fn matrix_and_quadrature_routes_agree() {
        for k in [1, 2] {
            let o = ops(VelocityField::rotation(), 0.05, k);
            let cfg = ThetaConfig::new(0.5, 0.6, 6).unwrap();
            let mut md = MaterialDerivative::new(&o, None).unwrap();
            let zero: ScalarField = Arc::new(|_, _| 0.0);
            let mut md_quad = MaterialDerivative::new(&o, Some(Arc::clone(&zero))).unwrap();
            let mut est = AposterioriEstimator::new(&o, Arc::new(bump), None, 0.2).unwrap();
            let mut est_quad = AposterioriEstimator::new(&o, Arc::new(bump), Some(zero), 0.2).unwrap();
            let u0 = interpolate_nodal(bump, 0.0, &o.space);
            let traj = run_from(
                u0,
                None,
                None,
                &o,
                cfg,
                RunOptions { snapshot_stride: 1 },
                &mut [&mut md, &mut md_quad, &mut est, &mut est_quad],
            )
            .unwrap();
            let stored = material_derivative_error(&traj.snapshots, cfg.dt, cfg.theta, &o.velocity, None).unwrap();
            assert!(md.value() > 0.0);
            assert!((md.value() - md_quad.value()).abs() < 1e-10 * md.value(), "k={k}");
            assert!((md.value() - stored).abs() < 1e-10 * md.value(), "k={k}");
            assert!((est.value() - est_quad.value()).abs() < 1e-8 * est.value(), "k={k}");
        }
    }

    #[test]
    fn estimator_vanishes_for_trivial_problem() {
        let space = FeSpace::new(Arc::new(generate_square(4, true).unwrap()), 1).unwrap();
        let o = SystemOperators::assemble(space, VelocityField::zero(), 0.0, CipVariant::AbsBeta, 0.0).unwrap();
        // u0 in the discrete space: piecewise linear hat on the periodic mesh
        let u0h = interpolate_nodal(|x, _| if x == [0.5, 0.5] { 1.0 } else { 0.0 }, 0.0, &o.space);
        let u0c = u0h.clone();
        let mesh = Arc::clone(o.space.mesh());
        let u0: ScalarField = Arc::new(move |x, _| {
            (0..mesh.n_triangles())
                .find(|&t| mesh.barycentric_of(t, x).iter().all(|&l| l > -1e-12))
                .map_or(0.0, |t| u0c.evaluate(t, x).unwrap().0)
        });
        let mut est = AposterioriEstimator::new(&o, u0, None, 0.25).unwrap();
        run_from(u0h, None, None, &o, ThetaConfig::new(0.5, 1.0, 3).unwrap(), RunOptions::default(), &mut [&mut est])
            .unwrap();
        assert!(est.value() < 1e-12, "{}", est.value());
    }

    #[test]
    fn estimator_is_homogeneous() {
        let o = ops(VelocityField::rotation(), 0.01, 1);
        let cfg = ThetaConfig::new(0.5, 0.4, 4).unwrap();
        let value = |a: f64| {
            let f: ScalarField = Arc::new(move |x, t| a * bump(x, t));
            let mut est = AposterioriEstimator::new(&o, Arc::clone(&f), None, 0.3).unwrap();
            let u0 = interpolate_nodal(|x, t| f(x, t), 0.0, &o.space);
            run_from(u0, None, None, &o, cfg, RunOptions::default(), &mut [&mut est]).unwrap();
            est.value()
        };
        let (v1, v3) = (value(1.0), value(-3.0));
        assert!(v1 > 0.0);
        assert!((v3 - 3.0 * v1).abs() < 1e-10 * v3);
    }

    #[test]
    fn error_trace_samples_every_step() {
        let o = ops(VelocityField::rotation(), 0.01, 1);
        let mut trace = L2ErrorTrace::new(Arc::new(|x, t| bump(VelocityField::rotation().backward_flow(x, t).unwrap(), 0.0)), Region::Global);
        let u0 = interpolate_nodal(bump, 0.0, &o.space);
        run_from(u0, None, None, &o, ThetaConfig::new(0.5, 1.0, 8).unwrap(), RunOptions::default(), &mut [&mut trace])
            .unwrap();
        assert_eq!(trace.samples.len(), 9);
        assert_eq!(trace.at(1.0), Some(trace.samples[8].1));
    }
}
