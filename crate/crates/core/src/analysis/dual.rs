//! Discrete `H^1`-dual norm of an error, measured on one uniform refinement.
//!
//! `z` solves `(z, w) + (grad z, grad w) = (e, w)` for all `w` in the fine
//! space; the norm is `||z||_{H1} = (z, e)^{1/2}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{data_degree, FeFunction, FeSpace};
use crate::mesh::Point;
use crate::operators::{assemble_mass, assemble_stiffness};
use crate::sparse::{dot, LuSolver, SparseMatrix};

#[derive(Debug)]
pub struct DualNorm {
    coarse: Arc<FeSpace>,
    fine: Arc<FeSpace>,
    parent: Vec<usize>,
    riesz: LuSolver,
}

impl DualNorm {
    pub fn new(coarse: Arc<FeSpace>) -> Result<Self> {
        let (mesh, parent) = coarse.mesh().refine_uniform()?;
        let fine = FeSpace::new(Arc::new(mesh), coarse.degree())?;
        let m = assemble_mass(&fine)?;
        let k = assemble_stiffness(&fine)?;
        let riesz = LuSolver::new(SparseMatrix::linear_combination(&[(1.0, &m), (1.0, &k)]))?;
        Ok(Self { coarse, fine, parent, riesz })
    }

    pub fn fine_space(&self) -> &Arc<FeSpace> {
        &self.fine
    }

    /// Norm of `e(coarse element, x)`, integrated on the fine mesh.
    pub fn of_fn(&self, e: impl Fn(usize, Point) -> f64) -> Result<f64> {
        let b = self
            .fine
            .load_vector_with(data_degree(self.fine.degree()), |child, _, x| e(self.parent[child], x))?;
        let z = self.riesz.solve(&b)?;
        Ok(dot(&z, &b).max(0.0).sqrt())
    }

    pub fn of_function(&self, e: &FeFunction) -> Result<f64> {
        self.check(e)?;
        let mesh = self.coarse.mesh();
        self.of_fn(|t, x| e.eval_local(t, mesh.barycentric_of(t, x)).0)
    }

    /// Norm of `u_h - u`.
    pub fn of_error(&self, u_h: &FeFunction, exact: impl Fn(Point) -> f64) -> Result<f64> {
        self.check(u_h)?;
        let mesh = self.coarse.mesh();
        self.of_fn(|t, x| u_h.eval_local(t, mesh.barycentric_of(t, x)).0 - exact(x))
    }

    fn check(&self, u: &FeFunction) -> Result<()> {
        if !Arc::ptr_eq(u.space(), &self.coarse) {
            return Err(Error::InvalidArgument("function does not live on the coarse space".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{l2_error, Region};
    use crate::fespace::interpolate_nodal;
    use crate::mesh::generate_square;

    fn space(k: usize) -> Arc<FeSpace> {
        FeSpace::new(Arc::new(generate_square(6, true).unwrap()), k).unwrap()
    }

    #[test]
    fn zero_and_constant() {
        let s = space(1);
        let d = DualNorm::new(Arc::clone(&s)).unwrap();
        assert_eq!(d.of_function(&FeFunction::zeros(Arc::clone(&s))).unwrap(), 0.0);
        let c = interpolate_nodal(|_, _| -0.7, 0.0, &s);
        assert!((d.of_function(&c).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn bounded_by_l2_norm() {
        for k in [1, 2] {
            let s = space(k);
            let d = DualNorm::new(Arc::clone(&s)).unwrap();
            let u = interpolate_nodal(|x, _| (6.0 * x[0]).sin() * (2.0 * std::f64::consts::PI * x[1]).cos(), 0.0, &s);
            let exact = |x: Point| if x[0] < 0.5 { 1.0 } else { 0.0 };
            let dn = d.of_error(&u, exact).unwrap();
            let l2 = l2_error(&u, exact, Region::Global).unwrap();
            assert!(dn > 0.0 && dn <= l2 * (1.0 + 1e-10));
        }
    }

    #[test]
    fn oscillations_are_weak() {
        // high-frequency error is much smaller in the dual norm
        let s = space(2);
        let d = DualNorm::new(Arc::clone(&s)).unwrap();
        let z = FeFunction::zeros(Arc::clone(&s));
        let f = |x: Point| (2.0 * std::f64::consts::PI * 6.0 * x[0]).sin();
        let dn = d.of_error(&z, f).unwrap();
        let l2 = l2_error(&z, f, Region::Global).unwrap();
        assert!(dn < 0.1 * l2);
    }

    #[test]
    fn rejects_foreign_function() {
        let d = DualNorm::new(space(1)).unwrap();
        assert!(d.of_function(&FeFunction::zeros(space(1))).is_err());
    }
}
