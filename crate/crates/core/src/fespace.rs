//! Continuous Lagrange spaces of degree 1 and 2.
//!
//! Local numbering: dofs 0..3 sit at the triangle vertices; for P2, dof
//! `3 + e` sits at the midpoint of local edge `e` (the edge opposite local
//! vertex `e`). Global numbering: vertex classes first (in order of first
//! appearance), then one dof per global edge in mesh edge order.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{local_edge_vertices, Mesh, Point};
use crate::quadrature::{triangle_quadrature, TriangleQuadrature};
use crate::sparse::{LuSolver, SparseMatrix};

/// Upper bound on local dofs per element.
pub const MAX_LOCAL_DOFS: usize = 6;

/// Quadrature degree for bilinear volume and edge forms.
pub fn form_degree(k: usize) -> usize {
    2 * k + 2
}

/// Quadrature degree for data terms (loads, projections, errors).
pub fn data_degree(k: usize) -> usize {
    2 * k + 4
}

/// Values and gradients of the local basis at one point.
#[derive(Debug, Clone, Copy)]
pub struct LocalBasis {
    pub n: usize,
    pub values: [f64; MAX_LOCAL_DOFS],
    pub grads: [[f64; 2]; MAX_LOCAL_DOFS],
}

impl LocalBasis {
    /// Evaluate the degree-`k` basis given barycentric coordinates and their
    /// (constant) gradients.
    #[inline]
    pub fn eval(k: usize, lambda: [f64; 3], glam: &[[f64; 2]; 3]) -> Self {
        let mut values = [0.0; MAX_LOCAL_DOFS];
        let mut grads = [[0.0; 2]; MAX_LOCAL_DOFS];
        match k {
            1 => {
                for i in 0..3 {
                    values[i] = lambda[i];
                    grads[i] = glam[i];
                }
                Self { n: 3, values, grads }
            }
            _ => {
                for i in 0..3 {
                    values[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
                    let s = 4.0 * lambda[i] - 1.0;
                    grads[i] = [s * glam[i][0], s * glam[i][1]];
                }
                for e in 0..3 {
                    let (a, b) = local_edge_vertices(e);
                    values[3 + e] = 4.0 * lambda[a] * lambda[b];
                    grads[3 + e] = [
                        4.0 * (lambda[a] * glam[b][0] + lambda[b] * glam[a][0]),
                        4.0 * (lambda[a] * glam[b][1] + lambda[b] * glam[a][1]),
                    ];
                }
                Self { n: 6, values, grads }
            }
        }
    }
}

#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    element_dofs: Vec<[usize; MAX_LOCAL_DOFS]>,
    dof_coords: Vec<Point>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Arc<Self>> {
        if !(1..=2).contains(&degree) {
            return Err(Error::Unsupported(format!("Lagrange degree {degree} (only 1 and 2)")));
        }
        let mut vertex_dof = vec![usize::MAX; mesh.n_vertices()];
        let mut dof_coords = Vec::new();
        for v in 0..mesh.n_vertices() {
            let c = mesh.canonical_vertex(v);
            if vertex_dof[c] == usize::MAX {
                vertex_dof[c] = dof_coords.len();
                dof_coords.push(mesh.vertices[c]);
            }
            vertex_dof[v] = vertex_dof[c];
        }
        let n_vertex_dofs = dof_coords.len();
        if degree == 2 {
            dof_coords.resize(n_vertex_dofs + mesh.n_edges(), [0.0; 2]);
            for (t, edges) in mesh.triangle_edges.iter().enumerate() {
                for (e, &g) in edges.iter().enumerate() {
                    let (a, b) = local_edge_vertices(e);
                    let mut lambda = [0.0; 3];
                    lambda[a] = 0.5;
                    lambda[b] = 0.5;
                    // Last writer wins; on periodic meshes any copy will do.
                    dof_coords[n_vertex_dofs + g] = mesh.map_point(t, lambda);
                }
            }
        }
        let element_dofs = mesh
            .triangles
            .iter()
            .zip(&mesh.triangle_edges)
            .map(|(tri, edges)| {
                let mut d = [usize::MAX; MAX_LOCAL_DOFS];
                for i in 0..3 {
                    d[i] = vertex_dof[tri[i]];
                    if degree == 2 {
                        d[3 + i] = n_vertex_dofs + edges[i];
                    }
                }
                d
            })
            .collect();
        Ok(Arc::new(Self { mesh, degree, element_dofs, dof_coords }))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ndof(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn dofs_per_element(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.element_dofs[t][..self.dofs_per_element()]
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    #[inline]
    pub fn basis(&self, t: usize, lambda: [f64; 3]) -> LocalBasis {
        LocalBasis::eval(self.degree, lambda, &self.mesh.barycentric_gradients(t))
    }

    /// Iterate `(physical point, weight incl. Jacobian, basis)` over the
    /// quadrature points of element `t`.
    pub fn quadrature_points<'a>(
        &'a self,
        t: usize,
        rule: &'a TriangleQuadrature,
    ) -> impl Iterator<Item = (Point, [f64; 3], f64, LocalBasis)> + 'a {
        let jac = 2.0 * self.mesh.area(t);
        let glam = self.mesh.barycentric_gradients(t);
        rule.points.iter().zip(&rule.weights).map(move |(&lambda, &w)| {
            (self.mesh.map_point(t, lambda), lambda, w * jac, LocalBasis::eval(self.degree, lambda, &glam))
        })
    }

    /// Load vector `b_i = int f phi_i` with an element-aware integrand
    /// `f(element, lambda, x)`.
    pub fn load_vector_with(&self, degree: usize, mut f: impl FnMut(usize, [f64; 3], Point) -> f64) -> Result<Vec<f64>> {
        let rule = triangle_quadrature(degree)?;
        let mut b = vec![0.0; self.ndof()];
        for t in 0..self.mesh.n_triangles() {
            let dofs = self.element_dofs(t);
            for (x, lambda, w, basis) in self.quadrature_points(t, &rule) {
                let fx = f(t, lambda, x) * w;
                for (i, &d) in dofs.iter().enumerate() {
                    b[d] += fx * basis.values[i];
                }
            }
        }
        Ok(b)
    }

    /// Load vector of a pointwise field.
    pub fn load_vector(&self, degree: usize, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
        self.load_vector_with(degree, |_, _, x| f(x))
    }
}

/// Finite element function: nodal coefficients bound to a space.
#[derive(Debug, Clone)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return Err(Error::InvalidArgument(format!(
                "coefficient length {} does not match ndof {}",
                coeffs.len(),
                space.ndof()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.ndof();
        Self { space, coeffs: vec![0.0; n] }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value and gradient at barycentric coordinates of element `t`.
    #[inline]
    pub fn eval_local(&self, t: usize, lambda: [f64; 3]) -> (f64, Point) {
        let basis = self.space.basis(t, lambda);
        self.combine(t, &basis)
    }

    #[inline]
    pub fn combine(&self, t: usize, basis: &LocalBasis) -> (f64, Point) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (i, &d) in self.space.element_dofs(t).iter().enumerate() {
            let c = self.coeffs[d];
            v += c * basis.values[i];
            g[0] += c * basis.grads[i][0];
            g[1] += c * basis.grads[i][1];
        }
        (v, g)
    }

    /// Value and gradient at a physical point inside element `t`.
    pub fn evaluate(&self, t: usize, x: Point) -> Result<(f64, Point)> {
        let lambda = self.space.mesh.barycentric_of(t, x);
        if lambda.iter().any(|&l| l < -1e-12) {
            return Err(Error::PointOutside { element: t });
        }
        Ok(self.eval_local(t, lambda))
    }

    pub fn axpy(&mut self, a: f64, other: &FeFunction) {
        assert!(Arc::ptr_eq(&self.space, &other.space), "functions live on different spaces");
        self.coeffs.iter_mut().zip(&other.coeffs).for_each(|(x, y)| *x += a * y);
    }
}

/// Lagrange interpolant: coefficients are `f` at the dof coordinates.
pub fn interpolate_nodal(f: impl Fn(Point, f64) -> f64, t: f64, space: &Arc<FeSpace>) -> FeFunction {
    let coeffs = space.dof_coords().iter().map(|&x| f(x, t)).collect();
    FeFunction { space: Arc::clone(space), coeffs }
}

/// L2 projection onto a space, holding the factorized mass matrix.
#[derive(Debug)]
pub struct L2Projector {
    space: Arc<FeSpace>,
    solver: LuSolver,
}

impl L2Projector {
    pub fn new(space: Arc<FeSpace>, mass: SparseMatrix) -> Result<Self> {
        if mass.nrows() != space.ndof() {
            return Err(Error::InvalidArgument("mass matrix does not match the space".into()));
        }
        Ok(Self { space, solver: LuSolver::new(mass)? })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn mass(&self) -> &SparseMatrix {
        self.solver.matrix()
    }

    /// Project a field given at time `t`.
    pub fn project(&self, f: impl Fn(Point, f64) -> f64, t: f64) -> Result<FeFunction> {
        let b = self.space.load_vector(data_degree(self.space.degree()), |x| f(x, t))?;
        self.project_load(&b)
    }

    /// Project from a precomputed load vector `(f, phi_i)`.
    pub fn project_load(&self, load: &[f64]) -> Result<FeFunction> {
        let coeffs = self.solver.solve(load)?;
        FeFunction::new(Arc::clone(&self.space), coeffs)
    }
}

/// One-shot L2 projection; factorizes `mass` on every call.
pub fn l2_project(
    f: impl Fn(Point, f64) -> f64,
    t: f64,
    space: &Arc<FeSpace>,
    mass: &SparseMatrix,
) -> Result<FeFunction> {
    L2Projector::new(Arc::clone(space), mass.clone())?.project(f, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_disc, generate_square};

    fn space(nele: usize, k: usize, periodic: bool) -> Arc<FeSpace> {
        FeSpace::new(Arc::new(generate_square(nele, periodic).unwrap()), k).unwrap()
    }

    #[test]
    fn dof_counts() {
        assert_eq!(space(2, 1, false).ndof(), 9);
        assert_eq!(space(2, 2, false).ndof(), 25);
        assert_eq!(space(2, 1, true).ndof(), 4);
        assert_eq!(space(2, 2, true).ndof(), 16);
        assert!(FeSpace::new(Arc::new(generate_square(2, false).unwrap()), 3).is_err());
    }

    #[test]
    fn shared_dofs_coincide() {
        for k in [1, 2] {
            let s = FeSpace::new(Arc::new(generate_disc(16).unwrap()), k).unwrap();
            let mesh = s.mesh();
            // every local dof maps to a global dof whose coordinate matches
            for t in 0..mesh.n_triangles() {
                for (i, &d) in s.element_dofs(t).iter().enumerate() {
                    let mut lambda = [0.0; 3];
                    if i < 3 {
                        lambda[i] = 1.0;
                    } else {
                        let (a, b) = local_edge_vertices(i - 3);
                        lambda[a] = 0.5;
                        lambda[b] = 0.5;
                    }
                    let x = mesh.map_point(t, lambda);
                    let c = s.dof_coords()[d];
                    assert!((x[0] - c[0]).abs() < 1e-14 && (x[1] - c[1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        for k in [1, 2] {
            let s = space(3, k, false);
            let rule = triangle_quadrature(6).unwrap();
            for t in 0..s.mesh().n_triangles() {
                for (_, _, _, b) in s.quadrature_points(t, &rule) {
                    let sum: f64 = b.values[..b.n].iter().sum();
                    let gsum: [f64; 2] = b.grads[..b.n].iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
                    assert!((sum - 1.0).abs() < 1e-13);
                    assert!(gsum[0].abs() < 1e-12 && gsum[1].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reproduces_polynomials() {
        let p1 = space(3, 1, false);
        let u = interpolate_nodal(|x, _| x[0], 0.0, &p1);
        for t in [0, 5, 11] {
            let c = p1.mesh().barycenter(t);
            let (v, g) = u.evaluate(t, c).unwrap();
            assert!((v - c[0]).abs() < 1e-14);
            assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        }
        let p2 = space(3, 2, false);
        let u = interpolate_nodal(|x, _| x[0] * x[0], 0.0, &p2);
        let c = interpolate_nodal(|_, _| 2.5, 0.0, &p2);
        for t in [0, 7, 17] {
            let x = p2.mesh().map_point(t, [0.2, 0.5, 0.3]);
            let (v, g) = u.evaluate(t, x).unwrap();
            assert!((v - x[0] * x[0]).abs() < 1e-14);
            assert!((g[0] - 2.0 * x[0]).abs() < 1e-12 && g[1].abs() < 1e-12);
            let (v, g) = c.evaluate(t, x).unwrap();
            assert!((v - 2.5).abs() < 1e-14 && g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
        }
    }

    #[test]
    fn evaluation_outside_element_fails() {
        let s = space(2, 1, false);
        let u = FeFunction::zeros(Arc::clone(&s));
        assert!(matches!(u.evaluate(0, [0.9, 0.9]), Err(Error::PointOutside { element: 0 })));
    }

    #[test]
    fn coefficient_length_is_checked() {
        let s = space(2, 1, false);
        assert!(FeFunction::new(s, vec![0.0; 3]).is_err());
    }
}
