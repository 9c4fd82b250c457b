//! Sparse bilinear forms of the stabilized transport scheme.
//!
//! * mass        `M_ij = (phi_j, phi_i)`
//! * convection  `A_ij = (beta . grad phi_j, phi_i)`
//! * CIP         `S_ij = sum_F h_F^2 <w [grad phi_j], [grad phi_i]>_F`, with
//!   `w = |beta|` or `|beta . n_F|` and `[grad v] = grad v|_1 . n_1 + grad v|_2 . n_2`
//! * inflow      `B_ij = <|beta . n| phi_j, phi_i>_{inflow}`

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{data_degree, form_degree, FeSpace, LocalBasis, MAX_LOCAL_DOFS};
use crate::mesh::{classify_boundary, BoundaryPartition, Point};
use crate::quadrature::{edge_quadrature, triangle_quadrature};
use crate::sparse::{SparseMatrix, Triplets};
use crate::velocity::VelocityField;

/// Default stabilization parameter.
pub const DEFAULT_GAMMA: f64 = 0.01;

/// Weight in front of the gradient-jump penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CipVariant {
    /// `|beta|`
    #[default]
    AbsBeta,
    /// `|beta . n_F|`, less crosswind diffusion.
    AbsBetaNormal,
}

impl FromStr for CipVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs_beta" => Ok(Self::AbsBeta),
            "abs_beta_n" => Ok(Self::AbsBetaNormal),
            _ => Err(Error::InvalidArgument(format!("unknown CIP variant `{s}`"))),
        }
    }
}

impl fmt::Display for CipVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AbsBeta => "abs_beta",
            Self::AbsBetaNormal => "abs_beta_n",
        })
    }
}

pub fn assemble_mass(space: &FeSpace) -> Result<SparseMatrix> {
    let rule = triangle_quadrature(form_degree(space.degree()))?;
    let n = space.dofs_per_element();
    let mesh = space.mesh();
    let mut trip = Triplets::with_capacity(space.ndof(), space.ndof(), mesh.n_triangles() * n * n);
    let mut local = vec![0.0; n * n];
    for t in 0..mesh.n_triangles() {
        local.iter_mut().for_each(|v| *v = 0.0);
        for (_, _, w, b) in space.quadrature_points(t, &rule) {
            for i in 0..n {
                for j in 0..n {
                    local[i * n + j] += w * b.values[i] * b.values[j];
                }
            }
        }
        let dofs = space.element_dofs(t);
        trip.add_block(dofs, dofs, &local);
    }
    Ok(trip.into_matrix())
}

pub fn assemble_convection(space: &FeSpace, velocity: &VelocityField, t: f64) -> Result<SparseMatrix> {
    let rule = triangle_quadrature(form_degree(space.degree()))?;
    let n = space.dofs_per_element();
    let mesh = space.mesh();
    let mut trip = Triplets::with_capacity(space.ndof(), space.ndof(), mesh.n_triangles() * n * n);
    let mut local = vec![0.0; n * n];
    for el in 0..mesh.n_triangles() {
        local.iter_mut().for_each(|v| *v = 0.0);
        for (x, _, w, b) in space.quadrature_points(el, &rule) {
            let beta = velocity.eval(x, t);
            for j in 0..n {
                let adv = w * (beta[0] * b.grads[j][0] + beta[1] * b.grads[j][1]);
                for i in 0..n {
                    local[i * n + j] += adv * b.values[i];
                }
            }
        }
        let dofs = space.element_dofs(el);
        trip.add_block(dofs, dofs, &local);
    }
    Ok(trip.into_matrix())
}

/// Gradient-jump penalty over interior edges (without the factor gamma).
pub fn assemble_cip(space: &FeSpace, velocity: &VelocityField, t: f64, variant: CipVariant) -> Result<SparseMatrix> {
    let rule = edge_quadrature(form_degree(space.degree()))?;
    let n = space.dofs_per_element();
    let mesh = space.mesh();
    let k = space.degree();
    let mut trip = Triplets::with_capacity(space.ndof(), space.ndof(), mesh.interior_edges.len() * 4 * n * n);
    let mut dofs = [0usize; 2 * MAX_LOCAL_DOFS];
    let mut jump = [0.0; 2 * MAX_LOCAL_DOFS];
    let mut local = vec![0.0; 4 * n * n];
    for edge in &mesh.interior_edges {
        let (l, r) = (edge.left.triangle, edge.right.triangle);
        dofs[..n].copy_from_slice(space.element_dofs(l));
        dofs[n..2 * n].copy_from_slice(space.element_dofs(r));
        let (gl, gr) = (mesh.barycentric_gradients(l), mesh.barycentric_gradients(r));
        let nrm = edge.normal;
        let scale = edge.length * edge.length * edge.length;
        local.iter_mut().for_each(|v| *v = 0.0);
        for (&s, &ws) in rule.points.iter().zip(&rule.weights) {
            let lam_l = edge.left.barycentric(s);
            let bl = LocalBasis::eval(k, lam_l, &gl);
            let br = LocalBasis::eval(k, edge.right.barycentric(s), &gr);
            let x = mesh.map_point(l, lam_l);
            let beta = velocity.eval(x, t);
            let weight = match variant {
                CipVariant::AbsBeta => beta[0].hypot(beta[1]),
                CipVariant::AbsBetaNormal => (beta[0] * nrm[0] + beta[1] * nrm[1]).abs(),
            };
            for i in 0..n {
                jump[i] = bl.grads[i][0] * nrm[0] + bl.grads[i][1] * nrm[1];
                jump[n + i] = -(br.grads[i][0] * nrm[0] + br.grads[i][1] * nrm[1]);
            }
            let c = scale * ws * weight;
            for a in 0..2 * n {
                for b in 0..2 * n {
                    local[a * 2 * n + b] += c * jump[a] * jump[b];
                }
            }
        }
        trip.add_block(&dofs[..2 * n], &dofs[..2 * n], &local);
    }
    Ok(trip.into_matrix())
}

/// Iterate quadrature data on the inflow edges: `(x, weight * length, basis, dofs)`.
fn for_inflow_points(
    space: &FeSpace,
    partition: &BoundaryPartition,
    degree: usize,
    mut body: impl FnMut(Point, [f64; 2], f64, &LocalBasis, &[usize]),
) -> Result<()> {
    let mesh = space.mesh();
    if mesh.is_periodic() {
        return Err(Error::InvalidArgument("periodic mesh has no inflow boundary".into()));
    }
    let rule = edge_quadrature(degree)?;
    for &e in &partition.inflow_edges {
        let edge = &mesh.boundary_edges[e];
        let tri = edge.side.triangle;
        let glam = mesh.barycentric_gradients(tri);
        let dofs = space.element_dofs(tri);
        for (&s, &ws) in rule.points.iter().zip(&rule.weights) {
            let lambda = edge.side.barycentric(s);
            let basis = LocalBasis::eval(space.degree(), lambda, &glam);
            body(mesh.map_point(tri, lambda), edge.normal, ws * edge.length, &basis, dofs);
        }
    }
    Ok(())
}

pub fn assemble_inflow_matrix(
    space: &FeSpace,
    partition: &BoundaryPartition,
    velocity: &VelocityField,
    t: f64,
) -> Result<SparseMatrix> {
    let n = space.dofs_per_element();
    let mut trip = Triplets::new(space.ndof(), space.ndof());
    let mut local = vec![0.0; n * n];
    for_inflow_points(space, partition, form_degree(space.degree()), |x, nrm, w, b, dofs| {
        let beta = velocity.eval(x, t);
        let flux = (beta[0] * nrm[0] + beta[1] * nrm[1]).abs() * w;
        for i in 0..n {
            for j in 0..n {
                local[i * n + j] = flux * b.values[i] * b.values[j];
            }
        }
        trip.add_block(dofs, dofs, &local);
    })?;
    Ok(trip.into_matrix())
}

/// `b_i = <|beta . n| g, phi_i>_{inflow}` with `g(x, t)`.
pub fn assemble_inflow_rhs(
    space: &FeSpace,
    partition: &BoundaryPartition,
    velocity: &VelocityField,
    g: impl Fn(Point, f64) -> f64,
    t: f64,
) -> Result<Vec<f64>> {
    let mut b = vec![0.0; space.ndof()];
    for_inflow_points(space, partition, data_degree(space.degree()), |x, nrm, w, basis, dofs| {
        let beta = velocity.eval(x, t);
        let c = (beta[0] * nrm[0] + beta[1] * nrm[1]).abs() * w * g(x, t);
        for (i, &d) in dofs.iter().enumerate() {
            b[d] += c * basis.values[i];
        }
    })?;
    Ok(b)
}

/// `b_i = (f(., t), phi_i)`.
pub fn assemble_source(space: &FeSpace, f: impl Fn(Point, f64) -> f64, t: f64) -> Result<Vec<f64>> {
    space.load_vector(data_degree(space.degree()), |x| f(x, t))
}

fn assemble_gradient_form(space: &FeSpace, mut dir: impl FnMut(Point) -> Option<Point>) -> Result<SparseMatrix> {
    let rule = triangle_quadrature(form_degree(space.degree()))?;
    let n = space.dofs_per_element();
    let mesh = space.mesh();
    let mut trip = Triplets::with_capacity(space.ndof(), space.ndof(), mesh.n_triangles() * n * n);
    let mut local = vec![0.0; n * n];
    let mut d = [0.0; MAX_LOCAL_DOFS];
    for el in 0..mesh.n_triangles() {
        local.iter_mut().for_each(|v| *v = 0.0);
        for (x, _, w, b) in space.quadrature_points(el, &rule) {
            match dir(x) {
                Some(beta) => {
                    for i in 0..n {
                        d[i] = beta[0] * b.grads[i][0] + beta[1] * b.grads[i][1];
                    }
                    for i in 0..n {
                        for j in 0..n {
                            local[i * n + j] += w * d[i] * d[j];
                        }
                    }
                }
                None => {
                    for i in 0..n {
                        for j in 0..n {
                            local[i * n + j] += w * (b.grads[i][0] * b.grads[j][0] + b.grads[i][1] * b.grads[j][1]);
                        }
                    }
                }
            }
        }
        let dofs = space.element_dofs(el);
        trip.add_block(dofs, dofs, &local);
    }
    Ok(trip.into_matrix())
}

/// `K_ij = (grad phi_j, grad phi_i)`.
pub fn assemble_stiffness(space: &FeSpace) -> Result<SparseMatrix> {
    assemble_gradient_form(space, |_| None)
}

/// `G_ij = (beta . grad phi_j, beta . grad phi_i)`; exact for affine `beta`.
pub fn assemble_streamline(space: &FeSpace, velocity: &VelocityField, t: f64) -> Result<SparseMatrix> {
    assemble_gradient_form(space, |x| Some(velocity.eval(x, t)))
}

/// All matrices of the scheme for a steady velocity field.
#[derive(Debug)]
pub struct SystemOperators {
    pub space: Arc<FeSpace>,
    pub velocity: VelocityField,
    pub mass: SparseMatrix,
    pub convection: SparseMatrix,
    /// Unscaled CIP matrix; the scheme uses `gamma * cip`.
    pub cip: SparseMatrix,
    /// Absent on periodic meshes.
    pub inflow: Option<SparseMatrix>,
    pub partition: Option<BoundaryPartition>,
    pub variant: CipVariant,
    pub gamma: f64,
    /// Time at which `beta` was sampled.
    pub assembled_at: f64,
}

impl SystemOperators {
    pub fn assemble(
        space: Arc<FeSpace>,
        velocity: VelocityField,
        t: f64,
        variant: CipVariant,
        gamma: f64,
    ) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
        }
        let mass = assemble_mass(&space)?;
        let convection = assemble_convection(&space, &velocity, t)?;
        let cip = assemble_cip(&space, &velocity, t, variant)?;
        let (inflow, partition) = if space.mesh().is_periodic() {
            (None, None)
        } else {
            let p = classify_boundary(space.mesh(), &velocity, t)?;
            (Some(assemble_inflow_matrix(&space, &p, &velocity, t)?), Some(p))
        };
        Ok(Self { space, velocity, mass, convection, cip, inflow, partition, variant, gamma, assembled_at: t })
    }

    pub fn ndof(&self) -> usize {
        self.space.ndof()
    }

    /// `A + B + gamma S`, the spatial operator of the scheme.
    pub fn spatial_operator(&self) -> SparseMatrix {
        let mut terms = vec![(1.0, &self.convection), (self.gamma, &self.cip)];
        if let Some(b) = &self.inflow {
            terms.push((1.0, b));
        }
        SparseMatrix::linear_combination(&terms)
    }
}
