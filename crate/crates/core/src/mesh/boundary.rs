use super::Mesh;
use crate::error::{Error, Result};
use crate::velocity::VelocityField;

/// `|beta . n|` below this at an edge midpoint counts as outflow.
pub const EDGE_FLUX_TOLERANCE: f64 = 1e-12;

/// Split of the boundary edges (indices into `Mesh::boundary_edges`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryPartition {
    pub inflow_edges: Vec<usize>,
    pub outflow_edges: Vec<usize>,
}

/// An edge is inflow iff `beta(x_mid, t) . n < -EDGE_FLUX_TOLERANCE`.
pub fn classify_boundary(mesh: &Mesh, velocity: &VelocityField, t: f64) -> Result<BoundaryPartition> {
    if mesh.is_periodic() {
        return Err(Error::InvalidArgument("periodic mesh has no boundary to classify".into()));
    }
    let mut part = BoundaryPartition::default();
    for (i, e) in mesh.boundary_edges.iter().enumerate() {
        let (a, b) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let beta = velocity.eval(mid, t);
        let flux = beta[0] * e.normal[0] + beta[1] * e.normal[1];
        if flux < -EDGE_FLUX_TOLERANCE {
            part.inflow_edges.push(i);
        } else {
            part.outflow_edges.push(i);
        }
    }
    Ok(part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_disc, generate_square, marker};

    fn markers(mesh: &Mesh, edges: &[usize]) -> Vec<i32> {
        let mut m: Vec<i32> = edges.iter().map(|&e| mesh.boundary_edges[e].marker).collect();
        m.sort();
        m.dedup();
        m
    }

    #[test]
    fn square_left_side_is_inflow() {
        let m = generate_square(4, false).unwrap();
        let p = classify_boundary(&m, &VelocityField::constant([1.0, 0.0]), 0.0).unwrap();
        assert_eq!(markers(&m, &p.inflow_edges), vec![marker::LEFT]);
        assert_eq!(markers(&m, &p.outflow_edges), vec![marker::BOTTOM, marker::RIGHT, marker::TOP]);
        assert_eq!(p.inflow_edges.len() + p.outflow_edges.len(), m.boundary_edges.len());

        let p = classify_boundary(&m, &VelocityField::constant([-1.0, 0.0]), 0.0).unwrap();
        assert_eq!(markers(&m, &p.inflow_edges), vec![marker::RIGHT]);
    }

    #[test]
    fn rotating_disc_has_no_inflow() {
        let m = generate_disc(40).unwrap();
        let p = classify_boundary(&m, &VelocityField::rotation(), 0.0).unwrap();
        assert!(p.inflow_edges.is_empty());
        assert_eq!(p.outflow_edges.len(), 40);
    }

    #[test]
    fn periodic_mesh_is_rejected() {
        let m = generate_square(2, true).unwrap();
        assert!(classify_boundary(&m, &VelocityField::constant([1.0, 0.0]), 0.0).is_err());
    }
}
