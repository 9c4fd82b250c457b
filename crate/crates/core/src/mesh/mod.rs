//! Conforming triangulations with full edge topology.
//!
//! Triangles always reference *geometric* vertices, so element maps are
//! plain affine maps even on periodic meshes. Periodicity lives entirely in
//! [`Mesh::periodic_map`], which sends each vertex to the representative of
//! its identification class; edge topology and degree-of-freedom numbering
//! are built on top of those classes.

mod boundary;
mod generate;
mod io;

use std::collections::HashMap;

pub use boundary::{classify_boundary, BoundaryPartition, EDGE_FLUX_TOLERANCE};
pub use generate::{
    generate_disc, generate_disc_perturbed, generate_square, DISC_PERTURBATION, DISC_SEED, PERIODIC_MATCH_TOLERANCE,
};
pub use io::{export_mesh, import_mesh, parse_mesh, write_mesh, MeshWarning};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Boundary markers used by the built-in generators.
pub mod marker {
    pub const BOTTOM: i32 = 1;
    pub const RIGHT: i32 = 2;
    pub const TOP: i32 = 3;
    pub const LEFT: i32 = 4;
    pub const CIRCLE: i32 = 1;
}

/// One side of an edge as seen from an owning triangle.
///
/// Local edge `e` joins local vertices `(e+1)%3 -> (e+2)%3`, i.e. it is the
/// edge opposite local vertex `e`, traversed counter-clockwise. The edge
/// parameter `s in [0,1]` runs from `InteriorEdge::vertices[0]` to
/// `vertices[1]`; `reversed` records that this triangle traverses it the
/// other way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSide {
    pub triangle: usize,
    pub local_edge: usize,
    pub reversed: bool,
}

impl EdgeSide {
    /// Barycentric coordinates (w.r.t. the owning triangle) of the point at
    /// edge parameter `s`.
    pub fn barycentric(&self, s: f64) -> [f64; 3] {
        let (a, b) = local_edge_vertices(self.local_edge);
        let mut lambda = [0.0; 3];
        if self.reversed {
            lambda[a] = s;
            lambda[b] = 1.0 - s;
        } else {
            lambda[a] = 1.0 - s;
            lambda[b] = s;
        }
        lambda
    }
}

#[derive(Debug, Clone)]
pub struct InteriorEdge {
    /// Geometric endpoints as traversed by the left triangle.
    pub vertices: [usize; 2],
    pub left: EdgeSide,
    pub right: EdgeSide,
    /// Unit normal pointing from the left triangle into the right one.
    pub normal: Point,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub side: EdgeSide,
    /// Outward unit normal.
    pub normal: Point,
    pub length: f64,
    pub marker: i32,
}

/// Reference to an edge in the global numbering: interior edges come first,
/// boundary edges follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRef {
    Interior(usize),
    Boundary(usize),
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub vertex_markers: Vec<i32>,
    pub triangles: Vec<[usize; 3]>,
    pub interior_edges: Vec<InteriorEdge>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Vertex -> class representative for periodic meshes.
    pub periodic_map: Option<Vec<usize>>,
    /// Global edge id of each local edge of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Largest edge length.
    pub h: f64,
}

/// Local vertex pair `(a, b)` of local edge `e`, counter-clockwise.
pub fn local_edge_vertices(e: usize) -> (usize, usize) {
    ((e + 1) % 3, (e + 2) % 3)
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    0.5 * (u[0] * v[1] - u[1] * v[0])
}

fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

impl Mesh {
    /// Build the full topology from raw vertex/triangle arrays.
    ///
    /// `boundary_markers` assigns markers to boundary edges keyed by their
    /// sorted geometric vertex pair; unlisted boundary edges get marker 0.
    pub fn from_parts(
        vertices: Vec<Point>,
        vertex_markers: Vec<i32>,
        triangles: Vec<[usize; 3]>,
        periodic_map: Option<Vec<usize>>,
        boundary_markers: &HashMap<(usize, usize), i32>,
    ) -> Result<Self> {
        if vertex_markers.len() != vertices.len() {
            return Err(Error::InvalidArgument("vertex marker count mismatch".into()));
        }
        if let Some(map) = &periodic_map {
            if map.len() != vertices.len() {
                return Err(Error::InvalidArgument("periodic map length mismatch".into()));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!("triangle {t} has an out-of-range vertex")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} is not counter-clockwise (signed area {area:e})"
                )));
            }
        }

        let canon = |v: usize| periodic_map.as_ref().map_or(v, |m| m[v]);
        // Edge key: canonical endpoints plus the quantised edge vector, with
        // the orientation chosen so that the vector is lexicographically
        // positive. The vector disambiguates distinct edges whose endpoint
        // classes coincide on very coarse periodic meshes.
        type Key = (usize, usize, i64, i64);
        let quant = |x: f64| (x * 1e6).round() as i64;
        let mut index: HashMap<Key, usize> = HashMap::new();
        let mut sides: Vec<Vec<(EdgeSide, [usize; 2])>> = Vec::new();
        let mut triangle_slots = vec![[usize::MAX; 3]; triangles.len()];
        let mut h: f64 = 0.0;

        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (la, lb) = local_edge_vertices(e);
                let (a, b) = (tri[la], tri[lb]);
                let d = sub(vertices[b], vertices[a]);
                h = h.max(norm(d));
                let positive = d[0] > 1e-12 || (d[0].abs() <= 1e-12 && d[1] > 0.0);
                let key = if positive {
                    (canon(a), canon(b), quant(d[0]), quant(d[1]))
                } else {
                    (canon(b), canon(a), quant(-d[0]), quant(-d[1]))
                };
                let slot = *index.entry(key).or_insert_with(|| {
                    sides.push(Vec::new());
                    sides.len() - 1
                });
                sides[slot].push((EdgeSide { triangle: t, local_edge: e, reversed: !positive }, [a, b]));
                triangle_slots[t][e] = slot;
            }
        }

        let mut interior_edges = Vec::new();
        let mut boundary_edges = Vec::new();
        let mut slot_to_edge = vec![EdgeRef::Interior(0); sides.len()];
        for (slot, group) in sides.iter().enumerate() {
            match group.as_slice() {
                [(side, [a, b])] => {
                    let d = sub(vertices[*b], vertices[*a]);
                    let len = norm(d);
                    let key = ((*a).min(*b), (*a).max(*b));
                    slot_to_edge[slot] = EdgeRef::Boundary(boundary_edges.len());
                    boundary_edges.push(BoundaryEdge {
                        vertices: [*a, *b],
                        side: EdgeSide { reversed: false, ..*side },
                        normal: [d[1] / len, -d[0] / len],
                        length: len,
                        marker: boundary_markers.get(&key).copied().unwrap_or(0),
                    });
                }
                [(left, [a, b]), (right, _)] => {
                    let d = sub(vertices[*b], vertices[*a]);
                    let len = norm(d);
                    // Parameter runs along the left triangle's traversal.
                    let right_reversed = left.reversed != right.reversed;
                    slot_to_edge[slot] = EdgeRef::Interior(interior_edges.len());
                    interior_edges.push(InteriorEdge {
                        vertices: [*a, *b],
                        left: EdgeSide { reversed: false, ..*left },
                        right: EdgeSide { reversed: right_reversed, ..*right },
                        normal: [d[1] / len, -d[0] / len],
                        length: len,
                    });
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "non-manifold edge shared by {} triangles",
                        group.len()
                    )))
                }
            }
        }
        let n_interior = interior_edges.len();
        let global = |r: EdgeRef| match r {
            EdgeRef::Interior(i) => i,
            EdgeRef::Boundary(i) => n_interior + i,
        };
        let triangle_edges = triangle_slots
            .iter()
            .map(|s| [global(slot_to_edge[s[0]]), global(slot_to_edge[s[1]]), global(slot_to_edge[s[2]])])
            .collect();

        Ok(Self {
            vertices,
            vertex_markers,
            triangles,
            interior_edges,
            boundary_edges,
            periodic_map,
            triangle_edges,
            h,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.interior_edges.len() + self.boundary_edges.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic_map.is_some()
    }

    pub fn edge_ref(&self, global: usize) -> EdgeRef {
        if global < self.interior_edges.len() {
            EdgeRef::Interior(global)
        } else {
            EdgeRef::Boundary(global - self.interior_edges.len())
        }
    }

    /// Class representative of a vertex (itself on non-periodic meshes).
    pub fn canonical_vertex(&self, v: usize) -> usize {
        self.periodic_map.as_ref().map_or(v, |m| m[v])
    }

    /// Number of distinct vertices after periodic identification.
    pub fn n_vertex_classes(&self) -> usize {
        match &self.periodic_map {
            None => self.vertices.len(),
            Some(m) => m.iter().enumerate().filter(|(v, c)| *v == **c).count(),
        }
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn barycenter(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Physical point of barycentric coordinates `lambda` in triangle `t`.
    pub fn map_point(&self, t: usize, lambda: [f64; 3]) -> Point {
        let p = self.triangle_points(t);
        [
            lambda[0] * p[0][0] + lambda[1] * p[1][0] + lambda[2] * p[2][0],
            lambda[0] * p[0][1] + lambda[1] * p[1][1] + lambda[2] * p[2][1],
        ]
    }

    /// Barycentric coordinates of a physical point w.r.t. triangle `t`.
    pub fn barycentric_of(&self, t: usize, x: Point) -> [f64; 3] {
        let [a, b, c] = self.triangle_points(t);
        let area = signed_area(a, b, c);
        let l1 = signed_area(a, x, c) / area;
        let l2 = signed_area(a, b, x) / area;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Gradients of the three barycentric coordinates (constant per element).
    pub fn barycentric_gradients(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangle_points(t);
        let two_area = 2.0 * signed_area(a, b, c);
        [
            [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
            [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
            [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
        ]
    }

    /// Circumradius over inradius of triangle `t` (2 for an equilateral).
    pub fn shape_ratio(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        let (la, lb, lc) = (norm(sub(b, c)), norm(sub(c, a)), norm(sub(a, b)));
        let area = signed_area(a, b, c);
        let circumradius = la * lb * lc / (4.0 * area);
        let inradius = area / (0.5 * (la + lb + lc));
        circumradius / inradius
    }

    /// Worst shape ratio over the mesh.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.shape_ratio(t)).fold(0.0, f64::max)
    }

    /// Uniform red refinement: every triangle is split into four through its
    /// edge midpoints. Child `4t + j` has parent `t`. Boundary markers and
    /// periodic identification carry over.
    pub fn refine_uniform(&self) -> Result<(Mesh, Vec<usize>)> {
        let mut vertices = self.vertices.clone();
        let mut vertex_markers = self.vertex_markers.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut bmarkers: HashMap<(usize, usize), i32> = HashMap::new();
        let boundary_marker_of: HashMap<(usize, usize), i32> = self
            .boundary_edges
            .iter()
            .map(|e| ((e.vertices[0].min(e.vertices[1]), e.vertices[0].max(e.vertices[1])), e.marker))
            .collect();

        let mut triangles = Vec::with_capacity(4 * self.n_triangles());
        let mut parent = Vec::with_capacity(4 * self.n_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut mid = |a: usize, b: usize| -> usize {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let (pa, pb) = (self.vertices[a], self.vertices[b]);
                    vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                    let m = boundary_marker_of.get(&key).copied();
                    vertex_markers.push(m.unwrap_or(0));
                    let id = vertices.len() - 1;
                    if let Some(m) = m {
                        bmarkers.insert((key.0.min(id), key.0.max(id)), m);
                        bmarkers.insert((key.1.min(id), key.1.max(id)), m);
                    }
                    id
                })
            };
            let [v0, v1, v2] = *tri;
            let (m01, m12, m20) = (mid(v0, v1), mid(v1, v2), mid(v2, v0));
            triangles.push([v0, m01, m20]);
            triangles.push([m01, v1, m12]);
            triangles.push([m20, m12, v2]);
            triangles.push([m01, m12, m20]);
            parent.extend([t; 4]);
        }
        let periodic_map = if self.is_periodic() {
            Some(generate::identify_unit_square(&vertices)?)
        } else {
            None
        };
        let mesh = Mesh::from_parts(vertices, vertex_markers, triangles, periodic_map, &bmarkers)?;
        Ok((mesh, parent))
    }

    /// Check the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for t in 0..self.n_triangles() {
            if self.area(t) <= 0.0 {
                return Err(format!("triangle {t} has non-positive area"));
            }
        }
        let mut count = vec![0usize; self.n_edges()];
        for te in &self.triangle_edges {
            for &e in te {
                count[e] += 1;
            }
        }
        for (e, &c) in count.iter().enumerate() {
            let want = if e < self.interior_edges.len() { 2 } else { 1 };
            if c != want {
                return Err(format!("edge {e} is shared by {c} triangles, expected {want}"));
            }
        }
        let normals = self
            .interior_edges
            .iter()
            .map(|e| e.normal)
            .chain(self.boundary_edges.iter().map(|e| e.normal));
        for n in normals {
            if (norm(n) - 1.0).abs() > 1e-12 {
                return Err(format!("normal {n:?} is not unit length"));
            }
        }
        if self.is_periodic() && !self.boundary_edges.is_empty() {
            return Err("periodic mesh has boundary edges".into());
        }
        Ok(())
    }
}
