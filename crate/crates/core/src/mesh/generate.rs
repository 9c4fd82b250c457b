use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{marker, signed_area, Mesh, Point};
use crate::error::{Error, Result};

/// Coordinate tolerance used to match vertices on opposite sides of the
/// periodic unit square.
pub const PERIODIC_MATCH_TOLERANCE: f64 = 1e-9;

/// Structured `nele x nele` grid on `[0,1]^2`, each cell cut along its
/// positive-slope diagonal.
pub fn generate_square(nele: usize, periodic: bool) -> Result<Mesh> {
    if nele == 0 {
        return Err(Error::InvalidArgument("nele must be at least 1".into()));
    }
    let np = nele + 1;
    let id = |i: usize, j: usize| j * np + i;
    let step = 1.0 / nele as f64;

    let mut vertices = Vec::with_capacity(np * np);
    let mut vertex_markers = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            // Exact 1.0 on the far sides; i * step can round below it.
            let x = if i == nele { 1.0 } else { i as f64 * step };
            let y = if j == nele { 1.0 } else { j as f64 * step };
            vertices.push([x, y]);
            let m = if j == 0 {
                marker::BOTTOM
            } else if i == nele {
                marker::RIGHT
            } else if j == nele {
                marker::TOP
            } else if i == 0 {
                marker::LEFT
            } else {
                0
            };
            vertex_markers.push(m);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nele * nele);
    for j in 0..nele {
        for i in 0..nele {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    let mut bmarkers = HashMap::new();
    if !periodic {
        for k in 0..nele {
            let mut put = |p: usize, q: usize, m: i32| {
                bmarkers.insert((p.min(q), p.max(q)), m);
            };
            put(id(k, 0), id(k + 1, 0), marker::BOTTOM);
            put(id(nele, k), id(nele, k + 1), marker::RIGHT);
            put(id(k, nele), id(k + 1, nele), marker::TOP);
            put(id(0, k), id(0, k + 1), marker::LEFT);
        }
    }

    let periodic_map = if periodic { Some(identify_unit_square(&vertices)?) } else { None };
    Mesh::from_parts(vertices, vertex_markers, triangles, periodic_map, &bmarkers)
}

/// Identify vertices on opposite sides of `[0,1]^2` by coordinate matching.
/// Each vertex maps to the lowest-index vertex of its class.
pub(crate) fn identify_unit_square(vertices: &[Point]) -> Result<Vec<usize>> {
    let tol = PERIODIC_MATCH_TOLERANCE;
    let wrap = |c: f64| if (c - 1.0).abs() < tol { 0.0 } else { c };
    let quant = |c: f64| (c / tol).round() as i64;
    let mut first: HashMap<(i64, i64), usize> = HashMap::new();
    let mut map = Vec::with_capacity(vertices.len());
    for (v, p) in vertices.iter().enumerate() {
        if p.iter().any(|&c| c < -tol || c > 1.0 + tol) {
            return Err(Error::InvalidArgument(format!("vertex {v} lies outside the unit square")));
        }
        let key = (quant(wrap(p[0])), quant(wrap(p[1])));
        map.push(*first.entry(key).or_insert(v));
    }
    Ok(map)
}

/// Unit disc from concentric rings.
///
/// `nrings = ceil(nele/8)` rings at radii `i/nrings`, ring `i` carrying
/// `ceil(nele * r_i)` equally spaced vertices (so the outer ring has exactly
/// `nele`). Consecutive rings are stitched by marching both vertex circles
/// in angle; the innermost ring is fanned to the centre.
pub fn generate_disc(nele: usize) -> Result<Mesh> {
    if nele < 8 || nele % 4 != 0 {
        return Err(Error::InvalidArgument(format!(
            "disc needs nele >= 8 and divisible by 4, got {nele}"
        )));
    }
    let nrings = nele.div_ceil(8);
    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    let mut vertex_markers = vec![0];
    // (first vertex index, count, angular offset in units of the spacing)
    let mut rings: Vec<(usize, usize, f64)> = Vec::with_capacity(nrings);
    for i in 1..=nrings {
        let r = i as f64 / nrings as f64;
        let count = if i == nrings { nele } else { (nele as f64 * r - 1e-9).ceil() as usize };
        let start = vertices.len();
        // Alternate rings are staggered by half a spacing so radial spokes
        // do not line up.
        let offset = if i % 2 == 0 { 0.5 } else { 0.0 };
        for j in 0..count {
            let (s, c) = (2.0 * PI * (j as f64 + offset) / count as f64).sin_cos();
            if i == nrings {
                vertices.push([c, s]);
            } else {
                vertices.push([r * c, r * s]);
            }
            vertex_markers.push(if i == nrings { marker::CIRCLE } else { 0 });
        }
        rings.push((start, count, offset));
    }

    let mut triangles = Vec::new();
    let (s0, n0, _) = rings[0];
    for j in 0..n0 {
        triangles.push([0, s0 + j, s0 + (j + 1) % n0]);
    }
    for w in rings.windows(2) {
        let ((si, ni, oi), (so, no, oo)) = (w[0], w[1]);
        let ai = |k: usize| (k as f64 + oi) / ni as f64;
        let ao = |k: usize| (k as f64 + oo) / no as f64;
        let (mut i, mut j) = (0, 0);
        while i < ni || j < no {
            let advance_outer = j < no && (i == ni || ao(j + 1) <= ai(i + 1));
            let tri = if advance_outer {
                j += 1;
                [si + (i % ni), so + (j - 1) % no, so + j % no]
            } else {
                i += 1;
                [si + (i - 1) % ni, so + j % no, si + i % ni]
            };
            let [a, b, c] = tri;
            if signed_area(vertices[a], vertices[b], vertices[c]) > 0.0 {
                triangles.push(tri);
            } else {
                triangles.push([a, c, b]);
            }
        }
    }

    let (sb, nb, _) = rings[nrings - 1];
    let bmarkers = (0..nb)
        .map(|j| {
            let (p, q) = (sb + j, sb + (j + 1) % nb);
            ((p.min(q), p.max(q)), marker::CIRCLE)
        })
        .collect();
    Mesh::from_parts(vertices, vertex_markers, triangles, None, &bmarkers)
}

/// Largest interior-vertex displacement of [`generate_disc_perturbed`],
/// relative to the shortest edge at that vertex.
pub const DISC_PERTURBATION: f64 = 0.25;

/// Seed used by the disc scenarios.
pub const DISC_SEED: u64 = 1;

/// Ring disc with every interior vertex moved in a random direction by less
/// than [`DISC_PERTURBATION`] times its shortest incident edge. Connectivity
/// and boundary vertices are those of [`generate_disc`]; the result depends
/// only on `nele` and `seed`.
pub fn generate_disc_perturbed(nele: usize, seed: u64) -> Result<Mesh> {
    let ring = generate_disc(nele)?;
    let mut vertices = ring.vertices.clone();
    let mut lmin = vec![f64::INFINITY; vertices.len()];
    for tri in &ring.triangles {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let l = (vertices[a][0] - vertices[b][0]).hypot(vertices[a][1] - vertices[b][1]);
            lmin[a] = lmin[a].min(l);
            lmin[b] = lmin[b].min(l);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (i, p) in vertices.iter_mut().enumerate() {
        if ring.vertex_markers[i] != 0 {
            continue;
        }
        let a: f64 = rng.gen_range(0.0..2.0 * PI);
        let r = DISC_PERTURBATION * lmin[i] * rng.gen::<f64>();
        p[0] += r * a.cos();
        p[1] += r * a.sin();
    }
    let bmarkers: HashMap<(usize, usize), i32> = ring
        .boundary_edges
        .iter()
        .map(|e| {
            let [p, q] = e.vertices;
            ((p.min(q), p.max(q)), e.marker)
        })
        .collect();
    Mesh::from_parts(vertices, ring.vertex_markers.clone(), ring.triangles.clone(), None, &bmarkers)
}
