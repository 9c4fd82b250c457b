//! Gauss rules on the reference triangle and the unit segment.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss-Legendre
//! rules: every weight is positive and the exactness degree is arbitrary.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 10;

/// Rule on the reference triangle `{(0,0),(1,0),(0,1)}`; points are given in
/// barycentric coordinates and weights sum to the reference area 1/2.
#[derive(Debug, Clone)]
pub struct TriangleQuadrature {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss-Legendre rule on `[0,1]`; weights sum to 1.
#[derive(Debug, Clone)]
pub struct EdgeQuadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1,1]` by Newton
/// iteration on the three-term recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n, p0 = P_{n-1}
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss-Legendre rule on `[0,1]` exact for degree `d`.
pub fn edge_quadrature(d: usize) -> Result<EdgeQuadrature> {
    if d > MAX_DEGREE {
        return Err(Error::Unsupported(format!("edge quadrature degree {d} > {MAX_DEGREE}")));
    }
    let n = (d + 2) / 2;
    let (x, w) = gauss_legendre(n);
    Ok(EdgeQuadrature {
        points: x.iter().map(|&xi| 0.5 * (xi + 1.0)).collect(),
        weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        degree: d,
    })
}

/// Collapsed Gauss rule on the reference triangle exact for degree `d`.
pub fn triangle_quadrature(d: usize) -> Result<TriangleQuadrature> {
    if d > MAX_DEGREE {
        return Err(Error::Unsupported(format!("triangle quadrature degree {d} > {MAX_DEGREE}")));
    }
    // The collapse Jacobian (1 - u) raises the degree in u by one.
    let n = (d + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let unit: Vec<(f64, f64)> = x.iter().zip(&w).map(|(&xi, &wi)| (0.5 * (xi + 1.0), 0.5 * wi)).collect();
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for &(u, wu) in &unit {
        for &(v, wv) in &unit {
            let (px, py) = (u, v * (1.0 - u));
            points.push([1.0 - px - py, px, py]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    Ok(TriangleQuadrature { points, weights, degree: d })
}
