//! Transport velocity fields.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

pub type VelocityFn = dyn Fn(Point, f64) -> Point + Send + Sync;

#[derive(Clone)]
pub enum VelocityField {
    /// Uniform translation.
    Constant(Point),
    /// Solid-body rotation `beta = omega * (y, -x)` (clockwise for omega > 0).
    Rotation { angular_speed: f64 },
    /// Arbitrary field; no closed-form characteristics.
    Custom { eval: Arc<VelocityFn>, divergence_free: bool },
}

impl fmt::Debug for VelocityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(b) => f.debug_tuple("Constant").field(b).finish(),
            Self::Rotation { angular_speed } => {
                f.debug_struct("Rotation").field("angular_speed", angular_speed).finish()
            }
            Self::Custom { divergence_free, .. } => {
                f.debug_struct("Custom").field("divergence_free", divergence_free).finish_non_exhaustive()
            }
        }
    }
}

impl VelocityField {
    pub fn constant(beta: Point) -> Self {
        Self::Constant(beta)
    }

    pub fn zero() -> Self {
        Self::Constant([0.0, 0.0])
    }

    /// `beta = (y, -x)`.
    pub fn rotation() -> Self {
        Self::Rotation { angular_speed: 1.0 }
    }

    pub fn custom(f: impl Fn(Point, f64) -> Point + Send + Sync + 'static, divergence_free: bool) -> Self {
        Self::Custom { eval: Arc::new(f), divergence_free }
    }

    #[inline]
    pub fn eval(&self, x: Point, t: f64) -> Point {
        match self {
            Self::Constant(b) => *b,
            Self::Rotation { angular_speed: w } => [w * x[1], -w * x[0]],
            Self::Custom { eval, .. } => eval(x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant(b) if b[0] == 0.0 && b[1] == 0.0)
    }

    pub fn divergence_free(&self) -> bool {
        match self {
            Self::Constant(_) | Self::Rotation { .. } => true,
            Self::Custom { divergence_free, .. } => *divergence_free,
        }
    }

    /// `sup |beta|` over the mesh at time `t`, sampled at vertices and edge
    /// midpoints (exact for fields affine in space).
    pub fn sup_norm(&self, mesh: &Mesh, t: f64) -> f64 {
        let mag = |x: Point| {
            let b = self.eval(x, t);
            b[0].hypot(b[1])
        };
        let at_vertices = mesh.vertices.iter().map(|&x| mag(x));
        let at_mids = mesh.triangles.iter().flat_map(|tri| {
            (0..3).map(move |e| {
                let (a, b) = (mesh.vertices[tri[e]], mesh.vertices[tri[(e + 1) % 3]]);
                mag([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
            })
        });
        at_vertices.chain(at_mids).fold(0.0, f64::max)
    }

    /// Largest central-difference divergence over `samples` random points of
    /// the box `[lo, hi]^2` at time `t`.
    pub fn max_divergence(&self, lo: f64, hi: f64, t: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = 1e-5;
        (0..samples)
            .map(|_| {
                let x = [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
                let dbx = self.eval([x[0] + eps, x[1]], t)[0] - self.eval([x[0] - eps, x[1]], t)[0];
                let dby = self.eval([x[0], x[1] + eps], t)[1] - self.eval([x[0], x[1] - eps], t)[1];
                ((dbx + dby) / (2.0 * eps)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Foot at time 0 of the characteristic through `x` at time `t`.
    pub fn backward_flow(&self, x: Point, t: f64) -> Result<Point> {
        match self {
            Self::Constant(b) => Ok([x[0] - b[0] * t, x[1] - b[1] * t]),
            Self::Rotation { angular_speed: w } => {
                let (s, c) = (w * t).sin_cos();
                Ok([x[0] * c - x[1] * s, x[0] * s + x[1] * c])
            }
            Self::Custom { .. } => {
                Err(Error::Unsupported("velocity field has no closed-form characteristic flow".into()))
            }
        }
    }
}
