//! Named invariant suite behind `cipflow verify`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::WeightFunction;
use crate::config::parse_config_str;
use crate::error::Result;
use crate::fespace::{interpolate_nodal, FeSpace};
use crate::mesh::{generate_disc_perturbed, generate_square, Mesh, Point, DISC_SEED};
use crate::operators::{assemble_cip, CipVariant, SystemOperators};
use crate::quadrature::{edge_quadrature, triangle_quadrature, MAX_DEGREE};
use crate::scenarios::make_periodic_cylinder;
use crate::sparse::SparseMatrix;
use crate::timestepper::{run_simulation, RunOptions};
use crate::velocity::VelocityField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

/// Deliberate defects for checking that the suite notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Negates the assembled CIP matrix.
    FlipCipSign,
    /// Feeds `gamma = -1` to the configuration check.
    NegativeGamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

struct Suite {
    level: Level,
    fixture: Option<Fixture>,
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: &'static str, outcome: Result<(bool, String)>) -> bool {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check::new(name, passed, detail));
        passed
    }

    fn cip(&self, space: &FeSpace, beta: &VelocityField) -> Result<SparseMatrix> {
        let s = assemble_cip(space, beta, 0.0, CipVariant::AbsBeta)?;
        Ok(match self.fixture {
            Some(Fixture::FlipCipSign) => s.scaled(-1.0),
            _ => s,
        })
    }

    fn neles(&self, fast: &[usize], full: &[usize]) -> Vec<usize> {
        match self.level {
            Level::Fast => fast.to_vec(),
            Level::Full => full.to_vec(),
        }
    }
}

/// Runs every invariant; a failing configuration check stops the suite
/// before any simulation.
pub fn run_verify(level: Level, fixture: Option<Fixture>) -> Vec<Check> {
    let mut suite = Suite { level, fixture, checks: Vec::new() };
    let gamma = if fixture == Some(Fixture::NegativeGamma) { "-1" } else { "0.01" };
    if !suite.record("config", check_config(gamma)) {
        return suite.checks;
    }
    suite.record("quadrature_exactness", check_quadrature());
    suite.record("p1_reference_mass", check_reference_mass());
    let r = check_identities(&suite);
    suite.record("mass_partition_identities", r);
    let r = check_cip_kernel(&suite);
    suite.record("cip_kernel", r);
    let r = check_cip_spsd(&suite);
    suite.record("cip_spsd", r);
    suite.record("periodic_skew_convection", check_skew(&suite));
    let r = check_inverse_inequality(&suite);
    suite.record("cip_inverse_inequality", r);
    suite.record("weight_bounds", check_weight(&suite));
    let r = check_energy(&suite);
    suite.record("energy_conservation_dissipation", r);
    suite.checks
}

fn check_config(gamma: &str) -> Result<(bool, String)> {
    let text = format!("scenario = periodic_cylinder\ndegree = 1\nnele = 16\ngamma = {gamma}\n");
    Ok(match parse_config_str(&text) {
        Ok(_) => (true, format!("gamma = {gamma} accepted")),
        Err(e) => (false, e.to_string()),
    })
}

fn check_quadrature() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in 0..=MAX_DEGREE {
        let rule = triangle_quadrature(d)?;
        for a in 0..=d as i32 {
            for b in 0..=(d as i32 - a) {
                // int_T x^a y^b = a! b! / (a+b+2)!
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let q: f64 = rule.points.iter().zip(&rule.weights).map(|(l, w)| w * l[1].powi(a) * l[2].powi(b)).sum();
                worst = worst.max((q - exact).abs());
            }
        }
        let rule = edge_quadrature(d)?;
        for a in 0..=d as i32 {
            let q: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(a)).sum();
            worst = worst.max((q - 1.0 / (a + 1) as f64).abs());
        }
    }
    Ok((worst < 1e-14, format!("max monomial error {worst:.2e}")))
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn check_reference_mass() -> Result<(bool, String)> {
    let mesh = Arc::new(generate_square(3, false)?);
    let space = FeSpace::new(Arc::clone(&mesh), 1)?;
    let m = crate::operators::assemble_mass(&space)?;
    let mut closed = vec![vec![0.0; space.ndof()]; space.ndof()];
    for t in 0..mesh.n_triangles() {
        let area = mesh.area(t);
        let dofs = space.element_dofs(t);
        for (i, &a) in dofs.iter().enumerate() {
            for (j, &b) in dofs.iter().enumerate() {
                closed[a][b] += area / 12.0 * if i == j { 2.0 } else { 1.0 };
            }
        }
    }
    let err = (0..space.ndof())
        .flat_map(|i| (0..space.ndof()).map(move |j| (i, j)))
        .map(|(i, j)| (m.get(i, j) - closed[i][j]).abs())
        .fold(0.0, f64::max);
    Ok((err < 1e-14, format!("max entry deviation {err:.2e}")))
}

fn test_meshes(suite: &Suite) -> Result<Vec<(String, Mesh)>> {
    let mut out = Vec::new();
    for n in suite.neles(&[6], &[6, 24]) {
        out.push((format!("square{n}"), generate_square(n, false)?));
        out.push((format!("periodic{n}"), generate_square(n, true)?));
    }
    for n in suite.neles(&[16], &[16, 64]) {
        out.push((format!("disc{n}"), generate_disc_perturbed(n, DISC_SEED)?));
    }
    Ok(out)
}

fn check_identities(suite: &Suite) -> Result<(bool, String)> {
    let beta = VelocityField::rotation();
    for (name, mesh) in test_meshes(suite)? {
        let area = mesh.total_area();
        let mesh = Arc::new(mesh);
        for k in [1, 2] {
            let space = FeSpace::new(Arc::clone(&mesh), k)?;
            let ops = SystemOperators::assemble(Arc::clone(&space), beta.clone(), 0.0, CipVariant::AbsBeta, 0.01)?;
            let one = vec![1.0; space.ndof()];
            let total = ops.mass.quad_form(&one);
            let a1 = ops.convection.mul_vec(&one).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let s1 = ops.cip.mul_vec(&one).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if (total - area).abs() > 1e-12 || a1 > 1e-12 || s1 > 1e-12 * ops.cip.max_abs().max(1.0) {
                return Ok((false, format!("{name} P{k}: 1'M1 - |D| = {:.2e}, |A1| = {a1:.2e}, |S1| = {s1:.2e}", total - area)));
            }
            if !ops.mass.is_symmetric(1e-14) {
                return Ok((false, format!("{name} P{k}: mass not symmetric")));
            }
        }
    }
    Ok((true, "1'M1 = area, A1 = 0, S1 = 0, M symmetric".into()))
}

fn check_cip_kernel(suite: &Suite) -> Result<(bool, String)> {
    let beta = VelocityField::constant([1.0, 0.5]);
    let polys: [fn(Point) -> f64; 6] = [
        |_| 1.0,
        |x| x[0],
        |x| x[1],
        |x| x[0] * x[0],
        |x| x[0] * x[1],
        |x| x[1] * x[1],
    ];
    let mut worst: f64 = 0.0;
    for (name, mesh) in test_meshes(suite)? {
        if mesh.is_periodic() {
            continue;
        }
        let mesh = Arc::new(mesh);
        for k in [1, 2] {
            let space = FeSpace::new(Arc::clone(&mesh), k)?;
            let s = suite.cip(&space, &beta)?;
            let scale = s.max_abs().max(f64::MIN_POSITIVE);
            for p in &polys[..if k == 1 { 3 } else { 6 }] {
                let v = interpolate_nodal(|x, _| p(x), 0.0, &space);
                let c = v.coeffs();
                let rel = s.quad_form(c).abs() / (scale * crate::sparse::dot(c, c));
                if rel > 1e-12 {
                    return Ok((false, format!("{name} P{k}: v'Sv / (|S| |v|^2) = {rel:.2e}")));
                }
                worst = worst.max(rel);
            }
        }
    }
    Ok((true, format!("max relative v'Sv on polynomials {worst:.2e}")))
}

fn random_vectors(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn check_cip_spsd(suite: &Suite) -> Result<(bool, String)> {
    let beta = VelocityField::rotation();
    for (name, mesh) in test_meshes(suite)? {
        let mesh = Arc::new(mesh);
        for k in [1, 2] {
            let space = FeSpace::new(Arc::clone(&mesh), k)?;
            let s = suite.cip(&space, &beta)?;
            if !s.is_symmetric(1e-12) {
                return Ok((false, format!("{name} P{k}: S not symmetric")));
            }
            for v in random_vectors(space.ndof(), 20, 7) {
                let q = s.quad_form(&v);
                if q < -1e-12 * s.max_abs() * crate::sparse::dot(&v, &v) {
                    return Ok((false, format!("{name} P{k}: v'Sv = {q:.3e} < 0")));
                }
            }
        }
    }
    Ok((true, "S symmetric, v'Sv >= 0 on random vectors".into()))
}

fn check_skew(suite: &Suite) -> Result<(bool, String)> {
    let beta = VelocityField::constant([1.0, 0.3]);
    let mut worst: f64 = 0.0;
    for n in suite.neles(&[8], &[8, 32]) {
        let mesh = Arc::new(generate_square(n, true)?);
        for k in [1, 2] {
            let space = FeSpace::new(Arc::clone(&mesh), k)?;
            let a = crate::operators::assemble_convection(&space, &beta, 0.0)?;
            for v in random_vectors(space.ndof(), 10, 3) {
                worst = worst.max(a.quad_form(&v).abs() / crate::sparse::dot(&v, &v));
            }
        }
    }
    Ok((worst < 1e-12, format!("max |v'Av| / |v|^2 = {worst:.2e}")))
}

fn check_inverse_inequality(suite: &Suite) -> Result<(bool, String)> {
    let beta = VelocityField::rotation();
    let mut report = Vec::new();
    let mut ok = true;
    for k in [1, 2] {
        let mut constants = Vec::new();
        for n in suite.neles(&[16, 32], &[20, 40, 80]) {
            let mesh = Arc::new(generate_disc_perturbed(n.next_multiple_of(4), DISC_SEED)?);
            let space = FeSpace::new(Arc::clone(&mesh), k)?;
            let s = suite.cip(&space, &beta)?;
            let m = crate::operators::assemble_mass(&space)?;
            let scale = (beta.sup_norm(&mesh, 0.0) / mesh.h).sqrt();
            let c = random_vectors(space.ndof(), 200, 11)
                .iter()
                .map(|v| s.quad_form(v).max(0.0).sqrt() / (scale * m.quad_form(v).sqrt()))
                .fold(0.0, f64::max);
            constants.push(c);
        }
        let (lo, hi) = constants.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        ok &= lo > 0.0 && hi <= 2.0 * lo;
        report.push(format!("P{k}: C in [{lo:.3e}, {hi:.3e}]"));
    }
    Ok((ok, report.join("; ")))
}

fn check_weight(suite: &Suite) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for nele in suite.neles(&[40, 320], &[40, 80, 160, 320]) {
        let h = 2.0 * std::f64::consts::PI / nele as f64;
        for k in [1.5, 2.0, 4.0] {
            let w = WeightFunction::new([0.5, 0.0], 0.25, k, h, VelocityField::rotation())?;
            for order in [1, 2] {
                worst = worst.max(w.fitted_derivative_constant(order, 400));
            }
        }
    }
    Ok((worst <= 3.0, format!("fitted C = {worst:.4}")))
}

fn check_energy(suite: &Suite) -> Result<(bool, String)> {
    let scenario = make_periodic_cylinder();
    let nele = suite.neles(&[16], &[40])[0];
    let mesh = Arc::new(scenario.mesh(nele)?);
    let mut report = Vec::new();
    let mut ok = true;
    for k in [1, 2] {
        let space = FeSpace::new(Arc::clone(&mesh), k)?;
        let (_, tc) = scenario.time_config(k, nele, 0.5)?;
        for gamma in [0.0, 0.01] {
            let mut ops = SystemOperators::assemble(Arc::clone(&space), scenario.velocity.clone(), 0.0, CipVariant::AbsBeta, gamma)?;
            ops.cip = suite.cip(&space, &scenario.velocity)?;
            let tr = run_simulation(&scenario, &ops, tc, RunOptions::default(), &mut [])?;
            let e: Vec<f64> = tr.diagnostics.iter().map(|d| d.energy).collect();
            if gamma == 0.0 {
                let ratio = e[e.len() - 1] / e[0];
                ok &= (ratio - 1.0).abs() <= 1e-9;
                report.push(format!("P{k} conserved ratio {ratio:.12}"));
            } else {
                let worst = e.windows(2).map(|w| w[1] - w[0] * (1.0 + 1e-13)).fold(f64::NEG_INFINITY, f64::max);
                ok &= worst <= 0.0;
                report.push(format!("P{k} max energy increase {:.2e}", worst.max(0.0)));
            }
        }
    }
    Ok((ok, report.join("; ")))
}
