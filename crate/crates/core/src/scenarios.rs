//! Benchmark problems with exact solutions, and the refinement-study driver.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{
    l2_error, DualNorm, ErrorKind, ErrorReport, LevelRecord, MaterialDerivative, Region, StabIntegral, WeightFunction,
    AposterioriEstimator, ERROR_KINDS,
};
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::mesh::{generate_disc_perturbed, generate_square, Mesh, Point, DISC_SEED};
use crate::operators::{CipVariant, SystemOperators};
use crate::timestepper::{nominal_h, run_simulation, select_dt, DomainKind, RunOptions, StepObserver, ThetaConfig};
use crate::velocity::VelocityField;
use crate::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Disc,
    Square,
    PeriodicSquare,
}

impl Domain {
    pub fn kind(self) -> DomainKind {
        match self {
            Self::Disc => DomainKind::Disc,
            Self::Square | Self::PeriodicSquare => DomainKind::Square,
        }
    }

    pub fn mesh(self, nele: usize) -> Result<Mesh> {
        match self {
            Self::Disc => generate_disc_perturbed(nele, DISC_SEED),
            Self::Square => generate_square(nele, false),
            Self::PeriodicSquare => generate_square(nele, true),
        }
    }

    pub fn area(self) -> f64 {
        match self {
            Self::Disc => std::f64::consts::PI,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscData {
    Smooth,
    Rough,
    Combined,
}

/// Built-in scenario names accepted by configuration files.
pub const SCENARIO_NAMES: [&str; 6] = [
    "rotating_disc_smooth",
    "rotating_disc_rough",
    "rotating_disc_combined",
    "square_transport",
    "square_longterm",
    "periodic_cylinder",
];

#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub domain: Domain,
    pub velocity: VelocityField,
    pub initial: ScalarField,
    pub source: Option<ScalarField>,
    /// Data on the inflow boundary.
    pub inflow: Option<ScalarField>,
    pub final_time: f64,
    /// `u(x, t)`
    pub exact: ScalarField,
    /// Sub-region where the solution stays smooth.
    pub local_region: Region,
    /// Default centre of the weighted norm.
    pub weight_center: Point,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("velocity", &self.velocity)
            .field("final_time", &self.final_time)
            .finish_non_exhaustive()
    }
}

fn gaussian(center: Point) -> impl Fn(Point) -> f64 + Copy {
    move |x| (-30.0 * ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2))).exp()
}

fn cylinder(center: Point, radius: f64) -> impl Fn(Point) -> f64 + Copy {
    move |x| if (x[0] - center[0]).hypot(x[1] - center[1]) < radius { 1.0 } else { 0.0 }
}

fn field(f: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> ScalarField {
    Arc::new(f)
}

/// Solid body rotation `beta = (y, -x)` on the unit disc, one full turn.
pub fn make_rotating_disc(data: DiscData) -> Scenario {
    let bump = gaussian([0.5, 0.0]);
    let cyl = cylinder([-0.5, 0.0], 0.2);
    let u0: Arc<dyn Fn(Point) -> f64 + Send + Sync> = match data {
        DiscData::Smooth => Arc::new(bump),
        DiscData::Rough => Arc::new(cyl),
        DiscData::Combined => Arc::new(move |x| bump(x) + cyl(x)),
    };
    let velocity = VelocityField::rotation();
    let flow = velocity.clone();
    let u0_exact = Arc::clone(&u0);
    let name = match data {
        DiscData::Smooth => "rotating_disc_smooth",
        DiscData::Rough => "rotating_disc_rough",
        DiscData::Combined => "rotating_disc_combined",
    };
    Scenario {
        name: name.into(),
        domain: Domain::Disc,
        velocity,
        initial: field(move |x, _| u0(x)),
        source: None,
        inflow: None,
        final_time: 2.0 * std::f64::consts::PI,
        exact: field(move |x, t| u0_exact(flow.backward_flow(x, t).expect("rotation has a closed-form flow"))),
        local_region: Region::HalfplaneXPos,
        weight_center: [0.5, 0.0],
    }
}

fn square_data() -> impl Fn(Point) -> f64 + Copy {
    let cyl = cylinder([0.5, 0.5], 0.2);
    let bump = gaussian([0.0, 0.5]);
    move |x| cyl(x) + bump(x)
}

/// Translation `beta = (1, 0)` through the unit square; the inflow data is
/// the trace of the exact solution.
pub fn make_square_transport(final_time: f64) -> Scenario {
    let u0 = square_data();
    let exact = field(move |x, t| u0([x[0] - t, x[1]]));
    let name = if final_time > 1.0 { "square_longterm" } else { "square_transport" };
    Scenario {
        name: name.into(),
        domain: Domain::Square,
        velocity: VelocityField::constant([1.0, 0.0]),
        initial: field(move |x, _| u0(x)),
        source: None,
        inflow: Some(Arc::clone(&exact)),
        final_time,
        exact,
        local_region: Region::Global,
        weight_center: [0.0, 0.5],
    }
}

/// Cylinder translated once around the periodic unit square.
pub fn make_periodic_cylinder() -> Scenario {
    let u0 = cylinder([0.5, 0.5], 0.2);
    Scenario {
        name: "periodic_cylinder".into(),
        domain: Domain::PeriodicSquare,
        velocity: VelocityField::constant([1.0, 0.0]),
        initial: field(move |x, _| u0(x)),
        source: None,
        inflow: None,
        final_time: 1.0,
        exact: field(move |x, t| u0([(x[0] - t).rem_euclid(1.0), x[1].rem_euclid(1.0)])),
        local_region: Region::Global,
        weight_center: [0.5, 0.5],
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotating_disc_smooth" => Ok(make_rotating_disc(DiscData::Smooth)),
            "rotating_disc_rough" => Ok(make_rotating_disc(DiscData::Rough)),
            "rotating_disc_combined" => Ok(make_rotating_disc(DiscData::Combined)),
            "square_transport" => Ok(make_square_transport(1.0)),
            "square_longterm" => Ok(make_square_transport(3.0)),
            "periodic_cylinder" => Ok(make_periodic_cylinder()),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario `{other}` (expected one of {})",
                SCENARIO_NAMES.join(", ")
            ))),
        }
    }
}

impl Scenario {
    pub fn exact_at(&self, x: Point, t: f64) -> f64 {
        (self.exact)(x, t)
    }

    pub fn mesh(&self, nele: usize) -> Result<Mesh> {
        self.domain.mesh(nele)
    }

    /// Nominal `h` and the fitted time step for degree `k`.
    pub fn time_config(&self, degree: usize, nele: usize, theta: f64) -> Result<(f64, ThetaConfig)> {
        let h = nominal_h(self.domain.kind(), nele);
        let cfg = ThetaConfig::fit(theta, select_dt(degree, h)?, self.final_time)?;
        Ok((h, cfg))
    }
}

/// Parameters of the weighted norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub center: Option<Point>,
    pub r0: f64,
    pub k: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self { center: None, r0: 0.25, k: 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub degree: usize,
    pub gamma: f64,
    pub theta: f64,
    pub variant: CipVariant,
    pub neles: Vec<usize>,
    pub errors: Vec<ErrorKind>,
    pub weight: WeightParams,
    /// Worker threads for independent levels; 0 uses the rayon default.
    pub threads: usize,
}

impl StudyConfig {
    pub fn new(degree: usize, neles: Vec<usize>) -> Self {
        Self {
            degree,
            gamma: crate::operators::DEFAULT_GAMMA,
            theta: 0.5,
            variant: CipVariant::default(),
            neles,
            errors: vec![ErrorKind::GlobalL2],
            weight: WeightParams::default(),
            threads: 0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_errors(mut self, errors: &[ErrorKind]) -> Self {
        self.errors = errors.to_vec();
        self
    }

    pub fn with_weight(mut self, weight: WeightParams) -> Self {
        self.weight = weight;
        self
    }
}

/// Run one refinement level and evaluate the selected errors at the final time.
pub fn run_level(scenario: &Scenario, cfg: &StudyConfig, nele: usize) -> Result<LevelRecord> {
    let mesh = Arc::new(scenario.mesh(nele)?);
    let space = FeSpace::new(mesh, cfg.degree)?;
    let ops = SystemOperators::assemble(Arc::clone(&space), scenario.velocity.clone(), 0.0, cfg.variant, cfg.gamma)?;
    let (h, tc) = scenario.time_config(cfg.degree, nele, cfg.theta)?;
    let wants = |k: ErrorKind| cfg.errors.contains(&k);

    let mut matderiv = wants(ErrorKind::MaterialDerivative)
        .then(|| MaterialDerivative::new(&ops, scenario.source.clone()))
        .transpose()?;
    let mut stab = wants(ErrorKind::StabIntegral).then(|| StabIntegral::new(&ops));
    let mut estimator = wants(ErrorKind::Estimator)
        .then(|| AposterioriEstimator::new(&ops, Arc::clone(&scenario.initial), scenario.source.clone(), h))
        .transpose()?;
    let mut observers: Vec<&mut dyn StepObserver> = Vec::new();
    if let Some(o) = matderiv.as_mut() {
        observers.push(o);
    }
    if let Some(o) = stab.as_mut() {
        observers.push(o);
    }
    if let Some(o) = estimator.as_mut() {
        observers.push(o);
    }
    let traj = run_simulation(scenario, &ops, tc, RunOptions::default(), &mut observers)?;
    let u = traj.last();
    let t_end = tc.final_time();
    let exact = |x: Point| scenario.exact_at(x, t_end);

    let mut rec = LevelRecord::new(nele, h, tc.dt);
    for &kind in &cfg.errors {
        let value = match kind {
            ErrorKind::GlobalL2 => l2_error(u, exact, Region::Global)?,
            ErrorKind::LocalL2 => l2_error(u, exact, scenario.local_region)?,
            ErrorKind::MaterialDerivative => matderiv.as_ref().map_or(0.0, |o| o.value()),
            ErrorKind::StabIntegral => stab.as_ref().map_or(0.0, |o| o.value()),
            ErrorKind::WeightedL2 => {
                let w = WeightFunction::new(
                    cfg.weight.center.unwrap_or(scenario.weight_center),
                    cfg.weight.r0,
                    cfg.weight.k,
                    h,
                    scenario.velocity.clone(),
                )?;
                crate::analysis::weighted_l2_error(u, exact, &w, t_end)?
            }
            ErrorKind::DualNorm => DualNorm::new(Arc::clone(&space))?.of_error(u, exact)?,
            ErrorKind::Estimator => estimator.as_ref().map_or(0.0, |o| o.value()),
        };
        rec.set(kind, value);
    }
    Ok(rec)
}

/// Refinement study over `cfg.neles`. Levels run concurrently; a failing
/// level is recorded and the others still complete.
pub fn run_convergence_study(scenario: &Scenario, cfg: &StudyConfig) -> Result<ErrorReport> {
    if cfg.neles.is_empty() {
        return Err(Error::InvalidArgument("empty nele list".into()));
    }
    if cfg.neles.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("nele list must be strictly ascending".into()));
    }
    let one = |nele: usize| {
        run_level(scenario, cfg, nele).unwrap_or_else(|e| {
            log::error!("{} nele={nele}: {e}", scenario.name);
            LevelRecord::failed(nele, e.to_string())
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    // Largest levels first so the longest job starts immediately.
    let mut levels: Vec<LevelRecord> = pool.install(|| cfg.neles.par_iter().rev().map(|&n| one(n)).collect());
    levels.reverse();
    Ok(ErrorReport::new(cfg.errors.iter().copied().filter(|k| ERROR_KINDS.contains(k)).collect(), levels))
}
