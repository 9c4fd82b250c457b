//! Fully discrete theta-scheme
//!
//! ```text
//! (M/dt + theta K) u^n = (M/dt - (1-theta) K) u^{n-1} + F(t_{n-1} + theta dt) + b_g(t_{n-1} + theta dt)
//! ```
//!
//! with `K = A + B + gamma S`. The velocity is steady, so the left-hand
//! matrix is factorized once and reused for every step.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{FeFunction, L2Projector};
use crate::operators::{assemble_inflow_rhs, assemble_source, SystemOperators};
use crate::scenarios::Scenario;
use crate::sparse::{LuSolver, SparseMatrix};
use crate::ScalarField;

/// A step whose solve residual exceeds this is reported as failed.
pub const STEP_RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConfig {
    pub theta: f64,
    pub dt: f64,
    pub steps: usize,
}

impl ThetaConfig {
    pub fn new(theta: f64, final_time: f64, steps: usize) -> Result<Self> {
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta must lie in [1/2, 1], got {theta}")));
        }
        if steps == 0 || !(final_time > 0.0) {
            return Err(Error::InvalidArgument("need a positive final time and at least one step".into()));
        }
        Ok(Self { theta, dt: final_time / steps as f64, steps })
    }

    /// Largest step `<= dt_max` that lands exactly on `final_time`.
    pub fn fit(theta: f64, dt_max: f64, final_time: f64) -> Result<Self> {
        if !(dt_max > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt_max}")));
        }
        // Guard against ceil() bumping an exact ratio up by one ulp.
        let ratio = final_time / dt_max;
        let steps = if (ratio - ratio.round()).abs() < 1e-9 { ratio.round() } else { ratio.ceil() };
        Self::new(theta, final_time, steps.max(1.0) as usize)
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.dt * n as f64
    }
}

/// Geometry of the built-in domains, used for the nominal mesh size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Disc,
    Square,
}

/// Mesh size that drives the time step: `2 pi / nele` on the disc
/// (perimeter cell faces), `1 / nele` on the square.
pub fn nominal_h(domain: DomainKind, nele: usize) -> f64 {
    match domain {
        DomainKind::Disc => 2.0 * std::f64::consts::PI / nele as f64,
        DomainKind::Square => 1.0 / nele as f64,
    }
}

/// `h/2` for P1, `h^{3/2}/2` for P2 (before fitting to the final time).
pub fn select_dt(degree: usize, h: f64) -> Result<f64> {
    match degree {
        1 => Ok(0.5 * h),
        2 => Ok(0.5 * h.powf(1.5)),
        k => Err(Error::Unsupported(format!("no time-step rule for degree {k}"))),
    }
}

/// Factorized left-hand side and explicit right-hand operator.
#[derive(Debug)]
pub struct ThetaSystem {
    pub config: ThetaConfig,
    lhs: LuSolver,
    rhs: SparseMatrix,
}

pub fn build_system(ops: &SystemOperators, config: ThetaConfig) -> Result<ThetaSystem> {
    let k = ops.spatial_operator();
    let inv_dt = 1.0 / config.dt;
    let lhs = SparseMatrix::linear_combination(&[(inv_dt, &ops.mass), (config.theta, &k)]);
    let rhs = SparseMatrix::linear_combination(&[(inv_dt, &ops.mass), (config.theta - 1.0, &k)]);
    let lhs = LuSolver::new(lhs).map_err(|e| Error::Solver(format!("left-hand matrix: {e}")))?;
    Ok(ThetaSystem { config, lhs, rhs })
}

impl ThetaSystem {
    pub fn lhs_matrix(&self) -> &SparseMatrix {
        self.lhs.matrix()
    }

    pub fn rhs_matrix(&self) -> &SparseMatrix {
        &self.rhs
    }

    /// Advance one step from `state` at `t_prev`. Source and inflow data
    /// are sampled at `t_prev + theta dt`. Returns the new state and the
    /// relative solve residual.
    pub fn step(
        &self,
        ops: &SystemOperators,
        state: &FeFunction,
        t_prev: f64,
        source: Option<&ScalarField>,
        inflow: Option<&ScalarField>,
    ) -> Result<(FeFunction, f64)> {
        let t_data = t_prev + self.config.theta * self.config.dt;
        let mut b = self.rhs.mul_vec(state.coeffs());
        if let Some(f) = source {
            let load = assemble_source(&ops.space, |x, t| f(x, t), t_data)?;
            b.iter_mut().zip(&load).for_each(|(bi, li)| *bi += li);
        }
        if let (Some(g), Some(part)) = (inflow, &ops.partition) {
            if !part.inflow_edges.is_empty() {
                let load = assemble_inflow_rhs(&ops.space, part, &ops.velocity, |x, t| g(x, t), t_data)?;
                b.iter_mut().zip(&load).for_each(|(bi, li)| *bi += li);
            }
        }
        let (u, residual) = self.lhs.solve_with_residual(&b)?;
        Ok((FeFunction::new(Arc::clone(state.space()), u)?, residual))
    }
}

/// Data handed to observers after each step.
#[derive(Debug)]
pub struct StepView<'a> {
    /// Index `n` of the new level (1-based).
    pub step: usize,
    pub t_prev: f64,
    pub t: f64,
    pub dt: f64,
    pub theta: f64,
    pub prev: &'a FeFunction,
    pub next: &'a FeFunction,
}

impl StepView<'_> {
    /// `u^{n_theta} = theta u^n + (1 - theta) u^{n-1}`.
    pub fn theta_state(&self) -> FeFunction {
        let mut u = self.prev.clone();
        u.coeffs_mut().iter_mut().zip(self.next.coeffs()).for_each(|(p, n)| *p = self.theta * n + (1.0 - self.theta) * *p);
        u
    }

    pub fn t_theta(&self) -> f64 {
        self.t_prev + self.theta * self.dt
    }
}

/// Hook for quantities accumulated online during a run.
pub trait StepObserver {
    fn start(&mut self, _initial: &FeFunction) -> Result<()> {
        Ok(())
    }
    fn observe(&mut self, view: &StepView<'_>) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    /// `||u^n||_M`
    pub energy: f64,
    /// `|u^n|_s` (without gamma)
    pub cip_seminorm: f64,
    /// Relative residual of the solve (0 at the initial level).
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<FeFunction>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn initial(&self) -> &FeFunction {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &FeFunction {
        self.snapshots.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least the initial time")
    }

    /// `step,t,energy,cip_seminorm`
    pub fn write_diagnostics_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "step,t,energy,cip_seminorm")?;
        for d in &self.diagnostics {
            writeln!(w, "{},{:e},{:e},{:e}", d.step, d.t, d.energy, d.cip_seminorm)?;
        }
        Ok(())
    }

    /// One file per snapshot: a `# mesh` reference line followed by
    /// `t value_per_dof...`.
    pub fn write_snapshots(&self, dir: &Path, mesh_ref: &str) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (i, (t, u)) in self.times.iter().zip(&self.snapshots).enumerate() {
            let path = dir.join(format!("snapshot_{i:05}.txt"));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            write_snapshot(&mut f, *t, u, mesh_ref)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

pub fn write_snapshot(mut w: impl Write, t: f64, u: &FeFunction, mesh_ref: &str) -> std::io::Result<()> {
    writeln!(w, "# mesh {mesh_ref} degree {}", u.space().degree())?;
    write!(w, "{t:?}")?;
    for v in u.coeffs() {
        write!(w, " {v:?}")?;
    }
    writeln!(w)
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Keep every `stride`-th state (the initial and final states are
    /// always kept). Zero keeps only those two.
    pub snapshot_stride: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { snapshot_stride: 0 }
    }
}

fn diagnostics(ops: &SystemOperators, step: usize, t: f64, u: &FeFunction, residual: f64) -> StepDiagnostics {
    StepDiagnostics {
        step,
        t,
        energy: ops.mass.quad_form(u.coeffs()).max(0.0).sqrt(),
        cip_seminorm: ops.cip.quad_form(u.coeffs()).max(0.0).sqrt(),
        residual,
    }
}

/// Project the initial datum and run all steps.
pub fn run_simulation(
    scenario: &Scenario,
    ops: &SystemOperators,
    config: ThetaConfig,
    options: RunOptions,
    observers: &mut [&mut dyn StepObserver],
) -> Result<Trajectory> {
    let projector = L2Projector::new(Arc::clone(&ops.space), ops.mass.clone())?;
    let u0 = projector.project(|x, t| (scenario.initial)(x, t), 0.0)?;
    run_from(u0, scenario.source.as_ref(), scenario.inflow.as_ref(), ops, config, options, observers)
}

/// Run from a given initial state.
pub fn run_from(
    u0: FeFunction,
    source: Option<&ScalarField>,
    inflow: Option<&ScalarField>,
    ops: &SystemOperators,
    config: ThetaConfig,
    options: RunOptions,
    observers: &mut [&mut dyn StepObserver],
) -> Result<Trajectory> {
    let system = build_system(ops, config)?;
    for o in observers.iter_mut() {
        o.start(&u0)?;
    }
    let mut traj = Trajectory {
        times: vec![0.0],
        snapshots: vec![u0.clone()],
        diagnostics: vec![diagnostics(ops, 0, 0.0, &u0, 0.0)],
    };
    let mut state = u0;
    for n in 1..=config.steps {
        let t_prev = config.time(n - 1);
        let t = config.time(n);
        let (next, residual) = system.step(ops, &state, t_prev, source, inflow)?;
        if residual > STEP_RESIDUAL_LIMIT {
            return Err(Error::StepFailure { step: n, msg: format!("solve residual {residual:e}") });
        }
        let view = StepView { step: n, t_prev, t, dt: config.dt, theta: config.theta, prev: &state, next: &next };
        for o in observers.iter_mut() {
            o.observe(&view)?;
        }
        traj.diagnostics.push(diagnostics(ops, n, t, &next, residual));
        let keep = n == config.steps || (options.snapshot_stride > 0 && n % options.snapshot_stride == 0);
        if keep {
            traj.times.push(t);
            traj.snapshots.push(next.clone());
        }
        state = next;
    }
    Ok(traj)
}
