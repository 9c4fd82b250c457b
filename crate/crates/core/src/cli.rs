//! Batch commands behind the `cipflow` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use crate::analysis::{ErrorReport, L2ErrorTrace, Region};
use crate::config::RunConfig;
use crate::error::Result;
use crate::fespace::FeSpace;
use crate::mesh::export_mesh;
use crate::operators::SystemOperators;
use crate::scenarios::run_convergence_study;
use crate::timestepper::{run_simulation, RunOptions, StepObserver};

/// Worker count from `SOLVER_THREADS`; 0 (the rayon default) when unset or
/// unparsable.
pub fn solver_threads() -> usize {
    match std::env::var("SOLVER_THREADS") {
        Ok(v) => v.trim().parse().unwrap_or_else(|_| {
            log::warn!("ignoring SOLVER_THREADS={v}");
            0
        }),
        Err(_) => 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    pub nele: usize,
    pub steps: usize,
    pub final_time: f64,
    pub global_l2: f64,
    pub local_l2: f64,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "nele = {}", self.nele);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "final_time = {:.10e}", self.final_time);
        let _ = writeln!(s, "err_global_L2 = {:.10e}", self.global_l2);
        let _ = writeln!(s, "err_local_L2 = {:.10e}", self.local_l2);
        s
    }
}

/// One simulation at the first `nele` of the config. Writes the mesh,
/// `diagnostics.csv`, `errors.csv` (global and local L2 error after every
/// step), the snapshots and `summary.txt` into the output directory.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let scenario = cfg.scenario()?;
    let nele = cfg.neles[0];
    if cfg.neles.len() > 1 {
        log::warn!("run uses nele = {nele} only");
    }
    let mesh = Arc::new(scenario.mesh(nele)?);
    let space = FeSpace::new(Arc::clone(&mesh), cfg.degree)?;
    let ops = SystemOperators::assemble(space, scenario.velocity.clone(), 0.0, cfg.variant, cfg.gamma)?;
    let (_, tc) = scenario.time_config(cfg.degree, nele, cfg.theta)?;
    let mut global = L2ErrorTrace::new(Arc::clone(&scenario.exact), Region::Global);
    let mut local = L2ErrorTrace::new(Arc::clone(&scenario.exact), scenario.local_region);
    let observers: &mut [&mut dyn StepObserver] = &mut [&mut global, &mut local];
    let traj = run_simulation(&scenario, &ops, tc, RunOptions { snapshot_stride: cfg.stride }, observers)?;

    let out = &cfg.output;
    fs::create_dir_all(out)?;
    let mesh_path = out.join("mesh.txt");
    export_mesh(&mesh, &mesh_path)?;
    let diag_path = out.join("diagnostics.csv");
    traj.write_diagnostics_csv(std::io::BufWriter::new(fs::File::create(&diag_path)?))?;
    let err_path = out.join("errors.csv");
    let mut csv = String::from("step,t,err_global_L2,err_local_L2\n");
    for (n, (g, l)) in global.samples.iter().zip(&local.samples).enumerate() {
        let _ = writeln!(csv, "{n},{:e},{:e},{:e}", g.0, g.1, l.1);
    }
    fs::write(&err_path, csv)?;
    let mut files = vec![mesh_path, diag_path, err_path];
    files.extend(traj.write_snapshots(&out.join("snapshots"), "../mesh.txt")?);

    let summary = RunSummary {
        scenario: scenario.name.clone(),
        nele,
        steps: tc.steps,
        final_time: traj.final_time(),
        global_l2: global.samples.last().map_or(0.0, |s| s.1),
        local_l2: local.samples.last().map_or(0.0, |s| s.1),
        files,
    };
    let path = out.join("summary.txt");
    fs::write(&path, summary.to_text())?;
    let mut summary = summary;
    summary.files.push(path);
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub stabilized: ErrorReport,
    pub unstabilized: Option<ErrorReport>,
    pub files: Vec<PathBuf>,
}

impl ConvergenceOutcome {
    pub fn has_failures(&self) -> bool {
        self.stabilized.has_failures() || self.unstabilized.as_ref().is_some_and(|r| r.has_failures())
    }
}

/// Fitted rate per selected measure, one column per method.
pub fn fitted_rate_table(stab: &ErrorReport, gal: Option<&ErrorReport>) -> String {
    let mut s = String::from(if gal.is_some() { "measure,stab,gal\n" } else { "measure,stab\n" });
    let cell = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_default();
    for &k in &stab.kinds {
        let _ = write!(s, "{k},{}", cell(stab.fitted_rate(k)));
        if let Some(g) = gal {
            let _ = write!(s, ",{}", cell(g.fitted_rate(k)));
        }
        s.push('\n');
    }
    s
}

/// Refinement study over all `nele` values. The report is written even when
/// some levels fail; the caller decides the exit status from
/// [`ConvergenceOutcome::has_failures`].
pub fn cmd_convergence(cfg: &RunConfig, threads: usize) -> Result<ConvergenceOutcome> {
    let scenario = cfg.scenario()?;
    let mut study = cfg.study();
    study.threads = threads;
    fs::create_dir_all(&cfg.output)?;
    let write = |name: &str, text: String| -> Result<PathBuf> {
        let p = cfg.output.join(name);
        fs::write(&p, text)?;
        Ok(p)
    };
    let stabilized = run_convergence_study(&scenario, &study)?;
    let mut files = vec![write("convergence_stab.csv", stabilized.to_csv())?];
    let unstabilized = if cfg.compare_unstabilized {
        let gal = run_convergence_study(&scenario, &study.clone().with_gamma(0.0))?;
        files.push(write("convergence_gal.csv", gal.to_csv())?);
        Some(gal)
    } else {
        None
    };
    files.push(write("rates.csv", fitted_rate_table(&stabilized, unstabilized.as_ref()))?);
    Ok(ConvergenceOutcome { stabilized, unstabilized, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use std::path::Path;

    fn config(extra: &str, dir: &Path) -> RunConfig {
        parse_config_str(&format!(
            "scenario = periodic_cylinder\ndegree = 1\nnele = 8,16\ngamma = 0.01\noutput = {}\n{extra}",
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn run_writes_all_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let s = cmd_run(&config("stride = 4\n", dir.path())).unwrap();
        assert_eq!(s.nele, 8);
        assert!((s.final_time - 1.0).abs() < 1e-12);
        for f in &s.files {
            assert!(f.exists(), "{}", f.display());
        }
        let errors = fs::read_to_string(dir.path().join("errors.csv")).unwrap();
        assert_eq!(errors.lines().count(), s.steps + 2);
        let diag = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        assert!(diag.starts_with("step,t,energy,cip_seminorm\n"));
        assert!(fs::read_to_string(dir.path().join("summary.txt")).unwrap().contains("err_global_L2 = "));
    }

    #[test]
    fn convergence_with_comparison_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("compare_unstabilized = true\nerrors = global,stab\n", dir.path());
        let a = cmd_convergence(&cfg, 1).unwrap();
        assert!(!a.has_failures());
        let names: Vec<_> = a.files.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
        assert_eq!(names, ["convergence_stab.csv", "convergence_gal.csv", "rates.csv"]);
        let first = fs::read(dir.path().join("convergence_stab.csv")).unwrap();
        cmd_convergence(&cfg, 1).unwrap();
        assert_eq!(first, fs::read(dir.path().join("convergence_stab.csv")).unwrap());
        let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
        assert!(rates.starts_with("measure,stab,gal\nerr_global_L2,"));
    }
}
