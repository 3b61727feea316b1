//! One function per mode; each writes its artifacts under the output directory and returns
//! the checks that `--strict` turns into an exit code.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use vortex_rings::diagnostics::{compare_reduced, measure_speed, CenterSeries, RunMetadata};
use vortex_rings::euler::{run, SolverConfig};
use vortex_rings::fields::{alpha_speed, GAMMA_RADIUS};
use vortex_rings::grid::{AxiGrid, FieldRole, ScalarField};
use vortex_rings::poisson::{analytic_potential, analytic_source_field, PoissonSolver};
use vortex_rings::profiles::{
    compute_constants, compute_gamma, gamma0_radial, mode_operator_apply, mode_solve, zeta, RadialProfile,
};
use vortex_rings::reduced::{
    integrate, scaled_to_physical, symmetric_pair_hamiltonian, RingFamily, ScaledConfig,
};
use vortex_rings::Vec2;

use crate::config::{Mode, ScenarioConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub kind: String,
}

/// A measured quantity against its acceptance tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit: format!("< {limit}"), passed: value < limit }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, limit: format!("in [{lo}, {hi}]"), passed: (lo..=hi).contains(&value) }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit: format!(">= {limit}"), passed: value >= limit }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub mode: Mode,
    pub seed: u64,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
}

impl Manifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Outputs {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), artifacts: Vec::new() })
    }

    fn write<F>(&mut self, name: &str, kind: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.artifacts.push(Artifact { path: PathBuf::from(name), kind: kind.into() });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
        self.write(name, "json", |w| writeln!(w, "{text}"))
    }
}

/// Runs the scenario and writes `manifest.json` last. The manifest lists every artifact,
/// itself included.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Manifest, CliError> {
    cfg.check()?;
    let mut out = Outputs::new(&cfg.out)?;
    log::info!("running {} into {}", cfg.mode, cfg.out.display());
    let checks = match cfg.mode {
        Mode::Reduced => reduced(cfg, &mut out)?,
        Mode::Ring => ring(cfg, &mut out)?,
        Mode::Leapfrog => leapfrog(cfg, &mut out)?,
        Mode::Modes => modes(cfg, &mut out)?,
        Mode::PoissonTest => poisson_test(cfg, &mut out)?,
        Mode::Levelcurves => levelcurves(cfg, &mut out)?,
    };
    out.artifacts.push(Artifact { path: PathBuf::from("manifest.json"), kind: "json".into() });
    let manifest = Manifest { mode: cfg.mode, seed: cfg.seed, artifacts: out.artifacts.clone(), checks };
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::from)?;
    fs::write(cfg.out.join("manifest.json"), text + "\n")?;
    Ok(manifest)
}

fn scaled(cfg: &ScenarioConfig) -> Result<ScaledConfig, CliError> {
    Ok(ScaledConfig::new(cfg.offsets(), cfg.r0)?)
}

fn solver_config(cfg: &ScenarioConfig) -> Result<SolverConfig, CliError> {
    let g = cfg.grid;
    let grid = AxiGrid::from_extents(g.nr, g.nz, g.r_max, g.z_min, g.z_max)?;
    let mut sc = SolverConfig::new(cfg.epsilon, cfg.r0, cfg.dt, cfg.t_end, grid);
    sc.interp = cfg.interp;
    sc.poisson = cfg.poisson;
    sc.substeps = cfg.substeps;
    sc.recenter = cfg.recenter;
    sc.predictor_corrector = cfg.predictor_corrector;
    sc.clearance_fraction = cfg.clearance_fraction;
    Ok(sc)
}

fn metadata(cfg: &ScenarioConfig, sc: &SolverConfig) -> RunMetadata {
    RunMetadata {
        epsilon: cfg.epsilon,
        r0: cfg.r0,
        nr: sc.grid.nr(),
        nz: sc.grid.nz(),
        hr: sc.grid.hr(),
        hz: sc.grid.hz(),
        dt: cfg.dt,
    }
}

fn reduced(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<Vec<Check>, CliError> {
    let q0 = scaled(cfg)?;
    let traj = integrate(&q0, cfg.dt, cfg.t_end, cfg.method)?;
    out.write("trajectory.csv", "csv", |w| traj.write_csv(w))?;
    let mut centers = CenterSeries::new(0.0);
    for (t, st) in traj.times.iter().zip(&traj.states) {
        centers.push(*t, scaled_to_physical(st, cfg.epsilon)?.centers().to_vec());
    }
    out.write("centers.csv", "csv", |w| centers.write_csv(w))?;

    let mut checks = vec![Check::below("hamiltonian_drift", traj.hamiltonian_drift(), 1e-8)];
    let q = q0.q();
    if q.len() == 2 && q[0] == -q[1] {
        let returns = traj.return_points(0);
        let worst = returns.iter().fold(0.0f64, |m, (_, p)| m.max((*p - q[0]).norm()));
        checks.push(Check::at_least("poincare_returns", returns.len() as f64, 1.0));
        checks.push(Check::below("poincare_return_error", worst, 1e-3));
    }
    Ok(checks)
}

#[derive(Serialize)]
struct SpeedReport {
    measured: f64,
    predicted_leading: f64,
    ratio: f64,
    predicted_with_correction: Option<f64>,
    mass_drift: f64,
    maxnorm_growth: f64,
    metadata: RunMetadata,
}

fn write_run(out: &mut Outputs, run: &vortex_rings::euler::RunOutput) -> Result<(), CliError> {
    out.write("centers.csv", "csv", |w| run.centers.write_csv(w))?;
    out.write("conserved.csv", "csv", |w| run.write_conserved_csv(w))?;
    for (n, (_, snap)) in run.snapshots.iter().enumerate() {
        out.write(&format!("omega_{n:05}.bin"), "snapshot", |w| snap.write_binary(w))?;
    }
    Ok(())
}

fn ring(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<Vec<Check>, CliError> {
    let sc = solver_config(cfg)?;
    let rings = RingFamily::from_centers(vec![Vec2::new(cfg.r0, 0.0)], cfg.epsilon, cfg.r0)?;
    let result = run(&rings, &sc, cfg.window_radius, cfg.snapshot_every)?;
    write_run(out, &result)?;
    let l = cfg.epsilon.ln().abs();
    let measured = measure_speed(&result.centers, l, sc.alpha0)?;
    let leading = 2.0 * l / cfg.r0;
    let corrected = compute_constants(1e-10)
        .and_then(|c| alpha_speed(cfg.r0, cfg.epsilon, &c))
        .map(|a| 2.0 * a * l)
        .ok();
    let report = SpeedReport {
        measured,
        predicted_leading: leading,
        ratio: measured / leading,
        predicted_with_correction: corrected,
        mass_drift: result.mass_drift(),
        maxnorm_growth: result.maxnorm_growth(),
        metadata: metadata(cfg, &sc),
    };
    out.json("speed.json", &report)?;
    Ok(vec![Check::within("speed_ratio", report.ratio, 0.8, 1.2)])
}

fn leapfrog(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<Vec<Check>, CliError> {
    let sc = solver_config(cfg)?;
    let q0 = scaled(cfg)?;
    let rings = scaled_to_physical(&q0, cfg.epsilon)?;
    let result = run(&rings, &sc, cfg.window_radius, cfg.snapshot_every)?;
    write_run(out, &result)?;
    let traj = integrate(&q0, cfg.dt, cfg.t_end, cfg.method)?;
    out.write("trajectory.csv", "csv", |w| traj.write_csv(w))?;
    let mut report = compare_reduced(&result.centers, &traj, cfg.epsilon)?;
    report.metadata = Some(metadata(cfg, &sc));
    out.json("report.json", &report)?;

    let first = report.first_period_sup_error.unwrap_or(f64::INFINITY);
    Ok(vec![
        Check::below("mass_drift", result.mass_drift(), 5e-3),
        Check::below("maxnorm_growth", result.maxnorm_growth(), 1e-2),
        Check::at_least("exchange_count", report.exchange_count as f64, 2.0),
        Check::below("first_period_sup_error", first, 3.0 * report.initial_separation),
    ])
}

#[derive(Serialize)]
struct ConstantsReport {
    i0: f64,
    i1: f64,
    a: f64,
    a_bar: f64,
}

fn modes(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<Vec<Check>, CliError> {
    let h = 1e-3;
    let c = compute_constants(1e-10)?;
    out.json("constants.json", &ConstantsReport { i0: c.i0, i1: c.i1, a: c.a, a_bar: c.a_bar })?;

    let g0 = RadialProfile::uniform(h, cfg.r_out, 0, gamma0_radial)?;
    out.write("gamma0.csv", "csv", |w| g0.write_csv(w))?;
    let z1 = RadialProfile::uniform(h, cfg.r_out, 1, |r| zeta(1, r))?;
    out.write("zeta1.csv", "csv", |w| z1.write_csv(w))?;
    let gamma = compute_gamma(GAMMA_RADIUS)?;
    out.write("gamma.csv", "csv", |w| gamma.write_csv(w))?;

    let lz = mode_operator_apply(1, &z1)?;
    let kernel = z1
        .rho()
        .iter()
        .zip(lz.values())
        .filter(|(r, _)| (0.1..=20.0).contains(*r))
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));

    // manufactured solutions ρⁿe^{−ρ²} for the higher modes
    let mut round_trip = 0.0f64;
    for n in [2, 3] {
        let exact = |r: f64| r.powi(n) * (-r * r).exp();
        let datum = |r: f64| {
            let s = 1.0 + r * r;
            (4.0 * r.powi(n + 2) - 4.0 * (n + 1) as f64 * r.powi(n)) * (-r * r).exp() + 8.0 * exact(r) / (s * s)
        };
        let g = RadialProfile::uniform(h, cfg.r_out, n, datum)?;
        let p = mode_solve(n, &g, cfg.r_out)?;
        out.write(&format!("mode{n}.csv"), "csv", |w| p.write_csv(w))?;
        let scale = p.rho().iter().fold(0.0f64, |m, r| m.max(exact(*r).abs()));
        let worst = p.rho().iter().zip(p.values()).fold(0.0f64, |m, (r, v)| m.max((v - exact(*r)).abs()));
        round_trip = round_trip.max(worst / scale);
    }
    Ok(vec![
        Check::below("kernel_residual", kernel, 1e-6),
        Check::below("mode_round_trip", round_trip, 1e-4),
        Check::below("i0_relative_error", (c.i0 / (-8.0 * PI) - 1.0).abs(), 1e-6),
        Check::below("i1_ratio_relative_error", ((c.i1 / c.i0) / (3.0 * (2f64.ln() - 1.0)) - 1.0).abs(), 1e-6),
    ])
}

fn poisson_test(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<Vec<Check>, CliError> {
    let mut rows = Vec::new();
    for &n in &cfg.refinements {
        let grid = AxiGrid::from_extents(n, 2 * n - 1, 8.0, -8.0, 8.0)?;
        let psi = PoissonSolver::new(grid, cfg.poisson).solve(&analytic_source_field(grid))?;
        let exact = ScalarField::from_fn(grid, FieldRole::RelativeStream, analytic_potential)?;
        let err = psi.values().iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        rows.push((n, grid.hr(), err / exact.max_abs()));
    }
    let slopes: Vec<f64> = rows.windows(2).map(|w| (w[0].2 / w[1].2).ln() / (w[0].1 / w[1].1).ln()).collect();
    out.write("poisson_errors.csv", "csv", |w| {
        writeln!(w, "nodes,spacing,linf_relative_error,slope")?;
        for (i, (n, h, e)) in rows.iter().enumerate() {
            let slope = if i == 0 { String::new() } else { format!("{:.6}", slopes[i - 1]) };
            writeln!(w, "{n},{h:.8e},{e:.8e},{slope}")?;
        }
        Ok(())
    })?;
    let mut checks: Vec<Check> = slopes.iter().map(|s| Check::within("convergence_slope", *s, 1.7, 2.3)).collect();
    for (n, _, e) in &rows {
        if *n >= 257 {
            checks.push(Check::below(&format!("linf_relative_error_{n}"), *e, 0.02));
        }
    }
    Ok(checks)
}

fn levelcurves(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<Vec<Check>, CliError> {
    let (a, n) = (cfg.box_half_width, cfg.samples);
    let h = 2.0 * a / n as f64;
    // cell centers, so the collision q = 0 is never sampled when n is even
    let coord = |i: usize| -a + (i as f64 + 0.5) * h;
    out.write("levelcurves.csv", "csv", |w| {
        writeln!(w, "q1,q2,H")?;
        for i in 0..n {
            for j in 0..n {
                let q = Vec2::new(coord(i), coord(j));
                writeln!(w, "{:.8e},{:.8e},{:.12e}", q.x, q.y, symmetric_pair_hamiltonian(q, cfg.r0))?;
            }
        }
        Ok(())
    })?;
    Ok(Vec::new())
}
