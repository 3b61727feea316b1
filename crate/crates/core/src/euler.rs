//! Semi-Lagrangian transport for the scaled axisymmetric Euler equation
//!
//!   |log ε| r ∂_τW + ∇^⊥(r²(Ψ − α₀|log ε|))·∇W = 0,   −Δ₅Ψ = W,
//!
//! i.e. ∂_τW + u·∇W = 0 with u from [`velocity_field`].

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{track_centroids, CenterSeries};
use crate::error::{Error, Result};
use crate::fields::{superpose, velocity_field};
use crate::grid::{AxiGrid, FieldRole, ScalarField};
use crate::poisson::{PoissonSolver, SolverKind, BOUNDARY_BAND};
use crate::reduced::RingFamily;
use crate::vec2::Vec2;

/// Values below this fraction of the initial max norm are set to zero after each step.
pub const FLUSH_FRACTION: f64 = 1e-10;
/// Vorticity must stay this many cells away from the outer boundary.
pub const BOUNDARY_CLEARANCE: usize = 10;
/// Vorticity counts for the clearance check above this fraction of the initial max norm.
pub const CLEARANCE_FRACTION: f64 = 1e-6;
/// Displacement per substep, in cells, that triggers a warning.
pub const CFL_WARN: f64 = 5.0;
/// Displacement per substep, in cells, that aborts the step.
pub const CFL_FAIL: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    Bilinear,
    /// Catmull-Rom bicubic clamped to the range of the enclosing cell.
    #[default]
    MonotoneBicubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub r0: f64,
    pub alpha0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub grid: AxiGrid,
    pub interp: Interp,
    pub substeps: usize,
    #[serde(default)]
    pub poisson: SolverKind,
    /// Translate the grid window in whole cells to follow the vorticity in z.
    #[serde(default)]
    pub recenter: bool,
    /// Vorticity above this fraction of the initial peak may not come within
    /// [`BOUNDARY_CLEARANCE`] cells of the outer boundary. Weaker vorticity leaves through
    /// the absorbing band.
    #[serde(default = "default_clearance")]
    pub clearance_fraction: f64,
    /// Re-trace characteristics with a predicted end-of-step velocity.
    #[serde(default = "default_true")]
    pub predictor_corrector: bool,
}

fn default_true() -> bool {
    true
}

fn default_clearance() -> f64 {
    CLEARANCE_FRACTION
}

impl SolverConfig {
    /// Defaults α₀ = 1/r0, monotone bicubic interpolation, four substeps and the
    /// predictor-corrector step.
    pub fn new(epsilon: f64, r0: f64, dt: f64, t_end: f64, grid: AxiGrid) -> Self {
        SolverConfig {
            epsilon,
            r0,
            alpha0: 1.0 / r0,
            dt,
            t_end,
            grid,
            interp: Interp::default(),
            substeps: 4,
            poisson: SolverKind::Direct,
            recenter: false,
            clearance_fraction: CLEARANCE_FRACTION,
            predictor_corrector: true,
        }
    }

    pub fn log_eps(&self) -> f64 {
        self.epsilon.ln().abs()
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        if !(self.r0 > 0.0) || !self.alpha0.is_finite() {
            return Err(Error::InvalidInput("need r0 > 0 and finite alpha0".into()));
        }
        if !(self.dt > 0.0) || !(self.t_end >= self.dt) {
            return Err(Error::InvalidInput(format!("need dt > 0 and T >= dt, got {} and {}", self.dt, self.t_end)));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidInput("substeps must be at least 1".into()));
        }
        if !(self.clearance_fraction > 0.0 && self.clearance_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "clearance fraction {} must lie in (0, 1)",
                self.clearance_fraction
            )));
        }
        let spacing = self.grid.max_spacing();
        if self.epsilon < 2.0 * spacing {
            return Err(Error::Resolution { ring: 0, core: self.epsilon, spacing });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub tau: f64,
    pub omega: ScalarField,
    pub psi: ScalarField,
    pub mass0: f64,
    pub maxnorm0: f64,
}

/// Holds the reusable Δ₅ solver for one configuration.
#[derive(Debug)]
pub struct EulerSolver {
    cfg: SolverConfig,
    poisson: PoissonSolver,
}

impl EulerSolver {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let poisson = PoissonSolver::new(cfg.grid, cfg.poisson);
        Ok(EulerSolver { cfg, poisson })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn init(&self, rings: &RingFamily) -> Result<SolverState> {
        let omega = superpose(rings, &self.cfg.grid)?;
        self.state_from(0.0, omega)
    }

    /// State for given vorticity; Ψ is solved and the conserved references recorded.
    pub fn state_from(&self, tau: f64, omega: ScalarField) -> Result<SolverState> {
        check_clearance(&omega, self.cfg.clearance_fraction * omega.max_abs())?;
        let psi = self.poisson.solve(&omega)?;
        Ok(SolverState { tau, mass0: omega.weighted_mass(), maxnorm0: omega.max_abs(), omega, psi })
    }

    /// One step. With `predictor_corrector` the first pass with the start-of-step velocity
    /// only provides an end-of-step Ψ; the second pass traces characteristics through the
    /// velocity interpolated linearly in time between the two, which makes the step
    /// second order in dt.
    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        let cfg = &self.cfg;
        let g = *state.omega.grid();
        let (ur, uz) = velocity_field(&state.psi, cfg.log_eps(), cfg.alpha0)?;
        if let Some(k) = ur.values().iter().chain(uz.values()).position(|v| !v.is_finite()) {
            log::error!("non-finite velocity at flat index {k}");
            return Err(Error::NonFinite(state.tau));
        }
        let start = self.stream_velocity(&state.psi);
        let next = if cfg.predictor_corrector {
            let guess = self.advect(state, &start, None)?;
            let mut guess = ScalarField::from_values(g, guess, FieldRole::RelativeVorticity)
                .map_err(|_| Error::NonFinite(state.tau + cfg.dt))?;
            absorb_outer_band(&mut guess);
            let psi_end = self.poisson.solve(&guess)?;
            let end = self.stream_velocity(&psi_end);
            self.advect(state, &start, Some(&end))?
        } else {
            self.advect(state, &start, None)?
        };
        let mut omega = ScalarField::from_values(g, next, FieldRole::RelativeVorticity)
            .map_err(|_| Error::NonFinite(state.tau + cfg.dt))?;
        if cfg.recenter {
            omega = recenter(omega);
        }
        absorb_outer_band(&mut omega);
        check_clearance(&omega, cfg.clearance_fraction * state.maxnorm0)?;
        let psi = self.poisson.solve(&omega)?;
        Ok(SolverState {
            tau: state.tau + cfg.dt,
            omega,
            psi,
            mass0: state.mass0,
            maxnorm0: state.maxnorm0,
        })
    }

    fn stream_velocity<'a>(&self, psi: &'a ScalarField) -> StreamVelocity<'a> {
        StreamVelocity {
            psi: psi.values(),
            grid: *psi.grid(),
            inv_l: 1.0 / self.cfg.log_eps(),
            shift: self.cfg.alpha0 * self.cfg.log_eps(),
        }
    }

    /// Semi-Lagrangian pass over all nodes. Without `end` the velocity is frozen at
    /// `start`; otherwise it moves linearly from `start` to `end` across the step.
    fn advect(&self, state: &SolverState, start: &StreamVelocity, end: Option<&StreamVelocity>) -> Result<Vec<f64>> {
        let cfg = &self.cfg;
        let g = *state.omega.grid();
        let n_sub = cfg.substeps;
        let h = cfg.dt / n_sub as f64;
        let vel = |x: Vec2, theta: f64| match end {
            Some(e) => start.at(x) * (1.0 - theta) + e.at(x) * theta,
            None => start.at(x),
        };
        let min_cell = g.hr().min(g.hz());
        let w = state.omega.values();
        let flush = FLUSH_FRACTION * state.maxnorm0;
        let nz = g.nz();
        let mut next = vec![0.0; g.len()];
        let worst = next
            .par_chunks_mut(nz)
            .enumerate()
            .map(|(i, row)| {
                let mut worst: f64 = 0.0;
                for (m, out) in row.iter_mut().enumerate() {
                    let mut x = g.point(i, m);
                    for s in 0..n_sub {
                        let theta = 1.0 - s as f64 / n_sub as f64;
                        let k1 = vel(x, theta);
                        let k2 = vel(x - k1 * (0.5 * h), theta - 0.5 / n_sub as f64);
                        let dx = k2 * h;
                        worst = worst.max(dx.norm() / min_cell);
                        x = x - dx;
                        if x.x < 0.0 {
                            x.x = -x.x;
                        }
                    }
                    let v = sample(w, &g, x, cfg.interp);
                    *out = if v.abs() < flush { 0.0 } else { v };
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        if worst > CFL_FAIL {
            return Err(Error::Cfl { cells: worst });
        }
        if worst > CFL_WARN {
            log::warn!("characteristic displacement {worst:.1} cells per substep at tau = {:.4}", state.tau);
        }
        Ok(next)
    }

    /// Steps to T, recording conserved quantities and window centroids every step and
    /// snapshots every `snapshot_every` steps (never when zero). Windows shrink as rings
    /// approach each other; rings closer than ε share one window, see
    /// [`track_centroids`].
    pub fn run(&self, rings: &RingFamily, window_radius: f64, snapshot_every: usize) -> Result<RunOutput> {
        let mut state = self.init(rings)?;
        let mut out = RunOutput {
            centers: CenterSeries::new(window_radius),
            conserved: Vec::new(),
            snapshots: Vec::new(),
        };
        let mut prev = rings.centers().to_vec();
        let mut merged = false;
        let steps = self.cfg.steps();
        for n in 0..=steps {
            if n > 0 {
                state = self.step(&state)?;
            }
            out.conserved.push(Conserved {
                tau: state.tau,
                mass: state.omega.weighted_mass(),
                maxnorm: state.omega.max_abs(),
            });
            if !prev.is_empty() {
                let (next, radius) = track_centroids(&state.omega, &prev, window_radius, self.cfg.epsilon)?;
                if !merged && min_distance(&next) < self.cfg.epsilon {
                    log::warn!("ring windows merged at tau = {:.4}", state.tau);
                    merged = true;
                }
                prev = next;
                out.centers.push_with_radius(state.tau, prev.clone(), radius);
            }
            if snapshot_every > 0 && n % snapshot_every == 0 {
                out.snapshots.push((state.tau, state.omega.clone()));
            }
            if n % 100 == 0 {
                log::debug!("step {n}/{steps} tau = {:.4}", state.tau);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub tau: f64,
    pub mass: f64,
    pub maxnorm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub centers: CenterSeries,
    pub conserved: Vec<Conserved>,
    pub snapshots: Vec<(f64, ScalarField)>,
}

impl RunOutput {
    /// max_τ |m(τ) − m(0)|/|m(0)| for the r-weighted mass (0 when m(0) = 0).
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.conserved.first().map_or(0.0, |c| c.mass);
        if m0 == 0.0 {
            return 0.0;
        }
        self.conserved.iter().fold(0.0, |a, c| a.max(((c.mass - m0) / m0).abs()))
    }

    /// max_τ ‖W(τ)‖_∞/‖W(0)‖_∞ − 1 (0 when W(0) = 0).
    pub fn maxnorm_growth(&self) -> f64 {
        let w0 = self.conserved.first().map_or(0.0, |c| c.maxnorm);
        if w0 == 0.0 {
            return 0.0;
        }
        self.conserved.iter().fold(0.0, |a, c| a.max(c.maxnorm / w0 - 1.0))
    }

    /// CSV with columns tau, mass, maxnorm.
    pub fn write_conserved_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,mass,maxnorm")?;
        for c in &self.conserved {
            writeln!(w, "{:.12e},{:.15e},{:.15e}", c.tau, c.mass, c.maxnorm)?;
        }
        Ok(())
    }
}

pub fn init(rings: &RingFamily, cfg: &SolverConfig) -> Result<SolverState> {
    EulerSolver::new(cfg.clone())?.init(rings)
}

pub fn step(state: &SolverState, cfg: &SolverConfig) -> Result<SolverState> {
    EulerSolver::new(cfg.clone())?.step(state)
}

pub fn run(rings: &RingFamily, cfg: &SolverConfig, window_radius: f64, snapshot_every: usize) -> Result<RunOutput> {
    EulerSolver::new(cfg.clone())?.run(rings, window_radius, snapshot_every)
}

fn min_distance(centers: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            best = best.min((*a - *b).norm());
        }
    }
    best
}

/// Whole-cell offset between the r-weighted z-centroid and the middle of the grid beyond
/// which [`recenter`] moves the window.
pub const RECENTER_CELLS: f64 = 8.0;

/// Translates the field and its grid by whole cells so that the r-weighted z-centroid sits
/// near the middle. Exact: values are moved, not interpolated, and entering cells are zero.
pub fn recenter(omega: ScalarField) -> ScalarField {
    let g = *omega.grid();
    let mass = omega.weighted_mass();
    if mass == 0.0 {
        return omega;
    }
    let mut mz = 0.0;
    for i in 1..g.nr() {
        for m in 0..g.nz() {
            mz += g.r(i) * omega.at(i, m) * m as f64;
        }
    }
    let centroid = mz * g.cell_area() / mass;
    let offset = centroid - 0.5 * (g.nz() - 1) as f64;
    if offset.abs() <= RECENTER_CELLS {
        return omega;
    }
    let k = offset.round() as isize;
    let nz = g.nz() as isize;
    let old = omega.values();
    let mut values = vec![0.0; g.len()];
    for i in 0..g.nr() {
        for m in 0..nz {
            let src = m + k;
            if (0..nz).contains(&src) {
                values[g.idx(i, m as usize)] = old[g.idx(i, src as usize)];
            }
        }
    }
    log::debug!("recentred grid by {k} cells");
    ScalarField::from_values(g.shifted(k), values, FieldRole::RelativeVorticity).unwrap_or(omega)
}

/// Zeroes the outer band of nodes: vorticity carried there has left the domain.
fn absorb_outer_band(omega: &mut ScalarField) {
    let g = *omega.grid();
    let band = BOUNDARY_BAND;
    let values = omega.values_mut();
    for i in 0..g.nr() {
        for m in 0..g.nz() {
            if i + band >= g.nr() || m < band || m + band >= g.nz() {
                values[g.idx(i, m)] = 0.0;
            }
        }
    }
}

fn check_clearance(omega: &ScalarField, thr: f64) -> Result<()> {
    let g = omega.grid();
    let band = BOUNDARY_CLEARANCE;
    for i in 0..g.nr() {
        for m in 0..g.nz() {
            let outer = i + band >= g.nr() || m < band || m + band >= g.nz();
            if outer && omega.at(i, m).abs() > thr {
                return Err(Error::Domain(format!(
                    "vorticity within {band} cells of the boundary at (r, z) = ({:.4}, {:.4})",
                    g.r(i),
                    g.z(m)
                )));
            }
        }
    }
    Ok(())
}

/// Velocity from the Catmull-Rom interpolant of Ψ and its exact derivatives:
/// u_r = −r∂_zΨ/|log ε|, u_z = (2(Ψ − α₀|log ε|) + r∂_rΨ)/|log ε|. For any C¹ interpolant
/// this satisfies ∂_r(r u_r) + ∂_z(r u_z) = 0 pointwise. Ψ is even across the axis, so
/// u_r is odd and u_z even there.
struct StreamVelocity<'a> {
    psi: &'a [f64],
    grid: AxiGrid,
    inv_l: f64,
    shift: f64,
}

fn catmull_rom_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [
            0.5 * (-t + 2.0 * t2 - t3),
            0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
            0.5 * (t + 4.0 * t2 - 3.0 * t3),
            0.5 * (-t2 + t3),
        ],
        [
            0.5 * (-1.0 + 4.0 * t - 3.0 * t2),
            0.5 * (-10.0 * t + 9.0 * t2),
            0.5 * (1.0 + 8.0 * t - 9.0 * t2),
            0.5 * (-2.0 * t + 3.0 * t2),
        ],
    )
}

impl StreamVelocity<'_> {
    /// Ψ at node (i, m), reflected across the axis and held constant beyond the grid.
    #[inline]
    fn node(&self, i: isize, m: isize) -> f64 {
        let g = &self.grid;
        let i = i.unsigned_abs().min(g.nr() - 1);
        let m = m.clamp(0, g.nz() as isize - 1) as usize;
        self.psi[g.idx(i, m)]
    }

    fn at(&self, x: Vec2) -> Vec2 {
        let g = &self.grid;
        let sign = if x.x < 0.0 { -1.0 } else { 1.0 };
        let r = x.x.abs();
        let fr = (r / g.hr()).min((g.nr() - 1) as f64);
        let fz = ((x.y - g.z_min()) / g.hz()).clamp(0.0, (g.nz() - 1) as f64);
        let i = (fr.floor() as isize).min(g.nr() as isize - 2);
        let m = (fz.floor() as isize).min(g.nz() as isize - 2);
        let (wr, dwr) = catmull_rom_weights(fr - i as f64);
        let (wz, dwz) = catmull_rom_weights(fz - m as f64);
        let (mut p, mut pr, mut pz) = (0.0, 0.0, 0.0);
        for a in 0..4 {
            let (mut row, mut row_dz) = (0.0, 0.0);
            for b in 0..4 {
                let v = self.node(i - 1 + a as isize, m - 1 + b as isize);
                row += wz[b] * v;
                row_dz += dwz[b] * v;
            }
            p += wr[a] * row;
            pr += dwr[a] * row;
            pz += wr[a] * row_dz;
        }
        let (dpsi_dr, dpsi_dz) = (pr / g.hr(), pz / g.hz());
        Vec2::new(
            -sign * r * dpsi_dz * self.inv_l,
            (2.0 * (p - self.shift) + r * dpsi_dr) * self.inv_l,
        )
    }
}

/// Node value with reflection across the axis and zero outside the grid.
#[inline]
fn node(w: &[f64], g: &AxiGrid, i: isize, m: isize) -> f64 {
    let i = i.unsigned_abs();
    if i >= g.nr() || m < 0 || m as usize >= g.nz() {
        0.0
    } else {
        w[g.idx(i, m as usize)]
    }
}

fn catmull_rom(p: [f64; 4], t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * (2.0 * p[1]
        + (p[2] - p[0]) * t
        + (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * t2
        + (3.0 * (p[1] - p[2]) + p[3] - p[0]) * t3)
}

/// Interpolates W at a foot point with r ≥ 0; points beyond the grid read zero.
fn sample(w: &[f64], g: &AxiGrid, x: Vec2, interp: Interp) -> f64 {
    let fr = x.x / g.hr();
    let fz = (x.y - g.z_min()) / g.hz();
    if fr > (g.nr() - 1) as f64 || fz < 0.0 || fz > (g.nz() - 1) as f64 {
        return 0.0;
    }
    let i = (fr.floor() as isize).min(g.nr() as isize - 2);
    let m = (fz.floor() as isize).min(g.nz() as isize - 2);
    let (tr, tz) = (fr - i as f64, fz - m as f64);
    let c00 = node(w, g, i, m);
    let c01 = node(w, g, i, m + 1);
    let c10 = node(w, g, i + 1, m);
    let c11 = node(w, g, i + 1, m + 1);
    match interp {
        Interp::Bilinear => (c00 * (1.0 - tz) + c01 * tz) * (1.0 - tr) + (c10 * (1.0 - tz) + c11 * tz) * tr,
        Interp::MonotoneBicubic => {
            let mut rows = [0.0; 4];
            for (a, row) in rows.iter_mut().enumerate() {
                let ii = i - 1 + a as isize;
                let p = [
                    node(w, g, ii, m - 1),
                    node(w, g, ii, m),
                    node(w, g, ii, m + 1),
                    node(w, g, ii, m + 2),
                ];
                *row = catmull_rom(p, tz);
            }
            let v = catmull_rom(rows, tr);
            let lo = c00.min(c01).min(c10).min(c11);
            let hi = c00.max(c01).max(c10).max(c11);
            v.clamp(lo, hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_grid() -> AxiGrid {
        AxiGrid::from_extents(65, 129, 2.0, -2.0, 2.0).unwrap()
    }

    #[test]
    fn config_validation() {
        let g = small_grid();
        assert!(SolverConfig::new(0.1, 1.0, 1e-3, 1e-2, g).validate().is_ok());
        assert!(SolverConfig::new(0.1, 1.0, 0.0, 1e-2, g).validate().is_err());
        assert!(SolverConfig::new(0.1, 1.0, 1e-2, 1e-3, g).validate().is_err());
        assert!(matches!(SolverConfig::new(0.05, 1.0, 1e-3, 1e-2, g).validate(), Err(Error::Resolution { .. })));
        let mut c = SolverConfig::new(0.1, 1.0, 1e-3, 1e-2, g);
        c.substeps = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn catmull_rom_reproduces_cubics_at_nodes() {
        let p = [1.0, 2.0, 4.0, 8.0];
        assert_eq!(catmull_rom(p, 0.0), 2.0);
        assert_eq!(catmull_rom(p, 1.0), 4.0);
        // exact on quadratics
        let q = |x: f64| x * x - 3.0 * x;
        let v = catmull_rom([q(-1.0), q(0.0), q(1.0), q(2.0)], 0.3);
        assert_relative_eq!(v, q(0.3), epsilon = 1e-14);
    }

    #[test]
    fn sample_reflects_and_zeroes_outside() {
        let g = small_grid();
        let f = ScalarField::from_fn(g, FieldRole::RelativeVorticity, |r, z| 1.0 + r * r + z).unwrap();
        for interp in [Interp::Bilinear, Interp::MonotoneBicubic] {
            let v = sample(f.values(), &g, Vec2::new(g.r(3), g.z(7)), interp);
            assert_relative_eq!(v, f.at(3, 7), epsilon = 1e-14);
            assert_eq!(sample(f.values(), &g, Vec2::new(3.0, 0.0), interp), 0.0);
            assert_eq!(sample(f.values(), &g, Vec2::new(1.0, 5.0), interp), 0.0);
        }
        // near the axis the reflected stencil sees an even function
        let v = sample(f.values(), &g, Vec2::new(0.5 * g.hr(), 0.0), Interp::MonotoneBicubic);
        assert!((v - (1.0 + 0.25 * g.hr() * g.hr())).abs() < 1e-3 * g.hr());
    }

    #[test]
    fn zero_state_stays_zero() {
        let cfg = SolverConfig::new(0.1, 1.0, 1e-2, 5e-2, small_grid());
        let fam = RingFamily::empty(0.1, 1.0);
        let out = run(&fam, &cfg, 0.1, 1).unwrap();
        assert_eq!(out.conserved.len(), 6);
        assert!(out.conserved.iter().all(|c| c.mass == 0.0 && c.maxnorm == 0.0));
        assert!(out.snapshots.iter().all(|(_, s)| s.max_abs() == 0.0));
        assert!(out.centers.is_empty());
    }

    #[test]
    fn uniform_translation_is_a_shift() {
        // Ψ ≡ 0 forced by a zero source: W moves by −2α₀ dt per step in z.
        let g = AxiGrid::from_extents(33, 161, 2.0, -2.0, 2.0).unwrap();
        let mut cfg = SolverConfig::new(0.2, 1.0, 1e-2, 1e-2, g);
        cfg.alpha0 = 1.25;
        let solver = EulerSolver::new(cfg.clone()).unwrap();
        let blob = |r: f64, z: f64| {
            let d2 = ((r - 1.0).powi(2) + z * z) / 0.09;
            if d2 < 1.0 { (1.0 - d2).powi(4) } else { 0.0 }
        };
        let omega = ScalarField::from_fn(g, FieldRole::RelativeVorticity, blob).unwrap();
        let state = SolverState {
            tau: 0.0,
            psi: ScalarField::zeros(g, FieldRole::RelativeStream),
            mass0: omega.weighted_mass(),
            maxnorm0: omega.max_abs(),
            omega,
        };
        let next = solver.step(&state).unwrap();
        let shift = -2.0 * cfg.alpha0 * cfg.dt;
        let mut err: f64 = 0.0;
        for i in 0..g.nr() {
            for m in 0..g.nz() {
                err = err.max((next.omega.at(i, m) - blob(g.r(i), g.z(m) - shift)).abs());
            }
        }
        assert!(err < 2e-3, "{err}");
    }

    #[test]
    fn recenter_moves_whole_cells() {
        let g = AxiGrid::from_extents(17, 65, 2.0, -2.0, 2.0).unwrap();
        let blob = |r: f64, z: f64| if (r - 1.0).abs() < 0.2 && (z - 1.0).abs() < 0.2 { 1.0 } else { 0.0 };
        let f = ScalarField::from_fn(g, FieldRole::RelativeVorticity, blob).unwrap();
        let moved = recenter(f.clone());
        assert_eq!(moved.grid().z_min(), -2.0 + 16.0 * g.hz());
        assert_eq!(moved.weighted_mass(), f.weighted_mass());
        for i in 0..g.nr() {
            for m in 0..g.nz() {
                let gm = moved.grid();
                assert_eq!(moved.at(i, m), blob(gm.r(i), gm.z(m)));
            }
        }
        // already centred fields are untouched
        assert_eq!(recenter(moved.clone()), moved);
    }

    #[test]
    fn single_ring_step_is_positive_and_bounded() {
        let g = AxiGrid::from_extents(141, 201, 3.5, -2.5, 2.5).unwrap();
        let cfg = SolverConfig::new(0.1, 1.0, 1e-3, 1e-2, g);
        let fam = RingFamily::from_centers(vec![Vec2::new(1.0, 0.0)], 0.1, 1.0).unwrap();
        let solver = EulerSolver::new(cfg).unwrap();
        let s0 = solver.init(&fam).unwrap();
        assert_relative_eq!(s0.maxnorm0, 800.0, max_relative = 1e-2);
        let mut s = s0.clone();
        for _ in 0..5 {
            s = solver.step(&s).unwrap();
        }
        assert!(s.omega.min() >= -1e-12 * s0.maxnorm0);
        assert!(s.omega.max_abs() <= s0.maxnorm0 * (1.0 + 1e-12));
        assert!((s.omega.weighted_mass() / s0.mass0 - 1.0).abs() < 5e-3);
    }
}
