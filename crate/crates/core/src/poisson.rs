//! The operator Δ₅ = ∂_rr + (3/r)∂_r + ∂_zz on an axis-including grid and solvers for
//! −Δ₅ψ = ω with far-field Dirichlet data.
//!
//! The radial part r⁻³∂_r(r³∂_r) is discretized by finite volumes in the measure r³dr,
//! which makes the matrix symmetric under the cell-volume weights and exact on r². On the
//! axis this reduces to the regular limit 4∂_rr with the reflection ψ(−hr) = ψ(hr),
//! i.e. 8(ψ₁ − ψ₀)/hr².

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxiGrid, FieldRole, ScalarField};

/// Max-norm residual of the discrete system relative to ‖ω‖_∞ that a solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Vorticity counts as present when it exceeds this fraction of its max norm.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;
/// Width in nodes of the outer band that must stay free of vorticity.
pub const BOUNDARY_BAND: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Sine transform in z and a tridiagonal solve in r per z-mode.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients on the r³-symmetrized system.
    ConjugateGradient,
}

/// Radial stencil at row i: coefficients of ψ_{i−1} and ψ_{i+1}. Finite volumes in the
/// measure r³dr: face weights r_{i±1/2}³ over the cell volume ∫ r³dr = hr⁴(i³ + i/4).
fn radial_coefficients(grid: &AxiGrid) -> (Vec<f64>, Vec<f64>) {
    let h2 = grid.hr() * grid.hr();
    let w = symmetric_weights(grid.nr());
    let mut lower = vec![0.0; grid.nr()];
    let mut upper = vec![0.0; grid.nr()];
    for i in 0..grid.nr() {
        let x = i as f64;
        if i > 0 {
            lower[i] = (x - 0.5).powi(3) / (h2 * w[i]);
        }
        upper[i] = (x + 0.5).powi(3) / (h2 * w[i]);
    }
    (lower, upper)
}

/// Cell volumes in units of hr⁴; the axis cell is [0, hr/2].
fn symmetric_weights(nr: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..nr).map(|i| (i as f64).powi(3) + 0.25 * i as f64).collect();
    w[0] = 1.0 / 64.0;
    w
}

/// Far-field monopole ψ = M/(4 s³), M = ∫ ω r³ dr dz, centred on the r³-weighted z-centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monopole {
    pub moment: f64,
    pub z_center: f64,
}

impl Monopole {
    pub fn of(omega: &ScalarField) -> Self {
        let g = omega.grid();
        let mut m = 0.0;
        let mut mz = 0.0;
        for i in 1..g.nr() {
            let w = g.r(i).powi(3);
            for j in 0..g.nz() {
                let v = w * omega.at(i, j);
                m += v;
                mz += v * g.z(j);
            }
        }
        let area = g.cell_area();
        let z_center = if m.abs() > 0.0 { mz / m } else { 0.0 };
        Monopole { moment: m * area, z_center }
    }

    pub fn eval(&self, r: f64, z: f64) -> f64 {
        let dz = z - self.z_center;
        let s2 = r * r + dz * dz;
        if self.moment == 0.0 {
            0.0
        } else {
            self.moment / (4.0 * s2 * s2.sqrt())
        }
    }
}

/// Reusable Δ₅ solver for one grid.
pub struct PoissonSolver {
    grid: AxiGrid,
    kind: SolverKind,
    lower: Vec<f64>,
    upper: Vec<f64>,
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver").field("grid", &self.grid).field("kind", &self.kind).finish()
    }
}

impl PoissonSolver {
    pub fn new(grid: AxiGrid, kind: SolverKind) -> Self {
        let (lower, upper) = radial_coefficients(&grid);
        let fft = FftPlanner::new().plan_fft_forward(2 * (grid.nz() - 1));
        PoissonSolver { grid, kind, lower, upper, weights: symmetric_weights(grid.nr()), fft }
    }

    pub fn grid(&self) -> &AxiGrid {
        &self.grid
    }

    /// Solves −Δ₅ψ = ω. ω must vanish on the outer band of the grid.
    pub fn solve(&self, omega: &ScalarField) -> Result<ScalarField> {
        if !omega.grid().same_shape(&self.grid) {
            return Err(Error::InvalidInput("vorticity lives on a differently shaped grid".into()));
        }
        let g = *omega.grid();
        let scale = omega.max_abs();
        check_support(omega, scale)?;
        if scale == 0.0 {
            return Ok(ScalarField::zeros(g, FieldRole::RelativeStream));
        }

        let mut psi = vec![0.0; g.len()];
        let far = Monopole::of(omega);
        for i in 0..g.nr() {
            for m in [0, g.nz() - 1] {
                psi[g.idx(i, m)] = far.eval(g.r(i), g.z(m));
            }
        }
        for m in 0..g.nz() {
            psi[g.idx(g.nr() - 1, m)] = far.eval(g.r_max(), g.z(m));
        }
        let rhs = self.reduced_rhs(omega, &psi);
        let iterations = match self.kind {
            SolverKind::Direct => {
                self.direct(&rhs, &mut psi);
                1
            }
            SolverKind::ConjugateGradient => self.conjugate_gradient(&rhs, &mut psi)?,
        };
        let field = ScalarField::from_values(g, psi, FieldRole::RelativeStream)
            .map_err(|_| Error::SolverDivergence { residual: f64::NAN, iterations })?;
        let residual = self.residual(&field, omega) / scale;
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::SolverDivergence { residual, iterations });
        }
        Ok(field)
    }

    /// Right-hand side on the unknown nodes (i < nr−1, 0 < m < nz−1) with the
    /// Dirichlet values moved across. Stored as (nr−1) rows of nz−2 entries.
    fn reduced_rhs(&self, omega: &ScalarField, psi: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let (ni, nm) = (g.nr() - 1, g.nz() - 2);
        let cz = 1.0 / (g.hz() * g.hz());
        let mut f = vec![0.0; ni * nm];
        for i in 0..ni {
            for k in 0..nm {
                let m = k + 1;
                let mut v = -omega.at(i, m);
                if m == 1 {
                    v -= cz * psi[g.idx(i, 0)];
                }
                if m == g.nz() - 2 {
                    v -= cz * psi[g.idx(i, g.nz() - 1)];
                }
                if i == ni - 1 {
                    v -= self.upper[i] * psi[g.idx(i + 1, m)];
                }
                f[i * nm + k] = v;
            }
        }
        f
    }

    /// In-place DST-I of each row of length nm (unnormalized).
    fn dst_rows(&self, data: &mut [f64], nm: usize) {
        let n = 2 * (nm + 1);
        let fft = &self.fft;
        data.par_chunks_mut(nm).for_each_init(
            || (vec![Complex::new(0.0, 0.0); n], vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()]),
            |(buf, scratch), row| {
                buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
                for (k, &v) in row.iter().enumerate() {
                    buf[k + 1].re = v;
                    buf[n - k - 1].re = -v;
                }
                fft.process_with_scratch(buf, scratch);
                for (k, v) in row.iter_mut().enumerate() {
                    *v = -0.5 * buf[k + 1].im;
                }
            },
        );
    }

    fn direct(&self, rhs: &[f64], psi: &mut [f64]) {
        let g = self.grid;
        let (ni, nm) = (g.nr() - 1, g.nz() - 2);
        let mut spec = rhs.to_vec();
        self.dst_rows(&mut spec, nm);
        let cz = 4.0 / (g.hz() * g.hz());
        let theta = PI / (2.0 * (nm + 1) as f64);
        let mut cp = vec![0.0; ni];
        let mut dp = vec![0.0; ni];
        for k in 0..nm {
            let lambda = cz * (theta * (k + 1) as f64).sin().powi(2);
            // Thomas algorithm on a diagonally dominant tridiagonal system
            for i in 0..ni {
                let diag = -(self.lower[i] + self.upper[i]) - lambda;
                let sub = self.lower[i];
                let (c_prev, d_prev) = if i == 0 { (0.0, 0.0) } else { (cp[i - 1], dp[i - 1]) };
                let denom = diag - sub * c_prev;
                cp[i] = self.upper[i] / denom;
                dp[i] = (spec[i * nm + k] - sub * d_prev) / denom;
            }
            let mut x = dp[ni - 1];
            spec[(ni - 1) * nm + k] = x;
            for i in (0..ni - 1).rev() {
                x = dp[i] - cp[i] * x;
                spec[i * nm + k] = x;
            }
        }
        self.dst_rows(&mut spec, nm);
        let norm = 2.0 / (nm + 1) as f64;
        for i in 0..ni {
            for k in 0..nm {
                psi[g.idx(i, k + 1)] = norm * spec[i * nm + k];
            }
        }
    }

    /// y = −W·A·x on the unknown nodes, with x zero on the Dirichlet nodes.
    fn apply_symmetric(&self, x: &[f64], y: &mut [f64]) {
        let g = self.grid;
        let (ni, nm) = (g.nr() - 1, g.nz() - 2);
        let cz = 1.0 / (g.hz() * g.hz());
        y.par_chunks_mut(nm).enumerate().for_each(|(i, row)| {
            let w = self.weights[i];
            for k in 0..nm {
                let c = x[i * nm + k];
                let mut a = -(self.lower[i] + self.upper[i] + 2.0 * cz) * c;
                if i > 0 {
                    a += self.lower[i] * x[(i - 1) * nm + k];
                }
                if i + 1 < ni {
                    a += self.upper[i] * x[(i + 1) * nm + k];
                }
                if k > 0 {
                    a += cz * x[i * nm + k - 1];
                }
                if k + 1 < nm {
                    a += cz * x[i * nm + k + 1];
                }
                row[k] = -w * a;
            }
        });
    }

    fn conjugate_gradient(&self, rhs: &[f64], psi: &mut [f64]) -> Result<usize> {
        let g = self.grid;
        let (ni, nm) = (g.nr() - 1, g.nz() - 2);
        let n = ni * nm;
        let cz = 1.0 / (g.hz() * g.hz());
        let b: Vec<f64> = (0..n).map(|k| -self.weights[k / nm] * rhs[k]).collect();
        let diag: Vec<f64> = (0..n)
            .map(|k| {
                let i = k / nm;
                self.weights[i] * (self.lower[i] + self.upper[i] + 2.0 * cz)
            })
            .collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let b_norm = dot(&b, &b).sqrt();
        let mut x = vec![0.0; n];
        let mut r = b.clone();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let max_iter = 50 * (ni + nm) + 1000;
        let mut iterations = 0;
        while iterations < max_iter {
            if dot(&r, &r).sqrt() <= 1e-14 * b_norm {
                break;
            }
            self.apply_symmetric(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            for k in 0..n {
                z[k] = r[k] / diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
            iterations += 1;
        }
        if iterations == max_iter {
            return Err(Error::SolverDivergence { residual: dot(&r, &r).sqrt() / b_norm, iterations });
        }
        for i in 0..ni {
            for k in 0..nm {
                psi[g.idx(i, k + 1)] = x[i * nm + k];
            }
        }
        Ok(iterations)
    }

    /// max over unknown nodes of |Δ₅,h ψ + ω|.
    pub fn residual(&self, psi: &ScalarField, omega: &ScalarField) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for i in 0..g.nr() - 1 {
            for m in 1..g.nz() - 1 {
                worst = worst.max((self.stencil(psi, i, m) + omega.at(i, m)).abs());
            }
        }
        worst
    }

    #[inline]
    fn stencil(&self, psi: &ScalarField, i: usize, m: usize) -> f64 {
        let g = self.grid;
        let c = psi.at(i, m);
        let cz = 1.0 / (g.hz() * g.hz());
        let mut v = self.upper[i] * (psi.at(i + 1, m) - c) + cz * (psi.at(i, m + 1) - 2.0 * c + psi.at(i, m - 1));
        if i > 0 {
            v -= self.lower[i] * (c - psi.at(i - 1, m));
        }
        v
    }
}

fn check_support(omega: &ScalarField, scale: f64) -> Result<()> {
    let g = omega.grid();
    let thr = SUPPORT_THRESHOLD * scale;
    let band = BOUNDARY_BAND;
    for i in 0..g.nr() {
        for m in 0..g.nz() {
            let outer = i + band >= g.nr() || m < band || m + band >= g.nz();
            if outer && omega.at(i, m).abs() > thr {
                return Err(Error::Domain(format!(
                    "vorticity reaches the outer boundary band at (r, z) = ({:.4}, {:.4})",
                    g.r(i),
                    g.z(m)
                )));
            }
        }
    }
    Ok(())
}

/// Solves −Δ₅ψ = ω on ω's grid with the direct solver.
pub fn solve_delta5(omega: &ScalarField) -> Result<ScalarField> {
    PoissonSolver::new(*omega.grid(), SolverKind::Direct).solve(omega)
}

/// Discrete Δ₅ψ. Interior and axis nodes use the solver's stencil; the outer boundary
/// nodes use second-order one-sided differences.
pub fn apply_delta5(psi: &ScalarField) -> ScalarField {
    let g = *psi.grid();
    let solver_coeffs = radial_coefficients(&g);
    let (lower, upper) = (&solver_coeffs.0, &solver_coeffs.1);
    let (hr2, hz2) = (g.hr() * g.hr(), g.hz() * g.hz());
    let (nr, nz) = (g.nr(), g.nz());
    let mut out = vec![0.0; g.len()];
    for i in 0..nr {
        for m in 0..nz {
            let c = psi.at(i, m);
            let dzz = if m == 0 {
                (2.0 * c - 5.0 * psi.at(i, 1) + 4.0 * psi.at(i, 2) - psi.at(i, 3)) / hz2
            } else if m == nz - 1 {
                (2.0 * c - 5.0 * psi.at(i, m - 1) + 4.0 * psi.at(i, m - 2) - psi.at(i, m - 3)) / hz2
            } else {
                (psi.at(i, m + 1) - 2.0 * c + psi.at(i, m - 1)) / hz2
            };
            let radial = if i == 0 {
                upper[0] * (psi.at(1, m) - c)
            } else if i < nr - 1 {
                upper[i] * (psi.at(i + 1, m) - c) - lower[i] * (c - psi.at(i - 1, m))
            } else {
                let drr = (2.0 * c - 5.0 * psi.at(i - 1, m) + 4.0 * psi.at(i - 2, m) - psi.at(i - 3, m)) / hr2;
                let dr = (3.0 * c - 4.0 * psi.at(i - 1, m) + psi.at(i - 2, m)) / (2.0 * g.hr());
                drr + 3.0 * dr / g.r(i)
            };
            out[g.idx(i, m)] = radial + dzz;
        }
    }
    ScalarField::from_values(g, out, FieldRole::RelativeVorticity)
        .unwrap_or_else(|_| ScalarField::zeros(g, FieldRole::RelativeVorticity))
}

/// ω = 15(1+s²)^{−7/2}, the source whose Δ₅ potential is (1+s²)^{−3/2}.
pub fn analytic_source(r: f64, z: f64) -> f64 {
    15.0 * (1.0 + r * r + z * z).powf(-3.5)
}

pub fn analytic_potential(r: f64, z: f64) -> f64 {
    (1.0 + r * r + z * z).powf(-1.5)
}

/// The analytic source sampled on `grid` with the outer band zeroed.
pub fn analytic_source_field(grid: AxiGrid) -> ScalarField {
    let band = BOUNDARY_BAND;
    let mut f = ScalarField::from_fn(grid, FieldRole::RelativeVorticity, analytic_source)
        .unwrap_or_else(|_| ScalarField::zeros(grid, FieldRole::RelativeVorticity));
    let (nr, nz) = (grid.nr(), grid.nz());
    for i in 0..nr {
        for m in 0..nz {
            if i + band >= nr || m < band || m + band >= nz {
                f.values_mut()[grid.idx(i, m)] = 0.0;
            }
        }
    }
    f
}
