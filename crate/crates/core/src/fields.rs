//! Concentrated vortex-ring fields: the near-field Green's function of Δ₅, the
//! regularized ring stream function, the leading vorticity, superposition onto a grid,
//! the advecting velocity and the ring speed constant.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxiGrid, FieldRole, ScalarField};
use crate::profiles::{self, ProfileConstants, RadialProfile};
use crate::reduced::RingFamily;
use crate::vec2::Vec2;

/// Cores are truncated outside |x − P_j| > TRUNCATION·ε_j.
pub const TRUNCATION: f64 = 20.0;
/// Outer radius of the mode-1 corrector profile.
pub const GAMMA_RADIUS: f64 = 100.0;

/// −2 log|x − P0|² (1 − 3(r − r0)/(2r0)): the Green's function of −Δ₅ near P0 up to an
/// additive constant and a factor 1/r0.
pub fn greens_near(x: Vec2, p0: Vec2) -> Result<f64> {
    let r0 = p0.x;
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("pole r0 = {r0} is not in r > 0")));
    }
    let d2 = (x - p0).norm2();
    if d2 == 0.0 {
        return Err(Error::Singular("x coincides with the pole".into()));
    }
    if d2.sqrt() >= 0.5 * r0 {
        return Err(Error::Domain(format!("|x - P0| = {} outside the near field r0/2", d2.sqrt())));
    }
    Ok(-2.0 * d2.ln() * (1.0 - 1.5 * (x.x - r0) / r0))
}

/// Which correction terms enter the ring stream function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingFieldOptions {
    pub include_h: bool,
    pub include_k: bool,
    pub include_gamma: bool,
}

impl Default for RingFieldOptions {
    fn default() -> Self {
        RingFieldOptions { include_h: false, include_k: false, include_gamma: true }
    }
}

impl RingFieldOptions {
    pub fn leading() -> Self {
        RingFieldOptions { include_h: false, include_k: false, include_gamma: false }
    }
}

/// Hooks for the second-order Green correction H and the regular part K. Both vanish
/// unless overridden.
pub trait RingCorrections: Sync {
    fn h(&self, _x: Vec2, _p0: Vec2) -> f64 {
        0.0
    }
    fn k(&self, _x: Vec2, _p0: Vec2) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroCorrections;

impl RingCorrections for ZeroCorrections {}

static GAMMA: OnceLock<std::result::Result<RadialProfile, Error>> = OnceLock::new();

/// The mode-1 corrector Γ on [0, 100], computed once per process.
pub fn gamma_profile() -> Result<&'static RadialProfile> {
    GAMMA
        .get_or_init(|| profiles::compute_gamma(GAMMA_RADIUS))
        .as_ref()
        .map_err(Clone::clone)
}

/// Regularized ring stream function with default (zero) H and K.
pub fn stream_ring(x: Vec2, p0: Vec2, eps: f64, opts: RingFieldOptions) -> Result<f64> {
    stream_ring_with(x, p0, eps, opts, &ZeroCorrections)
}

/// (1/r0)[ log(1/(ε² + |x−P0|²)²)(1 − 3(r−r0)/(2r0) + H) + K + ((r−r0)/(2r0)) Γ(|x−P0|/ε) ].
pub fn stream_ring_with(
    x: Vec2,
    p0: Vec2,
    eps: f64,
    opts: RingFieldOptions,
    corrections: &dyn RingCorrections,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} must lie in (0, 0.5)")));
    }
    let r0 = p0.x;
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("pole r0 = {r0} is not in r > 0")));
    }
    let d = x - p0;
    let dr = x.x - r0;
    let h = if opts.include_h { corrections.h(x, p0) } else { 0.0 };
    let k = if opts.include_k { corrections.k(x, p0) } else { 0.0 };
    let log_part = -2.0 * (eps * eps + d.norm2()).ln();
    let mut value = log_part * (1.0 - 1.5 * dr / r0 + h) + k;
    if opts.include_gamma {
        value += dr / (2.0 * r0) * gamma_profile()?.eval(d.norm() / eps);
    }
    Ok(value / r0)
}

/// (1/(r_j ε_j²)) U((x − P_j)/ε_j).
pub fn vorticity_leading(x: Vec2, p: Vec2, eps: f64) -> f64 {
    let y = (x - p) * (1.0 / eps);
    profiles::eval_u(y) / (p.x * eps * eps)
}

/// Samples Σ_j of the leading ring vorticities, each truncated to |x − P_j| ≤ 20ε_j.
pub fn superpose(rings: &RingFamily, grid: &AxiGrid) -> Result<ScalarField> {
    let spacing = grid.max_spacing();
    if let Some((j, &e)) = rings
        .core_scales()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        if e < 2.0 * spacing {
            return Err(Error::Resolution { ring: j, core: e, spacing });
        }
    }
    let mut values = vec![0.0; grid.len()];
    let nz = grid.nz();
    for (p, &e) in rings.centers().iter().zip(rings.core_scales()) {
        let reach = TRUNCATION * e;
        let i_lo = ((p.x - reach) / grid.hr()).floor().max(0.0) as usize;
        let i_hi = (((p.x + reach) / grid.hr()).ceil() as usize).min(grid.nr() - 1);
        let m_lo = ((p.y - reach - grid.z_min()) / grid.hz()).floor().max(0.0) as usize;
        let m_hi = ((((p.y + reach - grid.z_min()) / grid.hz()).ceil()).max(0.0) as usize).min(nz - 1);
        if m_lo > m_hi || i_lo > i_hi {
            continue;
        }
        values
            .par_chunks_mut(nz)
            .enumerate()
            .skip(i_lo)
            .take(i_hi - i_lo + 1)
            .for_each(|(i, row)| {
                for (m, v) in row.iter_mut().enumerate().take(m_hi + 1).skip(m_lo) {
                    let x = grid.point(i, m);
                    if (x - *p).norm() <= reach {
                        *v += vorticity_leading(x, *p, e);
                    }
                }
            });
    }
    ScalarField::from_values(*grid, values, FieldRole::RelativeVorticity)
}

/// Velocity components of the scaled transport equation,
/// u = ∇^⊥(r²ψ̃)/(r|log ε|) with ψ̃ = ψ − α₀|log ε|:
/// u_r = −r∂_zψ/|log ε| and u_z = (2ψ̃ + r∂_rψ)/|log ε|. On the axis u_r = 0 and u_z = 2ψ̃/|log ε|.
pub fn velocity_field(psi: &ScalarField, log_eps: f64, alpha0: f64) -> Result<(ScalarField, ScalarField)> {
    let l = log_eps.abs();
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidInput(format!("|log eps| = {l} must be positive")));
    }
    let g = *psi.grid();
    let (nr, nz) = (g.nr(), g.nz());
    let shift = alpha0 * l;
    let mut ur = vec![0.0; g.len()];
    let mut uz = vec![0.0; g.len()];
    ur.par_chunks_mut(nz).zip(uz.par_chunks_mut(nz)).enumerate().for_each(|(i, (ur_row, uz_row))| {
        let r = g.r(i);
        for m in 0..nz {
            let dpsi_dz = if m == 0 {
                (-3.0 * psi.at(i, 0) + 4.0 * psi.at(i, 1) - psi.at(i, 2)) / (2.0 * g.hz())
            } else if m == nz - 1 {
                (3.0 * psi.at(i, m) - 4.0 * psi.at(i, m - 1) + psi.at(i, m - 2)) / (2.0 * g.hz())
            } else {
                (psi.at(i, m + 1) - psi.at(i, m - 1)) / (2.0 * g.hz())
            };
            let dpsi_dr = if i == 0 {
                0.0
            } else if i == nr - 1 {
                (3.0 * psi.at(i, m) - 4.0 * psi.at(i - 1, m) + psi.at(i - 2, m)) / (2.0 * g.hr())
            } else {
                (psi.at(i + 1, m) - psi.at(i - 1, m)) / (2.0 * g.hr())
            };
            ur_row[m] = -r * dpsi_dz / l;
            uz_row[m] = (2.0 * (psi.at(i, m) - shift) + r * dpsi_dr) / l;
        }
    });
    Ok((
        ScalarField::from_values(g, ur, FieldRole::RelativeStream)?,
        ScalarField::from_values(g, uz, FieldRole::RelativeStream)?,
    ))
}

/// A₀ = 6 − log 8, the value for vanishing regular part K.
pub fn a_zero() -> f64 {
    6.0 - 8f64.ln()
}

/// α = 1/r0 − (A₀ − A)/(4 r0 log ε).
pub fn alpha_speed(r0: f64, eps: f64, consts: &ProfileConstants) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidInput(format!("r0 = {r0} must be positive")));
    }
    Ok(1.0 / r0 - (a_zero() - consts.a) / (4.0 * r0 * eps.ln()))
}
