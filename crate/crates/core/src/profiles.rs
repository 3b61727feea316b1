//! Kaufmann–Scully vortex profile, the Liouville potential Γ₀, the kernels of the
//! linearized Liouville operator, and the radial mode solver for
//! ℒ_n[p] = p'' + p'/ρ − n²p/ρ² + 8p/(1+ρ²)².

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::vec2::Vec2;

/// Relative tolerance of the mode-1 solvability check.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// A function of ρ = |y| sampled on ascending abscissas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    rho: Vec<f64>,
    values: Vec<f64>,
    mode_n: i32,
}

impl RadialProfile {
    pub fn new(rho: Vec<f64>, values: Vec<f64>, mode_n: i32) -> Result<Self> {
        if rho.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "profile has {} abscissas but {} values",
                rho.len(),
                values.len()
            )));
        }
        if rho.is_empty() {
            return Err(Error::InvalidInput("empty profile".into()));
        }
        if rho[0] < 0.0 || !rho[0].is_finite() {
            return Err(Error::InvalidInput(format!("rho[0] = {} must be >= 0", rho[0])));
        }
        if rho.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("rho must be strictly increasing".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite profile value at rho = {}", rho[i])));
        }
        Ok(RadialProfile { rho, values, mode_n })
    }

    /// Uniform grid ρ_i = i·h, i = 0..=n, sampled from `f`.
    pub fn uniform<F: Fn(f64) -> f64>(h: f64, rho_max: f64, mode_n: i32, f: F) -> Result<Self> {
        if !(h > 0.0) || !(rho_max > h) {
            return Err(Error::InvalidInput(format!("bad uniform grid h = {h}, rho_max = {rho_max}")));
        }
        let n = (rho_max / h).round() as usize;
        let rho: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let values = rho.iter().map(|&r| f(r)).collect();
        RadialProfile::new(rho, values, mode_n)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode_n(&self) -> i32 {
        self.mode_n
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Spacing when the abscissas are uniform to 1e-9 relative.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.rho.len() < 2 {
            return None;
        }
        let h = (self.rho[self.rho.len() - 1] - self.rho[0]) / (self.rho.len() - 1) as f64;
        let uniform = self
            .rho
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1e-300));
        uniform.then_some(h)
    }

    /// Linear interpolation; zero beyond the last abscissa, flat below the first.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.rho.len();
        if r <= self.rho[0] {
            return self.values[0];
        }
        if r >= self.rho[n - 1] {
            return if r == self.rho[n - 1] { self.values[n - 1] } else { 0.0 };
        }
        let k = match self.uniform_spacing() {
            Some(h) => (((r - self.rho[0]) / h) as usize).min(n - 2),
            None => self.rho.partition_point(|&x| x <= r) - 1,
        };
        let t = (r - self.rho[k]) / (self.rho[k + 1] - self.rho[k]);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Two-column CSV with header `rho,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "rho,value")?;
        for (r, v) in self.rho.iter().zip(&self.values) {
            writeln!(w, "{r:.17e},{v:.17e}")?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str, mode_n: i32) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "rho,value" => {}
            other => return Err(Error::InvalidInput(format!("bad profile header {other:?}"))),
        }
        let mut rho = Vec::new();
        let mut values = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("bad profile row {}", k + 2)))
            };
            rho.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        RadialProfile::new(rho, values, mode_n)
    }
}

/// Constants of the mode-1 solvability condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConstants {
    /// ∫ U y₁ ∂₁Γ₀ dy
    pub i0: f64,
    /// ∫ U y₁ ∂₁Γ₀ Γ₀ dy
    pub i1: f64,
    /// A = −I1/I0
    pub a: f64,
    /// Ā = −6 − I1/I0
    pub a_bar: f64,
}

pub fn u_radial(rho: f64) -> f64 {
    let s = 1.0 + rho * rho;
    8.0 / (s * s)
}

pub fn gamma0_radial(rho: f64) -> f64 {
    8f64.ln() - 2.0 * (rho * rho).ln_1p()
}

pub fn gamma0_prime(rho: f64) -> f64 {
    -4.0 * rho / (1.0 + rho * rho)
}

/// Kaufmann–Scully vortex U(y) = 8/(1+|y|²)².
pub fn eval_u(y: Vec2) -> f64 {
    u_radial(y.norm())
}

/// Γ₀(y) = log 8 − 2 log(1+|y|²), so that −ΔΓ₀ = e^{Γ₀} = U.
pub fn eval_gamma0(y: Vec2) -> f64 {
    8f64.ln() - 2.0 * y.norm2().ln_1p()
}

/// Bounded kernel elements of Δ + U: Z₁ = ∂₁Γ₀, Z₂ = ∂₂Γ₀, Z₀ = 2 + ∇Γ₀·y.
pub fn kernel_z(l: usize, y: Vec2) -> Result<f64> {
    let s = 1.0 + y.norm2();
    match l {
        0 => Ok(2.0 * (1.0 - y.norm2()) / s),
        1 => Ok(-4.0 * y.x / s),
        2 => Ok(-4.0 * y.y / s),
        _ => Err(Error::InvalidInput(format!("kernel index {l} not in {{0,1,2}}"))),
    }
}

/// Regular homogeneous solution of ℒ_n, normalized so that ζ_n(ρ) = ρ^{|n|}(1 + o(1)) at 0.
/// ζ₁ = ρ/(1+ρ²).
pub fn zeta(n: i32, rho: f64) -> f64 {
    let m = n.unsigned_abs() as i32;
    let mf = m as f64;
    let r2 = rho * rho;
    rho.powi(m) * ((mf + 1.0) + (mf - 1.0) * r2) / ((mf + 1.0) * (1.0 + r2))
}

fn check_mode(n: i32) -> Result<()> {
    if n == 0 {
        Err(Error::UnsupportedMode(0))
    } else {
        Ok(())
    }
}

/// Applies ℒ_n by finite differences: fourth-order centered stencils in the interior,
/// second-order centered next to the ends and second-order one-sided at the ends.
/// A node at ρ = 0 takes the cubic extrapolation of its neighbours.
pub fn mode_operator_apply(n: i32, p: &RadialProfile) -> Result<RadialProfile> {
    check_mode(n)?;
    let len = p.len();
    if len < 5 {
        return Err(Error::InvalidInput(format!("profile has {len} points, need at least 5")));
    }
    let h = p
        .uniform_spacing()
        .ok_or_else(|| Error::InvalidInput("mode operator needs a uniform grid".into()))?;
    let rho = p.rho();
    let v = p.values();
    let n2 = (n * n) as f64;
    let h2 = h * h;
    let mut out = vec![0.0; len];
    for i in 0..len {
        let (d1, d2) = if i >= 2 && i + 2 < len {
            (
                (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h),
                (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h2),
            )
        } else if i >= 1 && i + 1 < len {
            ((v[i + 1] - v[i - 1]) / (2.0 * h), (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2)
        } else if i == 0 {
            (
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
                (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2,
            )
        } else {
            let k = len - 1;
            (
                (3.0 * v[k] - 4.0 * v[k - 1] + v[k - 2]) / (2.0 * h),
                (2.0 * v[k] - 5.0 * v[k - 1] + 4.0 * v[k - 2] - v[k - 3]) / h2,
            )
        };
        let r = rho[i];
        if r > 0.0 {
            let s = 1.0 + r * r;
            out[i] = d2 + d1 / r - n2 * v[i] / (r * r) + 8.0 * v[i] / (s * s);
        }
    }
    if rho[0] == 0.0 {
        out[0] = 3.0 * out[1] - 3.0 * out[2] + out[3];
    }
    RadialProfile::new(rho.to_vec(), out, n)
}

/// Cumulative trapezoid ∫_{x₀}^{x_i} f, with the integrand extended by zero to ρ = 0
/// when the grid starts above it.
fn cumulative_from_origin(rho: &[f64], f: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; rho.len()];
    c[0] = 0.5 * rho[0] * f[0];
    for i in 1..rho.len() {
        c[i] = c[i - 1] + 0.5 * (rho[i] - rho[i - 1]) * (f[i] + f[i - 1]);
    }
    c
}

fn cumulative_to_end(rho: &[f64], f: &[f64]) -> Vec<f64> {
    let n = rho.len();
    let mut c = vec![0.0; n];
    for i in (0..n - 1).rev() {
        c[i] = c[i + 1] + 0.5 * (rho[i + 1] - rho[i]) * (f[i] + f[i + 1]);
    }
    c
}

/// Discrete ∫₀^R g ζ₁ ρ dρ and ∫₀^R |g ζ₁| ρ dρ on the profile's nodes.
pub fn mode1_orthogonality(g: &RadialProfile) -> (f64, f64) {
    let w: Vec<f64> = g.rho().iter().zip(g.values()).map(|(&r, &v)| v * zeta(1, r) * r).collect();
    let wa: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    let s = cumulative_from_origin(g.rho(), &w);
    let sa = cumulative_from_origin(g.rho(), &wa);
    (s[s.len() - 1], sa[sa.len() - 1])
}

/// Solves ℒ_n[p] = g on (0, R_out] with p(R_out) = 0 and p regular at the origin, by
/// variation of parameters against ζ_n:
///
///   |n| ≥ 2:  p(ρ) = −ζ_n(ρ) ∫_ρ^R dr/(r ζ_n²) ∫_0^r g ζ_n s ds
///   |n| = 1:  p(ρ) =  ζ₁(ρ) ∫_ρ^R dr/(r ζ₁²) ∫_r^R g ζ₁ s ds
///
/// The |n| = 1 form needs ∫₀^R g ζ₁ ρ dρ = 0. A defect within [`ORTHOGONALITY_TOL`]
/// (relative to ∫|g ζ₁|ρ) is projected out along ζ₁; larger defects are rejected.
pub fn mode_solve(n: i32, g: &RadialProfile, r_out: f64) -> Result<RadialProfile> {
    check_mode(n)?;
    g.uniform_spacing()
        .ok_or_else(|| Error::InvalidInput("mode solve needs a uniform grid".into()))?;
    let h = g.uniform_spacing().unwrap();
    let last = g.rho()[g.len() - 1];
    if r_out > last + 0.5 * h || r_out <= g.rho()[0] {
        return Err(Error::InvalidInput(format!(
            "R_out = {r_out} outside the sampled range [{}, {last}]",
            g.rho()[0]
        )));
    }
    let keep = g.rho().iter().take_while(|&&r| r <= r_out + 0.5 * h).count();
    if keep < 5 {
        return Err(Error::InvalidInput("fewer than 5 samples inside R_out".into()));
    }
    let rho = g.rho()[..keep].to_vec();
    let mut f = g.values()[..keep].to_vec();
    let m = n.abs();

    if m == 1 {
        let trunc = RadialProfile::new(rho.clone(), f.clone(), n)?;
        let (defect, mass) = mode1_orthogonality(&trunc);
        let scale = if mass > 0.0 { mass } else { 1.0 };
        if defect.abs() > ORTHOGONALITY_TOL * scale {
            return Err(Error::Orthogonality { integral: defect, relative: defect.abs() / scale });
        }
        let z2: Vec<f64> = rho.iter().map(|&r| zeta(1, r).powi(2) * r).collect();
        let norm = cumulative_from_origin(&rho, &z2)[keep - 1];
        let c = defect / norm;
        for (fi, &r) in f.iter_mut().zip(&rho) {
            *fi -= c * zeta(1, r);
        }
    }

    let zn: Vec<f64> = rho.iter().map(|&r| zeta(m, r)).collect();
    let integrand: Vec<f64> = f.iter().zip(&zn).zip(&rho).map(|((fi, z), r)| fi * z * r).collect();
    let fwd = cumulative_from_origin(&rho, &integrand);

    // Inner integral in the form used by each branch; for |n| = 1 the tail form
    // is used away from the origin where it does not suffer cancellation.
    let inner: Vec<f64> = if m == 1 {
        let bwd = cumulative_to_end(&rho, &integrand);
        rho.iter()
            .enumerate()
            .map(|(i, &r)| if r >= 1.0 { -bwd[i] } else { fwd[i] })
            .collect()
    } else {
        fwd
    };

    // dv/dr, with v(R) = 0 and p = ζ v.
    let mut dv = vec![0.0; keep];
    for i in 0..keep {
        let r = rho[i];
        dv[i] = if r > 0.0 {
            inner[i] / (r * zn[i] * zn[i])
        } else if m == 1 {
            f[0] / 3.0
        } else {
            0.0
        };
    }
    let tail = cumulative_to_end(&rho, &dv);
    let values: Vec<f64> = (0..keep).map(|i| -zn[i] * tail[i]).collect();
    RadialProfile::new(rho, values, n)
}

fn radial_moment<F: Fn(f64) -> f64>(weight: F, tol: f64) -> Result<f64> {
    // ∫ U y₁ ∂₁Γ₀ w dy = π ∫₀^∞ U Γ₀' w ρ² dρ (angular factor ∫cos²θ = π).
    let radial = quadrature::integrate_half_line(
        |r| u_radial(r) * gamma0_prime(r) * weight(r) * r * r,
        tol,
    )?;
    Ok(PI * radial)
}

/// I0, I1 and the constants A = −I1/I0, Ā = A − 6 by adaptive radial quadrature.
pub fn compute_constants(quadrature_tol: f64) -> Result<ProfileConstants> {
    if !(quadrature_tol > 0.0) {
        return Err(Error::InvalidInput(format!("quadrature tolerance must be positive, got {quadrature_tol}")));
    }
    let i0 = radial_moment(|_| 1.0, quadrature_tol)?;
    let i1 = radial_moment(gamma0_radial, quadrature_tol)?;
    let a = -i1 / i0;
    Ok(ProfileConstants { i0, i1, a, a_bar: a - 6.0 })
}

/// Grid spacing used by [`compute_gamma`].
pub const GAMMA_SPACING: f64 = 1e-3;

/// Mode-1 datum of the corrector equation, g(ρ) = −½ ρ U(ρ) (Γ₀(ρ) + shift).
pub fn gamma_datum(rho: &[f64], shift: f64) -> Vec<f64> {
    rho.iter()
        .map(|&r| -0.5 * r * u_radial(r) * (gamma0_radial(r) + shift))
        .collect()
}

/// The shift making the datum orthogonal to ζ₁ on the discrete grid over [0, R]. It tends to
/// A = −I1/I0 as R → ∞ and h → 0.
pub fn discrete_a_shift(rho: &[f64]) -> f64 {
    let base: Vec<f64> = rho.iter().map(|&r| r * u_radial(r) * zeta(1, r) * r).collect();
    let with_g0: Vec<f64> = base.iter().zip(rho).map(|(b, &r)| b * gamma0_radial(r)).collect();
    let n = rho.len();
    let i0 = cumulative_from_origin(rho, &base)[n - 1];
    let i1 = cumulative_from_origin(rho, &with_g0)[n - 1];
    -i1 / i0
}

/// Mode-1 corrector Γ with ρΓ/2 solving ℒ₁[ρΓ/2] = −½ρU(Γ₀ + A), Γ(R_out) = 0.
pub fn compute_gamma(r_out: f64) -> Result<RadialProfile> {
    compute_gamma_with(r_out, GAMMA_SPACING, None)
}

/// [`compute_gamma`] with explicit spacing; `shift` overrides the orthogonalizing constant.
pub fn compute_gamma_with(r_out: f64, h: f64, shift: Option<f64>) -> Result<RadialProfile> {
    if !(r_out >= 100.0) {
        return Err(Error::InvalidInput(format!("R_out = {r_out} must be at least 100")));
    }
    let n = (r_out / h).round() as usize;
    let rho: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let shift = shift.unwrap_or_else(|| discrete_a_shift(&rho));
    let datum = RadialProfile::new(rho.clone(), gamma_datum(&rho, shift), 1)?;
    let (defect, mass) = mode1_orthogonality(&datum);
    if defect.abs() > 1e-6 * mass {
        return Err(Error::Consistency(format!(
            "orthogonality defect {defect:e} (relative {:e}) after the A-shift",
            defect.abs() / mass
        )));
    }
    let p = mode_solve(1, &datum, r_out)?;
    let pv = p.values();
    let mut gamma: Vec<f64> = rho.iter().zip(pv).map(|(&r, &v)| if r > 0.0 { 2.0 * v / r } else { 0.0 }).collect();
    gamma[0] = (4.0 * gamma[1] - gamma[2]) / 3.0;
    RadialProfile::new(rho, gamma, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn u_values() {
        assert_eq!(eval_u(Vec2::new(0.0, 0.0)), 8.0);
        assert_eq!(eval_u(Vec2::new(1.0, 0.0)), 2.0);
    }

    #[test]
    fn u_mass_is_8pi() {
        let m = quadrature::integrate_half_line(|r| 2.0 * PI * r * u_radial(r), 1e-12).unwrap();
        assert_relative_eq!(m, 8.0 * PI, max_relative = 1e-10);
    }

    #[test]
    fn gamma0_values() {
        assert_relative_eq!(eval_gamma0(Vec2::ZERO), 8f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(eval_gamma0(Vec2::new(0.6, 0.8)), 2f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn gamma0_liouville_at_point() {
        let h = 1e-3;
        let y = Vec2::new(0.5, 0.5);
        let g = |dx: f64, dy: f64| eval_gamma0(Vec2::new(y.x + dx, y.y + dy));
        let lap = (g(h, 0.0) + g(-h, 0.0) + g(0.0, h) + g(0.0, -h) - 4.0 * g(0.0, 0.0)) / (h * h);
        assert!((-lap - eval_u(y)).abs() < 1e-5);
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_z(1, Vec2::new(1.0, 0.0)).unwrap(), -2.0);
        assert_eq!(kernel_z(0, Vec2::ZERO).unwrap(), 2.0);
        assert!((kernel_z(0, Vec2::new(100.0, 0.0)).unwrap() + 2.0).abs() < 1e-3);
        assert!(kernel_z(3, Vec2::ZERO).is_err());
    }

    #[test]
    fn kernel_matches_gradient_of_gamma0() {
        let y = Vec2::new(0.3, -1.2);
        let h = 1e-6;
        let d1 = (eval_gamma0(Vec2::new(y.x + h, y.y)) - eval_gamma0(Vec2::new(y.x - h, y.y))) / (2.0 * h);
        let d2 = (eval_gamma0(Vec2::new(y.x, y.y + h)) - eval_gamma0(Vec2::new(y.x, y.y - h))) / (2.0 * h);
        assert_relative_eq!(kernel_z(1, y).unwrap(), d1, epsilon = 1e-8);
        assert_relative_eq!(kernel_z(2, y).unwrap(), d2, epsilon = 1e-8);
        assert_relative_eq!(kernel_z(0, y).unwrap(), 2.0 + d1 * y.x + d2 * y.y, epsilon = 1e-8);
    }

    #[test]
    fn zeta_one_is_closed_form() {
        for r in [0.0, 0.3, 1.0, 7.0] {
            assert_relative_eq!(zeta(1, r), r / (1.0 + r * r), epsilon = 1e-15);
            assert_eq!(zeta(-1, r), zeta(1, r));
        }
    }

    #[test]
    fn profile_invariants_enforced() {
        assert!(RadialProfile::new(vec![0.0, 1.0, 1.0], vec![0.0; 3], 0).is_err());
        assert!(RadialProfile::new(vec![-1.0, 1.0], vec![0.0; 2], 0).is_err());
        assert!(RadialProfile::new(vec![0.0, 1.0], vec![0.0, f64::NAN], 0).is_err());
        assert!(RadialProfile::new(vec![0.0, 1.0], vec![0.0], 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let p = RadialProfile::uniform(0.25, 2.0, 2, |r| r * r - 1.0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rho,value\n"));
        assert_eq!(RadialProfile::read_csv(&text, 2).unwrap(), p);
    }

    #[test]
    fn operator_needs_five_points() {
        let p = RadialProfile::uniform(0.25, 1.0, 1, |r| r).unwrap();
        assert_eq!(p.len(), 5);
        assert!(mode_operator_apply(1, &p).is_ok());
        let q = RadialProfile::uniform(0.25, 0.75, 1, |r| r).unwrap();
        assert!(matches!(mode_operator_apply(1, &q), Err(Error::InvalidInput(_))));
        assert!(matches!(mode_operator_apply(0, &p), Err(Error::UnsupportedMode(0))));
    }

    #[test]
    fn operator_kills_zeta_one() {
        let p = RadialProfile::uniform(1e-3, 20.0, 1, |r| zeta(1, r)).unwrap();
        let l = mode_operator_apply(1, &p).unwrap();
        let worst = p
            .rho()
            .iter()
            .zip(l.values())
            .filter(|(r, _)| **r >= 0.1 - 1e-12)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        assert!(worst < 1e-6, "residual {worst}");
    }

    #[test]
    fn operator_on_zero_and_rho_squared() {
        let z = RadialProfile::uniform(0.01, 2.0, 2, |_| 0.0).unwrap();
        assert_eq!(mode_operator_apply(2, &z).unwrap().max_abs(), 0.0);
        // ρ² is annihilated by the Euler part of ℒ₂: 2 + 2 − 4 = 0.
        let rho: Vec<f64> = (0..=100).map(|i| 1.0 + i as f64 * 0.01).collect();
        let vals: Vec<f64> = rho.iter().map(|r| r * r).collect();
        let p = RadialProfile::new(rho, vals, 2).unwrap();
        let l = mode_operator_apply(2, &p).unwrap();
        for (r, v) in p.rho().iter().zip(l.values()) {
            let expect = 8.0 * r * r / (1.0 + r * r).powi(2);
            assert!((v - expect).abs() < 1e-9, "at {r}: {v} vs {expect}");
        }
    }

    #[test]
    fn zero_datum_gives_zero_solution() {
        for n in [-3, 1, 2] {
            let g = RadialProfile::uniform(0.01, 5.0, n, |_| 0.0).unwrap();
            assert_eq!(mode_solve(n, &g, 5.0).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn mode_zero_rejected() {
        let g = RadialProfile::uniform(0.01, 5.0, 0, |_| 1.0).unwrap();
        assert!(matches!(mode_solve(0, &g, 5.0), Err(Error::UnsupportedMode(0))));
    }

    fn bump(r: f64) -> f64 {
        if r > 1.0 && r < 2.0 {
            let t = (r - 1.0) * (2.0 - r);
            (-(1.0 / t) + 4.0).exp() * 10.0
        } else {
            0.0
        }
    }

    #[test]
    fn mode_two_bump_residual() {
        let g = RadialProfile::uniform(1e-3, 10.0, 2, bump).unwrap();
        let p = mode_solve(2, &g, 10.0).unwrap();
        let l = mode_operator_apply(2, &p).unwrap();
        let gmax = g.max_abs();
        let worst = l
            .values()
            .iter()
            .zip(g.values())
            .zip(p.rho())
            .filter(|(_, r)| **r > 0.0 && **r < 10.0)
            .fold(0.0f64, |m, ((a, b), _)| m.max((a - b).abs()));
        assert!(worst / gmax < 1e-4, "relative residual {}", worst / gmax);
        assert_eq!(p.values()[p.len() - 1], 0.0);
    }

    #[test]
    fn non_orthogonal_mode_one_rejected() {
        let g = RadialProfile::uniform(1e-2, 20.0, 1, |r| r * (-r * r).exp()).unwrap();
        match mode_solve(1, &g, 20.0) {
            Err(Error::Orthogonality { integral, relative }) => {
                assert!(integral > 0.0);
                assert!(relative > 1e-3);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn constants_match_closed_forms() {
        let c = compute_constants(1e-10).unwrap();
        assert_relative_eq!(c.i0, -8.0 * PI, max_relative = 1e-9);
        assert_relative_eq!(c.i1 / c.i0, 3.0 * (2f64.ln() - 1.0), max_relative = 1e-9);
        assert_eq!(c.a_bar, c.a - 6.0);
        assert!(c.i0 < 0.0);
        assert!(compute_constants(0.0).is_err());
    }

    #[test]
    fn constants_stable_across_tolerances() {
        let a = compute_constants(1e-8).unwrap();
        let b = compute_constants(1e-10).unwrap();
        assert_relative_eq!(a.i0, b.i0, max_relative = 1e-7);
        assert_relative_eq!(a.i1, b.i1, max_relative = 1e-7);
    }

    #[test]
    fn discrete_shift_approaches_a() {
        let rho: Vec<f64> = (0..=100_000).map(|i| i as f64 * 1e-3).collect();
        let a = 3.0 - 3.0 * 2f64.ln();
        let shift = discrete_a_shift(&rho);
        assert!((shift - a).abs() < 1e-2, "{shift} vs {a}");
        let rho_long: Vec<f64> = (0..=400_000).map(|i| i as f64 * 1e-2).collect();
        let far = discrete_a_shift(&rho_long);
        assert!((far - a).abs() < 0.1 * (shift - a).abs(), "{far} vs {a}");
    }
}
