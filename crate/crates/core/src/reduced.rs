//! Reduced leapfrogging dynamics for the scaled offsets q_j of k coaxial rings:
//!
//!   dq_j/dτ = −4 Σ_{ℓ≠j} (q_j − q_ℓ)^⊥/|q_j − q_ℓ|² + 2 (q_j¹/r0²) e₂,
//!
//! Hamiltonian for H_k = 2 Σ_{i≠j} log|q_i − q_j| − r0⁻² Σ_j |q_j¹|² (ordered pairs).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Separation below which the vector field is refused.
pub const RHS_COLLISION: f64 = 1e-9;
/// Separation below which time integration halts.
pub const INTEGRATION_COLLISION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledConfig {
    q: Vec<Vec2>,
    r0: f64,
}

fn closest_pair(points: &[Vec2]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).norm();
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

impl ScaledConfig {
    pub fn new(q: Vec<Vec2>, r0: f64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidInput("need at least one ring".into()));
        }
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::InvalidInput(format!("r0 = {r0} must be positive")));
        }
        if let Some(j) = q.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("offset {j} is not finite")));
        }
        if let Some((i, j, d)) = closest_pair(&q) {
            if !(d > 0.0) {
                return Err(Error::Collision { i, j, separation: d });
            }
        }
        Ok(ScaledConfig { q, r0 })
    }

    /// The symmetric pair q₁ = −q₂ = q.
    pub fn symmetric_pair(q: Vec2, r0: f64) -> Result<Self> {
        ScaledConfig::new(vec![q, -q], r0)
    }

    pub fn q(&self) -> &[Vec2] {
        &self.q
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn k(&self) -> usize {
        self.q.len()
    }

    /// min_{i≠j} |q_i − q_j|, infinite for a single ring.
    pub fn min_separation(&self) -> f64 {
        closest_pair(&self.q).map_or(f64::INFINITY, |p| p.2)
    }

    fn check_separation(&self, threshold: f64) -> Result<()> {
        match closest_pair(&self.q) {
            Some((i, j, d)) if d <= threshold => Err(Error::Collision { i, j, separation: d }),
            _ => Ok(()),
        }
    }

    fn with_offsets(&self, q: Vec<Vec2>) -> ScaledConfig {
        ScaledConfig { q, r0: self.r0 }
    }
}

fn pair_velocity(d: Vec2) -> Vec2 {
    d.perp() * (-4.0 / d.norm2())
}

/// Vector field of the reduced system.
pub fn rhs(cfg: &ScaledConfig) -> Result<Vec<Vec2>> {
    cfg.check_separation(RHS_COLLISION)?;
    Ok(rhs_unchecked(&cfg.q, cfg.r0))
}

fn rhs_unchecked(q: &[Vec2], r0: f64) -> Vec<Vec2> {
    let inv_r02 = 1.0 / (r0 * r0);
    let mut out: Vec<Vec2> = q.iter().map(|p| Vec2::new(0.0, 2.0 * p.x * inv_r02)).collect();
    for j in 0..q.len() {
        for l in j + 1..q.len() {
            let v = pair_velocity(q[j] - q[l]);
            out[j] += v;
            out[l] += -v;
        }
    }
    out
}

/// H_k with the double sum over ordered pairs.
pub fn hamiltonian(cfg: &ScaledConfig) -> Result<f64> {
    cfg.check_separation(RHS_COLLISION)?;
    Ok(hamiltonian_unchecked(&cfg.q, cfg.r0))
}

fn hamiltonian_unchecked(q: &[Vec2], r0: f64) -> f64 {
    let mut h = 0.0;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            h += 4.0 * (q[i] - q[j]).norm().ln();
        }
    }
    h - q.iter().map(|p| p.x * p.x).sum::<f64>() / (r0 * r0)
}

/// q ↦ H₂(q, −q) = 4 log|2q| − 2 (q¹)²/r0².
pub fn symmetric_pair_hamiltonian(q: Vec2, r0: f64) -> f64 {
    4.0 * (2.0 * q.norm()).ln() - 2.0 * q.x * q.x / (r0 * r0)
}

/// Vector field of the symmetric reduction q₁ = −q₂ = q:
/// dq/dτ = −2 q^⊥/|q|² + 2 (q¹/r0²) e₂.
pub fn symmetric_pair_rhs(q: Vec2, r0: f64) -> Result<Vec2> {
    if q.norm() <= RHS_COLLISION {
        return Err(Error::Singular(format!("symmetric pair at the origin, |q| = {:e}", q.norm())));
    }
    Ok(q.perp() * (-2.0 / q.norm2()) + Vec2::new(0.0, 2.0 * q.x / (r0 * r0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4,
    SymplecticEuler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ScaledConfig>,
    pub hamiltonian: Vec<f64>,
    pub min_separation: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn k(&self) -> usize {
        self.states.first().map_or(0, |s| s.k())
    }

    pub fn r0(&self) -> f64 {
        self.states.first().map_or(f64::NAN, |s| s.r0())
    }

    /// max_τ |H(τ) − H(0)|
    pub fn hamiltonian_drift(&self) -> f64 {
        let h0 = self.hamiltonian.first().copied().unwrap_or(0.0);
        self.hamiltonian.iter().fold(0.0, |m, h| m.max((h - h0).abs()))
    }

    /// Offsets at time τ by linear interpolation between samples (clamped to the ends).
    pub fn offsets_at(&self, tau: f64) -> Vec<Vec2> {
        let n = self.times.len();
        if tau <= self.times[0] {
            return self.states[0].q().to_vec();
        }
        if tau >= self.times[n - 1] {
            return self.states[n - 1].q().to_vec();
        }
        let k = self.times.partition_point(|&t| t <= tau) - 1;
        let t = (tau - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.states[k]
            .q()
            .iter()
            .zip(self.states[k + 1].q())
            .map(|(a, b)| *a * (1.0 - t) + *b * t)
            .collect()
    }

    /// CSV with columns tau, q1_r, q1_z, ..., qk_r, qk_z, H, min_sep.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("tau");
        for j in 1..=self.k() {
            header.push_str(&format!(",q{j}_r,q{j}_z"));
        }
        header.push_str(",H,min_sep");
        writeln!(w, "{header}")?;
        for i in 0..self.len() {
            let mut line = format!("{:.12e}", self.times[i]);
            for q in self.states[i].q() {
                line.push_str(&format!(",{:.15e},{:.15e}", q.x, q.y));
            }
            line.push_str(&format!(",{:.15e},{:.15e}", self.hamiltonian[i], self.min_separation[i]));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Points where ring `ring` crosses the line through its initial offset that is normal to
    /// its initial velocity, in the same direction as at τ = 0. Returns (τ, offset) pairs.
    pub fn return_points(&self, ring: usize) -> Vec<(f64, Vec2)> {
        let mut out = Vec::new();
        if self.len() < 2 {
            return out;
        }
        let q0 = self.states[0].q()[ring];
        let v0 = rhs_unchecked(self.states[0].q(), self.r0())[ring];
        let side = |q: Vec2| (q - q0).dot(v0);
        // skip the departure from the section itself
        let mut i = 1;
        while i < self.len() && side(self.states[i].q()[ring]) <= 0.0 {
            i += 1;
        }
        while i + 1 < self.len() {
            let a = side(self.states[i].q()[ring]);
            let b = side(self.states[i + 1].q()[ring]);
            if a < 0.0 && b >= 0.0 {
                let t = a / (a - b);
                let qa = self.states[i].q()[ring];
                let qb = self.states[i + 1].q()[ring];
                let tau = self.times[i] + t * (self.times[i + 1] - self.times[i]);
                out.push((tau, qa * (1.0 - t) + qb * t));
            }
            i += 1;
        }
        out
    }
}

fn axpy(q: &[Vec2], k: &[Vec2], s: f64) -> Vec<Vec2> {
    q.iter().zip(k).map(|(a, b)| *a + *b * s).collect()
}

fn rk4_step(q: &[Vec2], r0: f64, dt: f64) -> Vec<Vec2> {
    let k1 = rhs_unchecked(q, r0);
    let k2 = rhs_unchecked(&axpy(q, &k1, 0.5 * dt), r0);
    let k3 = rhs_unchecked(&axpy(q, &k2, 0.5 * dt), r0);
    let k4 = rhs_unchecked(&axpy(q, &k3, dt), r0);
    q.iter()
        .enumerate()
        .map(|(j, p)| *p + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0))
        .collect()
}

/// Symplectic Euler with q¹ as coordinate and q² as momentum: the second components are
/// advanced implicitly (fixed-point iteration), then the first components explicitly.
fn symplectic_euler_step(q: &[Vec2], r0: f64, dt: f64) -> Vec<Vec2> {
    let mut guess: Vec<Vec2> = q.to_vec();
    for _ in 0..100 {
        let f = rhs_unchecked(&guess, r0);
        let next: Vec<Vec2> = q.iter().zip(&f).map(|(p, v)| Vec2::new(p.x, p.y + dt * v.y)).collect();
        let change = next.iter().zip(&guess).fold(0.0f64, |m, (a, b)| m.max((a.y - b.y).abs()));
        guess = next;
        if change < 1e-15 {
            break;
        }
    }
    let f = rhs_unchecked(&guess, r0);
    guess.iter().zip(&f).map(|(p, v)| Vec2::new(p.x + dt * v.x, p.y)).collect()
}

/// Integrates the reduced system on τ ∈ [0, T] with fixed step, sampling every step.
pub fn integrate(cfg0: &ScaledConfig, dt: f64, t_end: f64, method: Method) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt = {dt} must be positive")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidInput(format!("T = {t_end} must be non-negative")));
    }
    cfg0.check_separation(INTEGRATION_COLLISION)?;
    let steps = (t_end / dt).round() as usize;
    let r0 = cfg0.r0;
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        hamiltonian: Vec::with_capacity(steps + 1),
        min_separation: Vec::with_capacity(steps + 1),
    };
    let mut q = cfg0.q.clone();
    for n in 0..=steps {
        let tau = n as f64 * dt;
        if n > 0 {
            q = match method {
                Method::Rk4 => rk4_step(&q, r0, dt),
                Method::SymplecticEuler => symplectic_euler_step(&q, r0, dt),
            };
        }
        if q.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite(tau));
        }
        let state = cfg0.with_offsets(q.clone());
        state.check_separation(INTEGRATION_COLLISION)?;
        traj.times.push(tau);
        traj.hamiltonian.push(hamiltonian_unchecked(&q, r0));
        traj.min_separation.push(state.min_separation());
        traj.states.push(state);
    }
    Ok(traj)
}

/// Physical ring family: centers P_j = (r_j, z_j) with core scales tied by r_j ε_j² = r0 ε².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingFamily {
    centers: Vec<Vec2>,
    core_scales: Vec<f64>,
    epsilon: f64,
    r0: f64,
}

impl RingFamily {
    pub fn new(centers: Vec<Vec2>, core_scales: Vec<f64>, epsilon: f64, r0: f64) -> Result<Self> {
        if centers.len() != core_scales.len() {
            return Err(Error::InvalidInput("centers and core scales differ in length".into()));
        }
        if !(epsilon > 0.0) || !(r0 > 0.0) {
            return Err(Error::InvalidInput(format!("need epsilon > 0 and r0 > 0, got {epsilon}, {r0}")));
        }
        let target = r0 * epsilon * epsilon;
        for (j, (p, e)) in centers.iter().zip(&core_scales).enumerate() {
            if !(p.x > 0.0) || !p.is_finite() {
                return Err(Error::Domain(format!("ring {j} center r = {} is not in r > 0", p.x)));
            }
            if !(*e > 0.0) || ((p.x * e * e - target) / target).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "ring {j} breaks r_j eps_j^2 = r0 eps^2 ({} vs {target})",
                    p.x * e * e
                )));
            }
        }
        Ok(RingFamily { centers, core_scales, epsilon, r0 })
    }

    /// Core scales ε_j = ε √(r0/r_j) derived from the centers.
    pub fn from_centers(centers: Vec<Vec2>, epsilon: f64, r0: f64) -> Result<Self> {
        let scales = centers
            .iter()
            .map(|p| if p.x > 0.0 { epsilon * (r0 / p.x).sqrt() } else { f64::NAN })
            .collect();
        RingFamily::new(centers, scales, epsilon, r0)
    }

    pub fn empty(epsilon: f64, r0: f64) -> Self {
        RingFamily { centers: Vec::new(), core_scales: Vec::new(), epsilon, r0 }
    }

    pub fn centers(&self) -> &[Vec2] {
        &self.centers
    }

    pub fn core_scales(&self) -> &[f64] {
        &self.core_scales
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn min_separation(&self) -> f64 {
        closest_pair(&self.centers).map_or(f64::INFINITY, |p| p.2)
    }
}

/// Main term Θ_j⁰ of the physical center dynamics |log ε| ∂_τ P_j = Θ_j⁰ + O(1):
///
///   Θ_j⁰ = −4 Σ_{ℓ≠j} (P_j − P_ℓ)^⊥/|P_j − P_ℓ|² + 2 |log ε| (r0 − r_j)/(r0 r_j) e₂.
pub fn theta0(rings: &RingFamily, log_eps: f64) -> Result<Vec<Vec2>> {
    if let Some((i, j, d)) = closest_pair(&rings.centers) {
        if !(d > 0.0) {
            return Err(Error::Collision { i, j, separation: d });
        }
    }
    let l = log_eps.abs();
    let r0 = rings.r0;
    let mut out: Vec<Vec2> = rings
        .centers
        .iter()
        .map(|p| Vec2::new(0.0, 2.0 * l * (r0 - p.x) / (r0 * p.x)))
        .collect();
    for j in 0..rings.k() {
        for m in j + 1..rings.k() {
            let v = pair_velocity(rings.centers[j] - rings.centers[m]);
            out[j] += v;
            out[m] += -v;
        }
    }
    Ok(out)
}

/// Interaction part of Θ_j⁰ alone.
pub fn theta0_interaction(rings: &RingFamily) -> Vec<Vec2> {
    let mut out = vec![Vec2::ZERO; rings.k()];
    for j in 0..rings.k() {
        for m in j + 1..rings.k() {
            let v = pair_velocity(rings.centers[j] - rings.centers[m]);
            out[j] += v;
            out[m] += -v;
        }
    }
    out
}

/// P_j = (r0, 0) + q_j/√|log ε| with ε_j = ε √(r0/r_j).
pub fn scaled_to_physical(cfg: &ScaledConfig, epsilon: f64) -> Result<RingFamily> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let s = 1.0 / epsilon.ln().abs().sqrt();
    let base = Vec2::new(cfg.r0, 0.0);
    let centers: Vec<Vec2> = cfg.q.iter().map(|q| base + *q * s).collect();
    if let Some(j) = centers.iter().position(|p| !(p.x > 0.0)) {
        return Err(Error::Domain(format!("ring {j} maps to r = {} <= 0", centers[j].x)));
    }
    RingFamily::from_centers(centers, epsilon, cfg.r0)
}
