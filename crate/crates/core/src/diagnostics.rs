//! Ring centers from vorticity fields, translation speeds, and comparison of PDE centers
//! with the reduced dynamics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::reduced::{scaled_to_physical, ScaledConfig, Trajectory};
use crate::vec2::Vec2;

/// A window whose r-weighted mass falls below this fraction of the total is lost.
pub const LOST_RING_FRACTION: f64 = 1e-8;

/// Share of the closest pair distance that an adaptive window may span.
pub const ADAPTIVE_FRACTION: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSeries {
    pub times: Vec<f64>,
    pub centers: Vec<Vec<Vec2>>,
    /// Nominal radius; the radius used at each instant is in `radii`.
    pub window_radius: f64,
    #[serde(default)]
    pub radii: Vec<f64>,
}

impl CenterSeries {
    pub fn new(window_radius: f64) -> Self {
        CenterSeries { times: Vec::new(), centers: Vec::new(), window_radius, radii: Vec::new() }
    }

    pub fn push(&mut self, tau: f64, centers: Vec<Vec2>) {
        self.push_with_radius(tau, centers, self.window_radius);
    }

    pub fn push_with_radius(&mut self, tau: f64, centers: Vec<Vec2>, radius: f64) {
        self.times.push(tau);
        self.centers.push(centers);
        self.radii.push(radius);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn k(&self) -> usize {
        self.centers.first().map_or(0, Vec::len)
    }

    /// CSV with columns tau, r1, z1, ..., rk, zk.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("tau");
        for j in 1..=self.k() {
            header.push_str(&format!(",r{j},z{j}"));
        }
        writeln!(w, "{header}")?;
        for (t, cs) in self.times.iter().zip(&self.centers) {
            let mut line = format!("{t:.12e}");
            for c in cs {
                line.push_str(&format!(",{:.15e},{:.15e}", c.x, c.y));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// The nominal radius, shrunk to `ADAPTIVE_FRACTION` of the smallest distance between
/// the given centers when they are closer than twice the nominal radius.
pub fn adaptive_radius(nominal: f64, centers: &[Vec2]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            sep = sep.min((centers[i] - centers[j]).norm());
        }
    }
    nominal.min(ADAPTIVE_FRACTION * sep)
}

/// Centroids for the next instant. Centers closer than `merge_distance` are treated as one
/// merged ring: they share a window about their mean and receive the same centroid.
/// Returns the centroids and the window radius used.
pub fn track_centroids(
    omega: &ScalarField,
    prev: &[Vec2],
    nominal: f64,
    merge_distance: f64,
) -> Result<(Vec<Vec2>, f64)> {
    let k = prev.len();
    let mut group: Vec<usize> = (0..k).collect();
    for i in 0..k {
        for j in i + 1..k {
            if (prev[i] - prev[j]).norm() < merge_distance {
                let (a, b) = (group[i], group[j]);
                for g in group.iter_mut() {
                    if *g == b {
                        *g = a;
                    }
                }
            }
        }
    }
    let mut labels: Vec<usize> = group.clone();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() == k {
        let radius = adaptive_radius(nominal, prev);
        return Ok((ring_centroids(omega, prev, radius)?, radius));
    }
    let means: Vec<Vec2> = labels
        .iter()
        .map(|&l| {
            let members: Vec<Vec2> = (0..k).filter(|&j| group[j] == l).map(|j| prev[j]).collect();
            members.iter().fold(Vec2::new(0.0, 0.0), |a, b| a + *b) * (1.0 / members.len() as f64)
        })
        .collect();
    let radius = adaptive_radius(nominal, &means);
    let merged = ring_centroids(omega, &means, radius)?;
    let out = group
        .iter()
        .map(|g| merged[labels.binary_search(g).unwrap_or(0)])
        .collect();
    Ok((out, radius))
}

/// r·ω-weighted centroids over disks of radius `window_radius` about the previous centers.
pub fn ring_centroids(omega: &ScalarField, prev: &[Vec2], window_radius: f64) -> Result<Vec<Vec2>> {
    if !(window_radius > 0.0) {
        return Err(Error::InvalidInput(format!("window radius {window_radius} must be positive")));
    }
    for i in 0..prev.len() {
        for j in i + 1..prev.len() {
            if (prev[i] - prev[j]).norm() < 2.0 * window_radius {
                return Err(Error::OverlappingWindows(i, j));
            }
        }
    }
    let g = omega.grid();
    let total = omega.weighted_mass().abs() / g.cell_area();
    let mut out = Vec::with_capacity(prev.len());
    for (j, c) in prev.iter().enumerate() {
        let i_lo = ((c.x - window_radius) / g.hr()).floor().max(0.0) as usize;
        let i_hi = (((c.x + window_radius) / g.hr()).ceil().max(0.0) as usize).min(g.nr() - 1);
        let m_lo = ((c.y - window_radius - g.z_min()) / g.hz()).floor().max(0.0) as usize;
        let m_hi = (((c.y + window_radius - g.z_min()) / g.hz()).ceil().max(0.0) as usize).min(g.nz() - 1);
        let (mut mass, mut mr, mut mz) = (0.0, 0.0, 0.0);
        for i in i_lo..=i_hi {
            for m in m_lo..=m_hi {
                let x = g.point(i, m);
                if (x - *c).norm() <= window_radius {
                    let w = x.x * omega.at(i, m);
                    mass += w;
                    mr += w * x.x;
                    mz += w * x.y;
                }
            }
        }
        if !(mass.abs() > LOST_RING_FRACTION * total) || total == 0.0 {
            return Err(Error::LostRing(j));
        }
        out.push(Vec2::new(mr / mass, mz / mass));
    }
    Ok(out)
}

fn slope(t: &[f64], y: &[f64]) -> Option<f64> {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    if !(stt > 0.0) {
        return None;
    }
    Some(t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum::<f64>() / stt)
}

/// Lab-frame translation speed c in unscaled time t = τ/|log ε|: least-squares slope of the
/// mean z-centroid plus the frame speed 2α₀|log ε|.
pub fn measure_speed(series: &CenterSeries, log_eps: f64, alpha0: f64) -> Result<f64> {
    let l = log_eps.abs();
    if series.len() < 10 {
        return Err(Error::InvalidInput(format!("need at least 10 samples, got {}", series.len())));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidInput("|log eps| must be positive".into()));
    }
    let t: Vec<f64> = series.times.iter().map(|tau| tau / l).collect();
    let z: Vec<f64> = series
        .centers
        .iter()
        .map(|cs| cs.iter().map(|c| c.y).sum::<f64>() / cs.len().max(1) as f64)
        .collect();
    let s = slope(&t, &z).ok_or_else(|| Error::InvalidInput("degenerate time span".into()))?;
    Ok(s + 2.0 * alpha0 * l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub epsilon: f64,
    pub r0: f64,
    pub nr: usize,
    pub nz: usize,
    pub hr: f64,
    pub hz: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub sup_error: f64,
    pub exchange_count: usize,
    pub hamiltonian_drift: f64,
    pub speed_ratio: f64,
    /// sup_error restricted to the first exchange period (up to the second sign change of
    /// r₁ − r₂), when there is one.
    pub first_period_sup_error: Option<f64>,
    pub first_period_end: Option<f64>,
    pub initial_separation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<RunMetadata>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

/// Times where r₁ − r₂ changes sign, located by linear interpolation between the nearest
/// nonzero samples. Instants with r₁ = r₂, such as after a merger, are skipped.
pub fn exchange_times(series: &CenterSeries) -> Vec<f64> {
    let mut out = Vec::new();
    if series.k() != 2 {
        return out;
    }
    let mut last: Option<(f64, f64)> = None;
    for (t, c) in series.times.iter().zip(&series.centers) {
        let d = c[0].x - c[1].x;
        if d == 0.0 {
            continue;
        }
        if let Some((t0, d0)) = last {
            if d0.signum() != d.signum() {
                out.push(t0 + d0 / (d0 - d) * (t - t0));
            }
        }
        last = Some((*t, d));
    }
    out
}

/// Compares PDE centers with P_j = (r0, 0) + q_j(τ)/√|log ε| from the reduced trajectory.
pub fn compare_reduced(series: &CenterSeries, traj: &Trajectory, epsilon: f64) -> Result<ComparisonReport> {
    if traj.is_empty() || series.is_empty() {
        return Err(Error::InvalidInput("empty series or trajectory".into()));
    }
    if series.k() != traj.k() {
        return Err(Error::InvalidInput(format!(
            "series has {} rings, trajectory {}",
            series.k(),
            traj.k()
        )));
    }
    let l = epsilon.ln().abs();
    let r0 = traj.r0();
    let exchanges = exchange_times(series);
    let first_end = exchanges.get(1).copied();
    let mut sup: f64 = 0.0;
    let mut sup_first: f64 = 0.0;
    for (tau, pde) in series.times.iter().zip(&series.centers) {
        let q = traj.offsets_at(*tau);
        let ode = scaled_to_physical(&ScaledConfig::new(q, r0)?, epsilon)?;
        let err = pde.iter().zip(ode.centers()).fold(0.0f64, |m, (a, b)| m.max((*a - *b).norm()));
        sup = sup.max(err);
        if first_end.is_some_and(|end| *tau <= end) {
            sup_first = sup_first.max(err);
        }
    }
    let initial_separation = {
        let c = &series.centers[0];
        let mut best = f64::INFINITY;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                best = best.min((c[i] - c[j]).norm());
            }
        }
        best
    };
    let speed_ratio = if series.len() >= 10 {
        measure_speed(series, l, 1.0 / r0).map(|c| c / (2.0 * l / r0)).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    Ok(ComparisonReport {
        sup_error: sup,
        exchange_count: exchanges.len(),
        hamiltonian_drift: traj.hamiltonian_drift(),
        speed_ratio,
        first_period_sup_error: first_end.map(|_| sup_first),
        first_period_end: first_end,
        initial_separation,
        metadata: None,
    })
}
