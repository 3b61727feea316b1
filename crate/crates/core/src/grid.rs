//! Uniform (r, z) grids over the closed half-plane r ≥ 0 and fields sampled on them.
//! Values are stored row-major in r: index i·nz + m for node (r_i, z_m).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiGrid {
    nr: usize,
    nz: usize,
    hr: f64,
    hz: f64,
    z_min: f64,
}

impl AxiGrid {
    /// Nodes r_i = i·hr (i < nr) and z_m = z_min + m·hz (m < nz).
    pub fn new(nr: usize, nz: usize, hr: f64, hz: f64, z_min: f64) -> Result<Self> {
        if nr < 8 || nz < 8 {
            return Err(Error::InvalidInput(format!("grid needs at least 8 nodes per axis, got {nr} x {nz}")));
        }
        if !(hr > 0.0 && hz > 0.0) || !hr.is_finite() || !hz.is_finite() || !z_min.is_finite() {
            return Err(Error::InvalidInput(format!("bad spacings hr = {hr}, hz = {hz}")));
        }
        Ok(AxiGrid { nr, nz, hr, hz, z_min })
    }

    /// Grid with `nr` × `nz` nodes covering [0, r_max] × [z_min, z_max].
    pub fn from_extents(nr: usize, nz: usize, r_max: f64, z_min: f64, z_max: f64) -> Result<Self> {
        if nr < 2 || nz < 2 || !(r_max > 0.0) || !(z_max > z_min) {
            return Err(Error::InvalidInput(format!(
                "bad extents r_max = {r_max}, z = [{z_min}, {z_max}]"
            )));
        }
        AxiGrid::new(nr, nz, r_max / (nr - 1) as f64, (z_max - z_min) / (nz - 1) as f64, z_min)
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn hr(&self) -> f64 {
        self.hr
    }

    pub fn hz(&self) -> f64 {
        self.hz
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn r_max(&self) -> f64 {
        (self.nr - 1) as f64 * self.hr
    }

    pub fn z_max(&self) -> f64 {
        self.z_min + (self.nz - 1) as f64 * self.hz
    }

    pub fn len(&self) -> usize {
        self.nr * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_spacing(&self) -> f64 {
        self.hr.max(self.hz)
    }

    #[inline]
    pub fn idx(&self, i: usize, m: usize) -> usize {
        i * self.nz + m
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.hr
    }

    #[inline]
    pub fn z(&self, m: usize) -> f64 {
        self.z_min + m as f64 * self.hz
    }

    pub fn point(&self, i: usize, m: usize) -> Vec2 {
        Vec2::new(self.r(i), self.z(m))
    }

    /// Node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: Vec2) -> (usize, usize) {
        let i = (x.x / self.hr).round().clamp(0.0, (self.nr - 1) as f64) as usize;
        let m = ((x.y - self.z_min) / self.hz).round().clamp(0.0, (self.nz - 1) as f64) as usize;
        (i, m)
    }

    /// True when the grids differ at most by a translation in z.
    pub fn same_shape(&self, other: &AxiGrid) -> bool {
        self.nr == other.nr && self.nz == other.nz && self.hr == other.hr && self.hz == other.hz
    }

    /// The grid translated by `cells` z-spacings.
    pub fn shifted(&self, cells: isize) -> AxiGrid {
        AxiGrid { z_min: self.z_min + cells as f64 * self.hz, ..*self }
    }

    /// hr·hz, the area attached to one node.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hr * self.hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRole {
    RelativeVorticity,
    RelativeStream,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: AxiGrid,
    values: Vec<f64>,
    role: FieldRole,
}

impl ScalarField {
    pub fn zeros(grid: AxiGrid, role: FieldRole) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()], role }
    }

    pub fn from_values(grid: AxiGrid, values: Vec<f64>, role: FieldRole) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a {} x {} grid",
                values.len(),
                grid.nr(),
                grid.nz()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at node ({}, {})",
                k / grid.nz(),
                k % grid.nz()
            )));
        }
        Ok(ScalarField { grid, values, role })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: AxiGrid, role: FieldRole, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nr() {
            for m in 0..grid.nz() {
                values.push(f(grid.r(i), grid.z(m)));
            }
        }
        ScalarField::from_values(grid, values, role)
    }

    pub fn grid(&self) -> &AxiGrid {
        &self.grid
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, m: usize) -> f64 {
        self.values[self.grid.idx(i, m)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// ∫ f r dr dz by the node sum with weights r_i hr hz.
    pub fn weighted_mass(&self) -> f64 {
        self.moment(1)
    }

    /// ∫ f r^p dr dz by the node sum.
    pub fn moment(&self, p: i32) -> f64 {
        let g = &self.grid;
        let mut total = 0.0;
        for i in 1..g.nr() {
            let w = g.r(i).powi(p);
            let row = &self.values[g.idx(i, 0)..g.idx(i, 0) + g.nz()];
            total += w * row.iter().sum::<f64>();
        }
        total * g.cell_area()
    }

    /// Binary snapshot: nr, nz as u64 then hr, hz, z_min as f64 (little-endian),
    /// followed by the row-major values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.grid.nr as u64).to_le_bytes())?;
        w.write_all(&(self.grid.nz as u64).to_le_bytes())?;
        for v in [self.grid.hr, self.grid.hz, self.grid.z_min] {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_binary<R: Read>(mut r: R, role: FieldRole) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let nr = u64::from_le_bytes(next(&mut r)?) as usize;
        let nz = u64::from_le_bytes(next(&mut r)?) as usize;
        let hr = f64::from_le_bytes(next(&mut r)?);
        let hz = f64::from_le_bytes(next(&mut r)?);
        let z_min = f64::from_le_bytes(next(&mut r)?);
        let grid = AxiGrid::new(nr, nz, hr, hz, z_min)?;
        let mut body = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut body)?;
        let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        ScalarField::from_values(grid, values, role)
    }

    /// CSV with columns r, z, value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,z,value")?;
        for i in 0..self.grid.nr() {
            for m in 0..self.grid.nz() {
                writeln!(w, "{:.10e},{:.10e},{:.15e}", self.grid.r(i), self.grid.z(m), self.at(i, m))?;
            }
        }
        Ok(())
    }
}
