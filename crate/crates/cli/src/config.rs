//! Scenario configuration: JSON in, defaulted and checked [`ScenarioConfig`] out.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use vortex_rings::euler::{Interp, CLEARANCE_FRACTION};
use vortex_rings::poisson::SolverKind;
use vortex_rings::reduced::Method;
use vortex_rings::Vec2;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Reduced,
    Ring,
    Leapfrog,
    Modes,
    PoissonTest,
    Levelcurves,
}

impl Mode {
    pub const ALL: [Mode; 6] =
        [Mode::Reduced, Mode::Ring, Mode::Leapfrog, Mode::Modes, Mode::PoissonTest, Mode::Levelcurves];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Reduced => "reduced",
            Mode::Ring => "ring",
            Mode::Leapfrog => "leapfrog",
            Mode::Modes => "modes",
            Mode::PoissonTest => "poisson-test",
            Mode::Levelcurves => "levelcurves",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

/// Uniform grid on [0, r_max] × [z_min, z_max] with nr × nz nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub nr: usize,
    pub nz: usize,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { nr: 257, nz: 257, r_max: 2.3, z_min: -1.5, z_max: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub epsilon: f64,
    pub r0: f64,
    /// Number of rings; taken from `offsets` when absent.
    pub k: Option<usize>,
    /// Initial scaled offsets q_j as [q¹, q²] pairs.
    pub offsets: Option<Vec<[f64; 2]>>,
    pub dt: f64,
    #[serde(rename = "T", alias = "t_end")]
    pub t_end: f64,
    pub method: Method,
    pub grid: GridSpec,
    pub interp: Interp,
    pub poisson: SolverKind,
    pub substeps: usize,
    pub recenter: bool,
    /// Second-order predictor-corrector transport step; false freezes the velocity per step.
    pub predictor_corrector: bool,
    /// Fraction of the initial peak vorticity that may not approach the outer boundary.
    pub clearance_fraction: f64,
    /// Nominal centroid window radius; windows shrink when rings come close.
    pub window_radius: f64,
    /// Write a vorticity snapshot every this many steps (0: never).
    pub snapshot_every: usize,
    /// Half-width of the sampled box and samples per side for `levelcurves`.
    pub box_half_width: f64,
    pub samples: usize,
    /// Node counts in r for the `poisson-test` refinement table (z gets twice as many intervals).
    pub refinements: Vec<usize>,
    /// Outer radius of the profiles written by `modes`.
    pub r_out: f64,
    pub out: PathBuf,
    /// Recorded in the manifest; no scenario draws random numbers.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            mode: Mode::Reduced,
            epsilon: 0.05,
            r0: 1.0,
            k: None,
            offsets: None,
            dt: 1e-3,
            t_end: 20.0,
            method: Method::Rk4,
            grid: GridSpec::default(),
            interp: Interp::default(),
            poisson: SolverKind::default(),
            substeps: 4,
            recenter: true,
            predictor_corrector: true,
            clearance_fraction: CLEARANCE_FRACTION,
            window_radius: 0.1,
            snapshot_every: 0,
            box_half_width: 4.0,
            samples: 200,
            refinements: vec![129, 257, 513],
            r_out: 20.0,
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Offsets as points; ±(0.3, 0) when none were given and k is 2.
    pub fn offsets(&self) -> Vec<Vec2> {
        match &self.offsets {
            Some(o) => o.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
            None => vec![Vec2::new(0.3, 0.0), Vec2::new(-0.3, 0.0)],
        }
    }

    pub fn ring_count(&self) -> usize {
        self.k.unwrap_or_else(|| self.offsets().len())
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: String| Err(CliError::Invalid { field: field.into(), message });
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", format!("must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return bad("r0", format!("must be positive, got {}", self.r0));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return bad("T", format!("must be at least dt = {}, got {}", self.dt, self.t_end));
        }
        if self.offsets.is_none() && self.k.is_some_and(|k| k != 2) {
            return bad("offsets", "required when k is not 2".into());
        }
        let q = self.offsets();
        if let Some(k) = self.k {
            if k != q.len() {
                return bad("k", format!("is {k} but {} offsets are given", q.len()));
            }
        }
        if q.is_empty() {
            return bad("offsets", "at least one ring is needed".into());
        }
        for (j, p) in q.iter().enumerate() {
            if !p.is_finite() {
                return bad(&format!("offsets[{j}]"), "must be finite".into());
            }
        }
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                if q[i] == q[j] {
                    return bad("offsets", format!("entries {i} and {j} coincide"));
                }
            }
        }
        let g = &self.grid;
        if g.nr < 8 || g.nz < 8 {
            return bad("grid.nr", format!("grid needs at least 8 nodes per direction, got {} × {}", g.nr, g.nz));
        }
        if !(g.r_max > 0.0) {
            return bad("grid.r_max", format!("must be positive, got {}", g.r_max));
        }
        if !(g.z_max > g.z_min) {
            return bad("grid.z_max", format!("must exceed z_min = {}, got {}", g.z_min, g.z_max));
        }
        if self.substeps == 0 {
            return bad("substeps", "must be at least 1".into());
        }
        if !(self.clearance_fraction > 0.0 && self.clearance_fraction < 1.0) {
            return bad("clearance_fraction", format!("must lie in (0, 1), got {}", self.clearance_fraction));
        }
        if !(self.window_radius > 0.0) {
            return bad("window_radius", format!("must be positive, got {}", self.window_radius));
        }
        if !(self.box_half_width > 0.0) {
            return bad("box_half_width", format!("must be positive, got {}", self.box_half_width));
        }
        if self.samples < 2 {
            return bad("samples", "need at least 2 samples per side".into());
        }
        if self.refinements.len() < 2 || self.refinements.iter().any(|&n| n < 8) {
            return bad("refinements", "need at least two node counts, each at least 8".into());
        }
        if !(self.r_out > 1.0) {
            return bad("r_out", format!("must exceed 1, got {}", self.r_out));
        }
        Ok(())
    }
}

/// Parses, defaults and checks a JSON scenario. Syntax errors carry the byte offset, type
/// errors and constraint violations the field path.
pub fn validate_config(raw: &str) -> Result<ScenarioConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(raw);
    let cfg: ScenarioConfig = match serde_path_to_error::deserialize(&mut de) {
        Ok(c) => c,
        Err(e) => {
            let path = e.path().to_string();
            let inner = e.into_inner();
            return Err(if inner.is_syntax() || inner.is_eof() || path == "." {
                CliError::Parse {
                    offset: byte_offset(raw, inner.line(), inner.column()),
                    message: inner.to_string(),
                }
            } else {
                CliError::Invalid { field: path, message: inner.to_string() }
            });
        }
    };
    de.end().map_err(|e| CliError::Parse {
        offset: byte_offset(raw, e.line(), e.column()),
        message: e.to_string(),
    })?;
    cfg.check()?;
    Ok(cfg)
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(raw: &str, line: usize, column: usize) -> usize {
    let start: usize = raw.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(raw.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default_reduced_scenario() {
        let cfg = validate_config("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.mode, Mode::Reduced);
        assert_eq!(cfg.ring_count(), 2);
        assert_eq!(cfg.offsets(), vec![Vec2::new(0.3, 0.0), Vec2::new(-0.3, 0.0)]);
    }

    #[test]
    fn coincident_offsets_name_the_field() {
        match validate_config(r#"{"offsets": [[0.1, 0.2], [0.1, 0.2]]}"#) {
            Err(CliError::Invalid { field, .. }) => assert_eq!(field, "offsets"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn epsilon_out_of_range() {
        for raw in [r#"{"epsilon": 1.0}"#, r#"{"epsilon": 2}"#, r#"{"epsilon": 0}"#] {
            match validate_config(raw) {
                Err(CliError::Invalid { field, .. }) => assert_eq!(field, "epsilon"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn syntax_error_reports_byte_offset() {
        let raw = "{\n  \"dt\": 0.1,\n  oops\n}";
        match validate_config(raw) {
            Err(CliError::Parse { offset, .. }) => assert_eq!(&raw[offset..offset + 1], "o"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_errors_carry_the_path() {
        match validate_config(r#"{"grid": {"nr": "many"}}"#) {
            Err(CliError::Invalid { field, .. }) => assert_eq!(field, "grid.nr"),
            other => panic!("{other:?}"),
        }
        match validate_config(r#"{"mode": "spiral"}"#) {
            Err(CliError::Invalid { field, .. }) => assert_eq!(field, "mode"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(validate_config(r#"{"epsilonn": 0.1}"#), Err(CliError::Invalid { .. })));
    }

    #[test]
    fn ring_count_must_match_offsets() {
        assert!(validate_config(r#"{"k": 3}"#).is_err());
        assert!(validate_config(r#"{"k": 1, "offsets": [[0, 0]]}"#).is_ok());
        assert!(validate_config(r#"{"k": 2, "offsets": [[0, 0]]}"#).is_err());
    }

    #[test]
    fn horizon_alias() {
        assert_eq!(validate_config(r#"{"t_end": 3}"#).unwrap().t_end, 3.0);
        assert_eq!(validate_config(r#"{"T": 4}"#).unwrap().t_end, 4.0);
        assert!(validate_config(r#"{"T": 1e-4}"#).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
