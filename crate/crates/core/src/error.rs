use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mode n = {0} is not supported")]
    UnsupportedMode(i32),

    #[error("mode-1 datum violates orthogonality to zeta_1: integral = {integral:e} (relative {relative:e})")]
    Orthogonality { integral: f64, relative: f64 },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("quadrature did not converge: last iterates {previous:e}, {last:e}")]
    Quadrature { previous: f64, last: f64 },

    #[error("rings {i} and {j} collide (separation {separation:e})")]
    Collision { i: usize, j: usize, separation: f64 },

    #[error("non-finite state at tau = {0}")]
    NonFinite(f64),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("ring {ring} under-resolved: core scale {core:e} < 2 * spacing {spacing:e}")]
    Resolution { ring: usize, core: f64, spacing: f64 },

    #[error("domain: {0}")]
    Domain(String),

    #[error("Delta5 solve did not converge: residual {residual:e} after {iterations} iterations")]
    SolverDivergence { residual: f64, iterations: usize },

    #[error("characteristic displacement of {cells:.1} cells per substep exceeds the limit")]
    Cfl { cells: f64 },

    #[error("ring {0} lost: window mass below threshold")]
    LostRing(usize),

    #[error("centroid windows {0} and {1} overlap")]
    OverlappingWindows(usize, usize),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
