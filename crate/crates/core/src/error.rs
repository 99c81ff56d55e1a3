use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("speed |c| = {0} must be < 1")]
    SpeedOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: symmetry defect {defect:.3e} exceeds {tol:.1e}")]
    SymmetryViolation {
        what: &'static str,
        defect: f64,
        tol: f64,
    },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("fixed-point iteration diverged at c = {c}: E-norm grew for {streak} consecutive iterations")]
    Divergence { c: f64, streak: usize },

    #[error("Petviashvili iteration {0}")]
    Stagnation(&'static str),

    #[error("{0}")]
    DegenerateFit(String),

    #[error("soliton left the safe region at t = {t:.3}: centre ({:.3}, {:.3})", center[0], center[1])]
    SafeRegion { t: f64, center: [f64; 2] },

    #[error("bad snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
