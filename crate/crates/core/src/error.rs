use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("objects live on different manifolds")]
    ManifoldMismatch,
    #[error("not supported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("points too spread for a center of mass: spread {spread:.3e} exceeds {limit:.3e}")]
    SpreadTooLarge { spread: f64, limit: f64 },
    #[error("eigensolver residual {residual:.3e} above tolerance")]
    Eigensolver { residual: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("field not in sublevel: energy {energy:.6e} above threshold {threshold:.6e}")]
    NotInSublevel { energy: f64, threshold: f64 },
    #[error("direction undefined: s(u) vanishes")]
    UndefinedDirection,
    #[error("rho = {rho} gives rho*k_P = {value:.6e}, too close to 8*pi^2*{multiple}")]
    Forbidden { rho: f64, value: f64, multiple: u32 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("density not normalized: total mass {mass:.12e}")]
    Unnormalized { mass: f64 },
}
