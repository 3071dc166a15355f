use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular pivot in row {row}")]
    SingularPivot { row: usize },

    #[error("weight function returned a non-finite value in element {element} (x = {x})")]
    NonFiniteWeight { element: usize, x: f64 },

    #[error("potential `{name}` cannot be evaluated at x = {x}")]
    SingularPotential { name: &'static str, x: f64 },

    #[error("derivative of order {order} exceeds the supported maximum {max} for `{name}`")]
    DerivativeOrder {
        name: &'static str,
        order: usize,
        max: usize,
    },

    #[error("position {x} lies outside the domain [-{a}, {a}]")]
    OutOfDomain { x: f64, a: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("orthogonalization collapsed state {index}")]
    RankDeficient { index: usize },

    #[error("energy from momentum moments needs K >= 1")]
    EnergyUnavailable,

    #[error("non-finite value after step {step}")]
    NotFinite { step: usize },

    #[error("reconstruction of level {k} failed: {source}")]
    Reconstruction {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("negative density {value} at node {node}")]
    NegativeDensity { node: usize, value: f64 },

    #[error("{stage} did not converge (last change {residual:e})")]
    NotConverged { stage: &'static str, residual: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
