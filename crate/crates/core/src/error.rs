use crate::geometry::CPoint;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("integrand is not finite at quadrature node {node} (piece {piece})")]
    SingularNode { piece: usize, node: CPoint },

    #[error("point {0} lies on a branch cut")]
    BranchCut(CPoint),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("no radius in the schedule avoids the thin set: {0}")]
    CircleSelection(String),

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("bound construction failed: {0}")]
    Bound(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn geometry<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Geometry(msg.into()))
}
