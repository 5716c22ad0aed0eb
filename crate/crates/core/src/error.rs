use thiserror::Error;

/// Errors raised by the implicitization pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Non-finite coordinates, out-of-domain parameters, bad options.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The Cayley determinant vanishes identically (collinear or coincident nets,
    /// or a system that would need an augmented Dixon row).
    #[error("degenerate surface: {0}")]
    DegenerateSurface(String),

    /// Normalization anchors are collinear or coincident.
    #[error("degenerate anchors: {0}")]
    DegenerateAnchors(String),

    /// Scan direction p/|p| is undefined because p is the origin.
    #[error("degenerate scan direction: surface point is the origin")]
    DegenerateDirection,

    /// An algebraic identity that must hold did not. Always a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by degenerate geometry rather than malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSurface(_) | Error::DegenerateAnchors(_) | Error::DegenerateDirection
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
