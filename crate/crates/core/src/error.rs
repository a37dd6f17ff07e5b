use thiserror::Error;

/// Errors raised by structure validation and the numerical routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// `p22` of the mode-`k` cascade vanished relative to the matrix scale.
    #[error("singular cascade at mode {mode}: |p22| = {p22:e} below relative floor")]
    SingularCascade { mode: u32, p22: f64 },

    #[error("geometry error: shrunken structure radius {scaled_radius} must lie strictly inside the measurement disk of radius {s}")]
    Geometry { scaled_radius: f64, s: f64 },

    /// Denominator of the DtN perturbation formula vanished.
    #[error("pole in DtN perturbation at mode {mode}")]
    Pole { mode: u32 },

    /// Point lies in the insulated region where the conductivity vanishes.
    #[error("point lies inside the cloaked hole")]
    CloakedHole,

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("analytic tail bound unavailable: {0}")]
    TailUnavailable(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// Wraps an error with the mode that produced it.
    #[error("mode {mode}: {source}")]
    AtMode {
        mode: u32,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
