use thiserror::Error;

/// Errors raised by the unmixing pipeline and its supporting modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex set is affinely dependent")]
    DegenerateSimplex,

    #[error("facet system for vertex {vertex} is singular")]
    SingularFacetSystem { vertex: usize },

    #[error("hyperplane normal is the zero vector")]
    ZeroNormal,

    #[error("too few pixels: need at least {needed}, got {got}")]
    TooFewPixels { needed: usize, got: usize },

    #[error("too many pixels for brute force: limit {limit}, got {got}")]
    TooManyPixels { limit: usize, got: usize },

    #[error("too few bands: need at least {needed}, got {got}")]
    TooFewBands { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid number of endmembers {0}: must be at least 2")]
    InvalidEndmemberCount(usize),

    #[error("data holds fewer than {needed} affinely independent pixels")]
    DegenerateData { needed: usize },

    #[error("purest pixels {first} and {second} coincide")]
    DuplicatePurestPixels { first: usize, second: usize },

    #[error("search region {region} of facet {facet} holds no pixels")]
    EmptyRegion { facet: usize, region: usize },

    #[error("active pixels of facet {facet} are affinely dependent")]
    AffinelyDependentActiveSet { facet: usize },

    #[error("abundance denominator of facet {facet} is degenerate ({value:e})")]
    DegenerateDenominator { facet: usize, value: f64 },

    #[error("eta must lie in (0, 1], got {0}")]
    InvalidEta(f64),

    #[error("dirichlet parameters must be finite and positive")]
    InvalidGamma,

    #[error("purity {rho} outside ({lower}, 1]")]
    InvalidPurity { rho: f64, lower: f64 },

    #[error("purity {rho} infeasible: accepted {accepted} of {needed} pixels in {draws} draws")]
    PurityInfeasible {
        rho: f64,
        accepted: usize,
        needed: usize,
        draws: usize,
    },

    #[error("endmember spectra are not full column rank")]
    RankDeficientSpectra,

    #[error("spectra must be finite and nonnegative")]
    NegativeSpectra,

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("abundance map {0} is identically zero")]
    ZeroMap(usize),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("candidate simplex does not enclose pixel {pixel}")]
    NotEnclosing { pixel: usize },
}

impl Error {
    /// True for errors caused by the input values rather than by the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::TooFewPixels { .. }
                | Error::TooManyPixels { .. }
                | Error::TooFewBands { .. }
                | Error::DimensionMismatch { .. }
                | Error::ShapeMismatch { .. }
                | Error::InvalidEndmemberCount(_)
                | Error::InvalidEta(_)
                | Error::InvalidGamma
                | Error::InvalidPurity { .. }
                | Error::NegativeSpectra
                | Error::ZeroMap(_)
                | Error::ZeroVector
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
