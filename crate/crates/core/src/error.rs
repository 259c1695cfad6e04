use thiserror::Error;

/// Errors produced by the lattice, model-set and diffraction routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate lattice: |det| = {det:.3e}")]
    DegenerateLattice { det: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("region is unbounded or has non-finite bounds")]
    UnboundedRegion,

    #[error("region has zero volume")]
    ZeroVolume,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid point group: {0}")]
    InvalidPointGroup(String),

    #[error("test function is not invariant under the point group (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("sample region does not contain the {margin:.3}-neighbourhood of the averaging set")]
    InsufficientMargin { margin: f64 },

    #[error("test function support radius {support:.6} exceeds autocorrelation cutoff {cutoff:.6}")]
    SupportExceedsCutoff { support: f64, cutoff: f64 },

    #[error("frequency must be nonzero (the trivial character is excluded)")]
    TrivialCharacter,

    #[error("label is not in the automorphic spectrum: {0}")]
    LabelNotInSpectrum(String),

    #[error("dual-sum tail estimate {tail:.3e} exceeds {limit:.3e}")]
    TailBound { tail: f64, limit: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("Monte Carlo standard error {stderr:.3e} exceeds requested tolerance {tolerance:.3e}")]
    MonteCarlo { stderr: f64, tolerance: f64 },

    #[error("ansatz Gram matrix is singular or indefinite (min eigenvalue {min_eigenvalue:.3e}); reduce ansatz_dim")]
    AnsatzDegenerate { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
