//! Error type shared by all estimation stages.

use thiserror::Error;

/// Errors raised by geometry validation, spectral transforms and the
/// estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (zero-norm vector, empty
    /// point set, bad parameter value, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point that must lie strictly in front of the panel has `z <= 0`.
    #[error("point lies outside the z > 0 halfspace (z = {z})")]
    OutOfHalfspace { z: f64 },

    /// Element index outside the array grid.
    #[error("element index ({ix}, {iy}) out of range for a {nx}x{ny} array")]
    IndexOutOfRange {
        ix: usize,
        iy: usize,
        nx: usize,
        ny: usize,
    },

    /// A scatterer coincides with an antenna element, so the spherical-wave
    /// amplitude 1/d is singular.
    #[error("scatterer coincides with element ({ix}, {iy}); distance is zero")]
    SingularGeometry { ix: usize, iy: usize },

    /// Wavenumber coordinates outside the visible region kx^2 + ky^2 < 1.
    #[error("({kx}, {ky}) lies in the evanescent region (kx^2 + ky^2 >= 1)")]
    EvanescentRegion { kx: f64, ky: f64 },

    /// Scatterer sits directly above a panel edge plane, so the boundary
    /// curve coefficient for that edge is undefined.
    #[error("degenerate boundary {boundary}: scatterer is on the edge plane")]
    DegenerateBoundary { boundary: usize },

    /// Thresholding a spectrum with no power anywhere.
    #[error("spectrum is identically zero; nothing to threshold")]
    EmptySpectrum,

    /// A cluster or boundary arc does not carry enough points to proceed.
    #[error("insufficient boundary data: {0}")]
    InsufficientBoundary(String),

    /// Point set is rank-deficient (collinear or otherwise degenerate), so
    /// no conic can be fitted.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// The constrained eigenproblem produced no admissible elliptical
    /// solution.
    #[error("ellipse fit failed: {0}")]
    FitFailure(String),

    /// Fitted conic is not close enough to a centered axis-aligned ellipse;
    /// usually signals a mispartitioned boundary upstream.
    #[error("conic is not axis-aligned/centered: {0}")]
    NotAxisAligned(String),

    /// Fitted boundary coefficients are mutually inconsistent (a <= 1 or a
    /// negative discriminant in the recovery quadratic).
    #[error("inconsistent boundary coefficients: {0}")]
    InconsistentCoefficients(String),

    /// Cluster centroid maps outside the visible direction region.
    #[error("cluster mean ({kx}, {ky}) has norm >= 1; no valid arrival direction")]
    InvalidDirection { kx: f64, ky: f64 },

    /// Malformed benchmark configuration.
    #[error("config error: {0}")]
    Config(String),

    /// File I/O while reading or writing dumps/CSV.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed dump file contents.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
