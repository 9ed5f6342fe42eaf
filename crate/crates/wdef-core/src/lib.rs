//! Near-field scatterer localization on uniform planar arrays via
//! wavenumber-domain ellipse fitting.
//!
//! The pipeline: synthesize exact spherical-wave responses
//! ([`channel`]), transform them to a direction-cosine power spectrum
//! ([`spectrum`]), segment the spectrum into per-scatterer supports and
//! boundary arcs ([`segment`], [`gmm`]), fit the arcs with constrained
//! ellipses ([`conic`]) and invert the fitted coefficients back to scatterer
//! coordinates ([`estimate`]). [`bench`] wraps it all into a reproducible
//! sweep harness with GMM baselines and NMSE scoring ([`metrics`]).
//!
//! All numeric kernels are generic over the [`Scalar`] floating type; the
//! `*F64`/`*F32` aliases at the crate root pin the common concrete choices.

pub mod bench;
pub mod channel;
pub mod conic;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod gmm;
mod linalg;
pub mod metrics;
mod scalar;
pub mod segment;
pub mod spectrum;

pub use bench::{
    calibrate_gamma, calibrate_gamma_weighted, estimator_params, preset_config, resolve_gamma,
    rows_to_csv, run_sweep, run_sweep_with, single_scene, DistanceMapConfig, EstimatorConfig,
    GeometryConfig, Preset, SceneConfig, SpacingMode, SweepAxis, SweepConfig, SweepOptions,
    SweepRow,
};
pub use channel::{
    add_awgn, read_response_text, scatterers_with_random_phases, synthesize_response,
    write_response_text, ArrayResponse, Scene,
};
pub use conic::{canonical_axis_ratio, fit_ellipse_direct, Axis, ConicCoefficients};
pub use error::{Error, Result};
pub use estimate::{
    disambiguate_roots, gmm_baseline_estimate, recover_axis_pair, wdef_estimate, AxisRecovery,
    ClusterFailure, DistanceMap, EstimateOutcome, EstimationResult, EstimatorParams, Method,
    RootCandidate, RootChoice, WdefDiagnostics,
};
pub use geometry::{ArrayGeometry, CartesianCoord, Scatterer, SphericalCoord, SPEED_OF_LIGHT};
pub use gmm::{gmm_cluster, silhouette_score, ClusterModel, GmmParams};
pub use metrics::{nmse_metrics, FallbackEstimate, MetricsRecord};
pub use scalar::Scalar;
pub use segment::{
    extract_boundary_points, partition_boundaries, threshold_support, BoundarySets, SupportMask,
};
pub use spectrum::{
    boundary_coefficient, boundary_coefficients, read_spectrum_text, spatial_to_wavenumber,
    support_membership, theoretical_amplitude, write_spectrum_text, Boundary,
    BoundaryCoefficient, PowerSpectrum, WavenumberGrid,
};

/// `f64`-backed aliases for the main pipeline types.
pub type ArrayGeometryF64 = ArrayGeometry<f64>;
pub type SceneF64 = Scene<f64>;
pub type ArrayResponseF64 = ArrayResponse<f64>;
pub type PowerSpectrumF64 = PowerSpectrum<f64>;
pub type ClusterModelF64 = ClusterModel<f64>;
pub type EstimationResultF64 = EstimationResult<f64>;
pub type MetricsRecordF64 = MetricsRecord<f64>;

/// `f32`-backed aliases for memory-constrained spectra.
pub type ArrayGeometryF32 = ArrayGeometry<f32>;
pub type SceneF32 = Scene<f32>;
pub type ArrayResponseF32 = ArrayResponse<f32>;
pub type PowerSpectrumF32 = PowerSpectrum<f32>;
