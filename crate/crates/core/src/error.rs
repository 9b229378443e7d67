use num_complex::Complex64;
use thiserror::Error;

/// Errors surfaced by the geometric and spectral pipelines.
///
/// Construction-time validation is strict: every solver in this crate assumes
/// positive densities, poles strictly inside the disk, and areas in (0, 4π),
/// and those assumptions are checked where the data enters, not deep inside
/// the numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("analytic map has near-zero derivative at z = {z} (|F'| = {modulus:.3e})")]
    DegenerateDerivative { z: Complex64, modulus: f64 },

    #[error("leading coefficient of the analytic map must be nonzero")]
    DegenerateLeadingCoefficient,

    #[error("pole q = {q} must lie strictly inside the unit disk")]
    PoleOutsideDisk { q: Complex64 },

    #[error("domain area {area} outside the admissible range (0, 4π)")]
    AreaOutOfRange { area: f64 },

    #[error("radius {radius} outside the admissible range {range}")]
    RadiusOutOfRange { radius: f64, range: &'static str },

    #[error("{what} did not stabilize under quadrature refinement (|Δ| = {delta:.3e})")]
    QuadratureResolution { what: &'static str, delta: f64 },

    #[error("cumulative area function is not strictly increasing near r = {r}")]
    MonotoneInversion { r: f64 },

    #[error("profile sample {index} is nonpositive ({value})")]
    NonPositiveProfile { index: usize, value: f64 },

    #[error("density weight is nonpositive at ({x}, {y})")]
    NonPositiveWeight { x: f64, y: f64 },

    #[error("profiles have mismatched grids or total areas")]
    ProfileMismatch,

    #[error("profile ordering violated at node {index}: {lower} > {upper}")]
    OrderingViolation { index: usize, lower: f64, upper: f64 },

    #[error("grid too coarse: lowest eigenvalue moved from {coarse} to {fine} under refinement")]
    GridTooCoarse { coarse: f64, fine: f64 },

    #[error(
        "mode ordering failed: first mode-1 eigenvalue {first} is not below the \
         second mode-0 eigenvalue {second}"
    )]
    ModeOrdering { first: f64, second: f64 },

    #[error("eigenfunction changes sign where a fixed sign is required")]
    SignChange,

    #[error("{what} failed to converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("winding number of the barycenter field is {winding}, expected 1")]
    DegreeCheckFailed { winding: i64 },

    #[error("argument {x} outside the domain of the ratio function (poles at 0 and 3/2)")]
    RatioArgument { x: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
