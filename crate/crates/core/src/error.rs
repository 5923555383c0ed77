use thiserror::Error;

use crate::graph::CameraId;

/// Errors produced by the geometry primitives, solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("target is behind the camera")]
    BehindCamera,
    #[error("target coincides with the observer")]
    CoincidentCameras,
    #[error("matrix is not a rotation (orthogonality defect {defect:.3e})")]
    NotARotation { defect: f64 },
    #[error("direction pair is antipodal; the rotation family is the half-turns in u^perp")]
    AntipodalPair,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("duplicate sighting {observer} -> {target}")]
    DuplicateSighting { observer: CameraId, target: CameraId },
    #[error("sighting references unknown camera {0}")]
    UnknownCamera(CameraId),
    #[error("self sighting of camera {0}")]
    SelfSighting(CameraId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cameras are not connected by mutual links: components {components:?}")]
    NotConnected { components: Vec<Vec<CameraId>> },
    #[error("inconsistent orientation cycle between {a} and {b}: defect {defect:.3e} rad")]
    InconsistentCycle { a: CameraId, b: CameraId, defect: f64 },
    #[error("linear system is rank deficient (null space dimension {nullity})")]
    RankDeficient { nullity: usize },
    #[error("no camera pair available to fix the scale")]
    AmbiguousScale,
    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),
    #[error("insufficient sightings: have {have}, need {need} ({detail})")]
    InsufficientSightings { have: usize, need: usize, detail: String },
    #[error("underdetermined: {0}")]
    Underdetermined(String),
    #[error("no convergence after {iterations} iterations (rms {rms:.3e})")]
    NoConvergence { iterations: usize, rms: f64 },
    #[error("degenerate denominator in the rotation family")]
    DegenerateDenominator,
    #[error("degenerate link: v_kj x v_jk vanishes")]
    DegenerateLink,
    #[error("no real root of the elimination polynomial")]
    NoRealRoot,
    #[error("degenerate face {face:?}")]
    DegenerateFace { face: [CameraId; 3] },
    #[error("inconsistent tetrahedron faces: defect {defect:.3e}")]
    InconsistentFaces { defect: f64 },
    #[error("landmarks are collinear")]
    CollinearLandmarks,
    #[error("no real resection solution")]
    NoRealSolution,
    #[error("coincident points")]
    CoincidentPoints,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("cone does not meet the sphere at this azimuth")]
    NoIntersection,
    #[error("observer on the boundary; use quadrature")]
    BoundaryCase,
    #[error("unknown solid: {0}")]
    UnknownSolid(String),
    #[error("document error: {0}")]
    Document(String),
}

impl Error {
    /// True for errors meaning the sighting data does not pin down the poses.
    pub fn is_underdetermined(&self) -> bool {
        matches!(
            self,
            Error::Underdetermined(_)
                | Error::NotConnected { .. }
                | Error::RankDeficient { .. }
                | Error::InsufficientSightings { .. }
                | Error::AmbiguousScale
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
