use thiserror::Error;

use crate::verify::MCEstimate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("effective domain has empty interior")]
    EmptyDomain,
    #[error("input function is not convex: midpoint test failed at mu = {at}")]
    NonConvexInput { at: f64 },
    #[error("probe point {probe} lies outside the effective domain")]
    ProbeOutsideDomain { probe: f64 },
    #[error("degenerate interval [{s}, {t}]")]
    DegenerateInterval { s: f64, t: f64 },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("log-scale accumulator overflow: exponent {exponent} is not representable")]
    OverflowRisk { exponent: f64 },
    #[error("grid too coarse: window delta = {delta} spans less than one grid step")]
    GridTooCoarse { delta: f64 },
    #[error("target {target} is not in the interior of the rate function domain")]
    TargetOutsideDomain { target: f64 },
    #[error("segment slope {slope} lies outside the rate function domain")]
    SlopeOutsideDomain { slope: f64 },
    #[error("crude estimator recorded zero hits out of {} samples", .0.n)]
    ZeroHits(Box<MCEstimate>),
    #[error("no scanned level reaches log-probability bound -{target}")]
    ScanExhausted { target: f64 },
    #[error("model `{0}` has no per-step law; tilted sampling is unavailable")]
    NoStepLaw(String),
    #[error("rate function invariant violated: {0}")]
    InvalidRateFunction(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}
