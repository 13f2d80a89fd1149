use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown metric family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("point {point:?} is closer than {margin} to the chart boundary")]
    Margin { point: Vec<f64>, margin: f64 },

    #[error("singular metric matrix at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("geodesic left the chart at arc length {arc_length}")]
    ChartExit { arc_length: f64, point: Vec<f64> },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("vertex {0} has too few neighbours for a quadratic fit")]
    InsufficientRing(usize),

    #[error("tangential contact between surface and face (|cos| = {cos})")]
    TangentialContact { cos: f64 },

    #[error("point {point:?} is not on edge {edge}")]
    NotOnEdge { edge: usize, point: Vec<f64> },

    #[error("point {point:?} is not on face {face}")]
    NotOnFace { face: usize, point: Vec<f64> },

    #[error("face mismatch: {0}")]
    FaceMismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
