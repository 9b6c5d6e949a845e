use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a conic")]
    NotAConic,
    #[error("degenerate conic")]
    DegenerateConic,
    #[error("singular conic")]
    SingularConic,
    #[error("singular transform")]
    SingularTransform,
    #[error("not a line pair")]
    NotALinePair,
    #[error("complex-conjugate line pair")]
    ComplexLinePair,
    #[error("input conic is not a real ellipse")]
    NotAnEllipse,
    #[error("IAC must be definite")]
    IndefiniteIac,
    #[error("matrix is not definite")]
    NotDefinite,
    #[error("invalid pencil")]
    InvalidPencil,
    #[error("vanishing line inconsistent with ellipse")]
    InconsistentVanishingLine,
    #[error("degenerate viewing geometry")]
    DegenerateGeometry,
    #[error("base point at infinity")]
    BasePointAtInfinity,
    #[error("cannot fit ellipse: {0}")]
    CannotFitEllipse(&'static str),
    #[error("marker out of frame")]
    MarkerOutOfFrame,
    #[error("at least two focal samples are required")]
    TooFewSamples,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero vector is not a homogeneous point or line")]
    ZeroVector,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
