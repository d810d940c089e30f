use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot parse polytope spec: {0}")]
    SpecParse(String),

    #[error("{0}")]
    Validation(String),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] bernstein_core::Error),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use bernstein_core::Error as E;
        match self {
            Self::Usage(_) => "Usage",
            Self::SpecParse(_) => "SpecParseError",
            Self::Validation(_) => "ValidationError",
            Self::Io { .. } => "IoError",
            Self::Core(e) => match e {
                E::InvalidSupport(_) => "InvalidSupport",
                E::DegenerateHull => "DegenerateHull",
                E::UnsupportedDimension { .. } => "UnsupportedDimension",
                E::OutsidePolytope { .. } => "OutsidePolytope",
                E::NoConvergence { .. } => "NoConvergence",
                E::AtomBlowup { .. } => "AtomBlowup",
                E::MissingDerivative(_) => "MissingDerivative",
                E::DegenerateFit(_) => "DegenerateFit",
                E::GridTooCoarse { .. } => "GridTooCoarse",
                E::InsufficientHits { .. } => "InsufficientHits",
                E::QuadratureFailure { .. } => "QuadratureFailure",
                E::NotLattice => "NotLattice",
                E::InvalidArgument(_) => "InvalidArgument",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        use bernstein_core::Error as E;
        match self {
            Self::Usage(_) => 2,
            Self::SpecParse(_) => 3,
            Self::Validation(_) => 4,
            Self::Io { .. } => 5,
            Self::Core(e) => match e {
                E::InvalidSupport(_) => 10,
                E::DegenerateHull => 11,
                E::UnsupportedDimension { .. } => 12,
                E::OutsidePolytope { .. } => 13,
                E::NoConvergence { .. } => 14,
                E::AtomBlowup { .. } => 15,
                E::MissingDerivative(_) => 16,
                E::DegenerateFit(_) => 17,
                E::GridTooCoarse { .. } => 18,
                E::InsufficientHits { .. } => 19,
                E::QuadratureFailure { .. } => 20,
                E::NotLattice => 21,
                E::InvalidArgument(_) => 22,
            },
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        let rec = ErrorRecord { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() };
        serde_json::to_string(&rec).expect("error record serializes")
    }
}

pub type CliResult<T> = Result<T, CliError>;
