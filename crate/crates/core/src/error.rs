use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid IFS: {0}")]
    InvalidIfs(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("label index {index} out of range for an alphabet of size {size}")]
    LabelOutOfRange { index: usize, size: usize },

    #[error("words must be nonempty")]
    EmptyWord,

    #[error("Moran equation did not converge after {iterations} iterations (residual {residual:e})")]
    MoranNonConvergence { iterations: usize, residual: f64 },

    #[error(
        "length window ({lo:e}, {hi:e}) unreachable: {detail}; \
         minimal feasible c0 is about {min_c0:.4} ((min ratio)^(-1/2))"
    )]
    WindowUnreachable {
        lo: f64,
        hi: f64,
        min_c0: f64,
        detail: String,
    },

    #[error(
        "alphabet split infeasible: {reason} (achievable |A^l| = {long}, |A^s| = {short}, \
         need both > {bound:.3})"
    )]
    SplitInfeasible {
        reason: String,
        long: usize,
        short: usize,
        bound: f64,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("label `{0}` is not in A1 and cannot be perturbed")]
    NotPerturbable(String),

    #[error("perturbation out of range: {0}")]
    PerturbationRange(String),

    #[error("perturbed image of `{label}` escapes [0,1]: {image_lo} .. {image_hi}")]
    PerturbedEscape {
        label: String,
        image_lo: f64,
        image_hi: f64,
    },

    #[error("degenerate histogram: bin width {bin_width} is not smaller than the support length {support}")]
    DegenerateHistogram { bin_width: f64, support: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("theorem hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("|B| = {size} does not exceed |A x A'|/24 = {bound:.3}")]
    PairFamilyTooSmall { size: usize, bound: f64 },

    #[error("N = {needed} distinct rows are required but A1 has only {available} labels")]
    RowsUnreachable { needed: usize, available: usize },

    #[error("empty candidate set: {0}")]
    EmptyCandidates(String),

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Stage tag of a pipeline error, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
