use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (partial sum {partial_sum:e}, last term {last_term:e})")]
    SeriesNonConvergence {
        terms: usize,
        partial_sum: f64,
        last_term: f64,
    },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("quadrature rule with {node_count} nodes reached defect {achieved_defect:e} (required {required:e})")]
    QuadratureConstruction {
        node_count: usize,
        achieved_defect: f64,
        required: f64,
    },

    #[error("grid too coarse: {steps} steps, need at least {min}")]
    GridTooCoarse { steps: usize, min: usize },

    #[error("property `{clause}` violated at t={t}, n={n}: {detail}")]
    PropertyFailure {
        clause: String,
        t: f64,
        n: usize,
        detail: String,
    },

    #[error("Picard iteration did not converge in {iterations} iterations (last residual {:e})", residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("rejected instance: {0}")]
    RejectedInstance(String),

    #[error("optimization failed at candidate {candidate}: {source}")]
    Optimization {
        candidate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
