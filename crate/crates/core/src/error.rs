use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("grid extent {extent} is not an integer multiple of step {step}")]
    StepMismatch { extent: f64, step: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampled potential step {h_q} is not an integer multiple of solver step {h}")]
    Alignment { h_q: f64, h: f64 },

    #[error("degenerate implicit step at x = {x}: coefficient {coefficient:e} (step too large for this potential)")]
    DegenerateStep { x: f64, coefficient: f64 },

    #[error("Neumann series did not converge after {terms} terms (last term {last:e}); use the marching solver")]
    NeumannNotConverged { terms: usize, last: f64 },

    #[error("Re k = {re_k} does not exceed the convergence threshold {threshold}")]
    Threshold { re_k: f64, threshold: f64 },

    #[error("local L1 norm of the potential is not finite")]
    InfiniteNorm,

    #[error("potential is not integrable on the half-line")]
    NotIntegrable,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("domain exceeded: {0}")]
    Domain(String),

    #[error("Riccati integration blew up at x = {x} (|m| = {magnitude:e})")]
    RiccatiBlowUp { x: f64, magnitude: f64 },

    #[error("oracle support violation: {0}")]
    Support(String),

    #[error("branch ambiguity: Re sqrt(k^2 + c) = {0} is not positive")]
    Branch(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 2 configuration, 3 solver, 4 domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateStep { .. }
            | Error::NeumannNotConverged { .. }
            | Error::RiccatiBlowUp { .. }
            | Error::Branch(_) => 3,
            Error::Threshold { .. }
            | Error::Domain(_)
            | Error::InfiniteNorm
            | Error::NotIntegrable
            | Error::Support(_) => 4,
            _ => 2,
        }
    }
}
