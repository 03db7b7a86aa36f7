use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("singular operator (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("invalid orientation: {0}")]
    InvalidOrientation(String),

    #[error("incompressible material (nu = {0}) has no invertible stiffness")]
    Incompressible(f64),

    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("inclusion morphology is incompatible with the matrix (condition estimate {condition:.3e})")]
    MorphologyIncompatible { condition: f64 },

    #[error("volume fractions sum to {0}, expected 1")]
    FractionSum(f64),

    #[error("invalid phase assembly: {0}")]
    InvalidPhases(String),

    #[error("flow direction undefined at the Drucker-Prager apex (sigma_eq = {sigma_eq:.3e})")]
    ApexSingularity { sigma_eq: f64 },

    #[error("return mapping did not converge after {iterations} Newton iterations (residual {residual:.3e}); subdivide the increment")]
    StepFailure { iterations: usize, residual: f64 },

    #[error("active set did not settle after {0} updates")]
    ActiveSetOscillation(usize),

    #[error("mixed stress/strain control did not converge at increment {step} (stress residual {residual:.3e} MPa)")]
    MixedControl { step: usize, residual: f64 },

    #[error("invalid load program: {0}")]
    InvalidProgram(String),

    #[error("{}", match line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Parse { line: Option<usize>, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::FractionSum(_)
            | Error::InvalidPhases(_)
            | Error::InvalidMaterial(_)
            | Error::InvalidOrientation(_)
            | Error::Incompressible(_)
            | Error::InvalidProgram(_)
            | Error::NotSymmetric(_) => 2,
            Error::Io { .. } | Error::Csv(_) => 4,
            _ => 3,
        }
    }
}
