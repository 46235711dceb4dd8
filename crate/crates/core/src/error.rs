use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;

pub type Result<T> = std::result::Result<T, FvError>;

#[derive(Debug, Error)]
pub enum FvError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix singular to working precision (pivot magnitude {pivot:e}){context}")]
    Singular { pivot: f64, context: String },

    #[error("no convergence after {iterations} iterations: {what}")]
    Convergence {
        what: String,
        iterations: usize,
        /// Last iterates (scalar sequence), most recent last.
        history: Vec<Complex64>,
        /// Last two matrix iterates for continued-fraction failures.
        corners: Option<Box<(ComplexMatrix, ComplexMatrix)>>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("quadrature accuracy: {0}")]
    Accuracy(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("at E = {energy}: {source}")]
    AtEnergy {
        energy: Complex64,
        #[source]
        source: Box<FvError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FvError {
    /// Attaches the energy at which a numerical failure happened.
    pub fn at_energy(self, energy: Complex64) -> Self {
        match self {
            e @ FvError::AtEnergy { .. } => e,
            other => FvError::AtEnergy {
                energy,
                source: Box::new(other),
            },
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            FvError::Singular { .. }
            | FvError::Convergence { .. }
            | FvError::Accuracy(_)
            | FvError::Resource(_) => true,
            FvError::AtEnergy { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
