use alloc::string::String;
use core::fmt;

use crate::experiment::PlateKind;

/// Errors raised by the tomography pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A state vector with zero norm was supplied.
    DegenerateStateVector,
    /// Ginibre rank outside `1..=4`.
    RankOutOfRange(usize),
    /// A density matrix failed the physicality checks.
    Unphysical {
        hermiticity_defect: f64,
        trace_defect: f64,
        min_eigenvalue: f64,
    },
    /// The anti-Hermitian part of an input matrix exceeds the accepted residue.
    NonHermitian(f64),
    /// `U†U` deviates from the identity by more than the accepted residue.
    NonUnitary(f64),
    InvalidConfig(String),
    /// A count record lacks a configuration the estimator needs.
    MissingRun {
        setting: PlateKind,
        phase: f64,
    },
    /// A run needed by an estimator carries no photons.
    ZeroBudget {
        run: usize,
    },
    /// Linear-inversion trace too small to renormalize.
    DegenerateCountRecord {
        trace: f64,
    },
    /// MLE parameters with `Tr(T†T) = 0`.
    DegenerateParameters,
    /// The optimizer could not produce a finite cost.
    OptimizerFailure {
        evaluations: usize,
        cost: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateStateVector => write!(f, "degenerate state vector"),
            Error::RankOutOfRange(r) => write!(f, "rank {r} out of range 1..=4"),
            Error::Unphysical {
                hermiticity_defect,
                trace_defect,
                min_eigenvalue,
            } => write!(
                f,
                "unphysical density matrix (hermiticity defect {hermiticity_defect:e}, \
                 trace defect {trace_defect:e}, min eigenvalue {min_eigenvalue:e})"
            ),
            Error::NonHermitian(d) => write!(f, "matrix is not Hermitian (defect {d:e})"),
            Error::NonUnitary(d) => write!(f, "operator is not unitary (defect {d:e})"),
            Error::InvalidConfig(msg) => write!(f, "invalid experiment configuration: {msg}"),
            Error::MissingRun { setting, phase } => write!(
                f,
                "count record has no run with setting {} at phase {phase}",
                setting.as_str()
            ),
            Error::ZeroBudget { run } => write!(f, "run {run} has zero photon budget"),
            Error::DegenerateCountRecord { trace } => {
                write!(f, "degenerate count record (reconstructed trace {trace})")
            }
            Error::DegenerateParameters => write!(f, "degenerate MLE parameters (zero trace)"),
            Error::OptimizerFailure { evaluations, cost } => write!(
                f,
                "optimizer failed to produce a finite cost after {evaluations} evaluations (last cost {cost})"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
