use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeshError {
    #[error("a mesh needs at least one subdivision per side")]
    ZeroSubdivisions,
}

#[derive(Debug, Error, PartialEq)]
pub enum FemError {
    #[error("fields or spaces live on different meshes")]
    MeshMismatch,
    #[error("field does not belong to the expected space: {0}")]
    SpaceMismatch(&'static str),
    #[error("function is not finite at dof {dof} ({x}, {y})")]
    NonFinite { dof: usize, x: f64, y: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e}, target {target:.1e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("dimension mismatch: matrix {rows}x{cols}, vector {len}")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ObservationError {
    #[error("observation mesh ({coarse}) does not nest in the fine mesh ({fine})")]
    NotNested { coarse: usize, fine: usize },
    #[error("fine and coarse spaces differ in degree or component count")]
    DegreeMismatch,
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// The four substeps of one time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substep {
    CahnHilliard,
    AuxiliaryField,
    NavierStokes,
    Pressure,
}

impl fmt::Display for Substep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Substep::CahnHilliard => "CH step",
            Substep::AuxiliaryField => "psi step",
            Substep::NavierStokes => "NS step",
            Substep::Pressure => "pressure",
        })
    }
}

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("{substep} @ {step}: {source}")]
    Solver {
        substep: Substep,
        step: usize,
        #[source]
        source: SolveError,
    },
    #[error("{substep} @ {step}: non-finite values in the solution")]
    NonFinite { substep: Substep, step: usize },
    #[error(transparent)]
    Fem(#[from] FemError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Validation(String),
}

/// Failure of an experiment run.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Observation(#[from] ObservationError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}
