//! Finite element solver for a Navier–Stokes–Cahn–Hilliard system with a
//! transported auxiliary field, and a nudging layer that synchronizes an
//! assimilated trajectory with a reference one from coarse observations.

pub mod error;
pub mod fem;
pub mod mesh;
pub mod model;
pub mod sparse;
pub mod diagnostics;
pub mod experiments;
pub mod observation;
pub mod scheme;
