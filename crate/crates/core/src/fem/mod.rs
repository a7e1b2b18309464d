//! Lagrange finite element spaces, quadrature and assembly.

mod assembly;
mod quadrature;
mod space;

pub use assembly::{
    assemble_grad_load, assemble_load, assemble_load_scalar, assemble_mass, assemble_stiffness,
    assemble_transport_scalar, assemble_transport_vector, inner_l2, integrate, l2_error, l2_norm, transport_matrix,
};
pub use quadrature::QuadratureRule;
pub use space::{basis, Field, Space, Tabulation};
