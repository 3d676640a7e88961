//! Parametrized linear-optical interferometers.

pub mod init;
pub mod mesh;
pub mod mzi;
pub(crate) mod qr;
pub mod spec;

pub use init::{identity_parameters, initialize_parameters, qr_haar_statistics_probe, InitStrategy};
pub use mesh::{parameter_count, MeshKind};
pub use mzi::mzi_block;
pub use spec::{compose_mesh, make_input_state, CircuitSpec};
