//! Energy-consistent time integration of port-Hamiltonian descriptor systems
//! with discrete gradient methods.

pub mod calculus;
pub mod error;
pub mod integrators;
pub mod library;
pub mod models;
pub mod numerics;
pub mod structure;

pub use error::{Error, Result};
