pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod field_io;
pub mod galerkin;
pub mod inequality;
pub mod ode_bounds;
pub mod output;
pub mod quadrature;
pub mod random;
pub mod trajectory;
pub mod transform;
pub mod verifier;

pub use error::{Error, Result};
