//! Test support: reference programs, random program generation and an
//! independent interpreter for surface programs.

pub mod corpus;
pub mod gen;
pub mod interp;
pub mod terms;

pub use interp::{interpret, InterpError};
