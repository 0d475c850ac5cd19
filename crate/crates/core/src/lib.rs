//! Communicating processes with data for supervisory control.
//!
//! The pipeline is: parse a `.cpd` specification ([`parser`]), execute the
//! operational semantics ([`sos`]) to build explicit state spaces
//! ([`state_space`]), compare them with partial bisimulation
//! ([`relations`]), check requirements, controllability and nonblocking
//! ([`control`]) and synthesize guard-based supervisors ([`synthesis`]).

pub mod control;
pub mod models;
pub mod parser;
pub mod relations;
pub mod sos;
pub mod state_space;
pub mod synthesis;
pub mod terms;

pub use parser::{parse, print, Diagnostic, SystemSpec};
