//! Verification toolkit for the restricted max-min ("Santa Claus")
//! allocation problem: exact configuration-LP optima, allocation graphs of
//! minimal hyperedges, independence-complex connectedness, deletion/explosion
//! sequences with cover accounting, and the two-value coefficient tables.

pub mod allocation_graph;
pub mod error;
pub mod gap_report;
pub mod instance;
pub mod lp;
pub mod rational;
pub mod topology;
pub mod two_values;

pub use error::{Error, Result};
pub use rational::Rational;
