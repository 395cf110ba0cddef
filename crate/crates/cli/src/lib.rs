//! Library side of the `ladder-ent` binary: config handling, command
//! execution and the oracle checks behind `validate`.

pub mod checks;
pub mod config;
pub mod run;
