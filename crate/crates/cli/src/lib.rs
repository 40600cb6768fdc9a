//! Command-line front end for splinemat.

pub mod commands;
pub mod io;
