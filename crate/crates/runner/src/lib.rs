pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod report;
pub mod svg;
