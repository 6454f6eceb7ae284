pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod screw;
pub mod solvers;
pub mod swivel;
