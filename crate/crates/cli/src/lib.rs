//! Configuration, experiment drivers and output writers behind the `poro`
//! command.

pub mod checks;
pub mod config;
pub mod experiments;
pub mod table;
pub mod vtk;
