//! Batch front end: table sweeps, field export and run manifests.

pub mod manifest;
pub mod reference;
pub mod tables;
pub mod vtk;
