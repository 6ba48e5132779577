//! Radiomics robustness toolkit core.
//!
//! Everything in this crate is a pure function of its inputs and only needs
//! `alloc`: volume/mask geometry, voxel and mesh VOI perturbations, the
//! 102-feature radiomics extractor, ICC robustness statistics, two-stage
//! feature selection and the linear classifiers used to score it. File
//! formats, the CLI and experiment orchestration live in the `voiforge` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod features;
pub mod grid;
pub mod learn;
pub mod linalg;
pub mod mesh;
pub mod morph;
pub mod nan_serde;
pub mod perturb;
pub mod rng;
pub mod robust;
pub mod select;
pub mod table;

pub use error::{Error, Result};
pub use grid::{Geometry, ImageVolume, Mask};
pub use table::FeatureTable;
