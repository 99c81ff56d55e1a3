//! Grid, sampled fields, transforms, Sobolev norms and parity projections.

mod fft;
mod fields;
mod grid;
pub mod snapshot;
mod symmetry;

pub use fields::{ComplexField, Mode, RealField, Spectrum};
pub(crate) use fields::dot;
pub use grid::Grid2D;
pub use snapshot::Snapshot;
pub(crate) use symmetry::project_in_place;
pub use symmetry::{project, symmetry_defect, SymmetryClass};
