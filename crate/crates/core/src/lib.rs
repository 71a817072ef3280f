//! H-functional machinery for toric and monomial data.

pub mod expkernel;
pub mod filtrations;
pub mod germ;
pub mod linalg;
pub mod polyhedra;
pub mod rational;
pub mod valuations;
