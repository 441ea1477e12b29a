pub mod cocycle_analysis;
pub mod cohomology_solver;
pub mod combinatorics;
pub mod error;
pub mod function_spaces;
pub mod iet;
pub mod linalg;
pub mod numeric;
pub mod rauzy_veech;
pub mod self_similar;

pub use error::{Error, Result};
