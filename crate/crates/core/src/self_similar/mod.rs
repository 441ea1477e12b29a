//! Periodic Rauzy loops, self-similar interval exchanges and the codimension count.

mod codim;
mod loops;

pub use codim::{codimension, equation_count_check, CodimensionInput};
pub use loops::{
    build_self_similar, find_loops, is_primitive, iterate_periodic, loop_matrix, perron_frobenius, walk, RauzyLoop,
    RauzyLoopJson,
};

use crate::error::Result;

/// Stored loop of the eight-square quaternion origami (genus 3, four singularities),
/// induced on the bottom edge of one square by the linear flow in direction `((1+√5)/2, 1)`.
pub const EW_LOOP_JSON: &str = include_str!("../../data/ew_loop.json");

pub fn ew_loop(bits: usize) -> Result<RauzyLoop> {
    RauzyLoop::from_json_str(EW_LOOP_JSON, bits)
}
