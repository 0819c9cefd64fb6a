//! Shared fixtures for the benchmarks.

use navier4_core::{Domain, GridField, ParamPair};

/// An admissible pair with distinct negative shifts.
pub const PARAMS: ParamPair = ParamPair { alpha: -6.0, beta: -5.0 };

/// Smooth positive forcing on the unit box of dimension `dim`.
pub fn forcing(dim: usize, n: usize) -> GridField {
    let d = Domain::unit(dim).expect("unit box");
    GridField::from_fn(&d, &vec![n; dim], |x| 1.0 + x.iter().map(|v| (3.0 * v).cos()).product::<f64>())
        .expect("valid grid")
}
