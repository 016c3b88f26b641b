//! Monotone limits, the level-set (Daniell-Stone) integral, measures
//! recovered from integrals, and the convergence theorems checked on
//! finite universes.

mod engine;
mod levels;
mod measurable;
mod sequence;
pub mod theorems;

pub use engine::{
    approximate_in_t0, is_daniell_measurable, measure_from_integral, null_test, Approximation,
    Bracket, MeasurabilityReport, MeasureEngine, NullCertificate,
};
pub use levels::{dyadic_levels, level_set_integral, DyadicLevels, LevelConfig, LevelRun, DEFAULT_MAX_LEVEL};
pub use measurable::{
    AbsPart, AffineCell, FiniteFunction, Join, MeasurableFunction, Meet, Neg, OracleFunction,
    PiecewiseAffine, PosPart,
};
pub use sequence::{i1_limit, Direction, LimitConfig, MonotoneSequence};

use serde_json::{json, Value};

use crate::lattice::ExtReal;

/// A value with a bracket `lower <= value <= upper` and the depth at
/// which it was produced.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralResult {
    pub value: ExtReal,
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub depth: usize,
    /// Finite bracket (level sets) or settled tail (monotone limits).
    pub converged: bool,
    /// Value after each step, oldest first.
    pub history: Vec<ExtReal>,
}

impl IntegralResult {
    pub fn contains(&self, v: &ExtReal) -> bool {
        &self.lower <= v && v <= &self.upper
    }

    pub fn width(&self) -> ExtReal {
        self.upper.ext_add(&self.lower.neg())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value.to_json(),
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "depth": self.depth,
            "converged": self.converged,
            "approx": self.value.to_f64(),
        })
    }
}
