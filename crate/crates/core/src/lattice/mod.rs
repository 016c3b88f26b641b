//! Extended reals and the vector lattice of simple functions.

mod ext_real;
mod simple;

pub use ext_real::{ext_add, ExtReal};
pub use simple::{canonicalize, eval, lattice_op, LatticeOp, SimpleFunction, Term};

use crate::error::Result;
use crate::rational::Rational;
use crate::rings::Point;

/// A space of finite-valued functions closed under linear combinations,
/// meets and joins. Realized by [`SimpleFunction`] and by
/// [`crate::lebesgue::PiecewiseLinear`].
pub trait VectorLattice: Clone + Send + Sync + Sized {
    fn zero_like(&self) -> Self;
    fn plus(&self, other: &Self) -> Result<Self>;
    fn scale(&self, c: &Rational) -> Self;
    fn meet(&self, other: &Self) -> Result<Self>;
    fn join(&self, other: &Self) -> Result<Self>;
    fn abs(&self) -> Self;
    fn value_at(&self, p: &Point) -> Result<Rational>;

    /// Points at which two functions of this kind can be compared exactly:
    /// if `x - y` is nonnegative at the probes of both, it is nonnegative
    /// everywhere.
    fn probe_points(&self) -> Vec<Point>;

    fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scale(&-Rational::from_integer(1.into())))
    }

    /// `x v 0`
    fn positive_part(&self) -> Result<Self> {
        self.join(&self.zero_like())
    }

    /// `(-x) v 0`
    fn negative_part(&self) -> Result<Self> {
        self.scale(&-Rational::from_integer(1.into())).join(&self.zero_like())
    }
}
