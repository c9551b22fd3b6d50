//! Scalar abstractions shared by the graph, matcher and decoder.
//!
//! Edge weights are real numbers (`f32` or `f64`); fault rates that are known
//! exactly in units of the physical rate `p` are kept as rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, NumCast};

/// Exact rational number, used for probability coefficients of `p` and for
/// conditional probabilities.
pub type Rational = Ratio<i64>;

/// Real scalar used for edge weights: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_rational(r: Rational) -> Self {
        Self::from_f64(*r.numer() as f64 / *r.denom() as f64).unwrap()
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `-ln(x)` for a probability-like rational.
pub fn neg_ln<F: Scalar>(r: Rational) -> F {
    -F::from_rational(r).ln()
}
