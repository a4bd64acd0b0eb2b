//! Strictly increasing piecewise-linear maps with rational breakpoints.
//!
//! Used for the monotone payoff transforms of strictly competitive and
//! transfer games. Outside the breakpoint range the first and last segments
//! are extended linearly, so the map and its inverse are defined everywhere.

use crate::rational::Rational;
use num_traits::Signed;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PiecewiseError {
    #[error("a piecewise-linear map needs at least two breakpoints")]
    TooFewBreakpoints,
    #[error("breakpoint abscissas must be strictly increasing")]
    UnsortedBreakpoints,
    #[error("map is not strictly increasing between breakpoints {0} and {1}")]
    NotIncreasing(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinear {
    points: Vec<(Rational, Rational)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self, PiecewiseError> {
        if points.len() < 2 {
            return Err(PiecewiseError::TooFewBreakpoints);
        }
        for k in 1..points.len() {
            if points[k].0 <= points[k - 1].0 {
                return Err(PiecewiseError::UnsortedBreakpoints);
            }
            if points[k].1 <= points[k - 1].1 {
                return Err(PiecewiseError::NotIncreasing(k - 1, k));
            }
        }
        Ok(Self { points })
    }

    /// `x -> slope * x + offset`, slope > 0.
    pub fn affine(slope: Rational, offset: Rational) -> Result<Self, PiecewiseError> {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        let y0 = &slope * &zero + &offset;
        let y1 = &slope * &one + &offset;
        Self::new(vec![(zero, y0), (one, y1)])
    }

    pub fn identity() -> Self {
        Self::affine(Rational::from_integer(1.into()), Rational::from_integer(0.into()))
            .expect("identity is increasing")
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    fn segment_for<F: Fn(&(Rational, Rational)) -> &Rational>(&self, key: F, at: &Rational) -> usize {
        let n = self.points.len();
        (0..n - 1).find(|&k| at <= key(&self.points[k + 1])).unwrap_or(n - 2)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let k = self.segment_for(|p| &p.0, x);
        let (x0, y0) = &self.points[k];
        let (x1, y1) = &self.points[k + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn inverse(&self, y: &Rational) -> Rational {
        let k = self.segment_for(|p| &p.1, y);
        let (x0, y0) = &self.points[k];
        let (x1, y1) = &self.points[k + 1];
        x0 + (x1 - x0) * (y - y0) / (y1 - y0)
    }

    pub(crate) fn is_strictly_increasing(&self) -> bool {
        self.points.windows(2).all(|w| (&w[1].1 - &w[0].1).is_positive() && (&w[1].0 - &w[0].0).is_positive())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn kinked() -> PiecewiseLinear {
        // slope 1 below 0, slope 3 above
        PiecewiseLinear::new(vec![(int(-1), int(-1)), (int(0), int(0)), (int(2), int(6))]).unwrap()
    }

    #[test]
    fn evaluates_at_and_between_breakpoints() {
        let f = kinked();
        assert_eq!(f.eval(&int(0)), int(0));
        assert_eq!(f.eval(&int(1)), int(3));
        assert_eq!(f.eval(&rat(-1, 2)), rat(-1, 2));
        // linear extension beyond both ends
        assert_eq!(f.eval(&int(-3)), int(-3));
        assert_eq!(f.eval(&int(3)), int(9));
        assert_eq!(f.inverse(&int(9)), int(3));
        assert_eq!(f.inverse(&int(3)), int(1));
    }

    #[test]
    fn rejects_non_monotone() {
        assert_eq!(
            PiecewiseLinear::new(vec![(int(0), int(1)), (int(1), int(1))]),
            Err(PiecewiseError::NotIncreasing(0, 1))
        );
        assert_eq!(PiecewiseLinear::new(vec![(int(0), int(0))]), Err(PiecewiseError::TooFewBreakpoints));
        assert!(PiecewiseLinear::affine(int(-1), int(0)).is_err());
    }

    proptest! {
        #[test]
        fn inverse_undoes_eval(n in -50i64..50, d in 1i64..7) {
            let f = kinked();
            let x = rat(n, d);
            prop_assert_eq!(f.inverse(&f.eval(&x)), x);
        }
    }
}
