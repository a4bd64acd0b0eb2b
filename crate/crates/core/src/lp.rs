//! Dense exact-rational simplex for `max c·y` subject to `A y <= b`, `y >= 0`
//! with `b >= 0`, which is all the zero-sum value computation needs: the
//! slack basis is feasible from the start, so there is no phase one.
//! Bland's rule guarantees termination on degenerate tableaux.

use crate::rational::Rational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LpSolution {
    pub objective: Rational,
    pub primal: Vec<Rational>,
    /// Dual prices of the `<=` rows.
    pub dual: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LpError {
    Unbounded,
}

/// Solves `max c·y` s.t. `a y <= b`, `y >= 0`. Requires every `b[i] >= 0`.
pub(crate) fn maximize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> Result<LpSolution, LpError> {
    let rows = a.len();
    let cols = c.len();
    debug_assert!(b.iter().all(|x| !x.is_negative()));
    let width = cols + rows + 1;
    // tableau rows: constraints, then objective row (reduced costs, negated)
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(rows + 1);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![Rational::zero(); width];
        for (j, x) in row.iter().enumerate() {
            r[j] = x.clone();
        }
        r[cols + i] = Rational::one();
        r[width - 1] = b[i].clone();
        t.push(r);
    }
    let mut obj = vec![Rational::zero(); width];
    for (j, x) in c.iter().enumerate() {
        obj[j] = -x.clone();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Bland: lowest-index column with negative reduced cost
    while let Some(enter) = (0..width - 1).find(|&j| t[rows][j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leave else {
            return Err(LpError::Unbounded);
        };
        let pivot = t[pivot_row][enter].clone();
        for x in t[pivot_row].iter_mut() {
            *x = &*x / &pivot;
        }
        let pivot_vals = t[pivot_row].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == pivot_row || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for (x, p) in row.iter_mut().zip(&pivot_vals) {
                if !p.is_zero() {
                    *x = &*x - &factor * p;
                }
            }
        }
        basis[pivot_row] = enter;
    }

    let mut primal = vec![Rational::zero(); cols];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < cols {
            primal[bv] = t[i][width - 1].clone();
        }
    }
    let dual = (0..rows).map(|i| t[rows][cols + i].clone()).collect();
    Ok(LpSolution { objective: t[rows][width - 1].clone(), primal, dual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let a = vec![vec![int(1), int(0)], vec![int(0), int(2)], vec![int(3), int(2)]];
        let sol = maximize(&a, &[int(4), int(12), int(18)], &[int(3), int(5)]).unwrap();
        assert_eq!(sol.objective, int(36));
        assert_eq!(sol.primal, vec![int(2), int(6)]);
        // strong duality
        let dual_obj: Rational = sol.dual.iter().zip([int(4), int(12), int(18)]).map(|(y, b)| y * b).sum();
        assert_eq!(dual_obj, int(36));
        assert_eq!(sol.dual[1], rat(3, 2));
    }

    #[test]
    fn unbounded_is_reported() {
        let a = vec![vec![int(1), int(-1)]];
        assert_eq!(maximize(&a, &[int(1)], &[int(0), int(1)]), Err(LpError::Unbounded));
    }
}
