//! Brute-force ground truth for tiny instances.
//!
//! Every matching (partial injection of men into women, including the
//! all-single one) is combined with every assignment of menu contracts to
//! its couples, and each profile is classified by the exact checkers. The
//! enumeration streams profiles in a fixed order: men in index order, each
//! man first single, then with women in ascending order, contracts in
//! ascending id.
//!
//! Also here: Pareto frontiers and CNE scans of single games, including a
//! scan of a finite grid of mixed strategy profiles of a bimatrix game.

use crate::cne::{is_cne, OutsideOptions};
use crate::game::{Contract, Game, Matrix};
use crate::instance::{Instance, MatchingProfile};
use crate::rational::Rational;
use crate::stability::{check, Notion, StabilityError};
use crate::Side;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Default bound on the number of candidate profiles.
pub const DEFAULT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration would visit {estimate} profiles, above the cap of {cap}")]
    CapExceeded { estimate: u128, cap: u128 },
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("mixed-grid scan needs a positive number of steps")]
    ZeroSteps,
    #[error("payoffs are too large for the exact integer scan")]
    Overflow,
}

/// Number of (matching, contract assignment) pairs, saturating.
pub fn profile_count(inst: &Instance) -> u128 {
    fn go(inst: &Instance, man: usize, used: &mut [bool]) -> u128 {
        if man == inst.n_men() {
            return 1;
        }
        let mut total = go(inst, man + 1, used);
        for w in 0..inst.n_women() {
            if used[w] {
                continue;
            }
            used[w] = true;
            let rest = go(inst, man + 1, used);
            used[w] = false;
            total = total.saturating_add(rest.saturating_mul(inst.game(man, w).menu().len() as u128));
        }
        total
    }
    go(inst, 0, &mut vec![false; inst.n_women()])
}

/// Calls `visit` on every profile of the instance, in the fixed order;
/// stops early when `visit` returns `false`.
pub fn for_each_profile(
    inst: &Instance,
    cap: u128,
    mut visit: impl FnMut(&MatchingProfile) -> bool,
) -> Result<(), OracleError> {
    let estimate = profile_count(inst);
    if estimate > cap {
        return Err(OracleError::CapExceeded { estimate, cap });
    }
    fn go(
        inst: &Instance,
        man: usize,
        used: &mut [bool],
        current: &mut MatchingProfile,
        visit: &mut dyn FnMut(&MatchingProfile) -> bool,
    ) -> bool {
        if man == inst.n_men() {
            return visit(current);
        }
        if !go(inst, man + 1, used, current, visit) {
            return false;
        }
        for w in 0..inst.n_women() {
            if used[w] {
                continue;
            }
            used[w] = true;
            for c in inst.game(man, w).menu() {
                current.match_couple(man, w, c.clone());
                if !go(inst, man + 1, used, current, visit) {
                    return false;
                }
            }
            current.unmatch_man(man);
            used[w] = false;
        }
        true
    }
    let mut current = MatchingProfile::for_instance(inst);
    go(inst, 0, &mut vec![false; inst.n_women()], &mut current, &mut visit);
    Ok(())
}

/// Does `profile` satisfy `notion`? `Internal` means externally and
/// internally stable with margin `eps`.
pub fn satisfies(
    inst: &Instance,
    profile: &MatchingProfile,
    notion: Notion,
    eps: &Rational,
) -> Result<bool, OracleError> {
    match check(inst, profile, notion, eps) {
        Ok(report) => Ok(report.holds),
        Err(StabilityError::NotExternallyStable(_)) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// All profiles satisfying `notion` with margin `eps`, in enumeration order.
pub fn enumerate_stable(
    inst: &Instance,
    eps: &Rational,
    notion: Notion,
    cap: u128,
) -> Result<Vec<MatchingProfile>, OracleError> {
    let mut out = Vec::new();
    let mut error = None;
    for_each_profile(inst, cap, |p| match satisfies(inst, p, notion, eps) {
        Ok(true) => {
            out.push(p.clone());
            true
        }
        Ok(false) => true,
        Err(e) => {
            error = Some(e);
            false
        }
    })?;
    match error {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// The first profile of `profiles` that is weakly best for every agent of
/// `side` among all of them, if any.
pub fn side_optimal<'a>(inst: &Instance, profiles: &'a [MatchingProfile], side: Side) -> Option<&'a MatchingProfile> {
    profiles.iter().find(|p| {
        profiles.iter().all(|q| (0..inst.len(side)).all(|a| p.payoff(inst, side, a) >= q.payoff(inst, side, a)))
    })
}

/// Menu contracts not strictly dominated in both coordinates by another.
pub fn pareto_frontier(game: &Game) -> Vec<Contract> {
    let menu = game.menu();
    menu.iter().filter(|c| !menu.iter().any(|d| d.u > c.u && d.v > c.v)).cloned().collect()
}

/// All menu contracts that are CNE for `oo`.
pub fn brute_force_cne(game: &Game, oo: &OutsideOptions) -> Vec<Contract> {
    game.menu().iter().filter(|c| is_cne(game, c, oo)).cloned().collect()
}

/// Expected payoff x·M·y of mixed strategies.
pub fn expected_payoff(m: &Matrix, x: &[Rational], y: &[Rational]) -> Rational {
    let mut total = Rational::zero();
    for (r, xr) in x.iter().enumerate() {
        for (c, yc) in y.iter().enumerate() {
            total += xr * yc * m.get(r, c);
        }
    }
    total
}

/// Compositions of `steps` into `parts` non-negative integers, i.e. the
/// mixed strategies with probabilities in multiples of 1/steps.
fn simplex_grid(parts: usize, steps: i64) -> Vec<Vec<i64>> {
    fn go(parts: usize, left: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            go(parts - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(parts, steps, &mut Vec::new(), &mut out);
    out
}

/// Exact fraction num/den with den > 0.
#[derive(Debug, Clone, Copy)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    fn le_scaled(self, value: i128, scale: i128) -> bool {
        // self <= value / scale
        self.num * scale <= value * self.den
    }
}

/// Best own payoff against a fixed opponent mix over the whole (continuous)
/// simplex of own strategies, subject to the opponent getting at least
/// `floor`. `own[k]` and `theirs[k]` are the payoffs of pure strategy k.
/// `None` when no strategy keeps the opponent at the floor.
fn constrained_best(own: &[i128], theirs: &[i128], floor: i128) -> Option<Frac> {
    let mut best: Option<Frac> = None;
    let mut offer = |f: Frac| {
        if best.is_none_or(|b| b.num * f.den < f.num * b.den) {
            best = Some(f);
        }
    };
    for k in 0..own.len() {
        if theirs[k] >= floor {
            offer(Frac { num: own[k], den: 1 });
        }
        for l in 0..own.len() {
            // the edge from e_l (below the floor) to e_k (above it)
            if theirs[k] > floor && theirs[l] < floor {
                let den = theirs[k] - theirs[l];
                let num = own[l] * den + (floor - theirs[l]) * (own[k] - own[l]);
                offer(Frac { num, den });
            }
        }
    }
    best
}

/// A row mix and a column mix.
pub type MixedProfile = (Vec<Rational>, Vec<Rational>);

/// Mixed profiles of the bimatrix game (u, v) on the grid of step 1/steps
/// that are CNE for `oo`: feasible, and no mixed deviation of either player
/// (over the continuous simplex) raises their payoff while keeping the
/// other at their outside option.
pub fn mixed_grid_cne_scan(
    u: &Matrix,
    v: &Matrix,
    oo: &OutsideOptions,
    steps: u32,
) -> Result<Vec<MixedProfile>, OracleError> {
    if steps == 0 {
        return Err(OracleError::ZeroSteps);
    }
    let n = i128::from(steps);
    // one common integer scale for every payoff and both outside options
    let mut scale = BigInt::one();
    for r in 0..u.rows() {
        for c in 0..u.cols() {
            scale = scale.lcm(u.get(r, c).denom()).lcm(v.get(r, c).denom());
        }
    }
    scale = scale.lcm(oo.u0.denom()).lcm(oo.v0.denom());
    let to_int = |x: &Rational| -> Result<i128, OracleError> {
        let s = x * Rational::from_integer(scale.clone());
        let i = s.to_integer().to_i64().ok_or(OracleError::Overflow)?;
        if i.abs() > 1 << 40 {
            return Err(OracleError::Overflow);
        }
        Ok(i128::from(i))
    };
    let int_matrix = |m: &Matrix| -> Result<Vec<Vec<i128>>, OracleError> {
        (0..m.rows()).map(|r| (0..m.cols()).map(|c| to_int(m.get(r, c))).collect()).collect()
    };
    let (ui, vi) = (int_matrix(u)?, int_matrix(v)?);
    let (u0, v0) = (to_int(&oo.u0)?, to_int(&oo.v0)?);
    let (rows, cols) = (u.rows(), u.cols());
    let steps_i = i64::from(steps);
    let xs = simplex_grid(rows, steps_i);
    let ys = simplex_grid(cols, steps_i);

    // per column mix y: payoffs of each pure row (scaled by n), and the
    // man's best constrained reply
    struct Side1 {
        a: Vec<i128>,
        b: Vec<i128>,
        best: Option<Frac>,
    }
    let per_y: Vec<Side1> = ys
        .iter()
        .map(|y| {
            let a: Vec<i128> = (0..rows).map(|r| (0..cols).map(|c| ui[r][c] * i128::from(y[c])).sum()).collect();
            let b: Vec<i128> = (0..rows).map(|r| (0..cols).map(|c| vi[r][c] * i128::from(y[c])).sum()).collect();
            let best = constrained_best(&a, &b, v0 * n);
            Side1 { a, b, best }
        })
        .collect();
    let per_x: Vec<Option<Frac>> = xs
        .iter()
        .map(|x| {
            let own: Vec<i128> = (0..cols).map(|c| (0..rows).map(|r| vi[r][c] * i128::from(x[r])).sum()).collect();
            let theirs: Vec<i128> = (0..cols).map(|c| (0..rows).map(|r| ui[r][c] * i128::from(x[r])).sum()).collect();
            constrained_best(&own, &theirs, u0 * n)
        })
        .collect();

    let mut found = Vec::new();
    for (x, best_woman) in xs.iter().zip(&per_x) {
        for (y, side) in ys.iter().zip(&per_y) {
            // payoffs scaled by n²
            let pu: i128 = (0..rows).map(|r| side.a[r] * i128::from(x[r])).sum();
            let pv: i128 = (0..rows).map(|r| side.b[r] * i128::from(x[r])).sum();
            if pu < u0 * n * n || pv < v0 * n * n {
                continue;
            }
            // feasibility makes both constrained maxima exist
            let man_ok = side.best.is_some_and(|m| m.le_scaled(pu, n));
            let woman_ok = best_woman.is_some_and(|m| m.le_scaled(pv, n));
            if man_ok && woman_ok {
                let mix = |p: &[i64]| p.iter().map(|&k| Rational::new(k.into(), steps_i.into())).collect();
                found.push((mix(x), mix(y)));
            }
        }
    }
    Ok(found)
}
