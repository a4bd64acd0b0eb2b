//! Constrained Nash equilibria of a couple's game.
//!
//! Given outside options `(u0, v0)` — what each partner could secure outside
//! the couple — a contract is *feasible* when it pays both at least their
//! option, and a *constrained Nash equilibrium* (CNE) when it is feasible
//! and every profitable unilateral deviation of one partner pushes the other
//! strictly below her (his) outside option, so that the couple would break.
//!
//! Class-specific solvers:
//! * matrix games: exhaustive menu scan (a CNE need not exist);
//! * zero-sum, strictly competitive and transfer games: the level nearest
//!   `median(F^-1(u0), -H^-1(v0), w)` with `w` the zero-sum value;
//! * potential games: the feasible contract maximizing the potential;
//! * repeated games: the payoff-set construction of [`repeated_cne_payoff`].

use crate::game::{feasible_payoff_hull, punishment_levels, Contract, Game, GameClass, Matrix, Play};
use crate::geometry::Point;
use crate::instance::{Instance, MatchingProfile};
use crate::rational::{median, Rational};
use crate::Side;
use num_traits::Signed;
use std::fmt;
use thiserror::Error;

/// Outside options of a couple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutsideOptions {
    pub u0: Rational,
    pub v0: Rational,
}

impl OutsideOptions {
    pub fn new(u0: Rational, v0: Rational) -> Self {
        Self { u0, v0 }
    }

    fn bound(&self, side: Side) -> &Rational {
        match side {
            Side::Men => &self.u0,
            Side::Women => &self.v0,
        }
    }
}

impl fmt::Display for OutsideOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u0, self.v0)
    }
}

/// How a CNE is selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CnePolicy {
    /// The class's canonical construction.
    Any,
    /// A feasible Nash equilibrium when one exists, else the canonical one.
    PreferNash,
    /// Potential games: maximize the potential over feasible contracts.
    MaxPotential,
    /// Repeated games: the punishment-level construction.
    RepeatedOracle,
    /// Zero-sum, strictly competitive and transfer games: the median level.
    ZeroSumMedian,
}

impl CnePolicy {
    pub fn name(self) -> &'static str {
        match self {
            CnePolicy::Any => "any",
            CnePolicy::PreferNash => "prefer-nash",
            CnePolicy::MaxPotential => "max-potential",
            CnePolicy::RepeatedOracle => "repeated",
            CnePolicy::ZeroSumMedian => "zero-sum",
        }
    }

    /// Whether the policy can be used on games of `class`.
    pub fn applies_to(self, class: GameClass) -> bool {
        match self {
            CnePolicy::Any | CnePolicy::PreferNash => true,
            CnePolicy::MaxPotential => class == GameClass::Potential,
            CnePolicy::RepeatedOracle => class == GameClass::RepeatedStage,
            CnePolicy::ZeroSumMedian => class.is_competitive(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CneError {
    #[error("no contract meets the outside options {0}")]
    Infeasible(OutsideOptions),
    #[error("feasible contracts exist but none is a constrained equilibrium for {0}")]
    NotFeasibleGame(OutsideOptions),
    #[error("policy {policy} does not apply to {class} games")]
    PolicyMismatch { policy: &'static str, class: GameClass },
}

/// Best alternative payoff of `agent` outside the couple: the IRP, or any
/// contract with another partner `b` that `b` accepts, i.e. pays her more
/// than her current payoff plus `eps`.
fn alternative(
    inst: &Instance,
    profile: &MatchingProfile,
    side: Side,
    agent: usize,
    eps: &Rational,
    shift: bool,
) -> Rational {
    let partner = profile.partner(side, agent);
    let mut best = inst.irp(side, agent).clone();
    for b in 0..inst.len(side.other()) {
        if Some(b) == partner {
            continue;
        }
        let threshold = profile.payoff(inst, side.other(), b) + eps;
        for c in inst.game_from(side, agent, b).menu() {
            if *c.other(side) > threshold {
                let value = if shift { c.own(side) - eps } else { c.own(side).clone() };
                if value > best {
                    best = value;
                }
            }
        }
    }
    best
}

/// Outside options of the couple `(i, j)`: the best payoff each partner can
/// obtain from someone else who would accept (IRP included).
pub fn outside_options(
    inst: &Instance,
    profile: &MatchingProfile,
    i: usize,
    j: usize,
    eps: &Rational,
) -> OutsideOptions {
    debug_assert_eq!(profile.partner_of_man(i), Some(j));
    OutsideOptions {
        u0: alternative(inst, profile, Side::Men, i, eps, false),
        v0: alternative(inst, profile, Side::Women, j, eps, false),
    }
}

/// Outside options at margin `eps`: an alternative only threatens the couple
/// when it beats the partner's payoff by more than `eps`, so every
/// alternative payoff is lowered by `eps` (the IRP is not). With these
/// options, feasibility of a replacement contract is exactly the
/// `eps`-external stability of the updated profile, and a CNE is exactly a
/// contract no partner can profitably leave without breaking that stability.
/// At `eps = 0` they coincide with [`outside_options`].
pub fn effective_outside_options(
    inst: &Instance,
    profile: &MatchingProfile,
    i: usize,
    j: usize,
    eps: &Rational,
) -> OutsideOptions {
    OutsideOptions {
        u0: alternative(inst, profile, Side::Men, i, eps, true),
        v0: alternative(inst, profile, Side::Women, j, eps, true),
    }
}

/// Both partners get at least their outside option.
pub fn is_feasible(contract: &Contract, oo: &OutsideOptions) -> bool {
    contract.u >= oo.u0 && contract.v >= oo.v0
}

/// Feasible, and every profitable unilateral deviation leaves the other
/// partner strictly below her (his) outside option.
pub fn is_cne(game: &Game, contract: &Contract, oo: &OutsideOptions) -> bool {
    is_feasible(contract, oo)
        && [Side::Men, Side::Women].into_iter().all(|side| {
            game.profitable_deviations(contract, side).iter().all(|d| d.other(side) < oo.bound(side.other()))
        })
}

/// Feasible Nash equilibria of the menu (each is trivially a CNE): for
/// potential games the one with the largest potential, otherwise the lowest
/// id.
pub fn feasible_nash(game: &Game, oo: &OutsideOptions) -> Option<Contract> {
    let mut nash = game.nash_contracts().into_iter().filter(|c| is_feasible(c, oo));
    match game.class() {
        GameClass::Potential => nash.fold(None, |best: Option<Contract>, c| match &best {
            Some(b) if game.potential_of(b) >= game.potential_of(&c) => best,
            _ => Some(c),
        }),
        _ => nash.next(),
    }
}

fn infeasible_or_not_feasible(game: &Game, oo: &OutsideOptions) -> CneError {
    if game.menu().iter().any(|c| is_feasible(c, oo)) {
        CneError::NotFeasibleGame(oo.clone())
    } else {
        CneError::Infeasible(oo.clone())
    }
}

/// Computes a CNE of `game` for `oo` under `policy`.
pub fn solve_cne(game: &Game, oo: &OutsideOptions, policy: CnePolicy) -> Result<Contract, CneError> {
    let class = game.class();
    if !policy.applies_to(class) {
        return Err(CneError::PolicyMismatch { policy: policy.name(), class });
    }
    if policy == CnePolicy::PreferNash {
        if let Some(c) = feasible_nash(game, oo) {
            return Ok(c);
        }
    }
    let found = match class {
        GameClass::FiniteBimatrix => game.menu().iter().find(|c| is_cne(game, c, oo)).cloned(),
        GameClass::Potential => max_potential(game, oo),
        GameClass::ZeroSum | GameClass::StrictlyCompetitive | GameClass::Transfer => median_level(game, oo),
        GameClass::RepeatedStage => repeated_contract(game, oo),
    };
    match found {
        Some(c) if is_cne(game, &c, oo) => Ok(c),
        _ => Err(infeasible_or_not_feasible(game, oo)),
    }
}

fn max_potential(game: &Game, oo: &OutsideOptions) -> Option<Contract> {
    let mut best: Option<&Contract> = None;
    for c in game.menu().iter().filter(|c| is_feasible(c, oo)) {
        if best.is_none_or(|b| game.potential_of(c) > game.potential_of(b)) {
            best = Some(c);
        }
    }
    best.cloned()
}

/// The competitive-level target `median(lower, upper, w)` of a level-grid
/// game: `lower` is the smallest level acceptable to the man, `upper` the
/// largest acceptable to the woman.
pub fn median_target(game: &Game, oo: &OutsideOptions) -> Option<Rational> {
    let lower = game.level_floor_for_man(&oo.u0)?;
    let upper = game.level_ceiling_for_woman(&oo.v0)?;
    Some(median(&lower, &upper, game.competitive_value()?))
}

fn median_level(game: &Game, oo: &OutsideOptions) -> Option<Contract> {
    let target = median_target(game, oo)?;
    let mut best: Option<(&Contract, Rational)> = None;
    for c in game.menu().iter().filter(|c| is_cne(game, c, oo)) {
        let dist = (game.level_of(c)? - &target).abs();
        // menu levels ascend with id, so a strict test keeps the lower level on ties
        if best.as_ref().is_none_or(|(_, d)| dist < *d) {
            best = Some((c, dist));
        }
    }
    best.map(|(c, _)| c.clone())
}

fn repeated_contract(game: &Game, oo: &OutsideOptions) -> Option<Contract> {
    let (u, v) = game.matrices()?;
    let (pu, pv) = repeated_cne_payoff(u, v, oo)?;
    game.contract_for(&Play::Point { u: pu, v: pv }).ok()
}

/// CNE payoff of the infinitely repeated game with stage `(u, v)`.
///
/// With `E` the hull points paying at least the punishment levels
/// `(alpha, beta)` and `E0` the hull points meeting `oo`:
/// * if `E ∩ E0` is nonempty, its vertex with the largest `u + v` (then
///   largest `u`) — sustainable by punishment-backed cooperation;
/// * else if `u0 >= alpha` and `v0 < beta`, the point of `E0` with the
///   largest `v` (then largest `u`);
/// * else if `v0 >= beta` and `u0 < alpha`, the point of `E0` with the
///   largest `u` (then largest `v`);
/// * `None` exactly when `E0` is empty.
pub fn repeated_cne_payoff(u: &Matrix, v: &Matrix, oo: &OutsideOptions) -> Option<Point> {
    let (alpha, beta) = punishment_levels(u, v);
    let hull = feasible_payoff_hull(u, v);
    let e0 = hull.clip_quadrant(&oo.u0, &oo.v0);
    if e0.is_empty() {
        return None;
    }
    let both = e0.clip_quadrant(&alpha, &beta);
    if !both.is_empty() {
        return both.vertices().iter().max_by(|a, b| (&a.0 + &a.1).cmp(&(&b.0 + &b.1)).then(a.0.cmp(&b.0))).cloned();
    }
    if oo.u0 >= alpha && oo.v0 < beta {
        return e0.top_point();
    }
    if oo.v0 >= beta && oo.u0 < alpha {
        return e0.right_point();
    }
    // unreachable: the mixed equilibrium payoff lies in E, so E0 ⊇ E when
    // both options are below the punishment levels
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn pd() -> (Matrix, Matrix) {
        (Matrix::from_ints(&[[3, 0], [4, 1]]), Matrix::from_ints(&[[3, 4], [0, 1]]))
    }

    fn oo(u0: Rational, v0: Rational) -> OutsideOptions {
        OutsideOptions::new(u0, v0)
    }

    #[test]
    fn feasibility_is_weak() {
        let g = Game::bimatrix(Matrix::from_ints(&[[2]]), Matrix::from_ints(&[[2]])).unwrap();
        let c = &g.menu()[0];
        assert!(is_feasible(c, &oo(int(0), int(0))));
        assert!(!is_feasible(c, &oo(int(3), int(0))));
        assert!(is_feasible(c, &oo(int(2), int(2))));
    }

    #[test]
    fn pd_cooperation_needs_outside_pressure() {
        let (u, v) = pd();
        let g = Game::bimatrix(u, v).unwrap();
        let cc = g.cell(0, 0).unwrap();
        assert!(is_cne(&g, cc, &oo(int(3), int(3))));
        assert!(!is_cne(&g, cc, &oo(int(0), int(0))));
        let dd = g.cell(1, 1).unwrap();
        assert!(is_cne(&g, dd, &oo(int(0), int(1))));
        assert_eq!(solve_cne(&g, &oo(int(3), int(3)), CnePolicy::Any).unwrap(), cc.clone());
    }

    #[test]
    fn zero_sum_median_example() {
        let g = Game::zero_sum(Matrix::from_ints(&[[1, -1], [-1, 1]]), rat(1, 4)).unwrap();
        let o = oo(rat(-1, 2), rat(-1, 4));
        assert_eq!(median_target(&g, &o), Some(int(0)));
        let c = solve_cne(&g, &o, CnePolicy::ZeroSumMedian).unwrap();
        assert_eq!(c.u, int(0));
        // value above the woman's bound: the median is her bound
        let o = oo(int(-1), rat(1, 2));
        let c = solve_cne(&g, &o, CnePolicy::Any).unwrap();
        assert_eq!(c.u, rat(-1, 2));
        assert!(is_cne(&g, &c, &o));
    }

    #[test]
    fn potential_maximizes_phi() {
        let ci = Matrix::from_ints(&[[2, 0], [0, 1]]);
        let g = Game::potential(ci.clone(), ci.clone(), ci).unwrap();
        let c = solve_cne(&g, &oo(int(0), int(0)), CnePolicy::MaxPotential).unwrap();
        assert_eq!((c.u, c.v), (int(2), int(2)));
        assert!(matches!(solve_cne(&g, &oo(int(3), int(0)), CnePolicy::MaxPotential), Err(CneError::Infeasible(_))));
    }

    #[test]
    fn three_by_three_counterexample_has_no_pure_cne() {
        let u = Matrix::from_ints(&[[2, -10, 3], [3, 2, -10], [-10, 3, 2]]);
        let v = Matrix::from_ints(&[[1, -10, 0], [0, 1, -10], [-10, 0, 1]]);
        let g = Game::bimatrix(u, v).unwrap();
        assert!(matches!(solve_cne(&g, &oo(int(0), int(0)), CnePolicy::Any), Err(CneError::NotFeasibleGame(_))));
    }

    #[test]
    fn policy_mismatch_is_rejected() {
        let (u, v) = pd();
        let g = Game::bimatrix(u, v).unwrap();
        assert!(matches!(
            solve_cne(&g, &oo(int(0), int(0)), CnePolicy::MaxPotential),
            Err(CneError::PolicyMismatch { .. })
        ));
    }

    #[test]
    fn repeated_payoff_cases() {
        let (u, v) = pd();
        assert_eq!(repeated_cne_payoff(&u, &v, &oo(int(2), int(2))), Some((int(3), int(3))));
        assert_eq!(repeated_cne_payoff(&u, &v, &oo(int(3), rat(1, 2))), Some((int(3), int(3))));
        assert_eq!(repeated_cne_payoff(&u, &v, &oo(rat(7, 2), int(0))), Some((rat(7, 2), rat(3, 2))));
        // beyond the hull
        assert_eq!(repeated_cne_payoff(&u, &v, &oo(int(4), int(4))), None);
        // only E0 points with v below the punishment level
        let p = repeated_cne_payoff(&u, &v, &oo(rat(39, 10), int(0))).unwrap();
        assert_eq!(p, (rat(39, 10), rat(3, 10)));
        let g = Game::repeated(u, v, int(1)).unwrap();
        let o = oo(rat(39, 10), int(0));
        let c = solve_cne(&g, &o, CnePolicy::RepeatedOracle).unwrap();
        assert_eq!(c.id, Contract::OFF_MENU);
        assert!(is_cne(&g, &c, &o));
    }

    #[test]
    fn outside_options_example() {
        // m1-w1 and m2-w2 matched; w2 earns 1; (m1, w2) offers (4, 3)
        let single = |u: i64, v: i64| Game::bimatrix(Matrix::from_ints(&[[u]]), Matrix::from_ints(&[[v]])).unwrap();
        let inst = Instance::anonymous(
            vec![int(0); 2],
            vec![int(0); 2],
            vec![vec![single(1, 1), single(4, 3)], vec![single(0, 0), single(1, 1)]],
        )
        .unwrap();
        let p = MatchingProfile::from_couples(
            2,
            2,
            [(0, 0, inst.game(0, 0).menu()[0].clone()), (1, 1, inst.game(1, 1).menu()[0].clone())],
        );
        let o = outside_options(&inst, &p, 0, 0, &int(1));
        assert_eq!(o, oo(int(4), int(0)));
        let e = effective_outside_options(&inst, &p, 0, 0, &int(1));
        assert_eq!(e, oo(int(3), int(0)));
        let lone = Instance::anonymous(vec![int(0)], vec![int(0)], vec![vec![single(1, 1)]]).unwrap();
        let p = MatchingProfile::from_couples(1, 1, [(0, 0, lone.game(0, 0).menu()[0].clone())]);
        assert_eq!(outside_options(&lone, &p, 0, 0, &int(0)), oo(int(0), int(0)));
    }
}
