//! Lattice operations on externally stable profiles.
//!
//! When two stable profiles satisfy the genericity condition "equal own
//! payoff implies the same partner", letting every agent of one side keep
//! the better of their two outcomes (the side's *join*) yields another
//! externally stable profile. In strictly competitive markets, what one
//! side gains the other loses, so the men's meet (each man keeps his worse
//! outcome) coincides with the women's join.

use crate::game::Contract;
use crate::instance::{Instance, MatchingProfile, ProfileError};
use crate::rational::{abs_diff, Rational};
use crate::stability::{find_blocking_pair, StabilityError, Witness};
use crate::Side;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("invalid profile: {0}")]
    Profile(#[from] ProfileError),
    #[error("{side:?} agent {agent} has (nearly) equal payoffs with different partners in the two profiles")]
    ConditionViolated { side: Side, agent: usize },
    #[error("the combined choices do not form a matching: two agents claim partner {partner}")]
    NotAMatching { partner: usize },
    #[error("meet-join duality needs zero-sum, strictly competitive or transfer games; couple ({man}, {woman}) plays a {class} game")]
    NotCompetitive { man: usize, woman: usize, class: crate::game::GameClass },
    #[error("the men's meet and the women's join differ for man {0}")]
    DualityMismatch(usize),
    #[error("the combined profile is not externally stable ({0})")]
    Unstable(Witness),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// First agent violating the condition that own payoffs within `eps` of each
/// other across the two profiles come with the same partner (`eps = 0`:
/// equal payoffs).
pub fn condition_violation(
    inst: &Instance,
    a: &MatchingProfile,
    b: &MatchingProfile,
    eps: &Rational,
) -> Option<(Side, usize)> {
    for side in [Side::Men, Side::Women] {
        for agent in 0..inst.len(side) {
            let close = abs_diff(&a.payoff(inst, side, agent), &b.payoff(inst, side, agent)) <= *eps;
            if close && a.partner(side, agent) != b.partner(side, agent) {
                return Some((side, agent));
            }
        }
    }
    None
}

/// Whether the genericity condition holds for the pair of profiles.
pub fn check_condition_star2(inst: &Instance, a: &MatchingProfile, b: &MatchingProfile, eps: &Rational) -> bool {
    condition_violation(inst, a, b, eps).is_none()
}

/// Every agent of `side` takes their outcome from `a` or `b`; `prefer_a`
/// decides from the two payoffs.
fn combine(
    inst: &Instance,
    a: &MatchingProfile,
    b: &MatchingProfile,
    side: Side,
    prefer_a: impl Fn(&Rational, &Rational) -> bool,
) -> Result<MatchingProfile, LatticeError> {
    a.validate(inst)?;
    b.validate(inst)?;
    let mut picks: Vec<Option<(usize, Contract)>> = Vec::with_capacity(inst.len(side));
    for agent in 0..inst.len(side) {
        let from = if prefer_a(&a.payoff(inst, side, agent), &b.payoff(inst, side, agent)) { a } else { b };
        picks.push(from.partner(side, agent).map(|p| (p, from.contract(side, agent).expect("matched").clone())));
    }
    let mut taken = vec![false; inst.len(side.other())];
    let mut out = MatchingProfile::for_instance(inst);
    for (agent, pick) in picks.into_iter().enumerate() {
        if let Some((partner, contract)) = pick {
            if std::mem::replace(&mut taken[partner], true) {
                return Err(LatticeError::NotAMatching { partner });
            }
            match side {
                Side::Men => out.match_couple(agent, partner, contract),
                Side::Women => out.match_couple(partner, agent, contract),
            }
        }
    }
    Ok(out)
}

/// The `side`-join: each agent of `side` keeps the better of their outcomes
/// in `a` and `b` (on equal payoffs, the outcome from `a`). Requires the
/// genericity condition with equality.
pub fn join(
    inst: &Instance,
    a: &MatchingProfile,
    b: &MatchingProfile,
    side: Side,
) -> Result<MatchingProfile, LatticeError> {
    if let Some((side, agent)) = condition_violation(inst, a, b, &Rational::zero()) {
        return Err(LatticeError::ConditionViolated { side, agent });
    }
    combine(inst, a, b, side, |pa, pb| pa >= pb)
}

/// The men's meet: each man keeps the worse of his outcomes (on equal
/// payoffs, the outcome from `a`). Stability is not guaranteed in general.
pub fn men_meet(inst: &Instance, a: &MatchingProfile, b: &MatchingProfile) -> Result<MatchingProfile, LatticeError> {
    if let Some((side, agent)) = condition_violation(inst, a, b, &Rational::zero()) {
        return Err(LatticeError::ConditionViolated { side, agent });
    }
    combine(inst, a, b, Side::Men, |pa, pb| pa <= pb)
}

/// In a market of strictly competitive games the men's meet equals the
/// women's join. Computes both, checks that they agree couple by couple,
/// and that the result is externally stable.
pub fn meet_zero_sum_duality(
    inst: &Instance,
    a: &MatchingProfile,
    b: &MatchingProfile,
) -> Result<MatchingProfile, LatticeError> {
    for (man, woman, game) in inst.games() {
        if !game.class().is_competitive() {
            return Err(LatticeError::NotCompetitive { man, woman, class: game.class() });
        }
    }
    let meet = men_meet(inst, a, b)?;
    let women_join = join(inst, a, b, Side::Women)?;
    for i in 0..inst.n_men() {
        let same = meet.partner_of_man(i) == women_join.partner_of_man(i)
            && match (meet.contract_of_man(i), women_join.contract_of_man(i)) {
                (Some(x), Some(y)) => x.same_payoffs(y),
                (None, None) => true,
                _ => false,
            };
        if !same {
            return Err(LatticeError::DualityMismatch(i));
        }
    }
    if let Some(w) = find_blocking_pair(inst, &women_join, &Rational::zero())? {
        return Err(LatticeError::Unstable(w));
    }
    Ok(women_join)
}
