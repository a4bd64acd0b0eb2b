//! Exact checkers for every stability notion of a matching profile, each
//! returning a replayable witness when the notion fails.
//!
//! * **Individual rationality**: everyone earns at least their IRP.
//! * **External stability** (margin ε ≥ 0): IR, and no couple not matched
//!   together has a contract giving *both* strictly more than their current
//!   payoff plus ε.
//! * **Unilateral / weak** external stability: blocking pairs must reuse
//!   both chosen strategies (weak) or one of them (unilateral).
//! * **Nash stability**: every couple plays a Nash equilibrium of its game.
//! * **Internal stability**: every profitable unilateral deviation inside a
//!   couple makes the deviated profile externally unstable.

use crate::game::Contract;
use crate::instance::{Instance, MatchingProfile, ProfileError};
use crate::rational::Rational;
use crate::Side;
use num_traits::Signed;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Notion {
    IndividualRationality,
    ExternalEps,
    External0,
    Unilateral,
    Weak,
    Nash,
    Internal,
}

impl Notion {
    pub fn name(self) -> &'static str {
        match self {
            Notion::IndividualRationality => "IR",
            Notion::ExternalEps => "ExternalEps",
            Notion::External0 => "External0",
            Notion::Unilateral => "Unilateral",
            Notion::Weak => "Weak",
            Notion::Nash => "Nash",
            Notion::Internal => "Internal",
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which restricted external-stability notion to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Unilateral,
    Weak,
}

/// Why a notion fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// An agent earns less than being single (a blocking pair with the
    /// empty player).
    BelowIrp { side: Side, agent: usize, payoff: Rational, irp: Rational },
    /// A couple not matched together and a contract of their game that both
    /// strictly prefer (beyond the margin).
    BlockingPair { man: usize, woman: usize, contract: Contract },
    /// A unilateral deviation inside a matched couple.
    Deviation { man: usize, woman: usize, deviator: Side, contract: Contract },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::BelowIrp { side, agent, payoff, irp } => {
                let who = if *side == Side::Men { "man" } else { "woman" };
                write!(f, "{who} {agent} earns {payoff} below individually rational {irp}")
            }
            Witness::BlockingPair { man, woman, contract } => {
                write!(f, "man {man} and woman {woman} block with {contract}")
            }
            Witness::Deviation { man, woman, deviator, contract } => {
                let who = if *deviator == Side::Men { "man" } else { "woman" };
                write!(f, "in couple ({man}, {woman}) the {who} deviates to {contract}")
            }
        }
    }
}

/// Verdict for one notion; `witness` is present exactly when `holds` is false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub notion: Notion,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl StabilityReport {
    fn from_witness(notion: Notion, witness: Option<Witness>) -> Self {
        Self { notion, holds: witness.is_none(), witness }
    }
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "{}: holds", self.notion),
            Some(w) => write!(f, "{}: fails ({w})", self.notion),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error("invalid profile: {0}")]
    Profile(#[from] ProfileError),
    #[error("stability margin must be nonnegative, got {0}")]
    NegativeEps(Rational),
    #[error("internal stability is only defined on externally stable profiles ({0})")]
    NotExternallyStable(Witness),
}

fn check_eps(eps: &Rational) -> Result<(), StabilityError> {
    if eps.is_negative() {
        return Err(StabilityError::NegativeEps(eps.clone()));
    }
    Ok(())
}

/// First agent (men, then women, by index) earning less than their IRP.
pub fn ir_violation(inst: &Instance, profile: &MatchingProfile) -> Option<Witness> {
    for side in [Side::Men, Side::Women] {
        for agent in 0..inst.len(side) {
            let payoff = profile.payoff(inst, side, agent);
            let irp = inst.irp(side, agent);
            if payoff < *irp {
                return Some(Witness::BelowIrp { side, agent, payoff, irp: irp.clone() });
            }
        }
    }
    None
}

fn blocking_pair_unchecked(inst: &Instance, profile: &MatchingProfile, eps: &Rational) -> Option<Witness> {
    if let Some(w) = ir_violation(inst, profile) {
        return Some(w);
    }
    let u: Vec<Rational> = (0..inst.n_men()).map(|i| profile.payoff_of_man(inst, i) + eps).collect();
    let v: Vec<Rational> = (0..inst.n_women()).map(|j| profile.payoff_of_woman(inst, j) + eps).collect();
    for (i, u_i) in u.iter().enumerate() {
        for (j, v_j) in v.iter().enumerate() {
            if profile.partner_of_man(i) == Some(j) {
                continue;
            }
            if let Some(c) = inst.game(i, j).menu().iter().find(|c| c.u > *u_i && c.v > *v_j) {
                return Some(Witness::BlockingPair { man: i, woman: j, contract: c.clone() });
            }
        }
    }
    None
}

/// First external-stability violation: an agent below IRP, else the first
/// couple (by man, then woman, then contract id) not matched together with a
/// contract paying both more than their current payoff plus `eps`.
pub fn find_blocking_pair(
    inst: &Instance,
    profile: &MatchingProfile,
    eps: &Rational,
) -> Result<Option<Witness>, StabilityError> {
    check_eps(eps)?;
    profile.validate(inst)?;
    Ok(blocking_pair_unchecked(inst, profile, eps))
}

pub fn is_individually_rational(inst: &Instance, profile: &MatchingProfile) -> Result<StabilityReport, StabilityError> {
    profile.validate(inst)?;
    Ok(StabilityReport::from_witness(Notion::IndividualRationality, ir_violation(inst, profile)))
}

/// External stability with margin `eps` (strict improvement when `eps = 0`).
pub fn is_externally_stable(
    inst: &Instance,
    profile: &MatchingProfile,
    eps: &Rational,
) -> Result<StabilityReport, StabilityError> {
    let notion = if eps.is_positive() { Notion::ExternalEps } else { Notion::External0 };
    Ok(StabilityReport::from_witness(notion, find_blocking_pair(inst, profile, eps)?))
}

/// Unilateral or weak external stability. Only agents who are both matched
/// carry chosen strategies, so only they can form such blocking pairs, and
/// only in games where the chosen pure strategies are meaningful (matrix
/// games whose strategy sets contain them).
pub fn is_stable_variant(
    inst: &Instance,
    profile: &MatchingProfile,
    variant: Variant,
) -> Result<StabilityReport, StabilityError> {
    profile.validate(inst)?;
    let notion = match variant {
        Variant::Unilateral => Notion::Unilateral,
        Variant::Weak => Notion::Weak,
    };
    if let Some(w) = ir_violation(inst, profile) {
        return Ok(StabilityReport::from_witness(notion, Some(w)));
    }
    for (i, ji, ci) in profile.couples() {
        let Some(row) = inst.game(i, ji).row_of(ci) else { continue };
        let u_i = &ci.u;
        for (iw, j, cj) in profile.couples() {
            if j == ji {
                continue;
            }
            let Some(col) = inst.game(iw, j).col_of(cj) else { continue };
            let v_j = &cj.v;
            let game = inst.game(i, j);
            let improves = |c: &&Contract| c.u > *u_i && c.v > *v_j;
            let found = match variant {
                Variant::Weak => game.cell(row, col).filter(improves).cloned(),
                Variant::Unilateral => {
                    let Some((u, _)) = game.matrices() else { continue };
                    let by_man = (0..u.rows()).filter_map(|s| game.cell(s, col)).find(improves);
                    let by_woman = || (0..u.cols()).filter_map(|t| game.cell(row, t)).find(improves);
                    by_man.or_else(by_woman).cloned()
                }
            };
            if let Some(contract) = found {
                let w = Witness::BlockingPair { man: i, woman: j, contract };
                return Ok(StabilityReport::from_witness(notion, Some(w)));
            }
        }
    }
    Ok(StabilityReport::from_witness(notion, None))
}

/// Every matched couple plays a Nash equilibrium of its game.
pub fn is_nash_stable(inst: &Instance, profile: &MatchingProfile) -> Result<StabilityReport, StabilityError> {
    profile.validate(inst)?;
    for (i, j, c) in profile.couples() {
        for side in [Side::Men, Side::Women] {
            if let Some(d) = inst.game(i, j).profitable_deviations(c, side).into_iter().next() {
                let w = Witness::Deviation { man: i, woman: j, deviator: side, contract: d };
                return Ok(StabilityReport::from_witness(Notion::Nash, Some(w)));
            }
        }
    }
    Ok(StabilityReport::from_witness(Notion::Nash, None))
}

/// First profitable deviation of a couple member that leaves the deviated
/// profile `eps`-externally stable.
pub(crate) fn internal_violation(inst: &Instance, profile: &MatchingProfile, eps: &Rational) -> Option<Witness> {
    for (i, j, c) in profile.couples() {
        for side in [Side::Men, Side::Women] {
            for d in inst.game(i, j).profitable_deviations(c, side) {
                let mut deviated = profile.clone();
                deviated.set_contract(i, d.clone());
                if blocking_pair_unchecked(inst, &deviated, eps).is_none() {
                    return Some(Witness::Deviation { man: i, woman: j, deviator: side, contract: d });
                }
            }
        }
    }
    None
}

/// Internal stability of an `eps`-externally stable profile; the deviated
/// profiles are re-checked with the same margin.
pub fn is_internally_stable(
    inst: &Instance,
    profile: &MatchingProfile,
    eps: &Rational,
) -> Result<StabilityReport, StabilityError> {
    if let Some(w) = find_blocking_pair(inst, profile, eps)? {
        return Err(StabilityError::NotExternallyStable(w));
    }
    Ok(StabilityReport::from_witness(Notion::Internal, internal_violation(inst, profile, eps)))
}

/// Dispatches to the checker for `notion`. `eps` is used by the external and
/// internal notions and ignored otherwise; `ExternalEps` and `External0`
/// both use the given margin.
pub fn check(
    inst: &Instance,
    profile: &MatchingProfile,
    notion: Notion,
    eps: &Rational,
) -> Result<StabilityReport, StabilityError> {
    match notion {
        Notion::IndividualRationality => is_individually_rational(inst, profile),
        Notion::ExternalEps | Notion::External0 => is_externally_stable(inst, profile, eps),
        Notion::Unilateral => is_stable_variant(inst, profile, Variant::Unilateral),
        Notion::Weak => is_stable_variant(inst, profile, Variant::Weak),
        Notion::Nash => is_nash_stable(inst, profile),
        Notion::Internal => is_internally_stable(inst, profile, eps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Game, Matrix};
    use crate::rational::int;

    fn one_couple(u: Matrix, v: Matrix, irp: i64) -> Instance {
        Instance::anonymous(vec![int(irp)], vec![int(irp)], vec![vec![Game::bimatrix(u, v).unwrap()]]).unwrap()
    }

    fn pd() -> (Matrix, Matrix) {
        (Matrix::from_ints(&[[3, 0], [4, 1]]), Matrix::from_ints(&[[3, 4], [0, 1]]))
    }

    #[test]
    fn singles_block_with_mutual_gain() {
        let inst = one_couple(Matrix::from_ints(&[[1]]), Matrix::from_ints(&[[1]]), 0);
        let singles = MatchingProfile::for_instance(&inst);
        let w = find_blocking_pair(&inst, &singles, &int(0)).unwrap();
        assert!(matches!(w, Some(Witness::BlockingPair { man: 0, woman: 0, .. })));
        let matched = MatchingProfile::from_couples(1, 1, [(0, 0, inst.game(0, 0).menu()[0].clone())]);
        assert!(find_blocking_pair(&inst, &matched, &int(0)).unwrap().is_none());
    }

    #[test]
    fn ir_violation_is_reported() {
        let inst = one_couple(Matrix::from_ints(&[[1]]), Matrix::from_ints(&[[5]]), 2);
        let matched = MatchingProfile::from_couples(1, 1, [(0, 0, inst.game(0, 0).menu()[0].clone())]);
        let r = is_externally_stable(&inst, &matched, &int(0)).unwrap();
        assert!(!r.holds);
        assert!(matches!(r.witness, Some(Witness::BelowIrp { side: Side::Men, .. })));
        assert!(find_blocking_pair(&inst, &matched, &int(-1)).is_err());
    }

    #[test]
    fn pd_nash_checks() {
        let (u, v) = pd();
        let inst = one_couple(u, v, -100);
        let g = inst.game(0, 0);
        let dd = MatchingProfile::from_couples(1, 1, [(0, 0, g.cell(1, 1).unwrap().clone())]);
        let cc = MatchingProfile::from_couples(1, 1, [(0, 0, g.cell(0, 0).unwrap().clone())]);
        assert!(is_nash_stable(&inst, &dd).unwrap().holds);
        let r = is_nash_stable(&inst, &cc).unwrap();
        assert!(!r.holds);
        match r.witness.unwrap() {
            Witness::Deviation { contract, .. } => assert!(contract.u == int(4) || contract.v == int(4)),
            w => panic!("unexpected witness {w}"),
        }
    }

    #[test]
    fn pd_cooperation_is_not_internally_stable() {
        let (u, v) = pd();
        let inst = one_couple(u, v, -100);
        let cc = MatchingProfile::from_couples(1, 1, [(0, 0, inst.game(0, 0).cell(0, 0).unwrap().clone())]);
        let r = is_internally_stable(&inst, &cc, &int(0)).unwrap();
        assert!(!r.holds);
        let common = one_couple(Matrix::from_ints(&[[2, 0], [0, 1]]), Matrix::from_ints(&[[2, 0], [0, 1]]), 0);
        let top = MatchingProfile::from_couples(1, 1, [(0, 0, common.game(0, 0).cell(0, 0).unwrap().clone())]);
        assert!(is_internally_stable(&common, &top, &int(0)).unwrap().holds);
        let singles = MatchingProfile::for_instance(&common);
        assert!(matches!(
            is_internally_stable(&common, &singles, &int(0)),
            Err(StabilityError::NotExternallyStable(_))
        ));
    }

    #[test]
    fn weak_and_unilateral_variants() {
        // two couples of the same game; the first plays (0,0) worth 1, the
        // second (1,1) worth 1; crossing strategies gives cell (0,1) worth 5
        let u = Matrix::from_ints(&[[1, 5], [0, 1]]);
        let games = vec![
            vec![Game::bimatrix(u.clone(), u.clone()).unwrap(), Game::bimatrix(u.clone(), u.clone()).unwrap()],
            vec![Game::bimatrix(u.clone(), u.clone()).unwrap(), Game::bimatrix(u.clone(), u).unwrap()],
        ];
        let inst = Instance::anonymous(vec![int(0); 2], vec![int(0); 2], games).unwrap();
        let p = MatchingProfile::from_couples(
            2,
            2,
            [(0, 0, inst.game(0, 0).cell(0, 0).unwrap().clone()), (1, 1, inst.game(1, 1).cell(1, 1).unwrap().clone())],
        );
        let weak = is_stable_variant(&inst, &p, Variant::Weak).unwrap();
        assert!(!weak.holds);
        match weak.witness.unwrap() {
            Witness::BlockingPair { man: 0, woman: 1, contract } => assert_eq!(contract.u, int(5)),
            w => panic!("unexpected witness {w}"),
        }
        assert!(!is_stable_variant(&inst, &p, Variant::Unilateral).unwrap().holds);
        assert!(!is_externally_stable(&inst, &p, &int(0)).unwrap().holds);
    }
}
