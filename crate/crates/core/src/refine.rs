//! Constrained-Nash refinement of an externally stable profile.
//!
//! Couples are visited in ascending man order, pass after pass. A couple
//! whose contract is already a constrained Nash equilibrium for its current
//! outside options is left alone; otherwise it switches to a feasible Nash
//! equilibrium when one exists (and then keeps it for good), or to the CNE
//! chosen by the policy of its game class. Each replacement preserves
//! external stability; a pass without replacements means every couple plays
//! a CNE, i.e. the profile is also internally stable.

use crate::cne::{effective_outside_options, feasible_nash, is_cne, solve_cne, CneError, CnePolicy, OutsideOptions};
use crate::game::{Contract, GameClass};
use crate::instance::{Instance, MatchingProfile};
use crate::rational::Rational;
use crate::stability::{find_blocking_pair, StabilityError, Witness};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("refinement needs an externally stable profile ({0})")]
    NotExternallyStable(Witness),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("replacement in couple ({man}, {woman}) broke external stability ({witness})")]
    Invariant { man: usize, woman: usize, witness: Witness },
}

/// CNE policy per game class; classes without an entry use
/// [`CnePolicy::Any`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyTable {
    by_class: BTreeMap<GameClass, CnePolicy>,
}

impl PolicyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Uses `policy` for every class it applies to.
    pub fn uniform(policy: CnePolicy) -> Self {
        let classes = [
            GameClass::FiniteBimatrix,
            GameClass::ZeroSum,
            GameClass::StrictlyCompetitive,
            GameClass::Potential,
            GameClass::Transfer,
            GameClass::RepeatedStage,
        ];
        let by_class = classes.into_iter().filter(|c| policy.applies_to(*c)).map(|c| (c, policy)).collect();
        Self { by_class }
    }

    pub fn with(mut self, class: GameClass, policy: CnePolicy) -> Self {
        self.by_class.insert(class, policy);
        self
    }

    pub fn get(&self, class: GameClass) -> CnePolicy {
        self.by_class.get(&class).copied().unwrap_or(CnePolicy::Any)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefineStatus {
    /// A full pass changed nothing.
    Converged,
    /// The pass limit was reached first.
    PassLimit,
    /// A couple's game has no CNE for its outside options.
    Infeasible { man: usize, woman: usize, error: CneError },
}

impl RefineStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RefineStatus::Converged => "Converged",
            RefineStatus::PassLimit => "PassLimit",
            RefineStatus::Infeasible { .. } => "Infeasible",
        }
    }
}

/// One contract replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub pass: usize,
    pub man: usize,
    pub woman: usize,
    pub options: OutsideOptions,
    pub old: Contract,
    pub new: Contract,
    /// The new contract is a Nash equilibrium; the couple is frozen.
    pub nash: bool,
}

impl fmt::Display for Replacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pass={} event=replace man={} woman={} u0={} v0={} old={} old_u={} old_v={} new={} new_u={} new_v={} nash={}",
            self.pass,
            self.man,
            self.woman,
            self.options.u0,
            self.options.v0,
            self.old.id,
            self.old.u,
            self.old.v,
            self.new.id,
            self.new.u,
            self.new.v,
            self.nash
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefineOutcome {
    pub profile: MatchingProfile,
    pub status: RefineStatus,
    /// Passes performed, including the final unchanged one.
    pub passes: usize,
    pub trace: Vec<Replacement>,
}

impl RefineOutcome {
    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|r| format!("{r}\n")).collect()
    }
}

/// Default pass limit: ten times the largest couple menu times the number of
/// couples.
pub fn default_max_passes(inst: &Instance, profile: &MatchingProfile) -> usize {
    let menu = profile.couples().map(|(i, j, _)| inst.game(i, j).menu().len()).max().unwrap_or(1);
    (10 * menu * profile.matched_count()).max(1)
}

/// Refines an `eps`-externally stable profile into one whose couples all
/// play constrained Nash equilibria.
pub fn refine(
    inst: &Instance,
    profile: &MatchingProfile,
    eps: &Rational,
    policies: &PolicyTable,
    max_passes: Option<usize>,
) -> Result<RefineOutcome, RefineError> {
    if let Some(w) = find_blocking_pair(inst, profile, eps)? {
        return Err(RefineError::NotExternallyStable(w));
    }
    let max_passes = max_passes.unwrap_or_else(|| default_max_passes(inst, profile));
    let mut current = profile.clone();
    let mut frozen: HashSet<usize> = HashSet::new();
    let mut trace = Vec::new();
    let couples: Vec<(usize, usize)> = current.couples().map(|(i, j, _)| (i, j)).collect();

    for pass in 1..=max_passes {
        let mut changed = false;
        for &(i, j) in &couples {
            if frozen.contains(&i) {
                continue;
            }
            let game = inst.game(i, j);
            let old = current.contract_of_man(i).expect("couple stays matched").clone();
            let options = effective_outside_options(inst, &current, i, j, eps);
            if is_cne(game, &old, &options) {
                continue;
            }
            let (new, nash) = match feasible_nash(game, &options) {
                Some(ne) => (ne, true),
                None => match solve_cne(game, &options, policies.get(game.class())) {
                    Ok(c) => (c, false),
                    Err(error) => {
                        let status = RefineStatus::Infeasible { man: i, woman: j, error };
                        return Ok(RefineOutcome { profile: current, status, passes: pass, trace });
                    }
                },
            };
            if nash {
                frozen.insert(i);
            }
            current.set_contract(i, new.clone());
            if let Some(witness) = find_blocking_pair(inst, &current, eps)? {
                return Err(RefineError::Invariant { man: i, woman: j, witness });
            }
            trace.push(Replacement { pass, man: i, woman: j, options, old, new, nash });
            changed = true;
        }
        if !changed {
            return Ok(RefineOutcome { profile: current, status: RefineStatus::Converged, passes: pass, trace });
        }
    }
    Ok(RefineOutcome { profile: current, status: RefineStatus::PassLimit, passes: max_passes, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Game, Matrix};
    use crate::propose::run_propose_dispose;
    use crate::rational::int;
    use crate::stability::{is_externally_stable, is_internally_stable};
    use crate::Side;

    fn pd_instance() -> Instance {
        let g = || Game::bimatrix(Matrix::from_ints(&[[3, 0], [4, 1]]), Matrix::from_ints(&[[3, 4], [0, 1]])).unwrap();
        Instance::anonymous(vec![int(0); 2], vec![int(0); 2], vec![vec![g(), g()], vec![g(), g()]]).unwrap()
    }

    #[test]
    fn common_interest_is_already_refined() {
        let ci = Matrix::from_ints(&[[2, 0], [0, 1]]);
        let g = || Game::bimatrix(ci.clone(), ci.clone()).unwrap();
        let inst = Instance::anonymous(vec![int(0); 2], vec![int(0); 2], vec![vec![g(), g()], vec![g(), g()]]).unwrap();
        let (p, _) = run_propose_dispose(&inst, &int(1), Side::Men).unwrap();
        let out = refine(&inst, &p, &int(1), &PolicyTable::new(), None).unwrap();
        assert_eq!(out.status, RefineStatus::Converged);
        assert_eq!(out.passes, 1);
        assert_eq!(out.profile, p);
    }

    #[test]
    fn refined_pd_market_is_internally_stable() {
        let inst = pd_instance();
        let eps = int(1);
        let (p, _) = run_propose_dispose(&inst, &eps, Side::Men).unwrap();
        let out = refine(&inst, &p, &eps, &PolicyTable::new(), None).unwrap();
        assert_eq!(out.status, RefineStatus::Converged);
        assert!(is_externally_stable(&inst, &out.profile, &eps).unwrap().holds);
        assert!(is_internally_stable(&inst, &out.profile, &eps).unwrap().holds);
        // idempotent
        let again = refine(&inst, &out.profile, &eps, &PolicyTable::new(), None).unwrap();
        assert_eq!(again.passes, 1);
        assert!(again.trace.is_empty());
    }

    #[test]
    fn unstable_input_is_rejected() {
        let inst = pd_instance();
        let singles = MatchingProfile::for_instance(&inst);
        assert!(matches!(
            refine(&inst, &singles, &int(0), &PolicyTable::new(), None),
            Err(RefineError::NotExternallyStable(_))
        ));
    }

    #[test]
    fn policy_table_defaults() {
        let t = PolicyTable::uniform(CnePolicy::MaxPotential);
        assert_eq!(t.get(GameClass::Potential), CnePolicy::MaxPotential);
        assert_eq!(t.get(GameClass::ZeroSum), CnePolicy::Any);
    }
}
