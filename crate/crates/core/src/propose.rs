//! The propose–dispose market.
//!
//! Proposers (men by default) repeatedly offer their best *attractive*
//! contract — one raising the receiver's payoff by at least ε — to the
//! receiver they like most, or walk away single. When a matched receiver is
//! proposed to, the proposer and her current partner compete: each bids the
//! most he is willing to give her without preferring his second-best option,
//! the higher bid wins (the incumbent on a draw), and the winner settles at
//! the loser's bid, as in a second-price auction. Every proposal to a
//! receiver raises her payoff by at least ε, which bounds the run.

use crate::game::{Contract, Game};
use crate::instance::{Instance, MatchingProfile};
use crate::rational::{ceil_int, Rational};
use crate::stability::{find_blocking_pair, StabilityError, Witness};
use crate::Side;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProposeError {
    #[error("the attractiveness margin must be positive, got {0}")]
    NonPositiveEps(Rational),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// Best proposal of one agent: the receiver (`None` for staying single),
/// the contract, and the proposer's payoff from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProposalSolution {
    pub target: Option<usize>,
    pub contract: Option<Contract>,
    pub objective: Rational,
}

/// Read-only view of an instance from the proposing side.
#[derive(Clone, Copy)]
struct View<'a> {
    inst: &'a Instance,
    side: Side,
}

impl<'a> View<'a> {
    fn proposers(&self) -> usize {
        self.inst.len(self.side)
    }

    fn receivers(&self) -> usize {
        self.inst.len(self.side.other())
    }

    fn game(&self, p: usize, r: usize) -> &'a Game {
        self.inst.game_from(self.side, p, r)
    }

    fn irp_proposer(&self, p: usize) -> &'a Rational {
        self.inst.irp(self.side, p)
    }

    fn irp_receiver(&self, r: usize) -> &'a Rational {
        self.inst.irp(self.side.other(), r)
    }

    fn own<'c>(&self, c: &'c Contract) -> &'c Rational {
        c.own(self.side)
    }

    fn other<'c>(&self, c: &'c Contract) -> &'c Rational {
        c.other(self.side)
    }

    /// Best contract for the proposer with receiver `r` giving her at least
    /// `floor`; ties to the lowest id.
    fn best_with(&self, p: usize, r: usize, floor: &Rational) -> Option<&'a Contract> {
        let mut best: Option<&Contract> = None;
        for c in self.game(p, r).menu() {
            if self.other(c) >= floor && best.is_none_or(|b| self.own(c) > self.own(b)) {
                best = Some(c);
            }
        }
        best
    }

    fn solve_p(&self, p: usize, payoffs: &[Rational], eps: &Rational, excluded: Option<usize>) -> ProposalSolution {
        let mut best: Option<(usize, &Contract)> = None;
        for (r, v) in payoffs.iter().enumerate() {
            if Some(r) == excluded {
                continue;
            }
            if let Some(c) = self.best_with(p, r, &(v + eps)) {
                if best.is_none_or(|(_, b)| self.own(c) > self.own(b)) {
                    best = Some((r, c));
                }
            }
        }
        let single = self.irp_proposer(p);
        match best {
            Some((r, c)) if self.own(c) >= single => {
                ProposalSolution { target: Some(r), contract: Some(c.clone()), objective: self.own(c).clone() }
            }
            _ => ProposalSolution { target: None, contract: None, objective: single.clone() },
        }
    }

    fn pmax(&self, p: usize, r: usize, beta: &Rational) -> Option<Rational> {
        pmax_in(self.game(p, r), self.side, beta)
    }

    fn pnew(&self, p: usize, r: usize, lambda: &Rational) -> Option<&'a Contract> {
        self.best_with(p, r, lambda)
    }
}

/// Best proposal of `agent` (of the proposing `side`) given the receivers'
/// current payoffs: maximize own payoff over every receiver's menu subject to
/// giving her at least her payoff plus `eps`, or stay single. Ties go to the
/// lowest receiver index, then lowest contract id; staying single is chosen
/// only when strictly better. `excluded` removes one receiver from the scan.
pub fn solve_pi(
    inst: &Instance,
    side: Side,
    agent: usize,
    receiver_payoffs: &[Rational],
    eps: &Rational,
    excluded: Option<usize>,
) -> ProposalSolution {
    View { inst, side }.solve_p(agent, receiver_payoffs, eps, excluded)
}

/// Largest payoff the proposer can give in `game` while keeping at least
/// `beta` for himself; `None` when no contract reaches `beta`.
pub fn pmax_in(game: &Game, side: Side, beta: &Rational) -> Option<Rational> {
    game.menu().iter().filter(|c| c.own(side) >= beta).map(|c| c.other(side).clone()).max()
}

/// The most man `i` is willing to offer woman `j` while keeping at least
/// `beta`; `None` stands for minus infinity (he forfeits).
pub fn solve_pmax(inst: &Instance, i: usize, j: usize, beta: &Rational) -> Option<Rational> {
    pmax_in(inst.game(i, j), Side::Men, beta)
}

/// The man's best contract with woman `j` that gives her at least `lambda`;
/// ties to the lowest id.
pub fn solve_pnew(inst: &Instance, i: usize, j: usize, lambda: &Rational) -> Option<Contract> {
    View { inst, side: Side::Men }.pnew(i, j, lambda).cloned()
}

/// How a proposal to a receiver was settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// She was single and accepted.
    Accepted,
    /// Her partner no longer wanted her at the raised price; the proposer
    /// takes her with his proposed contract.
    AutoReplaced,
    /// The proposer outbid her partner.
    Replaced,
    /// Her partner outbid (or tied) the proposer.
    Rejected,
}

impl Outcome {
    fn name(self) -> &'static str {
        match self {
            Outcome::Accepted => "accepted",
            Outcome::AutoReplaced => "auto-replaced",
            Outcome::Replaced => "replaced",
            Outcome::Rejected => "rejected",
        }
    }
}

/// One line of the market trace. Agent indices are relative to the
/// proposing side (`proposer`, `winner`, `loser`) and the receiving side
/// (`receiver`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    /// A proposer walked away single.
    Single { step: usize, proposer: usize, objective: Rational },
    /// A proposal to a receiver and how it was settled.
    Proposal {
        step: usize,
        proposer: usize,
        receiver: usize,
        outcome: Outcome,
        /// Bid of the proposer (`None` = forfeit); absent without competition.
        lambda_proposer: Option<Option<Rational>>,
        /// Bid of the incumbent; absent without competition.
        lambda_incumbent: Option<Option<Rational>>,
        winner: usize,
        loser: Option<usize>,
        contract: Contract,
        before: Rational,
        after: Rational,
    },
}

impl Event {
    pub fn step(&self) -> usize {
        match self {
            Event::Single { step, .. } | Event::Proposal { step, .. } => *step,
        }
    }
}

fn bid(b: &Option<Option<Rational>>) -> String {
    match b {
        None => "-".into(),
        Some(None) => "-inf".into(),
        Some(Some(x)) => x.to_string(),
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Single { step, proposer, objective } => {
                write!(f, "step={step} event=single proposer={proposer} payoff={objective}")
            }
            Event::Proposal {
                step,
                proposer,
                receiver,
                outcome,
                lambda_proposer,
                lambda_incumbent,
                winner,
                loser,
                contract,
                before,
                after,
            } => {
                let loser = loser.map_or("-".to_string(), |l| l.to_string());
                write!(
                    f,
                    "step={step} event=proposal proposer={proposer} receiver={receiver} outcome={} \
                     lambda_proposer={} lambda_incumbent={} winner={winner} loser={loser} \
                     contract={} u={} v={} receiver_before={before} receiver_after={after}",
                    outcome.name(),
                    bid(lambda_proposer),
                    bid(lambda_incumbent),
                    contract.id,
                    contract.u,
                    contract.v,
                )
            }
        }
    }
}

/// Final state of a market run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketState {
    pub side: Side,
    pub eps: Rational,
    /// Final payoff of every receiver.
    pub receiver_payoffs: Vec<Rational>,
    pub trace: Vec<Event>,
}

impl MarketState {
    /// Number of proposals, including walking away single.
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Line-oriented trace, one event per line.
    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|e| format!("{e}\n")).collect()
    }
}

/// Upper bound on the number of proposals: every proposal to a receiver
/// raises her payoff by at least ε up to the largest payoff any menu offers
/// her, and each proposer walks away single at most once.
pub fn iteration_bound(inst: &Instance, side: Side, eps: &Rational) -> BigInt {
    let view = View { inst, side };
    let mut total = Rational::zero();
    for r in 0..view.receivers() {
        let top = (0..view.proposers())
            .flat_map(|p| view.game(p, r).menu().iter().map(|c| view.other(c)))
            .max()
            .expect("menus are nonempty");
        let room = top - view.irp_receiver(r);
        if room.is_positive() {
            total += room;
        }
    }
    ceil_int(&(total / eps)) + BigInt::from(view.proposers())
}

/// Runs the propose–dispose market with margin `eps > 0`. `side` proposes;
/// with `Side::Women` the roles of the two sides are exchanged.
pub fn run_propose_dispose(
    inst: &Instance,
    eps: &Rational,
    side: Side,
) -> Result<(MatchingProfile, MarketState), ProposeError> {
    if !eps.is_positive() {
        return Err(ProposeError::NonPositiveEps(eps.clone()));
    }
    let view = View { inst, side };
    let bound = iteration_bound(inst, side, eps).to_usize().unwrap_or(usize::MAX);
    let mut payoffs: Vec<Rational> = (0..view.receivers()).map(|r| view.irp_receiver(r).clone()).collect();
    let mut partner: Vec<Option<usize>> = vec![None; view.receivers()];
    let mut held: Vec<Option<(usize, Contract)>> = vec![None; view.proposers()];
    let mut queue: VecDeque<usize> = (0..view.proposers()).collect();
    let mut trace = Vec::new();

    while let Some(p) = queue.pop_front() {
        let step = trace.len();
        if step >= bound {
            return Err(ProposeError::Invariant(format!("iteration bound {bound} exceeded")));
        }
        let sol = view.solve_p(p, &payoffs, eps, None);
        let (Some(r), Some(offer)) = (sol.target, sol.contract) else {
            trace.push(Event::Single { step, proposer: p, objective: sol.objective });
            continue;
        };
        let before = payoffs[r].clone();
        let floor = &before + eps;
        let Some(inc) = partner[r] else {
            payoffs[r] = view.other(&offer).clone();
            trace.push(Event::Proposal {
                step,
                proposer: p,
                receiver: r,
                outcome: Outcome::Accepted,
                lambda_proposer: None,
                lambda_incumbent: None,
                winner: p,
                loser: None,
                after: payoffs[r].clone(),
                contract: offer.clone(),
                before,
            });
            partner[r] = Some(p);
            held[p] = Some((r, offer));
            continue;
        };

        // would the incumbent still pick her at the raised price?
        let beta_inc = view.solve_p(inc, &payoffs, eps, Some(r)).objective;
        let keeps = view.best_with(inc, r, &floor).is_some_and(|c| *view.own(c) >= beta_inc);
        if !keeps {
            payoffs[r] = view.other(&offer).clone();
            trace.push(Event::Proposal {
                step,
                proposer: p,
                receiver: r,
                outcome: Outcome::AutoReplaced,
                lambda_proposer: None,
                lambda_incumbent: None,
                winner: p,
                loser: Some(inc),
                after: payoffs[r].clone(),
                contract: offer.clone(),
                before,
            });
            held[inc] = None;
            partner[r] = Some(p);
            held[p] = Some((r, offer));
            queue.push_front(inc);
            continue;
        }

        let beta_p = view.solve_p(p, &payoffs, eps, Some(r)).objective;
        let lambda_p = view.pmax(p, r, &beta_p);
        let lambda_inc = view.pmax(inc, r, &beta_inc);
        let proposer_wins = lambda_p > lambda_inc;
        let (winner, loser, loser_bid) =
            if proposer_wins { (p, inc, lambda_inc.clone()) } else { (inc, p, lambda_p.clone()) };
        // both bids reach the attractive floor, so the settlement floor is
        // the loser's bid; the floor guards against a forfeit
        let settle_floor = loser_bid.map_or(floor.clone(), |l| l.max(floor.clone()));
        let contract = view.pnew(winner, r, &settle_floor).cloned().ok_or_else(|| {
            ProposeError::Invariant(format!(
                "winner {winner} has no contract with receiver {r} worth at least {settle_floor}"
            ))
        })?;
        payoffs[r] = view.other(&contract).clone();
        trace.push(Event::Proposal {
            step,
            proposer: p,
            receiver: r,
            outcome: if proposer_wins { Outcome::Replaced } else { Outcome::Rejected },
            lambda_proposer: Some(lambda_p),
            lambda_incumbent: Some(lambda_inc),
            winner,
            loser: Some(loser),
            after: payoffs[r].clone(),
            contract: contract.clone(),
            before,
        });
        held[loser] = None;
        partner[r] = Some(winner);
        held[winner] = Some((r, contract));
        queue.push_front(loser);
    }

    let mut profile = MatchingProfile::for_instance(inst);
    for (p, h) in held.into_iter().enumerate() {
        if let Some((r, c)) = h {
            match side {
                Side::Men => profile.match_couple(p, r, c),
                Side::Women => profile.match_couple(r, p, c),
            }
        }
    }
    let state = MarketState { side, eps: eps.clone(), receiver_payoffs: payoffs, trace };
    Ok((profile, state))
}

/// Result of driving the margin toward zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitReport {
    pub profile: MatchingProfile,
    /// Margin of the last run.
    pub eps: Rational,
    /// Number of runs performed.
    pub rounds: usize,
    /// Whether two successive runs agreed on matching and contracts.
    pub settled: bool,
    /// Blocking witness at margin zero, if the final profile has one.
    pub blocking_at_zero: Option<Witness>,
}

/// Runs the market with ε = 1, 1/2, 1/4, … until two successive runs return
/// the same matching and contracts (or `max_rounds` runs were made) and
/// reports the exact zero-margin verdict of the last profile. The exact
/// limit object need not be reachable on finite menus; the report says
/// whether the last profile is in fact 0-externally stable.
pub fn run_epsilon_limit(inst: &Instance, side: Side, max_rounds: usize) -> Result<LimitReport, ProposeError> {
    let mut eps = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    let mut last: Option<MatchingProfile> = None;
    let mut rounds = 0;
    let mut settled = false;
    loop {
        let (profile, _) = run_propose_dispose(inst, &eps, side)?;
        rounds += 1;
        if last.as_ref() == Some(&profile) {
            settled = true;
        }
        last = Some(profile);
        if settled || rounds >= max_rounds.max(1) {
            break;
        }
        eps = &eps / &two;
    }
    let profile = last.expect("at least one round");
    let blocking_at_zero = find_blocking_pair(inst, &profile, &Rational::zero())?;
    Ok(LimitReport { profile, eps, rounds, settled, blocking_at_zero })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Matrix;
    use crate::piecewise::PiecewiseLinear;
    use crate::rational::int;
    use crate::stability::is_externally_stable;

    fn cells(pairs: &[(i64, i64)]) -> Game {
        let u = Matrix::new(vec![pairs.iter().map(|p| int(p.0)).collect()]).unwrap();
        let v = Matrix::new(vec![pairs.iter().map(|p| int(p.1)).collect()]).unwrap();
        Game::bimatrix(u, v).unwrap()
    }

    fn shubik_transfer() -> Game {
        let f_u = PiecewiseLinear::affine(int(1), int(-2)).unwrap();
        let f_v = PiecewiseLinear::affine(int(1), int(6)).unwrap();
        Game::transfer(int(0), int(6), int(1), f_u, f_v).unwrap()
    }

    #[test]
    fn p_i_examples() {
        let inst = Instance::anonymous(vec![int(0)], vec![int(0)], vec![vec![cells(&[(5, 5)])]]).unwrap();
        let s = solve_pi(&inst, Side::Men, 0, &[int(0)], &int(1), None);
        assert_eq!((s.target, s.objective), (Some(0), int(5)));
        let s = solve_pi(&inst, Side::Men, 0, &[int(5)], &int(1), None);
        assert_eq!((s.target, s.objective.clone()), (None, int(0)));
        assert!(s.contract.is_none());
    }

    #[test]
    fn pmax_and_pnew_examples() {
        let inst = Instance::anonymous(
            vec![int(0)],
            vec![int(0), int(0)],
            vec![vec![cells(&[(3, 1), (2, 4), (0, 9)]), shubik_transfer()]],
        )
        .unwrap();
        assert_eq!(solve_pmax(&inst, 0, 0, &int(2)), Some(int(4)));
        assert_eq!(solve_pmax(&inst, 0, 0, &int(5)), None);
        assert_eq!(solve_pmax(&inst, 0, 1, &int(0)), Some(int(4)));
        let c = solve_pnew(&inst, 0, 0, &int(2)).unwrap();
        assert_eq!((c.u, c.v), (int(2), int(4)));
        let c = solve_pnew(&inst, 0, 1, &int(3)).unwrap();
        assert_eq!((c.u, c.v), (int(1), int(3)));
        let single = Instance::anonymous(vec![int(0)], vec![int(0)], vec![vec![cells(&[(5, 5)])]]).unwrap();
        let c = solve_pnew(&single, 0, 0, &int(5)).unwrap();
        assert_eq!((c.u, c.v), (int(5), int(5)));
    }

    #[test]
    fn dominated_menus_leave_everyone_single() {
        let inst = Instance::anonymous(
            vec![int(10); 2],
            vec![int(0); 2],
            vec![vec![cells(&[(1, 1)]), cells(&[(2, 2)])], vec![cells(&[(3, 3)]), cells(&[(4, 4)])]],
        )
        .unwrap();
        let (p, state) = run_propose_dispose(&inst, &int(1), Side::Men).unwrap();
        assert_eq!(p.matched_count(), 0);
        assert!(state.trace.iter().all(|e| matches!(e, Event::Single { .. })));
    }

    #[test]
    fn competition_settles_at_second_price() {
        // two men want the same woman; man 1 values her more
        let inst = Instance::anonymous(
            vec![int(0); 2],
            vec![int(0)],
            vec![vec![cells(&[(4, 1), (3, 2), (2, 3), (1, 4)])], vec![cells(&[(6, 1), (5, 3), (4, 5), (3, 6)])]],
        )
        .unwrap();
        let (p, state) = run_propose_dispose(&inst, &int(1), Side::Men).unwrap();
        assert_eq!(p.partner_of_man(1), Some(0));
        // man 0 bids up to 4; man 1 settles on the first contract giving >= 4
        assert_eq!(p.contract_of_man(1).unwrap().v, int(5));
        assert!(is_externally_stable(&inst, &p, &int(1)).unwrap().holds);
        assert!(state.trace_text().contains("outcome=replaced"));
        assert!(state.iterations() <= iteration_bound(&inst, Side::Men, &int(1)).to_usize().unwrap());
    }

    #[test]
    fn women_side_mirrors() {
        let inst = Instance::anonymous(vec![int(0)], vec![int(0)], vec![vec![shubik_transfer()]]).unwrap();
        let (p, _) = run_propose_dispose(&inst, &int(1), Side::Women).unwrap();
        let c = p.contract_of_man(0).unwrap();
        // the buyer pushes the price down to the lowest one that still
        // leaves the seller an improvement of at least 1
        assert_eq!((c.u.clone(), c.v.clone()), (int(1), int(3)));
        let (p, _) = run_propose_dispose(&inst, &int(1), Side::Men).unwrap();
        let c = p.contract_of_man(0).unwrap();
        assert_eq!((c.u.clone(), c.v.clone()), (int(3), int(1)));
    }

    #[test]
    fn rejects_nonpositive_eps() {
        let inst = Instance::anonymous(vec![int(0)], vec![int(0)], vec![vec![cells(&[(1, 1)])]]).unwrap();
        assert!(matches!(run_propose_dispose(&inst, &int(0), Side::Men), Err(ProposeError::NonPositiveEps(_))));
    }

    #[test]
    fn epsilon_limit_settles_on_integer_menus() {
        let inst = Instance::anonymous(vec![int(0)], vec![int(0)], vec![vec![cells(&[(1, 1), (2, 0)])]]).unwrap();
        let report = run_epsilon_limit(&inst, Side::Men, 10).unwrap();
        assert!(report.settled);
        assert!(report.blocking_at_zero.is_none());
    }
}
