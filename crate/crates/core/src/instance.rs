//! Matching-game instances and matching profiles.
//!
//! An [`Instance`] fixes the two sides of the market, everyone's
//! individually rational payoff (the utility of staying single) and one
//! [`Game`] per potential couple. A [`MatchingProfile`] is a partial
//! matching plus one chosen contract per matched couple. Agents are
//! addressed by index; names are kept only for I/O.

use crate::game::{Contract, Game, GameError};
use crate::rational::Rational;
use crate::Side;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("duplicate agent id {0:?}")]
    DuplicateAgent(String),
    #[error("expected {expected} individually rational payoffs for the {side}, found {found}")]
    IrpCount { side: &'static str, expected: usize, found: usize },
    #[error("expected a {men}x{women} table of games, found {rows} rows")]
    GameRows { men: usize, women: usize, rows: usize },
    #[error("man {man} has {found} games, expected {expected}")]
    GameCols { man: usize, found: usize, expected: usize },
}

/// A complete matching game: men, women, IRPs and one game per couple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    men: Vec<String>,
    women: Vec<String>,
    irp_men: Vec<Rational>,
    irp_women: Vec<Rational>,
    games: Vec<Game>,
}

impl Instance {
    pub fn new(
        men: Vec<String>,
        women: Vec<String>,
        irp_men: Vec<Rational>,
        irp_women: Vec<Rational>,
        games: Vec<Vec<Game>>,
    ) -> Result<Self, InstanceError> {
        let mut seen = HashSet::new();
        for name in men.iter().chain(&women) {
            if !seen.insert(name) {
                return Err(InstanceError::DuplicateAgent(name.clone()));
            }
        }
        if irp_men.len() != men.len() {
            return Err(InstanceError::IrpCount { side: "men", expected: men.len(), found: irp_men.len() });
        }
        if irp_women.len() != women.len() {
            return Err(InstanceError::IrpCount { side: "women", expected: women.len(), found: irp_women.len() });
        }
        if games.len() != men.len() {
            return Err(InstanceError::GameRows { men: men.len(), women: women.len(), rows: games.len() });
        }
        for (man, row) in games.iter().enumerate() {
            if row.len() != women.len() {
                return Err(InstanceError::GameCols { man, found: row.len(), expected: women.len() });
            }
        }
        Ok(Self { men, women, irp_men, irp_women, games: games.into_iter().flatten().collect() })
    }

    /// Instance with generated names `m1..`, `w1..`.
    pub fn anonymous(
        irp_men: Vec<Rational>,
        irp_women: Vec<Rational>,
        games: Vec<Vec<Game>>,
    ) -> Result<Self, InstanceError> {
        let men = (1..=irp_men.len()).map(|k| format!("m{k}")).collect();
        let women = (1..=irp_women.len()).map(|k| format!("w{k}")).collect();
        Self::new(men, women, irp_men, irp_women, games)
    }

    /// The same market with new agent names.
    pub fn renamed(&self, men: Vec<String>, women: Vec<String>) -> Result<Self, InstanceError> {
        let games = self.games.chunks(self.women.len().max(1)).map(<[Game]>::to_vec).collect();
        let games = if self.women.is_empty() { vec![Vec::new(); self.men.len()] } else { games };
        Self::new(men, women, self.irp_men.clone(), self.irp_women.clone(), games)
    }

    pub fn n_men(&self) -> usize {
        self.men.len()
    }

    pub fn n_women(&self) -> usize {
        self.women.len()
    }

    pub fn len(&self, side: Side) -> usize {
        match side {
            Side::Men => self.n_men(),
            Side::Women => self.n_women(),
        }
    }

    pub fn men(&self) -> &[String] {
        &self.men
    }

    pub fn women(&self) -> &[String] {
        &self.women
    }

    pub fn name(&self, side: Side, agent: usize) -> &str {
        match side {
            Side::Men => &self.men[agent],
            Side::Women => &self.women[agent],
        }
    }

    pub fn index_of(&self, side: Side, name: &str) -> Option<usize> {
        let names = match side {
            Side::Men => &self.men,
            Side::Women => &self.women,
        };
        names.iter().position(|n| n == name)
    }

    pub fn irp_man(&self, i: usize) -> &Rational {
        &self.irp_men[i]
    }

    pub fn irp_woman(&self, j: usize) -> &Rational {
        &self.irp_women[j]
    }

    pub fn irp(&self, side: Side, agent: usize) -> &Rational {
        match side {
            Side::Men => self.irp_man(agent),
            Side::Women => self.irp_woman(agent),
        }
    }

    pub fn game(&self, man: usize, woman: usize) -> &Game {
        &self.games[man * self.women.len() + woman]
    }

    /// The game of the couple formed by `agent` of `side` and `partner` of
    /// the other side.
    pub fn game_from(&self, side: Side, agent: usize, partner: usize) -> &Game {
        match side {
            Side::Men => self.game(agent, partner),
            Side::Women => self.game(partner, agent),
        }
    }

    pub fn games(&self) -> impl Iterator<Item = (usize, usize, &Game)> {
        let w = self.women.len();
        self.games.iter().enumerate().map(move |(k, g)| (k / w, k % w, g))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("profile has {found} {side} slots, instance has {expected}")]
    Size { side: &'static str, expected: usize, found: usize },
    #[error("man {man} and woman {woman} disagree on their partnership")]
    Inconsistent { man: usize, woman: usize },
    #[error("matched man {0} has no contract")]
    MissingContract(usize),
    #[error("single man {0} carries a contract")]
    StrayContract(usize),
    #[error("contract of couple ({man}, {woman}) is not from their game: {source}")]
    Foreign {
        man: usize,
        woman: usize,
        #[source]
        source: GameError,
    },
}

/// A partial matching with one chosen contract per matched couple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchingProfile {
    partner_of_man: Vec<Option<usize>>,
    partner_of_woman: Vec<Option<usize>>,
    contracts: Vec<Option<Contract>>,
}

impl MatchingProfile {
    /// Everyone single.
    pub fn singles(n_men: usize, n_women: usize) -> Self {
        Self { partner_of_man: vec![None; n_men], partner_of_woman: vec![None; n_women], contracts: vec![None; n_men] }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::singles(inst.n_men(), inst.n_women())
    }

    /// Builds a profile from `(man, woman, contract)` triples.
    pub fn from_couples(
        n_men: usize,
        n_women: usize,
        couples: impl IntoIterator<Item = (usize, usize, Contract)>,
    ) -> Self {
        let mut p = Self::singles(n_men, n_women);
        for (i, j, c) in couples {
            p.match_couple(i, j, c);
        }
        p
    }

    pub fn n_men(&self) -> usize {
        self.partner_of_man.len()
    }

    pub fn n_women(&self) -> usize {
        self.partner_of_woman.len()
    }

    /// Matches `man` and `woman` on `contract`; previous partners of either
    /// become single.
    pub fn match_couple(&mut self, man: usize, woman: usize, contract: Contract) {
        self.unmatch_man(man);
        if let Some(old) = self.partner_of_woman[woman] {
            self.unmatch_man(old);
        }
        self.partner_of_man[man] = Some(woman);
        self.partner_of_woman[woman] = Some(man);
        self.contracts[man] = Some(contract);
    }

    pub fn unmatch_man(&mut self, man: usize) {
        if let Some(j) = self.partner_of_man[man].take() {
            self.partner_of_woman[j] = None;
        }
        self.contracts[man] = None;
    }

    pub fn unmatch_woman(&mut self, woman: usize) {
        if let Some(i) = self.partner_of_woman[woman] {
            self.unmatch_man(i);
        }
    }

    /// Replaces the contract of a matched man's couple.
    pub fn set_contract(&mut self, man: usize, contract: Contract) {
        assert!(self.partner_of_man[man].is_some(), "man {man} is single");
        self.contracts[man] = Some(contract);
    }

    pub fn partner_of_man(&self, man: usize) -> Option<usize> {
        self.partner_of_man[man]
    }

    pub fn partner_of_woman(&self, woman: usize) -> Option<usize> {
        self.partner_of_woman[woman]
    }

    pub fn partner(&self, side: Side, agent: usize) -> Option<usize> {
        match side {
            Side::Men => self.partner_of_man(agent),
            Side::Women => self.partner_of_woman(agent),
        }
    }

    pub fn contract_of_man(&self, man: usize) -> Option<&Contract> {
        self.contracts[man].as_ref()
    }

    pub fn contract_of_woman(&self, woman: usize) -> Option<&Contract> {
        self.partner_of_woman[woman].and_then(|i| self.contract_of_man(i))
    }

    pub fn contract(&self, side: Side, agent: usize) -> Option<&Contract> {
        match side {
            Side::Men => self.contract_of_man(agent),
            Side::Women => self.contract_of_woman(agent),
        }
    }

    /// Matched couples `(man, woman, contract)` in ascending man order.
    pub fn couples(&self) -> impl Iterator<Item = (usize, usize, &Contract)> {
        self.partner_of_man.iter().enumerate().filter_map(move |(i, p)| {
            p.map(|j| (i, j, self.contracts[i].as_ref().expect("matched man has a contract")))
        })
    }

    pub fn matched_count(&self) -> usize {
        self.partner_of_man.iter().flatten().count()
    }

    /// Current payoff of an agent: the contract payoff if matched, the IRP
    /// otherwise.
    pub fn payoff(&self, inst: &Instance, side: Side, agent: usize) -> Rational {
        match self.contract(side, agent) {
            Some(c) => c.own(side).clone(),
            None => inst.irp(side, agent).clone(),
        }
    }

    pub fn payoff_of_man(&self, inst: &Instance, man: usize) -> Rational {
        self.payoff(inst, Side::Men, man)
    }

    pub fn payoff_of_woman(&self, inst: &Instance, woman: usize) -> Rational {
        self.payoff(inst, Side::Women, woman)
    }

    /// Checks that the matching is a partial injection consistent from both
    /// sides and that every contract is re-derivable from its couple's game.
    pub fn validate(&self, inst: &Instance) -> Result<(), ProfileError> {
        if self.n_men() != inst.n_men() || self.contracts.len() != inst.n_men() {
            return Err(ProfileError::Size { side: "men", expected: inst.n_men(), found: self.n_men() });
        }
        if self.n_women() != inst.n_women() {
            return Err(ProfileError::Size { side: "women", expected: inst.n_women(), found: self.n_women() });
        }
        for (i, p) in self.partner_of_man.iter().enumerate() {
            match (p, &self.contracts[i]) {
                (Some(j), Some(c)) => {
                    if *j >= self.n_women() || self.partner_of_woman[*j] != Some(i) {
                        return Err(ProfileError::Inconsistent { man: i, woman: *j });
                    }
                    inst.game(i, *j).payoff(c).map_err(|source| ProfileError::Foreign { man: i, woman: *j, source })?;
                }
                (Some(_), None) => return Err(ProfileError::MissingContract(i)),
                (None, Some(_)) => return Err(ProfileError::StrayContract(i)),
                (None, None) => {}
            }
        }
        for (j, p) in self.partner_of_woman.iter().enumerate() {
            if let Some(i) = p {
                if *i >= self.n_men() || self.partner_of_man[*i] != Some(j) {
                    return Err(ProfileError::Inconsistent { man: *i, woman: j });
                }
            }
        }
        Ok(())
    }

    /// Same partners everywhere and same payoffs on every couple.
    pub fn same_outcome(&self, other: &MatchingProfile) -> bool {
        self.partner_of_man == other.partner_of_man
            && self.contracts.iter().zip(&other.contracts).all(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => a.same_payoffs(b),
                (None, None) => true,
                _ => false,
            })
    }
}
