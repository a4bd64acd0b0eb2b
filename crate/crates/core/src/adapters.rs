//! Classical two-sided models as matching games.
//!
//! * **Ordinal** (stable marriage): a partner ranked k-th out of n pays
//!   `n + 1 - k`, so every partner beats staying single (payoff 0).
//! * **Shapley–Shubik** (assignment game): seller i with cost `c_i` and
//!   buyer j with valuation `h_ij` trade at a price p, giving `p - c_i` and
//!   `h_ij - p`.
//! * **Gale–Demange**: the same with increasing piecewise-linear utilities
//!   of the net transfer.
//! * **Contracts** (one-to-one Hatfield–Milgrom): every couple's game has the
//!   whole contract set as strategies for both partners; naming the same
//!   contract that relates them pays its preference weight, anything else
//!   pays −1.

use crate::game::{Game, GameError, Matrix, Play};
use crate::instance::{Instance, InstanceError, MatchingProfile};
use crate::piecewise::{PiecewiseError, PiecewiseLinear};
use crate::rational::{int, rat, Rational};
use num_traits::{One, Zero};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdapterError {
    #[error("preference list of {side} {agent} must rank each of the {expected} partners exactly once")]
    NotAPermutation { side: &'static str, agent: usize, expected: usize },
    #[error("expected {expected} {what}, found {found}")]
    Shape { what: &'static str, expected: usize, found: usize },
    #[error("contract {contract:?} relates {agent:?}, who is not a {role}")]
    WrongSide { contract: String, agent: String, role: &'static str },
    #[error("unknown agent {0:?}")]
    UnknownAgent(String),
    #[error("unknown or duplicate contract {contract:?} in the preferences of {agent:?}")]
    BadPreference { contract: String, agent: String },
    #[error("contract {contract:?} ranked by {agent:?} does not involve them")]
    NotInvolved { contract: String, agent: String },
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn check_permutation(lists: &[Vec<usize>], expected: usize, side: &'static str) -> Result<(), AdapterError> {
    for (agent, list) in lists.iter().enumerate() {
        let distinct: HashSet<_> = list.iter().collect();
        if list.len() != expected || distinct.len() != expected || list.iter().any(|&p| p >= expected) {
            return Err(AdapterError::NotAPermutation { side, agent, expected });
        }
    }
    Ok(())
}

/// Stable-marriage preferences (each list best first, by partner index) as
/// 1×1 games; IRPs are 0.
pub fn from_ordinal(prefs_men: &[Vec<usize>], prefs_women: &[Vec<usize>]) -> Result<Instance, AdapterError> {
    let (n_m, n_w) = (prefs_men.len(), prefs_women.len());
    check_permutation(prefs_men, n_w, "man")?;
    check_permutation(prefs_women, n_m, "woman")?;
    let score = |list: &[usize], partner: usize| -> i64 {
        let rank = list.iter().position(|&p| p == partner).expect("complete list");
        (list.len() - rank) as i64
    };
    let mut games = Vec::with_capacity(n_m);
    for (i, list) in prefs_men.iter().enumerate() {
        let mut row = Vec::with_capacity(n_w);
        for (j, her_list) in prefs_women.iter().enumerate() {
            let u = Matrix::from_ints(&[[score(list, j)]]);
            let v = Matrix::from_ints(&[[score(her_list, i)]]);
            row.push(Game::bimatrix(u, v)?);
        }
        games.push(row);
    }
    Ok(Instance::anonymous(vec![int(0); n_m], vec![int(0); n_w], games)?)
}

/// Grid `lo, lo + step, ..., hi` of prices or net transfers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferGrid {
    pub lo: Rational,
    pub hi: Rational,
    pub step: Rational,
}

/// Assignment game: men are sellers with `costs`, women buyers with
/// `valuations[i][j]` for seller i's good; IRPs are 0.
pub fn from_shapley_shubik(
    costs: &[Rational],
    valuations: &[Vec<Rational>],
    grid: &TransferGrid,
) -> Result<Instance, AdapterError> {
    if valuations.len() != costs.len() {
        return Err(AdapterError::Shape { what: "valuation rows", expected: costs.len(), found: valuations.len() });
    }
    let n_w = valuations.first().map_or(0, Vec::len);
    let mut f_maps = Vec::with_capacity(costs.len());
    let mut h_maps = Vec::with_capacity(costs.len());
    for (c, row) in costs.iter().zip(valuations) {
        if row.len() != n_w {
            return Err(AdapterError::Shape { what: "valuations per row", expected: n_w, found: row.len() });
        }
        f_maps.push(vec![PiecewiseLinear::affine(Rational::one(), -c.clone())?; n_w]);
        h_maps.push(
            row.iter().map(|h| PiecewiseLinear::affine(Rational::one(), h.clone())).collect::<Result<Vec<_>, _>>()?,
        );
    }
    from_gale_demange(&f_maps, &h_maps, grid)
}

/// Couples bargain over a net transfer t from the woman to the man:
/// `u = f[i][j](t)`, `v = h[i][j](-t)`; IRPs are 0.
pub fn from_gale_demange(
    f_maps: &[Vec<PiecewiseLinear>],
    h_maps: &[Vec<PiecewiseLinear>],
    grid: &TransferGrid,
) -> Result<Instance, AdapterError> {
    if h_maps.len() != f_maps.len() {
        return Err(AdapterError::Shape { what: "rows of woman maps", expected: f_maps.len(), found: h_maps.len() });
    }
    let n_w = f_maps.first().map_or(0, Vec::len);
    let mut games = Vec::with_capacity(f_maps.len());
    for (fs, hs) in f_maps.iter().zip(h_maps) {
        if fs.len() != n_w || hs.len() != n_w {
            return Err(AdapterError::Shape { what: "maps per row", expected: n_w, found: fs.len().min(hs.len()) });
        }
        let row = fs
            .iter()
            .zip(hs)
            .map(|(f, h)| Game::transfer(grid.lo.clone(), grid.hi.clone(), grid.step.clone(), f.clone(), h.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        games.push(row);
    }
    Ok(Instance::anonymous(vec![Rational::zero(); f_maps.len()], vec![Rational::zero(); n_w], games)?)
}

/// One contract of a one-to-one contracts model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedContract {
    pub name: String,
    pub man: String,
    pub woman: String,
}

/// One-to-one contracts model. Each agent ranks the contracts they find
/// acceptable, best first; unlisted contracts are worse than no contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractsModel {
    pub men: Vec<String>,
    pub women: Vec<String>,
    pub contracts: Vec<NamedContract>,
    pub prefs: Vec<(String, Vec<String>)>,
}

/// Resolved contracts model: indices instead of names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractsMarket {
    pub model: ContractsModel,
    /// (man, woman) of each contract.
    pub relates: Vec<(usize, usize)>,
    /// Weight of each contract for its man and its woman: the number of
    /// acceptable contracts ranked below it plus one; −1/2 if unacceptable.
    pub alpha_man: Vec<Rational>,
    pub alpha_woman: Vec<Rational>,
}

impl ContractsMarket {
    pub fn new(model: ContractsModel) -> Result<Self, AdapterError> {
        let find = |names: &[String], name: &str| names.iter().position(|n| n == name);
        let mut relates = Vec::with_capacity(model.contracts.len());
        for c in &model.contracts {
            let man = find(&model.men, &c.man).ok_or_else(|| match find(&model.women, &c.man) {
                Some(_) => AdapterError::WrongSide { contract: c.name.clone(), agent: c.man.clone(), role: "man" },
                None => AdapterError::UnknownAgent(c.man.clone()),
            })?;
            let woman = find(&model.women, &c.woman).ok_or_else(|| match find(&model.men, &c.woman) {
                Some(_) => AdapterError::WrongSide { contract: c.name.clone(), agent: c.woman.clone(), role: "woman" },
                None => AdapterError::UnknownAgent(c.woman.clone()),
            })?;
            relates.push((man, woman));
        }
        let unacceptable = rat(-1, 2);
        let mut alpha_man = vec![unacceptable.clone(); relates.len()];
        let mut alpha_woman = vec![unacceptable; relates.len()];
        for (agent, ranking) in &model.prefs {
            let as_man = find(&model.men, agent);
            let as_woman = find(&model.women, agent);
            if as_man.is_none() && as_woman.is_none() {
                return Err(AdapterError::UnknownAgent(agent.clone()));
            }
            let mut seen = HashSet::new();
            for (rank, name) in ranking.iter().enumerate() {
                let bad = || AdapterError::BadPreference { contract: name.clone(), agent: agent.clone() };
                let k = model.contracts.iter().position(|c| &c.name == name).ok_or_else(bad)?;
                if !seen.insert(k) {
                    return Err(bad());
                }
                let weight = int((ranking.len() - rank) as i64);
                let (m, w) = relates[k];
                if as_man == Some(m) {
                    alpha_man[k] = weight;
                } else if as_woman == Some(w) {
                    alpha_woman[k] = weight;
                } else {
                    return Err(AdapterError::NotInvolved { contract: name.clone(), agent: agent.clone() });
                }
            }
        }
        Ok(Self { model, relates, alpha_man, alpha_woman })
    }

    /// The matching game: strategies are contract indices for both
    /// partners; IRPs are 0.
    pub fn instance(&self) -> Result<Instance, AdapterError> {
        let n = self.relates.len();
        let minus_one = int(-1);
        let mut games = Vec::with_capacity(self.model.men.len());
        for i in 0..self.model.men.len() {
            let mut row = Vec::with_capacity(self.model.women.len());
            for j in 0..self.model.women.len() {
                let mut u = vec![vec![minus_one.clone(); n.max(1)]; n.max(1)];
                let mut v = u.clone();
                for k in 0..n {
                    if self.relates[k] == (i, j) {
                        u[k][k] = self.alpha_man[k].clone();
                        v[k][k] = self.alpha_woman[k].clone();
                    }
                }
                row.push(Game::bimatrix(Matrix::new(u)?, Matrix::new(v)?)?);
            }
            games.push(row);
        }
        let irp_m = vec![Rational::zero(); self.model.men.len()];
        let irp_w = vec![Rational::zero(); self.model.women.len()];
        Ok(Instance::new(self.model.men.clone(), self.model.women.clone(), irp_m, irp_w, games)?)
    }

    /// Reads the allocation (one contract index per couple) off a profile;
    /// `None` if some couple does not agree on a contract relating them.
    pub fn allocation(&self, profile: &MatchingProfile) -> Option<Vec<usize>> {
        profile
            .couples()
            .map(|(i, j, c)| match c.play {
                Play::Cell { row, col } if row == col && self.relates.get(row) == Some(&(i, j)) => Some(row),
                _ => None,
            })
            .collect()
    }

    /// Direct stability of a one-to-one allocation: nobody holds more than
    /// one contract or an unacceptable one, and no unused contract is
    /// strictly preferred by both the man and the woman it relates.
    pub fn is_stable_allocation(&self, allocation: &[usize]) -> bool {
        let zero = Rational::zero();
        let mut held_m: Vec<Option<usize>> = vec![None; self.model.men.len()];
        let mut held_w: Vec<Option<usize>> = vec![None; self.model.women.len()];
        for &k in allocation {
            let (m, w) = self.relates[k];
            if held_m[m].replace(k).is_some() || held_w[w].replace(k).is_some() {
                return false;
            }
            if self.alpha_man[k] < zero || self.alpha_woman[k] < zero {
                return false;
            }
        }
        let value = |held: Option<usize>, alpha: &[Rational]| held.map_or(zero.clone(), |k| alpha[k].clone());
        (0..self.relates.len()).all(|k| {
            let (m, w) = self.relates[k];
            held_m[m] == Some(k)
                || !(self.alpha_man[k] > value(held_m[m], &self.alpha_man)
                    && self.alpha_woman[k] > value(held_w[w], &self.alpha_woman))
        })
    }
}

/// Contracts model as a matching game.
pub fn from_hatfield_milgrom(model: ContractsModel) -> Result<(Instance, ContractsMarket), AdapterError> {
    let market = ContractsMarket::new(model)?;
    let inst = market.instance()?;
    Ok((inst, market))
}
