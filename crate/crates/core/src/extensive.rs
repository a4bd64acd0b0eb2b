//! Finite perfect-information game trees with outside options.
//!
//! A leaf is *acceptable* when it pays every player at least their outside
//! option; a (sub)game is *admissible* when it has an acceptable leaf. A
//! strategy profile is a *constrained equilibrium* when it reaches an
//! acceptable leaf and every profitable unilateral deviation reaches an
//! unacceptable one; it is *constrained subgame-perfect* when that holds in
//! every admissible subgame. Backward induction — each mover picks, among
//! children leading to acceptable outcomes, the one best for them, or just
//! the best one when none is acceptable — always yields such a profile.

use crate::rational::Rational;
use std::collections::BTreeMap;
use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("decision node {0} has no children")]
    Childless(NodeId),
    #[error("node {node} is moved by player {player}, but the tree has {players} players")]
    UnknownPlayer { node: NodeId, player: usize, players: usize },
    #[error("leaf {node} has {found} payoffs, expected {expected}")]
    PayoffArity { node: NodeId, found: usize, expected: usize },
    #[error("expected {expected} outside options, found {found}")]
    OutsideArity { expected: usize, found: usize },
    #[error("a game tree needs at least one player")]
    NoPlayers,
}

/// Nested description of a tree, used to build the arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeSpec {
    Leaf(Vec<Rational>),
    Decision { player: usize, children: Vec<TreeSpec> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Leaf { payoffs: Vec<Rational> },
    Decision { player: usize, children: Vec<NodeId> },
}

/// Arena-allocated game tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameTree {
    players: usize,
    nodes: Vec<Node>,
}

/// Choice of child index at every decision node.
pub type TreeProfile = BTreeMap<NodeId, usize>;

impl GameTree {
    pub fn from_spec(spec: &TreeSpec, players: usize) -> Result<Self, TreeError> {
        if players == 0 {
            return Err(TreeError::NoPlayers);
        }
        let mut tree = Self { players, nodes: Vec::new() };
        tree.push(spec)?;
        Ok(tree)
    }

    fn push(&mut self, spec: &TreeSpec) -> Result<NodeId, TreeError> {
        let id = self.nodes.len();
        match spec {
            TreeSpec::Leaf(payoffs) => {
                if payoffs.len() != self.players {
                    return Err(TreeError::PayoffArity { node: id, found: payoffs.len(), expected: self.players });
                }
                self.nodes.push(Node::Leaf { payoffs: payoffs.clone() });
            }
            TreeSpec::Decision { player, children } => {
                if children.is_empty() {
                    return Err(TreeError::Childless(id));
                }
                if *player >= self.players {
                    return Err(TreeError::UnknownPlayer { node: id, player: *player, players: self.players });
                }
                self.nodes.push(Node::Decision { player: *player, children: Vec::new() });
                let mut ids = Vec::with_capacity(children.len());
                for child in children {
                    ids.push(self.push(child)?);
                }
                self.nodes[id] = Node::Decision { player: *player, children: ids };
            }
        }
        Ok(id)
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Decision nodes of the subtree rooted at `at`, in arena order.
    pub fn decision_nodes(&self, at: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![at];
        while let Some(n) = stack.pop() {
            if let Node::Decision { children, .. } = &self.nodes[n] {
                out.push(n);
                stack.extend(children.iter().copied());
            }
        }
        out.sort_unstable();
        out
    }

    fn leaves(&self, at: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![at];
        while let Some(n) = stack.pop() {
            match &self.nodes[n] {
                Node::Leaf { .. } => out.push(n),
                Node::Decision { children, .. } => stack.extend(children.iter().copied()),
            }
        }
        out
    }

    pub fn payoffs(&self, leaf: NodeId) -> &[Rational] {
        match &self.nodes[leaf] {
            Node::Leaf { payoffs } => payoffs,
            Node::Decision { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    /// Leaf reached from `at` when everyone follows `profile`.
    pub fn outcome(&self, profile: &TreeProfile, at: NodeId) -> NodeId {
        let mut n = at;
        while let Node::Decision { children, .. } = &self.nodes[n] {
            n = children[profile.get(&n).copied().unwrap_or(0)];
        }
        n
    }

    fn check_outs(&self, outs: &[Rational]) -> Result<(), TreeError> {
        if outs.len() != self.players {
            return Err(TreeError::OutsideArity { expected: self.players, found: outs.len() });
        }
        Ok(())
    }

    fn acceptable(&self, leaf: NodeId, outs: &[Rational]) -> bool {
        self.payoffs(leaf).iter().zip(outs).all(|(p, o)| p >= o)
    }

    fn admissible_at(&self, at: NodeId, outs: &[Rational]) -> bool {
        self.leaves(at).into_iter().any(|l| self.acceptable(l, outs))
    }
}

/// Some leaf pays every player at least their outside option.
pub fn is_admissible(tree: &GameTree, outs: &[Rational]) -> Result<bool, TreeError> {
    tree.check_outs(outs)?;
    Ok(tree.admissible_at(tree.root(), outs))
}

/// Backward-induction constrained subgame-perfect equilibrium, or `None`
/// when the game is not admissible. Ties go to the lowest child index.
pub fn constrained_spe(tree: &GameTree, outs: &[Rational]) -> Result<Option<TreeProfile>, TreeError> {
    tree.check_outs(outs)?;
    let mut profile = TreeProfile::new();
    let mut outcome: Vec<NodeId> = (0..tree.len()).collect();
    // children have larger arena ids than their parent, so a reverse sweep
    // reduces the deepest decisions first
    for n in (0..tree.len()).rev() {
        let Node::Decision { player, children } = tree.node(n) else { continue };
        let results: Vec<NodeId> = children.iter().map(|c| outcome[*c]).collect();
        let pick = |admissible_only: bool| {
            let mut best: Option<usize> = None;
            for (k, leaf) in results.iter().enumerate() {
                if admissible_only && !tree.acceptable(*leaf, outs) {
                    continue;
                }
                if best.is_none_or(|b| tree.payoffs(*leaf)[*player] > tree.payoffs(results[b])[*player]) {
                    best = Some(k);
                }
            }
            best
        };
        let choice = pick(true).or_else(|| pick(false)).expect("decision nodes have children");
        profile.insert(n, choice);
        outcome[n] = results[choice];
    }
    if tree.acceptable(outcome[tree.root()], outs) {
        Ok(Some(profile))
    } else {
        Ok(None)
    }
}

/// Literal check of the constrained-equilibrium definition in the subgame
/// at `at`: the outcome is acceptable, and every strategy of every player
/// (all choice assignments at their nodes of the subgame) that raises
/// their payoff reaches an unacceptable leaf.
pub fn is_constrained_equilibrium(tree: &GameTree, profile: &TreeProfile, outs: &[Rational], at: NodeId) -> bool {
    let base = tree.outcome(profile, at);
    if !tree.acceptable(base, outs) {
        return false;
    }
    let nodes = tree.decision_nodes(at);
    for player in 0..tree.players() {
        let own: Vec<(NodeId, usize)> = nodes
            .iter()
            .filter_map(|&n| match tree.node(n) {
                Node::Decision { player: p, children } if *p == player => Some((n, children.len())),
                _ => None,
            })
            .collect();
        let mut digits = vec![0usize; own.len()];
        loop {
            let mut deviated = profile.clone();
            for ((n, _), d) in own.iter().zip(&digits) {
                deviated.insert(*n, *d);
            }
            let leaf = tree.outcome(&deviated, at);
            if tree.payoffs(leaf)[player] > tree.payoffs(base)[player] && tree.acceptable(leaf, outs) {
                return false;
            }
            // odometer over the player's choices
            let mut k = 0;
            while k < own.len() {
                digits[k] += 1;
                if digits[k] < own[k].1 {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == own.len() {
                break;
            }
        }
    }
    true
}

/// The profile is a constrained equilibrium of every admissible subgame.
pub fn is_constrained_spe(tree: &GameTree, profile: &TreeProfile, outs: &[Rational]) -> bool {
    tree.decision_nodes(tree.root())
        .into_iter()
        .chain(std::iter::once(tree.root()))
        .filter(|&n| tree.admissible_at(n, outs))
        .all(|n| is_constrained_equilibrium(tree, profile, outs, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn leaf(p: &[i64]) -> TreeSpec {
        TreeSpec::Leaf(p.iter().map(|&x| int(x)).collect())
    }

    fn example() -> GameTree {
        let right = TreeSpec::Decision { player: 1, children: vec![leaf(&[1, 1]), leaf(&[3, -1])] };
        GameTree::from_spec(&TreeSpec::Decision { player: 0, children: vec![leaf(&[2, 0]), right] }, 2).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let zero = [int(0), int(0)];
        let only = GameTree::from_spec(&leaf(&[2, 0]), 2).unwrap();
        assert!(is_admissible(&only, &zero).unwrap());
        let bad = GameTree::from_spec(&leaf(&[3, -1]), 2).unwrap();
        assert!(!is_admissible(&bad, &zero).unwrap());
        assert!(is_admissible(&example(), &zero).unwrap());
        assert!(is_admissible(&example(), &[int(0)]).is_err());
    }

    #[test]
    fn backward_induction_example() {
        let zero = [int(0), int(0)];
        let tree = example();
        let spe = constrained_spe(&tree, &zero).unwrap().unwrap();
        // player 2 keeps the acceptable leaf (1,1); player 1 then prefers (2,0)
        assert_eq!(spe.get(&2), Some(&0));
        assert_eq!(spe.get(&0), Some(&0));
        assert_eq!(tree.payoffs(tree.outcome(&spe, 0)), &[int(2), int(0)]);
        assert!(is_constrained_spe(&tree, &spe, &zero));
        // the unconstrained subgame-perfect play is not constrained-perfect
        let mut plain = spe.clone();
        plain.insert(2, 1);
        assert!(!is_constrained_spe(&tree, &plain, &zero));
    }

    #[test]
    fn single_player_constrained_max() {
        let spec = TreeSpec::Decision { player: 0, children: vec![leaf(&[1]), leaf(&[5]), leaf(&[3])] };
        let tree = GameTree::from_spec(&spec, 1).unwrap();
        let spe = constrained_spe(&tree, &[int(2)]).unwrap().unwrap();
        assert_eq!(tree.payoffs(tree.outcome(&spe, 0)), &[int(5)]);
        assert_eq!(constrained_spe(&tree, &[int(9)]).unwrap(), None);
    }

    #[test]
    fn malformed_trees_are_rejected() {
        assert_eq!(
            GameTree::from_spec(&TreeSpec::Decision { player: 0, children: vec![] }, 1),
            Err(TreeError::Childless(0))
        );
        assert!(matches!(GameTree::from_spec(&leaf(&[1, 2]), 1), Err(TreeError::PayoffArity { .. })));
        assert!(matches!(
            GameTree::from_spec(&TreeSpec::Decision { player: 3, children: vec![leaf(&[1])] }, 1),
            Err(TreeError::UnknownPlayer { .. })
        ));
    }
}
