//! Matching games: two-sided markets in which every couple's payoff is the
//! outcome of a strategic game played inside the couple.
//!
//! The crate computes ε-externally stable matching profiles with a
//! propose–dispose market ([`propose`]), refines them into externally and
//! internally stable profiles by constrained-Nash replacement ([`refine`]),
//! and checks every stability notion exactly ([`stability`]) against
//! brute-force ground truth ([`oracle`]). All payoffs are exact rationals.

#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod adapters;
pub mod cne;
pub mod extensive;
pub mod format;
pub mod game;
pub mod geometry;
pub mod instance;
pub mod lattice;
mod lp;
pub mod oracle;
pub mod piecewise;
pub mod propose;
pub mod random;
pub mod rational;
pub mod refine;
pub mod stability;

pub use game::{Contract, Game, GameClass, GameError, Matrix, Play};
pub use instance::{Instance, MatchingProfile};
pub use rational::Rational;

/// One side of the market. Also names the player inside a couple's game:
/// the man is the row player, the woman the column player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Men,
    Women,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Men => Side::Women,
            Side::Women => Side::Men,
        }
    }
}
