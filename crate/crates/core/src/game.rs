//! Two-player games played inside a couple.
//!
//! Every game class exposes the same finite *contract menu*: a list of
//! strategy pairs with their exact payoff pair `(u, v)`, `u` for the man
//! (row player) and `v` for the woman (column player). Continuous classes
//! are realized on payoff-level grids:
//!
//! * zero-sum, strictly competitive and transfer games become a grid of
//!   levels of the underlying zero-sum payoff `g` (the transfer `t` for
//!   transfer games), with `u = F(g)` and `v = H(-g)`;
//! * repeated games become grid points of the feasible payoff hull.
//!
//! The class-specific unilateral-deviation semantics used by Nash and
//! constrained-Nash checks live in [`Game::profitable_deviations`].

use crate::geometry::{PayoffPolygon, Point};
use crate::lp;
use crate::piecewise::{PiecewiseError, PiecewiseLinear};
use crate::rational::Rational;
use crate::Side;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("payoff matrix is empty")]
    EmptyMatrix,
    #[error("payoff matrix is ragged: row {row} has {found} entries, expected {expected}")]
    RaggedMatrix { row: usize, found: usize, expected: usize },
    #[error("matrix dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("menu resolution must be positive, got {0}")]
    NonPositiveResolution(Rational),
    #[error("transfer grid is empty: t_min {0} exceeds t_max {1}")]
    EmptyTransferGrid(Rational, Rational),
    #[error("invalid monotone map: {0}")]
    Piecewise(#[from] PiecewiseError),
    #[error("potential matrix is not an ordinal potential for this game")]
    NotAPotential,
    #[error("repeated-game menu would have {0} points; use a coarser resolution")]
    MenuTooLarge(usize),
    #[error("contract does not belong to this game: {0}")]
    ForeignContract(String),
}

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, GameError> {
        let expected = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || expected == 0 {
            return Err(GameError::EmptyMatrix);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != expected {
                return Err(GameError::RaggedMatrix { row, found: r.len(), expected });
            }
        }
        let n = rows.len();
        Ok(Self { rows: n, cols: expected, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_ints<const C: usize>(rows: &[[i64; C]]) -> Self {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect())
            .expect("literal matrix is well formed")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.data[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.cols).map(<[Rational]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn min(&self) -> &Rational {
        self.data.iter().min().expect("nonempty")
    }

    pub fn max(&self) -> &Rational {
        self.data.iter().max().expect("nonempty")
    }

    fn same_shape(&self, other: &Matrix) -> Result<(), GameError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(GameError::DimensionMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        Ok(())
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameClass {
    FiniteBimatrix,
    ZeroSum,
    StrictlyCompetitive,
    Potential,
    Transfer,
    RepeatedStage,
}

impl GameClass {
    pub fn name(self) -> &'static str {
        match self {
            GameClass::FiniteBimatrix => "bimatrix",
            GameClass::ZeroSum => "zero-sum",
            GameClass::StrictlyCompetitive => "strictly-competitive",
            GameClass::Potential => "potential",
            GameClass::Transfer => "transfer",
            GameClass::RepeatedStage => "repeated",
        }
    }

    /// Classes whose menu is a grid of levels of an underlying zero-sum payoff.
    pub fn is_competitive(self) -> bool {
        matches!(self, GameClass::ZeroSum | GameClass::StrictlyCompetitive | GameClass::Transfer)
    }
}

impl fmt::Display for GameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a contract is realized in its game.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Play {
    /// Pure cell of a matrix game.
    Cell { row: usize, col: usize },
    /// Level of the zero-sum payoff `g`, realized between two pure anchor
    /// cells with `g(below) <= level <= g(above)`.
    Level { level: Rational, below: (usize, usize), above: (usize, usize) },
    /// Net transfer `t` from the woman to the man.
    Transfer { t: Rational },
    /// Average payoff pair of a repeated game.
    Point { u: Rational, v: Rational },
}

impl fmt::Display for Play {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Play::Cell { row, col } => write!(f, "cell({row},{col})"),
            Play::Level { level, .. } => write!(f, "level({level})"),
            Play::Transfer { t } => write!(f, "transfer({t})"),
            Play::Point { u, v } => write!(f, "point({u},{v})"),
        }
    }
}

/// A strategy pair for one couple together with its payoffs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Contract {
    pub id: usize,
    pub play: Play,
    pub u: Rational,
    pub v: Rational,
}

impl Contract {
    /// Id carried by contracts synthesized off the menu grid (exact
    /// repeated-game payoff points).
    pub const OFF_MENU: usize = usize::MAX;

    pub fn payoffs(&self) -> (Rational, Rational) {
        (self.u.clone(), self.v.clone())
    }

    pub fn own(&self, side: Side) -> &Rational {
        match side {
            Side::Men => &self.u,
            Side::Women => &self.v,
        }
    }

    pub fn other(&self, side: Side) -> &Rational {
        self.own(side.other())
    }

    pub fn same_payoffs(&self, other: &Contract) -> bool {
        self.u == other.u && self.v == other.v
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {} -> ({}, {})", self.id, self.play, self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LevelGrid {
    levels: Vec<Rational>,
    value: Rational,
}

impl LevelGrid {
    fn build(lo: &Rational, hi: &Rational, step: &Rational, value: Rational) -> Result<Self, GameError> {
        if !step.is_positive() {
            return Err(GameError::NonPositiveResolution(step.clone()));
        }
        let mut levels = Vec::new();
        let mut x = lo.clone();
        while x < *hi {
            levels.push(x.clone());
            x += step;
        }
        levels.push(hi.clone());
        Ok(Self { levels, value })
    }

    fn position(&self, level: &Rational) -> Option<usize> {
        self.levels.binary_search(level).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Bimatrix { u: Matrix, v: Matrix },
    ZeroSum { g: Matrix, grid: LevelGrid },
    StrictlyCompetitive { g: Matrix, f: PiecewiseLinear, h: PiecewiseLinear, grid: LevelGrid },
    Potential { u: Matrix, v: Matrix, phi: Matrix },
    Transfer { f_u: PiecewiseLinear, f_v: PiecewiseLinear, grid: LevelGrid, step: Rational },
    Repeated { u: Matrix, v: Matrix, resolution: Rational, hull: PayoffPolygon, alpha: Rational, beta: Rational },
}

/// The defining data of a game, as passed to its constructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameSource<'a> {
    Bimatrix {
        u: &'a Matrix,
        v: &'a Matrix,
    },
    ZeroSum {
        g: &'a Matrix,
        resolution: Rational,
    },
    StrictlyCompetitive {
        g: &'a Matrix,
        f: &'a PiecewiseLinear,
        h: &'a PiecewiseLinear,
        resolution: Rational,
    },
    Potential {
        u: &'a Matrix,
        v: &'a Matrix,
        phi: &'a Matrix,
    },
    Transfer {
        t_min: &'a Rational,
        t_max: &'a Rational,
        step: &'a Rational,
        f_u: &'a PiecewiseLinear,
        f_v: &'a PiecewiseLinear,
    },
    Repeated {
        u: &'a Matrix,
        v: &'a Matrix,
        resolution: &'a Rational,
    },
}

/// A couple's game with its precomputed contract menu. Immutable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    kind: Kind,
    menu: Vec<Contract>,
}

const MAX_REPEATED_MENU: usize = 200_000;

impl Game {
    pub fn bimatrix(u: Matrix, v: Matrix) -> Result<Self, GameError> {
        u.same_shape(&v)?;
        Ok(Self::with_menu(Kind::Bimatrix { u, v }))
    }

    /// Zero-sum game: the man receives `g`, the woman `-g`. Contracts are
    /// levels on a grid of step `resolution` spanning `[min g, max g]`.
    pub fn zero_sum(g: Matrix, resolution: Rational) -> Result<Self, GameError> {
        let value = zero_sum_value(&g);
        let grid = LevelGrid::build(g.min(), g.max(), &resolution, value)?;
        Ok(Self::with_menu(Kind::ZeroSum { g, grid }))
    }

    /// Strictly competitive game `u = f(g)`, `v = h(-g)` with increasing maps.
    pub fn strictly_competitive(
        g: Matrix,
        f: PiecewiseLinear,
        h: PiecewiseLinear,
        resolution: Rational,
    ) -> Result<Self, GameError> {
        for map in [&f, &h] {
            if !map.is_strictly_increasing() {
                return Err(PiecewiseError::NotIncreasing(0, 1).into());
            }
        }
        let value = zero_sum_value(&g);
        let grid = LevelGrid::build(g.min(), g.max(), &resolution, value)?;
        Ok(Self::with_menu(Kind::StrictlyCompetitive { g, f, h, grid }))
    }

    /// Ordinal potential game; rejects `phi` unless it passes
    /// [`validate_potential`].
    pub fn potential(u: Matrix, v: Matrix, phi: Matrix) -> Result<Self, GameError> {
        if !validate_potential(&u, &v, &phi)? {
            return Err(GameError::NotAPotential);
        }
        Ok(Self::with_menu(Kind::Potential { u, v, phi }))
    }

    /// Transfer game over `t in {t_min, t_min + step, ..., t_max}` with
    /// `u = f_u(t)` and `v = f_v(-t)`.
    pub fn transfer(
        t_min: Rational,
        t_max: Rational,
        step: Rational,
        f_u: PiecewiseLinear,
        f_v: PiecewiseLinear,
    ) -> Result<Self, GameError> {
        if t_min > t_max {
            return Err(GameError::EmptyTransferGrid(t_min, t_max));
        }
        // both players' dominant choice is to contribute nothing: net transfer 0
        let zero = Rational::zero();
        let value = zero.clamp(t_min.clone(), t_max.clone());
        let grid = LevelGrid::build(&t_min, &t_max, &step, value)?;
        Ok(Self::with_menu(Kind::Transfer { f_u, f_v, grid, step }))
    }

    /// Infinitely repeated game over the stage game `(u, v)`. Contracts are
    /// the hull vertices plus every point of the lattice `resolution * Z^2`
    /// inside the feasible payoff hull.
    pub fn repeated(u: Matrix, v: Matrix, resolution: Rational) -> Result<Self, GameError> {
        u.same_shape(&v)?;
        if !resolution.is_positive() {
            return Err(GameError::NonPositiveResolution(resolution));
        }
        let (alpha, beta) = punishment_levels(&u, &v);
        let hull = feasible_payoff_hull(&u, &v);
        let (lo, hi) = hull.min_max().expect("hull of a nonempty game");
        let span = |a: &Rational, b: &Rational| ((b - a) / &resolution).floor().to_integer();
        let count = (span(&lo.0, &hi.0) + 2u8) * (span(&lo.1, &hi.1) + 2u8);
        if count > MAX_REPEATED_MENU.into() {
            return Err(GameError::MenuTooLarge(count.try_into().unwrap_or(usize::MAX)));
        }
        let kind = Kind::Repeated { u, v, resolution, hull, alpha, beta };
        Ok(Self::with_menu(kind))
    }

    fn with_menu(kind: Kind) -> Self {
        let plays = Self::enumerate_plays(&kind);
        let mut game = Self { kind, menu: Vec::with_capacity(plays.len()) };
        for (id, play) in plays.into_iter().enumerate() {
            let (u, v) = game.evaluate(&play).expect("menu plays evaluate");
            game.menu.push(Contract { id, play, u, v });
        }
        game
    }

    fn enumerate_plays(kind: &Kind) -> Vec<Play> {
        match kind {
            Kind::Bimatrix { u, .. } | Kind::Potential { u, .. } => {
                u.cells().map(|(row, col)| Play::Cell { row, col }).collect()
            }
            Kind::ZeroSum { g, grid } | Kind::StrictlyCompetitive { g, grid, .. } => {
                grid.levels.iter().map(|level| level_play(g, level)).collect()
            }
            Kind::Transfer { grid, .. } => grid.levels.iter().map(|t| Play::Transfer { t: t.clone() }).collect(),
            Kind::Repeated { hull, resolution, .. } => {
                let (lo, hi) = hull.min_max().expect("nonempty hull");
                let mut points: Vec<Point> = hull.vertices().to_vec();
                let first = |x: &Rational| (x / resolution).ceil() * resolution;
                let mut a = first(&lo.0);
                while a <= hi.0 {
                    let mut b = first(&lo.1);
                    while b <= hi.1 {
                        let p = (a.clone(), b.clone());
                        if hull.contains(&p) {
                            points.push(p);
                        }
                        b += resolution;
                    }
                    a += resolution;
                }
                points.sort();
                points.dedup();
                points.into_iter().map(|(u, v)| Play::Point { u, v }).collect()
            }
        }
    }

    pub fn class(&self) -> GameClass {
        match &self.kind {
            Kind::Bimatrix { .. } => GameClass::FiniteBimatrix,
            Kind::ZeroSum { .. } => GameClass::ZeroSum,
            Kind::StrictlyCompetitive { .. } => GameClass::StrictlyCompetitive,
            Kind::Potential { .. } => GameClass::Potential,
            Kind::Transfer { .. } => GameClass::Transfer,
            Kind::Repeated { .. } => GameClass::RepeatedStage,
        }
    }

    /// Constructor data; rebuilding from it yields an equal game. A
    /// single-level grid reports resolution 1 (any positive step rebuilds it).
    pub fn source(&self) -> GameSource<'_> {
        let step = || self.resolution().unwrap_or_else(Rational::one);
        match &self.kind {
            Kind::Bimatrix { u, v } => GameSource::Bimatrix { u, v },
            Kind::ZeroSum { g, .. } => GameSource::ZeroSum { g, resolution: step() },
            Kind::StrictlyCompetitive { g, f, h, .. } => {
                GameSource::StrictlyCompetitive { g, f, h, resolution: step() }
            }
            Kind::Potential { u, v, phi } => GameSource::Potential { u, v, phi },
            Kind::Transfer { f_u, f_v, grid, step } => GameSource::Transfer {
                t_min: grid.levels.first().expect("nonempty grid"),
                t_max: grid.levels.last().expect("nonempty grid"),
                step,
                f_u,
                f_v,
            },
            Kind::Repeated { u, v, resolution, .. } => GameSource::Repeated { u, v, resolution },
        }
    }

    /// The finite, nonempty, deterministic contract menu ordered by id.
    pub fn menu(&self) -> &[Contract] {
        &self.menu
    }

    /// Re-derives `(u, v)` from a play, rejecting plays foreign to the game.
    pub fn evaluate(&self, play: &Play) -> Result<(Rational, Rational), GameError> {
        let foreign = || GameError::ForeignContract(play.to_string());
        match (&self.kind, play) {
            (Kind::Bimatrix { u, v } | Kind::Potential { u, v, .. }, Play::Cell { row, col }) => {
                if *row < u.rows() && *col < u.cols() {
                    Ok((u.get(*row, *col).clone(), v.get(*row, *col).clone()))
                } else {
                    Err(foreign())
                }
            }
            (Kind::ZeroSum { grid, .. }, Play::Level { level, .. }) => {
                grid.position(level).ok_or_else(foreign)?;
                Ok((level.clone(), -level.clone()))
            }
            (Kind::StrictlyCompetitive { f, h, grid, .. }, Play::Level { level, .. }) => {
                grid.position(level).ok_or_else(foreign)?;
                Ok((f.eval(level), h.eval(&-level.clone())))
            }
            (Kind::Transfer { f_u, f_v, grid, .. }, Play::Transfer { t }) => {
                grid.position(t).ok_or_else(foreign)?;
                Ok((f_u.eval(t), f_v.eval(&-t.clone())))
            }
            (Kind::Repeated { hull, .. }, Play::Point { u, v }) => {
                if hull.contains(&(u.clone(), v.clone())) {
                    Ok((u.clone(), v.clone()))
                } else {
                    Err(foreign())
                }
            }
            _ => Err(foreign()),
        }
    }

    /// Payoff of a contract, checking the stored values against a fresh
    /// evaluation of its play.
    pub fn payoff(&self, contract: &Contract) -> Result<(Rational, Rational), GameError> {
        let (u, v) = self.evaluate(&contract.play)?;
        if u != contract.u || v != contract.v {
            return Err(GameError::ForeignContract(format!("{contract}: stored payoffs differ from ({u}, {v})")));
        }
        if contract.id != Contract::OFF_MENU && self.menu.get(contract.id).map(|c| &c.play) != Some(&contract.play) {
            return Err(GameError::ForeignContract(format!("{contract}: id does not match menu")));
        }
        Ok((u, v))
    }

    /// Builds the contract for a play: the menu entry when the play is on the
    /// menu, otherwise an off-menu contract (repeated games only).
    pub fn contract_for(&self, play: &Play) -> Result<Contract, GameError> {
        let (u, v) = self.evaluate(play)?;
        if let Some(c) = self.menu.iter().find(|c| &c.play == play) {
            return Ok(c.clone());
        }
        match self.kind {
            Kind::Repeated { .. } => Ok(Contract { id: Contract::OFF_MENU, play: play.clone(), u, v }),
            _ => Err(GameError::ForeignContract(play.to_string())),
        }
    }

    /// Zero-sum value of the underlying competitive payoff (`g` for zero-sum
    /// and strictly competitive games, the transfer for transfer games).
    pub fn competitive_value(&self) -> Option<&Rational> {
        self.level_grid().map(|g| &g.value)
    }

    fn level_grid(&self) -> Option<&LevelGrid> {
        match &self.kind {
            Kind::ZeroSum { grid, .. } | Kind::StrictlyCompetitive { grid, .. } | Kind::Transfer { grid, .. } => {
                Some(grid)
            }
            _ => None,
        }
    }

    /// Ascending competitive levels of the menu (ids follow this order).
    pub fn levels(&self) -> Option<&[Rational]> {
        self.level_grid().map(|g| g.levels.as_slice())
    }

    /// Competitive level of a contract of a level-grid game.
    pub fn level_of(&self, contract: &Contract) -> Option<Rational> {
        match &contract.play {
            Play::Level { level, .. } => Some(level.clone()),
            Play::Transfer { t } => Some(t.clone()),
            _ => None,
        }
    }

    /// Smallest level at which the man gets at least `u0`: `F^-1(u0)`.
    pub fn level_floor_for_man(&self, u0: &Rational) -> Option<Rational> {
        match &self.kind {
            Kind::ZeroSum { .. } => Some(u0.clone()),
            Kind::StrictlyCompetitive { f, .. } => Some(f.inverse(u0)),
            Kind::Transfer { f_u, .. } => Some(f_u.inverse(u0)),
            _ => None,
        }
    }

    /// Largest level at which the woman gets at least `v0`: `-H^-1(v0)`.
    pub fn level_ceiling_for_woman(&self, v0: &Rational) -> Option<Rational> {
        match &self.kind {
            Kind::ZeroSum { .. } => Some(-v0.clone()),
            Kind::StrictlyCompetitive { h, .. } => Some(-h.inverse(v0)),
            Kind::Transfer { f_v, .. } => Some(-f_v.inverse(v0)),
            _ => None,
        }
    }

    /// Grid step of the menu for continuous classes.
    pub fn resolution(&self) -> Option<Rational> {
        match &self.kind {
            Kind::Transfer { step, .. } => Some(step.clone()),
            Kind::Repeated { resolution, .. } => Some(resolution.clone()),
            Kind::ZeroSum { grid, .. } | Kind::StrictlyCompetitive { grid, .. } => {
                if grid.levels.len() >= 2 {
                    Some(&grid.levels[1] - &grid.levels[0])
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn potential_of(&self, contract: &Contract) -> Option<Rational> {
        match (&self.kind, &contract.play) {
            (Kind::Potential { phi, .. }, Play::Cell { row, col }) => Some(phi.get(*row, *col).clone()),
            _ => None,
        }
    }

    /// Punishment levels `(alpha, beta)` of a repeated game's stage game.
    pub fn punishment(&self) -> Option<(Rational, Rational)> {
        match &self.kind {
            Kind::Repeated { alpha, beta, .. } => Some((alpha.clone(), beta.clone())),
            _ => None,
        }
    }

    pub fn hull(&self) -> Option<&PayoffPolygon> {
        match &self.kind {
            Kind::Repeated { hull, .. } => Some(hull),
            _ => None,
        }
    }

    /// Payoff matrices of matrix-based classes (bimatrix, potential, and the
    /// stage game of a repeated game).
    pub fn matrices(&self) -> Option<(&Matrix, &Matrix)> {
        match &self.kind {
            Kind::Bimatrix { u, v } | Kind::Potential { u, v, .. } | Kind::Repeated { u, v, .. } => Some((u, v)),
            _ => None,
        }
    }

    /// The man's pure strategy in a cell contract.
    pub fn row_of(&self, contract: &Contract) -> Option<usize> {
        match (&self.kind, &contract.play) {
            (Kind::Bimatrix { .. } | Kind::Potential { .. }, Play::Cell { row, .. }) => Some(*row),
            _ => None,
        }
    }

    /// The woman's pure strategy in a cell contract.
    pub fn col_of(&self, contract: &Contract) -> Option<usize> {
        match (&self.kind, &contract.play) {
            (Kind::Bimatrix { .. } | Kind::Potential { .. }, Play::Cell { col, .. }) => Some(*col),
            _ => None,
        }
    }

    /// Menu contract for a pure cell, when the game is cell-based and the
    /// cell exists.
    pub fn cell(&self, row: usize, col: usize) -> Option<&Contract> {
        match &self.kind {
            Kind::Bimatrix { u, .. } | Kind::Potential { u, .. } if row < u.rows() && col < u.cols() => {
                self.menu.get(row * u.cols() + col)
            }
            _ => None,
        }
    }

    /// Menu contracts reachable by a unilateral deviation of `side` from
    /// `contract` that strictly raise that side's own payoff.
    ///
    /// * Matrix games: the other pure strategies in the same column (man)
    ///   or row (woman).
    /// * Level-grid games with value `w`: the man can push the level from
    ///   `c` up to `max(c, w)`, the woman down to `min(c, w)`; the realization
    ///   between the anchors is chosen so that no further move is available.
    /// * Repeated games: a player held at or above their punishment level
    ///   gains nothing by deviating; below it, any menu point with a higher
    ///   own payoff is treated as reachable.
    pub fn profitable_deviations(&self, contract: &Contract, side: Side) -> Vec<Contract> {
        let own = contract.own(side);
        let improving = |c: &&Contract| c.own(side) > own;
        match (&self.kind, &contract.play) {
            (Kind::Bimatrix { .. } | Kind::Potential { .. }, Play::Cell { row, col }) => self
                .menu
                .iter()
                .filter(|c| match (&c.play, side) {
                    (Play::Cell { row: r, col: k }, Side::Men) => k == col && r != row,
                    (Play::Cell { row: r, col: k }, Side::Women) => r == row && k != col,
                    _ => false,
                })
                .filter(improving)
                .cloned()
                .collect(),
            (Kind::ZeroSum { grid, .. } | Kind::StrictlyCompetitive { grid, .. } | Kind::Transfer { grid, .. }, _) => {
                let Some(c) = self.level_of(contract) else {
                    return Vec::new();
                };
                let w = &grid.value;
                let reachable = |l: &Rational| match side {
                    Side::Men => *l > c && l <= w,
                    Side::Women => *l < c && l >= w,
                };
                self.menu
                    .iter()
                    .filter(|m| self.level_of(m).is_some_and(|l| reachable(&l)))
                    .filter(improving)
                    .cloned()
                    .collect()
            }
            (Kind::Repeated { alpha, beta, .. }, Play::Point { .. }) => {
                let punish = match side {
                    Side::Men => alpha,
                    Side::Women => beta,
                };
                if own >= punish {
                    return Vec::new();
                }
                self.menu.iter().filter(improving).cloned().collect()
            }
            _ => Vec::new(),
        }
    }

    /// No player has a profitable unilateral deviation.
    pub fn is_nash(&self, contract: &Contract) -> bool {
        self.profitable_deviations(contract, Side::Men).is_empty()
            && self.profitable_deviations(contract, Side::Women).is_empty()
    }

    /// Menu contracts that are Nash equilibria, in id order.
    pub fn nash_contracts(&self) -> Vec<Contract> {
        self.menu.iter().filter(|c| self.is_nash(c)).cloned().collect()
    }

    /// Largest woman payoff on the menu.
    pub fn max_v(&self) -> &Rational {
        self.menu.iter().map(|c| &c.v).max().expect("menu is nonempty")
    }
}

fn level_play(g: &Matrix, level: &Rational) -> Play {
    let below = g
        .cells()
        .filter(|&(r, c)| g.get(r, c) <= level)
        .max_by(|&a, &b| g.get(a.0, a.1).cmp(g.get(b.0, b.1)).then(b.cmp(&a)))
        .expect("level is at least min g");
    let above = g
        .cells()
        .filter(|&(r, c)| g.get(r, c) >= level)
        .min_by(|&a, &b| g.get(a.0, a.1).cmp(g.get(b.0, b.1)).then(a.cmp(&b)))
        .expect("level is at most max g");
    Play::Level { level: level.clone(), below, above }
}

/// Value and optimal mixed strategies of a zero-sum matrix game in which the
/// row player maximizes `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSumSolution {
    pub value: Rational,
    pub row_strategy: Vec<Rational>,
    pub col_strategy: Vec<Rational>,
}

/// Solves the mixed extension of `g` exactly by linear programming.
pub fn solve_zero_sum(g: &Matrix) -> ZeroSumSolution {
    // shift so every entry is >= 1; then max sum(y) s.t. G y <= 1 has value 1/w'
    let one = Rational::from_integer(1.into());
    let shift = &one - g.min();
    let a: Vec<Vec<Rational>> = (0..g.rows()).map(|r| (0..g.cols()).map(|c| g.get(r, c) + &shift).collect()).collect();
    let b = vec![one.clone(); g.rows()];
    let c = vec![one.clone(); g.cols()];
    let sol = lp::maximize(&a, &b, &c).expect("bounded: every column has a positive entry");
    let z = sol.objective;
    let value = &one / &z - &shift;
    let col_strategy = sol.primal.iter().map(|y| y / &z).collect();
    let row_strategy = sol.dual.iter().map(|x| x / &z).collect();
    ZeroSumSolution { value, row_strategy, col_strategy }
}

/// Exact value of the mixed extension of the zero-sum matrix game `g`.
pub fn zero_sum_value(g: &Matrix) -> Rational {
    solve_zero_sum(g).value
}

/// Mixed minmax levels `(alpha, beta)`: alpha is what the woman can hold the
/// man to, beta what the man can hold the woman to.
pub fn punishment_levels(u: &Matrix, v: &Matrix) -> (Rational, Rational) {
    (zero_sum_value(u), zero_sum_value(&v.transpose()))
}

/// Convex hull of the stage game's pure payoff vectors.
pub fn feasible_payoff_hull(u: &Matrix, v: &Matrix) -> PayoffPolygon {
    let points: Vec<Point> = u.cells().map(|(r, c)| (u.get(r, c).clone(), v.get(r, c).clone())).collect();
    PayoffPolygon::hull(&points)
}

/// Ordinal potential check: every unilateral pure deviation changes the
/// deviator's payoff and the potential with the same sign.
pub fn validate_potential(u: &Matrix, v: &Matrix, phi: &Matrix) -> Result<bool, GameError> {
    u.same_shape(v)?;
    u.same_shape(phi)?;
    let sign = |a: &Rational, b: &Rational| (b - a).signum();
    for (r, c) in u.cells() {
        for r2 in 0..u.rows() {
            if sign(u.get(r, c), u.get(r2, c)) != sign(phi.get(r, c), phi.get(r2, c)) {
                return Ok(false);
            }
        }
        for c2 in 0..u.cols() {
            if sign(v.get(r, c), v.get(r, c2)) != sign(phi.get(r, c), phi.get(r, c2)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn pd() -> (Matrix, Matrix) {
        (Matrix::from_ints(&[[3, 0], [4, 1]]), Matrix::from_ints(&[[3, 4], [0, 1]]))
    }

    #[test]
    fn bimatrix_payoff_lookup() {
        let g = Game::bimatrix(Matrix::from_ints(&[[2, 0], [3, 1]]), Matrix::from_ints(&[[1, 0], [0, 2]])).unwrap();
        assert_eq!(g.menu().len(), 4);
        let c = g.contract_for(&Play::Cell { row: 0, col: 0 }).unwrap();
        assert_eq!(g.payoff(&c).unwrap(), (int(2), int(1)));
        assert!(g.evaluate(&Play::Cell { row: 2, col: 0 }).is_err());
        assert!(g.evaluate(&Play::Transfer { t: int(0) }).is_err());
    }

    #[test]
    fn forged_contract_is_rejected() {
        let (u, v) = pd();
        let g = Game::bimatrix(u, v).unwrap();
        let mut c = g.menu()[0].clone();
        c.u = int(99);
        assert!(matches!(g.payoff(&c), Err(GameError::ForeignContract(_))));
        let mut c = g.menu()[0].clone();
        c.id = 3;
        assert!(g.payoff(&c).is_err());
    }

    #[test]
    fn zero_sum_menu_is_level_grid() {
        let g = Game::zero_sum(Matrix::from_ints(&[[1, -1], [-1, 1]]), rat(1, 2)).unwrap();
        let levels: Vec<_> = g.menu().iter().map(|c| c.u.clone()).collect();
        assert_eq!(levels, vec![int(-1), rat(-1, 2), int(0), rat(1, 2), int(1)]);
        let half = &g.menu()[3];
        assert_eq!(g.payoff(half).unwrap(), (rat(1, 2), rat(-1, 2)));
        assert_eq!(g.competitive_value(), Some(&int(0)));
        assert!(matches!(Game::zero_sum(Matrix::from_ints(&[[1]]), int(0)), Err(GameError::NonPositiveResolution(_))));
    }

    #[test]
    fn level_grid_appends_unaligned_maximum() {
        let g = Game::zero_sum(Matrix::from_ints(&[[0, 1]]), rat(2, 5)).unwrap();
        let levels: Vec<_> = g.menu().iter().map(|c| c.u.clone()).collect();
        assert_eq!(levels, vec![int(0), rat(2, 5), rat(4, 5), int(1)]);
    }

    #[test]
    fn transfer_menu_and_payoffs() {
        let f_u = PiecewiseLinear::affine(int(1), int(-2)).unwrap();
        let f_v = PiecewiseLinear::affine(int(1), int(6)).unwrap();
        let g = Game::transfer(int(0), int(6), int(1), f_u, f_v).unwrap();
        assert_eq!(g.menu().len(), 7);
        let c = g.contract_for(&Play::Transfer { t: int(4) }).unwrap();
        assert_eq!((c.u.clone(), c.v.clone()), (int(2), int(2)));
        assert!(g.evaluate(&Play::Transfer { t: rat(1, 2) }).is_err());
    }

    #[test]
    fn zero_sum_values() {
        assert_eq!(zero_sum_value(&Matrix::from_ints(&[[1, -1], [-1, 1]])), int(0));
        assert_eq!(zero_sum_value(&Matrix::from_ints(&[[3]])), int(3));
        assert_eq!(zero_sum_value(&Matrix::from_ints(&[[2, 0], [1, 3]])), rat(3, 2));
        let sol = solve_zero_sum(&Matrix::from_ints(&[[2, 0], [1, 3]]));
        assert_eq!(sol.row_strategy, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(sol.col_strategy, vec![rat(3, 4), rat(1, 4)]);
    }

    #[test]
    fn punishment_levels_examples() {
        let (u, v) = pd();
        assert_eq!(punishment_levels(&u, &v), (int(1), int(1)));
        let mp = Matrix::from_ints(&[[1, -1], [-1, 1]]);
        let neg = Matrix::from_ints(&[[-1, 1], [1, -1]]);
        assert_eq!(punishment_levels(&mp, &neg), (int(0), int(0)));
        // mixed minmax of the coordination matrix [[2,0],[0,1]] is 2/3
        let ci = Matrix::from_ints(&[[2, 0], [0, 1]]);
        assert_eq!(punishment_levels(&ci, &ci), (rat(2, 3), rat(2, 3)));
    }

    #[test]
    fn hull_examples() {
        let (u, v) = pd();
        let hull = feasible_payoff_hull(&u, &v);
        assert_eq!(hull.vertices().len(), 4);
        let single = feasible_payoff_hull(&Matrix::from_ints(&[[3]]), &Matrix::from_ints(&[[3]]));
        assert_eq!(single.vertices(), &[(int(3), int(3))]);
        let g = Matrix::from_ints(&[[1, -1], [-1, 1]]);
        let seg = feasible_payoff_hull(&g, &Matrix::from_ints(&[[-1, 1], [1, -1]]));
        let mut got = seg.vertices().to_vec();
        got.sort();
        assert_eq!(got, vec![(int(-1), int(1)), (int(1), int(-1))]);
    }

    #[test]
    fn potential_validation() {
        let ci = Matrix::from_ints(&[[2, 0], [0, 1]]);
        assert!(validate_potential(&ci, &ci, &ci).unwrap());
        let u = Matrix::from_ints(&[[2, 0], [3, 1]]);
        let v = Matrix::from_ints(&[[1, 0], [0, 2]]);
        assert!(!validate_potential(&u, &v, &Matrix::from_ints(&[[0, 0], [0, 0]])).unwrap());
        let (u, v) = pd();
        assert!(validate_potential(&u, &v, &Matrix::from_ints(&[[0, 2], [2, 3]])).unwrap());
        assert!(validate_potential(&u, &v, &Matrix::from_ints(&[[0, 2, 1]])).is_err());
        assert!(matches!(
            Game::potential(u.clone(), v, Matrix::from_ints(&[[0, 0], [0, 0]])),
            Err(GameError::NotAPotential)
        ));
    }

    #[test]
    fn bimatrix_deviations_and_nash() {
        let (u, v) = pd();
        let g = Game::bimatrix(u, v).unwrap();
        let cc = g.cell(0, 0).unwrap().clone();
        let dd = g.cell(1, 1).unwrap().clone();
        assert!(g.is_nash(&dd));
        assert!(!g.is_nash(&cc));
        let dev = g.profitable_deviations(&cc, Side::Men);
        assert_eq!(dev.len(), 1);
        assert_eq!((dev[0].u.clone(), dev[0].v.clone()), (int(4), int(0)));
        assert_eq!(g.nash_contracts(), vec![dd]);
    }

    #[test]
    fn level_deviation_semantics() {
        // matching pennies: w = 0
        let g = Game::zero_sum(Matrix::from_ints(&[[1, -1], [-1, 1]]), rat(1, 2)).unwrap();
        let at = |l: Rational| g.menu().iter().find(|c| c.u == l).unwrap().clone();
        // below the value the man can climb to w, the woman cannot move
        let low = at(int(-1));
        let ups: Vec<_> = g.profitable_deviations(&low, Side::Men).iter().map(|c| c.u.clone()).collect();
        assert_eq!(ups, vec![rat(-1, 2), int(0)]);
        assert!(g.profitable_deviations(&low, Side::Women).is_empty());
        assert!(g.is_nash(&at(int(0))));
        assert_eq!(g.nash_contracts().len(), 1);
    }

    #[test]
    fn repeated_menu_and_deviations() {
        let (u, v) = pd();
        let g = Game::repeated(u, v, int(1)).unwrap();
        assert_eq!(g.punishment(), Some((int(1), int(1))));
        // lattice points of the PD hull plus vertices
        assert!(g.menu().iter().all(|c| g.hull().unwrap().contains(&(c.u.clone(), c.v.clone()))));
        assert!(g.menu().iter().any(|c| (c.u.clone(), c.v.clone()) == (int(2), int(2))));
        let off = g.contract_for(&Play::Point { u: rat(7, 2), v: rat(3, 2) }).unwrap();
        assert_eq!(off.id, Contract::OFF_MENU);
        assert!(g.payoff(&off).is_ok());
        assert!(g.contract_for(&Play::Point { u: int(0), v: int(0) }).is_err());
        // (3,3) is in E = {u>=1, v>=1}: a Nash point
        let coop = g.menu().iter().find(|c| c.u == int(3) && c.v == int(3)).unwrap();
        assert!(g.is_nash(coop));
        let low = g.menu().iter().find(|c| c.u == int(0) && c.v == int(4)).unwrap();
        assert!(!g.profitable_deviations(low, Side::Men).is_empty());
        assert!(g.profitable_deviations(low, Side::Women).is_empty());
    }

    #[test]
    fn menus_are_deterministic() {
        let (u, v) = pd();
        assert_eq!(
            Game::repeated(u.clone(), v.clone(), rat(1, 2)).unwrap().menu(),
            Game::repeated(u, v, rat(1, 2)).unwrap().menu()
        );
    }
}
