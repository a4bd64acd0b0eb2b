//! JSON file formats for instances, profiles, game trees and the classical
//! models accepted by the adapters.
//!
//! Every number is written as a string holding an exact rational (`"3"`,
//! `"-7/2"`, `"0.25"`); plain JSON integers are accepted on input. Output
//! always uses canonical lowest terms, so identical inputs give
//! byte-identical files.
//!
//! An instance file:
//!
//! ```json
//! {
//!   "men": ["m1"], "women": ["w1"],
//!   "irp": {"m1": "0", "w1": "0"},
//!   "games": [
//!     {"man": "m1", "woman": "w1", "class": "bimatrix",
//!      "u": [["3", "0"], ["4", "1"]], "v": [["3", "4"], ["0", "1"]]}
//!   ]
//! }
//! ```
//!
//! Classes and their fields: `bimatrix` (u, v), `zero-sum` (g, resolution),
//! `strictly-competitive` (g, f, h, resolution), `potential` (u, v, phi),
//! `transfer` (t_min, t_max, step, f_u, f_v), `repeated` (u, v, resolution).
//! Maps are lists of `[x, y]` breakpoints. Every couple needs exactly one
//! game entry.

use crate::adapters::{
    from_gale_demange, from_hatfield_milgrom, from_ordinal, from_shapley_shubik, AdapterError, ContractsModel,
    NamedContract, TransferGrid,
};
use crate::extensive::{GameTree, TreeError, TreeSpec};
use crate::game::{Contract, Game, GameError, GameSource, Matrix, Play};
use crate::instance::{Instance, InstanceError, MatchingProfile, ProfileError};
use crate::piecewise::PiecewiseLinear;
use crate::rational::{format_rational, parse_rational, Rational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn field_err(field: impl Into<String>, message: impl ToString) -> FormatError {
    FormatError::Field { field: field.into(), message: message.to_string() }
}

/// A number in a file: a string with an exact rational, or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Int(i64),
}

impl Num {
    fn from_rational(r: &Rational) -> Self {
        Num::Text(format_rational(r))
    }

    fn parse(&self, field: &str) -> Result<Rational, FormatError> {
        match self {
            Num::Int(i) => Ok(Rational::from_integer((*i).into())),
            Num::Text(s) => parse_rational(s).map_err(|e| field_err(field, format!("{:?}: {}", e.input, e.reason))),
        }
    }
}

type NumMatrix = Vec<Vec<Num>>;
type NumMap = Vec<[Num; 2]>;

fn matrix_in(m: &NumMatrix, field: &str) -> Result<Matrix, FormatError> {
    let rows = m
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter().enumerate().map(|(c, x)| x.parse(&format!("{field}[{r}][{c}]"))).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::new(rows).map_err(|e| field_err(field, e))
}

fn matrix_out(m: &Matrix) -> NumMatrix {
    m.to_rows().iter().map(|row| row.iter().map(Num::from_rational).collect()).collect()
}

fn map_in(m: &NumMap, field: &str) -> Result<PiecewiseLinear, FormatError> {
    let points = m
        .iter()
        .enumerate()
        .map(|(k, [x, y])| Ok((x.parse(&format!("{field}[{k}][0]"))?, y.parse(&format!("{field}[{k}][1]"))?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    PiecewiseLinear::new(points).map_err(|e| field_err(field, e))
}

fn map_out(m: &PiecewiseLinear) -> NumMap {
    m.breakpoints().iter().map(|(x, y)| [Num::from_rational(x), Num::from_rational(y)]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GameFile {
    Bimatrix { man: String, woman: String, u: NumMatrix, v: NumMatrix },
    ZeroSum { man: String, woman: String, g: NumMatrix, resolution: Num },
    StrictlyCompetitive { man: String, woman: String, g: NumMatrix, f: NumMap, h: NumMap, resolution: Num },
    Potential { man: String, woman: String, u: NumMatrix, v: NumMatrix, phi: NumMatrix },
    Transfer { man: String, woman: String, t_min: Num, t_max: Num, step: Num, f_u: NumMap, f_v: NumMap },
    Repeated { man: String, woman: String, u: NumMatrix, v: NumMatrix, resolution: Num },
}

impl GameFile {
    fn couple(&self) -> (&str, &str) {
        match self {
            GameFile::Bimatrix { man, woman, .. }
            | GameFile::ZeroSum { man, woman, .. }
            | GameFile::StrictlyCompetitive { man, woman, .. }
            | GameFile::Potential { man, woman, .. }
            | GameFile::Transfer { man, woman, .. }
            | GameFile::Repeated { man, woman, .. } => (man, woman),
        }
    }

    fn build(&self, at: &str) -> Result<Game, FormatError> {
        let f = |name: &str| format!("{at}.{name}");
        let game: Result<Game, GameError> = match self {
            GameFile::Bimatrix { u, v, .. } => Game::bimatrix(matrix_in(u, &f("u"))?, matrix_in(v, &f("v"))?),
            GameFile::ZeroSum { g, resolution, .. } => {
                Game::zero_sum(matrix_in(g, &f("g"))?, resolution.parse(&f("resolution"))?)
            }
            GameFile::StrictlyCompetitive { g, f: fm, h, resolution, .. } => Game::strictly_competitive(
                matrix_in(g, &f("g"))?,
                map_in(fm, &f("f"))?,
                map_in(h, &f("h"))?,
                resolution.parse(&f("resolution"))?,
            ),
            GameFile::Potential { u, v, phi, .. } => {
                Game::potential(matrix_in(u, &f("u"))?, matrix_in(v, &f("v"))?, matrix_in(phi, &f("phi"))?)
            }
            GameFile::Transfer { t_min, t_max, step, f_u, f_v, .. } => Game::transfer(
                t_min.parse(&f("t_min"))?,
                t_max.parse(&f("t_max"))?,
                step.parse(&f("step"))?,
                map_in(f_u, &f("f_u"))?,
                map_in(f_v, &f("f_v"))?,
            ),
            GameFile::Repeated { u, v, resolution, .. } => {
                Game::repeated(matrix_in(u, &f("u"))?, matrix_in(v, &f("v"))?, resolution.parse(&f("resolution"))?)
            }
        };
        game.map_err(|e| field_err(at, e))
    }

    fn describe(game: &Game, man: &str, woman: &str) -> Self {
        let (man, woman) = (man.to_string(), woman.to_string());
        let n = Num::from_rational;
        match game.source() {
            GameSource::Bimatrix { u, v } => GameFile::Bimatrix { man, woman, u: matrix_out(u), v: matrix_out(v) },
            GameSource::ZeroSum { g, resolution } => {
                GameFile::ZeroSum { man, woman, g: matrix_out(g), resolution: n(&resolution) }
            }
            GameSource::StrictlyCompetitive { g, f, h, resolution } => GameFile::StrictlyCompetitive {
                man,
                woman,
                g: matrix_out(g),
                f: map_out(f),
                h: map_out(h),
                resolution: n(&resolution),
            },
            GameSource::Potential { u, v, phi } => {
                GameFile::Potential { man, woman, u: matrix_out(u), v: matrix_out(v), phi: matrix_out(phi) }
            }
            GameSource::Transfer { t_min, t_max, step, f_u, f_v } => GameFile::Transfer {
                man,
                woman,
                t_min: n(t_min),
                t_max: n(t_max),
                step: n(step),
                f_u: map_out(f_u),
                f_v: map_out(f_v),
            },
            GameSource::Repeated { u, v, resolution } => {
                GameFile::Repeated { man, woman, u: matrix_out(u), v: matrix_out(v), resolution: n(resolution) }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub men: Vec<String>,
    pub women: Vec<String>,
    pub irp: BTreeMap<String, Num>,
    pub games: Vec<GameFile>,
}

impl InstanceFile {
    pub fn build(&self) -> Result<Instance, FormatError> {
        let irp = |name: &String| -> Result<Rational, FormatError> {
            let field = format!("irp.{name}");
            self.irp.get(name).ok_or_else(|| field_err(&field, "missing"))?.parse(&field)
        };
        let irp_men = self.men.iter().map(irp).collect::<Result<Vec<_>, _>>()?;
        let irp_women = self.women.iter().map(irp).collect::<Result<Vec<_>, _>>()?;
        if let Some(stray) = self.irp.keys().find(|k| !self.men.contains(k) && !self.women.contains(k)) {
            return Err(field_err(format!("irp.{stray}"), "not an agent"));
        }
        let mut table: Vec<Vec<Option<Game>>> = vec![vec![None; self.women.len()]; self.men.len()];
        for (k, entry) in self.games.iter().enumerate() {
            let at = format!("games[{k}]");
            let (man, woman) = entry.couple();
            let i = self
                .men
                .iter()
                .position(|m| m == man)
                .ok_or_else(|| field_err(format!("{at}.man"), format!("unknown man {man:?}")))?;
            let j = self
                .women
                .iter()
                .position(|w| w == woman)
                .ok_or_else(|| field_err(format!("{at}.woman"), format!("unknown woman {woman:?}")))?;
            if table[i][j].is_some() {
                return Err(field_err(at, format!("second game for couple ({man}, {woman})")));
            }
            table[i][j] = Some(entry.build(&at)?);
        }
        let mut games = Vec::with_capacity(self.men.len());
        for (i, row) in table.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, g) in row.into_iter().enumerate() {
                out.push(g.ok_or_else(|| {
                    field_err("games", format!("no game for couple ({}, {})", self.men[i], self.women[j]))
                })?);
            }
            games.push(out);
        }
        Instance::new(self.men.clone(), self.women.clone(), irp_men, irp_women, games)
            .map_err(|e: InstanceError| field_err("instance", e))
    }

    pub fn describe(inst: &Instance) -> Self {
        let mut irp = BTreeMap::new();
        for (i, m) in inst.men().iter().enumerate() {
            irp.insert(m.clone(), Num::from_rational(inst.irp_man(i)));
        }
        for (j, w) in inst.women().iter().enumerate() {
            irp.insert(w.clone(), Num::from_rational(inst.irp_woman(j)));
        }
        let games = inst.games().map(|(i, j, g)| GameFile::describe(g, &inst.men()[i], &inst.women()[j])).collect();
        Self { men: inst.men().to_vec(), women: inst.women().to_vec(), irp, games }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    serde_json::from_str::<InstanceFile>(text)?.build()
}

pub fn write_instance(inst: &Instance) -> String {
    pretty(&InstanceFile::describe(inst))
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

/// How a couple plays, in a profile file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PlayFile {
    Cell([usize; 2]),
    Level(Num),
    Transfer(Num),
    Point([Num; 2]),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleFile {
    pub man: String,
    pub woman: String,
    pub play: PlayFile,
    /// Informational on output; checked against the game when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Num>,
}

/// A matching profile: the couples and their plays; everyone else is single.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub couples: Vec<CoupleFile>,
}

fn resolve_play(game: &Game, play: &PlayFile, at: &str) -> Result<Contract, FormatError> {
    let from_level = |level: &Rational| {
        game.menu()
            .iter()
            .find(|c| game.level_of(c).as_ref() == Some(level))
            .cloned()
            .ok_or_else(|| field_err(format!("{at}.play"), format!("level {level} is not on the menu")))
    };
    match play {
        PlayFile::Cell([row, col]) => {
            game.contract_for(&Play::Cell { row: *row, col: *col }).map_err(|e| field_err(format!("{at}.play"), e))
        }
        PlayFile::Level(l) => from_level(&l.parse(&format!("{at}.play.level"))?),
        PlayFile::Transfer(t) => from_level(&t.parse(&format!("{at}.play.transfer"))?),
        PlayFile::Point([u, v]) => {
            let play = Play::Point {
                u: u.parse(&format!("{at}.play.point[0]"))?,
                v: v.parse(&format!("{at}.play.point[1]"))?,
            };
            game.contract_for(&play).map_err(|e| field_err(format!("{at}.play"), e))
        }
    }
}

impl ProfileFile {
    pub fn build(&self, inst: &Instance) -> Result<MatchingProfile, FormatError> {
        let mut profile = MatchingProfile::for_instance(inst);
        for (k, c) in self.couples.iter().enumerate() {
            let at = format!("couples[{k}]");
            let i = inst
                .index_of(crate::Side::Men, &c.man)
                .ok_or_else(|| field_err(format!("{at}.man"), format!("unknown man {:?}", c.man)))?;
            let j = inst
                .index_of(crate::Side::Women, &c.woman)
                .ok_or_else(|| field_err(format!("{at}.woman"), format!("unknown woman {:?}", c.woman)))?;
            if profile.partner_of_man(i).is_some() || profile.partner_of_woman(j).is_some() {
                return Err(field_err(at, "agent matched twice"));
            }
            let contract = resolve_play(inst.game(i, j), &c.play, &at)?;
            for (name, given, actual) in [("u", &c.u, &contract.u), ("v", &c.v, &contract.v)] {
                if let Some(x) = given {
                    if x.parse(&format!("{at}.{name}"))? != *actual {
                        return Err(field_err(format!("{at}.{name}"), format!("the play pays {actual}")));
                    }
                }
            }
            profile.match_couple(i, j, contract);
        }
        profile.validate(inst).map_err(|e: ProfileError| field_err("couples", e))?;
        Ok(profile)
    }

    pub fn describe(inst: &Instance, profile: &MatchingProfile) -> Self {
        let couples = profile
            .couples()
            .map(|(i, j, c)| {
                let play = match &c.play {
                    Play::Cell { row, col } => PlayFile::Cell([*row, *col]),
                    Play::Level { level, .. } => PlayFile::Level(Num::from_rational(level)),
                    Play::Transfer { t } => PlayFile::Transfer(Num::from_rational(t)),
                    Play::Point { u, v } => PlayFile::Point([Num::from_rational(u), Num::from_rational(v)]),
                };
                CoupleFile {
                    man: inst.men()[i].clone(),
                    woman: inst.women()[j].clone(),
                    play,
                    u: Some(Num::from_rational(&c.u)),
                    v: Some(Num::from_rational(&c.v)),
                }
            })
            .collect();
        Self { couples }
    }
}

pub fn parse_profile(text: &str, inst: &Instance) -> Result<MatchingProfile, FormatError> {
    serde_json::from_str::<ProfileFile>(text)?.build(inst)
}

pub fn write_profile(inst: &Instance, profile: &MatchingProfile) -> String {
    pretty(&ProfileFile::describe(inst, profile))
}

/// A game-tree node: a leaf with one payoff per player, or a decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum NodeFile {
    Leaf { leaf: Vec<Num> },
    Decision { player: usize, children: Vec<NodeFile> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub players: usize,
    pub root: NodeFile,
}

fn node_spec(node: &NodeFile, at: &str) -> Result<TreeSpec, FormatError> {
    Ok(match node {
        NodeFile::Leaf { leaf } => TreeSpec::Leaf(
            leaf.iter().enumerate().map(|(k, x)| x.parse(&format!("{at}.leaf[{k}]"))).collect::<Result<_, _>>()?,
        ),
        NodeFile::Decision { player, children } => TreeSpec::Decision {
            player: *player,
            children: children
                .iter()
                .enumerate()
                .map(|(k, c)| node_spec(c, &format!("{at}.children[{k}]")))
                .collect::<Result<_, _>>()?,
        },
    })
}

pub fn parse_tree(text: &str) -> Result<GameTree, FormatError> {
    let file: TreeFile = serde_json::from_str(text)?;
    let spec = node_spec(&file.root, "root")?;
    GameTree::from_spec(&spec, file.players).map_err(|e: TreeError| field_err("root", e))
}

/// Grid of prices or net transfers in a model file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub lo: Num,
    pub hi: Num,
    pub step: Num,
}

impl GridFile {
    fn build(&self) -> Result<TransferGrid, FormatError> {
        Ok(TransferGrid {
            lo: self.lo.parse("grid.lo")?,
            hi: self.hi.parse("grid.hi")?,
            step: self.step.parse("grid.step")?,
        })
    }
}

/// Stable-marriage model: full strict preference lists by name, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinalFile {
    pub men: Vec<String>,
    pub women: Vec<String>,
    pub prefs: BTreeMap<String, Vec<String>>,
}

/// Assignment-game model: sellers (men) with costs, buyers (women) with
/// valuations indexed `[seller][buyer]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapleyShubikFile {
    pub sellers: Vec<String>,
    pub buyers: Vec<String>,
    pub costs: Vec<Num>,
    pub valuations: Vec<Vec<Num>>,
    pub grid: GridFile,
}

/// Transfer model with utility maps indexed `[man][woman]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaleDemangeFile {
    pub men: Vec<String>,
    pub women: Vec<String>,
    pub f: Vec<Vec<NumMap>>,
    pub h: Vec<Vec<NumMap>>,
    pub grid: GridFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractFile {
    pub name: String,
    pub man: String,
    pub woman: String,
}

/// One-to-one contracts model; unlisted contracts are unacceptable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractsFile {
    pub men: Vec<String>,
    pub women: Vec<String>,
    pub contracts: Vec<ContractFile>,
    pub prefs: BTreeMap<String, Vec<String>>,
}

/// Which classical model a model file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ordinal,
    ShapleyShubik,
    GaleDemange,
    Contracts,
}

fn adapter_err(e: AdapterError) -> FormatError {
    field_err("model", e)
}

fn ranks(
    names: &[String],
    prefs: &BTreeMap<String, Vec<String>>,
    partners: &[String],
    side: &str,
) -> Result<Vec<Vec<usize>>, FormatError> {
    names
        .iter()
        .map(|a| {
            let field = format!("prefs.{a}");
            let list = prefs.get(a).ok_or_else(|| field_err(&field, format!("missing list for {side} {a:?}")))?;
            list.iter()
                .map(|p| {
                    partners
                        .iter()
                        .position(|q| q == p)
                        .ok_or_else(|| field_err(&field, format!("unknown partner {p:?}")))
                })
                .collect()
        })
        .collect()
}

/// Reads a model file and converts it into an instance.
pub fn adapt_model(kind: ModelKind, text: &str) -> Result<Instance, FormatError> {
    let named = |inst: Instance, men: &[String], women: &[String]| {
        inst.renamed(men.to_vec(), women.to_vec()).map_err(|e| field_err("model", e))
    };
    match kind {
        ModelKind::Ordinal => {
            let f: OrdinalFile = serde_json::from_str(text)?;
            if let Some(stray) = f.prefs.keys().find(|k| !f.men.contains(k) && !f.women.contains(k)) {
                return Err(field_err(format!("prefs.{stray}"), "not an agent"));
            }
            let pm = ranks(&f.men, &f.prefs, &f.women, "man")?;
            let pw = ranks(&f.women, &f.prefs, &f.men, "woman")?;
            named(from_ordinal(&pm, &pw).map_err(adapter_err)?, &f.men, &f.women)
        }
        ModelKind::ShapleyShubik => {
            let f: ShapleyShubikFile = serde_json::from_str(text)?;
            let costs = f
                .costs
                .iter()
                .enumerate()
                .map(|(k, c)| c.parse(&format!("costs[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let vals = f
                .valuations
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter().enumerate().map(|(j, x)| x.parse(&format!("valuations[{i}][{j}]"))).collect()
                })
                .collect::<Result<Vec<Vec<_>>, _>>()?;
            let inst = from_shapley_shubik(&costs, &vals, &f.grid.build()?).map_err(adapter_err)?;
            named(inst, &f.sellers, &f.buyers)
        }
        ModelKind::GaleDemange => {
            let f: GaleDemangeFile = serde_json::from_str(text)?;
            let maps = |t: &Vec<Vec<NumMap>>, name: &str| {
                t.iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter().enumerate().map(|(j, m)| map_in(m, &format!("{name}[{i}][{j}]"))).collect()
                    })
                    .collect::<Result<Vec<Vec<_>>, _>>()
            };
            let inst =
                from_gale_demange(&maps(&f.f, "f")?, &maps(&f.h, "h")?, &f.grid.build()?).map_err(adapter_err)?;
            named(inst, &f.men, &f.women)
        }
        ModelKind::Contracts => {
            let f: ContractsFile = serde_json::from_str(text)?;
            let model = ContractsModel {
                men: f.men,
                women: f.women,
                contracts: f
                    .contracts
                    .into_iter()
                    .map(|c| NamedContract { name: c.name, man: c.man, woman: c.woman })
                    .collect(),
                prefs: f.prefs.into_iter().collect(),
            };
            Ok(from_hatfield_milgrom(model).map_err(adapter_err)?.0)
        }
    }
}
