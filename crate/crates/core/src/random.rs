//! Seeded generators of random games, instances and trees, for property
//! tests and benchmarks. Every generator draws only from the given RNG, so a
//! fixed seed reproduces the same objects.

use crate::extensive::{GameTree, TreeSpec};
use crate::game::{Game, GameClass, Matrix};
use crate::instance::Instance;
use crate::rational::{int, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

/// Reproducible RNG for a seed.
pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Uniform rational `n / d` in `[lo, hi]` with `1 <= d <= max_den`.
pub fn rational_in(rng: &mut impl Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    Rational::new(rng.gen_range(lo * d..=hi * d).into(), d.into())
}

pub fn int_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Matrix {
    let rows = (0..rows).map(|_| (0..cols).map(|_| int(rng.gen_range(lo..=hi))).collect()).collect();
    Matrix::new(rows).expect("nonempty rectangular")
}

pub fn rational_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: i64, hi: i64, max_den: i64) -> Matrix {
    let rows = (0..rows).map(|_| (0..cols).map(|_| rational_in(rng, lo, hi, max_den)).collect()).collect();
    Matrix::new(rows).expect("nonempty rectangular")
}

/// Bimatrix game with at most `max_cells` cells and payoffs in `[-10, 10]`
/// (denominators up to 4).
pub fn bimatrix_game(rng: &mut impl Rng, max_cells: usize) -> Game {
    let rows = rng.gen_range(1..=max_cells.clamp(1, 3));
    let cols = rng.gen_range(1..=(max_cells / rows).clamp(1, 3));
    let u = rational_matrix(rng, rows, cols, -10, 10, 4);
    let v = rational_matrix(rng, rows, cols, -10, 10, 4);
    Game::bimatrix(u, v).expect("same shape")
}

/// Zero-sum game with an integer matrix of at most 3×3 entries in `[-5, 5]`.
pub fn zero_sum_matrix(rng: &mut impl Rng) -> Matrix {
    let (rows, cols) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    int_matrix(rng, rows, cols, -5, 5)
}

/// Exact potential game: `u = phi + a(col)`, `v = phi + b(row)`, so every
/// unilateral payoff change equals the potential change.
pub fn potential_game(rng: &mut impl Rng) -> Game {
    let (rows, cols) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let phi = int_matrix(rng, rows, cols, -4, 4);
    let a: Vec<i64> = (0..cols).map(|_| rng.gen_range(-3..=3)).collect();
    let b: Vec<i64> = (0..rows).map(|_| rng.gen_range(-3..=3)).collect();
    let shift = |by_col: bool| {
        let rows_v = (0..rows)
            .map(|r| (0..cols).map(|c| phi.get(r, c) + int(if by_col { a[c] } else { b[r] })).collect())
            .collect();
        Matrix::new(rows_v).expect("rectangular")
    };
    Game::potential(shift(true), shift(false), phi.clone()).expect("exact potential")
}

/// 2×2 stage game with integer payoffs in `[-3, 3]`.
pub fn stage_game(rng: &mut impl Rng) -> (Matrix, Matrix) {
    (int_matrix(rng, 2, 2, -3, 3), int_matrix(rng, 2, 2, -3, 3))
}

/// Random game of `class` (the classes used by the generators of whole
/// instances): bimatrix, zero-sum on a half-unit grid, potential, repeated
/// on the integer lattice.
pub fn game_of_class(rng: &mut impl Rng, class: GameClass) -> Game {
    match class {
        GameClass::ZeroSum => Game::zero_sum(zero_sum_matrix(rng), Rational::new(1.into(), 2.into())).expect("valid"),
        GameClass::Potential => potential_game(rng),
        GameClass::RepeatedStage => {
            let (u, v) = stage_game(rng);
            Game::repeated(u, v, int(1)).expect("small menu")
        }
        _ => bimatrix_game(rng, 9),
    }
}

/// Instance with `n_m` men and `n_w` women, all couples playing games of
/// `class`, IRPs in `[irp_lo, irp_hi]`.
pub fn instance_of_class(
    rng: &mut impl Rng,
    class: GameClass,
    n_m: usize,
    n_w: usize,
    irp_lo: i64,
    irp_hi: i64,
) -> Instance {
    let irp_m = (0..n_m).map(|_| int(rng.gen_range(irp_lo..=irp_hi))).collect();
    let irp_w = (0..n_w).map(|_| int(rng.gen_range(irp_lo..=irp_hi))).collect();
    let games = (0..n_m).map(|_| (0..n_w).map(|_| game_of_class(rng, class)).collect()).collect();
    Instance::anonymous(irp_m, irp_w, games).expect("consistent shapes")
}

/// Bimatrix instance with up to `max_agents` per side, menus of at most
/// `max_cells` contracts, payoffs and IRPs in `[-10, 10]`.
pub fn bimatrix_instance(rng: &mut impl Rng, max_agents: usize, max_cells: usize) -> Instance {
    let n_m = rng.gen_range(1..=max_agents);
    let n_w = rng.gen_range(1..=max_agents);
    let irp_m = (0..n_m).map(|_| rational_in(rng, -10, 10, 2)).collect();
    let irp_w = (0..n_w).map(|_| rational_in(rng, -10, 10, 2)).collect();
    let games = (0..n_m).map(|_| (0..n_w).map(|_| bimatrix_game(rng, max_cells)).collect()).collect();
    Instance::anonymous(irp_m, irp_w, games).expect("consistent shapes")
}

/// Complete strict preference lists for `n_m` men over `n_w` women and
/// vice versa.
pub fn ordinal_prefs(rng: &mut impl Rng, n_m: usize, n_w: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let lists = |rng: &mut dyn rand::RngCore, n: usize, over: usize| {
        (0..n)
            .map(|_| {
                let mut l: Vec<usize> = (0..over).collect();
                l.shuffle(rng);
                l
            })
            .collect()
    };
    let men = lists(rng, n_m, n_w);
    let women = lists(rng, n_w, n_m);
    (men, women)
}

/// Perfect-information tree with `players` players, depth at most
/// `max_depth` decision levels, at most `max_children` children per
/// decision, and integer payoffs in `[-3, 3]`.
pub fn game_tree(rng: &mut impl Rng, players: usize, max_depth: usize, max_children: usize) -> GameTree {
    fn node(rng: &mut dyn rand::RngCore, players: usize, depth: usize, max_children: usize) -> TreeSpec {
        if depth == 0 || rng.gen_bool(0.3) {
            return TreeSpec::Leaf((0..players).map(|_| int(rng.gen_range(-3..=3))).collect());
        }
        let k = rng.gen_range(1..=max_children);
        TreeSpec::Decision {
            player: rng.gen_range(0..players),
            children: (0..k).map(|_| node(rng, players, depth - 1, max_children)).collect(),
        }
    }
    GameTree::from_spec(&node(rng, players, max_depth, max_children), players).expect("well formed")
}
