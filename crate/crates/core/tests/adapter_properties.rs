use matchgame::adapters::{
    from_hatfield_milgrom, from_ordinal, from_shapley_shubik, ContractsModel, NamedContract, TransferGrid,
};
use matchgame::extensive::{constrained_spe, is_admissible, is_constrained_spe};
use matchgame::format::{parse_instance, parse_profile, write_instance, write_profile};
use matchgame::game::GameClass;
use matchgame::oracle::{enumerate_stable, for_each_profile, DEFAULT_CAP};
use matchgame::propose::run_propose_dispose;
use matchgame::random::{bimatrix_instance, game_tree, instance_of_class, ordinal_prefs, seeded};
use matchgame::rational::int;
use matchgame::stability::{is_externally_stable, Notion};
use matchgame::{MatchingProfile, Play, Rational, Side};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

/// Textbook deferred acceptance with men proposing over complete lists.
fn deferred_acceptance(men: &[Vec<usize>], women: &[Vec<usize>]) -> Vec<Option<usize>> {
    let rank = |j: usize, i: usize| women[j].iter().position(|&m| m == i).unwrap();
    let mut next = vec![0; men.len()];
    let mut held: Vec<Option<usize>> = vec![None; women.len()];
    let mut free: Vec<usize> = (0..men.len()).rev().collect();
    while let Some(i) = free.pop() {
        let Some(&j) = men[i].get(next[i]) else { continue };
        next[i] += 1;
        match held[j] {
            None => held[j] = Some(i),
            Some(k) if rank(j, i) < rank(j, k) => {
                held[j] = Some(i);
                free.push(k);
            }
            Some(_) => free.push(i),
        }
    }
    let mut partner = vec![None; men.len()];
    for (j, h) in held.iter().enumerate() {
        if let Some(i) = h {
            partner[*i] = Some(j);
        }
    }
    partner
}

/// Every classically stable matching, by brute force over injections.
fn classic_stable(men: &[Vec<usize>], women: &[Vec<usize>]) -> BTreeSet<Vec<Option<usize>>> {
    fn go(i: usize, n_w: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for choice in std::iter::once(None).chain((0..n_w).map(Some)) {
            if choice.is_some() && cur[..i].contains(&choice) {
                continue;
            }
            cur[i] = choice;
            go(i + 1, n_w, cur, out);
        }
        cur[i] = None;
    }
    let mut all = Vec::new();
    go(0, women.len(), &mut vec![None; men.len()], &mut all);
    let pos = |list: &[usize], x: usize| list.iter().position(|&y| y == x).unwrap();
    all.into_iter()
        .filter(|mu| {
            let wife = |i: usize| mu[i];
            let husband = |j: usize| (0..men.len()).find(|&i| mu[i] == Some(j));
            (0..men.len()).all(|i| {
                (0..women.len()).all(|j| {
                    let man_prefers = wife(i).is_none_or(|w| pos(&men[i], j) < pos(&men[i], w));
                    let woman_prefers = husband(j).is_none_or(|h| pos(&women[j], i) < pos(&women[j], h));
                    wife(i) == Some(j) || !(man_prefers && woman_prefers)
                })
            })
        })
        .collect()
}

#[test]
fn ordinal_markets_reproduce_classical_stable_matchings() {
    let mut rng = seeded(51);
    for _ in 0..20 {
        let (n_m, n_w) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let (pm, pw) = ordinal_prefs(&mut rng, n_m, n_w);
        let inst = from_ordinal(&pm, &pw).unwrap();
        let stable: BTreeSet<Vec<Option<usize>>> = enumerate_stable(&inst, &int(0), Notion::External0, DEFAULT_CAP)
            .unwrap()
            .iter()
            .map(|p| (0..n_m).map(|i| p.partner_of_man(i)).collect())
            .collect();
        assert_eq!(stable, classic_stable(&pm, &pw));
        let (p, _) = run_propose_dispose(&inst, &int(1), Side::Men).unwrap();
        let partners: Vec<Option<usize>> = (0..n_m).map(|i| p.partner_of_man(i)).collect();
        assert_eq!(partners, deferred_acceptance(&pm, &pw), "men {pm:?} women {pw:?}");
    }
}

#[test]
fn assignment_markets_are_stable_exactly_at_core_prices() {
    let mut rng = seeded(52);
    let grid = TransferGrid { lo: int(0), hi: int(8), step: int(1) };
    for _ in 0..15 {
        let costs: Vec<i64> = (0..2).map(|_| rng.gen_range(0..=3)).collect();
        let vals: Vec<Vec<i64>> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(2..=8)).collect()).collect();
        let inst = from_shapley_shubik(
            &costs.iter().map(|&c| int(c)).collect::<Vec<_>>(),
            &vals.iter().map(|r| r.iter().map(|&h| int(h)).collect()).collect::<Vec<_>>(),
            &grid,
        )
        .unwrap();
        for eps in [int(0), int(1)] {
            for_each_profile(&inst, DEFAULT_CAP, |p| {
                // seller i at price t earns t - c_i, buyer j keeps h_ij - t
                let price = |i: usize| match p.contract_of_man(i).map(|c| &c.play) {
                    Some(Play::Transfer { t }) => Some(t.clone()),
                    None => None,
                    other => panic!("unexpected play {other:?}"),
                };
                let seller: Vec<Rational> = (0..2).map(|i| price(i).map_or(int(0), |t| t - int(costs[i]))).collect();
                let buyer: Vec<Rational> = (0..2)
                    .map(|j| {
                        (0..2)
                            .find(|&i| p.partner_of_man(i) == Some(j))
                            .map_or(int(0), |i| int(vals[i][j]) - price(i).unwrap())
                    })
                    .collect();
                let rational = seller.iter().chain(&buyer).all(|x| *x >= int(0));
                let unblocked = (0..2).all(|i| {
                    (0..2).all(|j| {
                        p.partner_of_man(i) == Some(j)
                            || !(0..=8).any(|q| {
                                int(q - costs[i]) > &seller[i] + &eps && int(vals[i][j] - q) > &buyer[j] + &eps
                            })
                    })
                });
                let report = is_externally_stable(&inst, p, &eps).unwrap();
                assert_eq!(report.holds, rational && unblocked, "costs {costs:?} vals {vals:?}");
                true
            })
            .unwrap();
        }
    }
}

/// Random one-to-one contracts model with at most one contract per couple
/// and random acceptable sets.
fn random_model(rng: &mut impl Rng) -> ContractsModel {
    let men: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("m{i}")).collect();
    let women: Vec<String> = (0..rng.gen_range(1..=3)).map(|j| format!("w{j}")).collect();
    let mut contracts = Vec::new();
    for m in &men {
        for w in &women {
            if rng.gen_bool(0.7) {
                contracts.push(NamedContract { name: format!("{m}{w}"), man: m.clone(), woman: w.clone() });
            }
        }
    }
    let mut prefs = Vec::new();
    for agent in men.iter().chain(&women) {
        let mut mine: Vec<String> =
            contracts.iter().filter(|c| &c.man == agent || &c.woman == agent).map(|c| c.name.clone()).collect();
        mine.shuffle(rng);
        mine.truncate(rng.gen_range(0..=mine.len()));
        prefs.push((agent.clone(), mine));
    }
    ContractsModel { men, women, contracts, prefs }
}

/// Stable allocations straight from the preference lists.
fn stable_allocations(model: &ContractsModel) -> BTreeSet<Vec<usize>> {
    let list = |agent: &str| &model.prefs.iter().find(|(a, _)| a == agent).unwrap().1;
    let rank = |agent: &str, k: usize| list(agent).iter().position(|n| *n == model.contracts[k].name);
    // `a` strictly prefers contract k to holding `held`
    let prefers = |agent: &str, k: usize, held: Option<usize>| match (rank(agent, k), held) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(r), Some(h)) => rank(agent, h).is_some_and(|rh| r < rh),
    };
    let n = model.contracts.len();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        let holder = |agent: &str| -> Vec<usize> {
            let c = &model.contracts;
            chosen.iter().copied().filter(|&k| c[k].man == agent || c[k].woman == agent).collect()
        };
        let agents = model.men.iter().chain(&model.women);
        let one_each = agents.clone().all(|a| holder(a).len() <= 1);
        let acceptable = chosen.iter().all(|&k| {
            let c = &model.contracts[k];
            rank(&c.man, k).is_some() && rank(&c.woman, k).is_some()
        });
        if !one_each || !acceptable {
            continue;
        }
        let blocked = (0..n).any(|k| {
            let c = &model.contracts[k];
            !chosen.contains(&k)
                && prefers(&c.man, k, holder(&c.man).first().copied())
                && prefers(&c.woman, k, holder(&c.woman).first().copied())
        });
        if !blocked {
            out.insert(chosen);
        }
    }
    out
}

#[test]
fn contract_markets_with_one_contract_per_couple_match_direct_stability() {
    let mut rng = seeded(53);
    for _ in 0..40 {
        let model = random_model(&mut rng);
        let expected = stable_allocations(&model);
        let (inst, market) = from_hatfield_milgrom(model).unwrap();
        let found: BTreeSet<Vec<usize>> = enumerate_stable(&inst, &int(0), Notion::External0, DEFAULT_CAP)
            .unwrap()
            .iter()
            .map(|p| {
                let mut a = market.allocation(p).expect("stable profiles agree on real contracts");
                a.sort_unstable();
                a
            })
            .collect();
        assert_eq!(found, expected);
    }
}

#[test]
fn constrained_spe_exists_exactly_on_admissible_trees() {
    let mut rng = seeded(54);
    let (mut with, mut without) = (0, 0);
    for _ in 0..120 {
        let players = rng.gen_range(1..=3);
        let tree = game_tree(&mut rng, players, 3, 3);
        let outs: Vec<Rational> = (0..players).map(|_| int(rng.gen_range(-3..=1))).collect();
        let admissible = is_admissible(&tree, &outs).unwrap();
        match constrained_spe(&tree, &outs).unwrap() {
            Some(profile) => {
                with += 1;
                assert!(admissible);
                assert!(is_constrained_spe(&tree, &profile, &outs));
                let leaf = tree.outcome(&profile, tree.root());
                assert!(tree.payoffs(leaf).iter().zip(&outs).all(|(p, o)| p >= o));
            }
            None => {
                without += 1;
                assert!(!admissible);
            }
        }
    }
    assert!(with > 20 && without > 10, "{with} admissible, {without} not");
}

#[test]
fn instance_and_profile_files_round_trip() {
    let mut rng = seeded(55);
    for class in [GameClass::FiniteBimatrix, GameClass::ZeroSum, GameClass::Potential, GameClass::RepeatedStage] {
        for _ in 0..10 {
            let inst = instance_of_class(&mut rng, class, 2, 3, -2, 1);
            let text = write_instance(&inst);
            let back = parse_instance(&text).unwrap();
            assert_eq!(back, inst);
            assert_eq!(write_instance(&back), text);
            let (p, _) = run_propose_dispose(&inst, &int(1), Side::Women).unwrap();
            let ptext = write_profile(&inst, &p);
            assert_eq!(parse_profile(&ptext, &inst).unwrap(), p);
        }
    }
    let inst = bimatrix_instance(&mut rng, 3, 6);
    let singles = MatchingProfile::for_instance(&inst);
    assert_eq!(parse_profile(&write_profile(&inst, &singles), &inst).unwrap(), singles);
}
