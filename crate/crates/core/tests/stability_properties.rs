use matchgame::game::Matrix;
use matchgame::oracle::{enumerate_stable, for_each_profile, DEFAULT_CAP};
use matchgame::random::{bimatrix_instance, seeded};
use matchgame::rational::{int, rat};
use matchgame::stability::{
    check, find_blocking_pair, is_externally_stable, is_internally_stable, is_nash_stable, is_stable_variant, Notion,
    StabilityError, Variant, Witness,
};
use matchgame::{Game, Instance, MatchingProfile, Rational, Side};
use proptest::prelude::*;

fn assert_witness_sound(inst: &Instance, p: &MatchingProfile, eps: &Rational, w: &Witness) {
    match w {
        Witness::BelowIrp { side, agent, payoff, irp } => {
            assert_eq!(*payoff, p.payoff(inst, *side, *agent));
            assert_eq!(irp, inst.irp(*side, *agent));
            assert!(payoff < irp);
        }
        Witness::BlockingPair { man, woman, contract } => {
            assert_ne!(p.partner_of_man(*man), Some(*woman));
            assert!(inst.game(*man, *woman).menu().contains(contract));
            assert!(contract.u > p.payoff_of_man(inst, *man) + eps);
            assert!(contract.v > p.payoff_of_woman(inst, *woman) + eps);
        }
        Witness::Deviation { .. } => panic!("external checks never report deviations"),
    }
}

#[test]
fn witnesses_are_sound_and_verdicts_agree_with_brute_force() {
    let mut rng = seeded(31);
    for _ in 0..30 {
        let inst = bimatrix_instance(&mut rng, 3, 4);
        for eps in [int(0), rat(1, 2), int(2)] {
            for_each_profile(&inst, DEFAULT_CAP, |p| {
                let report = is_externally_stable(&inst, p, &eps).unwrap();
                // the definition, spelled out
                let ir = [Side::Men, Side::Women]
                    .iter()
                    .all(|&s| (0..inst.len(s)).all(|a| p.payoff(&inst, s, a) >= *inst.irp(s, a)));
                let no_block = inst.games().all(|(i, j, g)| {
                    p.partner_of_man(i) == Some(j)
                        || !g
                            .menu()
                            .iter()
                            .any(|c| c.u > p.payoff_of_man(&inst, i) + &eps && c.v > p.payoff_of_woman(&inst, j) + &eps)
                });
                assert_eq!(report.holds, ir && no_block);
                assert_eq!(report.holds, report.witness.is_none());
                if let Some(w) = &report.witness {
                    assert_witness_sound(&inst, p, &eps, w);
                }
                true
            })
            .unwrap();
        }
    }
}

#[test]
fn larger_margins_never_break_stability() {
    let mut rng = seeded(32);
    for _ in 0..30 {
        let inst = bimatrix_instance(&mut rng, 3, 4);
        let margins = [int(0), rat(1, 4), int(1), int(3)];
        for_each_profile(&inst, DEFAULT_CAP, |p| {
            let verdicts: Vec<bool> =
                margins.iter().map(|e| is_externally_stable(&inst, p, e).unwrap().holds).collect();
            assert!(verdicts.windows(2).all(|w| !w[0] || w[1]), "{verdicts:?}");
            true
        })
        .unwrap();
    }
}

#[test]
fn external_implies_unilateral_implies_weak() {
    let mut rng = seeded(33);
    let mut unilateral_only = 0;
    for _ in 0..40 {
        let inst = bimatrix_instance(&mut rng, 3, 6);
        for_each_profile(&inst, DEFAULT_CAP, |p| {
            let ext = is_externally_stable(&inst, p, &int(0)).unwrap().holds;
            let uni = is_stable_variant(&inst, p, Variant::Unilateral).unwrap().holds;
            let weak = is_stable_variant(&inst, p, Variant::Weak).unwrap().holds;
            assert!(!ext || uni);
            assert!(!uni || weak);
            if uni && !ext {
                unilateral_only += 1;
            }
            true
        })
        .unwrap();
    }
    assert!(unilateral_only > 0, "the restricted notion is strictly weaker on some profile");
}

fn prisoners_market(n: usize, irp: i64) -> Instance {
    let pd = Game::bimatrix(Matrix::from_ints(&[[3, 0], [4, 1]]), Matrix::from_ints(&[[3, 4], [0, 1]])).unwrap();
    let games = (0..n).map(|_| (0..n).map(|_| pd.clone()).collect()).collect();
    Instance::anonymous(vec![int(irp); n], vec![int(irp); n], games).unwrap()
}

#[test]
fn nash_play_is_never_externally_stable_when_equilibria_are_dominated() {
    // The only equilibrium of the common game pays (1, 1) and is
    // dominated by (3, 3): any couple playing it is blocked by a man and a
    // woman from different couples as soon as two couples exist.
    for n in 2..=3 {
        let inst = prisoners_market(n, 0);
        let zero = int(0);
        let external = enumerate_stable(&inst, &zero, Notion::External0, DEFAULT_CAP).unwrap();
        assert!(!external.is_empty());
        for p in &external {
            assert!(!is_nash_stable(&inst, p).unwrap().holds || p.matched_count() < 2);
        }
        // ... but external and internal stability together are attainable
        let stable = enumerate_stable(&inst, &zero, Notion::Internal, DEFAULT_CAP).unwrap();
        assert!(!stable.is_empty());
    }
}

#[test]
fn internal_stability_requires_external_stability() {
    let inst = prisoners_market(2, 0);
    let singles = MatchingProfile::for_instance(&inst);
    assert!(matches!(is_internally_stable(&inst, &singles, &int(0)), Err(StabilityError::NotExternallyStable(_))));
    assert!(matches!(find_blocking_pair(&inst, &singles, &int(-1)), Err(StabilityError::NegativeEps(_))));
}

#[test]
fn dispatch_names_match_notions() {
    let inst = prisoners_market(1, 0);
    let singles = MatchingProfile::for_instance(&inst);
    for notion in [Notion::IndividualRationality, Notion::External0, Notion::Unilateral, Notion::Weak, Notion::Nash] {
        let r = check(&inst, &singles, notion, &int(0)).unwrap();
        assert_eq!(r.holds, notion != Notion::External0, "{notion}");
    }
    let r = check(&inst, &singles, Notion::ExternalEps, &int(1)).unwrap();
    let blocking = &inst.game(0, 0).menu()[0];
    assert_eq!(r.to_string(), format!("ExternalEps: fails (man 0 and woman 0 block with {blocking})"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn reports_carry_witness_exactly_when_failing(seed in any::<u64>()) {
        let inst = bimatrix_instance(&mut seeded(seed), 2, 4);
        for_each_profile(&inst, DEFAULT_CAP, |p| {
            for notion in [Notion::External0, Notion::Weak, Notion::Unilateral, Notion::Nash] {
                let r = check(&inst, p, notion, &int(0)).unwrap();
                assert_eq!(r.holds, r.witness.is_none());
            }
            true
        }).unwrap();
    }
}
