mod common;

use common::*;
use moran_core::microsets::branching_count;
use moran_core::rational::q;
use moran_core::{AxisBox, ContractionMap, IfsSystem, MoranConstruction, Subshift};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn constructions() -> Vec<MoranConstruction> {
    let h = |r, a| ContractionMap::homothety(r, a).unwrap();
    let three = IfsSystem::new(vec![h(q(1, 2), q(0, 1)), h(q(1, 5), q(1, 2)), h(q(1, 7), q(6, 7))]).unwrap();
    let dyadic = IfsSystem::new(vec![h(q(1, 2), q(0, 1)), h(q(1, 2), q(1, 2))]).unwrap();
    let affine = IfsSystem::new(vec![
        ContractionMap::diagonal(q(1, 3), q(1, 2), q(1, 10), q(0, 1)).unwrap(),
        ContractionMap::diagonal(q(1, 2), q(1, 3), q(1, 2), q(2, 3)).unwrap(),
    ])
    .unwrap();
    vec![
        MoranConstruction::full_shift(three).unwrap(),
        MoranConstruction::new(dyadic, Subshift::from_strs(2, &["22"]).unwrap(), AxisBox::unit(1)).unwrap(),
        MoranConstruction::new(affine, Subshift::full(2).unwrap(), AxisBox::unit(2)).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn beta_composition(seed in any::<u64>(), li in 0usize..4, lj in 0usize..4) {
        let mut r = rng(seed);
        let sub = random_subshift(&mut r);
        let tree = tree_of(&sub, 7);
        let i = random_word(&mut r, sub.alphabet(), li);
        let j = random_word(&mut r, sub.alphabet(), lj);
        prop_assert_eq!(check_beta_composition(&tree, &i, &j), Ok(()));
    }

    #[test]
    fn stopping_sets(which in 0usize..3, num in 1i64..8, den_pow in 2u32..6) {
        let mc = &constructions()[which];
        let r = q(num, 2i64.pow(den_pow) * 3);
        prop_assert_eq!(check_stopping_set(mc, &r), Ok(()));
    }

    #[test]
    fn conditional_cocycle(seed in any::<u64>(), li in 0usize..6, lj in 0usize..6) {
        let mut r = rng(seed);
        let mu = random_markov(&mut r);
        let i = random_word(&mut r, mu.alphabet(), li);
        let j = random_word(&mut r, mu.alphabet(), lj);
        prop_assert_eq!(check_cocycle(&mu, &i, &j), Ok(()));
    }

    #[test]
    fn cp_telescoping(seed in any::<u64>(), n in 1usize..=20) {
        let mut r = rng(seed);
        let mu = random_markov(&mut r);
        let path = mu.sample_path(n, &mut r);
        prop_assert_eq!(check_cp_telescoping(&mu, &path), Ok(()));
    }

    #[test]
    fn dedup_closure(seed in any::<u64>()) {
        let sys = random_overlapping_system(&mut rng(seed));
        prop_assert_eq!(check_dedup_closure(&sys, 5), Ok(()));
    }

    #[test]
    fn microsets_of_microsets(seed in any::<u64>(), n in 2usize..6) {
        let sub = random_subshift(&mut rng(seed));
        prop_assert_eq!(check_micro_closure(&sub, n), Ok(()));
    }

    #[test]
    fn branching_is_submultiplicative(seed in any::<u64>(), n in 1usize..6, m in 1usize..6) {
        let sub = random_subshift(&mut rng(seed));
        prop_assert!(branching_count(&sub, n + m) <= branching_count(&sub, n) * branching_count(&sub, m));
    }
}

#[test]
fn equal_languages_compare_equal() {
    let a = Subshift::from_strs(2, &["22"]).unwrap();
    let b = Subshift::from_strs(2, &["22", "122"]).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, Subshift::from_strs(2, &["21"]).unwrap());
}
