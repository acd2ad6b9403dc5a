use proptest::prelude::*;
use qiplab::layout::RegisterLayout;
use qiplab::rng::{haar_unitary, random_density, seeded};
use qiplab::state::{trace_distance, DensityState};

fn states(seed: u64, qa: usize, qb: usize, n: usize) -> Vec<DensityState> {
    let mut rng = seeded(seed);
    let layout = RegisterLayout::new([("a", qa), ("b", qb)]).unwrap();
    (0..n).map(|_| random_density(layout.clone(), &mut rng).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounded_and_symmetric(seed in any::<u64>(), qa in 1usize..=2, qb in 1usize..=2) {
        let s = states(seed, qa, qb, 2);
        let d = trace_distance(&s[0], &s[1]).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - trace_distance(&s[1], &s[0]).unwrap()).abs() < 1e-9);
        prop_assert!(trace_distance(&s[0], &s[0]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn triangle(seed in any::<u64>(), qa in 1usize..=2, qb in 1usize..=2) {
        let s = states(seed, qa, qb, 3);
        let d = |i: usize, j: usize| trace_distance(&s[i], &s[j]).unwrap();
        prop_assert!(d(0, 1) <= d(0, 2) + d(2, 1) + 1e-9);
    }

    #[test]
    fn unitary_invariance(seed in any::<u64>(), qa in 1usize..=2, qb in 1usize..=2) {
        let s = states(seed, qa, qb, 2);
        let u = haar_unitary(s[0].dim(), &mut seeded(seed ^ 0x5eed));
        let rotate = |x: &DensityState| {
            let m = u.matmul(x.matrix()).unwrap().matmul(&u.adjoint()).unwrap();
            DensityState::new(x.layout().clone(), m).unwrap()
        };
        let before = trace_distance(&s[0], &s[1]).unwrap();
        let after = trace_distance(&rotate(&s[0]), &rotate(&s[1])).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn partial_trace_contracts(seed in any::<u64>(), qa in 1usize..=2, qb in 1usize..=2) {
        let s = states(seed, qa, qb, 2);
        let keep = ["a".to_string()];
        let full = trace_distance(&s[0], &s[1]).unwrap();
        let part = trace_distance(&s[0].reduce_to(&keep).unwrap(), &s[1].reduce_to(&keep).unwrap()).unwrap();
        prop_assert!(part <= full + 1e-9);
    }

    #[test]
    fn tensor_subadditive(seed in any::<u64>(), q in 1usize..=2) {
        let mut rng = seeded(seed);
        let la = RegisterLayout::new([("a", q)]).unwrap();
        let lb = RegisterLayout::new([("b", q)]).unwrap();
        let r1 = random_density(la.clone(), &mut rng).unwrap();
        let s1 = random_density(la, &mut rng).unwrap();
        let r2 = random_density(lb.clone(), &mut rng).unwrap();
        let s2 = random_density(lb, &mut rng).unwrap();
        let joint = trace_distance(&r1.tensor(&r2).unwrap(), &s1.tensor(&s2).unwrap()).unwrap();
        let sum = trace_distance(&r1, &s1).unwrap() + trace_distance(&r2, &s2).unwrap();
        prop_assert!(joint <= sum + 1e-9);
    }
}
