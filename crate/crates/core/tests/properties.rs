use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symtypes::hypotest;
use symtypes::quantum::{self, Basis, DensityMatrix};
use symtypes::schur_weyl::{self, perm_action, Decomposition, Permutation};
use symtypes::tableaux::{self, Frequency, ProbVec, YoungFrame};

fn counts(d: usize, max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..=max_n, d).prop_filter("n ≥ 1", |v| v.iter().sum::<usize>() >= 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kostka_weighted_sum_is_type_class_size(c in counts(3, 3)) {
        let f = Frequency::new(c).unwrap();
        let total: u128 = tableaux::enumerate_frames(3, f.n())
            .iter()
            .map(|l| u128::from(tableaux::kostka(&f, l)) * tableaux::hook_dimension(l))
            .sum();
        prop_assert_eq!(total, tableaux::type_class_size(&f));
    }

    #[test]
    fn kostka_is_symmetric_in_content(c in counts(3, 3)) {
        let f = Frequency::new(c.clone()).unwrap();
        let mut rev = c;
        rev.reverse();
        let g = Frequency::new(rev).unwrap();
        for l in tableaux::enumerate_frames(3, f.n()) {
            prop_assert_eq!(tableaux::kostka(&f, &l), tableaux::kostka(&g, &l));
            prop_assert_eq!(tableaux::kostka(&f, &l) > 0, tableaux::dominance(&f, &l));
        }
    }

    #[test]
    fn permutation_action_is_a_homomorphism(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Permutation::random(n, &mut rng);
        let q = Permutation::random(n, &mut rng);
        let up = perm_action(&p, 2, n).unwrap();
        let uq = perm_action(&q, 2, n).unwrap();
        let upq = perm_action(&p.compose(&q), 2, n).unwrap();
        prop_assert_eq!(up.to_matrix() * uq.to_matrix(), upq.to_matrix());
        prop_assert_eq!(p.cycle_type(), p.inverse().cycle_type());
    }

    #[test]
    fn label_weights_form_a_distribution(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dec = Decomposition::shared(2, n).unwrap();
        let basis = Basis::new(quantum::haar_unitary(2, &mut rng)).unwrap();
        let states: Vec<DensityMatrix> = (0..n).map(|_| quantum::random_state(2, &mut rng)).collect();
        let w = schur_weyl::label_weights(&dec, &basis, &states).unwrap();
        let total: f64 = w.iter().flatten().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(w.iter().flatten().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn schur_horn_round_trip(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = quantum::random_probvec(d, &mut rng);
        let rho0 = quantum::state_with_spectrum_and_diagonal(&spec, &spec).unwrap();
        let u = quantum::haar_unitary(d, &mut rng);
        let rotated = DensityMatrix::new(&u * rho0.matrix() * u.adjoint()).unwrap();
        let diag = quantum::pinch(&rotated, &Basis::computational(d));
        let rho = quantum::state_with_spectrum_and_diagonal(&spec, &diag).unwrap();
        prop_assert!(quantum::spectrum(&rho).l1_distance(&spec.sorted_desc()) < 1e-9);
        prop_assert!(quantum::pinch(&rho, &Basis::computational(d)).l1_distance(&diag) < 1e-9);
    }

    #[test]
    fn relative_entropy_is_nonnegative(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = quantum::random_state(d, &mut rng);
        let sigma = quantum::random_state(d, &mut rng);
        prop_assert!(quantum::qrel_entropy(&rho, &sigma) >= -1e-10);
        prop_assert!(quantum::qrel_entropy(&rho, &rho).abs() < 1e-9);
        prop_assert!(quantum::entropy_identity_check(&rho, &sigma).unwrap() < 1e-9);
    }

    #[test]
    fn theta_grows_with_epsilon(n in 1usize..200, e1 in 0.0f64..0.5, de in 0.0f64..0.5) {
        let t = [0.75, 0.25];
        prop_assert!(hypotest::theta(n, e1 + de, 2, &t) >= hypotest::theta(n, e1, 2, &t) - 1e-12);
    }

    #[test]
    fn dimension_sandwich(parts in prop::collection::vec(1usize..5, 1..4)) {
        let mut p = parts;
        p.sort_unstable_by(|a, b| b.cmp(a));
        let l = YoungFrame::new(p, 3).unwrap();
        let dim = tableaux::hook_dimension(&l) as f64;
        let (lo, hi) = tableaux::dimension_bounds(&l);
        prop_assert!(lo <= dim * (1.0 + 1e-12) && dim <= hi * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn neyman_pearson_decreases_in_nu(seed in any::<u64>(), n in 2usize..6, nu in 0.05f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = quantum::random_state(2, &mut rng);
        let sigma = quantum::random_state(2, &mut rng);
        let b1 = hypotest::neyman_pearson(&rho, &sigma, n, nu).unwrap();
        let b2 = hypotest::neyman_pearson(&rho, &sigma, n, nu + 0.3).unwrap();
        prop_assert!(b2 <= b1 + 1e-9);
        prop_assert!((0.0..=1.0).contains(&b1));
    }

    #[test]
    fn sanov_test_is_a_projector(seed in any::<u64>(), n in 2usize..7, eps in 0.05f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = quantum::random_state(2, &mut rng);
        let rho = quantum::random_state(2, &mut rng);
        let spec = hypotest::TestSpec::new(sigma.clone(), hypotest::NullSet::Points(vec![rho.clone()]), eps, n).unwrap();
        let p = hypotest::build_test(&spec).unwrap();
        prop_assert!(p.projector_defect() < 1e-9);
        let t1 = hypotest::type_one(&p, &rho).unwrap();
        let t2 = hypotest::type_two(&p, &sigma).unwrap();
        prop_assert!((0.0..=1.0).contains(&t1) && (0.0..=1.0).contains(&t2));
        let mut prng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        prop_assert!(p.invariance_defect(4, &mut prng) < 1e-12);
    }
}

#[test]
fn probvec_rejects_unnormalized() {
    assert!(ProbVec::new(vec![0.5, 0.6]).is_err());
    assert!(ProbVec::new(vec![0.5, 0.5]).is_ok());
}
