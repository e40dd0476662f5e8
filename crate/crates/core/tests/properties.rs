//! Property tests over seeded random states, bases and channels.

use decolab_core::channels::{choi_state_direct, choi_triple, QuantumChannel};
use decolab_core::discord::{self, BasisOptimizerConfig};
use decolab_core::entropies::{
    cond_entropy_quad, cond_entropy_quad_distances, cond_entropy_quad_pairwise, cond_entropy_vn, cq_decompose, p_guess,
    p_guess_with, GuessOptions,
};
use decolab_core::infotypes::{coarse_grain, measurement_isometry, pinch, sample_equivalence_class, unbiasedness_residual};
use decolab_core::qmat::{self, ComplexMatrix};
use decolab_core::states::{classify, haar_isometry, haar_unitary, purify, random_pure, random_state, RandomKind, StateClass};
use decolab_core::theorems::{verify_thm1, verify_thm2};
use decolab_core::{DensityOperator, InfoType};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mixed(dims: &[usize], r: &mut ChaCha8Rng) -> DensityOperator {
    random_state(RandomKind::GinibreMixed, dims, None, r).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_bounded_and_symmetric(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let a = mixed(&[d], &mut r);
        let b = mixed(&[d], &mut r);
        let f = qmat::fidelity(a.matrix(), b.matrix());
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - qmat::fidelity(b.matrix(), a.matrix())).abs() < 1e-9);
        prop_assert!((qmat::fidelity(a.matrix(), a.matrix()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn distance_chain(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let a = mixed(&[d], &mut r);
        let b = mixed(&[d], &mut r);
        let rel = qmat::relative_entropy(a.matrix(), b.matrix());
        let t = qmat::trace_distance(a.matrix(), b.matrix());
        let hs = qmat::hilbert_schmidt_distance(a.matrix(), b.matrix());
        prop_assert!(core::f64::consts::LN_2 * rel >= 2.0 * t * t - 1e-10);
        prop_assert!(2.0 * t * t >= hs - 1e-10);
    }

    #[test]
    fn partial_traces_compose(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = mixed(&[2, 3, 2], &mut r);
        let stepwise = rho.partial_trace(&[0, 1]).unwrap().partial_trace(&[0]).unwrap();
        let direct = rho.partial_trace(&[0]).unwrap();
        prop_assert!(stepwise.matrix().max_abs_diff(direct.matrix()) < 1e-12);
    }

    #[test]
    fn square_root_and_log_round_trip(seed in any::<u64>(), d in 2usize..=5, rank in 1usize..=5) {
        let mut r = rng(seed);
        let rho = random_state(RandomKind::GinibreMixed, &[d], Some(rank.min(d)), &mut r).unwrap();
        let s = qmat::sqrt_psd(rho.matrix());
        prop_assert!(s.matmul(&s).max_abs_diff(rho.matrix()) < 1e-9);
        let spec = qmat::herm_eig(rho.matrix()).unwrap();
        let log = qmat::log2_on_support(rho.matrix());
        // exp(log ρ), restricted to the support.
        let back = qmat::herm_eig(&log).unwrap().map(f64::exp2);
        let support = spec.map(|l| if l > qmat::EIG_CUTOFF { 1.0 } else { 0.0 });
        let restricted = support.matmul(&back).matmul(&support);
        prop_assert!(restricted.max_abs_diff(rho.matrix()) < 1e-9);
    }

    #[test]
    fn pinched_states_are_classical_quantum(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let mut r = rng(seed);
        let rho = mixed(&[da, db], &mut r);
        let z = InfoType::random_basis(da, 0, &mut r);
        let p = pinch(&rho, &z).unwrap();
        let class = classify(&p).unwrap();
        prop_assert!(matches!(class, StateClass::Cq | StateClass::Cc));
        let zb = InfoType::random_basis(db, 1, &mut r);
        let cc = pinch(&p, &zb).unwrap();
        prop_assert_eq!(classify(&cc).unwrap(), StateClass::Cc);
    }

    #[test]
    fn purify_inverts_partial_trace_on_pure_inputs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let psi = random_pure(&[3], &mut r);
        let back = purify(&psi.density());
        let reduced = back.density().partial_trace(&[0]).unwrap();
        prop_assert!(reduced.matrix().max_abs_diff(psi.density().matrix()) < 1e-10);
        prop_assert_eq!(back.dims(), &[3, 1][..]);
    }

    #[test]
    fn pinching_structure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = mixed(&[4, 2], &mut r);
        let z = InfoType::random_basis(4, 0, &mut r);
        let once = pinch(&rho, &z).unwrap();
        let twice = pinch(&once, &z).unwrap();
        prop_assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-10);
        let coarse = coarse_grain(&z, &[vec![0, 2], vec![1], vec![3]]).unwrap();
        let a = pinch(&once, &coarse).unwrap();
        let b = pinch(&rho, &coarse).unwrap();
        prop_assert!(a.matrix().max_abs_diff(once.matrix()) < 1e-10);
        prop_assert!(pinch(&b, &z).unwrap().matrix().max_abs_diff(once.matrix()) < 1e-10);
        let v = measurement_isometry(&z);
        let lifted = v.matmul(rho.partial_trace(&[0]).unwrap().matrix()).matmul(&v.adjoint());
        prop_assert!((lifted.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn class_samples_stay_unbiased(seed in any::<u64>(), d in 2usize..=5, perm in any::<bool>()) {
        let mut r = rng(seed);
        let z = InfoType::random_basis(d, 0, &mut r);
        let s = sample_equivalence_class(&z, None, perm, &mut r).unwrap();
        prop_assert!(unbiasedness_residual(&z, &s.basis()).unwrap() < 1e-10);
        // The class relation: base and sample differ by a unitary diagonal in Z.
        let zb = z.basis().unwrap();
        let rel = zb.adjoint().matmul(&s.unitary()).matmul(zb);
        for i in 0..d {
            let nonzero = (0..d).filter(|&j| rel[(i, j)].norm() > 1e-10).count();
            prop_assert_eq!(nonzero, 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conditional_entropy_bounds_and_ordering(seed in any::<u64>(), da in 2usize..=4, db in 1usize..=2, dc in 1usize..=4) {
        let mut r = rng(seed);
        let rho = mixed(&[da, db, dc], &mut r);
        let z = InfoType::random_basis(da, 0, &mut r);
        let dec = cq_decompose(&rho, &z, &[2]).unwrap();
        let log_n = (da as f64).log2();
        let h = cond_entropy_vn(&dec);
        let g = p_guess(&dec);
        let hmin = g.h_min();
        let rho_c = dec.rho_c();
        let hq = cond_entropy_quad(&dec, &rho_c).unwrap();
        prop_assert!(h >= -1e-9 && h <= log_n + 1e-9);
        prop_assert!(hmin >= -1e-7 && hmin <= log_n + 1e-7);
        prop_assert!(hq >= -1e-12 && hq <= (1.0 - 1.0 / da as f64) * rho_c.purity() + 1e-12);
        prop_assert!(hmin <= h + 1e-7);
        prop_assert!((hq - cond_entropy_quad_pairwise(&dec)).abs() < 1e-10);
        prop_assert!((hq - cond_entropy_quad_distances(&dec)).abs() < 1e-10);
    }

    #[test]
    fn coarse_graining_loses_missing_information(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = mixed(&[4, 3], &mut r);
        let x = InfoType::random_basis(4, 0, &mut r);
        let xc = coarse_grain(&x, &[vec![0, 1], vec![2, 3]]).unwrap();
        let fine = cq_decompose(&rho, &x, &[1]).unwrap();
        let coarse = cq_decompose(&rho, &xc, &[1]).unwrap();
        prop_assert!(cond_entropy_vn(&fine) >= cond_entropy_vn(&coarse) - 1e-9);
        prop_assert!(
            cond_entropy_quad(&fine, &fine.rho_c()).unwrap() >= cond_entropy_quad(&coarse, &coarse.rho_c()).unwrap() - 1e-12
        );
        prop_assert!(p_guess(&fine).h_min() >= p_guess(&coarse).h_min() - 1e-7);
    }

    #[test]
    fn helstrom_matches_iterative_solver(seed in any::<u64>(), dc in 2usize..=4) {
        let mut r = rng(seed);
        let rho = mixed(&[2, dc], &mut r);
        let z = InfoType::random_basis(2, 0, &mut r);
        let dec = cq_decompose(&rho, &z, &[1]).unwrap();
        let closed = p_guess(&dec).p_guess;
        let iter = p_guess_with(&dec, &GuessOptions { force_iterative: true, ..Default::default() }).p_guess;
        prop_assert!((closed - iter).abs() < 1e-6);
    }

    #[test]
    fn reports_ignore_the_choice_of_purification(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_pure(&[2, 2, 2], &mut r).density();
        let z = InfoType::random_basis(2, 0, &mut r);
        let v = haar_isometry(2, 3, &mut r);
        let rotated = rho.conjugate_on(&v, 2).unwrap();
        let a = verify_thm1(&rho, &z, &Default::default(), &mut rng(1)).unwrap();
        let b = verify_thm1(&rotated, &z, &Default::default(), &mut rng(1)).unwrap();
        let c = verify_thm2(&rho, &z, &Default::default(), &mut rng(2)).unwrap();
        let e = verify_thm2(&rotated, &z, &Default::default(), &mut rng(2)).unwrap();
        for (x, y) in a.iter().zip(&b).chain(c.iter().zip(&e)) {
            prop_assert!(x.passed && y.passed);
            prop_assert!((x.abs_gap - y.abs_gap).abs() < 1e-8);
        }
    }

    #[test]
    fn stinespring_and_choi_routes_agree(seed in any::<u64>(), d in 2usize..=3, nk in 1usize..=4) {
        let mut r = rng(seed);
        let v = haar_isometry(d, d * nk, &mut r);
        let kraus: Vec<ComplexMatrix> = (0..nk).map(|k| ComplexMatrix::from_fn(d, d, |o, i| v[(o * nk + k, i)])).collect();
        let ch = QuantumChannel::new(kraus).unwrap();
        let rho = mixed(&[d], &mut r);
        let w = ch.stinespring();
        let joint = DensityOperator::new(w.matmul(rho.matrix()).matmul(&w.adjoint()), vec![d, nk]).unwrap();
        prop_assert!(joint.partial_trace(&[0]).unwrap().matrix().max_abs_diff(&ch.apply(rho.matrix())) < 1e-10);
        prop_assert!(joint.partial_trace(&[1]).unwrap().matrix().max_abs_diff(&ch.complementary().apply(rho.matrix())) < 1e-10);
        let t = choi_triple(&ch).unwrap();
        prop_assert!(t.choi_state().unwrap().matrix().max_abs_diff(choi_state_direct(&ch).unwrap().matrix()) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discord_is_nonnegative_and_locally_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = mixed(&[2, 2], &mut r);
        let u = haar_unitary(2, &mut r).kron(&haar_unitary(2, &mut r));
        let moved = DensityOperator::new(u.matmul(rho.matrix()).matmul(&u.adjoint()), vec![2, 2]).unwrap();
        let cfg = BasisOptimizerConfig { restarts: 8, seed, ..Default::default() };
        let a = discord::discord_suite(&rho, &cfg).unwrap();
        let b = discord::discord_suite(&moved, &cfg).unwrap();
        let pairs = [
            (a.deficit.value, b.deficit.value),
            (a.geometric.value, b.geometric.value),
            (a.original.value, b.original.value),
            (a.min_entropy.d_min.value, b.min_entropy.d_min.value),
            (a.min_entropy.eg.value, b.min_entropy.eg.value),
            (a.two_way_vn.value, b.two_way_vn.value),
            (a.two_way_min.value, b.two_way_min.value),
        ];
        for (x, y) in pairs {
            prop_assert!(x >= -1e-9 && y >= -1e-9);
            prop_assert!((x - y).abs() < 1e-5, "{} vs {}", x, y);
        }
    }
}
