use proptest::prelude::*;

use randfid::analytic::{mean_fidelity_nk, moment_root_fidelity_series, SeriesConfig};
use randfid::samplers::{haar_unitary, sample_hs, sample_induced, sample_measure, sample_pure, BuresMcmcConfig, MeasureSpec, RngStream};
use randfid::state::{bures_distance, fidelity, fidelity_pure_mixed, root_fidelity, BlochVector, DensityMatrix};

fn pair(seed: u64, n: usize, k: usize) -> (DensityMatrix, DensityMatrix) {
    let mut rng = RngStream::new(seed, 0).rng();
    (sample_induced(n, k, &mut rng).unwrap(), sample_induced(n, k, &mut rng).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_symmetric_and_bounded(seed in any::<u64>(), n in 2usize..6, k in 1usize..7) {
        let (a, b) = pair(seed, n, k);
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-10);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fidelity_unitarily_invariant(seed in any::<u64>(), n in 2usize..5) {
        let (a, b) = pair(seed, n, n);
        let u = haar_unitary(n, &mut RngStream::new(seed, 1).rng());
        let f0 = fidelity(&a, &b).unwrap();
        let f1 = fidelity(&a.conjugate(&u).unwrap(), &b.conjugate(&u).unwrap()).unwrap();
        prop_assert!((f0 - f1).abs() < 1e-9);
    }

    #[test]
    fn bures_distance_from_root_fidelity(seed in any::<u64>(), n in 2usize..5) {
        let (a, b) = pair(seed, n, n + 1);
        let d = bures_distance(&a, &b).unwrap();
        let r = root_fidelity(&a, &b).unwrap();
        prop_assert!((d * d - 2.0 * (1.0 - r)).abs() < 1e-10);
    }

    #[test]
    fn qubit_fidelity_bloch_form(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0).rng();
        let a = sample_hs(2, &mut rng).unwrap();
        let b = sample_hs(2, &mut rng).unwrap();
        let (ta, tb) = (BlochVector::from_state(&a).unwrap(), BlochVector::from_state(&b).unwrap());
        let expect = 0.5 + ta.dot(&tb) + ((0.5 - ta.radius().powi(2)) * (0.5 - tb.radius().powi(2))).max(0.0).sqrt();
        prop_assert!((fidelity(&a, &b).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn pure_fidelity_is_expectation(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = RngStream::new(seed, 0).rng();
        let psi = sample_pure(n, &mut rng);
        let rho = sample_hs(n, &mut rng).unwrap();
        let f = fidelity_pure_mixed(&psi, &rho).unwrap();
        prop_assert!((f - fidelity(&psi.projector(), &rho).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn samplers_deterministic(seed in any::<u64>(), stream in any::<u64>(), n in 2usize..5) {
        let cfg = BuresMcmcConfig { burn_in: 200, ..Default::default() };
        for m in [MeasureSpec::Induced { n, k: n + 1 }, MeasureSpec::Bures { n }, MeasureSpec::RealInduced { n, k: n }] {
            let a = sample_measure(&m, &mut RngStream::new(seed, stream).rng(), &cfg).unwrap();
            let b = sample_measure(&m, &mut RngStream::new(seed, stream).rng(), &cfg).unwrap();
            prop_assert_eq!(a.matrix(), b.matrix());
        }
    }
}

#[test]
fn mean_fidelity_monotone_in_k_and_below_root() {
    let cfg = SeriesConfig::default();
    for n in 2..=5 {
        let mut prev = 0.0;
        for k in 1..=10 {
            let t = moment_root_fidelity_series(n, k as f64, 2, &cfg).unwrap();
            let (root, f) = (t.get(1).unwrap(), t.get(2).unwrap());
            assert!(f > prev, "({n},{k})");
            assert!(f <= root);
            assert!(root * root <= f + 1e-12, "variance must be non-negative");
            prev = f;
        }
        assert!((mean_fidelity_nk(n, 10.0).unwrap() - prev).abs() < 1e-9);
    }
}
