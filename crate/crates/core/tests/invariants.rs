use proptest::prelude::*;

use sflab::algebra::{li_q_norm, trace_norm};
use sflab::calculus::divided::divided_difference_exp;
use sflab::calculus::{frechet_derivative, func_calc};
use sflab::flow::{relative_index_exact, sf_oracle, sf_unbounded, FlowConfig, UnboundedVariant};
use sflab::paths::{OperatorPath, Path};
use sflab::sample::Sampler;
use sflab::SemifiniteModel;

fn layout() -> impl Strategy<Value = Vec<(usize, f64)>> {
    prop::collection::vec((1usize..=4, 0.2f64..1.5), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oracle_is_additive_under_splitting(blocks in layout(), seed in any::<u64>(), cut in 0.05f64..0.95) {
        let m = SemifiniteModel::new(blocks).unwrap();
        let mut s = Sampler::new(seed);
        let path = OperatorPath::through(&[s.hermitian(&m, 1.5), s.hermitian(&m, 1.5), s.hermitian(&m, 1.5)]).unwrap();
        let (a, b) = path.domain();
        let (left, right) = path.split_at(a + cut * (b - a)).unwrap();
        let cfg = FlowConfig::default();
        let whole = sf_oracle(&m, &path, &cfg).unwrap().value;
        let parts = sf_oracle(&m, &left, &cfg).unwrap().value + sf_oracle(&m, &right, &cfg).unwrap().value;
        prop_assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn oracle_changes_sign_on_reversal(blocks in layout(), seed in any::<u64>()) {
        let m = SemifiniteModel::new(blocks).unwrap();
        let mut s = Sampler::new(seed);
        let (x, y) = (s.hermitian(&m, 1.5), s.hermitian(&m, 1.5));
        let cfg = FlowConfig::default();
        let fwd = sf_oracle(&m, &OperatorPath::between(&x, &y).unwrap(), &cfg).unwrap().value;
        let back = sf_oracle(&m, &OperatorPath::between(&y, &x).unwrap(), &cfg).unwrap().value;
        prop_assert!((fwd + back).abs() < 1e-12);
    }

    #[test]
    fn oracle_scales_with_weights(dims in prop::collection::vec(1usize..=4, 1..=3), seed in any::<u64>(), lambda in 0.1f64..5.0) {
        let m = SemifiniteModel::new(dims.iter().map(|&d| (d, 1.0))).unwrap();
        let scaled = SemifiniteModel::new(dims.iter().map(|&d| (d, lambda))).unwrap();
        let mut s = Sampler::new(seed);
        let path = OperatorPath::between(&s.hermitian(&m, 1.5), &s.hermitian(&m, 1.5)).unwrap();
        let cfg = FlowConfig::default();
        let a = sf_oracle(&m, &path, &cfg).unwrap().value;
        let b = sf_oracle(&scaled, &path, &cfg).unwrap().value;
        prop_assert!((lambda * a - b).abs() < 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn relative_index_is_antisymmetric(blocks in layout(), seed in any::<u64>()) {
        let m = SemifiniteModel::new(blocks).unwrap();
        let mut s = Sampler::new(seed);
        let (p, q) = (s.projection(&m), s.projection(&m));
        let pq = relative_index_exact(&m, &p, &q, 1e-9).unwrap();
        let qp = relative_index_exact(&m, &q, &p, 1e-9).unwrap();
        prop_assert_eq!(pq, -qp);
    }

    #[test]
    fn li_norm_is_unitarily_invariant(blocks in layout(), seed in any::<u64>(), q in 0.2f64..1.0) {
        let m = SemifiniteModel::new(blocks).unwrap();
        let mut s = Sampler::new(seed);
        let t = s.complex(&m, 1.0);
        let (u, v) = (s.unitary(&m), s.unitary(&m));
        let a = li_q_norm(&m, &t, q).unwrap();
        let b = li_q_norm(&m, &(&(&u * &t) * &v), q).unwrap();
        prop_assert!((a - b).abs() < 1e-8 * (1.0 + a));
    }

    #[test]
    fn divided_difference_ignores_node_order(mut nodes in prop::collection::vec(-3.0f64..3.0, 1..7), seed in any::<u64>()) {
        let a = divided_difference_exp(&nodes);
        let mut s = Sampler::new(seed);
        for i in (1..nodes.len()).rev() {
            nodes.swap(i, s.index(i + 1));
        }
        let b = divided_difference_exp(&nodes);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn frechet_derivative_matches_difference_quotient(blocks in layout(), seed in any::<u64>()) {
        let m = SemifiniteModel::new(blocks).unwrap();
        let mut s = Sampler::new(seed);
        let (x, dx) = (s.hermitian(&m, 1.0), s.hermitian(&m, 1.0));
        let f = |t: f64| t.atan();
        let df = |t: f64| 1.0 / (1.0 + t * t);
        let exact = frechet_derivative(&x, &dx, f, df).unwrap();
        let h = 1e-4;
        let hi = func_calc(&(&x + &dx.scale(h)), f).unwrap();
        let lo = func_calc(&(&x - &dx.scale(h)), f).unwrap();
        let fd = (&hi - &lo).scale(0.5 / h);
        prop_assert!(trace_norm(&m, &(&exact - &fd)).unwrap() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn unbounded_estimator_tracks_oracle(blocks in layout(), seed in any::<u64>(), eps in 0.25f64..4.0) {
        let m = SemifiniteModel::new(blocks).unwrap();
        let mut s = Sampler::new(seed);
        let path = OperatorPath::between(
            &s.gapped_hermitian(&m, -2.0, 2.0, 0.1),
            &s.gapped_hermitian(&m, -2.0, 2.0, 0.1),
        )
        .unwrap();
        let cfg = FlowConfig::default();
        let oracle = sf_oracle(&m, &path, &cfg).unwrap().value;
        let rec = sf_unbounded(&m, &path, UnboundedVariant::Eps { eps }, &cfg).unwrap();
        prop_assert!(rec.discrepancy(oracle) < 1e-6, "{} vs {}", rec.value, oracle);
    }
}
