use markovlen::distribution::{tv, DiscreteDistribution};
use markovlen::graph::{annulus_tripartition, separates, Hypergraph, Region, Tripartition};
use markovlen::models::ising_chain;
use markovlen::noise::{
    apply_channel, apply_process, pin_single_site, LayeredProcess, LocalChannel,
};
use markovlen::polymer::{critical_epsilon, threshold_residual, ursell};
use markovlen::recovery::{fit_markov_length, recovery_error, trotterized_recoveries};
use markovlen::stabilizer::pauli::PauliOperator;
use markovlen::{Budget, GibbsModel};
use proptest::prelude::*;

fn random_chain_model(tables: &[[f64; 4]], beta: f64) -> GibbsModel {
    let n = tables.len() + 1;
    GibbsModel::new(
        Hypergraph::path(n, 2),
        beta,
        tables.iter().map(|t| t.to_vec()).collect(),
    )
    .unwrap()
}

fn random_distribution(weights: &[f64]) -> DiscreteDistribution {
    let n = weights.len().trailing_zeros() as usize;
    DiscreteDistribution::from_weights((0..n).collect(), vec![2; n], weights.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gibbs_cmi_vanishes_on_separating_annuli(
        tables in prop::collection::vec(prop::array::uniform4(-2.0f64..2.0), 3..8),
        beta in 0.0f64..2.0,
        center in 0usize..8,
        radius in 1usize..3,
    ) {
        let m = random_chain_model(&tables, beta);
        let g = m.graph();
        let center = Region::new([center % g.n()]);
        let t = annulus_tripartition(g, &center, radius).unwrap();
        prop_assert!(separates(g, &t));
        let p = m.exact_distribution(Budget::default()).unwrap();
        prop_assert!(p.cmi(&t).unwrap().abs() < 1e-11);
    }

    #[test]
    fn cmi_is_nonnegative_and_routes_agree(weights in prop::collection::vec(0.01f64..1.0, 16)) {
        let p = random_distribution(&weights);
        let (a, b, c) = (Region::new([0]), Region::new([1, 2]), Region::new([3]));
        let entropic = p.cmi_entropic(&a, &b, &c).unwrap();
        let direct = p.cmi_regions(&a, &b, &c).unwrap();
        prop_assert!(direct >= -1e-14);
        prop_assert!((direct - entropic).abs() < 1e-12);
    }

    #[test]
    fn local_noise_cannot_increase_mutual_information(
        weights in prop::collection::vec(0.01f64..1.0, 8),
        eps in 0.0f64..1.0,
    ) {
        let p = random_distribution(&weights);
        let noisy = apply_channel(&p, &LocalChannel::bit_flip(2, eps).unwrap()).unwrap();
        let (a, c) = (Region::new([0]), Region::new([2]));
        let before = p.mutual_information(&a, &c).unwrap();
        let after = noisy.mutual_information(&a, &c).unwrap();
        prop_assert!(after <= before + 1e-13);
    }

    #[test]
    fn tv_is_a_bounded_metric(
        x in prop::collection::vec(0.01f64..1.0, 8),
        y in prop::collection::vec(0.01f64..1.0, 8),
    ) {
        let (p, q) = (random_distribution(&x), random_distribution(&y));
        let d = tv(p.probs(), q.probs());
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - tv(q.probs(), p.probs())).abs() < 1e-15);
        prop_assert_eq!(tv(p.probs(), p.probs()), 0.0);
    }

    #[test]
    fn channels_preserve_normalization(
        weights in prop::collection::vec(0.01f64..1.0, 16),
        eps in 0.0f64..1.0,
        site in 0usize..4,
    ) {
        let p = random_distribution(&weights);
        let q = apply_channel(&p, &LocalChannel::depolarizing(vec![site], vec![2], eps).unwrap()).unwrap();
        let total: f64 = q.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-13);
        prop_assert!(q.probs().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn pinned_model_equals_posterior(
        beta in 0.0f64..1.5,
        eps in 0.01f64..0.49,
        obs in prop::collection::vec(0usize..2, 3),
    ) {
        let m = ising_chain(5, false, beta);
        let b = [1usize, 2, 3];
        let chans: Vec<LocalChannel> = b.iter().map(|&v| LocalChannel::bit_flip(v, eps).unwrap()).collect();
        let pinned = pin_single_site(&m, &chans, &obs).unwrap().exact_distribution(Budget::default()).unwrap();
        let clean = m.exact_distribution(Budget::default()).unwrap();
        let weights: Vec<f64> = clean
            .space()
            .configs()
            .zip(clean.probs())
            .map(|(x, &p)| {
                b.iter().zip(&obs).map(|(&v, &o)| if x[v] == o { 1.0 - eps } else { eps }).product::<f64>() * p
            })
            .collect();
        let oracle = DiscreteDistribution::from_weights((0..5).collect(), vec![2; 5], weights).unwrap();
        prop_assert!(pinned.tv_distance(&oracle).unwrap() < 1e-12);
    }

    #[test]
    fn ursell_of_complete_graph(m in 1usize..7) {
        let adj: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| i != j).collect()).collect();
        let factorial: f64 = (1..m).map(|k| k as f64).product();
        let expected = if m % 2 == 1 { factorial } else { -factorial };
        prop_assert!((ursell(&adj).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn exponential_samples_recover_markov_length(xi in 0.2f64..5.0, c in 0.01f64..10.0) {
        let samples: Vec<(f64, f64)> = (1..6).map(|d| (d as f64, c * (-(d as f64) / xi).exp())).collect();
        let fit = fit_markov_length(&samples).unwrap();
        prop_assert!((fit.xi - xi).abs() < 1e-9 * xi.max(1.0));
        prop_assert!(fit.bound_holds());
    }

    #[test]
    fn critical_epsilon_solves_and_orders(
        degree in 1usize..6,
        beta in 0.0f64..2.0,
        q in prop::sample::select(vec![2usize, 3, 5]),
        depth in 1usize..4,
    ) {
        let e = critical_epsilon(degree, beta, q, depth);
        prop_assert!(e > 0.0 && e < 1.0);
        prop_assert!(threshold_residual(e, degree, beta, q, depth).abs() < 1e-10);
        prop_assert!(critical_epsilon(degree, beta + 0.1, q, depth) < e);
        prop_assert!(critical_epsilon(degree + 1, beta, q, depth) < e);
        prop_assert!(critical_epsilon(degree, beta, q, depth + 1) < e);
    }

    #[test]
    fn pauli_commutation_matches_dense_products(
        xs in prop::collection::vec(0usize..3, 6),
        zs in prop::collection::vec(0usize..3, 6),
    ) {
        let p = PauliOperator::new(3, xs[..3].to_vec(), zs[..3].to_vec(), 0).unwrap();
        let q = PauliOperator::new(3, xs[3..].to_vec(), zs[3..].to_vec(), 0).unwrap();
        let pq = p.dense() * q.dense();
        let qp = q.dense() * p.dense();
        let omega = markovlen::stabilizer::pauli::phase_value(2 * p.symplectic(&q), 3);
        prop_assert!((pq.clone() - qp * omega).norm() < 1e-12);
        prop_assert!((p.mul(&q).unwrap().dense() - pq).norm() < 1e-12);
        prop_assert_eq!(p.commutes(&q), p.symplectic(&q) == 0);
    }

    #[test]
    fn recovery_never_exceeds_doing_nothing(beta in 0.0f64..1.2, eps in 0.0f64..0.3, radius in 1usize..3) {
        let m = ising_chain(6, false, beta);
        let clean = m.exact_distribution(Budget::default()).unwrap();
        let proc = LayeredProcess::bit_flips(&m.graph().all_vertices(), eps).unwrap();
        let noisy = apply_process(&clean, &proc, Budget::default()).unwrap();
        let recs = trotterized_recoveries(&clean, &proc, m.graph(), radius, Budget::default()).unwrap();
        let err = recovery_error(&clean, &proc, &recs, Budget::default()).unwrap();
        prop_assert!(err <= clean.tv_distance(&noisy).unwrap() + 1e-12);
    }
}

#[test]
fn non_separating_tripartition_is_detected() {
    let g = Hypergraph::path(4, 2);
    let t = Tripartition::new(&g, [0].into(), [2].into(), [1, 3].into()).unwrap();
    assert!(!separates(&g, &t));
}
