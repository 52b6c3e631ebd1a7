use camcast::analytics::{expected_psi, psi_realization, PsiMode, RhoMode, SymmetricParams};
use camcast::cache::{proportional_distribution, CachingDistribution};
use camcast::codec::DecodeMode;
use camcast::coloring::{ca_hgc, channel_uses, Growth};
use camcast::config::load_spec;
use camcast::delivery::{simulate_delivery, DeliverySetup};
use camcast::exact::random_instance;
use camcast::experiment::{covered_descriptions, prepare_point, run_scheme, trial_cache, trial_requests};
use camcast::graph::ConflictGraph;
use camcast::model::{zipf_demand, ChannelModel, DemandModel, ReceiverChannel, RequestVector, SystemConfig};
use camcast::schedule::{schedule, ScheduleMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SMALL: &str = include_str!("../../../configs/small.toml");

fn noiseless_setup(seed: u64, u_n: usize, cache_files: f64) -> DeliverySetup {
    let q = zipf_demand(8, 0.7).unwrap();
    let p = proportional_distribution(&q, cache_files).unwrap();
    let channels = [0.5, 0.75, 0.25, 1.0]
        .iter()
        .cycle()
        .take(u_n)
        .enumerate()
        .map(|(u, &eta)| ReceiverChannel::with_rate(u, ChannelModel::bsc(0.0).unwrap(), eta).unwrap())
        .collect();
    DeliverySetup {
        system: SystemConfig { files: 8, descriptions: 6, description_bits: 2, gamma: 2.0, receivers: u_n, seed },
        channels,
        demand: DemandModel::common(q, u_n).unwrap(),
        dist: CachingDistribution::symmetric(p, cache_files, u_n).unwrap(),
        psi: 1.5,
        growth: Growth::Greedy,
        mode: DecodeMode::Ideal,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_delivery_recovers_every_scheduled_description(seed in 0u64..10_000, u_n in 1usize..6, cache in 0.0f64..4.0) {
        let setup = noiseless_setup(seed, u_n, cache);
        let t = simulate_delivery(&setup, seed).unwrap();
        prop_assert!(t.all_succeeded());
        prop_assert_eq!(t.delivered(), t.schedule.d.clone());
        // Identical descriptions inside one GIS are split into extra blocks.
        prop_assert!(t.codeword.blocks.len() >= t.coloring.len());
        prop_assert_eq!(t.codeword.total_len(), t.codeword.blocks.len() * t.n);
    }

    #[test]
    fn heuristic_coloring_is_valid(seed in 0u64..10_000, growth in prop_oneof![Just(Growth::Greedy), Just(Growth::FillOnJoin)]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, d) = random_instance(&mut rng, 5, 4, 5, 30).unwrap();
        let c = ca_hgc(&g, &d, growth);
        prop_assert!(c.validate(&g, &d).is_ok());
        // Every vertex is covered exactly once, so the count is bounded by the vertex count.
        prop_assert!(c.len() <= g.len());
    }

    #[test]
    fn coverage_bounds(seed in 0u64..10_000, cache in 0.0f64..6.0) {
        let mut spec = load_spec(SMALL).unwrap();
        spec.system.seed = seed;
        let point = prepare_point(&spec, cache).unwrap();
        let cache_r = trial_cache(&spec, &point, 0).unwrap();
        let req = trial_requests(&spec, &point, 0);
        let s = schedule(&cache_r, &req, &spec.eta(), point.psi.value.max(1e-3), spec.system.slot(), 1, ScheduleMode::Expectation).unwrap();
        let covered = covered_descriptions(&cache_r, &s);
        for (&c, &d) in covered.iter().zip(&s.d) {
            prop_assert!(c >= d);
            prop_assert!(c <= spec.system.descriptions);
        }
    }

    #[test]
    fn psi_is_bounded_by_receiver_count(seed in 0u64..10_000, cache in 0.0f64..3.0) {
        let q = zipf_demand(6, 0.5).unwrap();
        let params = SymmetricParams {
            p: proportional_distribution(&q, cache).unwrap(),
            q,
            cache_files: cache,
            eta: vec![1.0; 5],
            gamma: 1.0,
            descriptions: 10,
            description_bits: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let req = RequestVector((0..5).map(|u| (seed as usize + 3 * u) % 6).collect());
        let psi = psi_realization(&req, &params, PsiMode::Exact, &mut rng).unwrap().value;
        prop_assert!((0.0..=5.0 + 1e-9).contains(&psi));
        let e = expected_psi(&params, RhoMode::ClosedForm, &mut rng).unwrap();
        prop_assert!(e.value <= e.m_bar + 1e-12 && e.value <= e.phi + 1e-12);
    }
}

#[test]
fn uncached_channel_uses_are_at_most_unicast() {
    let setup = noiseless_setup(4, 4, 0.0);
    let t = simulate_delivery(&setup, 0).unwrap();
    let eta: Vec<f64> = setup.channels.iter().map(|c| c.eta).collect();
    let g = ConflictGraph::build(&camcast::cache::CacheRealization::empty(4, 8, 6), &t.schedule.scheduled).unwrap();
    // Without caches only identical requests can share a transmission.
    let uses = channel_uses(&g, &ca_hgc(&g, &t.schedule.d, Growth::Greedy), &eta, 2);
    let unicast: f64 = t.schedule.d.iter().zip(&eta).map(|(&d, e)| (d * 2) as f64 / e).sum();
    assert!(uses <= unicast + 1e-9);
    let mut distinct = t.schedule.scheduled.requests.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() == 4 {
        assert!((uses - unicast).abs() < 1e-9);
    }
}

#[test]
fn runs_are_reproducible_and_seed_sensitive() {
    let spec = load_spec(SMALL).unwrap();
    let a = run_scheme(&spec).unwrap();
    let b = run_scheme(&spec).unwrap();
    let loads = |rows: &[camcast::experiment::ResultRow]| rows.iter().map(|r| r.load_mean).collect::<Vec<_>>();
    assert_eq!(loads(&a), loads(&b));
    let mut other = spec.clone();
    other.system.seed += 1;
    assert_ne!(loads(&a), loads(&run_scheme(&other).unwrap()));
}
