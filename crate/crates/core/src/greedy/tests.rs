use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::simulate::{scenario1, scenario2};
use crate::tensor::{build_tensor, Edge};

fn random_tensor(seed: u64, n: usize, u: usize, density: f64) -> InteractionTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for t in 0..u {
                if i != j && rng.random::<f64>() < density {
                    edges.push(Edge::new(i, j, t, rng.random_range(1..=20)));
                }
            }
        }
    }
    build_tensor(edges, n, u).unwrap()
}

fn small_config(tensor: &InteractionTensor, strategy: Strategy, init: Init) -> FitConfig {
    FitConfig {
        strategy,
        init,
        restarts: 2,
        seed: 11,
        ..FitConfig::for_tensor(tensor)
    }
}

fn assert_local_optimum(tensor: &InteractionTensor, result: &FitResult, config: &FitConfig) {
    let mut state = FitState::new(
        tensor,
        result.partition.clone(),
        config.k_max,
        config.d_max,
        config.priors,
        0,
    )
    .unwrap();
    if let Some((mv, delta)) = state.best_single_move() {
        assert!(
            delta <= config.min_improvement,
            "{mv:?} still gains {delta}"
        );
    }
}

#[test]
fn trace_is_increasing_and_sums_to_final_icl() {
    for seed in 0..12 {
        let tensor = random_tensor(seed, 9, 7, 0.3);
        for strategy in Strategy::ALL {
            for init in [Init::Singletons, Init::Random, Init::Hierarchical] {
                let config = small_config(&tensor, strategy, init);
                let r = run_strategy(&tensor, &config).unwrap();
                let mut prev = r.initial_icl;
                for step in &r.trace {
                    assert!(step.delta > 0.0);
                    assert!(step.icl_after > prev);
                    prev = step.icl_after;
                }
                assert!((prev - r.icl.value).abs() <= 1e-6 * r.icl.value.abs().max(1.0));
                assert_local_optimum(&tensor, &r, &config);
            }
        }
    }
}

#[test]
fn deterministic_for_a_seed() {
    let tensor = random_tensor(3, 10, 8, 0.25);
    for strategy in Strategy::ALL {
        let config = FitConfig {
            init: Init::Random,
            ..small_config(&tensor, strategy, Init::Random)
        };
        assert_eq!(
            fit(&tensor, &config).unwrap(),
            fit(&tensor, &config).unwrap()
        );
    }
}

#[test]
fn single_restart_matches_run_strategy() {
    let tensor = random_tensor(5, 8, 6, 0.3);
    let config = FitConfig {
        restarts: 1,
        ..small_config(&tensor, Strategy::B, Init::Random)
    };
    assert_eq!(
        fit(&tensor, &config).unwrap(),
        run_strategy(&tensor, &config).unwrap()
    );
}

#[test]
fn best_restart_is_selected() {
    let tensor = random_tensor(8, 9, 6, 0.3);
    let config = FitConfig {
        restarts: 5,
        ..small_config(&tensor, Strategy::A, Init::Random)
    };
    let best = fit(&tensor, &config).unwrap();
    for r in 0..5 {
        let run = run_restart(&tensor, &config, r).unwrap();
        assert!(run.icl.value <= best.icl.value);
    }
}

#[test]
fn exchange_pass_at_fixed_point_accepts_nothing() {
    let tensor = random_tensor(2, 8, 6, 0.4);
    let config = small_config(&tensor, Strategy::A, Init::Hierarchical);
    let r = run_strategy(&tensor, &config).unwrap();
    let mut state = FitState::new(&tensor, r.partition, 4, 3, config.priors, 1).unwrap();
    assert_eq!(state.ge_pass(Target::Mixed), 0);
    assert_eq!(state.gm_pass(Target::Mixed), 0);
}

#[test]
fn single_clusters_admit_no_merge() {
    let tensor = random_tensor(4, 6, 5, 0.3);
    let partition = Partition::trivial(6, 5).unwrap();
    let mut state = FitState::new(&tensor, partition, 1, 1, Priors::default(), 0).unwrap();
    assert_eq!(state.gm_pass(Target::Mixed), 0);
    assert!(state.best_single_move().is_none());
}

#[test]
fn merges_remove_exactly_one_cluster() {
    let tensor = random_tensor(6, 10, 8, 0.2);
    let partition = Partition::new((0..10).collect(), (0..8).collect()).unwrap();
    let mut state = FitState::new(&tensor, partition, 10, 8, Priors::default(), 0).unwrap();
    while let Some((mv, delta)) = state.best_merge(Target::Mixed) {
        if delta <= 0.0 {
            break;
        }
        let (k, d) = (state.stats().k(), state.stats().d());
        state.commit(mv, delta).unwrap();
        let (k2, d2) = (state.stats().k(), state.stats().d());
        match mv {
            Move::MergeNodes { .. } => assert_eq!((k2, d2), (k - 1, d)),
            Move::MergeTimes { .. } => assert_eq!((k2, d2), (k, d - 1)),
            _ => unreachable!(),
        }
        assert_eq!(state.partition().k(), k2);
        assert_eq!(state.partition().d(), d2);
    }
}

#[test]
fn running_icl_tracks_recomputed_icl() {
    let tensor = random_tensor(9, 10, 7, 0.35);
    let partition = Partition::new(
        (0..10).map(|i| i % 4).collect(),
        (0..7).map(|u| u % 3).collect(),
    )
    .unwrap();
    let mut state = FitState::new(&tensor, partition, 4, 3, Priors::jeffreys(), 2).unwrap();
    state.bracket(Target::Mixed, true);
    let full = state.icl_full().value;
    assert!((state.icl() - full).abs() < 1e-8 * full.abs().max(1.0));
}

#[test]
fn flat_time_profile_collapses_to_one_time_cluster() {
    // no time structure: the fitted D is 1
    let sample = scenario1(3.0, 1.0, 15, 12, 21).unwrap();
    let config = FitConfig {
        restarts: 3,
        ..FitConfig::for_tensor(&sample.tensor)
    };
    let r = fit(&sample.tensor, &config).unwrap();
    assert_eq!(r.partition.d(), 1);
}

#[test]
fn oversegmented_time_clusters_are_merged() {
    let sample = scenario2(16, 12, 5, true).unwrap();
    let partition = Partition::new(vec![0; 16], (0..12).collect()).unwrap();
    let mut state = FitState::new(&sample.tensor, partition, 1, 12, Priors::default(), 0).unwrap();
    let merges = state.gm_pass(Target::Times);
    assert!(merges > 0);
    assert!(state.partition().d() < 12);
}

#[test]
fn singleton_init_with_full_capacity() {
    let tensor = random_tensor(1, 7, 5, 0.3);
    let config = FitConfig {
        init: Init::Singletons,
        k_max: 7,
        d_max: 5,
        ..FitConfig::for_tensor(&tensor)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = init_partition(&tensor, &config, &mut rng).unwrap();
    assert_eq!(p.node_labels(), &[0, 1, 2, 3, 4, 5, 6]);
    assert_eq!(p.interval_labels(), &[0, 1, 2, 3, 4]);
}

#[test]
fn random_init_is_seeded() {
    let tensor = random_tensor(1, 12, 9, 0.3);
    let config = FitConfig {
        init: Init::Random,
        ..FitConfig::for_tensor(&tensor)
    };
    let draw = |s| init_partition(&tensor, &config, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
    assert_eq!(draw(4), draw(4));
    assert!(draw(4).k() <= config.k_max);
}

#[test]
fn hierarchical_init_respects_capacity() {
    let tensor = random_tensor(13, 11, 9, 0.3);
    let config = FitConfig::for_tensor(&tensor);
    let p = init_partition(&tensor, &config, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(p.k(), 6);
    assert_eq!(p.d(), 5);
}

#[test]
fn restart_seeds_differ() {
    let seeds: Vec<u64> = (0..50).map(|r| restart_seed(7, r)).collect();
    for i in 0..seeds.len() {
        for j in (i + 1)..seeds.len() {
            assert_ne!(seeds[i], seeds[j]);
        }
    }
    assert_ne!(restart_seed(0, 0), restart_seed(1, 0));
}

#[test]
fn invalid_configs() {
    let tensor = random_tensor(1, 5, 4, 0.3);
    let base = FitConfig::for_tensor(&tensor);
    for bad in [
        FitConfig {
            k_max: 0,
            ..base.clone()
        },
        FitConfig {
            d_max: 5,
            ..base.clone()
        },
        FitConfig {
            restarts: 0,
            ..base.clone()
        },
        FitConfig {
            min_improvement: f64::NAN,
            ..base.clone()
        },
    ] {
        assert!(matches!(fit(&tensor, &bad), Err(Error::InvalidConfig(_))));
    }
}

#[test]
fn static_fit_keeps_one_time_cluster() {
    let sample = scenario2(12, 8, 3, true).unwrap();
    let config = FitConfig {
        restarts: 2,
        ..FitConfig::for_tensor(&sample.tensor)
    };
    let r = fit_static(&sample.tensor, &config).unwrap();
    assert_eq!(r.partition.d(), 1);
    assert_eq!(r.partition.n_intervals(), 1);
}
