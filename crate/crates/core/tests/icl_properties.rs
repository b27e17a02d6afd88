use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsbm_core::{
    build_tensor, delta_exchange_node, delta_exchange_time, delta_merge_node, delta_merge_time,
    icl_full, Edge, InteractionTensor, Move, Partition, Priors, SuffStats,
};

struct Instance {
    tensor: InteractionTensor,
    partition: Partition,
    priors: Priors,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(2..=12);
    let u = rng.random_range(1..=10);
    let density = rng.random::<f64>();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for t in 0..u {
                if i != j && rng.random::<f64>() < density {
                    edges.push(Edge::new(i, j, t, rng.random_range(0..=20)));
                }
            }
        }
    }
    let k = rng.random_range(1..=n);
    let d = rng.random_range(1..=u);
    let nodes: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let times: Vec<usize> = (0..u).map(|_| rng.random_range(0..d)).collect();
    let pick = |rng: &mut ChaCha8Rng| [0.5, 1.0, 2.0][rng.random_range(0..3)];
    Instance {
        tensor: build_tensor(edges, n, u).unwrap(),
        partition: Partition::from_raw_labels(&nodes, &times).unwrap(),
        priors: Priors::new(pick(rng), pick(rng), pick(rng), pick(rng)).unwrap(),
    }
}

fn close(delta: f64, want: f64) -> bool {
    (delta - want).abs() <= 1e-8 * want.abs().max(1.0)
}

/// ICL change from applying `mv` and recomputing everything from scratch.
fn full_difference(inst: &Instance, stats: &SuffStats, mv: Move) -> f64 {
    let before = icl_full(stats, &inst.priors).value;
    let mut partition = inst.partition.clone();
    let mut after = stats.clone();
    after.apply_move(&inst.tensor, &mut partition, mv).unwrap();
    let fresh = SuffStats::compute(&inst.tensor, &partition, stats.k_max(), stats.d_max()).unwrap();
    assert!(after.matches(&fresh, 1e-9), "incremental stats drifted");
    icl_full(&fresh, &inst.priors).value - before
}

#[test]
fn deltas_match_full_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0usize;
    for _ in 0..300 {
        let inst = random_instance(&mut rng);
        let p = &inst.partition;
        let stats = SuffStats::compute(&inst.tensor, p, p.k(), p.d()).unwrap();
        let sizes = p.node_cluster_sizes();
        for i in 0..p.n_nodes() {
            for to in 0..p.k() {
                if to == p.node_label(i) || sizes[p.node_label(i)] < 2 {
                    continue;
                }
                let delta = delta_exchange_node(&stats, p, i, to, &inst.priors).unwrap();
                let want = full_difference(&inst, &stats, Move::Node { node: i, to });
                assert!(close(delta, want), "node {i}->{to}: {delta} vs {want}");
                checked += 1;
            }
        }
        let tsizes = p.time_cluster_sizes();
        for u in 0..p.n_intervals() {
            for to in 0..p.d() {
                if to == p.interval_label(u) || tsizes[p.interval_label(u)] < 2 {
                    continue;
                }
                let delta = delta_exchange_time(&stats, p, u, to, &inst.priors).unwrap();
                let want = full_difference(&inst, &stats, Move::Interval { interval: u, to });
                assert!(close(delta, want), "interval {u}->{to}: {delta} vs {want}");
                checked += 1;
            }
        }
        for a in 0..p.k() {
            for b in 0..p.k() {
                if a != b {
                    let delta = delta_merge_node(&stats, a, b, &inst.priors).unwrap();
                    let want =
                        full_difference(&inst, &stats, Move::MergeNodes { from: b, into: a });
                    assert!(close(delta, want), "merge nodes {a},{b}: {delta} vs {want}");
                    checked += 1;
                }
            }
        }
        for a in 0..p.d() {
            for b in 0..p.d() {
                if a != b {
                    let delta = delta_merge_time(&stats, a, b, &inst.priors).unwrap();
                    let want =
                        full_difference(&inst, &stats, Move::MergeTimes { from: b, into: a });
                    assert!(close(delta, want), "merge times {a},{b}: {delta} vs {want}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn exchange_and_its_reverse_cancel() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let inst = random_instance(&mut rng);
        let p = &inst.partition;
        let sizes = p.node_cluster_sizes();
        let Some(i) = (0..p.n_nodes()).find(|&i| sizes[p.node_label(i)] >= 2) else {
            continue;
        };
        if p.k() < 2 {
            continue;
        }
        let from = p.node_label(i);
        let to = (from + 1) % p.k();
        let stats = SuffStats::compute(&inst.tensor, p, p.k(), p.d()).unwrap();
        let forward = delta_exchange_node(&stats, p, i, to, &inst.priors).unwrap();
        let mut moved = p.clone();
        let mut after = stats.clone();
        after
            .apply_move(&inst.tensor, &mut moved, Move::Node { node: i, to })
            .unwrap();
        let back = delta_exchange_node(&after, &moved, i, from, &inst.priors).unwrap();
        assert!((forward + back).abs() <= 1e-8 * forward.abs().max(1.0));
    }
}

#[test]
fn icl_is_invariant_under_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let inst = random_instance(&mut rng);
        let p = &inst.partition;
        let (k, d) = (p.k(), p.d());
        let nodes: Vec<usize> = p.node_labels().iter().map(|&c| k - 1 - c).collect();
        let times: Vec<usize> = p.interval_labels().iter().map(|&c| (c + 1) % d).collect();
        let q = Partition::new(nodes, times).unwrap();
        let a = icl_full(
            &SuffStats::compute(&inst.tensor, p, k, d).unwrap(),
            &inst.priors,
        );
        let b = icl_full(
            &SuffStats::compute(&inst.tensor, &q, k, d).unwrap(),
            &inst.priors,
        );
        assert!((a.value - b.value).abs() <= 1e-9 * a.value.abs().max(1.0));
    }
}

#[test]
fn exposure_has_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let p = &inst.partition;
        let stats = SuffStats::compute(&inst.tensor, p, p.k(), p.d()).unwrap();
        let a = p.node_cluster_sizes();
        let c = p.time_cluster_sizes();
        let mut total = 0u64;
        for k in 0..p.k() {
            for g in 0..p.k() {
                for (d, &cd) in c.iter().enumerate() {
                    let pairs = if k == g {
                        a[k] * (a[k] - 1)
                    } else {
                        a[k] * a[g]
                    };
                    assert_eq!(stats.r(k, g, d), (pairs * cd) as u64);
                    total += stats.s(k, g, d);
                }
            }
        }
        assert_eq!(total, inst.tensor.total());
    }
}

#[test]
fn random_move_sequences_keep_stats_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let mut p = inst.partition.clone();
        let (kmax, dmax) = (p.k(), p.d());
        let mut stats = SuffStats::compute(&inst.tensor, &p, kmax, dmax).unwrap();
        for _ in 0..30 {
            let mv = if rng.random::<bool>() {
                let i = rng.random_range(0..p.n_nodes());
                Move::Node {
                    node: i,
                    to: rng.random_range(0..p.k()),
                }
            } else {
                let u = rng.random_range(0..p.n_intervals());
                Move::Interval {
                    interval: u,
                    to: rng.random_range(0..p.d()),
                }
            };
            let noop = match mv {
                Move::Node { node, to } => p.node_label(node) == to,
                Move::Interval { interval, to } => p.interval_label(interval) == to,
                _ => unreachable!(),
            };
            if noop {
                continue;
            }
            stats.apply_move(&inst.tensor, &mut p, mv).unwrap();
            let fresh = SuffStats::compute(&inst.tensor, &p, kmax, dmax).unwrap();
            assert!(stats.matches(&fresh, 1e-9));
            assert_eq!((stats.k(), stats.d()), (p.k(), p.d()));
        }
    }
}
