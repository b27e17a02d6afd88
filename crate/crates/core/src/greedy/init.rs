//! Initial partitions for the greedy search.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::partition::compact_labels;

/// Item `x` goes to cluster `x mod clusters`.
pub(crate) fn round_robin(items: usize, clusters: usize) -> Vec<usize> {
    (0..items).map(|x| x % clusters).collect()
}

/// I.i.d. uniform labels over `clusters`, with empty clusters dropped.
pub(crate) fn uniform<R: Rng + ?Sized>(items: usize, clusters: usize, rng: &mut R) -> Vec<usize> {
    let raw: Vec<usize> = (0..items).map(|_| rng.random_range(0..clusters)).collect();
    compact_labels(&raw)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
}

/// Average-linkage agglomerative clustering on Euclidean distances, stopped
/// when `clusters` groups remain. Ties go to the lowest index pair.
pub(crate) fn average_linkage(features: &[Vec<f64>], clusters: usize) -> Vec<usize> {
    let n = features.len();
    let clusters = clusters.clamp(1, n.max(1));
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclidean(&features[i], &features[j]);
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut remaining = n;
    while remaining > clusters {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if active[j] && dist[i * n + j] < best.0 {
                    best = (dist[i * n + j], i, j);
                }
            }
        }
        let (_, a, b) = best;
        // Lance-Williams update for the unweighted average
        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for x in 0..n {
            if active[x] && x != a && x != b {
                let v = (sa * dist[a * n + x] + sb * dist[b * n + x]) / (sa + sb);
                dist[a * n + x] = v;
                dist[x * n + a] = v;
            }
        }
        size[a] += size[b];
        active[b] = false;
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }
        remaining -= 1;
    }
    compact_labels(&owner)
}
