//! Lloyd's k-means with k-means++ seeding.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::squared_distance;

#[derive(Debug, Clone, Copy)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 2,
            restarts: 10,
            max_iter: 300,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(i, c)| (i, squared_distance(point, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn plus_plus<R: Rng>(points: &[&[f64]], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].to_vec()];
    while centroids.len() < k {
        let weights: Vec<f64> = points.iter().map(|p| nearest(p, &centroids).1).collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(rng),
            // every point coincides with a centroid
            Err(_) => rng.random_range(0..points.len()),
        };
        centroids.push(points[next].to_vec());
    }
    centroids
}

fn lloyd(points: &[&[f64]], mut centroids: Vec<Vec<f64>>, cfg: &KMeansConfig) -> Clustering {
    let dim = points[0].len();
    let mut labels = vec![0usize; points.len()];
    for _ in 0..cfg.max_iter {
        for (label, p) in labels.iter_mut().zip(points) {
            *label = nearest(p, &centroids).0;
        }
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..centroids.len() {
            let updated = if counts[c] == 0 {
                // reseed an empty cluster at the point farthest from its centroid
                let far = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, squared_distance(p, &centroids[labels[i]])))
                    .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
                    .0;
                points[far].to_vec()
            } else {
                sums[c].iter().map(|s| s / counts[c] as f64).collect()
            };
            shift = shift.max(squared_distance(&updated, &centroids[c]).sqrt());
            centroids[c] = updated;
        }
        if shift < cfg.tolerance {
            break;
        }
    }
    let mut inertia = 0.0;
    for (label, p) in labels.iter_mut().zip(points) {
        let (l, d) = nearest(p, &centroids);
        *label = l;
        inertia += d;
    }
    Clustering {
        labels,
        centroids,
        inertia,
    }
}

/// Best of `cfg.restarts` seeded runs by within-cluster sum of squares.
pub fn kmeans(points: &[&[f64]], cfg: &KMeansConfig) -> Clustering {
    assert!(!points.is_empty(), "kmeans needs points");
    let k = cfg.k.min(points.len()).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..cfg.restarts.max(1) {
        let init = plus_plus(points, k, &mut rng);
        let run = lloyd(points, init, cfg);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}
