//! Lloyd's k-means with k-means++ seeding.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_MAX_ITERS: usize = 300;

/// A fitted clustering of a time-ordered sequence of points.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    centroids: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    cluster_order: Vec<usize>,
    wcss_history: Vec<f64>,
    converged: bool,
}

impl ClusterModel {
    /// Builds a model whose centroids are the member means of `assignments`.
    pub fn from_assignments<P: AsRef<[f64]>>(
        points: &[P],
        assignments: Vec<usize>,
        k: usize,
    ) -> Result<Self> {
        let centroids = member_means(points, &assignments, k)?;
        let wcss = wcss(points, &centroids, &assignments);
        let cluster_order = time_order(&assignments, k);
        Ok(ClusterModel {
            centroids,
            assignments,
            cluster_order,
            wcss_history: vec![wcss],
            converged: true,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Cluster id of each point, by position in the input sequence.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Cluster ids sorted by ascending mean member position.
    pub fn cluster_order(&self) -> &[usize] {
        &self.cluster_order
    }

    /// Within-cluster sum of squares after each Lloyd iteration.
    pub fn wcss_history(&self) -> &[f64] {
        &self.wcss_history
    }

    pub fn wcss(&self) -> f64 {
        *self.wcss_history.last().expect("at least one iteration")
    }

    /// Whether the assignment reached a fixpoint before the iteration cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Member positions of `cluster`, in input order.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn wcss<P: AsRef<[f64]>>(points: &[P], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| sq_dist(p.as_ref(), &centroids[c]))
        .sum()
}

fn member_means<P: AsRef<[f64]>>(points: &[P], assignments: &[usize], k: usize) -> Result<Vec<Vec<f64>>> {
    let dim = points.first().map_or(0, |p| p.as_ref().len());
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(p.as_ref()) {
            *s += v;
        }
    }
    for (c, (sum, &n)) in sums.iter_mut().zip(&counts).enumerate() {
        if n == 0 {
            return Err(Error::EmptyCluster(c));
        }
        for s in sum.iter_mut() {
            *s /= n as f64;
        }
    }
    Ok(sums)
}

fn time_order(assignments: &[usize], k: usize) -> Vec<usize> {
    let mut pos_sum = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (i, &c) in assignments.iter().enumerate() {
        pos_sum[c] += i as f64;
        counts[c] += 1;
    }
    let mean: Vec<f64> = pos_sum
        .iter()
        .zip(&counts)
        .map(|(s, &n)| if n == 0 { f64::INFINITY } else { s / n as f64 })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| mean[a].total_cmp(&mean[b]).then(a.cmp(&b)));
    order
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn plus_plus_init<P: AsRef<[f64]>>(points: &[P], k: usize, rng: &mut seed::Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].as_ref().to_vec());
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p.as_ref(), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // Rounding can leave the tail chosen with zero weight.
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&d| d > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].as_ref().to_vec();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p.as_ref(), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Moves, for each empty cluster, the point farthest from its own centroid
/// (among clusters with more than one member) into that cluster.
fn repair_empty<P: AsRef<[f64]>>(points: &[P], centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &c in assignments.iter() {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let c = assignments[i];
            if counts[c] < 2 {
                continue;
            }
            let d = sq_dist(p.as_ref(), &centroids[c]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("n >= k guarantees a donor cluster");
        counts[assignments[i]] -= 1;
        assignments[i] = empty;
        counts[empty] = 1;
        centroids[empty] = points[i].as_ref().to_vec();
    }
}

/// Clusters `points` into `k` groups. Iterates until the assignment stops
/// changing or `max_iters` Lloyd steps have run; a fixed `seed` gives an
/// identical model.
pub fn kmeans<P: AsRef<[f64]>>(points: &[P], k: usize, seed: u64, max_iters: usize) -> Result<ClusterModel> {
    let n = points.len();
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if n < k {
        return Err(Error::TooFewFrames { frames: n, k });
    }
    let dim = points[0].as_ref().len();
    if let Some(bad) = points.iter().find(|p| p.as_ref().len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.as_ref().len(),
        });
    }

    let mut rng = seed::rng(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut assignments: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..max_iters.max(1) {
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p.as_ref(), &centroids)).collect();
        repair_empty(points, &mut centroids, &mut next);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        centroids = member_means(points, &assignments, k)?;
        history.push(wcss(points, &centroids, &assignments));
    }

    let cluster_order = time_order(&assignments, k);
    Ok(ClusterModel {
        centroids,
        assignments,
        cluster_order,
        wcss_history: history,
        converged,
    })
}
