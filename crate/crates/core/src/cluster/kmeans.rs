//! Lloyd's k-means with k-means++ seeding.
//!
//! Determinism rules: nearest-centroid ties break toward the lower cluster
//! index, candidate draws come from a caller-seeded stream, and restarts
//! reuse that stream so run r of n is identical to run r of n+1.

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::seeding;

const MAX_ITERS: usize = 300;
const RESTART_CAP: usize = 10;

#[derive(Debug, Clone)]
pub struct KmeansResult {
    /// Cluster index in `[0, k)` per input row.
    pub assignment: Vec<usize>,
    /// Set when the restart policy could not separate the rows (e.g. all rows
    /// identical) and a forced balanced split was used instead.
    pub degenerate: bool,
}

/// Cluster `rows` into `k` non-empty groups.
///
/// Runs k-means++ seeding followed by Lloyd iterations (cap 300, convergence
/// when assignments stop changing). A run that leaves some cluster empty is
/// retried with a fresh seeding, up to 10 restarts; if every restart fails,
/// rows are sorted and split into k contiguous chunks and the result carries
/// the `degenerate` flag.
pub fn kmeans(rows: &[Vec<f64>], k: usize, seed: u64) -> Result<KmeansResult> {
    let n = rows.len();
    if k == 0 {
        return Err(Error::InvalidArgument("k-means requires k >= 1".into()));
    }
    if n < k {
        return Err(Error::InvalidArgument(format!("k-means requires n >= k ({n} < {k})")));
    }
    let mut rng = seeding::rng_for(seed, "kmeans");
    for _ in 0..RESTART_CAP {
        if let Some(assignment) = lloyd(rows, k, &mut rng) {
            return Ok(KmeansResult { assignment, degenerate: false });
        }
    }
    Ok(KmeansResult { assignment: forced_split(rows, k), degenerate: true })
}

/// One seeding + Lloyd run; `None` when a cluster ends up empty.
fn lloyd(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha20Rng) -> Option<Vec<usize>> {
    let n = rows.len();
    let mut centroids = seed_plus_plus(rows, k, rng);
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (i, row) in rows.iter().enumerate() {
            let c = nearest_centroid(row, &centroids);
            if c != assignment[i] {
                assignment[i] = c;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        for &c in &assignment {
            counts[c] += 1;
        }
        if counts.iter().any(|&c| c == 0) {
            return None;
        }
        if !changed {
            return Some(assignment);
        }
        let dim = rows[0].len();
        for c in centroids.iter_mut() {
            c.iter_mut().for_each(|x| *x = 0.0);
        }
        for (row, &c) in rows.iter().zip(&assignment) {
            for d in 0..dim {
                centroids[c][d] += row[d];
            }
        }
        for (c, count) in centroids.iter_mut().zip(&counts) {
            c.iter_mut().for_each(|x| *x /= *count as f64);
        }
    }
    let mut counts = vec![0usize; k];
    for &c in &assignment {
        counts[c] += 1;
    }
    (!counts.contains(&0)).then_some(assignment)
}

/// k-means++: first centroid uniform, the rest proportional to the squared
/// distance from the nearest chosen centroid.
fn seed_plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha20Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(rows[rng.random_range(0..n)].clone());
    let mut dist2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            // All remaining mass is zero; duplicate draws will be caught by
            // the empty-cluster check.
            rng.random_range(0..n)
        };
        centroids.push(rows[next].clone());
        for (d, row) in dist2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(row, centroids.last().unwrap()));
        }
    }
    centroids
}

fn nearest_centroid(row: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Deterministic fallback: order rows lexicographically (index as tiebreak)
/// and cut into k contiguous chunks.
fn forced_split(rows: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = rows.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        rows[i]
            .iter()
            .zip(&rows[j])
            .find_map(|(a, b)| a.partial_cmp(b).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut assignment = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        assignment[idx] = pos * k / n;
    }
    assignment
}
