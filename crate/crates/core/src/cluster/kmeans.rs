use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::LabelVector;

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub labels: LabelVector,
    pub centroids: Array2<f64>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
    pub iterations: usize,
    /// Clusters that stayed empty after their one re-seed.
    pub empty_clusters: Vec<usize>,
}

/// One Lloyd run from a k-means++ start, with its per-iteration inertia.
#[derive(Clone, Debug)]
pub struct LloydRun {
    pub assignment: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia_trace: Vec<f64>,
    pub empty_clusters: Vec<usize>,
}

impl LloydRun {
    pub fn inertia(&self) -> f64 {
        *self.inertia_trace.last().expect("at least one assignment step")
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Best of `restarts` Lloyd runs, by inertia. Earlier restarts win ties.
pub fn kmeans<R: Rng + ?Sized>(
    points: ArrayView2<'_, f64>,
    k: usize,
    restarts: usize,
    max_iter: usize,
    rng: &mut R,
) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || n < k {
        return Err(Error::InsufficientPoints { n, k });
    }
    if max_iter == 0 {
        return Err(Error::Config("k-means needs max_iter >= 1".into()));
    }
    let mut best: Option<LloydRun> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, k, max_iter, rng);
        if best.as_ref().is_none_or(|b| run.inertia() < b.inertia()) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let labels = LabelVector::from_usize(&best.assignment, k)?;
    Ok(KMeansResult {
        labels,
        inertia: best.inertia(),
        iterations: best.inertia_trace.len(),
        centroids: best.centroids,
        empty_clusters: best.empty_clusters,
    })
}

fn kmeans_pp<R: Rng + ?Sized>(x: &[f64], n: usize, d: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(&x[first * d..(first + 1) * d]);
    let mut closest: Vec<f64> = (0..n)
        .map(|i| sq_dist(&x[i * d..(i + 1) * d], &centroids[..d]))
        .collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in closest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.extend_from_slice(&x[pick * d..(pick + 1) * d]);
        let new = &centroids[c * d..(c + 1) * d];
        for (i, slot) in closest.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(&x[i * d..(i + 1) * d], new));
        }
    }
    centroids
}

/// Nearest centroid for every point (ties to the lowest index) and the
/// resulting inertia.
fn assign(x: &[f64], d: usize, centroids: &[f64], k: usize, out: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, slot) in out.iter_mut().enumerate() {
        let p = &x[i * d..(i + 1) * d];
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let dist = sq_dist(p, &centroids[c * d..(c + 1) * d]);
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        *slot = best;
        inertia += best_d;
    }
    inertia
}

/// A single k-means++ seeded Lloyd run.
///
/// An empty cluster is re-seeded once at the point farthest from its own
/// centroid; if it empties again it is left empty and reported.
pub fn lloyd<R: Rng + ?Sized>(points: ArrayView2<'_, f64>, k: usize, max_iter: usize, rng: &mut R) -> LloydRun {
    let (n, d) = points.dim();
    let owned = points.as_standard_layout();
    let x = owned.as_slice().expect("standard layout");
    let mut centroids = kmeans_pp(x, n, d, k, rng);
    let mut assignment = vec![usize::MAX; n];
    let mut next = vec![0usize; n];
    let mut reseeded = vec![false; k];
    let mut inertia_trace = Vec::new();
    let mut pending_reseed = false;

    for _ in 0..max_iter {
        let inertia = assign(x, d, &centroids, k, &mut next);
        inertia_trace.push(inertia);
        let changed = next != assignment;
        std::mem::swap(&mut assignment, &mut next);
        if !changed && !pending_reseed {
            break;
        }
        pending_reseed = false;

        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for (s, &v) in sums[c * d..(c + 1) * d].iter_mut().zip(&x[i * d..(i + 1) * d]) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centroids[c * d + j] = sums[c * d + j] / counts[c] as f64;
                }
            }
        }
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0 && !reseeded[c]).collect();
        if !empties.is_empty() {
            let mut far: Vec<(f64, usize)> = (0..n)
                .map(|i| {
                    let c = assignment[i];
                    (sq_dist(&x[i * d..(i + 1) * d], &centroids[c * d..(c + 1) * d]), i)
                })
                .collect();
            far.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for (&c, &(_, i)) in empties.iter().zip(&far) {
                centroids[c * d..(c + 1) * d].copy_from_slice(&x[i * d..(i + 1) * d]);
                reseeded[c] = true;
            }
            pending_reseed = true;
        }
    }

    let mut counts = vec![0usize; k];
    for &c in &assignment {
        counts[c] += 1;
    }
    let empty_clusters = (0..k).filter(|&c| counts[c] == 0).collect();
    LloydRun {
        assignment,
        centroids: Array2::from_shape_vec((k, d), centroids).expect("k×d centroids"),
        inertia_trace,
        empty_clusters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use ndarray::array;

    #[test]
    fn recovers_duplicated_locations() {
        let pts = array![[0.0, 0.0], [5.0, 5.0], [0.0, 0.0], [-3.0, 7.0], [5.0, 5.0], [-3.0, 7.0]];
        let res = kmeans(pts.view(), 3, 3, 100, &mut rng_from_seed(1)).unwrap();
        assert_eq!(res.inertia, 0.0);
        let v = res.labels.values();
        assert_eq!(v[0], v[2]);
        assert_eq!(v[1], v[4]);
        assert_eq!(v[3], v[5]);
        assert!(res.empty_clusters.is_empty());
    }

    #[test]
    fn one_dimensional_split() {
        let pts = array![[0.0], [0.1], [10.0], [10.1]];
        let res = kmeans(pts.view(), 2, 4, 100, &mut rng_from_seed(2)).unwrap();
        let v = res.labels.values();
        assert_eq!(v[0], v[1]);
        assert_eq!(v[2], v[3]);
        assert_ne!(v[0], v[2]);
        assert!((res.inertia - 0.01).abs() < 1e-12);
    }

    #[test]
    fn identical_points_leave_a_flagged_empty_cluster() {
        let pts = Array2::from_elem((5, 2), 1.5);
        let res = kmeans(pts.view(), 2, 1, 50, &mut rng_from_seed(3)).unwrap();
        let counts = res.labels.class_counts();
        assert_eq!(counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(res.empty_clusters.len(), 1);
        assert_eq!(res.inertia, 0.0);
    }

    #[test]
    fn too_few_points() {
        let pts = array![[0.0], [1.0]];
        assert!(matches!(
            kmeans(pts.view(), 3, 1, 10, &mut rng_from_seed(0)),
            Err(Error::InsufficientPoints { n: 2, k: 3 })
        ));
    }

    #[test]
    fn ties_go_to_lowest_centroid() {
        let centroids = [0.0, 2.0];
        let mut out = [9usize];
        assign(&[1.0], 1, &centroids, 2, &mut out);
        assert_eq!(out[0], 0);
    }
}
