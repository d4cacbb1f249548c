#![allow(dead_code)]

use gnnseed::{Graph, LabelVector};
use ndarray::Array2;
use proptest::prelude::*;

/// Node count and raw (possibly repeated, reversed or looped) pairs.
pub fn raw_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_n).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 1..3 * n)))
}

/// Raw pairs with at least one non-loop edge.
pub fn raw_graph_with_edge(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    raw_graph(max_n).prop_filter("needs an edge", |(_, e)| e.iter().any(|&(u, v)| u != v))
}

pub fn labels_for(n: usize, k: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(0..k as i32, n)
}

pub fn dense_adjacency(n: usize, edges: &[(usize, usize)]) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for &(u, v) in edges {
        if u != v {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
    }
    a
}

pub fn dense_operator(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let at = a + &Array2::<f64>::eye(n);
    let d: Vec<f64> = at.rows().into_iter().map(|r| r.sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| at[[i, j]] / (d[i] * d[j]).sqrt())
}

pub fn dense_encoder(y: &[i32], k: usize) -> Array2<f64> {
    let mut counts = vec![0usize; k];
    for &c in y.iter().filter(|&&c| c >= 0) {
        counts[c as usize] += 1;
    }
    Array2::from_shape_fn((y.len(), k), |(i, c)| {
        if y[i] == c as i32 {
            1.0 / counts[c] as f64
        } else {
            0.0
        }
    })
}

/// `Σᵢⱼ Bᵢⱼ (C Cᵀ)ᵢⱼ` with `B = A − d dᵀ / 2m` built explicitly.
pub fn brute_trace(a: &Array2<f64>, c: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let d: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    let two_m: f64 = d.iter().sum();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let b = a[[i, j]] - d[i] * d[j] / two_m;
            let cc: f64 = (0..c.ncols()).map(|k| c[[i, k]] * c[[j, k]]).sum();
            total += b * cc;
        }
    }
    total
}

/// ARI from the four pair-agreement counts over all `n(n-1)/2` pairs.
pub fn pair_ari(a: &[i32], b: &[i32]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        return if n10 == 0.0 && n01 == 0.0 { 1.0 } else { 0.0 };
    }
    2.0 * (n00 * n11 - n01 * n10) / den
}

/// A loss over `Ẑ` returning its value and gradient.
pub type LossFn<'a> = &'a dyn Fn(&Array2<f64>) -> (f64, Array2<f64>);

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

pub fn cliques(count: usize, size: usize) -> (Graph, LabelVector) {
    let mut edges = Vec::new();
    for c in 0..count {
        for i in 0..size {
            for j in i + 1..size {
                edges.push((c * size + i, c * size + j));
            }
        }
    }
    let labels = (0..count * size).map(|i| (i / size) as i32).collect();
    (
        Graph::from_edge_list(&edges, count * size).unwrap(),
        LabelVector::new(labels, count).unwrap(),
    )
}

/// Central differences of `f` at `x` with step `h`.
pub fn numeric_gradient(x: &Array2<f64>, h: f64, mut f: impl FnMut(&Array2<f64>) -> f64) -> Array2<f64> {
    let mut probe = x.clone();
    let mut grad = Array2::zeros(x.dim());
    for idx in ndarray::indices(x.dim()) {
        let orig = probe[idx];
        probe[idx] = orig + h;
        let up = f(&probe);
        probe[idx] = orig - h;
        let down = f(&probe);
        probe[idx] = orig;
        grad[idx] = (up - down) / (2.0 * h);
    }
    grad
}

/// Largest entrywise error relative to the larger of the two gradients.
pub fn relative_error(analytic: &Array2<f64>, numeric: &Array2<f64>) -> f64 {
    max_abs_diff(analytic, numeric) / max_abs(analytic).max(max_abs(numeric)).max(1e-8)
}

/// Per block pair `(a ≤ b)`: observed edges, expected edges and variance,
/// with the expectation taken pair by pair from the model probabilities.
pub fn block_tallies(
    cfg: &gnnseed::synth::BlockModelConfig,
    g: &Graph,
    y: &LabelVector,
    theta: Option<&[f64]>,
) -> Vec<((usize, usize), f64, f64, f64)> {
    let k = cfg.k();
    let mut obs = vec![vec![0.0; k]; k];
    let mut exp = vec![vec![0.0; k]; k];
    let mut var = vec![vec![0.0; k]; k];
    let class = |i: usize| y.get(i).unwrap();
    for (u, v) in g.edges() {
        let (a, b) = (class(u).min(class(v)), class(u).max(class(v)));
        obs[a][b] += 1.0;
    }
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            let p = gnnseed::synth::edge_probability(cfg, y, theta, i, j);
            let (a, b) = (class(i).min(class(j)), class(i).max(class(j)));
            exp[a][b] += p;
            var[a][b] += p * (1.0 - p);
        }
    }
    let mut out = Vec::new();
    for a in 0..k {
        for b in a..k {
            out.push(((a, b), obs[a][b], exp[a][b], var[a][b]));
        }
    }
    out
}

/// Largest |z-score| of block edge counts summed over `trials` samples.
pub fn worst_block_z<F>(cfg: &gnnseed::synth::BlockModelConfig, trials: u64, mut sample: F) -> f64
where
    F: FnMut(u64) -> (Graph, LabelVector, Option<Vec<f64>>),
{
    let mut acc: Vec<((usize, usize), f64, f64, f64)> = Vec::new();
    for t in 0..trials {
        let (g, y, theta) = sample(t);
        let tallies = block_tallies(cfg, &g, &y, theta.as_deref());
        if acc.is_empty() {
            acc = tallies;
        } else {
            for (a, b) in acc.iter_mut().zip(tallies) {
                a.1 += b.1;
                a.2 += b.2;
                a.3 += b.3;
            }
        }
    }
    acc.iter().map(|&(_, o, e, v)| (o - e).abs() / v.sqrt()).fold(0.0, f64::max)
}

/// Disjoint, exhaustive, 90/10 inside the pool (±1 from rounding) and at
/// least two train and one val node per class.
pub fn check_split(y: &LabelVector, m: &gnnseed::SplitMasks, ratio: gnnseed::SplitRatio) -> Result<(), String> {
    let n = y.len();
    let mut seen = vec![0u8; n];
    for &i in m.train.iter().chain(&m.val).chain(&m.test) {
        seen[i] += 1;
    }
    if seen.iter().any(|&c| c != 1) {
        return Err("masks are not a partition".into());
    }
    let pool = m.train.len() + m.val.len();
    let (expected_pool, _) = gnnseed::pipelines::split_sizes(n, y.k(), ratio);
    if pool != expected_pool {
        return Err(format!("pool {pool}, expected {expected_pool}"));
    }
    let target = (n as f64 * ratio.percent() / 100.0).round() as usize;
    let inflated = pool > target;
    let val_share = pool as f64 / 10.0;
    if !inflated && (m.val.len() as f64 - val_share).abs() > 1.0 && m.val.len() != y.k() {
        return Err(format!("val {} of pool {pool}", m.val.len()));
    }
    for c in 0..y.k() {
        let t = m.train.iter().filter(|&&i| y.get(i) == Some(c)).count();
        let v = m.val.iter().filter(|&&i| y.get(i) == Some(c)).count();
        if t < 2 || v < 1 {
            return Err(format!("class {c}: {t} train, {v} val"));
        }
    }
    Ok(())
}

fn dense_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-1.5..1.5f64, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

/// Graph with an edge, `Z⁽⁰⁾`, weights and labels; `n ≤ max_n`, `2 ≤ K ≤ max_k`.
pub fn gcn_instance(
    max_n: usize,
    max_k: usize,
) -> impl Strategy<Value = (Graph, Array2<f64>, gnnseed::gcn::GcnModel, LabelVector)> {
    (raw_graph_with_edge(max_n), 2..=max_k).prop_flat_map(|((n, edges), k)| {
        (
            Just(Graph::from_edge_list(&edges, n).unwrap()),
            dense_matrix(n, k),
            dense_matrix(k, k),
            dense_matrix(k, k),
            prop::collection::vec(0..k as i32, n),
        )
            .prop_map(move |(g, z0, w0, w1, y)| {
                (g, z0, gnnseed::gcn::GcnModel { w0, w1 }, LabelVector::new(y, k).unwrap())
            })
    })
}

/// Pre-activations away from the ReLU kink, so finite differences are valid.
pub fn smooth_at(g: &Graph, z0: &Array2<f64>, model: &gnnseed::gcn::GcnModel) -> bool {
    let (_, t) = gnnseed::gcn::gcn_forward(&g.normalized_adjacency(), z0.view(), model).unwrap();
    t.p1.iter().chain(&t.p2).all(|p| p.abs() > 1e-3)
}
