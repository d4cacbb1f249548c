//! One-hot graph encoder embedding.
//!
//! Supervised GEE computes `Z = A·W` where `W` is the column-normalised
//! one-hot label matrix, so row `i` of `Z` holds node `i`'s average
//! connectivity to each class. The unsupervised variant alternates this with
//! k-means on `Z` until the labels stop changing.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::cluster::kmeans;
use crate::error::{Error, Result};
use crate::graph::{Graph, LabelVector};

/// Default iteration cap for the unsupervised loop.
pub const DEFAULT_MAX_ITER: usize = 30;
const KMEANS_MAX_ITER: usize = 300;

/// Dense `n×d` node representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    data: Array2<f64>,
}

impl Embedding {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("embedding entries must be finite".into()));
        }
        Ok(Self { data })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }

    /// Scales every non-zero row to unit Euclidean norm.
    pub fn row_normalized(mut self) -> Self {
        normalize_rows(&mut self.data);
        self
    }

    /// One row per node: `node,z0,z1,...`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let fail = |e: csv::Error| Error::Config(format!("embedding output: {e}"));
        let header = std::iter::once("node".to_string()).chain((0..self.dim()).map(|j| format!("z{j}")));
        out.write_record(header).map_err(fail)?;
        for (i, row) in self.data.rows().into_iter().enumerate() {
            out.write_record(std::iter::once(i.to_string()).chain(row.iter().map(f64::to_string)))
                .map_err(fail)?;
        }
        out.flush().map_err(|e| Error::Config(format!("embedding output: {e}")))
    }
}

/// `W` in factored form: each node's class (if any) and the per-class `1/n_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderWeights {
    class_of: Vec<Option<usize>>,
    inv_sizes: Vec<f64>,
}

impl EncoderWeights {
    pub fn k(&self) -> usize {
        self.inv_sizes.len()
    }

    /// `W_ik`.
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        match self.class_of[i] {
            Some(c) if c == k => self.inv_sizes[k],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.class_of.len(), self.k()), |(i, k)| self.weight(i, k))
    }
}

/// `W_ik = 𝟙{Yᵢ = k} / n_k`, counting only unmasked nodes. Every class needs
/// at least one labelled member.
pub fn encoder_weights(y: &LabelVector) -> Result<EncoderWeights> {
    y.require_all_classes()?;
    Ok(encoder_weights_allow_empty(y))
}

/// Like [`encoder_weights`] but an empty class just yields a zero column.
fn encoder_weights_allow_empty(y: &LabelVector) -> EncoderWeights {
    let counts = y.class_counts();
    EncoderWeights {
        class_of: (0..y.len()).map(|i| y.get(i)).collect(),
        inv_sizes: counts
            .iter()
            .map(|&c| if c > 0 { 1.0 / c as f64 } else { 0.0 })
            .collect(),
    }
}

fn embed_with(g: &Graph, w: &EncoderWeights) -> Array2<f64> {
    let k = w.k();
    let mut z = Array2::zeros((g.n(), k));
    let zs = z.as_slice_mut().expect("fresh array");
    for i in 0..g.n() {
        for &j in g.neighbors(i) {
            if let Some(c) = w.class_of[j] {
                zs[i * k + c] += w.inv_sizes[c];
            }
        }
    }
    z
}

/// Divides each row by its Euclidean norm; all-zero rows stay zero.
pub fn normalize_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
}

/// Supervised GEE, `Z = A·W`, in `O(m + nK)` using the raw adjacency.
pub fn supervised_gee(g: &Graph, y: &LabelVector) -> Result<Embedding> {
    if y.len() != g.n() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: g.n(),
        });
    }
    let w = encoder_weights(y)?;
    Embedding::new(embed_with(g, &w))
}

#[derive(Clone, Debug)]
pub struct UnsupervisedGee {
    pub embedding: Embedding,
    pub labels: LabelVector,
    pub iterations: usize,
    /// Whether the loop stopped because the labels stopped changing.
    pub converged: bool,
    /// Classes empty in the final labelling.
    pub empty_classes: Vec<usize>,
}

/// Unsupervised GEE: random labels, then alternate GEE and k-means until the
/// labelling is unchanged up to a renaming of clusters, or `max_iter` passes.
///
/// The returned embedding is the one from the last GEE pass, i.e. the one the
/// final labels were clustered from.
pub fn unsupervised_gee<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    max_iter: usize,
    rng: &mut R,
) -> Result<UnsupervisedGee> {
    unsupervised_gee_with(g, k, max_iter, false, rng)
}

/// [`unsupervised_gee`], optionally clustering the row-normalised embedding.
/// The returned embedding is always the raw `A·W` of the last pass.
pub fn unsupervised_gee_with<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    max_iter: usize,
    row_normalize: bool,
    rng: &mut R,
) -> Result<UnsupervisedGee> {
    if g.m() == 0 {
        return Err(Error::DegenerateGraph("unsupervised GEE"));
    }
    if k < 2 {
        return Err(Error::Config("unsupervised GEE needs K >= 2".into()));
    }
    if max_iter == 0 {
        return Err(Error::Config("unsupervised GEE needs at least one iteration".into()));
    }
    let n = g.n();
    if n < k {
        return Err(Error::InsufficientPoints { n, k });
    }

    let mut labels = random_labels(n, k, rng)?;
    let mut embedding = Array2::zeros((n, k));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        embedding = embed_with(g, &encoder_weights_allow_empty(&labels));
        let next = if row_normalize {
            let mut unit = embedding.clone();
            normalize_rows(&mut unit);
            kmeans(unit.view(), k, k, KMEANS_MAX_ITER, rng)?.labels
        } else {
            kmeans(embedding.view(), k, k, KMEANS_MAX_ITER, rng)?.labels
        };
        let same = next.canonical() == labels.canonical();
        labels = next;
        if same {
            converged = true;
            break;
        }
    }
    let empty_classes = labels
        .class_counts()
        .iter()
        .enumerate()
        .filter_map(|(c, &s)| (s == 0).then_some(c))
        .collect();
    Ok(UnsupervisedGee {
        embedding: Embedding::new(embedding)?,
        labels,
        iterations,
        converged,
        empty_classes,
    })
}

/// Uniform i.i.d. labels, redrawn until every class is used.
fn random_labels<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<LabelVector> {
    loop {
        let values: Vec<i32> = (0..n).map(|_| rng.random_range(0..k) as i32).collect();
        let y = LabelVector::new(values, k)?;
        if y.class_counts().iter().all(|&c| c > 0) {
            return Ok(y);
        }
    }
}
