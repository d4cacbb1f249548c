use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::LabelVector;

/// Shrinkage toward a scaled identity applied to the pooled covariance.
pub const DEFAULT_SHRINKAGE: f64 = 1e-3;

/// Linear discriminant analysis with a shared (pooled) covariance.
///
/// Prediction takes the argmax of
/// `δ_k(x) = xᵀΣ⁻¹μ_k − ½ μ_kᵀΣ⁻¹μ_k + log π_k`, ties going to the lowest
/// class index. Classes absent from the training rows are never predicted.
#[derive(Clone, Debug)]
pub struct LdaModel {
    pub class_means: Array2<f64>,
    pub pooled_covariance: Array2<f64>,
    /// `log π_k`; `-inf` for classes absent at fit time.
    pub log_priors: Vec<f64>,
    pub shrinkage: f64,
    coef: Array2<f64>,
    intercept: Array1<f64>,
}

impl LdaModel {
    /// Builds a model from explicit parameters. `covariance` must be positive
    /// definite.
    pub fn from_parts(
        class_means: Array2<f64>,
        covariance: Array2<f64>,
        log_priors: Vec<f64>,
        shrinkage: f64,
    ) -> Result<Self> {
        let (k, d) = class_means.dim();
        if covariance.dim() != (d, d) {
            return Err(Error::shape("LDA covariance", format!("{d}x{d}"), format!("{:?}", covariance.dim())));
        }
        if log_priors.len() != k {
            return Err(Error::LengthMismatch {
                left: log_priors.len(),
                right: k,
            });
        }
        let sigma = DMatrix::from_fn(d, d, |i, j| covariance[[i, j]]);
        let chol = sigma
            .cholesky()
            .ok_or_else(|| Error::Config("pooled covariance is not positive definite; raise the shrinkage".into()))?;
        let means = DMatrix::from_fn(d, k, |i, j| class_means[[j, i]]);
        let solved = chol.solve(&means);
        let mut coef = Array2::zeros((d, k));
        let mut intercept = Array1::zeros(k);
        for c in 0..k {
            let mu = DVector::from_fn(d, |i, _| class_means[[c, i]]);
            let w = solved.column(c);
            for i in 0..d {
                coef[[i, c]] = w[i];
            }
            intercept[c] = -0.5 * mu.dot(&w) + log_priors[c];
        }
        Ok(Self {
            class_means,
            pooled_covariance: covariance,
            log_priors,
            shrinkage,
            coef,
            intercept,
        })
    }

    pub fn k(&self) -> usize {
        self.class_means.nrows()
    }

    pub fn dim(&self) -> usize {
        self.class_means.ncols()
    }

    /// Discriminant scores, one row per input row.
    pub fn decision_function(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::shape("LDA predict", format!("{} columns", self.dim()), format!("{} columns", x.ncols())));
        }
        Ok(x.dot(&self.coef) + &self.intercept)
    }
}

/// Fits LDA on the rows of `x` whose label is known; masked rows are skipped.
pub fn lda_fit(x: ArrayView2<'_, f64>, y: &LabelVector, shrinkage: f64) -> Result<LdaModel> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::Config(format!("shrinkage {shrinkage} outside [0, 1]")));
    }
    let (k, d) = (y.k(), x.ncols());
    let rows: Vec<(usize, usize)> = (0..y.len()).filter_map(|i| y.get(i).map(|c| (i, c))).collect();
    if rows.is_empty() {
        return Err(Error::EmptyInput("LDA fit"));
    }
    let counts = y.class_counts();
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::DegenerateFit { classes: present });
    }

    let mut means = Array2::<f64>::zeros((k, d));
    for &(i, c) in &rows {
        means.row_mut(c).scaled_add(1.0, &x.row(i));
    }
    for (mut row, &count) in means.outer_iter_mut().zip(&counts) {
        if count > 0 {
            row.mapv_inplace(|v| v / count as f64);
        }
    }

    let mut scatter = Array2::<f64>::zeros((d, d));
    for &(i, c) in &rows {
        let diff = &x.row(i) - &means.row(c);
        for a in 0..d {
            for b in 0..d {
                scatter[[a, b]] += diff[a] * diff[b];
            }
        }
    }
    let dof = if rows.len() > present { rows.len() - present } else { rows.len() };
    let mut cov = scatter / dof as f64;
    let trace: f64 = cov.diag().sum();
    let target = if trace > 0.0 { trace / d as f64 } else { 1.0 };
    let lambda = if trace > 0.0 { shrinkage } else { 1.0 };
    cov.mapv_inplace(|v| (1.0 - lambda) * v);
    for a in 0..d {
        cov[[a, a]] += lambda * target;
    }
    for a in 0..d {
        for b in (a + 1)..d {
            let s = 0.5 * (cov[[a, b]] + cov[[b, a]]);
            cov[[a, b]] = s;
            cov[[b, a]] = s;
        }
    }

    let n = rows.len() as f64;
    let log_priors = counts
        .iter()
        .map(|&c| if c > 0 { (c as f64 / n).ln() } else { f64::NEG_INFINITY })
        .collect();
    LdaModel::from_parts(means, cov, log_priors, shrinkage)
}

pub fn lda_predict(model: &LdaModel, x: ArrayView2<'_, f64>) -> Result<LabelVector> {
    let scores = model.decision_function(x)?;
    let values = scores
        .outer_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &s) in row.iter().enumerate() {
                if s > row[best] {
                    best = c;
                }
            }
            best as i32
        })
        .collect();
    LabelVector::new(values, model.k())
}
