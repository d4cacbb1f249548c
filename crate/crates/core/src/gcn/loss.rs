use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::graph::{modularity_forms, Graph, LabelVector};

/// Row-wise softmax, shifted by each row's maximum.
pub fn softmax_rows(z: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = z.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Backpropagates `∂L/∂C` through `C = softmax(Ẑ)` row by row.
fn softmax_backward(c: &Array2<f64>, grad_c: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(c.dim());
    for ((mut o, ci), gi) in out.outer_iter_mut().zip(c.outer_iter()).zip(grad_c.outer_iter()) {
        let inner = ci.dot(&gi);
        for ((ov, &cv), &gv) in o.iter_mut().zip(ci).zip(gi) {
            *ov = cv * (gv - inner);
        }
    }
    out
}

/// DMoN loss `−Tr(CᵀBC)/2m + (√K/n)·‖Σᵢ Cᵢ‖ − 1` with `C = softmax(Ẑ)`, and
/// its exact gradient with respect to `Ẑ`.
pub fn dmon_loss(g: &Graph, zhat: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
    if g.m() == 0 {
        return Err(Error::DegenerateGraph("DMoN loss"));
    }
    let (n, k) = zhat.dim();
    if n != g.n() {
        return Err(Error::shape("DMoN loss", format!("{} rows", g.n()), format!("{n} rows")));
    }
    let c = softmax_rows(zhat);
    let forms = modularity_forms(g, c.view())?;
    let two_m = 2.0 * g.m() as f64;
    let collapse_scale = (k as f64).sqrt() / n as f64;
    let loss = -forms.trace_term / two_m + collapse_scale * forms.colsum_norm - 1.0;

    // ∂Tr(CᵀBC)/∂C = 2AC − v(vᵀC)/m
    let mut grad_c = forms.ac * (-2.0 / two_m);
    let colsum_dir = &forms.colsum * (collapse_scale / forms.colsum_norm);
    for (i, mut row) in grad_c.outer_iter_mut().enumerate() {
        let deg = g.degree(i) as f64;
        row.scaled_add(2.0 * deg / (two_m * two_m), &forms.degree_weighted);
        row += &colsum_dir;
    }
    Ok((loss, softmax_backward(&c, &grad_c)))
}

/// Mean cross-entropy over `train_mask`, and its gradient (zero off-mask).
pub fn cross_entropy_loss(
    zhat: ArrayView2<'_, f64>,
    y: &LabelVector,
    train_mask: &[usize],
) -> Result<(f64, Array2<f64>)> {
    if train_mask.is_empty() {
        return Err(Error::EmptyMask("cross-entropy"));
    }
    let (n, k) = zhat.dim();
    if y.len() != n {
        return Err(Error::LengthMismatch { left: y.len(), right: n });
    }
    let scale = 1.0 / train_mask.len() as f64;
    let mut grad = Array2::zeros((n, k));
    let mut total = 0.0;
    for &i in train_mask {
        let label = y.get(i).ok_or(Error::MaskedLabel { node: i })?;
        if label >= k {
            return Err(Error::InvalidLabel { label: label as i32, k });
        }
        let row = zhat.row(i);
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let sum_exp: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_norm = max + sum_exp.ln();
        total += log_norm - row[label];
        let mut g = grad.row_mut(i);
        for (c, gv) in g.iter_mut().enumerate() {
            *gv += scale * (row[c] - log_norm).exp();
        }
        g[label] -= scale;
    }
    Ok((total * scale, grad))
}
