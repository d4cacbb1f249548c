use ndarray::{Array2, ArrayView2, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;

/// Half-width of the Xavier-uniform interval for a `rows×cols` matrix.
pub fn xavier_bound(rows: usize, cols: usize) -> f64 {
    (6.0 / (rows + cols) as f64).sqrt()
}

/// Entries i.i.d. `U(−√(6/(rows+cols)), +√(6/(rows+cols)))`.
pub fn xavier_init<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let bound = xavier_bound(rows, cols);
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-bound..=bound))
}

/// The two `K×K` layer weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnModel {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
}

impl GcnModel {
    pub fn zeros(k: usize) -> Self {
        Self {
            w0: Array2::zeros((k, k)),
            w1: Array2::zeros((k, k)),
        }
    }

    pub fn xavier<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let w0 = xavier_init(k, k, rng);
        let w1 = xavier_init(k, k, rng);
        Self { w0, w1 }
    }

    pub fn k(&self) -> usize {
        self.w0.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.w0.iter().chain(self.w1.iter()).all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug)]
pub struct Gradients {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
}

/// Intermediates of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// `S·Z⁽⁰⁾` (after any input dropout).
    pub h0: Array2<f64>,
    pub p1: Array2<f64>,
    pub z1: Array2<f64>,
    /// `S·Z⁽¹⁾` (after any hidden dropout).
    pub h1: Array2<f64>,
    pub p2: Array2<f64>,
    pub z2: Array2<f64>,
    /// `Ẑ = Z⁽⁰⁾ + Z⁽¹⁾ + Z⁽²⁾`.
    pub zhat: Array2<f64>,
    /// Scaled keep-mask applied to `Z⁽¹⁾` before the second propagation.
    pub hidden_mask: Option<Array2<f64>>,
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

fn check_shapes(z0: ArrayView2<'_, f64>, n: usize, model: &GcnModel) -> Result<()> {
    let k = model.k();
    if z0.dim() != (n, k) || model.w1.dim() != (k, k) || model.w0.ncols() != k {
        return Err(Error::shape(
            "GCN forward",
            format!("Z0 {n}x{k} with {k}x{k} weights"),
            format!("Z0 {:?}, W0 {:?}, W1 {:?}", z0.dim(), model.w0.dim(), model.w1.dim()),
        ));
    }
    Ok(())
}

/// `Z⁽¹⁾ = relu(S Z⁽⁰⁾ W⁽⁰⁾)`, `Z⁽²⁾ = relu(S Z⁽¹⁾ W⁽¹⁾)`, `Ẑ = Z⁽⁰⁾ + Z⁽¹⁾ + Z⁽²⁾`.
pub fn gcn_forward(
    s: &NormalizedAdjacency<'_>,
    z0: ArrayView2<'_, f64>,
    model: &GcnModel,
) -> Result<(Array2<f64>, ForwardTrace)> {
    check_shapes(z0, s.graph().n(), model)?;
    let h0 = s.apply(z0)?;
    let trace = forward_from_propagated(s, z0, h0, model, None)?;
    Ok((trace.zhat.clone(), trace))
}

/// Forward pass given a precomputed (possibly dropped-out) `S·Z⁽⁰⁾`.
pub(crate) fn forward_from_propagated(
    s: &NormalizedAdjacency<'_>,
    z0: ArrayView2<'_, f64>,
    h0: Array2<f64>,
    model: &GcnModel,
    hidden_mask: Option<Array2<f64>>,
) -> Result<ForwardTrace> {
    let p1 = h0.dot(&model.w0);
    let z1 = relu(&p1);
    let h1 = match &hidden_mask {
        Some(mask) => s.apply((&z1 * mask).view())?,
        None => s.apply(z1.view())?,
    };
    let p2 = h1.dot(&model.w1);
    let z2 = relu(&p2);
    let mut zhat = &z1 + &z2;
    zhat += &z0;
    Ok(ForwardTrace {
        h0,
        p1,
        z1,
        h1,
        p2,
        z2,
        zhat,
        hidden_mask,
    })
}

/// Gradients of a scalar loss with respect to both weights, given `∂L/∂Ẑ`.
/// `Z⁽⁰⁾` is an input, not a parameter.
pub fn gcn_backward(
    s: &NormalizedAdjacency<'_>,
    trace: &ForwardTrace,
    model: &GcnModel,
    grad_zhat: ArrayView2<'_, f64>,
) -> Result<Gradients> {
    if grad_zhat.dim() != trace.zhat.dim() {
        return Err(Error::shape("GCN backward", format!("{:?}", trace.zhat.dim()), format!("{:?}", grad_zhat.dim())));
    }
    let mut dp2 = grad_zhat.to_owned();
    Zip::from(&mut dp2).and(&trace.p2).for_each(|g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    let w1 = trace.h1.t().dot(&dp2);
    let dh1 = dp2.dot(&model.w1.t());
    let mut dx1 = s.apply(dh1.view())?;
    if let Some(mask) = &trace.hidden_mask {
        dx1 *= mask;
    }
    let mut dp1 = dx1 + grad_zhat;
    Zip::from(&mut dp1).and(&trace.p1).for_each(|g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    let w0 = trace.h0.t().dot(&dp1);
    Ok(Gradients { w0, w1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::rng::rng_from_seed;
    use ndarray::array;

    #[test]
    fn xavier_bounds() {
        assert!((xavier_bound(34, 4) - (6.0f64 / 38.0).sqrt()).abs() < 1e-15);
        assert!((xavier_bound(34, 4) - 0.397_359_7).abs() < 1e-6);
        assert!((xavier_bound(2000, 4) - 0.054_717).abs() < 1e-6);
        let x = xavier_init(34, 4, &mut rng_from_seed(0));
        let b = xavier_bound(34, 4);
        assert!(x.iter().all(|v| v.abs() <= b));
    }

    #[test]
    fn xavier_mean_is_centred() {
        let x = xavier_init(250_000, 4, &mut rng_from_seed(1));
        let b = xavier_bound(250_000, 4);
        let sd = b / 3f64.sqrt();
        let mean = x.mean().unwrap();
        assert!(mean.abs() < 3.0 * sd / (x.len() as f64).sqrt());
    }

    #[test]
    fn zero_weights_pass_input_through() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2)], 3).unwrap();
        let s = g.normalized_adjacency();
        let z0 = array![[0.3, -1.0], [2.0, 0.1], [-0.5, 0.5]];
        let (zhat, _) = gcn_forward(&s, z0.view(), &GcnModel::zeros(2)).unwrap();
        assert_eq!(zhat, z0);
    }

    #[test]
    fn identity_weights_single_node() {
        let g = Graph::empty(1);
        let s = g.normalized_adjacency();
        let model = GcnModel {
            w0: Array2::eye(2),
            w1: Array2::eye(2),
        };
        let (zhat, trace) = gcn_forward(&s, array![[-1.0, 2.0]].view(), &model).unwrap();
        assert_eq!(trace.z1, array![[0.0, 2.0]]);
        assert_eq!(trace.z2, array![[0.0, 2.0]]);
        assert_eq!(zhat, array![[-1.0, 6.0]]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = Graph::empty(3);
        let s = g.normalized_adjacency();
        let err = gcn_forward(&s, Array2::zeros((3, 3)).view(), &GcnModel::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }
}
