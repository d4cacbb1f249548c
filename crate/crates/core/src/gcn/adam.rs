use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use super::model::{GcnModel, Gradients};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty folded into the gradient.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// First and second moment estimates for both weight matrices.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: [Array2<f64>; 2],
    v: [Array2<f64>; 2],
    t: u64,
}

impl AdamState {
    pub fn new(model: &GcnModel) -> Self {
        let z0 = Array2::zeros(model.w0.dim());
        let z1 = Array2::zeros(model.w1.dim());
        Self {
            m: [z0.clone(), z1.clone()],
            v: [z0, z1],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update.
    pub fn step(&mut self, model: &mut GcnModel, grads: &Gradients, cfg: &AdamConfig) {
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        let params = [&mut model.w0, &mut model.w1];
        let grads = [&grads.w0, &grads.w1];
        for (((w, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            Zip::from(w).and(g).and(m).and(v).for_each(|w, &g, m, v| {
                let g = g + cfg.weight_decay * *w;
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            });
        }
    }
}
