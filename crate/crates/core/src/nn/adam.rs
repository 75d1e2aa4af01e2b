//! Adam with bias-corrected moments.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(params: usize, learning_rate: f64) -> Self {
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-7, step: 0, m: vec![0.0; params], v: vec![0.0; params] }
    }

    /// One update: w ← w − γ·m̂/√(v̂ + ε).
    pub fn update(&mut self, weights: &mut [f64], grads: &[f64]) {
        assert_eq!(weights.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for (((w, &g), m), v) in weights.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *w -= self.learning_rate * (*m / c1) / (*v / c2 + self.epsilon).sqrt();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_about_minus_gamma() {
        let mut a = AdamState::new(1, 1e-3);
        let mut w = [0.0];
        a.update(&mut w, &[1.0]);
        assert!((w[0] + 1e-3 / (1.0f64 + 1e-7).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_keeps_weights() {
        let mut a = AdamState::new(3, 1e-2);
        let mut w = [1.0, -2.0, 0.5];
        for _ in 0..10 {
            a.update(&mut w, &[0.0; 3]);
        }
        assert_eq!(w, [1.0, -2.0, 0.5]);
    }
}
