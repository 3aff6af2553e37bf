use ndarray::{Array1, Array2, Zip};

use super::{GradientTape, Mlp};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Adam with bias-corrected moments, one instance per network.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
}

impl Adam {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        Self::with_betas(net, learning_rate, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(net: &Mlp, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zw = || net.weights().iter().map(|w| Array2::zeros(w.raw_dim())).collect::<Vec<_>>();
        let zb = || net.biases().iter().map(|b| Array1::zeros(b.raw_dim())).collect::<Vec<_>>();
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            m_w: zw(),
            v_w: zw(),
            m_b: zb(),
            v_b: zb(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Applies one update from `tape`. Non-finite gradients are rejected
    /// before anything is modified.
    pub fn apply(&mut self, net: &mut Mlp, tape: &GradientTape, direction: Direction) -> Result<()> {
        assert_eq!(tape.weights.len(), net.weights().len(), "tape depth");
        for (g, w) in tape.weights.iter().zip(net.weights()) {
            assert_eq!(g.dim(), w.dim(), "tape weight shape");
        }
        for (g, b) in tape.biases.iter().zip(net.biases()) {
            assert_eq!(g.dim(), b.dim(), "tape bias shape");
        }
        assert_eq!(self.m_w.len(), net.weights().len(), "optimizer state depth");

        let (bad, total) = tape.non_finite_count();
        if bad > 0 {
            log::warn!("rejecting update: {bad} of {total} gradient entries are non-finite");
            return Err(Error::NonFiniteGradient {
                context: "adam",
                bad,
                total,
            });
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let sign = match direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            let g = sign * g;
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for l in 0..self.m_w.len() {
            Zip::from(&mut net.weights_mut()[l])
                .and(&mut self.m_w[l])
                .and(&mut self.v_w[l])
                .and(&tape.weights[l])
                .for_each(|p, m, v, &g| update(p, m, v, g));
            Zip::from(&mut net.biases_mut()[l])
                .and(&mut self.m_b[l])
                .and(&mut self.v_b[l])
                .and(&tape.biases[l])
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }

        if !net.all_finite() {
            return Err(Error::Divergence(format!(
                "non-finite parameters after optimizer step {}",
                self.step_count
            )));
        }
        Ok(())
    }
}
