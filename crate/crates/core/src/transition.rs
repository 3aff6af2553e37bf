//! Inverse transition model `(s, s') → a`, fitted by supervised learning on
//! replay contents and used to act when the environment cannot say which
//! action realises a chosen next state.

use std::collections::HashMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mmrp::{ActionVec, BoxBounds, EnvState, TransitionSample};
use crate::nn::{bce_loss, mse_loss, Activation, Adam, Direction, Mlp};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Continuous actions; tanh output stretched over the action box.
    MseContinuous,
    /// Binary actions; sigmoid output per coordinate.
    BceBinary,
}

/// One preprocessed training pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    /// `concat(s, s')`, each normalized to `[-1, 1]` by the state box.
    pub input: Vec<f64>,
    /// Action in the network's output space.
    pub target: Vec<f64>,
}

/// Collapses exact `(s, s')` duplicates to one sample (highest reward, then
/// first seen), keeps first-appearance order, normalizes inputs and encodes
/// targets for `kind`.
pub fn preprocess_batch(
    batch: &[&TransitionSample],
    state_box: &BoxBounds,
    action_box: &BoxBounds,
    kind: LossKind,
) -> Vec<TrainingPair> {
    let mut slot_of: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut kept: Vec<&TransitionSample> = Vec::new();
    for &t in batch {
        let key: Vec<u64> = t.s.iter().chain(t.s_next.iter()).map(|v| v.to_bits()).collect();
        match slot_of.get(&key) {
            Some(&i) => {
                if t.r > kept[i].r {
                    kept[i] = t;
                }
            }
            None => {
                slot_of.insert(key, kept.len());
                kept.push(t);
            }
        }
    }
    kept.into_iter()
        .map(|t| {
            let mut input = state_box.normalize(&t.s);
            input.extend(state_box.normalize(&t.s_next));
            let target = match kind {
                LossKind::MseContinuous => action_box.normalize(&t.a),
                LossKind::BceBinary => t.a.to_vec(),
            };
            TrainingPair { input, target }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TransitionModel {
    pub net: Mlp,
    state_box: BoxBounds,
    action_box: BoxBounds,
    kind: LossKind,
    optimizer: Adam,
}

impl TransitionModel {
    pub fn new<R: Rng + ?Sized>(
        state_box: BoxBounds,
        action_box: BoxBounds,
        kind: LossKind,
        hidden: &[usize],
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut dims = vec![2 * state_box.width()];
        dims.extend_from_slice(hidden);
        dims.push(action_box.width());
        let output = match kind {
            LossKind::MseContinuous => Activation::Tanh,
            LossKind::BceBinary => Activation::Sigmoid,
        };
        let net = Mlp::new(&dims, Activation::Relu, output, rng)?;
        Ok(Self::from_net(net, state_box, action_box, kind, learning_rate))
    }

    pub fn from_net(net: Mlp, state_box: BoxBounds, action_box: BoxBounds, kind: LossKind, learning_rate: f64) -> Self {
        assert_eq!(net.input_width(), 2 * state_box.width(), "transition model input width");
        assert_eq!(net.output_width(), action_box.width(), "transition model output width");
        TransitionModel {
            optimizer: Adam::new(&net, learning_rate),
            net,
            state_box,
            action_box,
            kind,
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn preprocess(&self, batch: &[&TransitionSample]) -> Vec<TrainingPair> {
        preprocess_batch(batch, &self.state_box, &self.action_box, self.kind)
    }

    fn loss(&self, pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
        match self.kind {
            LossKind::MseContinuous => mse_loss(pred, target),
            LossKind::BceBinary => bce_loss(pred, target),
        }
    }

    fn matrices(&self, pairs: &[TrainingPair]) -> (Array2<f64>, Vec<f64>) {
        let in_w = self.net.input_width();
        let mut x = Array2::zeros((pairs.len(), in_w));
        let mut t = Vec::with_capacity(pairs.len() * self.net.output_width());
        for (i, p) in pairs.iter().enumerate() {
            x.row_mut(i).assign(&ndarray::ArrayView1::from(&p.input[..]));
            t.extend_from_slice(&p.target);
        }
        (x, t)
    }

    /// Loss and parameter gradient on preprocessed pairs.
    pub fn loss_and_tape(&self, pairs: &[TrainingPair]) -> Result<(f64, crate::nn::GradientTape)> {
        let (x, t) = self.matrices(pairs);
        let trace = self.net.forward_trace(x.view());
        let pred: Vec<f64> = trace.output().iter().copied().collect();
        let (loss, grad) = self.loss(&pred, &t)?;
        let g = Array2::from_shape_vec(trace.output().raw_dim(), grad).expect("gradient shape");
        Ok((loss, self.net.backward_batch(&trace, g.view())))
    }

    /// Mean loss over `samples` without updating.
    pub fn evaluate(&self, samples: &[&TransitionSample]) -> Result<f64> {
        let pairs = self.preprocess(samples);
        if pairs.is_empty() {
            return Err(Error::NotEnoughData("no samples to evaluate the transition model on".into()));
        }
        let (x, t) = self.matrices(&pairs);
        let pred: Vec<f64> = self.net.forward_batch(x.view()).iter().copied().collect();
        Ok(self.loss(&pred, &t)?.0)
    }

    /// Shuffled minibatch epochs, each minibatch de-duplicated before its
    /// step. Returns the last epoch's mean minibatch loss, or the current
    /// loss when `epochs` is zero.
    pub fn fit<R: Rng + ?Sized>(
        &mut self,
        samples: &[&TransitionSample],
        epochs: usize,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::NotEnoughData("cannot fit a transition model without samples".into()));
        }
        if batch_size == 0 {
            return Err(Error::Config("transition batch size must be positive".into()));
        }
        if epochs == 0 {
            return self.evaluate(samples);
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut last = f64::NAN;
        for epoch in 0..epochs {
            order.shuffle(rng);
            let mut total = 0.0;
            let mut batches = 0usize;
            for chunk in order.chunks(batch_size) {
                let batch: Vec<&TransitionSample> = chunk.iter().map(|&i| samples[i]).collect();
                let pairs = self.preprocess(&batch);
                let (loss, tape) = self.loss_and_tape(&pairs)?;
                if !loss.is_finite() {
                    return Err(Error::Divergence(format!("transition model loss {loss} in epoch {epoch}")));
                }
                self.optimizer.apply(&mut self.net, &tape, Direction::Minimize)?;
                total += loss;
                batches += 1;
            }
            last = total / batches as f64;
            log::debug!("transition model epoch {epoch}: loss {last:.6}");
        }
        Ok(last)
    }

    /// Action expected to realise `s → s_target`. Continuous outputs are
    /// mapped into the action box; binary outputs are thresholded at 0.5.
    pub fn predict(&self, s: &EnvState, s_target: &EnvState) -> ActionVec {
        let mut input = self.state_box.normalize(s);
        input.extend(self.state_box.normalize(s_target));
        let y = self.net.forward(&input);
        let a = match self.kind {
            LossKind::MseContinuous => self.action_box.clamp(&self.action_box.denormalize(&y)),
            LossKind::BceBinary => y.iter().map(|&p| if p >= 0.5 { 1.0 } else { 0.0 }).collect(),
        };
        ActionVec::new(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmrp::sim_rng;

    fn t(s: f64, s_next: f64, a: f64, r: f64) -> TransitionSample {
        TransitionSample {
            s: EnvState::new(vec![s]),
            s_next: EnvState::new(vec![s_next]),
            a: ActionVec::new(vec![a]),
            r,
            done: false,
        }
    }

    fn boxes() -> (BoxBounds, BoxBounds) {
        (BoxBounds::uniform(1, 0.0, 1.0), BoxBounds::uniform(1, -0.5, 0.5))
    }

    #[test]
    fn duplicates_keep_the_highest_reward() {
        let (sb, ab) = boxes();
        let a = t(0.2, 0.4, 0.1, 1.0);
        let b = t(0.2, 0.4, 0.3, 2.0);
        let c = t(0.2, 0.4, -0.2, 2.0);
        let pairs = preprocess_batch(&[&a, &b, &c], &sb, &ab, LossKind::MseContinuous);
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].target[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn distinct_pairs_pass_through_normalized() {
        let (sb, ab) = boxes();
        let a = t(0.0, 1.0, 0.5, 0.0);
        let b = t(0.5, 0.25, -0.5, 0.0);
        let pairs = preprocess_batch(&[&a, &b], &sb, &ab, LossKind::MseContinuous);
        assert_eq!(pairs[0].input, vec![-1.0, 1.0]);
        assert_eq!(pairs[0].target, vec![1.0]);
        assert_eq!(pairs[1].input, vec![0.0, -0.5]);
        assert_eq!(pairs[1].target, vec![-1.0]);
        assert!(pairs.iter().flat_map(|p| p.input.iter()).all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn zero_model_predicts_the_box_centre() {
        let (sb, _) = boxes();
        let net = Mlp::zeros(&[2, 4, 1], Activation::Relu, Activation::Tanh).unwrap();
        let m = TransitionModel::from_net(net, sb, BoxBounds::uniform(1, 0.2, 0.6), LossKind::MseContinuous, 1e-3);
        let p = m.predict(&EnvState::new(vec![0.1]), &EnvState::new(vec![0.9]));
        assert!((p[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_epochs_leave_the_model_alone() {
        let (sb, ab) = boxes();
        let mut m = TransitionModel::new(sb, ab, LossKind::MseContinuous, &[8], 1e-3, &mut sim_rng(0)).unwrap();
        let before = m.net.clone();
        let data = [t(0.1, 0.2, 0.1, 0.0)];
        let refs: Vec<&TransitionSample> = data.iter().collect();
        m.fit(&refs, 0, 16, &mut sim_rng(1)).unwrap();
        assert_eq!(m.net, before);
    }

    #[test]
    fn loss_decreases_and_predictions_are_repeatable() {
        let (sb, ab) = boxes();
        let mut m = TransitionModel::new(sb, ab, LossKind::MseContinuous, &[32, 32], 1e-3, &mut sim_rng(2)).unwrap();
        let mut rng = sim_rng(3);
        let data: Vec<TransitionSample> = (0..1000)
            .map(|_| {
                let s: f64 = rng.random_range(0.0..1.0);
                let a: f64 = rng.random_range(-0.5..0.5);
                let sn = (s + a).clamp(0.0, 1.0);
                t(s, sn, sn - s, 0.0)
            })
            .collect();
        let refs: Vec<&TransitionSample> = data.iter().collect();
        let initial = m.evaluate(&refs).unwrap();
        let last = m.fit(&refs, 20, 64, &mut rng).unwrap();
        assert!(last < initial, "{last} vs {initial}");
        let s = EnvState::new(vec![0.3]);
        let sn = EnvState::new(vec![0.5]);
        assert_eq!(m.predict(&s, &sn), m.predict(&s, &sn));
        assert!((m.predict(&s, &sn)[0] - 0.2).abs() < 0.05);
    }

    #[test]
    fn binary_actions_are_learned_with_cross_entropy() {
        // action bit = whether the state went up
        let sb = BoxBounds::uniform(1, 0.0, 1.0);
        let ab = BoxBounds::uniform(1, 0.0, 1.0);
        let mut m = TransitionModel::new(sb, ab, LossKind::BceBinary, &[16, 16], 1e-2, &mut sim_rng(4)).unwrap();
        let mut rng = sim_rng(5);
        let data: Vec<TransitionSample> = (0..800)
            .map(|_| {
                let s: f64 = rng.random_range(0.1..0.9);
                let up = rng.random_bool(0.5);
                let sn = if up { s + 0.1 } else { s - 0.1 };
                t(s, sn, if up { 1.0 } else { 0.0 }, 0.0)
            })
            .collect();
        let refs: Vec<&TransitionSample> = data.iter().collect();
        m.fit(&refs, 30, 64, &mut rng).unwrap();
        let correct = data
            .iter()
            .filter(|d| m.predict(&d.s, &d.s_next)[0] == d.a[0])
            .count();
        assert!(correct as f64 / data.len() as f64 > 0.98, "{correct}");
    }

    #[test]
    fn train_and_inference_share_normalization() {
        let (sb, ab) = boxes();
        let m = TransitionModel::new(sb, ab.clone(), LossKind::MseContinuous, &[8], 1e-3, &mut sim_rng(6)).unwrap();
        let d = t(0.3, 0.45, 0.15, 0.0);
        let pair = &m.preprocess(&[&d])[0];
        let raw = m.net.forward(&pair.input);
        let pred = m.predict(&d.s, &d.s_next);
        assert!((ab.denormalize(&raw)[0] - pred[0]).abs() < 1e-15);
    }
}
