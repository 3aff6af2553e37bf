use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::Result;
use crate::mmrp::BoxBounds;
use crate::nn::{Activation, Mlp, Trace};

/// Anything that scores a `(s, x)` pair and reports `∂value/∂x`.
///
/// `x` is the critic's right-hand input: the next state for the transition
/// critic, the action for the state-action critic. Rows are samples.
pub trait CriticSurface {
    fn values(&self, s: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) -> Array1<f64>;
    fn right_gradients(&self, s: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) -> Array2<f64>;
}

/// Anything that proposes a right-hand input for a batch of states.
pub trait TargetPolicy {
    fn propose(&self, s: ArrayView2<'_, f64>) -> Array2<f64>;
}

/// Row-wise [`BoxBounds::normalize`].
pub fn normalize_rows(b: &BoxBounds, x: ArrayView2<'_, f64>) -> Array2<f64> {
    assert_eq!(x.ncols(), b.width(), "normalize width");
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            let (l, h) = (b.low[j], b.high[j]);
            *v = if h > l { (2.0 * *v - l - h) / (h - l) } else { 0.0 };
        }
    }
    out
}

/// Critic network `(s, x) → scalar`; both inputs are normalized by their
/// boxes before concatenation.
#[derive(Clone, Debug, PartialEq)]
pub struct Critic {
    pub net: Mlp,
    left: BoxBounds,
    right: BoxBounds,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(left: BoxBounds, right: BoxBounds, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let mut dims = vec![left.width() + right.width()];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let net = Mlp::new(&dims, Activation::Relu, Activation::Linear, rng)?;
        Ok(Critic { net, left, right })
    }

    pub fn from_net(net: Mlp, left: BoxBounds, right: BoxBounds) -> Self {
        assert_eq!(net.input_width(), left.width() + right.width(), "critic input width");
        assert_eq!(net.output_width(), 1, "critic output width");
        Critic { net, left, right }
    }

    pub fn left_box(&self) -> &BoxBounds {
        &self.left
    }

    pub fn right_box(&self) -> &BoxBounds {
        &self.right
    }

    pub fn inputs(&self, s: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(s.nrows(), x.nrows(), "critic batch rows");
        let ls = normalize_rows(&self.left, s);
        let rx = normalize_rows(&self.right, x);
        ndarray::concatenate(Axis(1), &[ls.view(), rx.view()]).expect("equal row counts")
    }

    pub fn value(&self, s: &[f64], x: &[f64]) -> f64 {
        let s = ArrayView2::from_shape((1, s.len()), s).expect("row");
        let x = ArrayView2::from_shape((1, x.len()), x).expect("row");
        self.values(s, x)[0]
    }
}

impl CriticSurface for Critic {
    fn values(&self, s: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) -> Array1<f64> {
        self.net.forward_batch(self.inputs(s, x).view()).column(0).to_owned()
    }

    fn right_gradients(&self, s: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let trace = self.net.forward_trace(self.inputs(s, x).view());
        let ones = Array2::ones((s.nrows(), 1));
        let g = self.net.input_gradient(&trace, ones.view());
        let mut out = g.slice(s![.., self.left.width()..]).to_owned();
        // undo the normalization chain factor 2/(h-l)
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let span = self.right.high[j] - self.right.low[j];
                *v = if span > 0.0 { *v * 2.0 / span } else { 0.0 };
            }
        }
        out
    }
}

/// Deterministic actor `s → x` with a tanh output stretched over `output`.
#[derive(Clone, Debug, PartialEq)]
pub struct Actor {
    pub net: Mlp,
    input: BoxBounds,
    output: BoxBounds,
}

impl Actor {
    pub fn new<R: Rng + ?Sized>(input: BoxBounds, output: BoxBounds, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let mut dims = vec![input.width()];
        dims.extend_from_slice(hidden);
        dims.push(output.width());
        let net = Mlp::new(&dims, Activation::Relu, Activation::Tanh, rng)?;
        Ok(Actor { net, input, output })
    }

    pub fn from_net(net: Mlp, input: BoxBounds, output: BoxBounds) -> Self {
        assert_eq!(net.input_width(), input.width(), "actor input width");
        assert_eq!(net.output_width(), output.width(), "actor output width");
        assert_eq!(net.output_activation(), Activation::Tanh, "actor output activation");
        Actor { net, input, output }
    }

    pub fn input_box(&self) -> &BoxBounds {
        &self.input
    }

    pub fn output_box(&self) -> &BoxBounds {
        &self.output
    }

    /// Forward pass keeping the trace; returns the scaled outputs too.
    pub fn trace(&self, s: ArrayView2<'_, f64>) -> (Trace, Array2<f64>) {
        let trace = self.net.forward_trace(normalize_rows(&self.input, s).view());
        let y = trace.output().clone();
        (trace, self.scale(y))
    }

    fn scale(&self, mut y: Array2<f64>) -> Array2<f64> {
        let c = self.output.center();
        let h = self.output.half_width();
        for mut row in y.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = c[j] + h[j] * *v;
            }
        }
        y
    }

    pub fn propose_one(&self, s: &[f64]) -> Vec<f64> {
        let s = ArrayView2::from_shape((1, s.len()), s).expect("row");
        self.propose(s).row(0).to_vec()
    }
}

impl TargetPolicy for Actor {
    fn propose(&self, s: ArrayView2<'_, f64>) -> Array2<f64> {
        let y = self.net.forward_batch(normalize_rows(&self.input, s).view());
        self.scale(y)
    }
}
