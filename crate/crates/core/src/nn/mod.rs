//! Dense multilayer perceptrons with exact reverse-mode gradients.
//!
//! Every network in the crate (actor, critic, transition model, and the
//! DDPG baseline networks) is an [`Mlp`]. Forward passes operate on a batch
//! laid out as rows of an `ndarray` matrix; [`Mlp::forward_trace`] keeps the
//! per-layer activations so that [`Mlp::backward_batch`] can produce
//! parameter gradients summed over the batch together with per-row gradients
//! with respect to the network input.
//!
//! Weights of layer `l` are stored as an `(out, in)` matrix, so a batch
//! `X` of shape `(batch, in)` maps to `X · Wᵀ + b`.

mod adam;
mod loss;
mod snapshot;

pub use adam::{Adam, Direction};
pub use loss::{bce_loss, mse_loss};
pub use snapshot::{load_snapshot, read_snapshot, save_snapshot, write_snapshot};

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply_in_place(self, z: &mut Array2<f64>) {
        match self {
            Activation::Linear => {}
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
            Activation::Sigmoid => z.mapv_inplace(|v| 1.0 / (1.0 + (-v).exp())),
        }
    }

    /// Derivative expressed through the activation's own output value.
    #[inline]
    fn derivative_at_output(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Activation::Linear),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::Parse(format!("unknown activation `{other}`"))),
        }
    }
}

/// A fully connected feed-forward network.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    hidden: Activation,
    output: Activation,
}

/// Activations recorded during a forward pass; `layers[0]` is the input
/// batch and the last entry is the network output.
#[derive(Clone, Debug)]
pub struct Trace {
    layers: Vec<Array2<f64>>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        self.layers.last().expect("trace always holds the input")
    }

    pub fn input(&self) -> &Array2<f64> {
        &self.layers[0]
    }
}

/// Gradients congruent in shape with an [`Mlp`].
///
/// Parameter gradients are summed over the batch rows that produced them.
/// `input_gradient` keeps one row per batch element.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientTape {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub input_gradient: Array2<f64>,
}

impl GradientTape {
    pub fn zeros_like(net: &Mlp, batch: usize) -> Self {
        GradientTape {
            weights: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            input_gradient: Array2::zeros((batch, net.dims[0])),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.weights.iter_mut().for_each(|w| *w *= factor);
        self.biases.iter_mut().for_each(|b| *b *= factor);
        self.input_gradient *= factor;
    }

    /// Parameter entries in the same order as [`Mlp::parameters`].
    pub fn parameter_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|&v| v == 0.0))
            && self.biases.iter().all(|b| b.iter().all(|&v| v == 0.0))
            && self.input_gradient.iter().all(|&v| v == 0.0)
    }

    fn non_finite_count(&self) -> (usize, usize) {
        let mut bad = 0;
        let mut total = 0;
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for &v in w.iter().chain(b.iter()) {
                total += 1;
                if !v.is_finite() {
                    bad += 1;
                }
            }
        }
        (bad, total)
    }
}

impl Mlp {
    /// Builds a network with weights and biases drawn uniformly from
    /// `±1/√fan_in`.
    pub fn new<R: Rng + ?Sized>(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(dims, hidden, output)?;
        for (w, b) in net.weights.iter_mut().zip(net.biases.iter_mut()) {
            let bound = 1.0 / (w.ncols() as f64).sqrt();
            w.mapv_inplace(|_| rng.random_range(-bound..=bound));
            b.mapv_inplace(|_| rng.random_range(-bound..=bound));
        }
        Ok(net)
    }

    /// Builds a network whose parameters are all zero.
    pub fn zeros(dims: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config(format!(
                "an mlp needs at least an input and an output width, got {dims:?}"
            )));
        }
        if dims.contains(&0) {
            return Err(Error::Config(format!("layer widths must be positive: {dims:?}")));
        }
        if !matches!(hidden, Activation::Relu | Activation::Tanh) {
            return Err(Error::Config(format!("hidden activation must be relu or tanh, got {hidden}")));
        }
        if matches!(output, Activation::Relu) {
            return Err(Error::Config("output activation must be linear, tanh or sigmoid".into()));
        }
        let weights = dims.windows(2).map(|p| Array2::zeros((p[1], p[0]))).collect();
        let biases = dims[1..].iter().map(|&n| Array1::zeros(n)).collect();
        Ok(Mlp {
            dims: dims.to_vec(),
            weights,
            biases,
            hidden,
            output,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_width(&self) -> usize {
        self.dims[0]
    }

    pub fn output_width(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// All parameters flattened layer by layer: weights (row-major), then bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }

    /// Inverse of [`Mlp::parameters`].
    pub fn set_parameters(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.parameter_count(), "parameter vector length");
        let mut it = values.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut().for_each(|v| *v = it.next().unwrap());
            b.iter_mut().for_each(|v| *v = it.next().unwrap());
        }
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    fn is_congruent(&self, other: &Mlp) -> bool {
        self.dims == other.dims
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.dims[0], "mlp input width");
        let x = ArrayView2::from_shape((1, input.len()), input).unwrap();
        self.forward_batch(x).into_raw_vec_and_offset().0
    }

    pub fn forward_batch(&self, inputs: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(inputs.ncols(), self.dims[0], "mlp input width");
        let last = self.weights.len() - 1;
        let mut a = inputs.to_owned();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = a.dot(&w.t());
            z += b;
            let act = if l == last { self.output } else { self.hidden };
            act.apply_in_place(&mut z);
            a = z;
        }
        a
    }

    pub fn forward_trace(&self, inputs: ArrayView2<'_, f64>) -> Trace {
        assert_eq!(inputs.ncols(), self.dims[0], "mlp input width");
        let last = self.weights.len() - 1;
        let mut layers = Vec::with_capacity(self.dims.len());
        layers.push(inputs.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = layers[l].dot(&w.t());
            z += b;
            let act = if l == last { self.output } else { self.hidden };
            act.apply_in_place(&mut z);
            layers.push(z);
        }
        Trace { layers }
    }

    /// Single-sample backward pass: gradients of `output · output_gradient`.
    pub fn backward(&self, input: &[f64], output_gradient: &[f64]) -> GradientTape {
        assert_eq!(output_gradient.len(), self.output_width(), "output gradient width");
        let x = ArrayView2::from_shape((1, input.len()), input).unwrap();
        let trace = self.forward_trace(x);
        let g = ArrayView2::from_shape((1, output_gradient.len()), output_gradient).unwrap();
        self.backward_batch(&trace, g)
    }

    /// Backward pass over a recorded batch. Parameter gradients are summed
    /// over rows; the input gradient keeps one row per sample.
    pub fn backward_batch(&self, trace: &Trace, output_gradient: ArrayView2<'_, f64>) -> GradientTape {
        self.backward_impl(trace, output_gradient, true)
    }

    /// Like [`Mlp::backward_batch`] but skips parameter gradients.
    pub fn input_gradient(&self, trace: &Trace, output_gradient: ArrayView2<'_, f64>) -> Array2<f64> {
        self.backward_impl(trace, output_gradient, false).input_gradient
    }

    fn backward_impl(
        &self,
        trace: &Trace,
        output_gradient: ArrayView2<'_, f64>,
        with_params: bool,
    ) -> GradientTape {
        let n_layers = self.weights.len();
        assert_eq!(trace.layers.len(), n_layers + 1, "trace depth");
        assert_eq!(output_gradient.dim(), trace.output().dim(), "output gradient shape");

        let mut weights = Vec::with_capacity(n_layers);
        let mut biases = Vec::with_capacity(n_layers);

        let mut delta = output_gradient.to_owned();
        let out_act = self.output;
        Zip::from(&mut delta)
            .and(trace.output())
            .for_each(|d, &y| *d *= out_act.derivative_at_output(y));

        for l in (0..n_layers).rev() {
            let a_in = &trace.layers[l];
            if with_params {
                weights.push(delta.t().dot(a_in));
                biases.push(delta.sum_axis(Axis(0)));
            } else {
                weights.push(Array2::zeros((0, 0)));
                biases.push(Array1::zeros(0));
            }
            let mut upstream = delta.dot(&self.weights[l]);
            if l > 0 {
                let act = self.hidden;
                Zip::from(&mut upstream)
                    .and(a_in)
                    .for_each(|d, &y| *d *= act.derivative_at_output(y));
            }
            delta = upstream;
        }
        weights.reverse();
        biases.reverse();
        if !with_params {
            weights.clear();
            biases.clear();
        }
        GradientTape {
            weights,
            biases,
            input_gradient: delta,
        }
    }

    /// `self ← eps·online + (1−eps)·self`, element by element.
    pub fn soft_update_from(&mut self, online: &Mlp, eps: f64) {
        assert!(self.is_congruent(online), "soft update between incongruent networks");
        for (t, o) in self.weights.iter_mut().zip(&online.weights) {
            Zip::from(t).and(o).for_each(|t, &o| *t = eps * o + (1.0 - eps) * *t);
        }
        for (t, o) in self.biases.iter_mut().zip(&online.biases) {
            Zip::from(t).and(o).for_each(|t, &o| *t = eps * o + (1.0 - eps) * *t);
        }
    }
}
