//! One-hidden-layer sigmoid value approximator with explicit gradients.
//!
//! `Φ(x) = b + Σ_i w_i σ_i`, with `σ_i = sigmoid(b_i + Σ_j w_ij x_j)`.
//! Parameters live in one flat vector so that eligibility traces share the
//! layout: `w_ij` row-major (one row per hidden unit), then `b_i`, then
//! `w_i`, then `b`.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub hidden: usize,
    pub init_scale: f64,
    pub seed: u64,
}

impl NetworkConfig {
    pub const DEFAULT_HIDDEN: usize = 200;
    pub const DEFAULT_INIT_SCALE: f64 = 0.1;

    pub fn new(input_dim: usize, seed: u64) -> Self {
        NetworkConfig {
            input_dim,
            hidden: Self::DEFAULT_HIDDEN,
            init_scale: Self::DEFAULT_INIT_SCALE,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 {
            return Err(Error::input("network needs input_dim >= 1 and hidden >= 1"));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::input(format!(
                "init_scale {} must be finite and >= 0",
                self.init_scale
            )));
        }
        Ok(())
    }
}

pub fn param_count(input_dim: usize, hidden: usize) -> usize {
    hidden * input_dim + 2 * hidden + 1
}

/// Per-parameter accumulator with the same layout as [`ValueNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector(Vec<f64>);

impl TraceVector {
    pub fn zeros(len: usize) -> Self {
        TraceVector(vec![0.0; len])
    }

    pub fn for_network(net: &ValueNetwork) -> Self {
        Self::zeros(net.params.len())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reset(&mut self) {
        self.0.iter_mut().for_each(|e| *e = 0.0);
    }

    pub fn decay(&mut self, factor: f64) {
        self.0.iter_mut().for_each(|e| *e *= factor);
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueNetwork {
    input_dim: usize,
    hidden: usize,
    params: Vec<f64>,
}

impl ValueNetwork {
    /// Weights i.i.d. uniform in `[-init_scale, init_scale]` from `config.seed`.
    pub fn init(config: &NetworkConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::init_with(config, &mut rng)
    }

    /// Same as [`ValueNetwork::init`], drawing from a caller-owned generator.
    pub fn init_with<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let n = param_count(config.input_dim, config.hidden);
        let s = config.init_scale;
        let params = (0..n)
            .map(|_| {
                if s > 0.0 {
                    rng.random_range(-s..=s)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(ValueNetwork {
            input_dim: config.input_dim,
            hidden: config.hidden,
            params,
        })
    }

    /// Builds a network from a flat parameter vector in the documented layout.
    pub fn from_params(input_dim: usize, hidden: usize, params: Vec<f64>) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::input("network needs input_dim >= 1 and hidden >= 1"));
        }
        if params.len() != param_count(input_dim, hidden) {
            return Err(Error::input(format!(
                "expected {} parameters, got {}",
                param_count(input_dim, hidden),
                params.len()
            )));
        }
        Ok(ValueNetwork {
            input_dim,
            hidden,
            params,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn hidden_weights(&self) -> &[f64] {
        &self.params[..self.hidden * self.input_dim]
    }

    pub fn hidden_biases(&self) -> &[f64] {
        let o = self.hidden * self.input_dim;
        &self.params[o..o + self.hidden]
    }

    pub fn output_weights(&self) -> &[f64] {
        let o = self.hidden * self.input_dim + self.hidden;
        &self.params[o..o + self.hidden]
    }

    pub fn output_bias(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.input_dim {
            Ok(())
        } else {
            Err(Error::input(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_dim
            )))
        }
    }

    fn activations(&self, x: &[f64], out: &mut Vec<f64>) {
        let (w, rest) = self.params.split_at(self.hidden * self.input_dim);
        let biases = &rest[..self.hidden];
        out.clear();
        out.extend(w.chunks_exact(self.input_dim).zip(biases).map(|(row, &b)| {
            let z = row
                .iter()
                .zip(x)
                .filter(|(_, &xj)| xj != 0.0)
                .fold(b, |acc, (&wij, &xj)| acc + wij * xj);
            sigmoid(z)
        }));
    }

    fn output(&self, sigma: &[f64]) -> f64 {
        let w = self.output_weights();
        sigma
            .iter()
            .zip(w)
            .fold(self.output_bias(), |acc, (&s, &wi)| acc + wi * s)
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut sigma = Vec::with_capacity(self.hidden);
        self.activations(x, &mut sigma);
        Ok(self.output(&sigma))
    }

    /// `∂Φ/∂θ` at `x`.
    pub fn gradient(&self, x: &[f64]) -> Result<TraceVector> {
        let mut g = TraceVector::for_network(self);
        self.accumulate_gradient(x, &mut g)?;
        Ok(g)
    }

    /// Adds `∂Φ/∂θ` at `x` into `trace` and returns `Φ(x)`.
    pub fn accumulate_gradient(&self, x: &[f64], trace: &mut TraceVector) -> Result<f64> {
        self.check_input(x)?;
        if trace.len() != self.params.len() {
            return Err(Error::input("trace layout does not match network"));
        }
        let mut sigma = Vec::with_capacity(self.hidden);
        self.activations(x, &mut sigma);
        let (n, h) = (self.input_dim, self.hidden);
        let out_w = self.output_weights();
        let e = &mut trace.0;
        for i in 0..h {
            let s = sigma[i];
            let d = out_w[i] * s * (1.0 - s);
            let row = &mut e[i * n..(i + 1) * n];
            for (ej, &xj) in row.iter_mut().zip(x) {
                if xj != 0.0 {
                    *ej += d * xj;
                }
            }
            e[h * n + i] += d;
            e[h * n + h + i] += s;
        }
        e[h * n + 2 * h] += 1.0;
        Ok(self.output(&sigma))
    }

    /// `θ ← θ + α·δ·e`. Leaves the network untouched if any parameter would
    /// become non-finite.
    pub fn apply_update(&mut self, trace: &TraceVector, delta: f64, alpha: f64) -> Result<()> {
        if trace.len() != self.params.len() {
            return Err(Error::input("trace layout does not match network"));
        }
        let step = alpha * delta;
        if step == 0.0 {
            return Ok(());
        }
        let finite = self
            .params
            .iter()
            .zip(&trace.0)
            .all(|(p, e)| (p + step * e).is_finite());
        if !finite {
            return Err(Error::NonFiniteParameter);
        }
        self.params
            .iter_mut()
            .zip(&trace.0)
            .for_each(|(p, e)| *p += step * e);
        Ok(())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// State bits followed by a one-hot action block (omitted when `action` is `None`).
pub fn encode(state: &FixedBitSet, action: Option<usize>, action_count: usize) -> Result<Vec<f64>> {
    let n = state.len();
    let mut x = vec![0.0; n + if action.is_some() { action_count } else { 0 }];
    for v in state.ones() {
        x[v] = 1.0;
    }
    if let Some(a) = action {
        if a >= action_count {
            return Err(Error::input(format!(
                "action {a} out of range ({action_count} actions)"
            )));
        }
        x[n + a] = 1.0;
    }
    Ok(x)
}
