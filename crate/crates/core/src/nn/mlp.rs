use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Linear,
    Tanh,
}

/// `y = x · w + b` with `w` stored `(fan_in, fan_out)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub output: OutputActivation,
    /// Bumped on every parameter mutation so stale caches can be detected.
    #[serde(skip)]
    generation: u64,
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.output == other.output
    }
}

/// Activations recorded by [`Mlp::forward`] for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    generation: u64,
    /// `acts[0]` is the input, `acts[k]` the output of layer `k - 1`.
    acts: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().expect("cache holds the input at least")
    }

    pub fn into_output(mut self) -> Array2<f64> {
        self.acts.pop().expect("cache holds the input at least")
    }
}

/// Parameter gradients, one `(dW, db)` per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Gradients {
            layers: mlp.layers.iter().map(|l| (Array2::zeros(l.w.raw_dim()), Array1::zeros(l.b.raw_dim()))).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (w, b) in &mut self.layers {
            w.mapv_inplace(|v| v * s);
            b.mapv_inplace(|v| v * s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|(w, b)| w.iter().chain(b.iter()).all(|v| v.is_finite()))
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|(w, b)| w.iter().chain(b.iter()).copied()).collect()
    }
}

impl Mlp {
    /// Uniform fan-in initialization: hidden layers in `±1/√fan_in`, the output
    /// layer in `±3e-3`.
    pub fn init(dims: &[usize], output: OutputActivation, seed: u64) -> Result<Mlp> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid layer sizes {dims:?}")));
        }
        let mut r = rng::stream(seed, rng::INIT);
        let n = dims.len() - 1;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, d)| {
                let bound = if k + 1 == n { 3e-3 } else { 1.0 / (d[0] as f64).sqrt() };
                let w = Array2::from_shape_simple_fn((d[0], d[1]), || r.random_range(-bound..=bound));
                let b = Array1::from_shape_simple_fn(d[1], || r.random_range(-bound..=bound));
                Dense { w, b }
            })
            .collect();
        Ok(Mlp { layers, output, generation: 0 })
    }

    pub fn from_layers(layers: Vec<Dense>, output: OutputActivation) -> Result<Mlp> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.w.ncols() != l.b.len() {
                return Err(Error::Shape(format!("layer {k}: bias does not match weights")));
            }
            if k > 0 && layers[k - 1].w.ncols() != l.w.nrows() {
                return Err(Error::Shape(format!("layer {k} does not chain")));
            }
        }
        Ok(Mlp { layers, output, generation: 0 })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].w.nrows()];
        d.extend(self.layers.iter().map(|l| l.w.ncols()));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.w.ncols())
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Call after mutating `layers` directly.
    pub fn touch(&mut self) {
        self.generation += 1;
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn layer_out(&self, k: usize, x: &ArrayView2<f64>) -> Array2<f64> {
        let l = &self.layers[k];
        let mut z = x.dot(&l.w);
        z += &l.b;
        if k + 1 < self.layers.len() {
            z.mapv_inplace(|v| v.max(0.0));
        } else if self.output == OutputActivation::Tanh {
            z.mapv_inplace(f64::tanh);
        }
        z
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for k in 0..self.layers.len() {
            let next = self.layer_out(k, &acts[k].view());
            acts.push(next);
        }
        Ok(ForwardCache { generation: self.generation, acts })
    }

    /// Forward pass without keeping activations.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut h = self.layer_out(0, &x);
        for k in 1..self.layers.len() {
            h = self.layer_out(k, &h.view());
        }
        Ok(h)
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x).map_err(|e| Error::Shape(e.to_string()))?;
        Ok(self.predict(view)?.into_raw_vec_and_offset().0)
    }

    /// Gradients of `Σ upstream ⊙ y` with respect to parameters and input.
    pub fn backward(&self, cache: &ForwardCache, upstream: ArrayView2<f64>) -> Result<(Gradients, Array2<f64>)> {
        if cache.generation != self.generation || cache.acts.len() != self.layers.len() + 1 {
            return Err(Error::StaleCache { cache: cache.generation, params: self.generation });
        }
        let y = cache.output();
        if upstream.dim() != y.dim() {
            return Err(Error::Shape(format!(
                "upstream gradient {:?} does not match output {:?}",
                upstream.dim(),
                y.dim()
            )));
        }
        let mut delta = match self.output {
            OutputActivation::Linear => upstream.to_owned(),
            OutputActivation::Tanh => {
                let mut d = upstream.to_owned();
                d.zip_mut_with(y, |g, &out| *g *= 1.0 - out * out);
                d
            }
        };
        let mut grads = Vec::with_capacity(self.layers.len());
        for k in (0..self.layers.len()).rev() {
            let input = &cache.acts[k];
            let gw = input.t().dot(&delta);
            let gb = delta.sum_axis(Axis(0));
            let mut prev = delta.dot(&self.layers[k].w.t());
            if k > 0 {
                prev.zip_mut_with(input, |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0
                    }
                });
            }
            grads.push((gw, gb));
            delta = prev;
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, delta))
    }

    pub fn check_same_shape(&self, other_dims: &[usize]) -> Result<()> {
        if self.dims() != other_dims {
            return Err(Error::Shape(format!("network shapes differ: {:?} vs {:?}", self.dims(), other_dims)));
        }
        Ok(())
    }
}

/// `target ← τ·source + (1 − τ)·target`, elementwise.
pub fn soft_update(target: &mut Mlp, source: &Mlp, tau: f64) -> Result<()> {
    target.check_same_shape(&source.dims())?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("tau must be in [0, 1], got {tau}")));
    }
    if tau == 0.0 {
        return Ok(());
    }
    if tau == 1.0 {
        for (t, s) in target.layers.iter_mut().zip(&source.layers) {
            t.w.assign(&s.w);
            t.b.assign(&s.b);
        }
    } else {
        for (t, s) in target.layers.iter_mut().zip(&source.layers) {
            t.w.zip_mut_with(&s.w, |a, &b| *a = tau * b + (1.0 - tau) * *a);
            t.b.zip_mut_with(&s.b, |a, &b| *a = tau * b + (1.0 - tau) * *a);
        }
    }
    target.touch();
    Ok(())
}
