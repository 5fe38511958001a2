use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Gradients, Mlp};
use crate::error::{Error, Result};

/// Bias-corrected Adam moments for one network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
}

impl AdamState {
    pub fn new(mlp: &Mlp, lr: f64) -> Self {
        let zeros = Gradients::zeros_like(mlp).layers;
        AdamState { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: zeros.clone(), v: zeros }
    }

    pub fn apply(&mut self, mlp: &mut Mlp, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != mlp.layers.len() || self.m.len() != mlp.layers.len() {
            return Err(Error::Shape("gradient / optimizer layer count mismatch".into()));
        }
        for (k, ((gw, gb), l)) in grads.layers.iter().zip(&mlp.layers).enumerate() {
            if gw.dim() != l.w.dim() || gb.dim() != l.b.dim() || self.m[k].0.dim() != l.w.dim() {
                return Err(Error::Shape(format!("layer {k}: gradient shape mismatch")));
            }
        }
        self.step += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        let lr = self.lr;
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (k, layer) in mlp.layers.iter_mut().enumerate() {
            let (gw, gb) = &grads.layers[k];
            let (mw, mb) = &mut self.m[k];
            let (vw, vb) = &mut self.v[k];
            ndarray::Zip::from(&mut layer.w).and(mw).and(vw).and(gw).for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut layer.b).and(mb).and(vb).and(gb).for_each(|p, m, v, &g| update(p, m, v, g));
        }
        mlp.touch();
        Ok(())
    }
}
