use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Running mean / variance input normalizer (Welford).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub enabled: bool,
    pub count: f64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
    pub eps: f64,
    pub clip: f64,
}

impl RunningNorm {
    pub fn new(dim: usize, enabled: bool) -> Self {
        RunningNorm { enabled, count: 0.0, mean: vec![0.0; dim], m2: vec![0.0; dim], eps: 1e-8, clip: 10.0 }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!("normalizer expects {} features, got {}", self.dim(), x.len())));
        }
        if !self.enabled {
            return Ok(());
        }
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / self.count;
            *s += d * (v - *m);
        }
        Ok(())
    }

    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0.0 {
            return vec![1.0; self.dim()];
        }
        self.m2.iter().map(|s| s / self.count).collect()
    }

    /// Identity while disabled or before any statistics are accumulated.
    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        if !self.enabled || self.count == 0.0 {
            out.copy_from_slice(x);
            return;
        }
        for (k, (o, &v)) in out.iter_mut().zip(x).enumerate() {
            let var = self.m2[k] / self.count;
            *o = ((v - self.mean[k]) / (var + self.eps).sqrt()).clamp(-self.clip, self.clip);
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.normalize_into(x, &mut out);
        out
    }
}
