//! Plain-loop network oracles and finite-difference gradient checks.

use graspforge_core::ddpg::{critic_input, Batch};
use graspforge_core::nn::{Dense, Mlp, OutputActivation};
use ndarray::{Array1, Array2};
use rand::Rng;

use super::rel_err;

pub const H: f64 = 1e-6;
pub const REL_TOL: f64 = 1e-4;

/// Plain-loop forward pass: returns the output rows and the ReLU on/off
/// pattern of every hidden unit (used to skip finite differences across kinks).
pub fn oracle_forward(net: &Mlp, x: &Array2<f64>) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut pattern = Vec::new();
    let mut out = Vec::new();
    for row in x.rows() {
        let mut h: Vec<f64> = row.to_vec();
        for (k, l) in net.layers.iter().enumerate() {
            let (n_in, n_out) = l.w.dim();
            let mut z = vec![0.0; n_out];
            for (j, zj) in z.iter_mut().enumerate() {
                let mut s = l.b[j];
                for i in 0..n_in {
                    s += h[i] * l.w[[i, j]];
                }
                *zj = s;
            }
            if k + 1 < net.layers.len() {
                for v in &mut z {
                    pattern.push(*v > 0.0);
                    *v = v.max(0.0);
                }
            } else if net.output == OutputActivation::Tanh {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            h = z;
        }
        out.push(h);
    }
    (out, pattern)
}

pub fn random_net(r: &mut impl Rng, dims: &[usize], output: OutputActivation) -> Mlp {
    let layers = dims
        .windows(2)
        .map(|d| {
            let s = 1.5 / (d[0] as f64).sqrt();
            Dense {
                w: Array2::from_shape_fn((d[0], d[1]), |_| r.random_range(-s..s)),
                b: Array1::from_shape_fn(d[1], |_| r.random_range(-0.3..0.3)),
            }
        })
        .collect();
    Mlp::from_layers(layers, output).unwrap()
}

pub fn random_batch(r: &mut impl Rng, n: usize, od: usize, ad: usize) -> Batch {
    Batch {
        s: Array2::from_shape_fn((n, od), |_| r.random_range(-2.0..2.0)),
        a: Array2::from_shape_fn((n, ad), |_| r.random_range(-1.0..1.0)),
        r: Array1::from_shape_fn(n, |_| r.random_range(-1.0..1.0)),
        s2: Array2::from_shape_fn((n, od), |_| r.random_range(-2.0..2.0)),
        done: Array1::from_shape_fn(n, |_| if r.random_bool(0.2) { 1.0 } else { 0.0 }),
    }
}

pub fn oracle_critic_loss(critic: &Mlp, b: &Batch, y: &Array1<f64>) -> (f64, Vec<bool>) {
    let (q, pat) = oracle_forward(critic, &critic_input(b.s.view(), b.a.view()).unwrap());
    let loss = q.iter().zip(y).map(|(q, y)| (q[0] - y).powi(2)).sum::<f64>() / b.len() as f64;
    (loss, pat)
}

pub fn oracle_actor_objective(actor: &Mlp, critic: &Mlp, b: &Batch) -> (f64, Vec<bool>) {
    let (a, mut pat) = oracle_forward(actor, &b.s);
    let a = Array2::from_shape_fn((b.len(), actor.output_dim()), |(i, j)| a[i][j]);
    let (q, p2) = oracle_forward(critic, &critic_input(b.s.view(), a.view()).unwrap());
    pat.extend(p2);
    (q.iter().map(|q| q[0]).sum::<f64>() / b.len() as f64, pat)
}

/// Compare every analytic parameter gradient against central differences.
/// Returns `(checked, skipped_at_kinks, worst_rel_err)`.
pub fn check_params(
    net: &Mlp,
    analytic: &[(Array2<f64>, Array1<f64>)],
    f: impl Fn(&Mlp) -> (f64, Vec<bool>),
) -> (usize, usize, f64) {
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    let mut probe = |set: &dyn Fn(&mut Mlp, f64), g: f64| {
        let (mut plus, mut minus) = (net.clone(), net.clone());
        set(&mut plus, H);
        set(&mut minus, -H);
        let ((fp, pp), (fm, pm)) = (f(&plus), f(&minus));
        if pp != pm {
            skipped += 1;
            return;
        }
        let fd = (fp - fm) / (2.0 * H);
        worst = worst.max(rel_err(g, fd, 1e-6));
        checked += 1;
    };
    for (k, (gw, gb)) in analytic.iter().enumerate() {
        for ((i, j), &g) in gw.indexed_iter() {
            probe(&|m: &mut Mlp, d| m.layers[k].w[[i, j]] += d, g);
        }
        for (j, &g) in gb.indexed_iter() {
            probe(&|m: &mut Mlp, d| m.layers[k].b[j] += d, g);
        }
    }
    (checked, skipped, worst)
}
