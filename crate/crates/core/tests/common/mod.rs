//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use graspforge_core::geom::{Axis, Rot3, Vec3};
use graspforge_core::mocap::{MocapFrame, MocapSequence};
use graspforge_core::sim::SceneConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod fixtures;
mod learning;

#[allow(unused_imports)]
pub use fixtures::*;
#[allow(unused_imports)]
pub use learning::*;

pub type M4 = [[f64; 4]; 4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn identity4() -> M4 {
    let mut m = [[0.0; 4]; 4];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    m
}

pub fn mul4(a: &M4, b: &M4) -> M4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn trans(x: f64, y: f64, z: f64) -> M4 {
    let mut m = identity4();
    m[0][3] = x;
    m[1][3] = y;
    m[2][3] = z;
    m
}

/// Homogeneous rotation about a principal axis (0 = x, 1 = y, 2 = z).
pub fn rot4(axis: usize, a: f64) -> M4 {
    let (c, s) = (a.cos(), a.sin());
    let mut m = identity4();
    let (i, j) = match axis {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    m[i][i] = c;
    m[i][j] = -s;
    m[j][i] = s;
    m[j][j] = c;
    m
}

pub fn axis_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

pub fn pos4(m: &M4) -> Vec3 {
    [m[0][3], m[1][3], m[2][3]]
}

pub fn apply4(m: &M4, p: Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3];
    }
    out
}

/// World transforms of every arm link followed by every hand link, for a
/// resolved scene config and a base transform.
pub fn oracle_fk(c: &SceneConfig, q: &[f64], base: &M4) -> Vec<M4> {
    let n_arm = c.arm_link_lengths.len();
    let mut out = Vec::new();
    let mut t = *base;
    for k in 0..n_arm {
        t = mul4(&mul4(&t, &rot4(axis_index(c.arm_axes[k]), q[k])), &trans(c.arm_link_lengths[k], 0.0, 0.0));
        out.push(t);
    }
    out.extend(oracle_hand(c, &q[n_arm..], &t));
    out
}

pub fn oracle_hand(c: &SceneConfig, a: &[f64], base: &M4) -> Vec<M4> {
    let mut out = vec![*base];
    let mut h = *base;
    for w in 0..c.wrist_dof {
        h = mul4(&h, &rot4([2, 1, 0][w % 3], a[w]));
    }
    out.push(mul4(&h, &trans(0.5 * c.palm_length, 0.0, 0.0)));
    for f in 0..c.fingers {
        let lateral = (f as f64 - (c.fingers as f64 - 1.0) / 2.0) * c.finger_spacing;
        let mut t = mul4(&h, &trans(c.palm_length, lateral, 0.0));
        for k in 0..c.joints_per_finger {
            t = mul4(
                &mul4(&t, &rot4(2, a[c.wrist_dof + f * c.joints_per_finger + k])),
                &trans(c.finger_link_length, 0.0, 0.0),
            );
            out.push(t);
        }
    }
    out
}

pub fn pose_to_m4(p: &graspforge_core::geom::Pose) -> M4 {
    let mut m = identity4();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = p.rot.0[i][j];
        }
        m[i][3] = p.pos[i];
    }
    m
}

pub fn random_rot(r: &mut impl Rng) -> Rot3 {
    let a = r.random_range(-3.1..3.1);
    let b = r.random_range(-1.5..1.5);
    let c = r.random_range(-3.1..3.1);
    Rot3::about(Axis::Z, a).mul(&Rot3::about(Axis::Y, b)).mul(&Rot3::about(Axis::X, c))
}

pub fn random_vec(r: &mut impl Rng, scale: f64) -> Vec3 {
    [0; 3].map(|_| r.random_range(-scale..scale))
}

pub fn random_q(c: &SceneConfig, r: &mut impl Rng) -> Vec<f64> {
    c.joint_limits.iter().map(|[lo, hi]| r.random_range(*lo..=*hi)).collect()
}

/// Random valid sequence with uniformly scattered links.
pub fn random_sequence(
    r: &mut impl Rng,
    frames: usize,
    n_actor: usize,
    n_target: usize,
    n_alpha: usize,
) -> MocapSequence {
    let frames = (1..=frames)
        .map(|t| MocapFrame {
            t,
            actor_link_pos: (0..n_actor).map(|_| random_vec(r, 0.5)).collect(),
            target_link_pos: (0..n_target).map(|_| random_vec(r, 0.5)).collect(),
            target_link_rot: (0..n_target).map(|_| random_rot(r)).collect(),
            actor_angles: (0..n_alpha).map(|_| r.random_range(-1.0..1.0)).collect(),
            target_angles: (0..n_alpha).map(|_| r.random_range(-1.0..1.0)).collect(),
        })
        .collect();
    MocapSequence {
        frames,
        dt: 0.02,
        actor_feature_ids: (0..n_actor.min(3)).collect(),
        target_feature_ids: (0..n_target).collect(),
        actor_wrist_id: 0,
        source_id: "random".into(),
    }
}

pub fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Exhaustive argmin over (t, i, j) with ties to smallest t, then j, then i.
pub fn brute_argmin(seq: &MocapSequence) -> (usize, usize, usize, f64) {
    let mut best = (0, 0, 0, f64::INFINITY);
    let mut js = seq.target_feature_ids.clone();
    let mut is = seq.actor_feature_ids.clone();
    js.sort_unstable();
    is.sort_unstable();
    for fr in &seq.frames {
        for &j in &js {
            for &i in &is {
                let d = norm(sub(fr.actor_link_pos[i], fr.target_link_pos[j]));
                if d < best.3 {
                    best = (fr.t, i, j, d);
                }
            }
        }
    }
    best
}

/// Relative error `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Small, fast run config on the default scene with handshake demos.
pub fn tiny_config() -> graspforge_core::config::RunConfig {
    let mut cfg = graspforge_core::config::RunConfig::default();
    cfg.agent.hidden = vec![16, 16];
    cfg.agent.batch_size = 32;
    cfg.episode.horizon = 40;
    cfg.episode.n_e = 50;
    cfg.episode.updates_per_round = 10;
    cfg.train.total_steps = 400;
    cfg.train.steps_per_epoch = 100;
    cfg.train.eval_every_epochs = 2;
    cfg.train.eval_episodes = 4;
    cfg
}
