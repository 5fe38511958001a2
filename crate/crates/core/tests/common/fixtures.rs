//! Scene, sequence and reward-input generators.

use graspforge_core::geom::{Axis, Pose, Rot3, Vec3};
use graspforge_core::mocap::{extract_reward_params, InteractionGoal, MocapSequence};
use graspforge_core::reward::{RewardInput, WeightConfig};
use graspforge_core::sim::{Scene, SceneConfig, SensorDef};
use rand::Rng;

use super::{norm, random_rot, random_sequence, random_vec, sub};

/// Four-joint arm with mixed axes, a 3-DoF wrist and three 2-joint fingers.
pub fn chain_scene() -> Scene {
    let cfg = SceneConfig {
        arm_link_lengths: vec![0.3, 0.25, 0.2, 0.15],
        arm_axes: vec![Axis::Z, Axis::Y, Axis::X, Axis::Z],
        wrist_dof: 3,
        fingers: 3,
        joints_per_finger: 2,
        joint_limits: vec![[-3.0, 3.0]; 4 + 3 + 6],
        ..SceneConfig::default()
    };
    Scene::new(&cfg).unwrap()
}

/// Default scene with extra offset sensors, including ones on arm links.
pub fn contact_scene() -> Scene {
    let mut cfg = SceneConfig::default().resolved();
    cfg.sensors = vec![
        SensorDef { link: 3, offset: [0.01, 0.005, 0.0], radius: 0.012 },
        SensorDef { link: 5, offset: [0.0, 0.0, 0.0], radius: 0.01 },
        SensorDef { link: 7, offset: [0.0, -0.004, 0.003], radius: 0.008 },
        SensorDef { link: 1, offset: [0.0, 0.0, 0.01], radius: 0.02 },
        SensorDef { link: 0, offset: [0.0; 3], radius: 0.01 },
    ];
    Scene::new(&cfg).unwrap()
}

pub fn transform_sequence(seq: &MocapSequence, rot: &Rot3, shift: [f64; 3]) -> MocapSequence {
    let mut out = seq.clone();
    let tf = |p: [f64; 3]| {
        let q = rot.apply(p);
        [q[0] + shift[0], q[1] + shift[1], q[2] + shift[2]]
    };
    for fr in &mut out.frames {
        fr.actor_link_pos.iter_mut().for_each(|p| *p = tf(*p));
        fr.target_link_pos.iter_mut().for_each(|p| *p = tf(*p));
        fr.target_link_rot.iter_mut().for_each(|r| *r = rot.mul(r));
    }
    out
}

pub struct RandomScene {
    pub goal: InteractionGoal,
    pub link: Pose,
    pub input: RewardInput,
    pub action: Vec<f64>,
    pub t: usize,
    pub cfg: WeightConfig,
}

pub fn random_scene(r: &mut impl Rng) -> RandomScene {
    let n_alpha = r.random_range(1..6);
    let n_c = r.random_range(1..6);
    let frames = r.random_range(2..20);
    let seq = random_sequence(r, frames, 5, 4, n_alpha);
    let mask: Vec<bool> = (0..n_c).map(|_| r.random_bool(0.5)).collect();
    let (k_p, k_alpha) = (r.random_range(0.1..10.0), r.random_range(0.0..3.0));
    let goal = extract_reward_params(&seq, k_p, k_alpha, &mask).unwrap();
    let nf = goal.feature_ids.len();
    let cfg = WeightConfig {
        k_p: goal.pos_weights.iter().copied().fold(0.0, f64::max),
        k_alpha: goal.angle_weights[0],
        k_c: if r.random_bool(0.5) { None } else { Some(r.random_range(0.0..3.0)) },
        k_a: r.random_range(0.0..2.0),
        k_pi: if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..2.0) },
        k_alphai: if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..2.0) },
        undesired_contact_penalty: 0.0,
    };
    let n_act = r.random_range(1..8);
    RandomScene {
        link: Pose::new(random_vec(r, 1.0), random_rot(r)),
        input: RewardInput {
            feature_pos: (0..nf).map(|_| random_vec(r, 1.0)).collect(),
            angles: (0..n_alpha).map(|_| r.random_range(-1.5..1.5)).collect(),
            contacts: (0..n_c).map(|_| r.random_bool(0.5)).collect(),
        },
        action: (0..n_act).map(|_| r.random_range(-1.0..=1.0)).collect(),
        t: r.random_range(0..=goal.t_min + 3),
        goal,
        cfg,
    }
}

/// Direct sum of weighted goal distances.
pub fn oracle_pos(f: &[Vec3], g: &[Vec3], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..f.len() {
        s += w[k] * norm(sub(g[k], f[k]));
    }
    -s
}
