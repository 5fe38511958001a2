//! Scripted synthetic demonstrations built from the scene's own hand model.
//!
//! The target hand faces the agent (yaw ≈ π) about 0.72 m down the x axis.
//! The actor hand approaches along a smooth path, reaches its contact
//! configuration at a known frame and then pulls back a little, so the global
//! distance minimum sits exactly at the contact frame. That frame is recorded
//! in `source_id` as `contact=<t>`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MocapFrame, MocapSequence};
use crate::error::Error;
use crate::geom::{self, Axis, Pose, Rot3, Vec3};
use crate::sim::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoKind {
    Handshake,
    Clap,
    Touch,
}

impl DemoKind {
    pub const ALL: [DemoKind; 3] = [DemoKind::Handshake, DemoKind::Clap, DemoKind::Touch];

    pub fn name(self) -> &'static str {
        match self {
            DemoKind::Handshake => "handshake",
            DemoKind::Clap => "clap",
            DemoKind::Touch => "touch",
        }
    }

    /// Sensors expected to fire at the interaction: every fingertip, or only
    /// the middle fingertip for a touch.
    pub fn default_contact_mask(self, scene: &Scene) -> Vec<bool> {
        let cfg = scene.config();
        let tips = cfg.fingertip_links();
        let middle = tips.get(cfg.fingers / 2).copied();
        cfg.sensors
            .iter()
            .map(|s| match self {
                DemoKind::Touch => Some(s.link) == middle,
                DemoKind::Handshake | DemoKind::Clap => tips.contains(&s.link),
            })
            .collect()
    }
}

impl fmt::Display for DemoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DemoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim_end_matches("-like") {
            "handshake" => Ok(DemoKind::Handshake),
            "clap" => Ok(DemoKind::Clap),
            "touch" => Ok(DemoKind::Touch),
            other => Err(Error::Config(format!("unknown demo kind `{other}`"))),
        }
    }
}

struct Script {
    contact_angles: Vec<f64>,
    open_angles: Vec<f64>,
    target_angles: Vec<f64>,
    /// Actor link that is pinned next to `target_anchor` at contact.
    actor_anchor: usize,
    target_anchor: usize,
    /// Anchor offset at contact, in the target base frame.
    anchor_offset: Vec3,
    approach: Vec3,
    yaw_swing: f64,
    /// Amplitude of the lateral wind-up arc.
    arc: f64,
}

fn script(kind: DemoKind, scene: &Scene, rng: &mut ChaCha8Rng) -> Script {
    let cfg = scene.config();
    let (w, jpf) = (cfg.wrist_dof, cfg.joints_per_finger);
    let mid = cfg.fingers / 2;
    let tip = cfg.fingertip_link(mid);
    let mut jitter = |a: f64| a + rng.random_range(-0.05..0.05);
    let mut fingers = |curl: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut v = vec![0.0; w];
        for f in 0..cfg.fingers {
            for _ in 0..jpf {
                v.push(jitter(curl(f)));
            }
        }
        v
    };
    let (contact_angles, target_angles, target_anchor, anchor_offset, approach, yaw_swing, arc) = match kind {
        DemoKind::Handshake => {
            (fingers(&|_| 0.25), fingers(&|_| 0.25), tip, [0.025, 0.0, 0.0], [-0.13, -0.06, 0.0], -0.3, 0.0)
        }
        DemoKind::Clap => (fingers(&|_| 0.0), fingers(&|_| 0.0), tip, [0.025, 0.0, 0.0], [-0.12, 0.0, 0.0], 0.3, 0.12),
        DemoKind::Touch => (
            fingers(&|f| if f == mid { 0.0 } else { 1.2 }),
            fingers(&|_| 0.1),
            tip,
            [0.025, 0.0, 0.0],
            [-0.14, 0.04, 0.0],
            0.0,
            0.0,
        ),
    };
    let open_angles = contact_angles.iter().map(|a| 0.3 * a).collect();
    Script {
        contact_angles,
        open_angles,
        target_angles,
        actor_anchor: tip,
        target_anchor,
        anchor_offset,
        approach,
        yaw_swing,
        arc,
    }
}

fn clamp_hand(scene: &Scene, angles: &mut [f64]) {
    let lim = &scene.limits()[scene.arm_dof()..];
    for (a, [lo, hi]) in angles.iter_mut().zip(lim) {
        *a = a.clamp(*lo, *hi);
    }
}

/// Deterministic for a given `(kind, scene, seed)`.
pub fn synth_demo(kind: DemoKind, scene: &Scene, seed: u64) -> MocapSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_DE30);
    let target_pos = [0.72 + rng.random_range(-0.02..0.02), rng.random_range(-0.02..0.02), 0.0];
    let target_yaw = PI + rng.random_range(-0.05..0.05);
    let target = Pose::new(target_pos, Rot3::about(Axis::Z, target_yaw));
    let contact_frame = rng.random_range(40..=50usize);
    let n_frames = contact_frame + 12;
    let mut sc = script(kind, scene, &mut rng);
    clamp_hand(scene, &mut sc.contact_angles);
    clamp_hand(scene, &mut sc.open_angles);
    clamp_hand(scene, &mut sc.target_angles);

    let target_links = scene.hand_links(&target, &sc.target_angles);
    // Actor hand at contact: pointing back at the target, anchor pinned next to the target anchor.
    let contact_yaw = target_yaw - PI;
    let contact_rot = Rot3::about(Axis::Z, contact_yaw);
    let local = scene.hand_links(&Pose::new([0.0; 3], contact_rot), &sc.contact_angles);
    let anchor_world = target.transform_point(geom::add(
        target.rot.apply_transpose(geom::sub(target_links[sc.target_anchor].pos, target.pos)),
        sc.anchor_offset,
    ));
    let contact_base = geom::sub(anchor_world, local[sc.actor_anchor].pos);

    let mut frames = Vec::with_capacity(n_frames);
    for t in 1..=n_frames {
        let (base, yaw, angles) = if t <= contact_frame {
            let u = (t - 1) as f64 / (contact_frame - 1) as f64;
            let s = u * u * (3.0 - 2.0 * u);
            let mut p = geom::add(contact_base, geom::scale(sc.approach, 1.0 - s));
            p[1] += sc.arc * (PI * s).sin();
            let angles: Vec<f64> =
                sc.open_angles.iter().zip(&sc.contact_angles).map(|(o, c)| o + s * (c - o)).collect();
            (p, contact_yaw + (1.0 - s) * sc.yaw_swing, angles)
        } else {
            let v = (t - contact_frame) as f64 / (n_frames - contact_frame) as f64;
            let p = geom::add(contact_base, geom::scale(sc.approach, 0.3 * v));
            (p, contact_yaw, sc.contact_angles.clone())
        };
        let actor = scene.hand_links(&Pose::new(base, Rot3::about(Axis::Z, yaw)), &angles);
        frames.push(MocapFrame {
            t,
            actor_link_pos: actor.iter().map(|p| p.pos).collect(),
            target_link_pos: target_links.iter().map(|p| p.pos).collect(),
            target_link_rot: target_links.iter().map(|p| p.rot).collect(),
            actor_angles: angles,
            target_angles: sc.target_angles.clone(),
        });
    }
    let tips = scene.config().fingertip_links();
    let mut target_ids = vec![1];
    target_ids.extend(&tips);
    MocapSequence {
        frames,
        dt: scene.config().dt,
        actor_feature_ids: tips,
        target_feature_ids: target_ids,
        actor_wrist_id: 0,
        source_id: format!("synth:{kind}:seed={seed}:contact={contact_frame}"),
    }
}

/// Ground-truth contact frame recorded by [`synth_demo`].
pub fn synth_contact_frame(seq: &MocapSequence) -> Option<usize> {
    seq.source_id.split(':').find_map(|f| f.strip_prefix("contact=")).and_then(|v| v.parse().ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mocap::extract_reward_params;
    use crate::sim::SceneConfig;

    fn scene() -> Scene {
        Scene::new(&SceneConfig::default()).unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        let s = scene();
        let a = synth_demo(DemoKind::Handshake, &s, 7);
        let b = synth_demo(DemoKind::Handshake, &s, 7);
        assert_eq!(a, b);
        assert_ne!(a, synth_demo(DemoKind::Handshake, &s, 8));
        a.validate().unwrap();
    }

    #[test]
    fn extraction_recovers_contact_frame() {
        let s = scene();
        for kind in DemoKind::ALL {
            for seed in 0..20 {
                let seq = synth_demo(kind, &s, seed);
                let g = extract_reward_params(&seq, 1.0, 1.0, &[]).unwrap();
                assert_eq!(Some(g.t_min), synth_contact_frame(&seq), "{kind} seed {seed}");
            }
        }
    }

    /// Sum of turning angles along the wrist path.
    fn curvature(seq: &MocapSequence) -> f64 {
        let p: Vec<Vec3> = seq.frames.iter().map(|f| f.actor_link_pos[seq.actor_wrist_id]).collect();
        p.windows(3)
            .map(|w| {
                let (a, b) = (geom::sub(w[1], w[0]), geom::sub(w[2], w[1]));
                let (na, nb) = (geom::norm(a), geom::norm(b));
                if na < 1e-12 || nb < 1e-12 {
                    0.0
                } else {
                    (geom::dot(a, b) / (na * nb)).clamp(-1.0, 1.0).acos()
                }
            })
            .sum()
    }

    #[test]
    fn clap_has_wind_up() {
        let s = scene();
        for seed in 0..5 {
            let clap = curvature(&synth_demo(DemoKind::Clap, &s, seed));
            let shake = curvature(&synth_demo(DemoKind::Handshake, &s, seed));
            assert!(clap > shake + 0.5, "clap {clap} vs handshake {shake}");
        }
    }

    #[test]
    fn contact_masks() {
        let s = scene();
        let n_on = |k: DemoKind| k.default_contact_mask(&s).iter().filter(|&&b| b).count();
        assert_eq!(n_on(DemoKind::Handshake), 3);
        assert_eq!(n_on(DemoKind::Touch), 1);
        assert_eq!("clap-like".parse::<DemoKind>().unwrap(), DemoKind::Clap);
    }
}
