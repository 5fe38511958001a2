//! Deterministic fixed-step simulator of a planar arm carrying a multi-finger
//! hand, facing a posable (unactuated) target hand built from the same hand
//! model.
//!
//! Hand link layout, shared by agent and target and by mocap files:
//! `0` wrist frame, `1` palm centre, then `fingers × joints_per_finger` finger
//! links in finger-major order. The last link of each finger is its tip.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Axis, Pose, Rot3, Vec3, ORTHO_TOL};

/// Contact sensor rigidly attached to an agent hand link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorDef {
    /// Hand link index (see module docs).
    pub link: usize,
    #[serde(default)]
    pub offset: Vec3,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub arm_link_lengths: Vec<f64>,
    /// Rotation axis of each arm joint; empty means all `z` (planar arm).
    pub arm_axes: Vec<Axis>,
    pub wrist_dof: usize,
    pub fingers: usize,
    pub joints_per_finger: usize,
    pub palm_length: f64,
    pub finger_link_length: f64,
    /// Lateral distance between neighbouring finger roots.
    pub finger_spacing: f64,
    /// Per-joint `[lo, hi]` in radians, arm joints first. Empty means defaults.
    pub joint_limits: Vec<[f64; 2]>,
    /// Empty means the default layout (fingertips, palm, one proximal link).
    pub sensors: Vec<SensorDef>,
    /// Collision radius of each target-hand link sphere.
    pub target_link_radius: f64,
    pub contact_threshold: f64,
    pub dt: f64,
    pub max_joint_speed: f64,
    /// Per-joint `[kp, kd]`. Empty means `[100, 20]` everywhere.
    pub pd_gains: Vec<[f64; 2]>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            arm_link_lengths: vec![0.40, 0.35],
            arm_axes: Vec::new(),
            wrist_dof: 1,
            fingers: 3,
            joints_per_finger: 2,
            palm_length: 0.08,
            finger_link_length: 0.04,
            finger_spacing: 0.03,
            joint_limits: Vec::new(),
            sensors: Vec::new(),
            target_link_radius: 0.015,
            contact_threshold: 0.01,
            dt: 0.02,
            max_joint_speed: 4.0,
            pd_gains: Vec::new(),
        }
    }
}

impl SceneConfig {
    pub fn arm_dof(&self) -> usize {
        self.arm_link_lengths.len()
    }

    /// Hand joints: wrist plus all finger joints.
    pub fn n_alpha(&self) -> usize {
        self.wrist_dof + self.fingers * self.joints_per_finger
    }

    pub fn n_dof(&self) -> usize {
        self.arm_dof() + self.n_alpha()
    }

    pub fn n_hand_links(&self) -> usize {
        2 + self.fingers * self.joints_per_finger
    }

    pub fn fingertip_link(&self, finger: usize) -> usize {
        2 + finger * self.joints_per_finger + self.joints_per_finger - 1
    }

    pub fn fingertip_links(&self) -> Vec<usize> {
        (0..self.fingers).map(|f| self.fingertip_link(f)).collect()
    }

    /// Fill every defaulted list so the config is fully explicit.
    pub fn resolved(&self) -> SceneConfig {
        let mut c = self.clone();
        if c.arm_axes.is_empty() {
            c.arm_axes = vec![Axis::Z; c.arm_dof()];
        }
        if c.joint_limits.is_empty() {
            let mut lim = Vec::with_capacity(c.n_dof());
            for k in 0..c.arm_dof() {
                lim.push(if k == 0 { [-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2] } else { [0.0, 2.6] });
            }
            lim.extend(std::iter::repeat_n([-1.6, 1.6], c.wrist_dof));
            lim.extend(std::iter::repeat_n([-0.3, 1.4], c.fingers * c.joints_per_finger));
            c.joint_limits = lim;
        }
        if c.sensors.is_empty() {
            c.sensors = default_sensors(&c);
        }
        if c.pd_gains.is_empty() {
            c.pd_gains = vec![[100.0, 20.0]; c.n_dof()];
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.arm_dof() == 0 {
            return bad("arm needs at least one link".into());
        }
        let lengths = self.arm_link_lengths.iter().chain([&self.palm_length, &self.finger_link_length]);
        if lengths.into_iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return bad("all link lengths must be > 0".into());
        }
        if self.fingers > 0 && self.joints_per_finger == 0 {
            return bad("fingers need at least one joint".into());
        }
        if self.arm_axes.len() != self.arm_dof() {
            return bad(format!("{} arm axes for {} arm links", self.arm_axes.len(), self.arm_dof()));
        }
        if self.joint_limits.len() != self.n_dof() {
            return bad(format!("{} joint limits for {} joints", self.joint_limits.len(), self.n_dof()));
        }
        for (k, [lo, hi]) in self.joint_limits.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("joint {k} has empty limits [{lo}, {hi}]"));
            }
        }
        if self.pd_gains.len() != self.n_dof() {
            return bad(format!("{} pd gains for {} joints", self.pd_gains.len(), self.n_dof()));
        }
        if self.pd_gains.iter().flatten().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("pd gains must be finite and >= 0".into());
        }
        if self.sensors.is_empty() {
            return bad("at least one contact sensor is required".into());
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if s.link >= self.n_hand_links() || !(s.radius >= 0.0) || !geom::is_finite(s.offset) {
                return bad(format!("sensor {i} is invalid"));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be > 0".into());
        }
        if !(self.max_joint_speed > 0.0) {
            return bad("max_joint_speed must be > 0".into());
        }
        if !(self.target_link_radius >= 0.0 && self.contact_threshold >= 0.0) {
            return bad("radii and contact threshold must be >= 0".into());
        }
        Ok(())
    }
}

fn default_sensors(c: &SceneConfig) -> Vec<SensorDef> {
    let r = 0.01;
    let mut s: Vec<SensorDef> =
        c.fingertip_links().into_iter().map(|link| SensorDef { link, offset: [0.0; 3], radius: r }).collect();
    s.push(SensorDef { link: 1, offset: [0.0; 3], radius: r });
    if c.fingers > 0 && c.joints_per_finger > 1 {
        let mid = c.fingers / 2;
        s.push(SensorDef { link: 2 + mid * c.joints_per_finger, offset: [0.0; 3], radius: r });
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub target_pose: Pose,
    pub target_angles: Vec<f64>,
    pub target_velocity: Vec3,
    pub time: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub contacts: Vec<bool>,
    /// All target hand link positions, flattened xyz.
    pub target_link_positions: Vec<f64>,
}

impl Observation {
    /// Flat policy input: `q, qdot, contacts (0/1), target link xyz`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.q.len() * 2 + self.contacts.len() + self.target_link_positions.len());
        v.extend_from_slice(&self.q);
        v.extend_from_slice(&self.qdot);
        v.extend(self.contacts.iter().map(|&c| if c { 1.0 } else { 0.0 }));
        v.extend_from_slice(&self.target_link_positions);
        v
    }
}

/// Joint setpoint command, each component in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Action(pub Vec<f64>);

impl Action {
    pub fn zeros(n: usize) -> Self {
        Action(vec![0.0; n])
    }
}

/// A validated, fully resolved scene.
#[derive(Clone, Debug)]
pub struct Scene {
    cfg: SceneConfig,
}

impl Scene {
    pub fn new(cfg: &SceneConfig) -> Result<Scene> {
        let cfg = cfg.resolved();
        cfg.validate()?;
        Ok(Scene { cfg })
    }

    pub fn config(&self) -> &SceneConfig {
        &self.cfg
    }

    pub fn arm_dof(&self) -> usize {
        self.cfg.arm_dof()
    }

    pub fn n_alpha(&self) -> usize {
        self.cfg.n_alpha()
    }

    pub fn n_dof(&self) -> usize {
        self.cfg.n_dof()
    }

    pub fn n_action(&self) -> usize {
        self.cfg.n_dof()
    }

    pub fn n_sensors(&self) -> usize {
        self.cfg.sensors.len()
    }

    pub fn n_hand_links(&self) -> usize {
        self.cfg.n_hand_links()
    }

    pub fn obs_dim(&self) -> usize {
        2 * self.n_dof() + self.n_sensors() + 3 * self.n_hand_links()
    }

    pub fn limits(&self) -> &[[f64; 2]] {
        &self.cfg.joint_limits
    }

    pub fn arm_reach(&self) -> f64 {
        self.cfg.arm_link_lengths.iter().sum()
    }

    /// Upper bound on the distance from the agent base to any hand link.
    pub fn total_reach(&self) -> f64 {
        self.arm_reach()
            + self.cfg.palm_length
            + self.cfg.finger_link_length * self.cfg.joints_per_finger as f64
            + self.cfg.finger_spacing * self.cfg.fingers as f64
    }

    pub fn mid_pose(&self) -> Vec<f64> {
        self.limits().iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()
    }

    pub fn check_limits(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.n_dof() {
            return Err(Error::Shape(format!("q has {} entries, want {}", q.len(), self.n_dof())));
        }
        for (k, (&v, [lo, hi])) in q.iter().zip(self.limits()).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("joint {k}")));
            }
            if v < *lo || v > *hi {
                return Err(Error::Config(format!("joint {k} = {v} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn clamp_to_limits(&self, q: &mut [f64]) {
        for (v, [lo, hi]) in q.iter_mut().zip(self.limits()) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Action that holds the given joint configuration as setpoint.
    pub fn action_for(&self, q: &[f64]) -> Action {
        Action(
            q.iter()
                .zip(self.limits())
                .map(|(&v, [lo, hi])| if hi > lo { 2.0 * (v - lo) / (hi - lo) - 1.0 } else { 0.0 })
                .collect(),
        )
    }

    pub fn setpoint(&self, action: &Action) -> Vec<f64> {
        action.0.iter().zip(self.limits()).map(|(&a, [lo, hi])| lo + 0.5 * (a + 1.0) * (hi - lo)).collect()
    }

    /// Frames at the end of each arm link; the last one is the wrist.
    pub fn arm_links(&self, q_arm: &[f64], base: &Pose) -> Vec<Pose> {
        let mut frame = *base;
        let mut out = Vec::with_capacity(q_arm.len());
        for ((&angle, &axis), &len) in q_arm.iter().zip(&self.cfg.arm_axes).zip(&self.cfg.arm_link_lengths) {
            frame.rot = frame.rot.mul(&Rot3::about(axis, angle));
            frame.pos = frame.transform_point([len, 0.0, 0.0]);
            out.push(frame);
        }
        out
    }

    pub fn wrist_pose(&self, q_arm: &[f64]) -> Pose {
        *self.arm_links(q_arm, &Pose::IDENTITY).last().expect("arm has links")
    }

    /// Hand link poses for a hand rooted at `base` (see module docs for order).
    pub fn hand_links(&self, base: &Pose, angles: &[f64]) -> Vec<Pose> {
        const WRIST_AXES: [Axis; 3] = [Axis::Z, Axis::Y, Axis::X];
        let c = &self.cfg;
        let mut out = Vec::with_capacity(c.n_hand_links());
        out.push(*base);
        let mut hand = *base;
        for w in 0..c.wrist_dof {
            hand.rot = hand.rot.mul(&Rot3::about(WRIST_AXES[w % 3], angles[w]));
        }
        out.push(Pose::new(hand.transform_point([0.5 * c.palm_length, 0.0, 0.0]), hand.rot));
        for f in 0..c.fingers {
            let lateral = (f as f64 - 0.5 * (c.fingers as f64 - 1.0)) * c.finger_spacing;
            let mut frame = Pose::new(hand.transform_point([c.palm_length, lateral, 0.0]), hand.rot);
            for k in 0..c.joints_per_finger {
                let a = angles[c.wrist_dof + f * c.joints_per_finger + k];
                frame.rot = frame.rot.mul(&Rot3::about(Axis::Z, a));
                frame.pos = frame.transform_point([c.finger_link_length, 0.0, 0.0]);
                out.push(frame);
            }
        }
        out
    }

    /// Arm link frames followed by hand link frames, all in world coordinates.
    pub fn forward_kinematics(&self, q: &[f64], base: &Pose) -> Result<Vec<Pose>> {
        self.check_limits(q)?;
        let (q_arm, q_hand) = q.split_at(self.arm_dof());
        let mut links = self.arm_links(q_arm, base);
        let wrist = *links.last().expect("arm has links");
        links.extend(self.hand_links(&wrist, q_hand));
        Ok(links)
    }

    /// Agent hand links without the limit check (state is trusted).
    pub fn agent_hand_links(&self, q: &[f64]) -> Vec<Pose> {
        let (q_arm, q_hand) = q.split_at(self.arm_dof());
        self.hand_links(&self.wrist_pose(q_arm), q_hand)
    }

    pub fn target_links(&self, state: &SimState) -> Vec<Pose> {
        self.hand_links(&state.target_pose, &state.target_angles)
    }

    pub fn sensor_positions(&self, hand: &[Pose]) -> Vec<Vec3> {
        self.cfg.sensors.iter().map(|s| hand[s.link].transform_point(s.offset)).collect()
    }

    /// Sensor `i` fires when the gap between its sphere and the nearest target
    /// link sphere (palm and finger links) is at most the contact threshold.
    pub fn contact_sensors(&self, hand: &[Pose], target: &[Pose]) -> Vec<bool> {
        let r_t = self.cfg.target_link_radius;
        self.cfg
            .sensors
            .iter()
            .map(|s| {
                let p = hand[s.link].transform_point(s.offset);
                target.iter().skip(1).map(|t| geom::dist(p, t.pos) - s.radius - r_t).fold(f64::INFINITY, f64::min)
                    <= self.cfg.contact_threshold
            })
            .collect()
    }

    pub fn contacts(&self, state: &SimState) -> Vec<bool> {
        self.contact_sensors(&self.agent_hand_links(&state.q), &self.target_links(state))
    }

    pub fn reset(&self, target_pose: Pose, target_angles: &[f64], agent_q0: &[f64]) -> Result<SimState> {
        self.check_limits(agent_q0)?;
        if target_angles.len() != self.n_alpha() {
            return Err(Error::Shape(format!("target has {} angles, want {}", target_angles.len(), self.n_alpha())));
        }
        if target_angles.iter().any(|a| !a.is_finite()) || !geom::is_finite(target_pose.pos) {
            return Err(Error::NonFinite("target pose".into()));
        }
        if !target_pose.rot.is_orthonormal(ORTHO_TOL) {
            return Err(Error::Config("target rotation is not orthonormal".into()));
        }
        Ok(SimState {
            q: agent_q0.to_vec(),
            qdot: vec![0.0; self.n_dof()],
            target_pose,
            target_angles: target_angles.to_vec(),
            target_velocity: [0.0; 3],
            time: 0,
        })
    }

    /// PD setpoint tracking integrated with semi-implicit Euler.
    pub fn step(&self, state: &SimState, action: &Action) -> Result<SimState> {
        if action.0.len() != self.n_action() {
            return Err(Error::Shape(format!("action has {} entries, want {}", action.0.len(), self.n_action())));
        }
        if action.0.iter().any(|a| !a.is_finite())
            || state.q.iter().chain(&state.qdot).any(|v| !v.is_finite())
            || !geom::is_finite(state.target_velocity)
        {
            return Err(Error::NonFinite("simulator input".into()));
        }
        if action.0.iter().any(|a| a.abs() > 1.0) {
            return Err(Error::Config("action component outside [-1, 1]".into()));
        }
        let dt = self.cfg.dt;
        let vmax = self.cfg.max_joint_speed;
        let setpoint = self.setpoint(action);
        let mut next = state.clone();
        for k in 0..self.n_dof() {
            let [kp, kd] = self.cfg.pd_gains[k];
            let [lo, hi] = self.cfg.joint_limits[k];
            let acc = kp * (setpoint[k] - state.q[k]) - kd * state.qdot[k];
            let mut v = (state.qdot[k] + dt * acc).clamp(-vmax, vmax);
            let mut p = state.q[k] + dt * v;
            if p < lo {
                p = lo;
                v = v.max(0.0);
            } else if p > hi {
                p = hi;
                v = v.min(0.0);
            }
            next.q[k] = p;
            next.qdot[k] = v;
        }
        next.target_pose.pos = geom::add(state.target_pose.pos, geom::scale(state.target_velocity, dt));
        next.time = state.time + 1;
        Ok(next)
    }

    pub fn observe(&self, state: &SimState) -> Observation {
        let target = self.target_links(state);
        let hand = self.agent_hand_links(&state.q);
        Observation {
            q: state.q.clone(),
            qdot: state.qdot.clone(),
            contacts: self.contact_sensors(&hand, &target),
            target_link_positions: target.iter().flat_map(|p| p.pos).collect(),
        }
    }

    /// Arm joint angles placing the wrist as close as possible to `desired`,
    /// found by damped least squares from the mid-range arm pose, then
    /// polished by projected gradient descent so limit-bound optima converge.
    pub fn closest_reachable(&self, desired: Vec3) -> Vec<f64> {
        let n = self.arm_dof();
        let limits = &self.cfg.joint_limits[..n];
        let mut q: Vec<f64> = limits.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect();
        let mut best = (f64::INFINITY, q.clone());
        for _ in 0..400 {
            let (wrist, cols) = self.wrist_jacobian(&q);
            let err = geom::sub(desired, wrist);
            let e = geom::norm(err);
            if e < best.0 {
                best = (e, q.clone());
            }
            if e < 1e-10 {
                break;
            }
            let lambda = (0.2 * e).clamp(1e-4, 0.05);
            let mut jjt = [[0.0; 3]; 3];
            for c in &cols {
                for i in 0..3 {
                    for j in 0..3 {
                        jjt[i][j] += c[i] * c[j];
                    }
                }
            }
            for (i, row) in jjt.iter_mut().enumerate() {
                row[i] += lambda * lambda;
            }
            let y = solve3(jjt, err);
            let mut dq: Vec<f64> = cols.iter().map(|c| geom::dot(*c, y)).collect();
            let step = dq.iter().map(|d| d.abs()).fold(0.0, f64::max);
            if step > 0.3 {
                dq.iter_mut().for_each(|d| *d *= 0.3 / step);
            }
            for ((v, d), [lo, hi]) in q.iter_mut().zip(&dq).zip(limits) {
                *v = (*v + d).clamp(*lo, *hi);
            }
        }
        let e = geom::dist(desired, self.wrist_pose(&q).pos);
        if e < best.0 {
            best = (e, q);
        }
        self.polish_projected(desired, best.1)
    }

    /// Wrist position and Jacobian columns `axis_k × (wrist − joint_k)`.
    fn wrist_jacobian(&self, q: &[f64]) -> (Vec3, Vec<Vec3>) {
        let n = q.len();
        let links = self.arm_links(q, &Pose::IDENTITY);
        let wrist = links[n - 1].pos;
        let mut cols = Vec::with_capacity(n);
        let mut frame = Pose::IDENTITY;
        for k in 0..n {
            let axis = frame.rot.mul(&Rot3::about(self.cfg.arm_axes[k], q[k])).apply(self.cfg.arm_axes[k].unit());
            cols.push(cross(axis, geom::sub(wrist, frame.pos)));
            frame = links[k];
        }
        (wrist, cols)
    }

    /// Projected gradient descent on `0.5 ‖desired − wrist(q)‖²` with
    /// backtracking, never increasing the distance.
    fn polish_projected(&self, desired: Vec3, mut q: Vec<f64>) -> Vec<f64> {
        let limits = &self.cfg.joint_limits[..q.len()];
        let cost = |q: &[f64]| 0.5 * geom::dist(desired, self.wrist_pose(q).pos).powi(2);
        let mut f = cost(&q);
        let mut step: f64 = 1.0;
        for _ in 0..500 {
            let (wrist, cols) = self.wrist_jacobian(&q);
            let err = geom::sub(desired, wrist);
            let grad: Vec<f64> = cols.iter().map(|c| -geom::dot(*c, err)).collect();
            let mut improved = false;
            step = (step * 2.0).min(10.0);
            while step > 1e-12 {
                let cand: Vec<f64> =
                    q.iter().zip(&grad).zip(limits).map(|((v, g), [lo, hi])| (v - step * g).clamp(*lo, *hi)).collect();
                let fc = cost(&cand);
                if fc < f {
                    improved = f - fc > 1e-16;
                    q = cand;
                    f = fc;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        q
    }
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Cramer's rule for the small SPD systems in the IK loop.
fn solve3(m: [[f64; 3]; 3], b: Vec3) -> Vec3 {
    let r = Rot3(m);
    let d = r.det();
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mm = m;
        for row in 0..3 {
            mm[row][col] = b[row];
        }
        *o = Rot3(mm).det() / d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn scene() -> Scene {
        Scene::new(&SceneConfig::default()).unwrap()
    }

    #[test]
    fn default_dimensions() {
        let s = scene();
        assert_eq!(s.arm_dof(), 2);
        assert_eq!(s.n_alpha(), 7);
        assert_eq!(s.n_action(), 9);
        assert_eq!(s.n_sensors(), 5);
        let st = s.reset(Pose::IDENTITY, &[0.0; 7], &s.mid_pose()).unwrap();
        assert_eq!(s.observe(&st).to_vec().len(), 2 * 9 + 5 + 3 * 8);
        assert_eq!(s.obs_dim(), 2 * 9 + 5 + 3 * 8);
    }

    #[test]
    fn zero_pose_lies_on_rest_axis() {
        let mut cfg = SceneConfig::default();
        cfg.joint_limits = vec![[-3.0, 3.0]; cfg.n_dof()];
        let s = Scene::new(&cfg).unwrap();
        let links = s.forward_kinematics(&vec![0.0; s.n_dof()], &Pose::IDENTITY).unwrap();
        assert_eq!(links[0].pos, [0.40, 0.0, 0.0]);
        assert!((links[1].pos[0] - 0.75).abs() < 1e-15);
        // palm centre, then first finger tip (lateral offset -spacing)
        assert!((links[3].pos[0] - 0.79).abs() < 1e-15);
        let tip0 = links[2 + s.config().fingertip_link(0)].pos;
        assert!((tip0[0] - (0.75 + 0.08 + 0.08)).abs() < 1e-12);
        assert!((tip0[1] + 0.03).abs() < 1e-15);
    }

    #[test]
    fn single_link_quarter_turn() {
        let cfg = SceneConfig {
            arm_link_lengths: vec![1.0],
            joint_limits: vec![[-2.0, 2.0], [-1.0, 1.0], [-1.0, 1.0]],
            wrist_dof: 0,
            fingers: 1,
            joints_per_finger: 2,
            ..SceneConfig::default()
        };
        let s = Scene::new(&cfg).unwrap();
        let links = s.forward_kinematics(&[FRAC_PI_2, 0.0, 0.0], &Pose::IDENTITY).unwrap();
        assert!(links[0].pos[0].abs() < 1e-15);
        assert!((links[0].pos[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_limit_q_rejected() {
        let s = scene();
        let mut q = s.mid_pose();
        q[1] = -0.5;
        assert!(s.forward_kinematics(&q, &Pose::IDENTITY).is_err());
        assert!(s.reset(Pose::IDENTITY, &[0.0; 7], &q).is_err());
    }

    #[test]
    fn holding_action_is_fixed_point() {
        let s = scene();
        let q = s.mid_pose();
        let st = s.reset(Pose::IDENTITY, &[0.0; 7], &q).unwrap();
        let a = s.action_for(&q);
        let next = s.step(&st, &a).unwrap();
        for (x, y) in next.q.iter().zip(&q) {
            assert!((x - y).abs() <= 1e-15);
        }
        assert!(next.qdot.iter().all(|v| v.abs() <= 1e-12));
        assert_eq!(next.time, 1);
        assert_eq!(next.target_pose, st.target_pose);
    }

    #[test]
    fn nan_and_out_of_box_actions_rejected() {
        let s = scene();
        let st = s.reset(Pose::IDENTITY, &[0.0; 7], &s.mid_pose()).unwrap();
        let mut a = Action::zeros(9);
        a.0[3] = f64::NAN;
        assert!(matches!(s.step(&st, &a), Err(Error::NonFinite(_))));
        a.0[3] = 1.5;
        assert!(s.step(&st, &a).is_err());
        assert!(s.step(&st, &Action::zeros(3)).is_err());
    }

    #[test]
    fn zero_gains_keep_state_static() {
        let mut cfg = SceneConfig::default().resolved();
        cfg.pd_gains = vec![[0.0, 0.0]; cfg.n_dof()];
        let s = Scene::new(&cfg).unwrap();
        let st0 = s.reset(Pose::IDENTITY, &[0.1; 7], &s.mid_pose()).unwrap();
        let mut st = st0.clone();
        for _ in 0..50 {
            st = s.step(&st, &Action(vec![0.7; 9])).unwrap();
        }
        assert_eq!(st.q, st0.q);
        assert_eq!(st.qdot, st0.qdot);
    }

    #[test]
    fn far_hands_have_no_contacts() {
        let s = scene();
        let st = s.reset(Pose::new([5.0, 5.0, 5.0], Rot3::IDENTITY), &[0.0; 7], &s.mid_pose()).unwrap();
        assert!(s.contacts(&st).iter().all(|c| !c));
    }

    #[test]
    fn concentric_sensor_is_active() {
        let s = scene();
        let q = s.mid_pose();
        let hand = s.agent_hand_links(&q);
        // Place the target so its palm sphere coincides with sensor 0.
        let p = s.sensor_positions(&hand)[0];
        let target_base = Pose::new(geom::sub(p, [0.04, 0.0, 0.0]), Rot3::IDENTITY);
        let target = s.hand_links(&target_base, &[0.0; 7]);
        assert!(geom::dist(target[1].pos, p) < 1e-12);
        assert!(s.contact_sensors(&hand, &target)[0]);
    }

    #[test]
    fn ik_reaches_fk_generated_point() {
        let s = scene();
        let q_star = [0.3, 1.1];
        let desired = s.wrist_pose(&q_star).pos;
        let q = s.closest_reachable(desired);
        assert!(geom::dist(s.wrist_pose(&q).pos, desired) <= 1e-3);
    }

    #[test]
    fn ik_full_extension_on_rest_axis() {
        let s = scene();
        let q = s.closest_reachable([0.75, 0.0, 0.0]);
        assert!(q[0].abs() < 0.05 && q[1].abs() < 0.1, "{q:?}");
        assert!(geom::dist(s.wrist_pose(&q).pos, [0.75, 0.0, 0.0]) <= 1e-3);
    }
}
