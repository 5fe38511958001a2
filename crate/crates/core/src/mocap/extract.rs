//! Reward-parameter extraction: find the interaction timestep and reference
//! link from the closest actor/target feature pair, then express every goal
//! relative to that link so it can be re-placed on a randomly posed hand.

use log::warn;
use serde::{Deserialize, Serialize};

use super::MocapSequence;
use crate::error::{Error, Result};
use crate::geom::{self, Rot3, Vec3, ORTHO_TOL};

/// Distances below this are clamped before dividing in [`position_weights`].
pub const D_FLOOR: f64 = 1e-6;

/// `d[t][i][j]`: distance between actor feature `i` and target feature `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceTensor {
    n_frames: usize,
    n_actor: usize,
    n_target: usize,
    d: Vec<f64>,
}

impl DistanceTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_frames, self.n_actor, self.n_target)
    }

    /// `t` is the 1-based frame index; `i`, `j` are positions in the feature lists.
    pub fn get(&self, t: usize, i: usize, j: usize) -> f64 {
        self.d[((t - 1) * self.n_actor + i) * self.n_target + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.d
    }
}

pub fn compute_distances(seq: &MocapSequence) -> DistanceTensor {
    let (na, nt) = (seq.actor_feature_ids.len(), seq.target_feature_ids.len());
    let mut d = Vec::with_capacity(seq.len() * na * nt);
    for fr in &seq.frames {
        for &ai in &seq.actor_feature_ids {
            for &tj in &seq.target_feature_ids {
                d.push(geom::dist(fr.actor_link_pos[ai], fr.target_link_pos[tj]));
            }
        }
    }
    DistanceTensor { n_frames: seq.len(), n_actor: na, n_target: nt, d }
}

/// `Rᵀ (p_actor − p_target)`: the actor point in the target link's frame.
pub fn relative_position(p_actor: Vec3, p_target: Vec3, r_target: &Rot3) -> Result<Vec3> {
    if !r_target.is_orthonormal(ORTHO_TOL) {
        return Err(Error::Config("reference rotation is not orthonormal".into()));
    }
    Ok(r_target.apply_transpose(geom::sub(p_actor, p_target)))
}

/// `ω_i = K_p · d_min / d_i` with `d_min = min_i d_i`; distances under
/// [`D_FLOOR`] are clamped first, so the closest feature always gets `K_p`.
pub fn position_weights(d_at_tmin: &[f64], k_p: f64) -> Result<Vec<f64>> {
    if !(k_p > 0.0 && k_p.is_finite()) {
        return Err(Error::Config(format!("K_p must be > 0, got {k_p}")));
    }
    if d_at_tmin.is_empty() {
        return Err(Error::Shape("no position features".into()));
    }
    let clamped: Vec<f64> = d_at_tmin
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if !(d >= D_FLOOR) {
                warn!("feature {i}: distance {d} clamped to {D_FLOOR}");
                D_FLOOR
            } else {
                d
            }
        })
        .collect();
    let d_min = clamped.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(clamped.iter().map(|&d| if d == d_min { k_p } else { k_p * d_min / d }).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionGoal {
    /// 1-based interaction timestep.
    pub t_min: usize,
    /// Reference target link id.
    pub j_min: usize,
    /// Actor feature link that attains the minimum distance.
    pub i_min: usize,
    /// Actor link ids used as position features, aligned with `rel_goal_pos`.
    pub feature_ids: Vec<usize>,
    pub rel_goal_pos: Vec<Vec3>,
    pub goal_angles: Vec<f64>,
    /// Entries for t = 1..=t_min.
    pub imitation_rel_pos: Vec<Vec<Vec3>>,
    pub imitation_angles: Vec<Vec<f64>>,
    pub pos_weights: Vec<f64>,
    pub angle_weights: Vec<f64>,
    pub contact_mask: Vec<bool>,
    pub source_id: String,
}

fn sorted_positions(ids: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&k| (ids[k], k));
    order
}

fn rel_features(seq: &MocapSequence, t: usize, j: usize, ids: &[usize]) -> Result<Vec<Vec3>> {
    let fr = seq.frame(t);
    ids.iter()
        .map(|&i| relative_position(fr.actor_link_pos[i], fr.target_link_pos[j], &fr.target_link_rot[j]))
        .collect()
}

/// Joint argmin of `d(t, i, j)` over the whole sequence. Ties go to the
/// smallest `t`, then the smallest target link id, then the smallest actor id.
/// Returns `(t, actor link id, target link id)`.
pub(crate) fn argmin_distance(seq: &MocapSequence, d: &DistanceTensor) -> (usize, usize, usize) {
    let ai = sorted_positions(&seq.actor_feature_ids);
    let tj = sorted_positions(&seq.target_feature_ids);
    let mut best = (f64::INFINITY, 1, ai[0], tj[0]);
    for t in 1..=seq.len() {
        for &j in &tj {
            for &i in &ai {
                let v = d.get(t, i, j);
                if v < best.0 {
                    best = (v, t, i, j);
                }
            }
        }
    }
    (best.1, seq.actor_feature_ids[best.2], seq.target_feature_ids[best.3])
}

pub fn extract_reward_params(
    seq: &MocapSequence,
    k_p: f64,
    k_alpha: f64,
    contact_mask: &[bool],
) -> Result<InteractionGoal> {
    seq.validate()?;
    if !(k_alpha >= 0.0) {
        return Err(Error::Config(format!("K_alpha must be >= 0, got {k_alpha}")));
    }
    let d = compute_distances(seq);
    let (t_min, i_min, j_min) = argmin_distance(seq, &d);
    let mut goal = InteractionGoal {
        t_min,
        j_min,
        i_min,
        feature_ids: Vec::new(),
        rel_goal_pos: Vec::new(),
        goal_angles: seq.frame(t_min).actor_angles.clone(),
        imitation_rel_pos: Vec::new(),
        imitation_angles: (1..=t_min).map(|t| seq.frame(t).actor_angles.clone()).collect(),
        pos_weights: Vec::new(),
        angle_weights: vec![k_alpha; seq.n_alpha()],
        contact_mask: contact_mask.to_vec(),
        source_id: seq.source_id.clone(),
    };
    goal.set_position_features(seq, &seq.actor_feature_ids, k_p)?;
    Ok(goal)
}

impl InteractionGoal {
    /// Recompute the position goals, imitation positions and weights for a
    /// different set of actor feature links, keeping `t_min` and `j_min`.
    pub fn set_position_features(&mut self, seq: &MocapSequence, ids: &[usize], k_p: f64) -> Result<()> {
        let n_links = seq.frames[0].actor_link_pos.len();
        if ids.is_empty() || ids.iter().any(|&i| i >= n_links) {
            return Err(Error::Config(format!("invalid position feature ids {ids:?}")));
        }
        let fr = seq.frame(self.t_min);
        let dists: Vec<f64> =
            ids.iter().map(|&i| geom::dist(fr.actor_link_pos[i], fr.target_link_pos[self.j_min])).collect();
        self.pos_weights = position_weights(&dists, k_p)?;
        self.imitation_rel_pos =
            (1..=self.t_min).map(|t| rel_features(seq, t, self.j_min, ids)).collect::<Result<_>>()?;
        self.rel_goal_pos = self.imitation_rel_pos[self.t_min - 1].clone();
        self.feature_ids = ids.to_vec();
        Ok(())
    }

    /// Actor wrist at frame `t` in the frame of the reference link at `t`.
    pub fn wrist_relative(&self, seq: &MocapSequence, t: usize) -> Result<Vec3> {
        let fr = seq.frame(t);
        relative_position(
            fr.actor_link_pos[seq.actor_wrist_id],
            fr.target_link_pos[self.j_min],
            &fr.target_link_rot[self.j_min],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("interaction goal: {m}")));
        if self.t_min < 1 || self.imitation_rel_pos.len() != self.t_min {
            return bad("imitation trajectory must have t_min entries");
        }
        if self.imitation_angles.len() != self.t_min {
            return bad("imitation angles must have t_min entries");
        }
        let nf = self.feature_ids.len();
        if self.rel_goal_pos.len() != nf || self.pos_weights.len() != nf {
            return bad("feature count mismatch");
        }
        if self.imitation_rel_pos.iter().any(|v| v.len() != nf) {
            return bad("imitation feature count mismatch");
        }
        if self.angle_weights.len() != self.goal_angles.len()
            || self.imitation_angles.iter().any(|a| a.len() != self.goal_angles.len())
        {
            return bad("angle count mismatch");
        }
        if self.pos_weights.iter().chain(&self.angle_weights).any(|w| !(*w >= 0.0)) {
            return bad("weights must be >= 0");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Axis;
    use crate::mocap::MocapFrame;

    fn frame(t: usize, actor: Vec<Vec3>, target: Vec<Vec3>) -> MocapFrame {
        let n = target.len();
        MocapFrame {
            t,
            actor_link_pos: actor,
            target_link_pos: target,
            target_link_rot: vec![Rot3::IDENTITY; n],
            actor_angles: vec![0.1 * t as f64, -0.2],
            target_angles: vec![0.0],
        }
    }

    fn seq(frames: Vec<MocapFrame>) -> MocapSequence {
        let na = frames[0].actor_link_pos.len();
        let nt = frames[0].target_link_pos.len();
        MocapSequence {
            frames,
            dt: 0.02,
            actor_feature_ids: (0..na).collect(),
            target_feature_ids: (0..nt).collect(),
            actor_wrist_id: 0,
            source_id: "unit".into(),
        }
    }

    #[test]
    fn distances_trivial() {
        let s = seq(vec![frame(1, vec![[1.0, 0.0, 0.0]], vec![[0.0; 3]]), frame(2, vec![[0.0; 3]], vec![[0.0; 3]])]);
        let d = compute_distances(&s);
        assert_eq!(d.get(1, 0, 0), 1.0);
        assert_eq!(d.get(2, 0, 0), 0.0);
    }

    #[test]
    fn relative_position_cases() {
        let r = relative_position([1.0, 2.0, 3.0], [1.0, 0.0, 0.0], &Rot3::IDENTITY).unwrap();
        assert_eq!(r, [0.0, 2.0, 3.0]);
        let yaw = Rot3::about(Axis::Z, 0.7);
        assert_eq!(relative_position([4.0, 5.0, 6.0], [4.0, 5.0, 6.0], &yaw).unwrap(), [0.0; 3]);
        assert!(relative_position([0.0; 3], [1.0; 3], &Rot3([[0.0; 3]; 3])).is_err());
    }

    #[test]
    fn quarter_yaw_offset() {
        // Oracle: explicit Rᵀ·v with R = [[0,-1,0],[1,0,0],[0,0,1]].
        let r = Rot3([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let v = [1.0, 0.0, 0.0];
        let mut expect = [0.0; 3];
        for (c, e) in expect.iter_mut().enumerate() {
            *e = (0..3).map(|row| r.0[row][c] * v[row]).sum();
        }
        assert_eq!(expect, [0.0, -1.0, 0.0]);
        let got = relative_position(v, [0.0; 3], &r).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn weights_examples() {
        assert_eq!(position_weights(&[0.01, 0.02, 0.04], 1.0).unwrap(), vec![1.0, 0.5, 0.25]);
        assert_eq!(position_weights(&[0.3, 0.3, 0.3], 2.5).unwrap(), vec![2.5; 3]);
        let w = position_weights(&[0.0, 0.01], 1.0).unwrap();
        assert_eq!(w[0], 1.0);
        assert!((w[1] - D_FLOOR / 0.01).abs() < 1e-18);
        assert!(position_weights(&[0.1], 0.0).is_err());
    }

    #[test]
    fn unique_minimum_found() {
        // Oracle: minimum at t=2, actor 1, target 0 by construction.
        let s = seq(vec![
            frame(1, vec![[2.0, 0.0, 0.0], [1.0, 0.0, 0.0]], vec![[0.0; 3], [0.0, 5.0, 0.0]]),
            frame(2, vec![[2.0, 1.0, 0.0], [0.1, 0.0, 0.0]], vec![[0.0; 3], [0.0, 5.0, 0.0]]),
            frame(3, vec![[3.0, 1.0, 0.0], [0.5, 0.0, 0.0]], vec![[0.0; 3], [0.0, 5.0, 0.0]]),
        ]);
        let g = extract_reward_params(&s, 1.0, 0.5, &[true]).unwrap();
        assert_eq!((g.t_min, g.j_min, g.i_min), (2, 0, 1));
        assert_eq!(g.rel_goal_pos, vec![[2.0, 1.0, 0.0], [0.1, 0.0, 0.0]]);
        assert_eq!(g.goal_angles, vec![0.2, -0.2]);
        assert_eq!(g.imitation_rel_pos.len(), 2);
        assert_eq!(g.imitation_rel_pos[1], g.rel_goal_pos);
        assert_eq!(g.angle_weights, vec![0.5, 0.5]);
        assert_eq!(g.pos_weights[1], 1.0);
        g.validate().unwrap();
    }

    #[test]
    fn target_on_static_actor_at_first_frame() {
        let a = vec![[0.3, 0.2, 0.1], [0.5, 0.5, 0.5]];
        let s = seq(vec![frame(1, a.clone(), vec![[0.3, 0.2, 0.1]]), frame(2, a.clone(), vec![[0.3, 0.4, 0.1]])]);
        let g = extract_reward_params(&s, 1.0, 1.0, &[]).unwrap();
        assert_eq!((g.t_min, g.j_min), (1, 0));
        assert_eq!(g.rel_goal_pos[0], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn all_ties_pick_first_frame_and_smallest_ids() {
        let s = seq(vec![
            frame(1, vec![[1.0, 0.0, 0.0]], vec![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
            frame(2, vec![[1.0, 0.0, 0.0]], vec![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        ]);
        let g = extract_reward_params(&s, 1.0, 1.0, &[]).unwrap();
        assert_eq!((g.t_min, g.j_min, g.i_min), (1, 0, 0));
    }
}
