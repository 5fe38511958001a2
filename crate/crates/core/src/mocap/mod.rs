//! Demonstration data: mocap sequences, the text file format, synthetic
//! demonstrations, and extraction of reward parameters from a sequence.

mod extract;
mod format;
mod synth;

pub use extract::{
    compute_distances, extract_reward_params, position_weights, relative_position, DistanceTensor, InteractionGoal,
    D_FLOOR,
};
pub use format::{load_sequence, parse_sequence, write_sequence};
pub use synth::{synth_contact_frame, synth_demo, DemoKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Rot3, Vec3, ORTHO_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MocapFrame {
    /// 1-based timestep index.
    pub t: usize,
    pub actor_link_pos: Vec<Vec3>,
    pub target_link_pos: Vec<Vec3>,
    pub target_link_rot: Vec<Rot3>,
    pub actor_angles: Vec<f64>,
    pub target_angles: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MocapSequence {
    pub frames: Vec<MocapFrame>,
    /// Seconds per frame.
    pub dt: f64,
    /// Actor links used as position features (fingertips).
    pub actor_feature_ids: Vec<usize>,
    /// Target links eligible as the goal reference frame (fingertips + palm).
    pub target_feature_ids: Vec<usize>,
    /// Actor link tracked as the wrist, used for start-state placement.
    pub actor_wrist_id: usize,
    pub source_id: String,
}

impl MocapSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame with 1-based index `t`.
    pub fn frame(&self, t: usize) -> &MocapFrame {
        &self.frames[t - self.frames[0].t]
    }

    pub fn n_alpha(&self) -> usize {
        self.frames.first().map_or(0, |f| f.actor_angles.len())
    }

    /// Check every documented invariant; errors name the offending frame.
    pub fn validate(&self) -> Result<()> {
        if self.frames.len() < 2 {
            return Err(Error::invariant(None, "sequence needs at least 2 frames"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invariant(None, "dt must be > 0"));
        }
        if self.actor_feature_ids.is_empty() || self.target_feature_ids.is_empty() {
            return Err(Error::invariant(None, "feature id lists must be nonempty"));
        }
        let first = &self.frames[0];
        if first.t != 1 {
            return Err(Error::invariant(Some(first.t), "timestep indices must start at 1"));
        }
        let (n_actor, n_target) = (first.actor_link_pos.len(), first.target_link_pos.len());
        let (n_aa, n_ta) = (first.actor_angles.len(), first.target_angles.len());
        for (k, fr) in self.frames.iter().enumerate() {
            let t = fr.t;
            if k > 0 && t != self.frames[k - 1].t + 1 {
                return Err(Error::invariant(
                    Some(t),
                    format!("timesteps not contiguous: {} followed by {t}", self.frames[k - 1].t),
                ));
            }
            if fr.actor_link_pos.len() != n_actor
                || fr.target_link_pos.len() != n_target
                || fr.target_link_rot.len() != n_target
                || fr.actor_angles.len() != n_aa
                || fr.target_angles.len() != n_ta
            {
                return Err(Error::invariant(Some(t), "link or angle count differs from frame 1"));
            }
            if !fr.actor_link_pos.iter().chain(&fr.target_link_pos).all(|p| geom::is_finite(*p)) {
                return Err(Error::invariant(Some(t), "non-finite position"));
            }
            if !fr.actor_angles.iter().chain(&fr.target_angles).all(|a| a.is_finite()) {
                return Err(Error::invariant(Some(t), "non-finite angle"));
            }
            if let Some(j) = fr.target_link_rot.iter().position(|r| !r.is_orthonormal(ORTHO_TOL)) {
                return Err(Error::invariant(Some(t), format!("rotation of target link {j} is not orthonormal")));
            }
        }
        let bad_id = |ids: &[usize], n: usize| ids.iter().any(|&i| i >= n);
        if bad_id(&self.actor_feature_ids, n_actor) || self.actor_wrist_id >= n_actor {
            return Err(Error::invariant(None, "actor feature id out of range"));
        }
        if bad_id(&self.target_feature_ids, n_target) {
            return Err(Error::invariant(None, "target feature id out of range"));
        }
        Ok(())
    }
}
