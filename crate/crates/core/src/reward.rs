//! Composite reward `r = r_F + r_I`, with the final-state part
//! `r_F = r_p + r_α + r_c + r_a` and the time-indexed imitation part
//! `r_I = r_pI + r_αI`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Pose, Vec3, ORTHO_TOL};
use crate::mocap::InteractionGoal;

/// The six user-facing reward weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    pub k_p: f64,
    pub k_alpha: f64,
    /// `None` means `N_o / 5` with `N_o` the number of desired sensors.
    pub k_c: Option<f64>,
    pub k_a: f64,
    pub k_pi: f64,
    pub k_alphai: f64,
    /// Penalty per active sensor outside the desired contact profile. Zero
    /// means undesired contacts are ignored.
    pub undesired_contact_penalty: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            k_p: 10.0,
            k_alpha: 0.5,
            k_c: None,
            k_a: 1.0,
            k_pi: 0.0,
            k_alphai: 0.0,
            undesired_contact_penalty: 0.0,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.k_p,
            self.k_alpha,
            self.k_c.unwrap_or(0.0),
            self.k_a,
            self.k_pi,
            self.k_alphai,
            self.undesired_contact_penalty,
        ];
        if all.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::Config("reward weights must be finite and >= 0".into()));
        }
        if self.k_p <= 0.0 {
            return Err(Error::Config("K_p must be > 0".into()));
        }
        Ok(())
    }

    pub fn contact_weight(&self, mask: &[bool]) -> f64 {
        self.k_c.unwrap_or_else(|| mask.iter().filter(|&&m| m).count() as f64 / 5.0)
    }
}

/// Per-feature weights for one interaction goal.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardWeights {
    pub pos: Vec<f64>,
    pub angle: Vec<f64>,
    pub contact: Vec<f64>,
    pub action: Vec<f64>,
    pub k_pi: f64,
    pub k_alphai: f64,
    pub undesired: Vec<f64>,
}

impl RewardWeights {
    pub fn new(cfg: &WeightConfig, goal: &InteractionGoal, n_action: usize) -> Result<Self> {
        cfg.validate()?;
        let k_c = cfg.contact_weight(&goal.contact_mask);
        Ok(RewardWeights {
            pos: goal.pos_weights.clone(),
            angle: goal.angle_weights.clone(),
            contact: goal.contact_mask.iter().map(|&m| if m { k_c } else { 0.0 }).collect(),
            action: vec![cfg.k_a; n_action],
            k_pi: cfg.k_pi,
            k_alphai: cfg.k_alphai,
            undesired: goal.contact_mask.iter().map(|&m| if m { 0.0 } else { cfg.undesired_contact_penalty }).collect(),
        })
    }
}

/// Goals placed in the world for one pose of the reference link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedGoals {
    pub world_goal_pos: Vec<Vec3>,
    /// One entry per t = 1..=t_min.
    pub world_imitation_pos: Vec<Vec<Vec3>>,
    pub goal_angles: Vec<f64>,
    pub imitation_angles: Vec<Vec<f64>>,
}

impl ResolvedGoals {
    pub fn t_min(&self) -> usize {
        self.world_imitation_pos.len()
    }
}

/// `p_g = p_s + R_s Δp` for the final goals and every imitation step.
pub fn resolve_goals(goal: &InteractionGoal, link: &Pose) -> Result<ResolvedGoals> {
    if !link.rot.is_orthonormal(ORTHO_TOL) {
        return Err(Error::Config("reference link rotation is not orthonormal".into()));
    }
    let world = |rel: &Vec<Vec3>| rel.iter().map(|&d| link.transform_point(d)).collect::<Vec<_>>();
    let world_imitation_pos: Vec<Vec<Vec3>> = goal.imitation_rel_pos.iter().map(world).collect();
    let world_goal_pos =
        world_imitation_pos.last().cloned().ok_or_else(|| Error::Config("goal has no imitation entries".into()))?;
    Ok(ResolvedGoals {
        world_goal_pos,
        world_imitation_pos,
        goal_angles: goal.goal_angles.clone(),
        imitation_angles: goal.imitation_angles.clone(),
    })
}

/// `−Σ ω_i ‖g_i − p_i‖`.
pub fn position_reward(feature_pos: &[Vec3], goals: &[Vec3], w: &[f64]) -> f64 {
    debug_assert_eq!(feature_pos.len(), goals.len());
    -feature_pos.iter().zip(goals).zip(w).map(|((p, g), w)| w * geom::dist(*g, *p)).sum::<f64>()
}

/// `−Σ ω_i |g_i − α_i|`.
pub fn angle_reward(angles: &[f64], goal: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(angles.len(), goal.len());
    -angles.iter().zip(goal).zip(w).map(|((a, g), w)| w * (g - a).abs()).sum::<f64>()
}

/// `Σ ω_i 𝟙_i` over active sensors.
pub fn contact_reward(contacts: &[bool], w: &[f64]) -> f64 {
    contacts.iter().zip(w).filter(|(c, _)| **c).map(|(_, w)| *w).sum()
}

/// `−Σ ω_i a_i²`.
pub fn action_penalty(a: &[f64], w: &[f64]) -> f64 {
    -a.iter().zip(w).map(|(a, w)| w * a * a).sum::<f64>()
}

/// `(r_pI, r_αI)` at imitation timestep `t` (1-based); zero past `t_min`.
pub fn imitation_terms(
    feature_pos: &[Vec3],
    angles: &[f64],
    goals: &ResolvedGoals,
    t: usize,
    weights: &RewardWeights,
) -> (f64, f64) {
    if t == 0 || t > goals.t_min() {
        return (0.0, 0.0);
    }
    (
        weights.k_pi * position_reward(feature_pos, &goals.world_imitation_pos[t - 1], &weights.pos),
        weights.k_alphai * angle_reward(angles, &goals.imitation_angles[t - 1], &weights.angle),
    )
}

pub fn imitation_reward(
    feature_pos: &[Vec3],
    angles: &[f64],
    goals: &ResolvedGoals,
    t: usize,
    weights: &RewardWeights,
) -> f64 {
    let (p, a) = imitation_terms(feature_pos, angles, goals, t, weights);
    p + a
}

/// State-dependent reward inputs pulled from the simulator.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardInput {
    pub feature_pos: Vec<Vec3>,
    pub angles: Vec<f64>,
    pub contacts: Vec<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub position: f64,
    pub angle: f64,
    pub contact: f64,
    pub action: f64,
    pub imitation_position: f64,
    pub imitation_angle: f64,
}

impl RewardBreakdown {
    pub const LABELS: [&'static str; 6] = ["r_p", "r_alpha", "r_c", "r_a", "r_pI", "r_alphaI"];

    pub fn terms(&self) -> [f64; 6] {
        [self.position, self.angle, self.contact, self.action, self.imitation_position, self.imitation_angle]
    }

    pub fn final_state(&self) -> f64 {
        self.position + self.angle + self.contact + self.action
    }

    pub fn imitation(&self) -> f64 {
        self.imitation_position + self.imitation_angle
    }

    /// Left-to-right sum of [`Self::terms`]; [`total_reward`] returns exactly this.
    pub fn total(&self) -> f64 {
        self.final_state() + self.imitation_position + self.imitation_angle
    }
}

pub fn total_reward(
    input: &RewardInput,
    action: &[f64],
    t: usize,
    goals: &ResolvedGoals,
    weights: &RewardWeights,
) -> (f64, RewardBreakdown) {
    let mut contact = contact_reward(&input.contacts, &weights.contact);
    if weights.undesired.iter().any(|&u| u > 0.0) {
        contact -= contact_reward(&input.contacts, &weights.undesired);
    }
    let (imitation_position, imitation_angle) = imitation_terms(&input.feature_pos, &input.angles, goals, t, weights);
    let b = RewardBreakdown {
        position: position_reward(&input.feature_pos, &goals.world_goal_pos, &weights.pos),
        angle: angle_reward(&input.angles, &goals.goal_angles, &weights.angle),
        contact,
        action: action_penalty(action, &weights.action),
        imitation_position,
        imitation_angle,
    };
    (b.total(), b)
}
