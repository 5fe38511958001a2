//! Episode randomization, rollouts, the success rule and the training loop.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::ddpg::{self, Agent, AgentState, Policy, Transition};
use crate::error::{Error, Result};
use crate::geom::{self, Pose, Rot3, Vec3};
use crate::mocap::{self, synth_demo, DemoKind, InteractionGoal, MocapSequence};
use crate::par::Exec;
use crate::reward::{resolve_goals, total_reward, ResolvedGoals, RewardBreakdown, RewardInput, RewardWeights};
use crate::rng::{self, Rng};
use crate::sim::{Action, Scene, SimState};

pub const METRICS_SCHEMA: &str = "#schema=graspforge-metrics/1";
pub const METRIC_COLUMNS: [&str; 10] =
    ["epoch", "env_steps", "critic_loss", "actor_obj", "eval_success_rate", "r_p", "r_alpha", "r_c", "r_a", "r_I"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub target_pos_min: Vec3,
    pub target_pos_max: Vec3,
    /// Training orientation of the target hand base (radians, `Rz(yaw)·Ry(pitch)`).
    pub target_yaw: f64,
    pub target_pitch: f64,
    /// Frames before `t_min` whose target angles pose the target hand;
    /// `None` means `max(1, t_min / 4)`.
    pub pregrasp_offset: Option<usize>,
    pub t_off: usize,
    pub start_noise_std: f64,
    pub horizon: usize,
    pub n_e: usize,
    pub updates_per_round: usize,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            target_pos_min: [0.66, -0.06, 0.0],
            target_pos_max: [0.76, 0.06, 0.0],
            target_yaw: std::f64::consts::PI,
            target_pitch: 0.0,
            pregrasp_offset: None,
            t_off: 5,
            start_noise_std: 0.01,
            horizon: 150,
            n_e: 100,
            updates_per_round: 50,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if (0..3).any(|k| !(self.target_pos_min[k] <= self.target_pos_max[k])) {
            return bad("episode.target_pos_min must be <= target_pos_max on every axis");
        }
        if !(geom::is_finite(self.target_pos_min) && geom::is_finite(self.target_pos_max)) {
            return bad("episode target box must be finite");
        }
        if !(self.start_noise_std >= 0.0) || !self.target_yaw.is_finite() || !self.target_pitch.is_finite() {
            return bad("episode.start_noise_std must be >= 0 and angles finite");
        }
        if self.horizon == 0 || self.n_e == 0 {
            return bad("episode.horizon and episode.n_e must be >= 1");
        }
        Ok(())
    }

    pub fn training_rotation(&self) -> Rot3 {
        Rot3::from_yaw_pitch(self.target_yaw, self.target_pitch)
    }

    pub fn pregrasp_frame(&self, t_min: usize) -> usize {
        let off = self.pregrasp_offset.unwrap_or((t_min / 4).max(1));
        t_min.saturating_sub(off).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    /// The sequence's actor features (fingertips).
    Fingertips,
    /// The palm centre only.
    Palm,
}

/// Where demonstrations come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    /// Synthetic demonstration kind, used when `files` is empty.
    pub kind: DemoKind,
    pub synth_seeds: Vec<u64>,
    /// Mocap files; relative paths resolve against the config file.
    pub files: Vec<PathBuf>,
    /// Desired contact profile; defaults to the kind's profile.
    pub contact_mask: Option<Vec<bool>>,
    pub position_features: FeatureSet,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            kind: DemoKind::Handshake,
            synth_seeds: vec![0, 1, 2],
            files: Vec::new(),
            contact_mask: None,
            position_features: FeatureSet::Fingertips,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase", deny_unknown_fields)]
pub enum SuccessRule {
    /// Some step of the final quarter has at least `theta` of the desired
    /// sensors active and at most `max_spurious` undesired ones (`None`: the
    /// number of undesired sensors).
    Contact {
        theta: f64,
        #[serde(default)]
        max_spurious: Option<usize>,
    },
    /// Every position feature ends within `epsilon` meters of its goal.
    Reach { epsilon: f64 },
}

impl Default for SuccessRule {
    fn default() -> Self {
        SuccessRule::Contact { theta: 0.8, max_spurious: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub total_steps: u64,
    pub steps_per_epoch: u64,
    pub eval_every_epochs: u64,
    pub eval_episodes: usize,
    pub success: SuccessRule,
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            total_steps: 150_000,
            steps_per_epoch: 5000,
            eval_every_epochs: 5,
            eval_episodes: 100,
            success: SuccessRule::default(),
            parallel: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_epoch == 0 || self.eval_every_epochs == 0 {
            return Err(Error::Config("train.steps_per_epoch and eval_every_epochs must be >= 1".into()));
        }
        match self.success {
            SuccessRule::Contact { theta, .. } if !(0.0..=1.0).contains(&theta) => {
                Err(Error::Config("success theta must be in [0, 1]".into()))
            }
            SuccessRule::Reach { epsilon } if !(epsilon > 0.0) => {
                Err(Error::Config("success epsilon must be > 0".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn exec(&self) -> Exec {
        if self.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// A demonstration with its extracted goal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Demo {
    pub seq: MocapSequence,
    pub goal: InteractionGoal,
}

/// Load or synthesize the demonstrations and extract their goals.
pub fn load_demos(cfg: &RunConfig, scene: &Scene) -> Result<Vec<Demo>> {
    let d = &cfg.demos;
    let seqs: Vec<MocapSequence> = if d.files.is_empty() {
        d.synth_seeds.iter().map(|&s| synth_demo(d.kind, scene, s)).collect()
    } else {
        d.files.iter().map(|p| mocap::load_sequence(p)).collect::<Result<_>>()?
    };
    if seqs.is_empty() {
        return Err(Error::Config("no demonstrations configured".into()));
    }
    seqs.into_iter()
        .map(|seq| {
            check_compatible(&seq, scene)?;
            let mask = contact_mask_for(d, scene, &seq)?;
            let mut goal = mocap::extract_reward_params(&seq, cfg.weights.k_p, cfg.weights.k_alpha, &mask)?;
            if d.position_features == FeatureSet::Palm {
                goal.set_position_features(&seq, &[1], cfg.weights.k_p)?;
            }
            if goal.t_min <= cfg.episode.t_off {
                return Err(Error::Config(format!(
                    "{}: t_min {} <= t_off {}",
                    seq.source_id, goal.t_min, cfg.episode.t_off
                )));
            }
            Ok(Demo { seq, goal })
        })
        .collect()
}

/// Desired contact profile for `seq`: the configured mask, else the
/// synthetic kind's profile, else every fingertip sensor.
pub fn contact_mask_for(d: &DemoConfig, scene: &Scene, seq: &MocapSequence) -> Result<Vec<bool>> {
    let synth_kind = seq.source_id.strip_prefix("synth:").and_then(|r| r.split(':').next()?.parse::<DemoKind>().ok());
    let mask = match (&d.contact_mask, synth_kind) {
        (Some(m), _) => m.clone(),
        (None, Some(kind)) => kind.default_contact_mask(scene),
        (None, None) => {
            let tips = scene.config().fingertip_links();
            scene.config().sensors.iter().map(|s| tips.contains(&s.link)).collect()
        }
    };
    if mask.len() != scene.n_sensors() {
        return Err(Error::Config(format!(
            "contact mask has {} entries, scene has {} sensors",
            mask.len(),
            scene.n_sensors()
        )));
    }
    Ok(mask)
}

fn check_compatible(seq: &MocapSequence, scene: &Scene) -> Result<()> {
    let fr = &seq.frames[0];
    if fr.actor_link_pos.len() != scene.n_hand_links()
        || fr.target_link_pos.len() != scene.n_hand_links()
        || seq.n_alpha() != scene.n_alpha()
        || fr.target_angles.len() != scene.n_alpha()
    {
        return Err(Error::Config(format!(
            "{}: sequence does not match the scene's hand ({} links, {} angles)",
            seq.source_id,
            scene.n_hand_links(),
            scene.n_alpha()
        )));
    }
    Ok(())
}

/// Everything needed to start one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSetup {
    pub demo: usize,
    pub t_s: usize,
    pub target_pose: Pose,
    pub target_angles: Vec<f64>,
    pub desired_wrist: Vec3,
    pub q0: Vec<f64>,
    pub goals: ResolvedGoals,
}

/// Draw an episode start. The number of random draws does not depend on
/// `orientation` or on reward weights.
pub fn sample_episode_setup(
    scene: &Scene,
    demos: &[Demo],
    cfg: &EpisodeConfig,
    orientation: &Rot3,
    rng: &mut Rng,
) -> Result<EpisodeSetup> {
    if demos.is_empty() {
        return Err(Error::Config("no demonstrations".into()));
    }
    let demo = rng.random_range(0..demos.len());
    let Demo { seq, goal } = &demos[demo];
    let mut pos = [0.0; 3];
    for k in 0..3 {
        let u: f64 = rng.random();
        pos[k] = cfg.target_pos_min[k] + u * (cfg.target_pos_max[k] - cfg.target_pos_min[k]);
    }
    if goal.t_min <= cfg.t_off {
        return Err(Error::Config(format!("demo {demo}: t_min {} <= t_off {}", goal.t_min, cfg.t_off)));
    }
    let t_s = rng.random_range(1..=goal.t_min - cfg.t_off);
    let mut noise = [0.0; 3];
    for n in &mut noise {
        let z: f64 = StandardNormal.sample(rng);
        *n = cfg.start_noise_std * z;
    }

    let target_angles = seq.frame(cfg.pregrasp_frame(goal.t_min)).target_angles.clone();
    let target_pose = Pose::new(pos, *orientation);
    let links = scene.hand_links(&target_pose, &target_angles);
    let reference = links[goal.j_min];
    let goals = resolve_goals(goal, &reference)?;
    let desired_wrist = geom::add(reference.transform_point(goal.wrist_relative(seq, t_s)?), noise);

    let mut q0 = scene.closest_reachable(desired_wrist);
    q0.extend(&seq.frame(t_s).actor_angles);
    scene.clamp_to_limits(&mut q0);
    Ok(EpisodeSetup { demo, t_s, target_pose, target_angles, desired_wrist, q0, goals })
}

/// Target motion for moving-target evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motion {
    pub speed: f64,
    /// Steps between direction changes.
    pub period_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub action: Vec<f64>,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    pub contacts: Vec<bool>,
    /// Largest feature-to-goal distance after the step.
    pub max_goal_dist: f64,
    pub wrist: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub setup: EpisodeSetup,
    pub steps: Vec<StepRecord>,
    pub transitions: Vec<Transition>,
    /// `(step, direction)` each time the target's direction was resampled.
    pub motion_events: Vec<(usize, Vec3)>,
    pub final_state: SimState,
    pub success: bool,
}

impl EpisodeRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn mean_terms(&self) -> [f64; 6] {
        let mut acc = [0.0; 6];
        for s in &self.steps {
            for (a, t) in acc.iter_mut().zip(s.breakdown.terms()) {
                *a += t;
            }
        }
        let n = self.steps.len().max(1) as f64;
        acc.map(|a| a / n)
    }
}

/// `true` iff the record satisfies `rule` for the desired profile `mask`.
pub fn episode_success(steps: &[StepRecord], mask: &[bool], rule: &SuccessRule) -> bool {
    let Some(last) = steps.last() else {
        return false;
    };
    match *rule {
        SuccessRule::Reach { epsilon } => last.max_goal_dist <= epsilon,
        SuccessRule::Contact { theta, max_spurious } => {
            let desired = mask.iter().filter(|&&m| m).count();
            if desired == 0 {
                return false;
            }
            let allowed = max_spurious.unwrap_or(mask.len() - desired);
            let start = steps.len() - (steps.len() / 4).max(1);
            steps[start..].iter().any(|s| {
                let hit = s.contacts.iter().zip(mask).filter(|(c, m)| **c && **m).count();
                let spurious = s.contacts.iter().zip(mask).filter(|(c, m)| **c && !**m).count();
                hit as f64 / desired as f64 >= theta && spurious <= allowed
            })
        }
    }
}

/// One episode in progress.
pub struct Episode<'a> {
    scene: &'a Scene,
    demo: &'a Demo,
    weights: &'a RewardWeights,
    pub setup: EpisodeSetup,
    pub state: SimState,
    obs: Vec<f64>,
    step: usize,
    horizon: usize,
    goals_follow_target: bool,
}

/// Result of a single environment step.
pub struct StepOutcome {
    pub transition: Transition,
    pub record: StepRecord,
}

impl<'a> Episode<'a> {
    pub fn new(
        scene: &'a Scene,
        demo: &'a Demo,
        weights: &'a RewardWeights,
        setup: EpisodeSetup,
        horizon: usize,
    ) -> Result<Self> {
        let state = scene.reset(setup.target_pose, &setup.target_angles, &setup.q0)?;
        let obs = scene.observe(&state).to_vec();
        Ok(Episode { scene, demo, weights, setup, state, obs, step: 0, horizon, goals_follow_target: false })
    }

    pub fn observation(&self) -> &[f64] {
        &self.obs
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn finished(&self) -> bool {
        self.step >= self.horizon
    }

    pub fn set_target_velocity(&mut self, v: Vec3) {
        self.state.target_velocity = v;
        if v != [0.0; 3] {
            self.goals_follow_target = true;
        }
    }

    pub fn step(&mut self, action: Vec<f64>) -> Result<StepOutcome> {
        let next = self.scene.step(&self.state, &Action(action.clone())).map_err(|e| {
            Error::invariant(None, format!("episode step {} (demo {}): {e}", self.step, self.setup.demo))
        })?;
        if self.goals_follow_target {
            let links = self.scene.target_links(&next);
            self.setup.goals = resolve_goals(&self.demo.goal, &links[self.demo.goal.j_min])?;
        }
        let hand = self.scene.agent_hand_links(&next.q);
        let contacts = self.scene.contact_sensors(&hand, &self.scene.target_links(&next));
        let feature_pos: Vec<Vec3> = self.demo.goal.feature_ids.iter().map(|&i| hand[i].pos).collect();
        let max_goal_dist = feature_pos
            .iter()
            .zip(&self.setup.goals.world_goal_pos)
            .map(|(p, g)| geom::dist(*p, *g))
            .fold(0.0, f64::max);
        let input =
            RewardInput { feature_pos, angles: next.q[self.scene.arm_dof()..].to_vec(), contacts: contacts.clone() };
        let t = self.setup.t_s + self.step + 1;
        let (reward, breakdown) = total_reward(&input, &action, t, &self.setup.goals, self.weights);
        let next_obs = self.scene.observe(&next).to_vec();
        self.step += 1;
        let transition = Transition {
            s: std::mem::replace(&mut self.obs, next_obs.clone()),
            a: action.clone(),
            r: reward,
            s2: next_obs,
            done: self.step == self.horizon,
        };
        self.state = next;
        Ok(StepOutcome {
            transition,
            record: StepRecord { action, reward, breakdown, contacts, max_goal_dist, wrist: hand[0].pos },
        })
    }
}

/// Shared, immutable pieces of a training/evaluation run.
pub struct Task {
    pub scene: Scene,
    pub demos: Vec<Demo>,
    pub weights: Vec<RewardWeights>,
    pub cfg: RunConfig,
}

impl Task {
    pub fn new(cfg: &RunConfig) -> Result<Task> {
        cfg.validate()?;
        let scene = Scene::new(&cfg.scene)?;
        let demos = load_demos(cfg, &scene)?;
        Task::with_demos(cfg, scene, demos)
    }

    pub fn with_demos(cfg: &RunConfig, scene: Scene, demos: Vec<Demo>) -> Result<Task> {
        let weights =
            demos.iter().map(|d| RewardWeights::new(&cfg.weights, &d.goal, scene.n_action())).collect::<Result<_>>()?;
        Ok(Task { scene, demos, weights, cfg: cfg.clone() })
    }

    pub fn mask(&self, demo: usize) -> &[bool] {
        &self.demos[demo].goal.contact_mask
    }

    pub fn episode(&self, setup: EpisodeSetup) -> Result<Episode<'_>> {
        let d = setup.demo;
        Episode::new(&self.scene, &self.demos[d], &self.weights[d], setup, self.cfg.episode.horizon)
    }

    pub fn sample_setup(&self, orientation: &Rot3, rng: &mut Rng) -> Result<EpisodeSetup> {
        sample_episode_setup(&self.scene, &self.demos, &self.cfg.episode, orientation, rng)
    }

    /// Roll out `policy` for a full horizon. `sigma = 0` is the greedy policy.
    pub fn run_episode(
        &self,
        setup: EpisodeSetup,
        policy: &Policy,
        sigma: f64,
        explore_rng: &mut Rng,
        motion: Option<(Motion, &mut Rng)>,
    ) -> Result<EpisodeRecord> {
        let mut ep = self.episode(setup)?;
        let mut steps = Vec::with_capacity(self.cfg.episode.horizon);
        let mut transitions = Vec::new();
        let mut motion_events = Vec::new();
        let mut motion = motion;
        while !ep.finished() {
            if let Some((m, r)) = motion.as_mut() {
                if ep.steps_taken() % m.period_steps.max(1) == 0 {
                    let dir = random_direction(r);
                    motion_events.push((ep.steps_taken(), dir));
                    ep.set_target_velocity(geom::scale(dir, m.speed));
                }
            }
            let a = policy.act(ep.observation(), sigma, explore_rng)?;
            let out = ep.step(a)?;
            if sigma > 0.0 {
                transitions.push(out.transition);
            }
            steps.push(out.record);
        }
        let mask = &self.demos[ep.setup.demo].goal.contact_mask;
        let success = episode_success(&steps, mask, &self.cfg.train.success);
        Ok(EpisodeRecord { setup: ep.setup, steps, transitions, motion_events, final_state: ep.state, success })
    }

    /// Greedy evaluation on `n` episodes whose setups come from the eval
    /// stream of `seed`; results are independent of `exec`.
    pub fn evaluate(
        &self,
        policy: &Policy,
        seed: u64,
        n: usize,
        orientation: &Rot3,
        motion: Option<Motion>,
        exec: Exec,
    ) -> Result<EvalSummary> {
        let runs = exec.map_range(n, |k| -> Result<EpisodeRecord> {
            let mut setup_rng = rng::item_stream(seed, rng::EVAL, k as u64);
            let setup = self.sample_setup(orientation, &mut setup_rng)?;
            let mut unused = rng::item_stream(seed, rng::EXPLORE, k as u64);
            let mut motion_rng = rng::item_stream(seed, rng::MOTION, k as u64);
            self.run_episode(setup, policy, 0.0, &mut unused, motion.map(|m| (m, &mut motion_rng)))
        });
        let records = runs.into_iter().collect::<Result<Vec<_>>>()?;
        let mut summary = EvalSummary::from_records(&records);
        let devs = records.iter().map(|r| self.wrist_deviation(r)).collect::<Result<Vec<_>>>()?;
        summary.wrist_deviation = devs.iter().sum::<f64>() / devs.len().max(1) as f64;
        Ok(summary)
    }

    /// Mean distance between the agent wrist and the demonstration wrist path
    /// (re-expressed against the episode's target) over steps up to `t_min`.
    pub fn wrist_deviation(&self, record: &EpisodeRecord) -> Result<f64> {
        let Demo { seq, goal } = &self.demos[record.setup.demo];
        let links = self.scene.hand_links(&record.setup.target_pose, &record.setup.target_angles);
        let reference = links[goal.j_min];
        let mut acc = 0.0;
        let mut n = 0usize;
        for (k, s) in record.steps.iter().enumerate() {
            let t = record.setup.t_s + k + 1;
            if t > goal.t_min {
                break;
            }
            let demo_wrist = reference.transform_point(goal.wrist_relative(seq, t)?);
            acc += geom::dist(s.wrist, demo_wrist);
            n += 1;
        }
        Ok(if n == 0 { 0.0 } else { acc / n as f64 })
    }
}

/// Uniform direction on the unit sphere.
pub fn random_direction(rng: &mut Rng) -> Vec3 {
    loop {
        let v: Vec3 = [0; 3].map(|_| StandardNormal.sample(rng));
        let n = geom::norm(v);
        if n > 1e-9 {
            return geom::scale(v, 1.0 / n);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub successes: Vec<bool>,
    pub mean_terms: [f64; 6],
    pub final_states: Vec<SimState>,
    pub motion_events: Vec<Vec<(usize, Vec3)>>,
    /// Mean of [`Task::wrist_deviation`] over the episodes.
    pub wrist_deviation: f64,
}

impl EvalSummary {
    fn from_records(records: &[EpisodeRecord]) -> Self {
        let mut mean_terms = [0.0; 6];
        for r in records {
            for (a, t) in mean_terms.iter_mut().zip(r.mean_terms()) {
                *a += t;
            }
        }
        let n = records.len().max(1) as f64;
        EvalSummary {
            successes: records.iter().map(|r| r.success).collect(),
            mean_terms: mean_terms.map(|a| a / n),
            final_states: records.iter().map(|r| r.final_state.clone()).collect(),
            motion_events: records.iter().map(|r| r.motion_events.clone()).collect(),
            wrist_deviation: 0.0,
        }
    }

    pub fn success_rate(&self) -> f64 {
        if self.successes.is_empty() {
            return 0.0;
        }
        self.successes.iter().filter(|&&s| s).count() as f64 / self.successes.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub epoch: u64,
    pub env_steps: u64,
    pub critic_loss: f64,
    pub actor_obj: f64,
    pub eval_success_rate: f64,
    /// r_p, r_α, r_c, r_a, r_I (per-step means over evaluation episodes).
    pub terms: [f64; 5],
}

impl MetricRow {
    pub fn values(&self) -> [f64; 8] {
        let t = self.terms;
        [self.critic_loss, self.actor_obj, self.eval_success_rate, t[0], t[1], t[2], t[3], t[4]]
    }
}

pub fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = format!("{METRICS_SCHEMA}\n{}\n", METRIC_COLUMNS.join(","));
    for r in rows {
        let _ = write!(out, "{},{}", r.epoch, r.env_steps);
        for v in r.values() {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}

/// A trained (or in-training) agent with everything needed to evaluate it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub run: RunConfig,
    pub seed: u64,
    pub epoch: u64,
    pub env_steps: u64,
    pub final_eval_success: Option<f64>,
    pub demos: Vec<Demo>,
    pub agent: AgentState,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        ddpg::save_versioned(path, self)
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        ddpg::load_versioned(path)
    }

    pub fn policy(&self) -> Policy {
        Policy { actor: self.agent.actor.clone(), norm: self.agent.norm.clone() }
    }

    pub fn task(&self) -> Result<Task> {
        Task::with_demos(&self.run, Scene::new(&self.run.scene)?, self.demos.clone())
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub metrics: Vec<MetricRow>,
    pub checkpoint: Checkpoint,
}

/// Diagnostic written when training hits a non-finite value.
#[derive(Serialize)]
struct Diagnostic<'a> {
    error: String,
    env_steps: u64,
    updates: u64,
    last_rows: Vec<[f64; 8]>,
    config: &'a RunConfig,
}

/// Alternate `n_e` environment steps with `updates_per_round` DDPG updates,
/// evaluating greedily every `eval_every_epochs` epochs and at the end.
/// Loss columns average the updates since the previous row (0 if none ran).
/// When `out` is set, a non-finite failure writes `diagnostic.json` there.
pub fn training_loop(cfg: &RunConfig, seed: u64, out: Option<&Path>) -> Result<TrainOutcome> {
    let task = Task::new(cfg)?;
    let scene = &task.scene;
    let mut agent = Agent::new(cfg.agent.clone(), scene.obs_dim(), scene.n_action(), seed)?;
    let tc = &cfg.train;
    let ec = &cfg.episode;
    let rot = ec.training_rotation();
    let exec = tc.exec();
    let mut setup_rng = rng::stream(seed, rng::SETUP);
    let mut explore_rng = rng::stream(seed, rng::EXPLORE);

    let mut rows = Vec::new();
    let mut env_steps = 0u64;
    let (mut loss_acc, mut obj_acc, mut n_upd) = (0.0, 0.0, 0u64);
    let mut last_eval = None;

    let mut evaluate = |agent: &Agent, env_steps: u64, loss: f64, obj: f64| -> Result<MetricRow> {
        let ev = task.evaluate(&agent.policy(), seed, tc.eval_episodes, &rot, None, exec)?;
        let m = ev.mean_terms;
        let row = MetricRow {
            epoch: env_steps / tc.steps_per_epoch,
            env_steps,
            critic_loss: loss,
            actor_obj: obj,
            eval_success_rate: ev.success_rate(),
            terms: [m[0], m[1], m[2], m[3], m[4] + m[5]],
        };
        log::info!(
            "epoch {} steps {} success {:.3} critic {:.4} actor {:.4}",
            row.epoch,
            env_steps,
            row.eval_success_rate,
            loss,
            obj
        );
        last_eval = Some(row.eval_success_rate);
        Ok(row)
    };

    let result: Result<()> = (|| {
        if tc.total_steps == 0 {
            return Ok(());
        }
        let eval_stride = tc.steps_per_epoch * tc.eval_every_epochs;
        while env_steps < tc.total_steps {
            let setup = task.sample_setup(&rot, &mut setup_rng)?;
            let mut ep = task.episode(setup)?;
            while !ep.finished() && env_steps < tc.total_steps {
                let sigma = cfg.agent.sigma_at(env_steps as f64 / tc.total_steps as f64);
                let a = ddpg::select_action(
                    &agent.state.actor,
                    &agent.state.norm,
                    ep.observation(),
                    sigma,
                    &mut explore_rng,
                )?;
                let outcome = ep.step(a)?;
                agent.observe(outcome.transition)?;
                env_steps += 1;
                if env_steps.is_multiple_of(ec.n_e as u64) {
                    for _ in 0..ec.updates_per_round {
                        if let Some(m) = agent.train_step()? {
                            loss_acc += m.critic_loss;
                            obj_acc += m.actor_objective;
                            n_upd += 1;
                        }
                    }
                }
                if env_steps.is_multiple_of(eval_stride) || env_steps == tc.total_steps {
                    let d = n_upd.max(1) as f64;
                    rows.push(evaluate(&agent, env_steps, loss_acc / d, obj_acc / d)?);
                    (loss_acc, obj_acc, n_upd) = (0.0, 0.0, 0);
                }
            }
        }
        Ok(())
    })();

    if let Err(e) = result {
        if e.is_numerical() {
            if let Some(dir) = out {
                let diag = Diagnostic {
                    error: e.to_string(),
                    env_steps,
                    updates: agent.state.updates,
                    last_rows: rows.iter().rev().take(5).map(MetricRow::values).collect(),
                    config: cfg,
                };
                let path = dir.join("diagnostic.json");
                let text = serde_json::to_string_pretty(&diag).unwrap_or_default();
                std::fs::write(&path, text).map_err(|io| Error::io(&path, io))?;
            }
        }
        return Err(e);
    }

    let checkpoint = Checkpoint {
        run: cfg.clone(),
        seed,
        epoch: env_steps / tc.steps_per_epoch,
        env_steps,
        final_eval_success: last_eval,
        demos: task.demos.clone(),
        agent: agent.state.clone(),
    };
    Ok(TrainOutcome { metrics: rows, checkpoint })
}
