//! DDPG learner: replay buffer, target networks, Gaussian exploration.

use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{soft_update, AdamState, Gradients, Mlp, OutputActivation, RunningNorm};
use crate::rng::{self, Rng};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Exploration noise scale at the start of training.
    pub sigma: f64,
    /// When set, σ is annealed linearly to this value over the run.
    pub sigma_final: Option<f64>,
    pub hidden: Vec<usize>,
    /// Running mean/variance normalization of observations.
    pub normalize: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.99,
            tau: 0.001,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch_size: 64,
            buffer_capacity: 100_000,
            sigma: 0.1,
            sigma_final: None,
            hidden: vec![256, 256, 256],
            normalize: true,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("agent.gamma must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("agent.tau must be in [0, 1]");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("agent learning rates must be positive");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("agent.batch_size must be in 1..=buffer_capacity");
        }
        if !(self.sigma >= 0.0) || self.sigma_final.is_some_and(|s| !(s >= 0.0)) {
            return bad("agent.sigma must be nonnegative");
        }
        if self.hidden.contains(&0) {
            return bad("agent.hidden sizes must be positive");
        }
        Ok(())
    }

    /// Exploration scale after `progress` ∈ [0, 1] of the run.
    pub fn sigma_at(&self, progress: f64) -> f64 {
        match self.sigma_final {
            Some(end) => self.sigma + (end - self.sigma) * progress.clamp(0.0, 1.0),
            None => self.sigma,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s2: Vec<f64>,
    pub done: bool,
}

impl Transition {
    pub fn is_valid(&self) -> bool {
        self.s.iter().chain(&self.s2).all(|v| v.is_finite())
            && self.r.is_finite()
            && self.a.iter().all(|a| a.is_finite() && a.abs() <= 1.0)
    }
}

/// FIFO ring buffer with uniform sampling.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { capacity: capacity.max(1), items: Vec::new(), next: 0, inserted: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if !t.is_valid() {
            return Err(Error::NonFinite("transition".into()));
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        self.inserted += 1;
        Ok(())
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut Rng) -> Vec<usize> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| rng.random_range(0..self.items.len())).collect()
    }
}

/// A minibatch with normalized observations.
#[derive(Clone, Debug)]
pub struct Batch {
    pub s: Array2<f64>,
    pub a: Array2<f64>,
    pub r: Array1<f64>,
    pub s2: Array2<f64>,
    pub done: Array1<f64>,
}

impl Batch {
    pub fn from_transitions(items: &[&Transition], norm: &RunningNorm) -> Result<Batch> {
        let n = items.len();
        if n == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        let (od, ad) = (items[0].s.len(), items[0].a.len());
        let mut s = Array2::zeros((n, od));
        let mut s2 = Array2::zeros((n, od));
        let mut a = Array2::zeros((n, ad));
        for (k, t) in items.iter().enumerate() {
            if t.s.len() != od || t.s2.len() != od || t.a.len() != ad {
                return Err(Error::Shape("ragged transitions in batch".into()));
            }
            norm.normalize_into(&t.s, s.row_mut(k).as_slice_mut().expect("standard layout"));
            norm.normalize_into(&t.s2, s2.row_mut(k).as_slice_mut().expect("standard layout"));
            a.row_mut(k).assign(&ArrayView2::from_shape((1, ad), &t.a).expect("row").row(0));
        }
        Ok(Batch {
            s,
            a,
            r: items.iter().map(|t| t.r).collect(),
            s2,
            done: items.iter().map(|t| if t.done { 1.0 } else { 0.0 }).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// Critic input: normalized observation followed by the raw action.
pub fn critic_input(s: ArrayView2<f64>, a: ArrayView2<f64>) -> Result<Array2<f64>> {
    ndarray::concatenate(Axis(1), &[s, a]).map_err(|e| Error::Shape(e.to_string()))
}

/// `clip(π(s) + ε, −1, 1)` with `ε ~ N(0, σ²)` per component.
pub fn select_action(actor: &Mlp, norm: &RunningNorm, obs: &[f64], sigma: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    let mut a = actor.predict_one(&norm.normalize(obs))?;
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
        for v in &mut a {
            *v = (*v + noise.sample(rng)).clamp(-1.0, 1.0);
        }
    }
    Ok(a)
}

/// `y = r + γ (1 − done) Q'(s', π'(s'))`.
pub fn compute_targets(batch: &Batch, target_actor: &Mlp, target_critic: &Mlp, gamma: f64) -> Result<Array1<f64>> {
    let a2 = target_actor.predict(batch.s2.view())?;
    let q2 = target_critic.predict(critic_input(batch.s2.view(), a2.view())?.view())?;
    let q2 = q2.column(0);
    Ok(ndarray::Zip::from(&batch.r).and(&batch.done).and(q2).map_collect(|&r, &d, &q| r + gamma * (1.0 - d) * q))
}

/// Mean squared TD error and its parameter gradient.
pub fn critic_loss_grad(critic: &Mlp, batch: &Batch, y: &Array1<f64>) -> Result<(f64, Gradients)> {
    if y.len() != batch.len() {
        return Err(Error::Shape("targets do not match batch".into()));
    }
    let cache = critic.forward(critic_input(batch.s.view(), batch.a.view())?.view())?;
    let n = batch.len() as f64;
    let diff = &cache.output().column(0) - y;
    let loss = diff.dot(&diff) / n;
    let upstream = diff.mapv(|d| 2.0 * d / n).insert_axis(Axis(1));
    let (grads, _) = critic.backward(&cache, upstream.view())?;
    Ok((loss, grads))
}

/// One Adam step on the critic; returns the pre-update loss.
pub fn critic_update(critic: &mut Mlp, opt: &mut AdamState, batch: &Batch, y: &Array1<f64>) -> Result<f64> {
    let (loss, grads) = critic_loss_grad(critic, batch, y)?;
    opt.apply(critic, &grads)?;
    Ok(loss)
}

/// `J = mean Q(s, π(s))` and `∂J/∂θ^π`.
pub fn actor_objective_grad(actor: &Mlp, critic: &Mlp, batch: &Batch) -> Result<(f64, Gradients)> {
    let od = batch.s.ncols();
    let a_cache = actor.forward(batch.s.view())?;
    let c_cache = critic.forward(critic_input(batch.s.view(), a_cache.output().view())?.view())?;
    let n = batch.len() as f64;
    let objective = c_cache.output().sum() / n;
    let upstream = Array2::from_elem((batch.len(), 1), 1.0 / n);
    let (_, d_input) = critic.backward(&c_cache, upstream.view())?;
    let d_action = d_input.slice(s![.., od..]);
    let (grads, _) = actor.backward(&a_cache, d_action)?;
    Ok((objective, grads))
}

/// One Adam ascent step on `J`; the critic is untouched. Returns the pre-update objective.
pub fn actor_update(actor: &mut Mlp, opt: &mut AdamState, critic: &Mlp, batch: &Batch) -> Result<f64> {
    let (objective, mut grads) = actor_objective_grad(actor, critic, batch)?;
    grads.scale(-1.0);
    opt.apply(actor, &grads)?;
    Ok(objective)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepMetrics {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

/// Frozen actor plus normalizer, for rollouts and evaluation workers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub actor: Mlp,
    pub norm: RunningNorm,
}

impl Policy {
    pub fn act(&self, obs: &[f64], sigma: f64, rng: &mut Rng) -> Result<Vec<f64>> {
        select_action(&self.actor, &self.norm, obs, sigma, rng)
    }
}

/// Serializable learner state (everything but the replay buffer).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub config: AgentConfig,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub norm: RunningNorm,
    pub updates: u64,
}

pub struct Agent {
    pub state: AgentState,
    pub buffer: ReplayBuffer,
    replay_rng: Rng,
}

impl Agent {
    pub fn new(config: AgentConfig, obs_dim: usize, act_dim: usize, seed: u64) -> Result<Agent> {
        config.validate()?;
        let mut actor_dims = vec![obs_dim];
        actor_dims.extend(&config.hidden);
        actor_dims.push(act_dim);
        let mut critic_dims = vec![obs_dim + act_dim];
        critic_dims.extend(&config.hidden);
        critic_dims.push(1);
        let actor = Mlp::init(&actor_dims, OutputActivation::Tanh, seed)?;
        let critic = Mlp::init(&critic_dims, OutputActivation::Linear, seed.wrapping_add(1))?;
        let state = AgentState {
            obs_dim,
            act_dim,
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor_opt: AdamState::new(&actor, config.actor_lr),
            critic_opt: AdamState::new(&critic, config.critic_lr),
            norm: RunningNorm::new(obs_dim, config.normalize),
            actor,
            critic,
            updates: 0,
            config,
        };
        Ok(Agent::from_state(state, seed))
    }

    pub fn from_state(state: AgentState, seed: u64) -> Agent {
        Agent {
            buffer: ReplayBuffer::new(state.config.buffer_capacity),
            replay_rng: rng::stream(seed, rng::REPLAY),
            state,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.state.config
    }

    pub fn policy(&self) -> Policy {
        Policy { actor: self.state.actor.clone(), norm: self.state.norm.clone() }
    }

    /// Store an exploration transition and fold `s` into the normalizer.
    pub fn observe(&mut self, t: Transition) -> Result<()> {
        if t.s.len() != self.state.obs_dim || t.a.len() != self.state.act_dim {
            return Err(Error::Shape("transition does not match agent dimensions".into()));
        }
        self.state.norm.update(&t.s)?;
        self.buffer.push(t)
    }

    /// Sample → targets → critic step → actor step → soft target updates.
    /// `None` when the buffer holds fewer than `batch_size` items.
    pub fn train_step(&mut self) -> Result<Option<StepMetrics>> {
        let cfg = &self.state.config;
        if self.buffer.len() < cfg.batch_size {
            return Ok(None);
        }
        let idx = self.buffer.sample_indices(cfg.batch_size, &mut self.replay_rng);
        let items: Vec<&Transition> = idx.iter().map(|&i| self.buffer.get(i)).collect();
        let batch = Batch::from_transitions(&items, &self.state.norm)?;
        let st = &mut self.state;
        let y = compute_targets(&batch, &st.actor_target, &st.critic_target, st.config.gamma)?;
        let critic_loss = critic_update(&mut st.critic, &mut st.critic_opt, &batch, &y)?;
        let actor_objective = actor_update(&mut st.actor, &mut st.actor_opt, &st.critic, &batch)?;
        if !critic_loss.is_finite() || !actor_objective.is_finite() {
            return Err(Error::NonFinite(format!(
                "update {}: critic loss {critic_loss}, actor objective {actor_objective}",
                st.updates
            )));
        }
        soft_update(&mut st.critic_target, &st.critic, st.config.tau)?;
        soft_update(&mut st.actor_target, &st.actor, st.config.tau)?;
        st.updates += 1;
        Ok(Some(StepMetrics { critic_loss, actor_objective }))
    }
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    version: u32,
    #[serde(flatten)]
    body: T,
}

/// Write `value` as versioned JSON; floats round-trip bit-exactly.
pub fn save_versioned<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(&Versioned { version: CHECKPOINT_VERSION, body: value })
        .map_err(|e| Error::Config(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_versioned<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let head: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { line: None, msg: format!("{}: {e}", path.display()) })?;
    match head.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(CHECKPOINT_VERSION) => {}
        Some(v) => {
            return Err(Error::Schema(format!(
                "{}: checkpoint version {v}, expected {CHECKPOINT_VERSION}",
                path.display()
            )))
        }
        None => return Err(Error::Schema(format!("{}: missing version", path.display()))),
    }
    let v: Versioned<T> = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { line: None, msg: format!("{}: {e}", path.display()) })?;
    Ok(v.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tiny_batch() -> Batch {
        Batch {
            s: array![[0.1, -0.2], [0.3, 0.4]],
            a: array![[0.5], [-0.5]],
            r: array![1.0, 2.0],
            s2: array![[0.0, 0.1], [0.2, 0.2]],
            done: array![0.0, 1.0],
        }
    }

    #[test]
    fn targets_arithmetic() {
        // Critic: Q = 2 constant; actor anything.
        let actor = Mlp::init(&[2, 4, 1], OutputActivation::Tanh, 0).unwrap();
        let mut critic = Mlp::init(&[3, 1], OutputActivation::Linear, 0).unwrap();
        critic.layers[0].w.fill(0.0);
        critic.layers[0].b.fill(2.0);
        let mut b = tiny_batch();
        b.r = array![1.0, 1.0];
        let y = compute_targets(&b, &actor, &critic, 0.99).unwrap();
        assert!((y[0] - 2.98).abs() < 1e-12);
        assert_eq!(y[1], 1.0);
        let y0 = compute_targets(&b, &actor, &critic, 0.0).unwrap();
        assert_eq!(y0, b.r);
    }

    #[test]
    fn critic_at_target_is_stationary() {
        let mut critic = Mlp::init(&[3, 5, 1], OutputActivation::Linear, 2).unwrap();
        let b = tiny_batch();
        let q = critic.predict(critic_input(b.s.view(), b.a.view()).unwrap().view()).unwrap();
        let y = q.column(0).to_owned();
        let before = critic.clone();
        let mut opt = AdamState::new(&critic, 1e-3);
        let loss = critic_update(&mut critic, &mut opt, &b, &y).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(critic, before);
    }

    #[test]
    fn single_item_loss() {
        let critic = Mlp::init(&[3, 5, 1], OutputActivation::Linear, 2).unwrap();
        let b = Batch {
            s: array![[0.1, 0.2]],
            a: array![[0.3]],
            r: array![0.0],
            s2: array![[0.0, 0.0]],
            done: array![1.0],
        };
        let q = critic.predict(critic_input(b.s.view(), b.a.view()).unwrap().view()).unwrap()[[0, 0]];
        let (loss, _) = critic_loss_grad(&critic, &b, &array![1.5]).unwrap();
        assert!((loss - (q - 1.5).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn constant_critic_leaves_actor() {
        let mut actor = Mlp::init(&[2, 4, 1], OutputActivation::Tanh, 0).unwrap();
        let mut critic = Mlp::init(&[3, 4, 1], OutputActivation::Linear, 1).unwrap();
        for l in &mut critic.layers {
            l.w.fill(0.0);
        }
        let before = actor.clone();
        let mut opt = AdamState::new(&actor, 1e-3);
        actor_update(&mut actor, &mut opt, &critic, &tiny_batch()).unwrap();
        assert_eq!(actor, before);
    }

    #[test]
    fn action_noise_and_clipping() {
        let actor = Mlp::init(&[2, 4, 3], OutputActivation::Tanh, 0).unwrap();
        let norm = RunningNorm::new(2, false);
        let mut r = rng::stream(0, rng::EXPLORE);
        let det = select_action(&actor, &norm, &[0.2, 0.3], 0.0, &mut r).unwrap();
        assert_eq!(det, actor.predict_one(&[0.2, 0.3]).unwrap());
        let noisy = select_action(&actor, &norm, &[0.2, 0.3], 10.0, &mut r).unwrap();
        assert!(noisy.iter().all(|a| (-1.0..=1.0).contains(a)));
        let again = select_action(&actor, &norm, &[0.2, 0.3], 10.0, &mut rng::stream(0, rng::EXPLORE)).unwrap();
        let first = select_action(&actor, &norm, &[0.2, 0.3], 10.0, &mut rng::stream(0, rng::EXPLORE)).unwrap();
        assert_eq!(again, first);
    }

    #[test]
    fn ring_buffer_overwrites_fifo() {
        let mut b = ReplayBuffer::new(3);
        for k in 0..5 {
            b.push(Transition { s: vec![k as f64], a: vec![0.0], r: 0.0, s2: vec![0.0], done: false }).unwrap();
        }
        assert_eq!(b.len(), 3);
        let firsts: Vec<f64> = (0..3).map(|i| b.get(i).s[0]).collect();
        assert_eq!(firsts, vec![3.0, 4.0, 2.0]);
        assert!(b.push(Transition { s: vec![f64::NAN], a: vec![0.0], r: 0.0, s2: vec![0.0], done: false }).is_err());
        assert!(b.push(Transition { s: vec![0.0], a: vec![1.5], r: 0.0, s2: vec![0.0], done: false }).is_err());
    }

    #[test]
    fn train_step_skips_when_short() {
        let cfg = AgentConfig { batch_size: 4, hidden: vec![8], ..Default::default() };
        let mut agent = Agent::new(cfg, 2, 1, 0).unwrap();
        let before = agent.state.clone();
        assert_eq!(agent.train_step().unwrap(), None);
        assert_eq!(agent.state, before);
    }
}
