//! Actor-critic training over distribution states.
//!
//! Per step: act with exploration noise, store the transition, sample a
//! minibatch, regress the critic on targets built *only* from the target
//! networks, ascend the actor along the critic's action gradient, then move
//! both targets by the soft-update rate. The replay buffer is re-initialized
//! at every episode by default; a persistent buffer (the common variant) is
//! available behind a flag.

use crate::dp::{evaluate_policy, Policy, PolicyEvaluation};
use crate::envs::{env_step, CommonNoiseSample, Environment, TransitionResult};
use crate::error::{Error, Result};
use crate::neural::{
    adam_update, mlp_backward_into, mlp_forward, mlp_output_and_input_gradient, soft_update,
    AdamState, Gradients, MlpParams, OutputActivation,
};
use crate::simplex::{ActionProfile, DistributionVector};
use rand::Rng;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

/// One replay tuple; the stored action is the raw actor output plus noise,
/// before clamping to the action box.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Ring buffer over transitions with uniform with-replacement sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    next_slot: usize,
    state_dim: usize,
    action_dim: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Self {
        Self {
            capacity,
            storage: Vec::new(),
            next_slot: 0,
            state_dim,
            action_dim,
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                expected: self.state_dim,
                got: t.state.len().max(t.next_state.len()),
            });
        }
        if t.action.len() != self.action_dim {
            return Err(Error::DimensionMismatch {
                expected: self.action_dim,
                got: t.action.len(),
            });
        }
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.next_slot] = t; // overwrite the oldest
            self.next_slot = (self.next_slot + 1) % self.capacity;
        }
        Ok(())
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.storage[index]
    }

    /// `n` uniform draws with replacement.
    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        if self.storage.len() < n {
            return Err(Error::BufferTooSmall {
                size: self.storage.len(),
                requested: n,
            });
        }
        Ok((0..n)
            .map(|_| rng.gen_range(0..self.storage.len()))
            .collect())
    }
}

/// How the initial distribution of each episode is drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialStateSampler {
    /// Uniform on the simplex (normalized exponentials).
    Dirichlet,
    /// Periodic Gaussian bump with mean uniform on the torus and standard
    /// deviation uniform in `[std_lo, std_hi]` (density states).
    GaussianDensity {
        std_lo: f64,
        std_hi: f64,
    },
    Fixed(DistributionVector),
}

impl InitialStateSampler {
    pub fn sample(&self, env: &dyn Environment, rng: &mut impl Rng) -> Result<DistributionVector> {
        let n = env.state_dim();
        match self {
            InitialStateSampler::Dirichlet => {
                let raw: Vec<f64> = (0..n)
                    .map(|_| (-(1.0 - rng.gen::<f64>()).ln()).max(1e-300))
                    .collect();
                DistributionVector::from_weights(raw, false)
            }
            InitialStateSampler::GaussianDensity { std_lo, std_hi } => {
                if !(0.0 < *std_lo && std_lo <= std_hi) {
                    return Err(Error::InvalidParameter(format!(
                        "bad std range [{std_lo}, {std_hi}]"
                    )));
                }
                let mean: f64 = rng.gen::<f64>();
                let std = std_lo + (std_hi - std_lo) * rng.gen::<f64>();
                let h = 1.0 / n as f64;
                let raw: Vec<f64> = (0..n)
                    .map(|i| {
                        let x = (i as f64 + 0.5) * h;
                        let mut d = (x - mean).abs();
                        if d > 0.5 {
                            d = 1.0 - d;
                        }
                        (-d * d / (2.0 * std * std)).exp()
                    })
                    .collect();
                DistributionVector::density(raw, h)
            }
            InitialStateSampler::Fixed(mu) => {
                if mu.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: mu.dim(),
                    });
                }
                Ok(mu.clone())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DdpgConfig {
    pub episodes: usize,
    pub episode_length: usize,
    pub minibatch: usize,
    pub tau: f64,
    pub gamma: f64,
    /// Standard deviation of the Gaussian exploration noise added to each
    /// action coordinate (variance 0.02 by default).
    pub action_noise_std: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub buffer_capacity: usize,
    pub buffer_reset_per_episode: bool,
    pub hidden_width: usize,
    /// Actions are squashed into [action_low, action_high] per coordinate.
    pub action_low: f64,
    pub action_high: f64,
    pub initial_state: InitialStateSampler,
}

impl DdpgConfig {
    pub fn defaults_for(env: &dyn Environment, initial_state: InitialStateSampler) -> Self {
        let (low, high) = match env.action_kind() {
            crate::envs::ActionKind::Finite { .. } => (0.0, 1.0),
            crate::envs::ActionKind::Continuous { .. } => (-7.0, 7.0),
        };
        Self {
            episodes: 3000,
            episode_length: 50,
            minibatch: 16,
            tau: 0.01,
            gamma: 0.9,
            action_noise_std: 0.02f64.sqrt(),
            actor_lr: 1e-4,
            critic_lr: 1e-4,
            buffer_capacity: 100_000,
            buffer_reset_per_episode: true,
            hidden_width: 64,
            action_low: low,
            action_high: high,
            initial_state,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        if self.tau <= 0.0 || self.tau > 1.0 || self.tau.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "tau must lie in (0, 1], got {}",
                self.tau
            )));
        }
        if self.minibatch == 0 || self.minibatch > self.buffer_capacity {
            return Err(Error::InvalidParameter(
                "need 0 < minibatch <= buffer_capacity".into(),
            ));
        }
        if self.episodes == 0 || self.episode_length == 0 {
            return Err(Error::InvalidParameter(
                "episodes and episode_length must be >= 1".into(),
            ));
        }
        if self.action_low >= self.action_high
            || self.action_low.is_nan()
            || self.action_high.is_nan()
        {
            return Err(Error::InvalidParameter(format!(
                "bad action box [{}, {}]",
                self.action_low, self.action_high
            )));
        }
        if self.actor_lr <= 0.0 || self.critic_lr <= 0.0 || self.action_noise_std < 0.0 {
            return Err(Error::InvalidParameter(
                "learning rates must be positive and noise std nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Live and target networks.
#[derive(Debug, Clone)]
pub struct Networks {
    pub actor: MlpParams,
    pub critic: MlpParams,
    pub actor_target: MlpParams,
    pub critic_target: MlpParams,
}

impl Networks {
    /// Random initialization; targets start as copies of the live networks.
    pub fn init(state_dim: usize, config: &DdpgConfig, rng: &mut impl Rng) -> Result<Self> {
        let actor = MlpParams::feedforward(
            state_dim,
            config.hidden_width,
            state_dim,
            OutputActivation::TanhBox {
                lo: config.action_low,
                hi: config.action_high,
            },
            rng,
        )?;
        let critic = MlpParams::feedforward(
            2 * state_dim,
            config.hidden_width,
            1,
            OutputActivation::Identity,
            rng,
        )?;
        Ok(Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
        })
    }
}

fn concat(state: &[f64], action: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(state.len() + action.len());
    v.extend_from_slice(state);
    v.extend_from_slice(action);
    v
}

/// Bootstrap targets `y_i = r_i + gamma * Q'(s'_i, pi'(s'_i))`, evaluated on
/// the target networks only.
pub fn td_targets(
    critic_target: &MlpParams,
    actor_target: &MlpParams,
    buffer: &ReplayBuffer,
    batch: &[usize],
    gamma: f64,
) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|&i| {
            let t = buffer.get(i);
            let next_action = mlp_forward(actor_target, &t.next_state)?;
            let q_next = mlp_forward(critic_target, &concat(&t.next_state, &next_action))?[0];
            Ok(t.reward + gamma * q_next)
        })
        .collect()
}

/// One Adam step on the critic's mean squared error against `targets`.
/// Returns the loss before the step.
pub fn critic_update(
    critic: &mut MlpParams,
    opt: &mut AdamState,
    buffer: &ReplayBuffer,
    batch: &[usize],
    targets: &[f64],
) -> Result<f64> {
    let n = batch.len() as f64;
    let mut grads = Gradients::zeros_like(critic);
    let mut loss = 0.0;
    for (&i, &y) in batch.iter().zip(targets) {
        let t = buffer.get(i);
        let input = concat(&t.state, &t.action);
        let q = mlp_forward(critic, &input)?[0];
        let err = q - y;
        loss += err * err / n;
        mlp_backward_into(critic, &input, &[2.0 * err / n], &mut grads)?;
    }
    adam_update(critic, &grads, opt)?;
    Ok(loss)
}

/// One Adam ascent step on the actor along the critic's action gradient.
/// Returns the objective `(1/N) sum_i Q(s_i, pi(s_i))` before the step.
pub fn actor_update(
    actor: &mut MlpParams,
    critic: &MlpParams,
    opt: &mut AdamState,
    buffer: &ReplayBuffer,
    batch: &[usize],
) -> Result<f64> {
    let n = batch.len() as f64;
    let state_dim = buffer.state_dim;
    let mut grads = Gradients::zeros_like(actor);
    let mut objective = 0.0;
    for &i in batch {
        let t = buffer.get(i);
        let action = mlp_forward(actor, &t.state)?;
        let input = concat(&t.state, &action);
        let (q, input_grad) = mlp_output_and_input_gradient(critic, &input, &[1.0 / n])?;
        objective += q[0] / n;
        // ascent on Q: descend the negated action gradient through the actor
        let upstream: Vec<f64> = input_grad[state_dim..].iter().map(|g| -g).collect();
        mlp_backward_into(actor, &t.state, &upstream, &mut grads)?;
    }
    adam_update(actor, &grads, opt)?;
    Ok(objective)
}

/// One full learning step from a sampled batch: critic regression, actor
/// ascent, soft target updates. Returns (critic loss, actor objective).
pub fn update_from_batch(
    nets: &mut Networks,
    actor_opt: &mut AdamState,
    critic_opt: &mut AdamState,
    buffer: &ReplayBuffer,
    batch: &[usize],
    gamma: f64,
    tau: f64,
) -> Result<(f64, f64)> {
    let targets = td_targets(
        &nets.critic_target,
        &nets.actor_target,
        buffer,
        batch,
        gamma,
    )?;
    let loss = critic_update(&mut nets.critic, critic_opt, buffer, batch, &targets)?;
    let objective = actor_update(&mut nets.actor, &nets.critic, actor_opt, buffer, batch)?;
    soft_update(&mut nets.critic_target, &nets.critic, tau)?;
    soft_update(&mut nets.actor_target, &nets.actor, tau)?;
    Ok((loss, objective))
}

/// Per-episode training record.
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Mean per-step reward collected during the episode.
    pub mean_return: f64,
    /// Mean critic loss over the episode's learning steps.
    pub critic_loss: f64,
    /// Mean actor objective over the episode's learning steps.
    pub actor_objective: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct DdpgArtifacts {
    pub actor: MlpParams,
    pub critic: MlpParams,
    pub log: Vec<EpisodeRecord>,
}

/// Run the full training loop. With `checkpoint_hook` set, the trainer calls
/// it after the episodes listed (1-based) with the current actor.
pub fn train(
    env: &dyn Environment,
    config: &DdpgConfig,
    rng: &mut impl Rng,
) -> Result<DdpgArtifacts> {
    train_with_hook(env, config, rng, &[], |_, _| Ok(()))
}

pub fn train_with_hook(
    env: &dyn Environment,
    config: &DdpgConfig,
    rng: &mut impl Rng,
    checkpoint_episodes: &[usize],
    mut checkpoint_hook: impl FnMut(usize, &MlpParams) -> Result<()>,
) -> Result<DdpgArtifacts> {
    config.validate()?;
    let n = env.state_dim();
    let mut nets = Networks::init(n, config, rng)?;
    let mut actor_opt = AdamState::new(&nets.actor, config.actor_lr);
    let mut critic_opt = AdamState::new(&nets.critic, config.critic_lr);
    let mut buffer = ReplayBuffer::new(config.buffer_capacity, n, n);
    let mut log = Vec::with_capacity(config.episodes);

    for episode in 0..config.episodes {
        let started = Instant::now();
        if config.buffer_reset_per_episode {
            buffer = ReplayBuffer::new(config.buffer_capacity, n, n);
        }
        let mut state = config.initial_state.sample(env, rng)?;
        let mut reward_sum = 0.0;
        let mut loss_sum = 0.0;
        let mut objective_sum = 0.0;
        let mut updates = 0usize;
        for step in 0..config.episode_length {
            let mut action = mlp_forward(&nets.actor, state.weights())?;
            for a in &mut action {
                let z: f64 = StandardNormal.sample(rng);
                *a += config.action_noise_std * z;
            }
            let clamped: Vec<f64> = action
                .iter()
                .map(|a| a.clamp(config.action_low, config.action_high))
                .collect();
            let TransitionResult { next_state, reward } =
                env_step(env, &state, &ActionProfile::Continuous(clamped), rng)?;
            reward_sum += reward;
            buffer.push(Transition {
                state: state.weights().to_vec(),
                action,
                reward,
                next_state: next_state.weights().to_vec(),
            })?;
            state = next_state;
            if buffer.len() >= config.minibatch {
                let batch = buffer.sample(config.minibatch, rng)?;
                let (loss, objective) = update_from_batch(
                    &mut nets,
                    &mut actor_opt,
                    &mut critic_opt,
                    &buffer,
                    &batch,
                    config.gamma,
                    config.tau,
                )?;
                if !loss.is_finite() || !objective.is_finite() {
                    return Err(Error::NonFiniteLoss { episode, step });
                }
                loss_sum += loss;
                objective_sum += objective;
                updates += 1;
            }
        }
        let denom = updates.max(1) as f64;
        log.push(EpisodeRecord {
            episode,
            mean_return: reward_sum / config.episode_length as f64,
            critic_loss: loss_sum / denom,
            actor_objective: objective_sum / denom,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        if checkpoint_episodes.contains(&(episode + 1)) {
            checkpoint_hook(episode + 1, &nets.actor)?;
        }
    }
    Ok(DdpgArtifacts {
        actor: nets.actor,
        critic: nets.critic,
        log,
    })
}

/// The deterministic feedback policy induced by an actor checkpoint.
pub struct ActorPolicy<'a> {
    pub actor: &'a MlpParams,
    pub action_low: f64,
    pub action_high: f64,
}

impl Policy for ActorPolicy<'_> {
    fn action(&self, state: &DistributionVector) -> Result<ActionProfile> {
        let raw = mlp_forward(self.actor, state.weights())?;
        Ok(ActionProfile::Continuous(
            raw.iter()
                .map(|a| a.clamp(self.action_low, self.action_high))
                .collect(),
        ))
    }
}

/// Noise-free discounted rollout of the actor's feedback policy.
pub fn evaluate_actor(
    env: &dyn Environment,
    actor: &MlpParams,
    action_low: f64,
    action_high: f64,
    mu0: &DistributionVector,
    gamma: f64,
    horizon: usize,
) -> Result<PolicyEvaluation> {
    struct NoiseFree<'a>(&'a dyn Environment);
    impl Environment for NoiseFree<'_> {
        fn state_dim(&self) -> usize {
            self.0.state_dim()
        }
        fn action_kind(&self) -> crate::envs::ActionKind {
            self.0.action_kind()
        }
        fn step(
            &self,
            s: &DistributionVector,
            a: &ActionProfile,
            e: &CommonNoiseSample,
        ) -> Result<TransitionResult> {
            self.0.step(s, a, e)
        }
        fn neutral_noise(&self) -> CommonNoiseSample {
            self.0.neutral_noise()
        }
        fn sample_noise(&self, _rng: &mut dyn RngCore) -> CommonNoiseSample {
            self.0.neutral_noise()
        }
        fn noise_enabled(&self) -> bool {
            false
        }
        fn reward_bound(&self) -> Option<f64> {
            self.0.reward_bound()
        }
    }
    let policy = ActorPolicy {
        actor,
        action_low,
        action_high,
    };
    let mut rng = crate::seeding::rng_for(0, "evaluate-actor");
    evaluate_policy(
        &NoiseFree(env),
        &policy,
        mu0,
        gamma,
        horizon,
        1,
        &mut rng,
        None,
    )
}
