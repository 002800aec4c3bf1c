//! Environments: the distribution transition map and the lifted reward.
//!
//! An environment is a stateless value transformer. `step` consumes the
//! current distribution, the planner's action profile, and one common-noise
//! sample; it returns the next distribution and the reward, which is a
//! deterministic function of (distribution, action). With the noise hook
//! disabled the whole map is deterministic.

mod cyber;
mod logistic;
mod swarm;

pub use cyber::{CyberEnv, CyberParams, CyberState};
pub use logistic::{LogisticEnv, LogisticParams};
pub use swarm::{phi, SwarmEnv, SwarmParams};

use crate::error::Result;
use crate::simplex::{ActionProfile, DistributionVector};
use rand::RngCore;

/// One realization of the common noise. The meaning is environment-specific:
/// a multiplicative factor on infection rates for the cyber model, an
/// additive drift shared by all cells for the swarm model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonNoiseSample {
    pub value: f64,
}

impl CommonNoiseSample {
    pub fn new(value: f64) -> Self {
        debug_assert!(value.is_finite());
        Self { value }
    }
}

/// Next distribution plus the reward collected on the way.
#[derive(Debug, Clone)]
pub struct TransitionResult {
    pub next_state: DistributionVector,
    pub reward: f64,
}

/// Discrete action sets have a per-state cardinality; continuous sets are a
/// box of per-cell real values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionKind {
    Finite { num_actions: usize },
    Continuous { low: f64, high: f64 },
}

pub trait Environment {
    /// Dimension of the distribution state (|S| or number of grid cells).
    fn state_dim(&self) -> usize;

    fn action_kind(&self) -> ActionKind;

    /// Apply the transition map for a fixed noise realization.
    fn step(
        &self,
        state: &DistributionVector,
        action: &ActionProfile,
        noise: &CommonNoiseSample,
    ) -> Result<TransitionResult>;

    /// The noise value that makes the map coincide with the noise-free one.
    fn neutral_noise(&self) -> CommonNoiseSample;

    /// Draw one common-noise sample; returns the neutral value when the hook
    /// is disabled.
    fn sample_noise(&self, rng: &mut dyn RngCore) -> CommonNoiseSample;

    fn noise_enabled(&self) -> bool;

    /// A bound on |reward| when one is known, used for truncation estimates.
    fn reward_bound(&self) -> Option<f64>;
}

/// One environment step with a freshly drawn i.i.d. common-noise sample.
pub fn env_step(
    env: &dyn Environment,
    state: &DistributionVector,
    action: &ActionProfile,
    rng: &mut dyn RngCore,
) -> Result<TransitionResult> {
    let noise = env.sample_noise(rng);
    env.step(state, action, &noise)
}
