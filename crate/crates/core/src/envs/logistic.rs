//! Synthetic two-state environment with a logistic, distribution-dependent
//! transition. Small enough for exhaustive oracles, nonlinear enough in the
//! distribution to exercise the full machinery.
//!
//! With `mu = (p, 1-p)`, each state has a departure probability that depends
//! logistically on `p` and is scaled by the action chosen for that state:
//!
//! ```text
//! p' = (1 - d0) * p + d1 * (1 - p)
//! d0 = base0[a(0)] * sigmoid( k (p - 1/2))
//! d1 = base1[a(1)] * sigmoid(-k (p - 1/2))
//! ```
//!
//! The reward is linear in the per-state payoffs `u + w p`.

use super::{ActionKind, CommonNoiseSample, Environment, TransitionResult};
use crate::error::{Error, Result};
use crate::simplex::{ActionProfile, DistributionVector};
use rand::RngCore;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    /// Departure scale of state 0 indexed by the action taken there.
    pub base0: [f64; 2],
    /// Departure scale of state 1 indexed by the action taken there.
    pub base1: [f64; 2],
    /// Steepness of the logistic coupling to the distribution.
    pub steepness: f64,
    /// Per-state payoff offsets indexed by action.
    pub pay0: [f64; 2],
    pub pay1: [f64; 2],
    /// Payoff slopes in p.
    pub slope0: f64,
    pub slope1: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            base0: [0.3, 0.7],
            base1: [0.4, 0.6],
            steepness: 2.0,
            pay0: [0.0, 0.35],
            pay1: [0.5, 0.1],
            slope0: 0.6,
            slope1: -0.8,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        for v in self
            .base0
            .iter()
            .chain(self.base1.iter())
            .chain(self.pay0.iter())
            .chain(self.pay1.iter())
            .chain([&self.steepness, &self.slope0, &self.slope1])
        {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(
                    "logistic parameters must be finite".into(),
                ));
            }
        }
        for b in self.base0.iter().chain(self.base1.iter()) {
            if !(0.0..=1.0).contains(b) {
                return Err(Error::InvalidParameter(format!(
                    "departure scales must lie in [0, 1], got {b}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LogisticEnv {
    params: LogisticParams,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl LogisticEnv {
    pub fn new(params: LogisticParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &LogisticParams {
        &self.params
    }

    fn actions(&self, action: &ActionProfile) -> Result<[usize; 2]> {
        match action {
            ActionProfile::Discrete(v) if v.len() == 2 => {
                for (i, &a) in v.iter().enumerate() {
                    if a > 1 {
                        return Err(Error::BadActionRange {
                            index: i,
                            value: a as f64,
                        });
                    }
                }
                Ok([v[0], v[1]])
            }
            ActionProfile::Discrete(v) => Err(Error::DimensionMismatch {
                expected: 2,
                got: v.len(),
            }),
            ActionProfile::Continuous(_) => Err(Error::InvalidParameter(
                "logistic environment takes discrete action profiles".into(),
            )),
        }
    }

    pub fn reward(&self, mu: &DistributionVector, action: &ActionProfile) -> Result<f64> {
        let a = self.actions(action)?;
        let p = mu.weights()[0];
        let f0 = self.params.pay0[a[0]] + self.params.slope0 * p;
        let f1 = self.params.pay1[a[1]] + self.params.slope1 * p;
        Ok(p * f0 + (1.0 - p) * f1)
    }
}

impl Environment for LogisticEnv {
    fn state_dim(&self) -> usize {
        2
    }

    fn action_kind(&self) -> ActionKind {
        ActionKind::Finite { num_actions: 2 }
    }

    fn step(
        &self,
        state: &DistributionVector,
        action: &ActionProfile,
        _noise: &CommonNoiseSample,
    ) -> Result<TransitionResult> {
        if state.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: state.dim(),
            });
        }
        let a = self.actions(action)?;
        let p = state.weights()[0];
        let k = self.params.steepness;
        let d0 = self.params.base0[a[0]] * sigmoid(k * (p - 0.5));
        let d1 = self.params.base1[a[1]] * sigmoid(-k * (p - 0.5));
        let p_next = ((1.0 - d0) * p + d1 * (1.0 - p)).clamp(0.0, 1.0);
        Ok(TransitionResult {
            next_state: DistributionVector::from_normalized(vec![p_next, 1.0 - p_next], 1.0),
            reward: self.reward(state, action)?,
        })
    }

    fn neutral_noise(&self) -> CommonNoiseSample {
        CommonNoiseSample::new(0.0)
    }

    fn sample_noise(&self, _rng: &mut dyn RngCore) -> CommonNoiseSample {
        self.neutral_noise()
    }

    fn noise_enabled(&self) -> bool {
        false
    }

    fn reward_bound(&self) -> Option<f64> {
        let p = &self.params;
        let m0 = p.pay0.iter().fold(0.0f64, |m, x| m.max(x.abs())) + p.slope0.abs();
        let m1 = p.pay1.iter().fold(0.0f64, |m, x| m.max(x.abs())) + p.slope1.abs();
        Some(m0.max(m1))
    }
}
