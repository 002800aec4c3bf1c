//! Four-state protection/infection model. Computers are defended (D) or
//! undefended (U), infected (I) or susceptible (S); the planner picks, per
//! state, whether to request a protection-level switch, which then happens at
//! rate `lambda`. Infection pressure on susceptible machines combines a
//! direct attack term with peer terms proportional to the infected masses.
//!
//! State order is fixed as (DI, DS, UI, US). The rate matrix `G` stores the
//! rate from state `x` to state `x'` at `G[x'][x]`, so the distribution
//! (a column vector) evolves as `mu + dt * G * mu`. Each diagonal entry is
//! the negative of the sum of the other entries in its *column*: columns sum
//! to zero, which is what conserves total mass under the column-vector
//! dynamics. (Descriptions of this matrix sometimes say "row" here; with
//! column-vector states that reading does not conserve mass.)

use super::{ActionKind, CommonNoiseSample, Environment, TransitionResult};
use crate::error::{Error, Result};
use crate::simplex::{ActionProfile, DistributionVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

/// Index aliases for the fixed state order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyberState {
    DefendedInfected = 0,
    DefendedSusceptible = 1,
    UndefendedInfected = 2,
    UndefendedSusceptible = 3,
}

pub const DI: usize = 0;
pub const DS: usize = 1;
pub const UI: usize = 2;
pub const US: usize = 3;

/// Model rates, costs, and the Euler time step.
///
/// The defaults are a documented reference set, not sourced from any external
/// calibration: they satisfy `q_rec_d > q_rec_u` and `q_inf_d < q_inf_u`
/// (defense recovers faster and gets infected less).
#[derive(Debug, Clone, PartialEq)]
pub struct CyberParams {
    /// Rate at which a requested protection-level switch takes effect.
    pub lambda: f64,
    pub q_rec_d: f64,
    pub q_rec_u: f64,
    /// Hacker attack intensity.
    pub v_h: f64,
    pub q_inf_d: f64,
    pub q_inf_u: f64,
    /// Peer infection: beta_xy is pressure from x-infected onto y-susceptible.
    pub beta_uu: f64,
    pub beta_ud: f64,
    pub beta_du: f64,
    pub beta_dd: f64,
    /// Protection cost per defended unit mass and per time step.
    pub k_d: f64,
    /// Penalty per infected unit mass and per time step.
    pub k_i: f64,
    pub dt: f64,
    /// Standard deviation of the lognormal multiplicative factor applied to
    /// the two infection rows; 0 disables the common-noise hook.
    pub noise_std: f64,
}

impl Default for CyberParams {
    fn default() -> Self {
        Self {
            lambda: 0.8,
            q_rec_d: 0.5,
            q_rec_u: 0.4,
            v_h: 0.6,
            q_inf_d: 0.3,
            q_inf_u: 0.4,
            beta_uu: 0.3,
            beta_ud: 0.2,
            beta_du: 0.25,
            beta_dd: 0.15,
            k_d: 0.3,
            k_i: 0.5,
            dt: 0.1,
            noise_std: 0.0,
        }
    }
}

impl CyberParams {
    /// Worst-case column out-flow at neutral noise, maximized over mu and
    /// actions; `dt * out_flow <= 1` keeps `I + dt G` column-stochastic.
    pub fn worst_column_outflow(&self) -> f64 {
        let inf_d = self.v_h * self.q_inf_d + self.beta_dd + self.beta_ud;
        let inf_u = self.v_h * self.q_inf_u + self.beta_uu + self.beta_du;
        [
            self.q_rec_d + self.lambda,
            inf_d + self.lambda,
            self.q_rec_u + self.lambda,
            inf_u + self.lambda,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("lambda", self.lambda),
            ("q_rec_d", self.q_rec_d),
            ("q_rec_u", self.q_rec_u),
            ("v_h", self.v_h),
            ("q_inf_d", self.q_inf_d),
            ("q_inf_u", self.q_inf_u),
            ("beta_uu", self.beta_uu),
            ("beta_ud", self.beta_ud),
            ("beta_du", self.beta_du),
            ("beta_dd", self.beta_dd),
            ("k_d", self.k_d),
            ("k_i", self.k_i),
            ("noise_std", self.noise_std),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        let outflow = self.worst_column_outflow();
        if self.dt * outflow > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "dt = {} too large: dt * worst column out-flow = {:.3} > 1, \
                 the one-step transition matrix would not be column-stochastic",
                self.dt,
                self.dt * outflow
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CyberEnv {
    params: CyberParams,
}

impl CyberEnv {
    pub fn new(params: CyberParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &CyberParams {
        &self.params
    }

    /// The 4x4 rate matrix for (mu, action, noise factor). Actions may be the
    /// binary profiles of the tabular planner or relaxed values in [0, 1]
    /// (the actor-critic path): the switch entries scale as `lambda * a`.
    pub fn generator(
        &self,
        mu: &DistributionVector,
        action: &ActionProfile,
        noise: &CommonNoiseSample,
    ) -> Result<[[f64; 4]; 4]> {
        if mu.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: mu.dim(),
            });
        }
        let a = action_values(action)?;
        let p = &self.params;
        let nu = noise.value;
        let w = mu.weights();
        let mut g = [[0.0f64; 4]; 4];
        g[DI][DS] = p.v_h * p.q_inf_d * nu + p.beta_dd * w[DI] * nu + p.beta_ud * w[UI] * nu;
        g[UI][US] = p.v_h * p.q_inf_u * nu + p.beta_uu * w[UI] * nu + p.beta_du * w[DI] * nu;
        g[DS][DI] = p.q_rec_d;
        g[US][UI] = p.q_rec_u;
        g[DI][UI] = p.lambda * a[UI];
        g[UI][DI] = p.lambda * a[DI];
        g[DS][US] = p.lambda * a[US];
        g[US][DS] = p.lambda * a[DS];
        #[allow(clippy::needless_range_loop)] // columns, not rows, are summed
        for c in 0..4 {
            let out: f64 = (0..4).filter(|&r| r != c).map(|r| g[r][c]).sum();
            g[c][c] = -out;
        }
        Ok(g)
    }

    /// Reward `-(k_d * (mu_DI + mu_DS) + k_i * (mu_DI + mu_UI))`.
    pub fn reward(&self, mu: &DistributionVector) -> f64 {
        let w = mu.weights();
        -(self.params.k_d * (w[DI] + w[DS]) + self.params.k_i * (w[DI] + w[UI]))
    }
}

fn action_values(action: &ActionProfile) -> Result<[f64; 4]> {
    if action.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: action.len(),
        });
    }
    let mut out = [0.0f64; 4];
    match action {
        ActionProfile::Discrete(v) => {
            for (i, &a) in v.iter().enumerate() {
                if a > 1 {
                    return Err(Error::BadActionRange {
                        index: i,
                        value: a as f64,
                    });
                }
                out[i] = a as f64;
            }
        }
        ActionProfile::Continuous(v) => {
            for (i, &a) in v.iter().enumerate() {
                if !a.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&a) {
                    return Err(Error::BadActionRange { index: i, value: a });
                }
                out[i] = a.clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}

impl Environment for CyberEnv {
    fn state_dim(&self) -> usize {
        4
    }

    fn action_kind(&self) -> ActionKind {
        ActionKind::Finite { num_actions: 2 }
    }

    fn step(
        &self,
        state: &DistributionVector,
        action: &ActionProfile,
        noise: &CommonNoiseSample,
    ) -> Result<TransitionResult> {
        let g = self.generator(state, action, noise)?;
        let w = state.weights();
        let dt = self.params.dt;
        let mut next = [0.0f64; 4];
        for (r, n) in next.iter_mut().enumerate() {
            let flow: f64 = (0..4).map(|c| g[r][c] * w[c]).sum();
            *n = w[r] + dt * flow;
        }
        for (i, &v) in next.iter().enumerate() {
            if v < -1e-12 {
                return Err(Error::UnstableStep { index: i, value: v });
            }
        }
        // No renormalization: columns of G sum to zero, so mass is conserved
        // to rounding. Tiny negatives above -1e-12 are clamped.
        let weights: Vec<f64> = next.iter().map(|&v| v.max(0.0)).collect();
        Ok(TransitionResult {
            next_state: DistributionVector::from_normalized(weights, 1.0),
            reward: self.reward(state),
        })
    }

    fn neutral_noise(&self) -> CommonNoiseSample {
        CommonNoiseSample::new(1.0)
    }

    fn sample_noise(&self, rng: &mut dyn RngCore) -> CommonNoiseSample {
        if self.params.noise_std == 0.0 {
            return self.neutral_noise();
        }
        // Mean-one lognormal factor.
        let z: f64 = StandardNormal.sample(rng);
        let s = self.params.noise_std;
        CommonNoiseSample::new((s * z - 0.5 * s * s).exp())
    }

    fn noise_enabled(&self) -> bool {
        self.params.noise_std > 0.0
    }

    fn reward_bound(&self) -> Option<f64> {
        Some(self.params.k_d + self.params.k_i)
    }
}
