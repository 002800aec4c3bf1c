//! Exact dynamic programming on the projected finite MDP.
//!
//! Projecting the distribution onto the simplex grid after every transition
//! turns the problem into a finite MDP over (grid point, action profile).
//! The expectation over the common noise is taken against a fixed quadrature
//! panel, so the Bellman operators are deterministic and their fixed points
//! are exactly computable. Transitions are cached per
//! (grid index, profile, panel sample) in one precomputation pass; the
//! operators are then table lookups.

use crate::envs::{CommonNoiseSample, Environment};
use crate::error::{Error, Result};
use crate::simplex::{enumerate_action_profiles, ActionProfile, DistributionVector, SimplexGrid};
use rand::RngCore;

/// Default sweep cap for the fixed-point iterations.
pub const DEFAULT_ITERATION_CAP: usize = 1_000_000;

/// Fixed-weight quadrature over the common noise.
#[derive(Debug, Clone)]
pub struct NoisePanel {
    samples: Vec<(CommonNoiseSample, f64)>,
}

impl NoisePanel {
    /// Single neutral sample: the noise-free (deterministic) panel.
    pub fn deterministic(env: &dyn Environment) -> Self {
        Self {
            samples: vec![(env.neutral_noise(), 1.0)],
        }
    }

    pub fn from_samples(samples: Vec<(CommonNoiseSample, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("empty noise panel".into()));
        }
        let total: f64 = samples.iter().map(|(_, w)| *w).sum();
        if samples.iter().any(|(_, w)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "panel weights must be nonnegative and sum to 1, got {total}"
            )));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(CommonNoiseSample, f64)] {
        &self.samples
    }
}

/// Value table over the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn sup_distance(&self, other: &ValueTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Exact state-action table over (grid point, action profile).
#[derive(Debug, Clone)]
pub struct ExactQTable {
    pub num_profiles: usize,
    /// Row-major: `values[point * num_profiles + profile]`.
    pub values: Vec<f64>,
}

impl ExactQTable {
    pub fn row(&self, point: usize) -> &[f64] {
        &self.values[point * self.num_profiles..(point + 1) * self.num_profiles]
    }

    pub fn num_points(&self) -> usize {
        self.values.len() / self.num_profiles
    }

    /// Pointwise maximum over profiles.
    pub fn max_values(&self) -> ValueTable {
        ValueTable {
            values: (0..self.num_points())
                .map(|i| {
                    self.row(i)
                        .iter()
                        .copied()
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect(),
        }
    }

    /// Per-point argmax; ties go to the smallest profile index.
    pub fn greedy(&self) -> Vec<usize> {
        (0..self.num_points())
            .map(|i| {
                let row = self.row(i);
                let mut best = 0usize;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    pub fn sup_distance(&self, other: &ExactQTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The projected MDP over grid points and enumerated action profiles, with
/// rewards and projected transitions cached.
pub struct ProjectedMdp<'a> {
    env: &'a dyn Environment,
    grid: &'a SimplexGrid,
    profiles: Vec<ActionProfile>,
    panel: NoisePanel,
    /// `rewards[point * profiles + profile]`
    rewards: Vec<f64>,
    /// `transitions[(point * profiles + profile) * panel + sample]` = next point index
    transitions: Vec<usize>,
}

impl<'a> ProjectedMdp<'a> {
    pub fn new(env: &'a dyn Environment, grid: &'a SimplexGrid, panel: NoisePanel) -> Result<Self> {
        let num_actions = match env.action_kind() {
            crate::envs::ActionKind::Finite { num_actions } => num_actions,
            crate::envs::ActionKind::Continuous { .. } => {
                return Err(Error::InvalidParameter(
                    "dynamic programming needs a finite action set".into(),
                ))
            }
        };
        if grid.dimension() != env.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: env.state_dim(),
                got: grid.dimension(),
            });
        }
        let profiles = enumerate_action_profiles(env.state_dim(), num_actions)?;
        let np = profiles.len();
        let ne = panel.samples().len();
        let mut rewards = vec![0.0; grid.len() * np];
        let mut transitions = vec![0usize; grid.len() * np * ne];
        for (gi, point) in grid.points().iter().enumerate() {
            for (pi, profile) in profiles.iter().enumerate() {
                let base = gi * np + pi;
                for (ei, (noise, _)) in panel.samples().iter().enumerate() {
                    let out = env.step(point, profile, noise)?;
                    transitions[base * ne + ei] = grid.project(&out.next_state)?;
                    if ei == 0 {
                        rewards[base] = out.reward;
                    } else {
                        debug_assert!(
                            (rewards[base] - out.reward).abs() < 1e-12,
                            "reward must not depend on the noise sample"
                        );
                    }
                }
            }
        }
        Ok(Self {
            env,
            grid,
            profiles,
            panel,
            rewards,
            transitions,
        })
    }

    pub fn grid(&self) -> &SimplexGrid {
        self.grid
    }

    pub fn profiles(&self) -> &[ActionProfile] {
        &self.profiles
    }

    pub fn env(&self) -> &dyn Environment {
        self.env
    }

    pub fn reward(&self, point: usize, profile: usize) -> f64 {
        self.rewards[point * self.profiles.len() + profile]
    }

    /// Expected continuation `sum_e w_e v(next(point, profile, e))`.
    fn expected_value(&self, v: &ValueTable, point: usize, profile: usize) -> f64 {
        let ne = self.panel.samples().len();
        let base = (point * self.profiles.len() + profile) * ne;
        self.panel
            .samples()
            .iter()
            .enumerate()
            .map(|(ei, (_, w))| w * v.values[self.transitions[base + ei]])
            .sum()
    }

    /// Policy backup: `f(point, policy(point)) + gamma * E v(next)`.
    pub fn bellman_policy(&self, v: &ValueTable, policy: &[usize], gamma: f64) -> ValueTable {
        ValueTable {
            values: (0..self.grid.len())
                .map(|gi| {
                    let pi = policy[gi];
                    self.reward(gi, pi) + gamma * self.expected_value(v, gi, pi)
                })
                .collect(),
        }
    }

    /// Optimal backup: pointwise max of the policy backup over all profiles.
    pub fn bellman_optimal(&self, v: &ValueTable, gamma: f64) -> ValueTable {
        ValueTable {
            values: (0..self.grid.len())
                .map(|gi| {
                    (0..self.profiles.len())
                        .map(|pi| self.reward(gi, pi) + gamma * self.expected_value(v, gi, pi))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect(),
        }
    }

    /// Iterate the optimal backup from zero until the sup-norm step is below
    /// `tol * (1 - gamma) / (2 gamma)`, which leaves the iterate within
    /// `tol / 2` of the fixed point.
    pub fn value_iteration(&self, gamma: f64, tol: f64) -> Result<(ValueTable, usize, f64)> {
        self.value_iteration_capped(gamma, tol, DEFAULT_ITERATION_CAP)
    }

    pub fn value_iteration_capped(
        &self,
        gamma: f64,
        tol: f64,
        cap: usize,
    ) -> Result<(ValueTable, usize, f64)> {
        check_gamma_tol(gamma, tol)?;
        let threshold = stop_threshold(gamma, tol);
        let mut v = ValueTable::zeros(self.grid.len());
        for iter in 1..=cap {
            let next = self.bellman_optimal(&v, gamma);
            let diff = next.sup_distance(&v);
            v = next;
            if diff <= threshold {
                return Ok((v, iter, diff));
            }
        }
        Err(Error::IterationCap(cap))
    }

    /// Fixed point of the state-action backup
    /// `Q(point, profile) = f + gamma * E max_p' Q(next, p')`, same stopping
    /// rule as `value_iteration`.
    pub fn exact_q(&self, gamma: f64, tol: f64) -> Result<(ExactQTable, usize, f64)> {
        self.exact_q_capped(gamma, tol, DEFAULT_ITERATION_CAP)
    }

    pub fn exact_q_capped(
        &self,
        gamma: f64,
        tol: f64,
        cap: usize,
    ) -> Result<(ExactQTable, usize, f64)> {
        check_gamma_tol(gamma, tol)?;
        let threshold = stop_threshold(gamma, tol);
        let np = self.profiles.len();
        let mut q = ExactQTable {
            num_profiles: np,
            values: vec![0.0; self.grid.len() * np],
        };
        for iter in 1..=cap {
            let v = q.max_values();
            let mut next = q.clone();
            for gi in 0..self.grid.len() {
                for pi in 0..np {
                    next.values[gi * np + pi] =
                        self.reward(gi, pi) + gamma * self.expected_value(&v, gi, pi);
                }
            }
            let diff = q.sup_distance(&next);
            q = next;
            if diff <= threshold {
                return Ok((q, iter, diff));
            }
        }
        Err(Error::IterationCap(cap))
    }

    /// Projected one-step transition for a given profile under a fixed noise
    /// sample index (used by rollouts on the projected dynamics).
    pub fn projected_next(&self, point: usize, profile: usize, sample: usize) -> usize {
        let ne = self.panel.samples().len();
        self.transitions[(point * self.profiles.len() + profile) * ne + sample]
    }
}

fn check_gamma_tol(gamma: f64, tol: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    Ok(())
}

fn stop_threshold(gamma: f64, tol: f64) -> f64 {
    if gamma == 0.0 {
        f64::INFINITY // one sweep reaches the fixed point exactly
    } else {
        tol * (1.0 - gamma) / (2.0 * gamma)
    }
}

/// Anything that maps a distribution to an action profile.
pub trait Policy {
    fn action(&self, state: &DistributionVector) -> Result<ActionProfile>;
}

impl<F> Policy for F
where
    F: Fn(&DistributionVector) -> Result<ActionProfile>,
{
    fn action(&self, state: &DistributionVector) -> Result<ActionProfile> {
        self(state)
    }
}

/// Grid-indexed policy: project the state, then use the stored profile.
pub struct GridPolicy<'a> {
    pub grid: &'a SimplexGrid,
    pub profiles: &'a [ActionProfile],
    pub assignment: Vec<usize>,
}

impl Policy for GridPolicy<'_> {
    fn action(&self, state: &DistributionVector) -> Result<ActionProfile> {
        let idx = self.grid.project(state)?;
        Ok(self.profiles[self.assignment[idx]].clone())
    }
}

/// Monte-Carlo policy evaluation by truncated rollout.
#[derive(Debug, Clone, Copy)]
pub struct PolicyEvaluation {
    pub value: f64,
    /// `gamma^horizon * C_f / (1 - gamma)` when a reward bound is known.
    pub truncation_bound: Option<f64>,
}

/// Average over `n_rollouts` common-noise rollouts of the discounted sum
/// `sum_{t < horizon} gamma^t f(mu_t, a(mu_t))`. With `projection` given, the
/// state is projected onto the grid after every step (the projected
/// dynamics); otherwise the raw dynamics are followed.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_policy(
    env: &dyn Environment,
    policy: &dyn Policy,
    mu0: &DistributionVector,
    gamma: f64,
    horizon: usize,
    n_rollouts: usize,
    rng: &mut dyn RngCore,
    projection: Option<&SimplexGrid>,
) -> Result<PolicyEvaluation> {
    if horizon < 1 || n_rollouts < 1 {
        return Err(Error::InvalidParameter(
            "horizon and n_rollouts must be >= 1".into(),
        ));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    let mut total = 0.0;
    for _ in 0..n_rollouts {
        let mut mu = mu0.clone();
        let mut discount = 1.0;
        for _ in 0..horizon {
            let action = policy.action(&mu)?;
            let out = crate::envs::env_step(env, &mu, &action, rng)?;
            total += discount * out.reward;
            discount *= gamma;
            mu = match projection {
                Some(grid) => grid.point(grid.project(&out.next_state)?).clone(),
                None => out.next_state,
            };
        }
    }
    let truncation_bound = env
        .reward_bound()
        .map(|cf| gamma.powi(horizon as i32) * cf / (1.0 - gamma));
    Ok(PolicyEvaluation {
        value: total / n_rollouts as f64,
        truncation_bound,
    })
}
