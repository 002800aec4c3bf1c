//! Swarm motion on the unit torus. The planner assigns a velocity to every
//! grid cell; the density follows the controlled drift-diffusion
//!
//! ```text
//! M' = M + dt * [ -D_upwind(v M) + (sigma^2 / 2) * D2 M ]
//! ```
//!
//! with `v = action + common-noise drift`, a conservative first-order upwind
//! divergence for the advection (flux per cell face, upwind side chosen by the
//! sign of the face velocity) and the 3-point second difference for the
//! diffusion. Fluxes telescope over the periodic grid, so total mass is
//! conserved to rounding before the final renormalization.
//!
//! The per-step reward is the density-weighted sum of
//! `-a^2/2 + phi(x) - ln(density)`: a kinetic-energy price on the velocity, a
//! position preference, and a crowd-aversion term. `phi` is tuned so that
//! with `sigma = 1` the ergodic optimum is known in closed form:
//! velocity `2*pi*cos(2*pi*x)` with stationary density proportional to
//! `exp(2*sin(2*pi*x))`. That pair is the benchmark used by the analysis
//! metrics.
//!
//! Stability requires `dt * max|v| / h <= 1` and `dt * sigma^2 / h^2 <= 1/2`;
//! both are checked at step time against the actual velocities.

use super::{ActionKind, CommonNoiseSample, Environment, TransitionResult};
use crate::error::{Error, Result};
use crate::simplex::{ActionProfile, DistributionVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Position preference: `-2 pi^2 [ -sin(2 pi x) + cos^2(2 pi x) ] + 2 sin(2 pi x)`.
pub fn phi(x: f64) -> f64 {
    let t = 2.0 * PI * x;
    -2.0 * PI * PI * (-t.sin() + t.cos() * t.cos()) + 2.0 * t.sin()
}

/// The closed-form ergodic velocity `2 pi cos(2 pi x)` (valid for sigma = 1).
pub fn optimal_velocity(x: f64) -> f64 {
    2.0 * PI * (2.0 * PI * x).cos()
}

/// Unnormalized closed-form ergodic density `exp(2 sin(2 pi x))`.
pub fn stationary_density_unnormalized(x: f64) -> f64 {
    (2.0 * (2.0 * PI * x).sin()).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmParams {
    /// Number of grid cells on the torus; cells are centered at `(i + 1/2) h`.
    pub n_points: usize,
    pub dt: f64,
    /// Idiosyncratic diffusion coefficient.
    pub sigma: f64,
    /// Lower clamp applied to the density inside the log term of the reward.
    pub density_floor: f64,
    /// Standard deviation of the shared Gaussian drift; 0 disables the hook.
    pub common_noise_std: f64,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self {
            n_points: 64,
            dt: 1e-4,
            sigma: 1.0,
            density_floor: 1e-10,
            common_noise_std: 0.0,
        }
    }
}

impl SwarmParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 8 {
            return Err(Error::InvalidParameter(format!(
                "n_points must be >= 8, got {}",
                self.n_points
            )));
        }
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.density_floor <= 0.0 || self.density_floor.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "density_floor must be positive, got {}",
                self.density_floor
            )));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        if !self.common_noise_std.is_finite() || self.common_noise_std < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "common_noise_std must be finite and >= 0, got {}",
                self.common_noise_std
            )));
        }
        let h = 1.0 / self.n_points as f64;
        if self.dt * self.sigma * self.sigma / (h * h) > 0.5 + 1e-12 {
            return Err(Error::CflViolation(format!(
                "dt * sigma^2 / h^2 = {:.3} > 1/2",
                self.dt * self.sigma * self.sigma / (h * h)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SwarmEnv {
    params: SwarmParams,
    cell_centers: Vec<f64>,
    phi_values: Vec<f64>,
}

impl SwarmEnv {
    pub fn new(params: SwarmParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_points;
        let h = 1.0 / n as f64;
        let cell_centers: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let phi_values = cell_centers.iter().map(|&x| phi(x)).collect();
        Ok(Self {
            params,
            cell_centers,
            phi_values,
        })
    }

    pub fn params(&self) -> &SwarmParams {
        &self.params
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.params.n_points as f64
    }

    pub fn cell_centers(&self) -> &[f64] {
        &self.cell_centers
    }

    /// The benchmark velocity profile tabulated on the cell centers.
    pub fn tabulated_optimal_velocity(&self) -> Vec<f64> {
        self.cell_centers
            .iter()
            .map(|&x| optimal_velocity(x))
            .collect()
    }

    /// The benchmark density sampled on the cell centers and normalized to
    /// total mass 1.
    pub fn tabulated_stationary_density(&self) -> DistributionVector {
        let raw: Vec<f64> = self
            .cell_centers
            .iter()
            .map(|&x| stationary_density_unnormalized(x))
            .collect();
        DistributionVector::density(raw, self.cell_width()).expect("positive density")
    }

    fn velocities(&self, action: &ActionProfile, drift: f64) -> Result<Vec<f64>> {
        let n = self.params.n_points;
        if action.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: action.len(),
            });
        }
        let vals = match action {
            ActionProfile::Continuous(v) => v.clone(),
            ActionProfile::Discrete(_) => {
                return Err(Error::InvalidParameter(
                    "swarm actions are continuous velocity profiles".into(),
                ))
            }
        };
        for (i, &v) in vals.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::BadActionRange { index: i, value: v });
            }
        }
        Ok(vals.iter().map(|v| v + drift).collect())
    }

    /// One advection-diffusion update *without* the final renormalization.
    /// Exposed so that conservation can be measured exactly.
    pub fn step_raw(
        &self,
        state: &DistributionVector,
        action: &ActionProfile,
        noise: &CommonNoiseSample,
    ) -> Result<Vec<f64>> {
        let n = self.params.n_points;
        if state.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: state.dim(),
            });
        }
        let v = self.velocities(action, noise.value)?;
        let h = self.cell_width();
        let dt = self.params.dt;
        let sigma2 = self.params.sigma * self.params.sigma;

        let max_v = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if dt * max_v / h > 1.0 + 1e-12 {
            return Err(Error::CflViolation(format!(
                "dt * max|v| / h = {:.3} > 1",
                dt * max_v / h
            )));
        }
        if dt * sigma2 / (h * h) > 0.5 + 1e-12 {
            return Err(Error::CflViolation(format!(
                "dt * sigma^2 / h^2 = {:.3} > 1/2",
                dt * sigma2 / (h * h)
            )));
        }

        let m = state.weights();
        // Face flux between cell i and i+1 (periodic): upwind side by the
        // sign of the face velocity.
        let mut flux = vec![0.0f64; n];
        for i in 0..n {
            let j = (i + 1) % n;
            let vf = 0.5 * (v[i] + v[j]);
            flux[i] = if vf > 0.0 { vf * m[i] } else { vf * m[j] };
        }
        let mut next = vec![0.0f64; n];
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let nxt = (i + 1) % n;
            let advection = -(flux[i] - flux[prev]) / h;
            let diffusion = 0.5 * sigma2 * (m[nxt] - 2.0 * m[i] + m[prev]) / (h * h);
            next[i] = m[i] + dt * (advection + diffusion);
        }
        Ok(next)
    }

    /// Reward `sum_i M_i h [ -a_i^2/2 + phi(x_i) - ln(max(M_i, floor)) ]`.
    pub fn reward(&self, state: &DistributionVector, action: &ActionProfile) -> Result<f64> {
        let n = self.params.n_points;
        if state.dim() != n || action.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if state.dim() != n {
                    state.dim()
                } else {
                    action.len()
                },
            });
        }
        let a = match action {
            ActionProfile::Continuous(v) => v,
            ActionProfile::Discrete(_) => {
                return Err(Error::InvalidParameter(
                    "swarm actions are continuous velocity profiles".into(),
                ))
            }
        };
        let h = self.cell_width();
        let floor = self.params.density_floor;
        let m = state.weights();
        let mut total = 0.0;
        for i in 0..n {
            let density = m[i].max(floor);
            total += m[i] * h * (-0.5 * a[i] * a[i] + self.phi_values[i] - density.ln());
        }
        Ok(total)
    }
}

impl Environment for SwarmEnv {
    fn state_dim(&self) -> usize {
        self.params.n_points
    }

    fn action_kind(&self) -> ActionKind {
        ActionKind::Continuous {
            low: f64::NEG_INFINITY,
            high: f64::INFINITY,
        }
    }

    fn step(
        &self,
        state: &DistributionVector,
        action: &ActionProfile,
        noise: &CommonNoiseSample,
    ) -> Result<TransitionResult> {
        let reward = self.reward(state, action)?;
        let mut next = self.step_raw(state, action, noise)?;
        for (i, &v) in next.iter().enumerate() {
            if v < -1e-12 {
                return Err(Error::NegativeDensity { index: i, value: v });
            }
        }
        for v in &mut next {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let mass: f64 = next.iter().sum::<f64>() * self.cell_width();
        for v in &mut next {
            *v /= mass;
        }
        Ok(TransitionResult {
            next_state: DistributionVector::from_normalized(next, self.cell_width()),
            reward,
        })
    }

    fn neutral_noise(&self) -> CommonNoiseSample {
        CommonNoiseSample::new(0.0)
    }

    fn sample_noise(&self, rng: &mut dyn RngCore) -> CommonNoiseSample {
        if self.params.common_noise_std == 0.0 {
            return self.neutral_noise();
        }
        let z: f64 = StandardNormal.sample(rng);
        CommonNoiseSample::new(self.params.common_noise_std * z)
    }

    fn noise_enabled(&self) -> bool {
        self.params.common_noise_std > 0.0
    }

    fn reward_bound(&self) -> Option<f64> {
        // |reward| <= max_a a^2/2 + max|phi| + max(|ln floor|, ln(1/h));
        // without an action box the velocity cost is unbounded.
        None
    }
}
