//! Tabular Q-learning on (grid point, action profile) pairs.
//!
//! Every episode sweeps all pairs once (exploring starts through the
//! projected transition oracle). The update for a pair visited for the n-th
//! time uses the polynomial learning rate `1 / (1 + n)^kappa`. Within an
//! episode all reads go to the episode-start snapshot and all writes to the
//! next table; an in-place variant that reads the freshest values is exposed
//! behind a flag for comparison.

use crate::dp::ExactQTable;
use crate::envs::{env_step, Environment};
use crate::error::{Error, Result};
use crate::simplex::{enumerate_action_profiles, ActionProfile, SimplexGrid};
use rand::seq::SliceRandom;
use rand::RngCore;

/// `alpha = (1 + n)^(-kappa)`; `n` counts previous visits of the pair.
pub fn learning_rate(n: u64, kappa: f64) -> f64 {
    (1.0 + n as f64).powf(-kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Lexicographic,
    ShuffledPerEpisode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    /// Reads use the episode-start snapshot (the literal algorithm).
    Snapshot,
    /// Reads use the freshest values; usually converges faster.
    InPlace,
}

/// Training parameters. The convergence analysis of the schedule needs
/// `1/2 < kappa < 1`; values outside that range are accepted for
/// experimentation.
#[derive(Debug, Clone)]
pub struct MfqParams {
    pub gamma: f64,
    pub kappa: f64,
    pub episodes: usize,
    pub sweep: SweepOrder,
    pub update: UpdateMode,
}

impl MfqParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        if self.episodes < 1 {
            return Err(Error::InvalidParameter("episodes must be >= 1".into()));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// The learned table plus per-pair visit counts.
#[derive(Debug, Clone)]
pub struct LearnedQTable {
    pub num_profiles: usize,
    /// Row-major over (grid point, profile).
    pub values: Vec<f64>,
    pub visit_counts: Vec<u64>,
    /// Episodes trained so far.
    pub episode: usize,
    pub gamma: f64,
    pub kappa: f64,
    /// Mean absolute temporal difference of the most recent episode.
    pub last_mean_td: f64,
}

impl LearnedQTable {
    pub fn zeros(num_points: usize, num_profiles: usize, gamma: f64, kappa: f64) -> Self {
        Self {
            num_profiles,
            values: vec![0.0; num_points * num_profiles],
            visit_counts: vec![0; num_points * num_profiles],
            episode: 0,
            gamma,
            kappa,
            last_mean_td: 0.0,
        }
    }

    pub fn num_points(&self) -> usize {
        self.values.len() / self.num_profiles
    }

    pub fn row(&self, point: usize) -> &[f64] {
        &self.values[point * self.num_profiles..(point + 1) * self.num_profiles]
    }

    pub fn sup_distance_to(&self, exact: &ExactQTable) -> Result<f64> {
        if exact.num_profiles != self.num_profiles || exact.values.len() != self.values.len() {
            return Err(Error::GridMismatch(format!(
                "learned {}x{} vs exact {}x{}",
                self.num_points(),
                self.num_profiles,
                exact.num_points(),
                exact.num_profiles
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&exact.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Per-point argmax over profiles; ties take the smallest profile index.
pub fn greedy_policy(table: &LearnedQTable) -> Vec<usize> {
    (0..table.num_points())
        .map(|i| {
            let row = table.row(i);
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

/// Train on the projected dynamics: execute each profile from each grid
/// point, observe the projected next point and the reward, and apply the
/// learning-rate-weighted backup. Returns the table after `episodes` sweeps.
pub fn train(
    env: &dyn Environment,
    grid: &SimplexGrid,
    params: &MfqParams,
    rng: &mut dyn RngCore,
) -> Result<LearnedQTable> {
    train_with_callback(env, grid, params, rng, |_, _| {})
}

/// Same as [`train`], invoking `callback(episode_just_finished, table)` after
/// every episode (used for learning curves).
pub fn train_with_callback(
    env: &dyn Environment,
    grid: &SimplexGrid,
    params: &MfqParams,
    rng: &mut dyn RngCore,
    mut callback: impl FnMut(usize, &LearnedQTable),
) -> Result<LearnedQTable> {
    params.validate()?;
    let num_actions = match env.action_kind() {
        crate::envs::ActionKind::Finite { num_actions } => num_actions,
        crate::envs::ActionKind::Continuous { .. } => {
            return Err(Error::InvalidParameter(
                "tabular learning needs a finite action set".into(),
            ))
        }
    };
    if grid.dimension() != env.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: env.state_dim(),
            got: grid.dimension(),
        });
    }
    let profiles: Vec<ActionProfile> = enumerate_action_profiles(env.state_dim(), num_actions)?;
    let np = profiles.len();
    let mut table = LearnedQTable::zeros(grid.len(), np, params.gamma, params.kappa);
    let mut order: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|gi| (0..np).map(move |pi| (gi, pi)))
        .collect();

    for _ in 0..params.episodes {
        if params.sweep == SweepOrder::ShuffledPerEpisode {
            order.shuffle(rng);
        }
        let snapshot = match params.update {
            UpdateMode::Snapshot => Some(table.values.clone()),
            UpdateMode::InPlace => None,
        };
        let read = |values: &Vec<f64>, idx: usize| -> f64 {
            match &snapshot {
                Some(s) => s[idx],
                None => values[idx],
            }
        };
        let mut td_sum = 0.0;
        for &(gi, pi) in &order {
            let out = env_step(env, grid.point(gi), &profiles[pi], rng)?;
            let next = grid.project(&out.next_state)?;
            let continuation = (0..np)
                .map(|j| read(&table.values, next * np + j))
                .fold(f64::NEG_INFINITY, f64::max);
            let idx = gi * np + pi;
            let alpha = learning_rate(table.visit_counts[idx], params.kappa);
            let target = out.reward + params.gamma * continuation;
            let old = read(&table.values, idx);
            td_sum += (target - old).abs();
            table.values[idx] = (1.0 - alpha) * old + alpha * target;
            table.visit_counts[idx] += 1;
        }
        table.episode += 1;
        table.last_mean_td = td_sum / order.len() as f64;
        callback(table.episode, &table);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{NoisePanel, ProjectedMdp};
    use crate::envs::{LogisticEnv, LogisticParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(ns: usize) -> (LogisticEnv, SimplexGrid) {
        (
            LogisticEnv::new(LogisticParams::default()).unwrap(),
            SimplexGrid::enumerate(2, ns).unwrap(),
        )
    }

    fn params(episodes: usize) -> MfqParams {
        MfqParams {
            gamma: 0.5,
            kappa: 0.7,
            episodes,
            sweep: SweepOrder::Lexicographic,
            update: UpdateMode::Snapshot,
        }
    }

    #[test]
    fn learning_rate_schedule() {
        assert_eq!(learning_rate(0, 0.7), 1.0);
        assert!((learning_rate(1, 0.7) - 2f64.powf(-0.7)).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for n in 0..100 {
            let a = learning_rate(n, 0.7);
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn gamma_zero_single_episode_learns_rewards() {
        let (env, grid) = fixture(6);
        let mut p = params(1);
        p.gamma = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = train(&env, &grid, &p, &mut rng).unwrap();
        let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).unwrap();
        for gi in 0..grid.len() {
            for pi in 0..4 {
                assert!((table.values[gi * 4 + pi] - mdp.reward(gi, pi)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn visit_counts_equal_episode_count_under_full_sweeps() {
        let (env, grid) = fixture(4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = train(&env, &grid, &params(17), &mut rng).unwrap();
        assert!(table.visit_counts.iter().all(|&c| c == 17));
    }

    #[test]
    fn converges_to_exact_q_on_tiny_instance() {
        let (env, grid) = fixture(4);
        let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).unwrap();
        let (exact, _, _) = mdp.exact_q(0.5, 1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = train(&env, &grid, &params(5000), &mut rng).unwrap();
        let err = table.sup_distance_to(&exact).unwrap();
        assert!(err <= 1e-2, "sup error {err}");
    }

    #[test]
    fn error_trend_non_increasing_in_windows() {
        let (env, grid) = fixture(4);
        let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).unwrap();
        let (exact, _, _) = mdp.exact_q(0.5, 1e-10).unwrap();
        let mut errors = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        train_with_callback(&env, &grid, &params(400), &mut rng, |_, t| {
            errors.push(t.sup_distance_to(&exact).unwrap());
        })
        .unwrap();
        let windows: Vec<f64> = errors[100..]
            .chunks(10)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        for w in windows.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "window rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn table_stays_bounded() {
        let (env, grid) = fixture(6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = train(&env, &grid, &params(500), &mut rng).unwrap();
        let cf = env.reward_bound().unwrap();
        let cap = 2.0 * cf / (1.0 - 0.5);
        assert!(table.values.iter().all(|v| v.abs() <= cap));
    }

    #[test]
    fn zero_reward_keeps_table_zero() {
        struct Zero(LogisticEnv);
        impl Environment for Zero {
            fn state_dim(&self) -> usize {
                2
            }
            fn action_kind(&self) -> crate::envs::ActionKind {
                self.0.action_kind()
            }
            fn step(
                &self,
                s: &crate::simplex::DistributionVector,
                a: &ActionProfile,
                e: &crate::envs::CommonNoiseSample,
            ) -> Result<crate::envs::TransitionResult> {
                let mut out = self.0.step(s, a, e)?;
                out.reward = 0.0;
                Ok(out)
            }
            fn neutral_noise(&self) -> crate::envs::CommonNoiseSample {
                self.0.neutral_noise()
            }
            fn sample_noise(&self, rng: &mut dyn RngCore) -> crate::envs::CommonNoiseSample {
                self.0.sample_noise(rng)
            }
            fn noise_enabled(&self) -> bool {
                false
            }
            fn reward_bound(&self) -> Option<f64> {
                Some(0.0)
            }
        }
        let env = Zero(LogisticEnv::new(LogisticParams::default()).unwrap());
        let grid = SimplexGrid::enumerate(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = train(&env, &grid, &params(50), &mut rng).unwrap();
        assert!(table.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_runs_are_bitwise_identical() {
        let (env, grid) = fixture(6);
        let t1 = train(&env, &grid, &params(200), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let t2 = train(&env, &grid, &params(200), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(t1.values, t2.values);
        assert_eq!(t1.visit_counts, t2.visit_counts);
    }

    #[test]
    fn greedy_matches_oracle_argmax_after_convergence() {
        let (env, grid) = fixture(8);
        let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).unwrap();
        let (exact, _, _) = mdp.exact_q(0.5, 1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let table = train(&env, &grid, &params(3000), &mut rng).unwrap();
        assert_eq!(greedy_policy(&table), exact.greedy());
    }

    #[test]
    fn greedy_tie_takes_smaller_index() {
        let mut t = LearnedQTable::zeros(1, 3, 0.5, 0.7);
        t.values = vec![1.0, 2.0, 2.0];
        assert_eq!(greedy_policy(&t), vec![1]);
        let t2 = LearnedQTable {
            values: vec![5.0, 5.0, 5.0],
            ..LearnedQTable::zeros(1, 3, 0.5, 0.7)
        };
        assert_eq!(greedy_policy(&t2), vec![0]);
    }

    #[test]
    fn in_place_variant_also_converges() {
        let (env, grid) = fixture(4);
        let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).unwrap();
        let (exact, _, _) = mdp.exact_q(0.5, 1e-10).unwrap();
        let mut p = params(2000);
        p.update = UpdateMode::InPlace;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = train(&env, &grid, &p, &mut rng).unwrap();
        assert!(table.sup_distance_to(&exact).unwrap() <= 1e-2);
    }

    #[test]
    fn shuffled_sweep_still_visits_every_pair() {
        let (env, grid) = fixture(4);
        let mut p = params(9);
        p.sweep = SweepOrder::ShuffledPerEpisode;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = train(&env, &grid, &p, &mut rng).unwrap();
        assert!(table.visit_counts.iter().all(|&c| c == 9));
    }
}
