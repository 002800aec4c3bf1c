//! The acceptance suite: nine gates covering the oracle, the tabular
//! learner, the accuracy formulas, the swarm benchmark, both actor-critic
//! experiments, the gradient machinery, and conservation. Every tolerance is
//! pinned here, in code.
//!
//! Gate 5c (the 500-step swarm relaxation reaching L2 error 0.05) is known
//! to be unattainable with the first-order upwind scheme: the scheme's
//! stationary density sits at L2 distance ~3.4/n from the closed form, while
//! the diffusion stability limit caps 500 steps at 250/n^2 time units, so no
//! grid size satisfies both. The gate runs as specified and reports its
//! failure honestly; see the README.

use mfc_core::analysis::{self, action_gap, grid_l2_norm, softmax_action_check};
use mfc_core::ddpg::{self, ActorPolicy, DdpgConfig, InitialStateSampler};
use mfc_core::dp::{NoisePanel, Policy, ProjectedMdp, ValueTable};
use mfc_core::envs::{
    CyberEnv, CyberParams, Environment, LogisticEnv, LogisticParams, SwarmEnv, SwarmParams,
};
use mfc_core::mfq::{self, LearnedQTable, MfqParams, SweepOrder, UpdateMode};
use mfc_core::neural::{mlp_backward, mlp_forward, MlpParams, OutputActivation};
use mfc_core::seeding;
use mfc_core::simplex::{ActionProfile, DistributionVector, SimplexGrid};
use rand::Rng;
use std::sync::OnceLock;
use std::time::Instant;

/// Base seed of the whole suite; sub-seeds derive per criterion.
pub const SUITE_SEED: u64 = 42;

#[derive(Debug, Clone)]
pub struct SubCheck {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    /// `<=`, `>=`, `in` (threshold is the midpoint of the stated window), or
    /// `reported` for non-gating numbers.
    pub comparator: &'static str,
    pub pass: bool,
}

impl SubCheck {
    fn le(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            name,
            measured,
            threshold,
            comparator: "<=",
            pass: measured <= threshold,
        }
    }

    fn ge(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            name,
            measured,
            threshold,
            comparator: ">=",
            pass: measured >= threshold,
        }
    }

    fn window(name: &'static str, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name,
            measured,
            threshold: 0.5 * (lo + hi),
            comparator: "in",
            pass: (lo..=hi).contains(&measured),
        }
    }

    fn reported(name: &'static str, measured: f64) -> Self {
        Self {
            name,
            measured,
            threshold: f64::NAN,
            comparator: "reported",
            pass: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub provenance: &'static str,
    pub slow: bool,
    pub checks: Vec<SubCheck>,
    pub runtime_s: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let details: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{} {} {} {} [{}]",
                    c.name,
                    c.measured,
                    c.comparator,
                    c.threshold,
                    if c.pass { "ok" } else { "FAIL" }
                )
            })
            .collect();
        format!(
            "criterion {}: {} — {} ({:.1}s) {}",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.runtime_s,
            details.join("; ")
        )
    }
}

fn finish(
    id: usize,
    name: &'static str,
    provenance: &'static str,
    slow: bool,
    checks: Vec<SubCheck>,
    started: Instant,
) -> CriterionResult {
    CriterionResult {
        id,
        name,
        provenance,
        slow,
        checks,
        runtime_s: started.elapsed().as_secs_f64(),
    }
}

// The shared tabular instance: two states, two actions, logistic transition,
// gamma 1/2, no noise.
const GAMMA: f64 = 0.5;

fn instance_env() -> LogisticEnv {
    LogisticEnv::new(LogisticParams::default()).expect("default instance")
}

fn exact_table(resolution: usize, tol: f64) -> (SimplexGrid, mfc_core::dp::ExactQTable) {
    let env = instance_env();
    let grid = SimplexGrid::enumerate(2, resolution).expect("grid");
    let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).expect("mdp");
    let (q, _, _) = mdp.exact_q(GAMMA, tol).expect("exact q");
    (grid, q)
}

/// Trained table of criterion 2, shared with criterion 4.
fn trained_table() -> &'static (LearnedQTable, mfc_core::dp::ExactQTable) {
    static FIXTURE: OnceLock<(LearnedQTable, mfc_core::dp::ExactQTable)> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let env = instance_env();
        let grid = SimplexGrid::enumerate(2, 8).expect("grid");
        let params = MfqParams {
            gamma: GAMMA,
            kappa: 0.7,
            episodes: 5000,
            sweep: SweepOrder::Lexicographic,
            update: UpdateMode::Snapshot,
        };
        let mut rng = seeding::rng_for(SUITE_SEED, "acceptance-mfq");
        let learned = mfq::train(&env, &grid, &params, &mut rng).expect("mfq train");
        let (_, exact) = exact_table(8, 1e-10);
        (learned, exact)
    })
}

/// Criterion 1: the state-action fixed point is consistent with the value
/// fixed point, and value iteration agrees with an independent horizon-40
/// backward induction within the truncation bound.
pub fn criterion_1_oracle_self_consistency() -> CriterionResult {
    let started = Instant::now();
    let env = instance_env();
    let grid = SimplexGrid::enumerate(2, 8).expect("grid");
    let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).expect("mdp");

    let tol = 1e-8;
    let (v, _, _) = mdp.value_iteration(GAMMA, tol).expect("vi");
    let (q, _, _) = mdp.exact_q(GAMMA, tol).expect("exact q");
    let consistency = q.max_values().sup_distance(&v);

    // Independent oracle: horizon-40 backward induction straight from the
    // environment map, no shared transition cache.
    let profiles = mfc_core::simplex::enumerate_action_profiles(2, 2).expect("profiles");
    let mut v40 = vec![0.0f64; grid.len()];
    for _ in 0..40 {
        let mut next = vec![f64::NEG_INFINITY; grid.len()];
        for (gi, point) in grid.points().iter().enumerate() {
            for profile in &profiles {
                let out = env
                    .step(point, profile, &env.neutral_noise())
                    .expect("step");
                let proj = grid.project(&out.next_state).expect("project");
                let value = out.reward + GAMMA * v40[proj];
                if value > next[gi] {
                    next[gi] = value;
                }
            }
        }
        v40 = next;
    }
    let (v_tight, _, _) = mdp.value_iteration(GAMMA, 1e-12).expect("vi tight");
    let diff = v_tight.sup_distance(&ValueTable { values: v40 });
    let c_f = env.reward_bound().expect("bound");
    let truncation = GAMMA.powi(40) * c_f / (1.0 - GAMMA);

    finish(
        1,
        "oracle self-consistency",
        "property-based",
        false,
        vec![
            SubCheck::le("max_q_vs_value", consistency, 2.0 * tol),
            SubCheck::le("vi_vs_horizon40", diff, truncation),
        ],
        started,
    )
}

/// Criterion 2: tabular learning converges to the exact table.
pub fn criterion_2_mfq_convergence() -> CriterionResult {
    let started = Instant::now();
    let (learned, exact) = trained_table();
    let err = learned.sup_distance_to(exact).expect("distance");
    finish(
        2,
        "tabular learner matches the oracle",
        "property-based",
        false,
        vec![SubCheck::le("sup_error", err, 1e-2)],
        started,
    )
}

/// Criterion 3: the table error against the finest grid shrinks by at least
/// 1.5x per resolution doubling.
pub fn criterion_3_projection_error_scaling() -> CriterionResult {
    let started = Instant::now();
    let (g4, q4) = exact_table(4, 1e-10);
    let (g8, q8) = exact_table(8, 1e-10);
    let (g16, q16) = exact_table(16, 1e-10);
    let probes: Vec<DistributionVector> = (0..=200)
        .map(|i| {
            let p = i as f64 / 200.0;
            DistributionVector::from_weights(vec![p, 1.0 - p], false).expect("probe")
        })
        .collect();
    let d4 = analysis::projection_refinement_distance((&g4, &q4), (&g16, &q16), &probes)
        .expect("refinement");
    let d8 = analysis::projection_refinement_distance((&g8, &q8), (&g16, &q16), &probes)
        .expect("refinement");
    finish(
        3,
        "projection error scaling",
        "property-based",
        false,
        vec![
            SubCheck::reported("distance_ns4_vs_ns16", d4),
            SubCheck::reported("distance_ns8_vs_ns16", d8),
            SubCheck::ge("shrink_factor_per_doubling", d4 / d8, 1.5),
        ],
        started,
    )
}

/// Criterion 4: the softmax action bound holds on the trained table.
pub fn criterion_4_softmax_action_bound() -> CriterionResult {
    let started = Instant::now();
    let (learned, exact) = trained_table();
    let mut checks = Vec::new();
    for (name, tau) in [
        ("margin_tau_1", 1.0),
        ("margin_tau_10", 10.0),
        ("margin_tau_100", 100.0),
    ] {
        let report = softmax_action_check(learned, exact, tau).expect("check");
        // positive margin == the measured distance stays under the bound
        checks.push(SubCheck::ge(
            name,
            report.bound + 1e-9 - report.max_distance,
            0.0,
        ));
    }
    checks.push(SubCheck::reported("action_gap", action_gap(exact)));
    finish(
        4,
        "softmax action bound",
        "paper-sourced",
        false,
        checks,
        started,
    )
}

fn swarm_env(n: usize) -> SwarmEnv {
    let h = 1.0 / n as f64;
    SwarmEnv::new(SwarmParams {
        n_points: n,
        dt: 0.45 * h * h,
        sigma: 1.0,
        ..SwarmParams::default()
    })
    .expect("swarm env")
}

/// Criterion 5: the closed-form pair is stationary for the scheme up to a
/// bounded residual that halves per grid doubling, and a 500-step rollout
/// from a random Gaussian start relaxes to the closed-form density.
pub fn criterion_5_swarm_benchmark() -> CriterionResult {
    let started = Instant::now();
    let mut residuals = Vec::new();
    for n in [128usize, 256] {
        let env = swarm_env(n);
        let m_star = env.tabulated_stationary_density();
        let a_star = ActionProfile::Continuous(env.tabulated_optimal_velocity());
        let out = env
            .step(&m_star, &a_star, &env.neutral_noise())
            .expect("step");
        let diff: Vec<f64> = out
            .next_state
            .weights()
            .iter()
            .zip(m_star.weights())
            .map(|(a, b)| a - b)
            .collect();
        residuals.push(grid_l2_norm(&diff, env.cell_width()) / env.params().dt);
    }

    let env = swarm_env(128);
    let mut rng = seeding::rng_for(SUITE_SEED, "acceptance-swarm");
    let mean = rng.gen::<f64>();
    let std = 0.05 + 0.15 * rng.gen::<f64>();
    let mut state = analysis::gaussian_density_on(&env, mean, std).expect("start");
    let a_star = ActionProfile::Continuous(env.tabulated_optimal_velocity());
    for _ in 0..500 {
        state = env
            .step(&state, &a_star, &env.neutral_noise())
            .expect("step")
            .next_state;
    }
    let m_star = env.tabulated_stationary_density();
    let diff: Vec<f64> = state
        .weights()
        .iter()
        .zip(m_star.weights())
        .map(|(a, b)| a - b)
        .collect();
    let density_error = grid_l2_norm(&diff, env.cell_width());

    finish(
        5,
        "swarm analytic benchmark",
        "paper-sourced",
        false,
        vec![
            SubCheck::le("residual_over_dt_n128", residuals[0], 10.0),
            SubCheck::window(
                "residual_halving_ratio",
                residuals[0] / residuals[1],
                1.5,
                2.5,
            ),
            // Known-unattainable with the first-order scheme; see module docs.
            SubCheck::le("rollout_density_error", density_error, 0.05),
        ],
        started,
    )
}

/// Fixed desk-scale swarm training configuration for criterion 6.
pub fn swarm_training_setup() -> (SwarmEnv, DdpgConfig) {
    let env = SwarmEnv::new(SwarmParams {
        n_points: 8,
        dt: 0.007,
        sigma: 1.0,
        ..SwarmParams::default()
    })
    .expect("swarm env");
    let config = DdpgConfig {
        episodes: 3000,
        episode_length: 200,
        minibatch: 16,
        tau: 0.01,
        gamma: 0.9,
        action_noise_std: 0.02f64.sqrt(),
        actor_lr: 1e-4,
        critic_lr: 1e-4,
        buffer_capacity: 100_000,
        buffer_reset_per_episode: false,
        hidden_width: 64,
        action_low: -7.0,
        action_high: 7.0,
        initial_state: InitialStateSampler::GaussianDensity {
            std_lo: 0.05,
            std_hi: 0.2,
        },
    };
    (env, config)
}

/// Criterion 6: the actor-critic control earns at least 90% of the
/// closed-form control's average reward over a 500-step rollout; the
/// control error against the closed form is reported.
pub fn criterion_6_ddpg_swarm() -> CriterionResult {
    let started = Instant::now();
    let (env, config) = swarm_training_setup();
    let mut rng = seeding::rng_for(SUITE_SEED, "acceptance-ddpg-swarm");
    let artifacts = ddpg::train(&env, &config, &mut rng).expect("ddpg train");

    let start = analysis::gaussian_density_on(&env, 0.6, 0.12).expect("start");
    let j_star =
        analysis::rollout_mean_reward(&env, &env.tabulated_optimal_velocity(), &start, 500)
            .expect("reference rollout");
    let policy = ActorPolicy {
        actor: &artifacts.actor,
        action_low: config.action_low,
        action_high: config.action_high,
    };
    let bench = analysis::swarm_benchmark(&env, &policy, &start, 500).expect("benchmark");
    let j_learned = bench.rollout_mean_reward;

    // One-sided: the learned control must reach at least the benchmark value
    // minus 10% of its magnitude. Outperforming the tabulated profile is
    // possible (and observed) because that profile is only optimal in the
    // continuum limit, not for the discretized dynamics.
    finish(
        6,
        "actor-critic on swarm motion",
        "paper-sourced",
        true,
        vec![
            SubCheck::reported("reference_mean_reward", j_star),
            SubCheck::ge(
                "learned_mean_reward",
                j_learned,
                j_star - 0.1 * j_star.abs(),
            ),
            SubCheck::reported("control_error_l2", bench.control_error),
        ],
        started,
    )
}

/// Fixed desk-scale cyber training configuration for criterion 7.
pub fn cyber_training_setup() -> (CyberEnv, DdpgConfig) {
    let env = CyberEnv::new(CyberParams::default()).expect("cyber env");
    let config = DdpgConfig {
        episodes: 600,
        episode_length: 50,
        minibatch: 16,
        tau: 0.01,
        gamma: 0.9,
        action_noise_std: 0.02f64.sqrt(),
        actor_lr: 1e-4,
        critic_lr: 1e-4,
        buffer_capacity: 100_000,
        buffer_reset_per_episode: false,
        hidden_width: 64,
        action_low: 0.0,
        action_high: 1.0,
        initial_state: InitialStateSampler::Dirichlet,
    };
    (env, config)
}

/// Criterion 7: the learned protection control drives the three reference
/// initial distributions to a common near-stationary distribution within ten
/// time units.
pub fn criterion_7_ddpg_cyber() -> CriterionResult {
    let started = Instant::now();
    let (env, config) = cyber_training_setup();
    let mut rng = seeding::rng_for(SUITE_SEED, "acceptance-ddpg-cyber");
    let artifacts = ddpg::train(&env, &config, &mut rng).expect("ddpg train");
    let policy = ActorPolicy {
        actor: &artifacts.actor,
        action_low: 0.0,
        action_high: 1.0,
    };
    let dt = env.params().dt;
    let steps_10 = (10.0 / dt).round() as usize;
    let steps_11 = (11.0 / dt).round() as usize;
    let starts = [
        vec![0.25, 0.25, 0.25, 0.25],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ];
    let mut mu10 = Vec::new();
    let mut mu11 = Vec::new();
    for start in &starts {
        let mut mu = DistributionVector::from_weights(start.clone(), true).expect("start");
        for step in 0..steps_11 {
            if step == steps_10 {
                mu10.push(mu.clone());
            }
            let action = policy.action(&mu).expect("action");
            mu = env
                .step(&mu, &action, &env.neutral_noise())
                .expect("step")
                .next_state;
        }
        mu11.push(mu);
    }
    let mut pairwise = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let d = mu10[i]
                .weights()
                .iter()
                .zip(mu10[j].weights())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            pairwise = pairwise.max(d);
        }
    }
    let stationarity = mu10
        .iter()
        .zip(&mu11)
        .map(|(a, b)| {
            a.weights()
                .iter()
                .zip(b.weights())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        })
        .fold(0.0f64, f64::max);
    finish(
        7,
        "actor-critic on the protection model",
        "paper-sourced",
        true,
        vec![
            SubCheck::le("pairwise_terminal_distance", pairwise, 2e-2),
            SubCheck::le("one_unit_drift", stationarity, 5e-3),
        ],
        started,
    )
}

/// Criterion 8: analytic gradients against central finite differences over
/// 50 random network configurations.
pub fn criterion_8_gradient_checks() -> CriterionResult {
    let started = Instant::now();
    let mut rng = seeding::rng_for(SUITE_SEED, "acceptance-gradcheck");
    let widths = [2usize, 8, 32];
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let width = widths[trial % widths.len()];
        let input_dim = 1 + trial % 5;
        let out_dim = 1 + trial % 3;
        let output = if trial % 2 == 0 {
            OutputActivation::Identity
        } else {
            OutputActivation::TanhBox { lo: -2.0, hi: 2.0 }
        };
        let params =
            MlpParams::feedforward(input_dim, width, out_dim, output, &mut rng).expect("net");
        let x: Vec<f64> = (0..input_dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let upstream: Vec<f64> = (0..out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scalar = |p: &MlpParams, x: &[f64]| -> f64 {
            mlp_forward(p, x)
                .expect("forward")
                .iter()
                .zip(&upstream)
                .map(|(o, u)| o * u)
                .sum()
        };
        let (grads, input_grad) = mlp_backward(&params, &x, &upstream).expect("backward");
        let eps = 1e-5;
        let mut push = |analytic: f64, numeric: f64| {
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / denom);
        };
        for k in 0..params.layers.len() {
            for r in 0..params.layers[k].output_dim() {
                for c in 0..params.layers[k].input_dim() {
                    let mut plus = params.clone();
                    let mut minus = params.clone();
                    plus.layers[k].weights[r][c] += eps;
                    minus.layers[k].weights[r][c] -= eps;
                    push(
                        grads.layers[k].weights[r][c],
                        (scalar(&plus, &x) - scalar(&minus, &x)) / (2.0 * eps),
                    );
                }
                let mut plus = params.clone();
                let mut minus = params.clone();
                plus.layers[k].biases[r] += eps;
                minus.layers[k].biases[r] -= eps;
                push(
                    grads.layers[k].biases[r],
                    (scalar(&plus, &x) - scalar(&minus, &x)) / (2.0 * eps),
                );
            }
        }
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += eps;
            xm[i] -= eps;
            push(
                input_grad[i],
                (scalar(&params, &xp) - scalar(&params, &xm)) / (2.0 * eps),
            );
        }
    }
    finish(
        8,
        "gradient checks",
        "property-based",
        false,
        vec![SubCheck::le("max_relative_error", worst, 1e-4)],
        started,
    )
}

/// Criterion 9: mass conservation of both simulators over 1000 random steps.
pub fn criterion_9_conservation() -> CriterionResult {
    let started = Instant::now();
    let mut rng = seeding::rng_for(SUITE_SEED, "acceptance-conservation");

    let cyber = CyberEnv::new(CyberParams::default()).expect("cyber env");
    let mut worst_cyber = 0.0f64;
    for _ in 0..1000 {
        let raw: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let mu = DistributionVector::from_weights(raw, false).expect("mu");
        let action = ActionProfile::Discrete((0..4).map(|_| rng.gen_range(0..2)).collect());
        let out = cyber
            .step(&mu, &action, &cyber.neutral_noise())
            .expect("step");
        worst_cyber = worst_cyber.max((out.next_state.weights().iter().sum::<f64>() - 1.0).abs());
    }

    let swarm = SwarmEnv::new(SwarmParams {
        n_points: 32,
        dt: 2e-4,
        ..SwarmParams::default()
    })
    .expect("swarm env");
    let mut worst_swarm = 0.0f64;
    for _ in 0..1000 {
        let raw: Vec<f64> = (0..32).map(|_| rng.gen::<f64>() + 0.01).collect();
        let m = DistributionVector::density(raw, swarm.cell_width()).expect("density");
        let action = ActionProfile::Continuous((0..32).map(|_| rng.gen_range(-6.0..6.0)).collect());
        let next = swarm
            .step_raw(&m, &action, &swarm.neutral_noise())
            .expect("raw step");
        let mass: f64 = next.iter().sum::<f64>() * swarm.cell_width();
        worst_swarm = worst_swarm.max((mass - 1.0).abs());
    }

    finish(
        9,
        "conservation suite",
        "property-based",
        false,
        vec![
            SubCheck::le("cyber_mass_drift", worst_cyber, 1e-12),
            SubCheck::le("swarm_mass_drift_pre_renormalization", worst_swarm, 1e-10),
        ],
        started,
    )
}

/// Run the whole suite (slow gates optional) in criterion order.
pub fn run_suite(include_slow: bool) -> Vec<CriterionResult> {
    let mut results = vec![
        criterion_1_oracle_self_consistency(),
        criterion_2_mfq_convergence(),
        criterion_3_projection_error_scaling(),
        criterion_4_softmax_action_bound(),
        criterion_5_swarm_benchmark(),
    ];
    if include_slow {
        results.push(criterion_6_ddpg_swarm());
        results.push(criterion_7_ddpg_cyber());
    }
    results.push(criterion_8_gradient_checks());
    results.push(criterion_9_conservation());
    results
}
