//! Cross-module scenarios: empirical regularity probes on both simulators,
//! dynamic programming under a nontrivial noise panel, and the full
//! table-learning pipeline against the oracle.

use mfc_core::analysis::{lipschitz_probe, uniform_simplex_sample};
use mfc_core::dp::{NoisePanel, ProjectedMdp};
use mfc_core::envs::{
    CommonNoiseSample, CyberEnv, CyberParams, Environment, LogisticEnv, LogisticParams, SwarmEnv,
    SwarmParams,
};
use mfc_core::mfq::{self, MfqParams, SweepOrder, UpdateMode};
use mfc_core::seeding;
use mfc_core::simplex::{
    enumerate_action_profiles, ActionProfile, DistributionVector, SimplexGrid,
};

#[test]
fn cyber_transition_probe_reports_finite_constants() {
    let env = CyberEnv::new(CyberParams::default()).unwrap();
    let actions = enumerate_action_profiles(4, 2).unwrap();
    let panel = NoisePanel::deterministic(&env);
    let mut rng = seeding::rng_for(0, "probe-cyber");
    let (l_phi, l_f) = lipschitz_probe(
        &env,
        &panel,
        &actions,
        || uniform_simplex_sample(4, &mut rng),
        300,
    )
    .unwrap();
    assert!(l_phi.is_finite() && l_phi > 0.0, "transition ratio {l_phi}");
    assert!(l_f.is_finite() && l_f > 0.0, "reward ratio {l_f}");
    // the one-step map is close to the identity at dt = 0.1
    assert!(l_phi < 2.0, "transition ratio {l_phi}");
}

#[test]
fn swarm_transition_probe_reports_finite_constants() {
    let n = 16;
    let env = SwarmEnv::new(SwarmParams {
        n_points: n,
        dt: 1e-3,
        ..SwarmParams::default()
    })
    .unwrap();
    let velocities = env.tabulated_optimal_velocity();
    let actions = vec![
        ActionProfile::Continuous(vec![0.0; n]),
        ActionProfile::Continuous(velocities),
    ];
    let panel = NoisePanel::deterministic(&env);
    let mut rng = seeding::rng_for(0, "probe-swarm");
    let h = 1.0 / n as f64;
    let (l_phi, l_f) = lipschitz_probe(
        &env,
        &panel,
        &actions,
        || {
            let raw: Vec<f64> = (0..n)
                .map(|_| rand::Rng::gen_range(&mut rng, 0.2..3.0))
                .collect();
            DistributionVector::density(raw, h)
        },
        200,
    )
    .unwrap();
    assert!(l_phi.is_finite() && l_phi > 0.0);
    assert!(l_f.is_finite() && l_f > 0.0);
}

#[test]
fn dp_with_two_point_noise_panel_is_deterministic_and_contracts() {
    // Lognormal factors 0.8 / 1.25 with equal weight: a discrete surrogate
    // for the cyber common noise inside the oracle.
    let env = CyberEnv::new(CyberParams {
        dt: 0.1,
        ..CyberParams::default()
    })
    .unwrap();
    let grid = SimplexGrid::enumerate(4, 3).unwrap();
    let panel = NoisePanel::from_samples(vec![
        (CommonNoiseSample::new(0.8), 0.5),
        (CommonNoiseSample::new(1.25), 0.5),
    ])
    .unwrap();
    let mdp = ProjectedMdp::new(&env, &grid, panel.clone()).unwrap();
    let (v1, iters, _) = mdp.value_iteration(0.8, 1e-9).unwrap();
    assert!(iters > 1);
    let mdp2 = ProjectedMdp::new(&env, &grid, panel).unwrap();
    let (v2, _, _) = mdp2.value_iteration(0.8, 1e-9).unwrap();
    assert_eq!(v1.values, v2.values, "noisy DP must stay deterministic");
    // values bounded by the reward bound over the horizon
    let cap = env.reward_bound().unwrap() / (1.0 - 0.8);
    assert!(v1.values.iter().all(|v| v.abs() <= cap + 1e-9));
}

#[test]
fn learned_greedy_policy_attains_the_oracle_value() {
    // Train the table, extract the greedy policy, and roll it out on the
    // projected dynamics: the realized return matches the oracle value.
    let env = LogisticEnv::new(LogisticParams::default()).unwrap();
    let grid = SimplexGrid::enumerate(2, 8).unwrap();
    let gamma = 0.5;
    let mdp = ProjectedMdp::new(&env, &grid, NoisePanel::deterministic(&env)).unwrap();
    let (exact, _, _) = mdp.exact_q(gamma, 1e-10).unwrap();
    let params = MfqParams {
        gamma,
        kappa: 0.7,
        episodes: 4000,
        sweep: SweepOrder::Lexicographic,
        update: UpdateMode::Snapshot,
    };
    let mut rng = seeding::rng_for(1, "pipeline");
    let learned = mfq::train(&env, &grid, &params, &mut rng).unwrap();
    let policy = mfc_core::dp::GridPolicy {
        grid: &grid,
        profiles: mdp.profiles(),
        assignment: mfq::greedy_policy(&learned),
    };
    let v = exact.max_values();
    for gi in 0..grid.len() {
        let eval = mfc_core::dp::evaluate_policy(
            &env,
            &policy,
            grid.point(gi),
            gamma,
            60,
            1,
            &mut rng,
            Some(&grid),
        )
        .unwrap();
        assert!(
            (eval.value - v.values[gi]).abs() <= 1e-5,
            "point {gi}: greedy return {} vs oracle value {}",
            eval.value,
            v.values[gi]
        );
    }
}
