//! End-to-end runner checks: artifacts exist with the documented columns,
//! deterministic commands reproduce byte-identical outputs, and configuration
//! errors surface with line diagnostics and the right failure class.

use mfc_cli::config::RawConfig;
use mfc_cli::runners::{self, CliError};
use std::fs;
use std::path::Path;

fn oracle_config(out_dir: &Path) -> String {
    format!(
        "[run]\nseed = 11\nout_dir = {}\n[env]\nkind = logistic\n[oracle]\nresolution = 6\ngamma = 0.5\ntol = 1e-9\n",
        out_dir.display()
    )
}

#[test]
fn oracle_writes_consistent_tables() {
    let dir = tempfile::tempdir().unwrap();
    let raw = RawConfig::parse(&oracle_config(dir.path())).unwrap();
    let files = runners::run_oracle(&raw).unwrap();
    assert_eq!(files.len(), 4);
    let summary = fs::read_to_string(dir.path().join("oracle_summary.csv")).unwrap();
    assert!(summary.starts_with("# tool_version="));
    let mut lines = summary.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap();
    assert!(header.starts_with("grid_points,profiles,gamma,tol"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    // max_q_vs_value is the final column: consistency within 2 * tol
    let consistency: f64 = row.last().unwrap().parse().unwrap();
    assert!(consistency <= 2e-9, "V vs max Q drift {consistency}");

    // gamma = 0: the stored table equals the one-step rewards
    let cfg0 = oracle_config(dir.path()).replace("gamma = 0.5", "gamma = 0.0");
    let raw0 = RawConfig::parse(&cfg0).unwrap();
    runners::run_oracle(&raw0).unwrap();
    let table = mfc_core::io::load_qtable(&dir.path().join("oracle_qtable.csv")).unwrap();
    let env = mfc_core::envs::LogisticEnv::new(mfc_core::envs::LogisticParams::default()).unwrap();
    let grid = mfc_core::simplex::SimplexGrid::enumerate(2, 6).unwrap();
    let profiles = mfc_core::simplex::enumerate_action_profiles(2, 2).unwrap();
    for (gi, point) in grid.points().iter().enumerate() {
        for (pi, profile) in profiles.iter().enumerate() {
            let r = env.reward(point, profile).unwrap();
            assert!((table.row(gi)[pi] - r).abs() < 1e-14);
        }
    }
}

#[test]
fn oracle_reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    // identical config content except the out_dir line, which we exclude by
    // hashing file contents only
    let raw_a = RawConfig::parse(&oracle_config(dir_a.path())).unwrap();
    runners::run_oracle(&raw_a).unwrap();
    let raw_b = RawConfig::parse(&oracle_config(dir_a.path())).unwrap();
    runners::run_oracle(&raw_b).unwrap();
    let first = fs::read(dir_a.path().join("oracle_qtable.csv")).unwrap();
    // rerun into the same directory: bytes must match exactly
    let again = fs::read(dir_a.path().join("oracle_qtable.csv")).unwrap();
    assert_eq!(first, again);
    drop(dir_b);
}

#[test]
fn mfq_learning_curve_tracks_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let oracle_raw = RawConfig::parse(&oracle_config(dir.path())).unwrap();
    runners::run_oracle(&oracle_raw).unwrap();
    let config = format!(
        "[run]\nseed = 3\nout_dir = {out}\n[env]\nkind = logistic\n[mfq]\nresolution = 6\ngamma = 0.5\nkappa = 0.7\nepisodes = 400\noracle_table = {out}/oracle_qtable.csv\n",
        out = dir.path().display()
    );
    let raw = RawConfig::parse(&config).unwrap();
    let files = runners::run_mfq(&raw).unwrap();
    assert!(files.iter().any(|f| f.ends_with("mfq_curve.csv")));
    let curve = fs::read_to_string(dir.path().join("mfq_curve.csv")).unwrap();
    let rows: Vec<&str> = curve.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "episode,sup_error_vs_oracle,mean_td_magnitude");
    assert_eq!(rows.len(), 401);
    let first_err: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    let last_err: f64 = rows[400].split(',').nth(1).unwrap().parse().unwrap();
    assert!(
        last_err < first_err,
        "no learning: {first_err} -> {last_err}"
    );
    assert!(last_err < 1e-2);

    // determinism: same seed, same bytes
    let before = fs::read(dir.path().join("mfq_qtable.csv")).unwrap();
    runners::run_mfq(&raw).unwrap();
    let after = fs::read(dir.path().join("mfq_qtable.csv")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn mfq_missing_oracle_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "[run]\nseed = 3\nout_dir = {out}\n[env]\nkind = logistic\n[mfq]\nresolution = 6\nepisodes = 5\noracle_table = {out}/nope.csv\n",
        out = dir.path().display()
    );
    let raw = RawConfig::parse(&config).unwrap();
    match runners::run_mfq(&raw) {
        Err(CliError::Config(msg)) => assert!(msg.contains("does not exist"), "{msg}"),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn oracle_rejects_swarm_env() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "[run]\nseed = 1\nout_dir = {}\n[env]\nkind = swarm\nn_points = 16\ndt = 0.0005\n[oracle]\nresolution = 4\n",
        dir.path().display()
    );
    let raw = RawConfig::parse(&config).unwrap();
    assert!(matches!(
        runners::run_oracle(&raw),
        Err(CliError::Config(_))
    ));
}

#[test]
fn ddpg_cyber_emits_replays_that_stay_on_the_simplex() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "[run]\nseed = 5\nout_dir = {}\n[env]\nkind = cyber\n[ddpg]\nepisodes = 4\nepisode_length = 25\nhidden_width = 16\nbuffer_reset_per_episode = false\n",
        dir.path().display()
    );
    let raw = RawConfig::parse(&config).unwrap();
    let files = runners::run_ddpg(&raw).unwrap();
    for name in [
        "ddpg_actor.csv",
        "ddpg_critic.csv",
        "ddpg_log.csv",
        "cyber_replay_test1.csv",
        "cyber_replay_test2.csv",
        "cyber_replay_test3.csv",
    ] {
        assert!(
            files.iter().any(|f| f.ends_with(name)),
            "missing artifact {name}"
        );
    }
    for test in 1..=3 {
        let replay =
            fs::read_to_string(dir.path().join(format!("cyber_replay_test{test}.csv"))).unwrap();
        let mut rows = replay.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(rows.next().unwrap(), "t,mu_di,mu_ds,mu_ui,mu_us");
        let mut count = 0;
        for row in rows {
            let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            let mass: f64 = cells[1..].iter().sum();
            assert!((mass - 1.0).abs() <= 1e-9, "row mass {mass}");
            count += 1;
        }
        assert_eq!(count, 101); // 10 time units at dt = 0.1, inclusive
    }
    // the checkpoint loads back and drives the evaluate command
    let eval_config = format!(
        "[run]\nseed = 5\nout_dir = {out}\n[env]\nkind = cyber\n[evaluate]\npolicy = actor:{out}/ddpg_actor.csv\ngamma = 0.9\nhorizon = 30\nmu0 = uniform\n",
        out = dir.path().display()
    );
    let raw = RawConfig::parse(&eval_config).unwrap();
    let files = runners::run_evaluate(&raw).unwrap();
    let text = fs::read_to_string(&files[0]).unwrap();
    let row = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    let value: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!(
        value.is_finite() && value <= 0.0,
        "cyber rewards are costs, got {value}"
    );
}

#[test]
fn ddpg_swarm_emits_density_and_control_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "[run]\nseed = 5\nout_dir = {}\n[env]\nkind = swarm\nn_points = 8\ndt = 0.007\n[ddpg]\nepisodes = 3\nepisode_length = 20\nhidden_width = 16\ncheckpoint_episodes = 2\nrollout_steps = 50\n",
        dir.path().display()
    );
    let raw = RawConfig::parse(&config).unwrap();
    let files = runners::run_ddpg(&raw).unwrap();
    for name in [
        "swarm_control_ep2.csv",
        "swarm_density_ep2.csv",
        "swarm_control_final.csv",
        "swarm_density_final.csv",
    ] {
        assert!(
            files.iter().any(|f| f.ends_with(name)),
            "missing artifact {name}"
        );
    }
    let control = fs::read_to_string(dir.path().join("swarm_control_final.csv")).unwrap();
    let rows: Vec<&str> = control.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,velocity");
    assert_eq!(rows.len(), 9);
}

#[test]
fn evaluate_optimal_velocity_beats_zero_control() {
    let dir = tempfile::tempdir().unwrap();
    let evaluate = |policy: &str| -> f64 {
        let config = format!(
            "[run]\nseed = 2\nout_dir = {}\n[env]\nkind = swarm\nn_points = 32\ndt = 0.0004\n[evaluate]\npolicy = {policy}\ngamma = 0.99\nhorizon = 400\nmu0 = stationary\n",
            dir.path().display()
        );
        let raw = RawConfig::parse(&config).unwrap();
        let files = runners::run_evaluate(&raw).unwrap();
        let text = fs::read_to_string(&files[0]).unwrap();
        let row = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
        row.split(',').next().unwrap().parse().unwrap()
    };
    // a checkpoint with all-zero parameters is the zero-velocity policy
    let mut rng = mfc_core::seeding::rng_for(0, "zero-actor");
    let mut zero = mfc_core::neural::MlpParams::feedforward(
        32,
        8,
        32,
        mfc_core::neural::OutputActivation::Identity,
        &mut rng,
    )
    .unwrap();
    for layer in &mut zero.layers {
        layer.biases.iter_mut().for_each(|b| *b = 0.0);
        layer
            .weights
            .iter_mut()
            .for_each(|row| row.iter_mut().for_each(|w| *w = 0.0));
    }
    let zero_path = dir.path().join("zero_actor.csv");
    mfc_core::io::save_mlp(&zero_path, &zero).unwrap();

    let v_star = evaluate("optimal_velocity");
    let v_zero = evaluate(&format!("actor:{}", zero_path.display()));
    assert!(v_star.is_finite() && v_zero.is_finite());
    // letting the density spread out costs far more than the closed-form
    // velocity profile does
    assert!(
        v_star > v_zero + 10.0,
        "optimal {v_star} vs zero-control {v_zero}"
    );
}

#[test]
fn acceptance_fast_suite_reports_the_known_red_gate() {
    // The fast gates all pass except gate 5, whose relaxation sub-check is
    // unattainable for the first-order scheme (see the README); the suite
    // must report exactly that, not silently skip it.
    let results = mfc_cli::acceptance::run_suite(false);
    let ids: Vec<usize> = results.iter().map(|r| r.id).collect();
    assert_eq!(ids, vec![1, 2, 3, 4, 5, 8, 9]);
    for r in &results {
        println!("{}", r.summary());
        if r.id == 5 {
            assert!(!r.passed(), "gate 5 unexpectedly passed: {}", r.summary());
            // the two attainable sub-checks hold; only the relaxation fails
            assert!(r.checks[0].pass && r.checks[1].pass && !r.checks[2].pass);
        } else {
            assert!(r.passed(), "{}", r.summary());
        }
    }
}

#[test]
fn bound_command_reports_formulas() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "[run]\nseed = 1\nout_dir = {}\n[bound]\nepsilon = 0.01\ngamma = 0.5\nl_v = 1\nl_phi = 1\nl_f = 1\neps_s = 0.1\nt_cov = 36\nkappa = 0.7\ndelta = 0.05\nv_max = 2\nk_a = 0.04\ncard_grid = 9\ncard_profiles = 4\n",
        dir.path().display()
    );
    let raw = RawConfig::parse(&config).unwrap();
    runners::run_bound(&raw).unwrap();
    let text = fs::read_to_string(dir.path().join("bound.csv")).unwrap();
    let get = |name: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_else(|| panic!("missing {name}"))
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("table_error_bound") - 0.41).abs() < 1e-12);
    assert!((get("beta") - 0.25).abs() < 1e-15);
    assert!(get("episode_count_order") > 1.0);
    assert!(get("softmax_action_bound_min") <= get("softmax_action_bound_at_tau_1") + 1e-12);
}
