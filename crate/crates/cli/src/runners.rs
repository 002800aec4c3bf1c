//! Command implementations: each consumes the parsed configuration, runs the
//! corresponding solver, and emits CSV artifacts with metadata headers.

use crate::config::{self, ConfigError, DdpgSection, EnvSpec, Mu0Spec, PolicySpec, RawConfig};
use crate::output::{fmt_f64, OutputWriter};
use mfc_core::analysis;
use mfc_core::ddpg::{self, ActorPolicy, DdpgConfig};
use mfc_core::dp::{evaluate_policy, GridPolicy, NoisePanel, Policy, ProjectedMdp};
use mfc_core::envs::{CyberEnv, Environment, LogisticEnv, SwarmEnv};
use mfc_core::io as table_io;
use mfc_core::mfq::{self, LearnedQTable, MfqParams};
use mfc_core::neural::OutputActivation;
use mfc_core::seeding;
use mfc_core::simplex::{
    enumerate_action_profiles, ActionProfile, DistributionVector, SimplexGrid,
};
use std::fmt;
use std::path::PathBuf;

/// Failure classes map onto process exit codes: configuration errors exit 1,
/// numerical/runtime errors exit 2, acceptance failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    AcceptanceFailed,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::AcceptanceFailed => write!(f, "acceptance suite reported failures"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<mfc_core::Error> for CliError {
    fn from(e: mfc_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

pub fn build_env(spec: &EnvSpec) -> Result<Box<dyn Environment>, CliError> {
    Ok(match spec {
        EnvSpec::Cyber(p) => Box::new(CyberEnv::new(p.clone())?),
        EnvSpec::Swarm(p) => Box::new(SwarmEnv::new(p.clone())?),
        EnvSpec::Logistic(p) => Box::new(LogisticEnv::new(p.clone())?),
    })
}

fn finite_env_or_config_error(spec: &EnvSpec, command: &str) -> Result<(), CliError> {
    if matches!(spec, EnvSpec::Swarm(_)) {
        return Err(CliError::Config(format!(
            "{command} needs a finite-state environment (cyber or logistic), got swarm"
        )));
    }
    Ok(())
}

/// Exact dynamic programming: writes the value table, the state-action table
/// (text + binary), and a run summary.
pub fn run_oracle(raw: &RawConfig) -> Result<Vec<PathBuf>, CliError> {
    let run = config::run_section(raw)?;
    let spec = config::env_section(raw)?;
    finite_env_or_config_error(&spec, "oracle")?;
    let oracle = config::oracle_section(raw)?;
    let env = build_env(&spec)?;
    let grid = SimplexGrid::enumerate(env.state_dim(), oracle.resolution)?;
    let mdp = ProjectedMdp::new(env.as_ref(), &grid, NoisePanel::deterministic(env.as_ref()))?;
    let (v, v_iters, v_resid) = mdp.value_iteration(oracle.gamma, oracle.tol)?;
    let (q, q_iters, q_resid) = mdp.exact_q(oracle.gamma, oracle.tol)?;

    let writer = OutputWriter::new(&run.out_dir, &raw.source, run.seed, "oracle")?;
    let mut files = Vec::new();

    let dim = env.state_dim();
    let weight_cols: Vec<String> = (0..dim).map(|i| format!("w{i}")).collect();
    let v_rows: Vec<String> = (0..grid.len())
        .map(|i| {
            let ws: Vec<String> = grid
                .point(i)
                .weights()
                .iter()
                .map(|w| fmt_f64(*w))
                .collect();
            format!("{i},{},{}", ws.join(","), fmt_f64(v.values[i]))
        })
        .collect();
    files.push(writer.write_csv(
        "oracle_vtable.csv",
        &format!("point,{},value", weight_cols.join(",")),
        &v_rows,
    )?);

    // the exact table is stored in the learned-table format (counts zero)
    let as_learned = LearnedQTable {
        num_profiles: q.num_profiles,
        values: q.values.clone(),
        visit_counts: vec![0; q.values.len()],
        episode: 0,
        gamma: oracle.gamma,
        kappa: 0.0,
        last_mean_td: 0.0,
    };
    files.push(writer.write_with_metadata(
        "oracle_qtable.csv",
        &table_io::qtable_to_string(&as_learned),
    )?);
    files.push(writer.write_binary("oracle_qtable.bin", &table_io::qtable_to_bytes(&as_learned))?);

    let consistency = q.max_values().sup_distance(&v);
    files.push(writer.write_csv(
        "oracle_summary.csv",
        "grid_points,profiles,gamma,tol,value_iterations,value_residual,q_iterations,q_residual,max_q_vs_value",
        &[format!(
            "{},{},{},{},{},{},{},{},{}",
            grid.len(),
            q.num_profiles,
            fmt_f64(oracle.gamma),
            fmt_f64(oracle.tol),
            v_iters,
            fmt_f64(v_resid),
            q_iters,
            fmt_f64(q_resid),
            fmt_f64(consistency)
        )],
    )?);
    Ok(files)
}

/// Tabular learning: writes the trained table and the learning curve.
pub fn run_mfq(raw: &RawConfig) -> Result<Vec<PathBuf>, CliError> {
    let run = config::run_section(raw)?;
    let spec = config::env_section(raw)?;
    finite_env_or_config_error(&spec, "mfq")?;
    let section = config::mfq_section(raw)?;
    let env = build_env(&spec)?;
    let grid = SimplexGrid::enumerate(env.state_dim(), section.resolution)?;

    let reference = match &section.oracle_table {
        None => None,
        Some(path) => {
            if !path.exists() {
                return Err(CliError::Config(format!(
                    "oracle_table {path:?} does not exist"
                )));
            }
            let table = table_io::load_qtable(path)?;
            if table.num_points() != grid.len() {
                return Err(CliError::Config(format!(
                    "oracle_table has {} points, the configured grid has {}",
                    table.num_points(),
                    grid.len()
                )));
            }
            Some(table)
        }
    };

    let params = MfqParams {
        gamma: section.gamma,
        kappa: section.kappa,
        episodes: section.episodes,
        sweep: section.sweep,
        update: section.update,
    };
    let mut rng = seeding::rng_for(run.seed, "mfq");
    let mut curve: Vec<String> = Vec::with_capacity(section.episodes);
    let table = mfq::train_with_callback(env.as_ref(), &grid, &params, &mut rng, |ep, t| {
        let sup = reference.as_ref().map(|r| {
            t.values
                .iter()
                .zip(&r.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        });
        curve.push(format!(
            "{ep},{},{}",
            sup.map(fmt_f64).unwrap_or_default(),
            fmt_f64(t.last_mean_td)
        ));
    })?;

    let writer = OutputWriter::new(&run.out_dir, &raw.source, run.seed, "mfq")?;
    let files = vec![
        writer.write_with_metadata("mfq_qtable.csv", &table_io::qtable_to_string(&table))?,
        writer.write_binary("mfq_qtable.bin", &table_io::qtable_to_bytes(&table))?,
        writer.write_csv(
            "mfq_curve.csv",
            "episode,sup_error_vs_oracle,mean_td_magnitude",
            &curve,
        )?,
    ];
    Ok(files)
}

/// Actor-critic training plus environment-specific replay artifacts.
pub fn run_ddpg(raw: &RawConfig) -> Result<Vec<PathBuf>, CliError> {
    let run = config::run_section(raw)?;
    let spec = config::env_section(raw)?;
    let section = config::ddpg_section(raw, &spec)?;
    let env = build_env(&spec)?;
    let config = DdpgConfig {
        episodes: section.episodes,
        episode_length: section.episode_length,
        minibatch: section.minibatch,
        tau: section.tau,
        gamma: section.gamma,
        action_noise_std: section.action_noise_std,
        actor_lr: section.actor_lr,
        critic_lr: section.critic_lr,
        buffer_capacity: section.buffer_capacity,
        buffer_reset_per_episode: section.buffer_reset_per_episode,
        hidden_width: section.hidden_width,
        action_low: section.action_low,
        action_high: section.action_high,
        initial_state: section.initial_state.clone(),
    };

    let writer = OutputWriter::new(&run.out_dir, &raw.source, run.seed, "ddpg")?;
    let mut files = Vec::new();
    let mut rng = seeding::rng_for(run.seed, "ddpg");

    let artifacts = ddpg::train_with_hook(
        env.as_ref(),
        &config,
        &mut rng,
        &section.checkpoint_episodes,
        |episode, actor| {
            if let EnvSpec::Swarm(p) = &spec {
                let swarm = SwarmEnv::new(p.clone())?;
                let tag = format!("ep{episode}");
                let out = write_swarm_profiles(&writer, &swarm, actor, &section, &tag, run.seed)
                    .map_err(|e| mfc_core::Error::Io(e.to_string()))?;
                files.extend(out);
            }
            Ok(())
        },
    )?;

    files.push(
        writer.write_with_metadata("ddpg_actor.csv", &table_io::mlp_to_string(&artifacts.actor))?,
    );
    files.push(writer.write_with_metadata(
        "ddpg_critic.csv",
        &table_io::mlp_to_string(&artifacts.critic),
    )?);
    let log_rows: Vec<String> = artifacts
        .log
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.episode,
                fmt_f64(r.mean_return),
                fmt_f64(r.critic_loss),
                fmt_f64(r.actor_objective),
                fmt_f64(r.wall_ms)
            )
        })
        .collect();
    files.push(writer.write_csv(
        "ddpg_log.csv",
        "episode,mean_return,critic_loss,actor_objective,wall_ms",
        &log_rows,
    )?);

    match &spec {
        EnvSpec::Cyber(p) => {
            let cyber = CyberEnv::new(p.clone())?;
            let steps = (section.replay_time_units / p.dt).round() as usize;
            let starts = [
                ("cyber_replay_test1.csv", vec![0.25, 0.25, 0.25, 0.25]),
                ("cyber_replay_test2.csv", vec![1.0, 0.0, 0.0, 0.0]),
                ("cyber_replay_test3.csv", vec![0.0, 0.0, 0.0, 1.0]),
            ];
            let policy = ActorPolicy {
                actor: &artifacts.actor,
                action_low: section.action_low,
                action_high: section.action_high,
            };
            for (name, start) in starts {
                let mut mu = DistributionVector::from_weights(start, true)?;
                let mut rows = Vec::with_capacity(steps + 1);
                for step in 0..=steps {
                    let w = mu.weights();
                    rows.push(format!(
                        "{},{},{},{},{}",
                        fmt_f64(step as f64 * p.dt),
                        fmt_f64(w[0]),
                        fmt_f64(w[1]),
                        fmt_f64(w[2]),
                        fmt_f64(w[3])
                    ));
                    if step < steps {
                        let action = policy.action(&mu)?;
                        mu = cyber.step(&mu, &action, &cyber.neutral_noise())?.next_state;
                    }
                }
                files.push(writer.write_csv(name, "t,mu_di,mu_ds,mu_ui,mu_us", &rows)?);
            }
        }
        EnvSpec::Swarm(p) => {
            let swarm = SwarmEnv::new(p.clone())?;
            files.extend(write_swarm_profiles(
                &writer,
                &swarm,
                &artifacts.actor,
                &section,
                "final",
                run.seed,
            )?);
        }
        EnvSpec::Logistic(_) => {}
    }
    Ok(files)
}

/// Density evolution and control profile for one actor snapshot.
fn write_swarm_profiles(
    writer: &OutputWriter,
    env: &SwarmEnv,
    actor: &mfc_core::neural::MlpParams,
    section: &DdpgSection,
    tag: &str,
    seed: u64,
) -> Result<Vec<PathBuf>, CliError> {
    let policy = ActorPolicy {
        actor,
        action_low: section.action_low,
        action_high: section.action_high,
    };
    let mut files = Vec::new();

    let m_star = env.tabulated_stationary_density();
    let control = policy.action(&m_star)?.values();
    let control_rows: Vec<String> = env
        .cell_centers()
        .iter()
        .zip(&control)
        .map(|(x, a)| format!("{},{}", fmt_f64(*x), fmt_f64(*a)))
        .collect();
    files.push(writer.write_csv(
        &format!("swarm_control_{tag}.csv"),
        "x,velocity",
        &control_rows,
    )?);

    // rollout from a seeded Gaussian start, densities sampled ten times
    let mut rng = seeding::rng_for(seed, "swarm-profile");
    let sampler = mfc_core::ddpg::InitialStateSampler::GaussianDensity {
        std_lo: 0.05,
        std_hi: 0.2,
    };
    let mut state = sampler.sample(env, &mut rng)?;
    let stride = (section.rollout_steps / 10).max(1);
    let mut rows = Vec::new();
    for step in 0..=section.rollout_steps {
        if step % stride == 0 || step == section.rollout_steps {
            for (x, m) in env.cell_centers().iter().zip(state.weights()) {
                rows.push(format!("{step},{},{}", fmt_f64(*x), fmt_f64(*m)));
            }
        }
        if step < section.rollout_steps {
            let action = policy.action(&state)?;
            state = env.step(&state, &action, &env.neutral_noise())?.next_state;
        }
    }
    files.push(writer.write_csv(&format!("swarm_density_{tag}.csv"), "step,x,density", &rows)?);
    Ok(files)
}

fn grid_for_points(dim: usize, points: usize) -> Option<SimplexGrid> {
    for resolution in 1..=512 {
        if let Ok(grid) = SimplexGrid::enumerate(dim, resolution) {
            match grid.len().cmp(&points) {
                std::cmp::Ordering::Equal => return Some(grid),
                std::cmp::Ordering::Greater => return None,
                std::cmp::Ordering::Less => continue,
            }
        }
    }
    None
}

/// Rollout evaluation of a stored policy.
pub fn run_evaluate(raw: &RawConfig) -> Result<Vec<PathBuf>, CliError> {
    let run = config::run_section(raw)?;
    let spec = config::env_section(raw)?;
    let section = config::evaluate_section(raw)?;
    let env = build_env(&spec)?;

    let mu0 = match &section.mu0 {
        Mu0Spec::Uniform => match &spec {
            EnvSpec::Swarm(p) => {
                DistributionVector::density(vec![1.0; p.n_points], 1.0 / p.n_points as f64)?
            }
            _ => DistributionVector::from_weights(vec![1.0; env.state_dim()], false)?,
        },
        Mu0Spec::Fixed(w) => match &spec {
            EnvSpec::Swarm(p) => DistributionVector::density(w.clone(), 1.0 / p.n_points as f64)?,
            _ => DistributionVector::from_weights(w.clone(), false)?,
        },
        Mu0Spec::Stationary => match &spec {
            EnvSpec::Swarm(p) => SwarmEnv::new(p.clone())?.tabulated_stationary_density(),
            _ => {
                return Err(CliError::Config(
                    "mu0 = stationary needs the swarm environment".into(),
                ))
            }
        },
    };
    if mu0.dim() != env.state_dim() {
        return Err(CliError::Config(format!(
            "mu0 has {} components, the environment has {}",
            mu0.dim(),
            env.state_dim()
        )));
    }

    let mut rng = seeding::rng_for(run.seed, "evaluate");
    let evaluation = match &section.policy {
        PolicySpec::QTable(path) => {
            if !path.exists() {
                return Err(CliError::Config(format!("qtable {path:?} does not exist")));
            }
            let table = table_io::load_qtable(path)?;
            let num_actions = match env.action_kind() {
                mfc_core::envs::ActionKind::Finite { num_actions } => num_actions,
                _ => {
                    return Err(CliError::Config(
                        "qtable policies need a finite-action environment".into(),
                    ))
                }
            };
            let grid = grid_for_points(env.state_dim(), table.num_points()).ok_or_else(|| {
                CliError::Config(format!(
                    "no grid of dimension {} has {} points",
                    env.state_dim(),
                    table.num_points()
                ))
            })?;
            let profiles = enumerate_action_profiles(env.state_dim(), num_actions)?;
            if profiles.len() != table.num_profiles {
                return Err(CliError::Config(format!(
                    "table has {} profiles, the environment enumerates {}",
                    table.num_profiles,
                    profiles.len()
                )));
            }
            let policy = GridPolicy {
                grid: &grid,
                profiles: &profiles,
                assignment: mfq::greedy_policy(&table),
            };
            evaluate_policy(
                env.as_ref(),
                &policy,
                &mu0,
                section.gamma,
                section.horizon,
                section.rollouts,
                &mut rng,
                None,
            )?
        }
        PolicySpec::Actor(path) => {
            if !path.exists() {
                return Err(CliError::Config(format!("actor {path:?} does not exist")));
            }
            let actor = table_io::load_mlp(path)?;
            let (lo, hi) = match actor.output {
                OutputActivation::TanhBox { lo, hi } => (lo, hi),
                OutputActivation::Identity => (f64::MIN, f64::MAX),
            };
            let policy = ActorPolicy {
                actor: &actor,
                action_low: lo,
                action_high: hi,
            };
            evaluate_policy(
                env.as_ref(),
                &policy,
                &mu0,
                section.gamma,
                section.horizon,
                section.rollouts,
                &mut rng,
                None,
            )?
        }
        PolicySpec::OptimalVelocity => {
            let EnvSpec::Swarm(p) = &spec else {
                return Err(CliError::Config(
                    "optimal_velocity needs the swarm environment".into(),
                ));
            };
            let swarm = SwarmEnv::new(p.clone())?;
            let velocities = swarm.tabulated_optimal_velocity();
            let policy = move |_: &DistributionVector| -> mfc_core::Result<ActionProfile> {
                Ok(ActionProfile::Continuous(velocities.clone()))
            };
            evaluate_policy(
                env.as_ref(),
                &policy,
                &mu0,
                section.gamma,
                section.horizon,
                section.rollouts,
                &mut rng,
                None,
            )?
        }
    };

    let writer = OutputWriter::new(&run.out_dir, &raw.source, run.seed, "evaluate")?;
    let path = writer.write_csv(
        "evaluate.csv",
        "value,truncation_bound,gamma,horizon,rollouts",
        &[format!(
            "{},{},{},{},{}",
            fmt_f64(evaluation.value),
            evaluation.truncation_bound.map(fmt_f64).unwrap_or_default(),
            fmt_f64(section.gamma),
            section.horizon,
            section.rollouts
        )],
    )?;
    Ok(vec![path])
}

/// Accuracy / episode-budget / softmax-action formulas for a parameter set.
/// Lipschitz constants of the transition and reward default to empirical
/// probe estimates (lower bounds) when omitted; the report marks the source
/// of each.
pub fn run_bound(raw: &RawConfig) -> Result<Vec<PathBuf>, CliError> {
    let run = config::run_section(raw)?;
    let section = config::bound_section(raw)?;
    let mut inputs = section.inputs.clone();

    if !section.l_phi_from_config || !section.l_f_from_config {
        let spec = config::env_section(raw)?;
        let env = build_env(&spec)?;
        let num_actions = match env.action_kind() {
            mfc_core::envs::ActionKind::Finite { num_actions } => num_actions,
            _ => {
                return Err(CliError::Config(
                    "probing l_phi/l_f needs a finite-action environment".into(),
                ))
            }
        };
        let actions = enumerate_action_profiles(env.state_dim(), num_actions)?;
        let panel = NoisePanel::deterministic(env.as_ref());
        let mut rng = seeding::rng_for(run.seed, "bound-probe");
        let dim = env.state_dim();
        let (l_phi, l_f) = analysis::lipschitz_probe(
            env.as_ref(),
            &panel,
            &actions,
            || analysis::uniform_simplex_sample(dim, &mut rng),
            500,
        )?;
        if !section.l_phi_from_config {
            inputs.l_phi = l_phi;
        }
        if !section.l_f_from_config {
            inputs.l_f = l_f;
        }
        inputs
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let error_bound = analysis::table_error_bound(&inputs);
    let budget = analysis::episode_count_order(&inputs);
    let (tau_star, bound_min) =
        analysis::minimize_softmax_action_bound(error_bound, inputs.card_profiles, inputs.k_a);
    let source = |from_config: bool| if from_config { "config" } else { "probed" };
    let rows = vec![
        format!(
            "l_phi,{},{}",
            fmt_f64(inputs.l_phi),
            source(section.l_phi_from_config)
        ),
        format!(
            "l_f,{},{}",
            fmt_f64(inputs.l_f),
            source(section.l_f_from_config)
        ),
        format!("l_v,{},config", fmt_f64(inputs.l_v)),
        format!("table_error_bound,{},computed", fmt_f64(error_bound)),
        format!("episode_count_order,{},computed", fmt_f64(budget)),
        format!("beta,{},computed", fmt_f64(inputs.beta())),
        format!("t_cov_delta,{},computed", fmt_f64(inputs.t_cov_delta())),
        format!(
            "softmax_action_bound_tau_star,{},computed",
            fmt_f64(tau_star)
        ),
        format!("softmax_action_bound_min,{},computed", fmt_f64(bound_min)),
        format!(
            "softmax_action_bound_at_tau_1,{},computed",
            fmt_f64(analysis::softmax_action_bound(
                1.0,
                error_bound,
                inputs.card_profiles,
                inputs.k_a
            ))
        ),
    ];
    for row in &rows {
        println!("{row}");
    }
    let writer = OutputWriter::new(&run.out_dir, &raw.source, run.seed, "bound")?;
    let path = writer.write_csv("bound.csv", "quantity,value,source", &rows)?;
    Ok(vec![path])
}
