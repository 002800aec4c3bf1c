//! Sectioned key = value configuration files.
//!
//! Line-oriented: `[section]` headers, `key = value` entries, `#` comments.
//! Section and key names are validated against an explicit schema; unknown
//! names are rejected with the offending line number. Values are parsed and
//! range-checked when the typed views below are built.

use mfc_core::ddpg::InitialStateSampler;
use mfc_core::envs::{CyberParams, LogisticParams, SwarmParams};
use mfc_core::mfq::{SweepOrder, UpdateMode};
use mfc_core::simplex::DistributionVector;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: Option<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        message: message.into(),
        line,
    })
}

const SECTIONS: &[&str] = &[
    "run",
    "env",
    "oracle",
    "mfq",
    "ddpg",
    "evaluate",
    "bound",
    "acceptance",
];

fn section_keys(section: &str) -> &'static [&'static str] {
    match section {
        "run" => &["seed", "out_dir"],
        "env" => &[
            "kind",
            // cyber
            "lambda",
            "q_rec_d",
            "q_rec_u",
            "v_h",
            "q_inf_d",
            "q_inf_u",
            "beta_uu",
            "beta_ud",
            "beta_du",
            "beta_dd",
            "k_d",
            "k_i",
            "dt",
            "noise_std",
            // swarm
            "n_points",
            "sigma",
            "density_floor",
            "common_noise_std",
            // logistic
            "base0_0",
            "base0_1",
            "base1_0",
            "base1_1",
            "steepness",
            "pay0_0",
            "pay0_1",
            "pay1_0",
            "pay1_1",
            "slope0",
            "slope1",
        ],
        "oracle" => &["resolution", "gamma", "tol"],
        "mfq" => &[
            "resolution",
            "gamma",
            "kappa",
            "episodes",
            "sweep",
            "update",
            "oracle_table",
        ],
        "ddpg" => &[
            "gamma",
            "episodes",
            "episode_length",
            "minibatch",
            "tau",
            "action_noise_std",
            "actor_lr",
            "critic_lr",
            "buffer_capacity",
            "buffer_reset_per_episode",
            "hidden_width",
            "action_low",
            "action_high",
            "initial_state",
            "checkpoint_episodes",
            "replay_time_units",
            "rollout_steps",
        ],
        "evaluate" => &["policy", "gamma", "horizon", "rollouts", "mu0"],
        "bound" => &[
            "epsilon",
            "gamma",
            "l_v",
            "l_phi",
            "l_f",
            "eps_s",
            "t_cov",
            "kappa",
            "delta",
            "v_max",
            "k_a",
            "card_grid",
            "card_profiles",
        ],
        "acceptance" => &["include_slow"],
        _ => &[],
    }
}

/// Keys of [env] admissible per environment kind.
fn env_kind_keys(kind: &str) -> &'static [&'static str] {
    match kind {
        "cyber" => &[
            "kind",
            "lambda",
            "q_rec_d",
            "q_rec_u",
            "v_h",
            "q_inf_d",
            "q_inf_u",
            "beta_uu",
            "beta_ud",
            "beta_du",
            "beta_dd",
            "k_d",
            "k_i",
            "dt",
            "noise_std",
        ],
        "swarm" => &[
            "kind",
            "n_points",
            "dt",
            "sigma",
            "density_floor",
            "common_noise_std",
        ],
        "logistic" => &[
            "kind",
            "base0_0",
            "base0_1",
            "base1_0",
            "base1_1",
            "steepness",
            "pay0_0",
            "pay0_1",
            "pay1_0",
            "pay1_1",
            "slope0",
            "slope1",
        ],
        _ => &[],
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw parsed file: sections of key -> (value, line).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    /// The exact bytes, hashed into output metadata.
    pub source: String,
}

impl RawConfig {
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw_line) in source.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return err(Some(line_no), format!("unknown section [{name}]"));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(Some(line_no), format!("expected key = value, got {line:?}"));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(section) = &current else {
                return err(Some(line_no), "entry before any [section]");
            };
            if !section_keys(section).contains(&key) {
                return err(
                    Some(line_no),
                    format!("unknown key {key:?} in section [{section}]"),
                );
            }
            let dup = sections.get_mut(section).unwrap().insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line: line_no,
                },
            );
            if dup.is_some() {
                return err(Some(line_no), format!("duplicate key {key:?}"));
            }
        }
        Ok(Self {
            sections,
            source: source.to_string(),
        })
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    fn section(&self, name: &str) -> Result<&BTreeMap<String, Entry>, ConfigError> {
        self.sections.get(name).ok_or(ConfigError {
            message: format!("missing required section [{name}]"),
            line: None,
        })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse::<f64>().map_err(|_| ConfigError {
                message: format!("{key}: expected a number, got {:?}", e.value),
                line: Some(e.line),
            }),
        }
    }

    fn f64_req(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => err(None, format!("[{section}] is missing required key {key:?}")),
            Some(_) => self.f64_or(section, key, 0.0),
        }
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse::<usize>().map_err(|_| ConfigError {
                message: format!("{key}: expected a nonnegative integer, got {:?}", e.value),
                line: Some(e.line),
            }),
        }
    }

    fn u64_or(&self, section: &str, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse::<u64>().map_err(|_| ConfigError {
                message: format!("{key}: expected a nonnegative integer, got {:?}", e.value),
                line: Some(e.line),
            }),
        }
    }

    fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => err(
                    Some(e.line),
                    format!("{key}: expected true/false, got {other:?}"),
                ),
            },
        }
    }

    fn string_or(&self, section: &str, key: &str, default: &str) -> String {
        self.get(section, key)
            .map(|e| e.value.clone())
            .unwrap_or_else(|| default.to_string())
    }
}

/// Environment selection with typed parameters.
#[derive(Debug, Clone)]
pub enum EnvSpec {
    Cyber(CyberParams),
    Swarm(SwarmParams),
    Logistic(LogisticParams),
}

impl EnvSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EnvSpec::Cyber(_) => "cyber",
            EnvSpec::Swarm(_) => "swarm",
            EnvSpec::Logistic(_) => "logistic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSection {
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct OracleSection {
    pub resolution: usize,
    pub gamma: f64,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct MfqSection {
    pub resolution: usize,
    pub gamma: f64,
    pub kappa: f64,
    pub episodes: usize,
    pub sweep: SweepOrder,
    pub update: UpdateMode,
    pub oracle_table: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct DdpgSection {
    pub gamma: f64,
    pub episodes: usize,
    pub episode_length: usize,
    pub minibatch: usize,
    pub tau: f64,
    pub action_noise_std: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub buffer_capacity: usize,
    pub buffer_reset_per_episode: bool,
    pub hidden_width: usize,
    pub action_low: f64,
    pub action_high: f64,
    pub initial_state: InitialStateSampler,
    pub checkpoint_episodes: Vec<usize>,
    pub replay_time_units: f64,
    pub rollout_steps: usize,
}

#[derive(Debug, Clone)]
pub enum PolicySpec {
    QTable(PathBuf),
    Actor(PathBuf),
    /// The closed-form swarm velocity profile.
    OptimalVelocity,
}

#[derive(Debug, Clone)]
pub enum Mu0Spec {
    Uniform,
    Fixed(Vec<f64>),
    /// The closed-form swarm stationary density.
    Stationary,
}

#[derive(Debug, Clone)]
pub struct EvaluateSection {
    pub policy: PolicySpec,
    pub gamma: f64,
    pub horizon: usize,
    pub rollouts: usize,
    pub mu0: Mu0Spec,
}

#[derive(Debug, Clone)]
pub struct BoundSection {
    pub inputs: mfc_core::analysis::BoundInputs,
    /// Whether l_phi / l_f came from the file or are left to an empirical
    /// probe (possible only when an [env] section is present).
    pub l_phi_from_config: bool,
    pub l_f_from_config: bool,
}

#[derive(Debug, Clone)]
pub struct AcceptanceSection {
    pub include_slow: bool,
}

pub fn run_section(raw: &RawConfig) -> Result<RunSection, ConfigError> {
    raw.section("run")?;
    let seed = raw.u64_or("run", "seed", 0)?;
    let out_dir = PathBuf::from(raw.string_or("run", "out_dir", "out"));
    Ok(RunSection { seed, out_dir })
}

pub fn env_section(raw: &RawConfig) -> Result<EnvSpec, ConfigError> {
    let section = raw.section("env")?;
    let kind_entry = section.get("kind").ok_or(ConfigError {
        message: "[env] is missing required key \"kind\"".into(),
        line: None,
    })?;
    let kind = kind_entry.value.as_str();
    let allowed = env_kind_keys(kind);
    if allowed.is_empty() {
        return err(
            Some(kind_entry.line),
            format!("unknown environment kind {kind:?} (cyber | swarm | logistic)"),
        );
    }
    for (key, entry) in section {
        if !allowed.contains(&key.as_str()) {
            return err(
                Some(entry.line),
                format!("key {key:?} does not apply to environment kind {kind:?}"),
            );
        }
    }
    match kind {
        "cyber" => {
            let d = CyberParams::default();
            Ok(EnvSpec::Cyber(CyberParams {
                lambda: raw.f64_or("env", "lambda", d.lambda)?,
                q_rec_d: raw.f64_or("env", "q_rec_d", d.q_rec_d)?,
                q_rec_u: raw.f64_or("env", "q_rec_u", d.q_rec_u)?,
                v_h: raw.f64_or("env", "v_h", d.v_h)?,
                q_inf_d: raw.f64_or("env", "q_inf_d", d.q_inf_d)?,
                q_inf_u: raw.f64_or("env", "q_inf_u", d.q_inf_u)?,
                beta_uu: raw.f64_or("env", "beta_uu", d.beta_uu)?,
                beta_ud: raw.f64_or("env", "beta_ud", d.beta_ud)?,
                beta_du: raw.f64_or("env", "beta_du", d.beta_du)?,
                beta_dd: raw.f64_or("env", "beta_dd", d.beta_dd)?,
                k_d: raw.f64_or("env", "k_d", d.k_d)?,
                k_i: raw.f64_or("env", "k_i", d.k_i)?,
                dt: raw.f64_or("env", "dt", d.dt)?,
                noise_std: raw.f64_or("env", "noise_std", d.noise_std)?,
            }))
        }
        "swarm" => {
            let d = SwarmParams::default();
            Ok(EnvSpec::Swarm(SwarmParams {
                n_points: raw.usize_or("env", "n_points", d.n_points)?,
                dt: raw.f64_or("env", "dt", d.dt)?,
                sigma: raw.f64_or("env", "sigma", d.sigma)?,
                density_floor: raw.f64_or("env", "density_floor", d.density_floor)?,
                common_noise_std: raw.f64_or("env", "common_noise_std", d.common_noise_std)?,
            }))
        }
        "logistic" => {
            let d = LogisticParams::default();
            Ok(EnvSpec::Logistic(LogisticParams {
                base0: [
                    raw.f64_or("env", "base0_0", d.base0[0])?,
                    raw.f64_or("env", "base0_1", d.base0[1])?,
                ],
                base1: [
                    raw.f64_or("env", "base1_0", d.base1[0])?,
                    raw.f64_or("env", "base1_1", d.base1[1])?,
                ],
                steepness: raw.f64_or("env", "steepness", d.steepness)?,
                pay0: [
                    raw.f64_or("env", "pay0_0", d.pay0[0])?,
                    raw.f64_or("env", "pay0_1", d.pay0[1])?,
                ],
                pay1: [
                    raw.f64_or("env", "pay1_0", d.pay1[0])?,
                    raw.f64_or("env", "pay1_1", d.pay1[1])?,
                ],
                slope0: raw.f64_or("env", "slope0", d.slope0)?,
                slope1: raw.f64_or("env", "slope1", d.slope1)?,
            }))
        }
        _ => unreachable!(),
    }
}

pub fn oracle_section(raw: &RawConfig) -> Result<OracleSection, ConfigError> {
    raw.section("oracle")?;
    Ok(OracleSection {
        resolution: raw.usize_or("oracle", "resolution", 8)?,
        gamma: raw.f64_or("oracle", "gamma", 0.5)?,
        tol: raw.f64_or("oracle", "tol", 1e-8)?,
    })
}

pub fn mfq_section(raw: &RawConfig) -> Result<MfqSection, ConfigError> {
    raw.section("mfq")?;
    let sweep = match raw.string_or("mfq", "sweep", "lexicographic").as_str() {
        "lexicographic" => SweepOrder::Lexicographic,
        "shuffled" => SweepOrder::ShuffledPerEpisode,
        other => {
            return err(
                raw.get("mfq", "sweep").map(|e| e.line),
                format!("sweep: expected lexicographic | shuffled, got {other:?}"),
            )
        }
    };
    let update = match raw.string_or("mfq", "update", "snapshot").as_str() {
        "snapshot" => UpdateMode::Snapshot,
        "in_place" => UpdateMode::InPlace,
        other => {
            return err(
                raw.get("mfq", "update").map(|e| e.line),
                format!("update: expected snapshot | in_place, got {other:?}"),
            )
        }
    };
    Ok(MfqSection {
        resolution: raw.usize_or("mfq", "resolution", 8)?,
        gamma: raw.f64_or("mfq", "gamma", 0.5)?,
        kappa: raw.f64_or("mfq", "kappa", 0.7)?,
        episodes: raw.usize_or("mfq", "episodes", 5000)?,
        sweep,
        update,
        oracle_table: raw
            .get("mfq", "oracle_table")
            .map(|e| PathBuf::from(&e.value)),
    })
}

pub fn ddpg_section(raw: &RawConfig, env: &EnvSpec) -> Result<DdpgSection, ConfigError> {
    raw.section("ddpg")?;
    let initial_state_str = raw.string_or(
        "ddpg",
        "initial_state",
        match env {
            EnvSpec::Swarm(_) => "gaussian:0.05:0.2",
            _ => "dirichlet",
        },
    );
    let line = raw.get("ddpg", "initial_state").map(|e| e.line);
    let initial_state = parse_initial_state(&initial_state_str, line)?;
    let checkpoint_episodes = match raw.get("ddpg", "checkpoint_episodes") {
        None => Vec::new(),
        Some(e) => e
            .value
            .split(',')
            .map(|t| {
                t.trim().parse::<usize>().map_err(|_| ConfigError {
                    message: format!("checkpoint_episodes: bad entry {t:?}"),
                    line: Some(e.line),
                })
            })
            .collect::<Result<Vec<usize>, ConfigError>>()?,
    };
    let (lo_default, hi_default) = match env {
        EnvSpec::Swarm(_) => (-7.0, 7.0),
        _ => (0.0, 1.0),
    };
    Ok(DdpgSection {
        gamma: raw.f64_or("ddpg", "gamma", 0.9)?,
        episodes: raw.usize_or("ddpg", "episodes", 3000)?,
        episode_length: raw.usize_or(
            "ddpg",
            "episode_length",
            match env {
                EnvSpec::Swarm(_) => 200,
                _ => 50,
            },
        )?,
        minibatch: raw.usize_or("ddpg", "minibatch", 16)?,
        tau: raw.f64_or("ddpg", "tau", 0.01)?,
        action_noise_std: raw.f64_or("ddpg", "action_noise_std", 0.02f64.sqrt())?,
        actor_lr: raw.f64_or("ddpg", "actor_lr", 1e-4)?,
        critic_lr: raw.f64_or("ddpg", "critic_lr", 1e-4)?,
        buffer_capacity: raw.usize_or("ddpg", "buffer_capacity", 100_000)?,
        buffer_reset_per_episode: raw.bool_or("ddpg", "buffer_reset_per_episode", true)?,
        hidden_width: raw.usize_or("ddpg", "hidden_width", 64)?,
        action_low: raw.f64_or("ddpg", "action_low", lo_default)?,
        action_high: raw.f64_or("ddpg", "action_high", hi_default)?,
        initial_state,
        checkpoint_episodes,
        replay_time_units: raw.f64_or("ddpg", "replay_time_units", 10.0)?,
        rollout_steps: raw.usize_or("ddpg", "rollout_steps", 500)?,
    })
}

fn parse_initial_state(
    spec: &str,
    line: Option<usize>,
) -> Result<InitialStateSampler, ConfigError> {
    if spec == "dirichlet" {
        return Ok(InitialStateSampler::Dirichlet);
    }
    if let Some(rest) = spec.strip_prefix("gaussian:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() == 2 {
            let lo = parts[0].parse::<f64>();
            let hi = parts[1].parse::<f64>();
            if let (Ok(std_lo), Ok(std_hi)) = (lo, hi) {
                return Ok(InitialStateSampler::GaussianDensity { std_lo, std_hi });
            }
        }
        return err(line, format!("bad gaussian initial state {spec:?}"));
    }
    if let Some(rest) = spec.strip_prefix("fixed:") {
        let weights: Result<Vec<f64>, _> =
            rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match weights {
            Ok(w) => match DistributionVector::from_weights(w, false) {
                Ok(d) => return Ok(InitialStateSampler::Fixed(d)),
                Err(e) => return err(line, format!("bad fixed initial state: {e}")),
            },
            Err(_) => return err(line, format!("bad fixed initial state {spec:?}")),
        }
    }
    err(
        line,
        format!(
            "initial_state: expected dirichlet | gaussian:<lo>:<hi> | fixed:<w,...>, got {spec:?}"
        ),
    )
}

pub fn evaluate_section(raw: &RawConfig) -> Result<EvaluateSection, ConfigError> {
    let section = raw.section("evaluate")?;
    let policy_entry = section.get("policy").ok_or(ConfigError {
        message: "[evaluate] is missing required key \"policy\"".into(),
        line: None,
    })?;
    let policy = if let Some(p) = policy_entry.value.strip_prefix("qtable:") {
        PolicySpec::QTable(PathBuf::from(p))
    } else if let Some(p) = policy_entry.value.strip_prefix("actor:") {
        PolicySpec::Actor(PathBuf::from(p))
    } else if policy_entry.value == "optimal_velocity" {
        PolicySpec::OptimalVelocity
    } else {
        return err(
            Some(policy_entry.line),
            format!(
                "policy: expected qtable:<path> | actor:<path> | optimal_velocity, got {:?}",
                policy_entry.value
            ),
        );
    };
    let mu0 = match raw.string_or("evaluate", "mu0", "uniform").as_str() {
        "uniform" => Mu0Spec::Uniform,
        "stationary" => Mu0Spec::Stationary,
        other => {
            if let Some(rest) = other.strip_prefix("fixed:") {
                let weights: Result<Vec<f64>, _> =
                    rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
                match weights {
                    Ok(w) => Mu0Spec::Fixed(w),
                    Err(_) => {
                        return err(
                            raw.get("evaluate", "mu0").map(|e| e.line),
                            format!("bad mu0 {other:?}"),
                        )
                    }
                }
            } else {
                return err(
                    raw.get("evaluate", "mu0").map(|e| e.line),
                    format!("mu0: expected uniform | stationary | fixed:<w,...>, got {other:?}"),
                );
            }
        }
    };
    Ok(EvaluateSection {
        policy,
        gamma: raw.f64_or("evaluate", "gamma", 0.9)?,
        horizon: raw.usize_or("evaluate", "horizon", 500)?,
        rollouts: raw.usize_or("evaluate", "rollouts", 1)?,
        mu0,
    })
}

pub fn bound_section(raw: &RawConfig) -> Result<BoundSection, ConfigError> {
    raw.section("bound")?;
    // l_phi and l_f may be omitted when an [env] section is present: the
    // runner then fills them with empirical probe estimates. l_v has no
    // estimator and must always be given.
    let probing_possible = raw.has_section("env");
    let l_phi_from_config = raw.get("bound", "l_phi").is_some();
    let l_f_from_config = raw.get("bound", "l_f").is_some();
    if !probing_possible && (!l_phi_from_config || !l_f_from_config) {
        return err(
            None,
            "[bound] needs l_phi and l_f unless an [env] section enables probing",
        );
    }
    let inputs = mfc_core::analysis::BoundInputs {
        epsilon: raw.f64_req("bound", "epsilon")?,
        gamma: raw.f64_req("bound", "gamma")?,
        l_v: raw.f64_req("bound", "l_v")?,
        l_phi: if l_phi_from_config {
            raw.f64_req("bound", "l_phi")?
        } else {
            f64::NAN // filled by the probe
        },
        l_f: if l_f_from_config {
            raw.f64_req("bound", "l_f")?
        } else {
            f64::NAN
        },
        eps_s: raw.f64_req("bound", "eps_s")?,
        t_cov: raw.f64_req("bound", "t_cov")?,
        kappa: raw.f64_req("bound", "kappa")?,
        delta: raw.f64_req("bound", "delta")?,
        v_max: raw.f64_req("bound", "v_max")?,
        k_a: raw.f64_req("bound", "k_a")?,
        card_grid: raw.f64_req("bound", "card_grid")?,
        card_profiles: raw.f64_req("bound", "card_profiles")?,
    };
    if l_phi_from_config && l_f_from_config {
        inputs.validate().map_err(|e| ConfigError {
            message: e.to_string(),
            line: None,
        })?;
    }
    Ok(BoundSection {
        inputs,
        l_phi_from_config,
        l_f_from_config,
    })
}

pub fn acceptance_section(raw: &RawConfig) -> Result<AcceptanceSection, ConfigError> {
    if !raw.has_section("acceptance") {
        return Ok(AcceptanceSection { include_slow: true });
    }
    Ok(AcceptanceSection {
        include_slow: raw.bool_or("acceptance", "include_slow", true)?,
    })
}
