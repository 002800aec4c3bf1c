//! Mean-field control problems phrased as MDPs whose state is a probability
//! distribution: the next distribution and the per-step reward depend on the
//! current distribution itself (McKean-Vlasov dynamics), and a central planner
//! picks one action per underlying state.
//!
//! The crate provides
//!
//! * [`simplex`] — distribution vectors, the finite lattice on the simplex,
//!   and nearest-point projection;
//! * [`envs`] — the transition map and lifted reward for three environments
//!   (a four-state protection/infection model, swarm motion on the unit torus
//!   with a closed-form ergodic optimum, and a synthetic two-state logistic
//!   model used by the test oracles), plus a common-noise hook;
//! * [`dp`] — exact dynamic programming on the projected finite MDP: Bellman
//!   operators, value iteration, the exact state-action table, and policy
//!   evaluation by rollout;
//! * [`mfq`] — tabular Q-learning over grid-point x action-profile pairs with
//!   a polynomial learning-rate schedule and full covering sweeps;
//! * [`neural`] — a small feedforward substrate with exact backpropagation
//!   (including input gradients), Adam, and soft target updates;
//! * [`ddpg`] — an actor-critic trainer over distribution states with replay
//!   buffer, target networks, and Gaussian action exploration;
//! * [`analysis`] — softmax/argmax action diagnostics, accuracy and episode
//!   budget formulas, empirical Lipschitz probes, and the swarm benchmark
//!   metrics against the analytic solution.

pub mod analysis;
pub mod ddpg;
pub mod dp;
pub mod envs;
pub mod error;
pub mod io;
pub mod mfq;
pub mod neural;
pub mod seeding;
pub mod simplex;

pub use error::{Error, Result};

/// Library version, embedded into output metadata by the runner.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
