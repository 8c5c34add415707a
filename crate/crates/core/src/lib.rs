//! Reinforcement learning from multilevel episodic feedback: categorical
//! feedback model, constrained MLE reward estimation, optimistic bonuses,
//! a REINFORCE softmax-policy planner and a grid-world experiment harness.

pub mod error;
pub mod feedback;
pub mod gridworld;
pub mod harness;
pub mod mdp;
pub mod mle;
pub mod optimistic;
pub mod oracle;
pub mod plot;
pub mod policy;

pub use error::{Error, Result};
pub use feedback::{TrajectoryFeatures, WeightBlocks};
pub use gridworld::{GridSpec, GridState};
pub use harness::{BatchResult, EpisodeRecord, ExperimentConfig};
pub use mdp::{TabularMdp, Trajectory};
pub use mle::{FeedbackDataset, SolverConfig};
pub use policy::{PlannerConfig, PolicyTable};
