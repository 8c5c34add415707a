//! Estimated and optimistic (bonus-clamped) reward functions.

use crate::error::{Error, Result};
use crate::feedback::{expected_level, softmax, stacked_class_logits, TrajectoryFeatures};
use crate::mle::{
    practical_confidence_width, theoretical_confidence_width, ConfidenceConstants,
};

/// How the exploration bonus is computed.
#[derive(Debug, Clone)]
pub enum BonusMode {
    /// c / sqrt(n), the form used in the experiments.
    Practical { c_conf: f64 },
    /// The full concentration width; vacuously large for realistic B.
    Theoretical { constants: ConfidenceConstants, bound: f64, lambda_min: f64 },
}

/// Everything needed to evaluate the optimistic reward at episode n.
#[derive(Debug, Clone)]
pub struct OptimisticRewardSpec {
    pub weights: Vec<f64>,
    pub k: usize,
    pub n: usize,
    pub mode: BonusMode,
}

impl OptimisticRewardSpec {
    pub fn bonus(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("episode index must be >= 1".into()));
        }
        match &self.mode {
            BonusMode::Practical { c_conf } => practical_confidence_width(*c_conf, self.n),
            BonusMode::Theoretical { constants, bound, lambda_min } => {
                theoretical_confidence_width(constants, self.k, *bound, *lambda_min, self.n)
            }
        }
    }
}

/// Expected feedback level under the estimated weights.
pub fn estimated_reward(w_concat: &[f64], phi: &TrajectoryFeatures, k: usize) -> Result<f64> {
    if w_concat.len() != k * phi.dim() {
        return Err(Error::InvalidArgument(format!(
            "weight length {} != K*d = {}",
            w_concat.len(),
            k * phi.dim()
        )));
    }
    let probs = softmax(&stacked_class_logits(w_concat, k, phi.phi()));
    Ok(expected_level(&probs))
}

/// min(estimated reward + bonus, K - 1).
pub fn optimistic_reward(spec: &OptimisticRewardSpec, phi: &TrajectoryFeatures) -> Result<f64> {
    let base = estimated_reward(&spec.weights, phi, spec.k)?;
    let bonus = spec.bonus()?;
    Ok((base + bonus).min(spec.k as f64 - 1.0))
}
