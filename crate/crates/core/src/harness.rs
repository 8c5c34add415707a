//! K-UCBVI outer loop, batch execution across seeded runs, and
//! CSV/JSON/SVG result emission.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feedback::{
    feedback_probabilities, l2_norm, mix_with_uniform_noise, true_expected_reward, WeightBlocks,
};
use crate::gridworld::{parse_grid_map, GridSpec};
use crate::mdp::{sample_categorical, TabularMdp, Trajectory};
use crate::mle::{
    design_matrix_sigma, fit_mle, min_eigenvalue, ConfidenceConstants, FeedbackDataset,
    SolverConfig,
};
use crate::optimistic::{optimistic_reward, BonusMode, OptimisticRewardSpec};
use crate::plot::render_curve_svg;
use crate::policy::{optimize_policy, policy_value_estimate, PlannerConfig, PolicyTable};

/// Which bonus the optimistic reward uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BonusModeConfig {
    Practical,
    Theoretical,
}

impl std::str::FromStr for BonusModeConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "practical" => Ok(BonusModeConfig::Practical),
            "theoretical" => Ok(BonusModeConfig::Theoretical),
            other => Err(Error::Config(format!(
                "unknown bonus mode '{other}' (expected practical|theoretical)"
            ))),
        }
    }
}

/// Full experiment description; a batch is a pure function of this.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Display name of the map (usually its path).
    pub grid_label: String,
    /// ASCII map contents.
    pub grid_text: String,
    pub horizon: usize,
    pub k: usize,
    pub episodes: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub noise_level: f64,
    pub bonus_mode: BonusModeConfig,
    pub c_conf: f64,
    pub delta: f64,
    pub ridge: f64,
    /// Starting radius for weight synthesis and the MLE projection ball.
    pub weight_bound: f64,
    pub solver: SolverConfig,
    pub planner: PlannerConfig,
    pub eval_rollouts: usize,
    /// Refit the MLE every this many episodes (1 = every episode).
    pub refit_every: usize,
    /// Pre-synthesized ground-truth weights; synthesized from the base
    /// seed when absent.
    pub weights: Option<WeightBlocks>,
}

impl ExperimentConfig {
    pub fn new(grid_label: impl Into<String>, grid_text: impl Into<String>) -> Self {
        ExperimentConfig {
            grid_label: grid_label.into(),
            grid_text: grid_text.into(),
            horizon: 50,
            k: 4,
            episodes: 6000,
            runs: 20,
            base_seed: 0,
            noise_level: 0.0,
            bonus_mode: BonusModeConfig::Practical,
            c_conf: 10.0,
            delta: 0.1,
            ridge: 1e-6,
            weight_bound: 5.0,
            solver: SolverConfig::default(),
            // per-episode ascent budget kept small: theta is warm-started
            // across episodes, so the total budget grows with N
            planner: PlannerConfig { max_ascent_iters: 10, ..PlannerConfig::default() },
            eval_rollouts: 200,
            refit_every: 1,
            weights: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.runs == 0 {
            return Err(Error::Config("episodes and runs must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_level) {
            return Err(Error::Config("noise level must lie in [0, 1]".into()));
        }
        if self.k < 2 {
            return Err(Error::Config("K must be at least 2".into()));
        }
        if self.refit_every == 0 {
            return Err(Error::Config("refit cadence must be >= 1".into()));
        }
        self.planner.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Per-episode diagnostics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub run: usize,
    pub episode: usize,
    pub feedback: usize,
    pub value_mc: f64,
    pub optimistic_value: f64,
    pub w_error: f64,
    pub regret_cum: f64,
}

/// Shared artifacts for a batch: environment, ground truth and baseline.
pub struct ExperimentContext {
    pub spec: GridSpec,
    pub mdp: TabularMdp,
    pub w_star: WeightBlocks,
    pub w_star_concat: Vec<f64>,
    pub v_hat_star: f64,
    pub optimal_policy: PolicyTable,
}

const SYNTH_SALT: u64 = 0x5f3759df;
const BASELINE_SALT: u64 = 0x9e3779b9;

/// Parse the map, synthesize (or adopt) the ground-truth weights and
/// estimate the optimal-value baseline.
pub fn prepare(config: &ExperimentConfig) -> Result<ExperimentContext> {
    config.validate()?;
    let spec = parse_grid_map(&config.grid_text, config.horizon)?;
    let mdp = spec.to_tabular_mdp()?;
    let w_star = match &config.weights {
        Some(w) => {
            if w.k != config.k || w.d != spec.feature_dim() {
                return Err(Error::Config(format!(
                    "loaded weights have (k={}, d={}), expected (k={}, d={})",
                    w.k,
                    w.d,
                    config.k,
                    spec.feature_dim()
                )));
            }
            w.clone()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed ^ SYNTH_SALT);
            spec.synthesize_true_weights(config.k, config.weight_bound, &mut rng)?
        }
    };
    let w_star_concat = w_star.concat();
    let (v_hat_star, optimal_policy) = estimate_optimal_value(config, &spec, &mdp, &w_star)?;
    Ok(ExperimentContext { spec, mdp, w_star, w_star_concat, v_hat_star, optimal_policy })
}

/// Best-effort planning against the true reward with a generous budget;
/// the returned value is a Markovian-softmax lower bound on the optimum
/// and serves as the regret baseline.
pub fn estimate_optimal_value(
    config: &ExperimentConfig,
    spec: &GridSpec,
    mdp: &TabularMdp,
    w_star: &WeightBlocks,
) -> Result<(f64, PolicyTable)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed ^ BASELINE_SALT);
    let reward = true_reward_fn(spec, w_star);
    let generous = PlannerConfig {
        max_ascent_iters: config.planner.max_ascent_iters.saturating_mul(5).max(3000),
        rollouts_per_gradient: 200,
        ..config.planner.clone()
    };
    let policy = optimize_policy(mdp, &reward, &generous, None, &mut rng)?;
    let value = policy_value_estimate(mdp, &policy, &reward, 10_000, &mut rng)?;
    Ok((value, policy))
}

fn true_reward_fn<'a>(
    spec: &'a GridSpec,
    w_star: &'a WeightBlocks,
) -> impl Fn(&Trajectory) -> f64 + 'a {
    move |tau: &Trajectory| {
        let phi = spec.extract_features(tau).expect("feature extraction on valid trajectory");
        true_expected_reward(w_star, &phi).expect("reward with matching dimensions")
    }
}

/// One K-UCBVI run: uniform policy at episode 1, then plan against the
/// optimistic reward of the previous episode's estimate, collect one
/// trajectory and feedback, and refit the MLE.
pub fn run_kucbvi(
    ctx: &ExperimentContext,
    config: &ExperimentConfig,
    run_id: usize,
    run_seed: u64,
) -> Result<Vec<EpisodeRecord>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let spec = &ctx.spec;
    let mdp = &ctx.mdp;
    let k = config.k;
    let bound = ctx.w_star.bound;
    let mut dataset = FeedbackDataset::new(k, spec.feature_dim())?;
    let mut w_hat: Option<Vec<f64>> = None;
    let mut policy = PolicyTable::zeros(mdp.num_states(), mdp.num_actions());
    let mut records = Vec::with_capacity(config.episodes);
    let mut regret_cum = 0.0;
    let constants = ConfidenceConstants::new(bound, k, config.delta)?;
    let true_reward = true_reward_fn(spec, &ctx.w_star);
    // Warm-started refits only need a few corrective steps per episode;
    // the full iteration budget is reserved for the final refit so the
    // last estimate is solved to tolerance.
    let warm_solver = SolverConfig { max_iters: 60, ..config.solver.clone() };

    for episode in 1..=config.episodes {
        if episode > 1 {
            let weights = w_hat.clone().expect("estimate exists after episode 1");
            let mode = match config.bonus_mode {
                BonusModeConfig::Practical => BonusMode::Practical { c_conf: config.c_conf },
                BonusModeConfig::Theoretical => {
                    let sigma = design_matrix_sigma(&dataset)?;
                    let lambda_min =
                        min_eigenvalue(&sigma, k * spec.feature_dim(), config.ridge)?;
                    BonusMode::Theoretical {
                        constants: constants.clone(),
                        bound,
                        lambda_min,
                    }
                }
            };
            let opt_spec =
                OptimisticRewardSpec { weights, k, n: episode - 1, mode };
            let reward = |tau: &Trajectory| {
                let phi = spec
                    .extract_features(tau)
                    .expect("feature extraction on valid trajectory");
                optimistic_reward(&opt_spec, &phi).expect("optimistic reward on valid spec")
            };
            policy = optimize_policy(mdp, &reward, &config.planner, Some(&policy), &mut rng)
                .map_err(|e| {
                    Error::State(format!("run {run_id} failed at episode {episode}: {e}"))
                })?;
        }

        let tau = mdp.sample_trajectory(&policy.probabilities_matrix(), &mut rng)?;
        let phi = spec.extract_features(&tau)?;
        let probs = feedback_probabilities(&ctx.w_star, &phi)?;
        let noisy = mix_with_uniform_noise(&probs, config.noise_level)?;
        let feedback = sample_categorical(&noisy, &mut rng);
        dataset.push(phi.phi().to_vec(), feedback)?;

        if episode % config.refit_every == 0 || episode == 1 || episode == config.episodes {
            let solver =
                if episode == config.episodes { &config.solver } else { &warm_solver };
            w_hat = Some(
                fit_mle(&dataset, bound, solver, w_hat.as_deref()).map_err(|e| {
                    Error::State(format!("run {run_id} failed at episode {episode}: {e}"))
                })?,
            );
        }
        let w_cur = w_hat.as_ref().expect("estimate available");

        let value_mc =
            policy_value_estimate(mdp, &policy, &true_reward, config.eval_rollouts, &mut rng)?;
        let opt_eval_spec = OptimisticRewardSpec {
            weights: w_cur.clone(),
            k,
            n: episode,
            mode: BonusMode::Practical { c_conf: config.c_conf },
        };
        let opt_reward = |tau: &Trajectory| {
            let phi =
                spec.extract_features(tau).expect("feature extraction on valid trajectory");
            optimistic_reward(&opt_eval_spec, &phi).expect("optimistic reward on valid spec")
        };
        let optimistic_value =
            policy_value_estimate(mdp, &policy, &opt_reward, config.eval_rollouts, &mut rng)?;
        let w_error = l2_norm(
            &w_cur.iter().zip(&ctx.w_star_concat).map(|(a, b)| a - b).collect::<Vec<_>>(),
        );
        regret_cum += ctx.v_hat_star - value_mc;
        records.push(EpisodeRecord {
            run: run_id,
            episode,
            feedback,
            value_mc,
            optimistic_value,
            w_error,
            regret_cum,
        });
    }
    Ok(records)
}

/// Aggregated batch output.
pub struct BatchResult {
    pub config: ExperimentConfig,
    pub v_hat_star: f64,
    pub run_seeds: Vec<u64>,
    /// records[run][episode - 1]
    pub records: Vec<Vec<EpisodeRecord>>,
    pub episode_mean: Vec<f64>,
    pub episode_std: Vec<f64>,
    /// Mean over runs of the cumulative sum of max(v* - v, 0).
    pub regret_clipped_cum: Vec<f64>,
    /// Mean over runs of the raw cumulative regret.
    pub regret_raw_cum: Vec<f64>,
    pub wall_time_secs: f64,
}

impl BatchResult {
    pub fn final_mean_value(&self) -> f64 {
        *self.episode_mean.last().unwrap_or(&0.0)
    }
}

/// Execute `runs` seeded runs and aggregate per-episode statistics.
pub fn run_batch(config: &ExperimentConfig) -> Result<BatchResult> {
    run_batch_with_context(config, &prepare(config)?)
}

/// Same as [`run_batch`] but reusing an already prepared context
/// (useful when several batches share the same map and ground truth).
pub fn run_batch_with_context(
    config: &ExperimentConfig,
    ctx: &ExperimentContext,
) -> Result<BatchResult> {
    let start = Instant::now();
    let run_seeds: Vec<u64> =
        (0..config.runs).map(|r| config.base_seed + r as u64).collect();
    let mut records = Vec::with_capacity(config.runs);
    for (run_id, &seed) in run_seeds.iter().enumerate() {
        records.push(run_kucbvi(ctx, config, run_id, seed)?);
    }

    let n_ep = config.episodes;
    let n_runs = config.runs as f64;
    let mut episode_mean = vec![0.0; n_ep];
    let mut episode_std = vec![0.0; n_ep];
    let mut regret_clipped_cum = vec![0.0; n_ep];
    let mut regret_raw_cum = vec![0.0; n_ep];
    for e in 0..n_ep {
        let vals: Vec<f64> = records.iter().map(|r| r[e].value_mc).collect();
        let mean = vals.iter().sum::<f64>() / n_runs;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_runs;
        episode_mean[e] = mean;
        episode_std[e] = var.sqrt();
        regret_raw_cum[e] =
            records.iter().map(|r| r[e].regret_cum).sum::<f64>() / n_runs;
    }
    let mut per_run_clipped: Vec<f64> = vec![0.0; config.runs];
    for e in 0..n_ep {
        for (r, run) in records.iter().enumerate() {
            per_run_clipped[r] += (ctx.v_hat_star - run[e].value_mc).max(0.0);
        }
        regret_clipped_cum[e] = per_run_clipped.iter().sum::<f64>() / n_runs;
    }

    Ok(BatchResult {
        config: config.clone(),
        v_hat_star: ctx.v_hat_star,
        run_seeds,
        records,
        episode_mean,
        episode_std,
        regret_clipped_cum,
        regret_raw_cum,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Fixed 6-significant-digit float formatting for byte-stable outputs.
pub fn fmt_sig6(x: f64) -> String {
    format!("{x:.5e}")
}

/// Write episodes.csv, summary.json and the two SVG curves.
pub fn emit_results(batch: &BatchResult, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    let csv_path = out_dir.join("episodes.csv");
    let mut csv = String::from(
        "run,episode,feedback,value_mc,optimistic_value,w_error,regret_cum\n",
    );
    for run in &batch.records {
        for rec in run {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                rec.run,
                rec.episode,
                rec.feedback,
                fmt_sig6(rec.value_mc),
                fmt_sig6(rec.optimistic_value),
                fmt_sig6(rec.w_error),
                fmt_sig6(rec.regret_cum),
            ));
        }
    }
    std::fs::write(&csv_path, csv).map_err(|e| Error::io(csv_path.display().to_string(), e))?;

    let cfg = &batch.config;
    let summary = serde_json::json!({
        "config": {
            "grid": cfg.grid_label,
            "horizon": cfg.horizon,
            "k": cfg.k,
            "episodes": cfg.episodes,
            "runs": cfg.runs,
            "base_seed": cfg.base_seed,
            "noise_level": fmt_sig6(cfg.noise_level),
            "bonus_mode": match cfg.bonus_mode {
                BonusModeConfig::Practical => "practical",
                BonusModeConfig::Theoretical => "theoretical",
            },
            "c_conf": fmt_sig6(cfg.c_conf),
            "delta": fmt_sig6(cfg.delta),
            "weight_bound": fmt_sig6(cfg.weight_bound),
            "pg_step": fmt_sig6(cfg.planner.step_size),
            "pg_samples": cfg.planner.rollouts_per_gradient,
            "pg_eps": fmt_sig6(cfg.planner.epsilon),
            "pg_iters": cfg.planner.max_ascent_iters,
            "eval_rollouts": cfg.eval_rollouts,
            "refit_every": cfg.refit_every,
        },
        "v_hat_star": fmt_sig6(batch.v_hat_star),
        "final_mean_value": fmt_sig6(batch.final_mean_value()),
        "seeds": batch.run_seeds,
        "wall_time_secs": batch.wall_time_secs,
    });
    let json_path = out_dir.join("summary.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)? + "\n")
        .map_err(|e| Error::io(json_path.display().to_string(), e))?;

    let episodes: Vec<f64> = (1..=cfg.episodes).map(|e| e as f64).collect();
    let upper: Vec<f64> = batch
        .episode_mean
        .iter()
        .zip(&batch.episode_std)
        .map(|(m, s)| m + 2.0 * s)
        .collect();
    let lower: Vec<f64> = batch
        .episode_mean
        .iter()
        .zip(&batch.episode_std)
        .map(|(m, s)| m - 2.0 * s)
        .collect();
    let lc_path = out_dir.join("learning_curve.svg");
    std::fs::write(
        &lc_path,
        render_curve_svg(
            "mean true value per episode",
            "episode",
            "value",
            &episodes,
            &[("mean", &batch.episode_mean), ("upper2sd", &upper), ("lower2sd", &lower)],
        ),
    )
    .map_err(|e| Error::io(lc_path.display().to_string(), e))?;

    let rc_path = out_dir.join("regret_curve.svg");
    std::fs::write(
        &rc_path,
        render_curve_svg(
            "cumulative regret (clipped)",
            "episode",
            "regret",
            &episodes,
            &[("regret", &batch.regret_clipped_cum)],
        ),
    )
    .map_err(|e| Error::io(rc_path.display().to_string(), e))?;
    Ok(())
}
