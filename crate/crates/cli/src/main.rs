use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kfeed_core::error::Error;
use kfeed_core::feedback::{l2_norm, TrajectoryFeatures, WeightBlocks};
use kfeed_core::gridworld::parse_grid_map;
use kfeed_core::harness::{emit_results, run_batch, BonusModeConfig, ExperimentConfig};
use kfeed_core::mdp::{TabularMdp, Trajectory};
use kfeed_core::mle::{negative_log_likelihood, nll_gradient, FeedbackDataset};
use kfeed_core::optimistic::{estimated_reward, optimistic_reward, BonusMode, OptimisticRewardSpec};
use kfeed_core::oracle::{exact_policy_gradient, exact_value, finite_difference};
use kfeed_core::policy::{policy_value_estimate, PolicyTable};

#[derive(Parser)]
#[command(name = "kfeed", about = "Learning from multilevel episodic feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of learning experiments and emit CSV/JSON/SVG results.
    Run(RunArgs),
    /// Synthesize ground-truth reward weights for a map and save them as JSON.
    SynthWeights(SynthArgs),
    /// Run the built-in oracle and invariant suite.
    Check,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Key-value config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Path to the ASCII grid map.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Number of feedback levels.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Feedback noise level in [0, 1].
    #[arg(long)]
    noise: Option<f64>,
    /// practical | theoretical
    #[arg(long)]
    bonus_mode: Option<String>,
    /// Confidence parameter c for the practical c/sqrt(n) bonus.
    #[arg(long)]
    conf_c: Option<f64>,
    /// Policy-gradient step size.
    #[arg(long)]
    pg_step: Option<f64>,
    /// Rollouts per policy-gradient estimate.
    #[arg(long)]
    pg_samples: Option<usize>,
    /// Planner termination threshold on the parameter change.
    #[arg(long)]
    pg_eps: Option<f64>,
    /// Per-episode cap on ascent iterations.
    #[arg(long)]
    pg_iters: Option<usize>,
    /// Monte-Carlo rollouts for the per-episode value estimate.
    #[arg(long)]
    eval_rollouts: Option<usize>,
    /// Episode horizon H.
    #[arg(long)]
    horizon: Option<usize>,
    /// Weight-synthesis / MLE projection radius B.
    #[arg(long)]
    b: Option<f64>,
    /// Refit the MLE every this many episodes.
    #[arg(long)]
    refit_every: Option<usize>,
    /// Load ground-truth weights from JSON instead of synthesizing them.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 5.0)]
    b: f64,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SynthWeights(args) => cmd_synth(args),
        Command::Check => cmd_check(),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let config_class = matches!(
                err.downcast_ref::<Error>(),
                Some(
                    Error::Config(_)
                        | Error::InvalidArgument(_)
                        | Error::Parse { .. }
                        | Error::Capacity(_)
                )
            );
            if config_class {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn read_kv_config(path: &Path) -> anyhow::Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config(format!(
            "{}: line {}: expected key = value",
            path.display(),
            i + 1
        )))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn kv_parse<T: std::str::FromStr>(
    kv: &HashMap<String, String>,
    key: &str,
) -> anyhow::Result<Option<T>> {
    match kv.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            Error::Config(format!("config key '{key}': cannot parse '{raw}'")).into()
        }),
    }
}

fn resolve_run_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let kv = match &args.config {
        Some(path) => read_kv_config(path)?,
        None => HashMap::new(),
    };
    let grid_path: PathBuf = match (&args.grid, kv.get("grid")) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(Error::Config("missing --grid".into()).into()),
    };
    let grid_text = std::fs::read_to_string(&grid_path)
        .map_err(|e| Error::io(grid_path.display().to_string(), e))?;
    let mut cfg = ExperimentConfig::new(grid_path.display().to_string(), grid_text);

    macro_rules! resolve {
        ($field:expr, $flag:expr, $key:literal) => {
            if let Some(v) = $flag.or(kv_parse(&kv, $key)?) {
                $field = v;
            }
        };
    }
    resolve!(cfg.k, args.k, "k");
    resolve!(cfg.episodes, args.episodes, "episodes");
    resolve!(cfg.runs, args.runs, "runs");
    resolve!(cfg.base_seed, args.seed, "seed");
    resolve!(cfg.noise_level, args.noise, "noise");
    resolve!(cfg.c_conf, args.conf_c, "conf-c");
    resolve!(cfg.planner.step_size, args.pg_step, "pg-step");
    resolve!(cfg.planner.rollouts_per_gradient, args.pg_samples, "pg-samples");
    resolve!(cfg.planner.epsilon, args.pg_eps, "pg-eps");
    resolve!(cfg.planner.max_ascent_iters, args.pg_iters, "pg-iters");
    resolve!(cfg.eval_rollouts, args.eval_rollouts, "eval-rollouts");
    resolve!(cfg.horizon, args.horizon, "horizon");
    resolve!(cfg.weight_bound, args.b, "b");
    resolve!(cfg.refit_every, args.refit_every, "refit-every");
    let bonus_mode: Option<String> = args.bonus_mode.clone().or(kv.get("bonus-mode").cloned());
    if let Some(mode) = bonus_mode {
        cfg.bonus_mode = mode.parse::<BonusModeConfig>()?;
    }
    let weights_path: Option<PathBuf> = args
        .weights
        .clone()
        .or(kv.get("weights").map(PathBuf::from));
    if let Some(path) = weights_path {
        cfg.weights = Some(WeightBlocks::load_json(&path)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let cfg = resolve_run_config(&args)?;
    let out_dir = args.out.unwrap_or_else(|| PathBuf::from("out"));
    let batch = run_batch(&cfg)?;
    emit_results(&batch, &out_dir)?;
    println!(
        "{} runs x {} episodes done in {:.1}s; v_hat_star = {:.4}, final mean value = {:.4}",
        cfg.runs,
        cfg.episodes,
        batch.wall_time_secs,
        batch.v_hat_star,
        batch.final_mean_value()
    );
    println!("results written to {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.grid)
        .map_err(|e| Error::io(args.grid.display().to_string(), e))?;
    let spec = parse_grid_map(&text, args.horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let weights = spec.synthesize_true_weights(args.k, args.b, &mut rng)?;
    weights.save_json(&args.out)?;
    println!(
        "synthesized weights (k={}, d={}, B={}) -> {}",
        weights.k,
        weights.d,
        weights.bound,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn check_line(name: &str, ok: bool) -> bool {
    println!("{}: {}", name, if ok { "PASS" } else { "FAIL" });
    ok
}

/// Fast subset of the oracle/invariant suite.
fn cmd_check() -> anyhow::Result<ExitCode> {
    let mut all_ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(12345);

    // exact value vs Monte Carlo on random small MDPs
    let mut ok = true;
    for _ in 0..5 {
        let (mdp, policy) = random_small_instance(&mut rng);
        let reward = |tau: &Trajectory| tau.final_state() as f64;
        let exact = exact_value(&mdp, &policy, &reward)?;
        let n = 20_000;
        let mc = policy_value_estimate(&mdp, &policy, &reward, n, &mut rng)?;
        let sigma = (mdp.num_states() as f64) / (n as f64).sqrt();
        if (mc - exact).abs() > 3.0 * sigma {
            ok = false;
        }
    }
    all_ok &= check_line("exact value vs Monte Carlo", ok);

    // exact policy gradient vs finite differences of the exact value
    let mut ok = true;
    for _ in 0..5 {
        let (mdp, policy) = random_small_instance(&mut rng);
        let reward = |tau: &Trajectory| tau.final_state() as f64;
        let grad = exact_policy_gradient(&mdp, &policy, &reward)?;
        let value_at = |theta: &[f64]| {
            let pt = PolicyTable::from_theta(
                mdp.num_states(),
                mdp.num_actions(),
                theta.to_vec(),
            )
            .unwrap();
            exact_value(&mdp, &pt, &reward).unwrap()
        };
        let fd = finite_difference(&value_at, policy.theta(), 1e-5);
        let err =
            l2_norm(&grad.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
        if err / l2_norm(&grad).max(1.0) > 1e-7 {
            ok = false;
        }
    }
    all_ok &= check_line("exact policy gradient vs finite differences", ok);

    // MLE gradient vs finite differences
    let mut ok = true;
    for _ in 0..20 {
        let k = rng.gen_range(2..=5usize);
        let d = rng.gen_range(1..=5usize);
        let mut data = FeedbackDataset::new(k, d)?;
        for _ in 0..rng.gen_range(1..=30usize) {
            let phi: Vec<f64> =
                (0..d).map(|_| (rng.gen::<f64>() - 0.5) / (d as f64).sqrt()).collect();
            data.push(phi, rng.gen_range(0..k))?;
        }
        let w: Vec<f64> = (0..k * d).map(|_| rng.gen::<f64>() - 0.5).collect();
        let g = nll_gradient(&w, &data)?;
        let fd = finite_difference(
            &|x: &[f64]| negative_log_likelihood(x, &data).unwrap(),
            &w,
            1e-6,
        );
        let err = l2_norm(&g.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
        if err / l2_norm(&g).max(1.0) > 1e-6 {
            ok = false;
        }
    }
    all_ok &= check_line("NLL gradient vs finite differences", ok);

    // optimistic clamp invariant
    let mut ok = true;
    for _ in 0..10_000 {
        let k = rng.gen_range(2..=6usize);
        let d = rng.gen_range(1..=4usize);
        let weights: Vec<f64> = (0..k * d).map(|_| (rng.gen::<f64>() - 0.5) * 4.0).collect();
        let raw: Vec<f64> =
            (0..d).map(|_| (rng.gen::<f64>() - 0.5) / (d as f64).sqrt()).collect();
        let phi = TrajectoryFeatures::new(raw)?;
        let spec = OptimisticRewardSpec {
            weights: weights.clone(),
            k,
            n: rng.gen_range(1..1000usize),
            mode: BonusMode::Practical { c_conf: rng.gen::<f64>() * 20.0 + 1e-6 },
        };
        let est = estimated_reward(&weights, &phi, k)?;
        let opt = optimistic_reward(&spec, &phi)?;
        let top = k as f64 - 1.0;
        if !(opt <= top + 1e-12 && opt >= est.min(top) - 1e-12) {
            ok = false;
        }
    }
    all_ok &= check_line("optimistic clamp invariant", ok);

    if all_ok {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(Error::State("check suite reported failures".into()).into())
    }
}

fn random_small_instance(rng: &mut ChaCha8Rng) -> (TabularMdp, PolicyTable) {
    let s = rng.gen_range(2..=4usize);
    let a = rng.gen_range(2..=3usize);
    let h = rng.gen_range(1..=3usize);
    let mut transition = Vec::with_capacity(s * a * s);
    for _ in 0..s * a {
        transition.extend(random_distribution(s, rng));
    }
    let initial = random_distribution(s, rng);
    let mdp = TabularMdp::new(s, a, h, transition, initial).unwrap();
    let theta: Vec<f64> = (0..s * a).map(|_| rng.gen::<f64>() - 0.5).collect();
    let policy = PolicyTable::from_theta(s, a, theta).unwrap();
    (mdp, policy)
}

fn random_distribution(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}
