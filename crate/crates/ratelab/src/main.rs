//! Command line interface: simulate paths, build approximators, evaluate
//! networks, price payoffs, run the rate studies and the basket demo.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pidenet::builder::Builder;
use pidenet::model::{model_from_file, ModelFile};
use pidenet::pricing::{
    mc_price, payoff_network, schedule_from_epsilon, CalibrationConstants, McConfig, PayoffKind,
};
use pidenet::simulate::{moment_probe, terminal_mean, PathParams};
use ratelab::config::{StudyConfig, StudyKind};
use ratelab::study::{run_basket_demo, run_study, BasketDemoConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pidenet",
    about = "Jump-diffusion simulation and ReLU network compilation"
)]
struct Cli {
    /// Worker threads (scheduling only; results are thread-count invariant).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArg {
    /// Model specification file (JSON).
    #[arg(long)]
    model: PathBuf,
}

fn load_model(path: &PathBuf) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading model {}", path.display()))?;
    ModelFile::from_json(&text).map_err(|e| anyhow!("{e}"))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("{e}: {t:?}")))
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo simulation summary: terminal mean and second moment.
    Simulate {
        #[command(flatten)]
        model: ModelArg,
        /// Initial state, comma separated.
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long)]
        seed: u64,
        /// CSV output: coordinate, mean, std_error.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the approximator network for a parametric basket payoff.
    Build {
        #[command(flatten)]
        model: ModelArg,
        /// Basket weights, comma separated (defaults to equal weights).
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Calibration constant of the schedule.
        #[arg(long, default_value_t = 0.1)]
        c_cal: f64,
        #[arg(long)]
        seed: u64,
        /// Output path for the approximator JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a stored network or approximator at a point.
    Eval {
        /// Network or approximator JSON file.
        #[arg(long)]
        net: PathBuf,
        /// Input vector, comma separated (approximators take x followed by K).
        #[arg(long)]
        input: String,
    },
    /// Monte Carlo price of a payoff under a model.
    Price {
        #[command(flatten)]
        model: ModelArg,
        /// Payoff kind: basket-call, basket-put, call-on-max, asian-call.
        #[arg(long, default_value = "basket-call")]
        payoff: String,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        strike: f64,
        /// Monitoring dates for the Asian payoff.
        #[arg(long, default_value_t = 4)]
        monitors: usize,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Run a rate study from a config file and/or flags.
    Study {
        /// Study config JSON; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Study kind: euler-rate, trunc-rate, comp-mc-rate, size-scaling.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<usize>,
        /// Euler-rate exponents k (h = T / 2^k), comma separated.
        #[arg(long)]
        h_ladder: Option<String>,
        #[arg(long)]
        ref_k: Option<u32>,
        /// Truncation levels, comma separated, descending.
        #[arg(long)]
        delta_ladder: Option<String>,
        /// Compensator sample counts, comma separated.
        #[arg(long)]
        m_ladder: Option<String>,
        /// Accuracies for the size study, comma separated.
        #[arg(long)]
        eps_ladder: Option<String>,
        /// Dimensions for the size study, comma separated.
        #[arg(long)]
        d_ladder: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strike-parametric basket demo: network prices against Monte Carlo.
    Basket {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        weights: Option<String>,
        /// Strikes, comma separated.
        #[arg(long)]
        strikes: String,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0.1)]
        c_cal: f64,
        #[arg(long, default_value_t = 100_000)]
        ref_paths: usize,
        #[arg(long, default_value_t = 10)]
        max_attempts: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("building the thread pool")?;
    }
    match cli.command {
        Command::Simulate {
            model,
            x,
            t,
            steps,
            delta,
            paths,
            seed,
            out,
        } => {
            let file = load_model(&model.model)?;
            let (spec, _) = model_from_file(&file).map_err(|e| anyhow!("{e}"))?;
            let x0 = parse_f64_list(&x)?;
            let params = PathParams::new(t, steps).with_delta(delta);
            let (mean, se) =
                terminal_mean(&spec, &x0, &params, paths, seed).map_err(|e| anyhow!("{e}"))?;
            let probe =
                moment_probe(&spec, &x0, t, &params, paths, seed).map_err(|e| anyhow!("{e}"))?;
            println!("terminal mean over {paths} paths (T = {t}, N = {steps}):");
            for (j, (m, s)) in mean.iter().zip(&se).enumerate() {
                println!("  x[{j}] = {m:.6} ± {s:.2e}");
            }
            println!(
                "second moment E|X_T|^2 = {:.6} ± {:.2e}",
                probe.at_time.0, probe.at_time.1
            );
            if let Some(path) = out {
                let mut csv = String::from("coordinate,mean,std_error\n");
                for (j, (m, s)) in mean.iter().zip(&se).enumerate() {
                    csv.push_str(&format!("{j},{m},{s}\n"));
                }
                std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Build {
            model,
            weights,
            epsilon,
            t,
            c_cal,
            seed,
            out,
        } => {
            let file = load_model(&model.model)?;
            let (spec, nets) = model_from_file(&file).map_err(|e| anyhow!("{e}"))?;
            let d = spec.d;
            let w = match weights {
                Some(s) => parse_f64_list(&s)?,
                None => vec![1.0 / d as f64; d],
            };
            let payoff = payoff_network(PayoffKind::ParametricBasketCall { weights: w }, d)
                .map_err(|e| anyhow!("{e}"))?;
            let builder = Builder::new(&spec, &nets).map_err(|e| anyhow!("{e}"))?;
            let schedule = schedule_from_epsilon(
                epsilon,
                d,
                t,
                &spec.constants,
                &CalibrationConstants {
                    c_cal,
                    r: 1.0,
                    q_tilde: None,
                },
                builder.mode,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let approx = builder
                .assemble_approximator(&payoff.hook(t), &schedule, seed)
                .map_err(|e| anyhow!("{e}"))?;
            println!(
                "assembled approximator: size {}, depth {}, {} realizations, N = {}",
                approx.net.size(),
                approx.net.depth(),
                schedule.n_realizations,
                schedule.n_steps
            );
            let violations = approx.ledger.violations().len();
            println!(
                "size ledger: {} entries, {} violation(s)",
                approx.ledger.entries.len(),
                violations
            );
            ratelab::persist::save_approximator(&out, &approx)?;
            println!("wrote {}", out.display());
        }
        Command::Eval { net, input } => {
            let x = parse_f64_list(&input)?;
            let text = std::fs::read_to_string(&net)
                .with_context(|| format!("reading {}", net.display()))?;
            if text.contains("\"pidenet-approximator\"") {
                let approx = pidenet::builder::AssembledApproximator::from_json(&text)
                    .map_err(|e| anyhow!("{e}"))?;
                let (xs, ks) = x.split_at(approx.d);
                let v = approx.eval(xs, ks).map_err(|e| anyhow!("{e}"))?;
                println!("{v}");
            } else {
                let network =
                    pidenet::relu_net::ReluNetwork::from_json(&text).map_err(|e| anyhow!("{e}"))?;
                let v = network.eval(&x).map_err(|e| anyhow!("{e}"))?;
                let cells: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
                println!("{}", cells.join(","));
            }
        }
        Command::Price {
            model,
            payoff,
            weights,
            strike,
            monitors,
            x,
            t,
            steps,
            delta,
            paths,
            seed,
        } => {
            let file = load_model(&model.model)?;
            let (spec, _) = model_from_file(&file).map_err(|e| anyhow!("{e}"))?;
            let d = spec.d;
            let w = match weights {
                Some(s) => parse_f64_list(&s)?,
                None => vec![1.0 / d as f64; d],
            };
            let kind = match payoff.as_str() {
                "basket-call" => PayoffKind::BasketCall { weights: w, strike },
                "basket-put" => PayoffKind::BasketPut { weights: w, strike },
                "call-on-max" => PayoffKind::CallOnMax { strike },
                "asian-call" => PayoffKind::DiscreteAsianCall {
                    weights: w,
                    monitors,
                    strike,
                },
                other => bail!("unknown payoff kind {other:?}"),
            };
            let p = payoff_network(kind, d).map_err(|e| anyhow!("{e}"))?;
            let x0 = parse_f64_list(&x)?;
            let cfg = McConfig {
                t_horizon: t,
                n_steps: steps,
                delta,
                n_paths: paths,
            };
            let (price, se) =
                mc_price(&spec, &p, &x0, &[], &cfg, seed).map_err(|e| anyhow!("{e}"))?;
            println!("price {price:.6} ± {se:.2e} ({paths} paths, N = {steps})");
        }
        Command::Study {
            config,
            kind,
            model,
            seed,
            paths,
            h_ladder,
            ref_k,
            delta_ladder,
            m_ladder,
            eps_ladder,
            d_ladder,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => StudyConfig::load(&path)?,
                None => {
                    let kind_str = kind
                        .clone()
                        .ok_or_else(|| anyhow!("--kind is required without --config"))?;
                    let seed =
                        seed.ok_or_else(|| anyhow!("--seed is required without --config"))?;
                    StudyConfig {
                        study: kind_str.parse()?,
                        seed,
                        model: None,
                        model_path: None,
                        n_paths: 10_000,
                        x0: None,
                        t_horizon: 1.0,
                        k_ladder: vec![],
                        ref_k: None,
                        delta_ladder: vec![],
                        ref_delta: None,
                        trunc_n_steps: None,
                        m_ladder: vec![],
                        mc_n_steps: None,
                        mc_delta: None,
                        eps_ladder: vec![],
                        d_ladder: vec![],
                        c_cal: None,
                        out: None,
                    }
                }
            };
            if let Some(k) = kind {
                cfg.study = k.parse()?;
            }
            if let Some(p) = model {
                cfg.model_path = Some(p);
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(p) = paths {
                cfg.n_paths = p;
            }
            if let Some(s) = h_ladder {
                cfg.k_ladder = s
                    .split(',')
                    .map(|t| t.trim().parse::<u32>().map_err(|e| anyhow!("{e}")))
                    .collect::<Result<_>>()?;
            }
            if let Some(k) = ref_k {
                cfg.ref_k = Some(k);
            }
            if let Some(s) = delta_ladder {
                cfg.delta_ladder = parse_f64_list(&s)?;
            }
            if let Some(s) = m_ladder {
                cfg.m_ladder = s
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("{e}")))
                    .collect::<Result<_>>()?;
            }
            if let Some(s) = eps_ladder {
                cfg.eps_ladder = parse_f64_list(&s)?;
            }
            if let Some(s) = d_ladder {
                cfg.d_ladder = s
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("{e}")))
                    .collect::<Result<_>>()?;
            }
            if let Some(p) = out {
                cfg.out = Some(p);
            }
            // defaults matching the study definitions
            match cfg.study {
                StudyKind::EulerRate if cfg.k_ladder.is_empty() => {
                    cfg.k_ladder = (4..=9).collect();
                    cfg.ref_k = cfg.ref_k.or(Some(12));
                }
                StudyKind::TruncRate if cfg.delta_ladder.is_empty() => {
                    cfg.delta_ladder = vec![0.4, 0.2, 0.1, 0.05];
                }
                StudyKind::CompMcRate if cfg.m_ladder.is_empty() => {
                    cfg.m_ladder = vec![4, 16, 64, 256];
                }
                StudyKind::SizeScaling if cfg.eps_ladder.is_empty() => {
                    cfg.eps_ladder = vec![1.0, 0.5, 0.25, 0.125];
                    if cfg.d_ladder.is_empty() {
                        cfg.d_ladder = vec![1, 2, 4, 8];
                    }
                }
                _ => {}
            }
            let result = run_study(&cfg)?;
            print!("{}", result.summary());
            if let Some(path) = &cfg.out {
                println!("wrote {}", path.display());
            }
        }
        Command::Basket {
            model,
            x0,
            weights,
            strikes,
            epsilon,
            t,
            c_cal,
            ref_paths,
            max_attempts,
            seed,
            out,
        } => {
            let file = load_model(&model.model)?;
            let x0 = parse_f64_list(&x0)?;
            let d = x0.len();
            let weights = match weights {
                Some(s) => parse_f64_list(&s)?,
                None => vec![1.0 / d as f64; d],
            };
            let cfg = BasketDemoConfig {
                model: file,
                x0,
                weights,
                strikes: parse_f64_list(&strikes)?,
                epsilon,
                t_horizon: t,
                seed,
                c_cal,
                max_attempts,
                ref_paths,
            };
            let result = run_basket_demo(&cfg)?;
            print!("{}", result.summary());
            if let Some(path) = out {
                std::fs::write(&path, result.to_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
