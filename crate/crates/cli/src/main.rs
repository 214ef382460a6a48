use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use graphterp::bandlimited::{cutoff_frequency, cutoff_frequency_with, ilsr, lsr};
use graphterp::edgelist::{format_signal, read_edge_list, read_indices, read_signal};
use graphterp::eval::{knn_predict, run_experiment, ExperimentConfig};
use graphterp::recsys::{
    cosine_item_graph, load_ratings, predict_pairs, BilateralConfig, CosineMode, DatasetFormat, Method,
    PipelineConfig,
};
use graphterp::regularized::{irbm, rbm_closed_form, RegConfig};
use graphterp::spectral::eigendecompose;
use graphterp::{FilterMode, IterResult, NormalizedLaplacian, SampleSet, StoppingRule};

/// Exit status when a run finished but some iterative solve hit its
/// iteration cap.
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(name = "graphterp", version, about = "Interpolation of graph signals and graph-based rating prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cutoff frequency and band size guaranteed by a sampling set.
    Cutoff {
        /// Edge list (`n=<count>` header, then `i<TAB>j<TAB>w` lines).
        #[arg(long)]
        graph: PathBuf,
        /// Known vertex indices, one per line.
        #[arg(long)]
        known: PathBuf,
    },
    /// Reconstruct a full graph signal from a partial one.
    Interpolate(InterpolateArgs),
    /// Predict ratings for user/item pairs from a training file.
    RecsysPredict(PredictArgs),
    /// Run a cross-validation experiment described by a TOML file.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write per-prediction CSV here.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpMethod {
    Lsr,
    Ilsr,
    Rbm,
    Irbm,
}

#[derive(Args)]
struct InterpolateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Known samples as `index<TAB>value` lines.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, value_enum)]
    method: InterpMethod,
    /// Cutoff for lsr/ilsr: `auto` or a number.
    #[arg(long, default_value = "auto")]
    omega: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    beta: Option<f64>,
    /// Use a Chebyshev filter of this degree instead of the exact spectral
    /// filter (ilsr/irbm).
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, default_value_t = StoppingRule::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = StoppingRule::default().tol)]
    tol: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PredictMethod {
    Lsr,
    Ilsr,
    Rbm,
    Irbm,
    Knn,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long, default_value = "movielens")]
    format: DatasetFormat,
    #[arg(long, value_enum, default_value = "irbm")]
    method: PredictMethod,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma_r: f64,
    /// Skip the bilateral weight adjustment.
    #[arg(long)]
    no_bilateral: bool,
    #[arg(long, default_value_t = graphterp::spectral::DEFAULT_DEGREE)]
    degree: usize,
    #[arg(long, value_enum, default_value = "zero-filled")]
    cosine: CosineArg,
    /// `user,item` pairs, one per line.
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CosineArg {
    ZeroFilled,
    CoRatedOnly,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NOT_CONVERGED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// `Ok(false)` means finished with convergence warnings.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Cutoff { graph, known } => {
            let g = read_edge_list(&graph)?;
            let idx = read_indices(&known)?;
            let samples = SampleSet::new(g.num_vertices(), idx.clone(), vec![0.0; idx.len()])?;
            let c = cutoff_frequency(&NormalizedLaplacian::new(&g), &samples)?;
            println!("omega\t{}", c.omega);
            println!("k\t{}", c.k);
            Ok(true)
        }
        Command::Interpolate(args) => interpolate(&args),
        Command::RecsysPredict(args) => recsys_predict(&args),
        Command::Eval { config, json, predictions } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_experiment(&cfg)?;
            print!("{}", out.report.to_table());
            if let Some(path) = json {
                fs::write(&path, out.report.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = predictions {
                let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = std::io::BufWriter::new(file);
                out.write_predictions_csv(&mut w)?;
                w.flush()?;
            }
            let warnings = out.report.not_converged();
            if warnings > 0 {
                log::warn!("{warnings} solves stopped at the iteration cap");
            }
            Ok(warnings == 0)
        }
    }
}

fn interpolate(args: &InterpolateArgs) -> Result<bool> {
    let g = read_edge_list(&args.graph)?;
    let (known, values): (Vec<usize>, Vec<f64>) = read_signal(&args.signal)?.into_iter().unzip();
    let samples = SampleSet::new(g.num_vertices(), known, values)?;
    let lap = NormalizedLaplacian::new(&g);
    let stop = StoppingRule::new(args.max_iters, args.tol);
    let mode = args.degree.map_or(FilterMode::Ideal, FilterMode::Polynomial);
    let omega = |basis: Option<&_>| -> Result<f64> {
        if args.omega == "auto" {
            let c = match basis {
                Some(b) => cutoff_frequency_with(&lap, &samples, b)?,
                None => cutoff_frequency(&lap, &samples)?,
            };
            log::info!("cutoff {} with {} basis vectors", c.omega, c.k);
            Ok(c.omega)
        } else {
            args.omega.parse().with_context(|| format!("bad --omega {:?}", args.omega))
        }
    };
    let reg = || -> Result<RegConfig> {
        let mut cfg = RegConfig::new(args.alpha)?.with_stop(stop);
        if let Some(beta) = args.beta {
            cfg = cfg.with_beta(beta);
        }
        Ok(cfg)
    };
    let mut converged = true;
    let mut report = |r: IterResult| {
        log::info!("{} iterations, last relative change {:.3e}", r.iterations, r.last_change);
        if !r.converged() {
            log::warn!("stopped after {} iterations without converging", r.iterations);
            converged = false;
        }
        r.signal
    };
    let signal = match args.method {
        InterpMethod::Lsr => {
            let basis = eigendecompose(&lap)?;
            lsr(&basis, &samples, omega(Some(&basis))?)?
        }
        InterpMethod::Ilsr => report(ilsr(&lap, &samples, omega(None)?, mode, &stop)?),
        InterpMethod::Rbm => rbm_closed_form(&eigendecompose(&lap)?, &samples, &reg()?)?,
        InterpMethod::Irbm => report(irbm(&lap, &samples, &reg()?, mode)?),
    };
    let text = format_signal(signal.as_slice());
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(converged)
}

fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pairs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split([',', '\t']).map(str::trim);
        match (parts.next(), parts.next()) {
            (Some(u), Some(i)) if !u.is_empty() && !i.is_empty() => pairs.push((u.to_string(), i.to_string())),
            _ => bail!("{}:{}: expected `user,item`", path.display(), no + 1),
        }
    }
    Ok(pairs)
}

fn recsys_predict(args: &PredictArgs) -> Result<bool> {
    let train = load_ratings(&args.train, args.format)?;
    let cosine = match args.cosine {
        CosineArg::ZeroFilled => CosineMode::ZeroFilled,
        CosineArg::CoRatedOnly => CosineMode::CoRatedOnly,
    };
    let g0 = cosine_item_graph(&train, cosine)?;
    let pairs = read_pairs(&args.test)?;

    let users: HashMap<&str, usize> = (0..train.num_users()).map(|u| (train.user_id(u), u)).collect();
    let items: HashMap<&str, usize> = (0..train.num_items()).map(|i| (train.item_id(i), i)).collect();
    let scale = train.scale();
    let by_user = train.by_user();
    let global = train.global_mean().unwrap_or_else(|| scale.midpoint());

    // pairs with an unseen user or item bypass the graph
    let mut resolved = Vec::new();
    let mut slots = Vec::with_capacity(pairs.len());
    for (u, i) in &pairs {
        match (users.get(u.as_str()), items.get(i.as_str())) {
            (Some(&u), Some(&i)) => {
                slots.push(Ok(resolved.len()));
                resolved.push((u, i));
            }
            (Some(&u), None) => {
                let known = &by_user[u];
                let mean = known.iter().map(|&(_, r)| r).sum::<f64>() / known.len() as f64;
                slots.push(Err(mean));
            }
            (None, Some(&i)) => slots.push(Err(graphterp::recsys::cold_start_prediction(&train.item_means(), scale, i))),
            (None, None) => slots.push(Err(global)),
        }
    }

    let mut converged = true;
    let predicted: Vec<f64> = match args.method {
        PredictMethod::Knn => resolved
            .iter()
            .map(|&(u, i)| {
                let known = &by_user[u];
                let mean = known.iter().map(|&(_, r)| r).sum::<f64>() / known.len() as f64;
                scale.clip(knn_predict(&g0, known, i, args.k).unwrap_or(mean))
            })
            .collect(),
        graph_method => {
            let method = match graph_method {
                PredictMethod::Lsr => Method::Lsr,
                PredictMethod::Ilsr => Method::Ilsr,
                PredictMethod::Rbm => Method::Rbm,
                _ => Method::Irbm,
            };
            let cfg = PipelineConfig {
                k: args.k,
                bilateral: if args.no_bilateral {
                    BilateralConfig::disabled()
                } else {
                    BilateralConfig::new(args.sigma_r)?
                },
                filter_mode: FilterMode::Polynomial(args.degree),
                alpha: args.alpha,
                beta: args.beta,
                ..PipelineConfig::default()
            };
            let (values, diag) = predict_pairs(&g0, &train, &resolved, method, &cfg)?;
            log::info!("{diag:?}");
            if diag.not_converged > 0 {
                log::warn!("{} users stopped at the iteration cap", diag.not_converged);
                converged = false;
            }
            values
        }
    };

    let file = fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "user,item,prediction")?;
    for ((u, i), slot) in pairs.iter().zip(&slots) {
        let p = match slot {
            Ok(j) => predicted[*j],
            Err(fallback) => scale.clip(*fallback),
        };
        writeln!(w, "{u},{i},{p}")?;
    }
    w.flush()?;
    Ok(converged)
}
