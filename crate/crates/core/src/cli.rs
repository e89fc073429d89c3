//! Command line front end.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::denoise::{add_noise, denoise_image, psnr};
use crate::edges::{detect_edges, EdgeConfig};
use crate::estimate::{fit_glg, root_log_marginal, FitConfig, FitReport, DEFAULT_QUAD_ORDER};
use crate::io::{read_forest_csv, read_image, write_matrix_csv, write_pgm, ParamFile};
use crate::model::{simulate_forest, TreeTopology};
use crate::states::MapConfig;
use crate::wavelet::{dwt2_forward, extract_forest, Direction, Filter, WaveletForest};

#[derive(Debug, Parser)]
#[command(name = "glg", version, about = "Gaussian-log-Gaussian wavelet tree models")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Gauss-Hermite order for latent integrals.
    #[arg(long, global = true, env = "GLG_QUAD_ORDER")]
    pub quad_order: Option<usize>,
    /// Log progress to standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a forest and its hidden states from a parameter file.
    Simulate(SimulateArgs),
    /// Fit GLG parameters to an image (one file per direction) or a forest.
    Fit(FitArgs),
    /// Add noise to an image, denoise it and report PSNR.
    Denoise(DenoiseArgs),
    /// Detect edges from MAP hidden states.
    Edges(EdgesArgs),
    /// Peak signal-to-noise ratio between two images.
    Psnr(PsnrArgs),
    /// Histogram of one subband level with the fitted marginal density.
    SubbandHist(HistArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub branching: usize,
    /// Number of trees.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trees: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_forest: PathBuf,
    #[arg(long)]
    pub out_states: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long, default_value = "daub4")]
    pub filter: Filter,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, conflicts_with = "forest", required_unless_present = "forest")]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub forest: Option<PathBuf>,
    #[command(flatten)]
    pub transform: TransformArgs,
    /// Output path prefix; images give `<prefix>.<direction>.params`, forests `<prefix>.params`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Clean reference image.
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub sigma_eps: f64,
    #[command(flatten)]
    pub transform: TransformArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clip the noisy image to [0, 1] before denoising.
    #[arg(long)]
    pub clip_noisy: bool,
    #[arg(long)]
    pub out_image: Option<PathBuf>,
    #[arg(long)]
    pub out_noisy: Option<PathBuf>,
    /// Append a result row (header written if the file is new).
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EdgesArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, default_value = "haar")]
    pub filter: Filter,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    /// Comma-separated tree levels (1 = coarsest) whose labels are dropped.
    #[arg(long, value_delimiter = ',')]
    pub mask_levels: Vec<usize>,
    #[arg(long)]
    pub out_image: PathBuf,
}

#[derive(Debug, Args)]
pub struct PsnrArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub transform: TransformArgs,
    /// Tree level to export (1 = coarsest).
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    #[arg(long, default_value = "vertical")]
    pub direction: Direction,
    #[arg(long, default_value_t = 101)]
    pub bins: usize,
    #[arg(long)]
    pub out_csv: PathBuf,
}

fn fit_config(cli: &Cli) -> FitConfig {
    FitConfig { quad_order: cli.quad_order.unwrap_or(DEFAULT_QUAD_ORDER), ..FitConfig::default() }
}

fn param_file(report: &FitReport, direction: Option<Direction>, filter: Option<Filter>, quad_order: usize) -> ParamFile {
    let mut f = ParamFile::new(report.params.clone());
    f.direction = direction;
    f.filter = filter.map(|f| f.to_string());
    f.quad_order = Some(quad_order);
    f.iterations = Some(report.iterations());
    f.converged = Some(report.converged());
    f.fallbacks = report.init.diagnostics();
    f
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let pf = ParamFile::read(&args.params)?;
    let topology = TreeTopology::new(pf.params.levels(), args.branching)?;
    let (states, forest) = simulate_forest(&pf.params, &topology, args.trees as usize, args.seed)?;
    write_matrix_csv(&args.out_forest, &topology, &forest.coefficients)?;
    if let Some(p) = &args.out_states {
        write_matrix_csv(p, &topology, &states.values)?;
    }
    Ok(())
}

fn cmd_fit(cli: &Cli, args: &FitArgs) -> anyhow::Result<()> {
    let config = fit_config(cli);
    let with_ext = |suffix: &str| {
        let mut s = args.out_prefix.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    if let Some(path) = &args.forest {
        let forest = read_forest_csv(path)?.forest;
        let report = fit_glg(&forest, &config)?;
        param_file(&report, None, None, config.quad_order).write(&with_ext(".params"))?;
        return Ok(());
    }
    let path = args.image.as_ref().context("either --image or --forest is required")?;
    let image = read_image(path)?;
    let pyramid = dwt2_forward(&image, args.transform.filter, args.transform.levels)?;
    for dir in Direction::ALL {
        let forest = extract_forest(&pyramid, dir)?;
        let report = fit_glg(&forest, &config).with_context(|| format!("fitting the {dir} subbands"))?;
        param_file(&report, Some(dir), Some(args.transform.filter), config.quad_order)
            .write(&with_ext(&format!(".{dir}.params")))?;
    }
    Ok(())
}

fn cmd_denoise(cli: &Cli, args: &DenoiseArgs) -> anyhow::Result<()> {
    let clean = read_image(&args.image)?;
    let mut noisy = add_noise(&clean, args.sigma_eps, args.seed)?;
    if args.clip_noisy {
        noisy = noisy.clipped();
    }
    let out = denoise_image(&noisy, args.transform.filter, args.transform.levels, args.sigma_eps, &fit_config(cli))?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let noisy_db = psnr(&clean, &noisy)?;
    let denoised_db = psnr(&clean, &out.image)?;
    println!("noisy_psnr={} denoised_psnr={}", fmt_db(noisy_db), fmt_db(denoised_db));
    if let Some(p) = &args.out_image {
        write_pgm(&out.image.clipped(), p)?;
    }
    if let Some(p) = &args.out_noisy {
        write_pgm(&noisy.clipped(), p)?;
    }
    if let Some(p) = &args.out_csv {
        let new = !p.exists();
        let mut f = fs::OpenOptions::new().create(true).append(true).open(p).with_context(|| format!("opening {}", p.display()))?;
        if new {
            writeln!(f, "image,sigma_eps,filter,levels,seed,clip_noisy,noisy_psnr,denoised_psnr")?;
        }
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            args.image.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default(),
            args.sigma_eps,
            args.transform.filter,
            args.transform.levels,
            args.seed,
            args.clip_noisy,
            fmt_db(noisy_db),
            fmt_db(denoised_db)
        )?;
    }
    Ok(())
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

fn cmd_edges(cli: &Cli, args: &EdgesArgs) -> anyhow::Result<()> {
    let image = read_image(&args.image)?;
    let config = EdgeConfig {
        filter: args.filter,
        levels: args.levels,
        fractile: args.p,
        masked_levels: args.mask_levels.iter().copied().collect::<BTreeSet<_>>(),
        fit: fit_config(cli),
        map: MapConfig::default(),
    };
    let det = detect_edges(&image, &config)?;
    for w in &det.warnings {
        eprintln!("warning: {w}");
    }
    write_pgm(&det.map.to_image(), &args.out_image)?;
    println!("edge_pixels={}", det.map.count());
    Ok(())
}

fn cmd_psnr(args: &PsnrArgs) -> anyhow::Result<()> {
    let a = read_image(&args.reference)?;
    let b = read_image(&args.test)?;
    println!("{}", fmt_db(psnr(&a, &b)?));
    Ok(())
}

fn cmd_subband_hist(cli: &Cli, args: &HistArgs) -> anyhow::Result<()> {
    if args.bins < 2 {
        bail!("need at least two bins");
    }
    let image = read_image(&args.image)?;
    let pyramid = dwt2_forward(&image, args.transform.filter, args.transform.levels)?;
    if args.level == 0 || args.level > pyramid.levels() {
        bail!("level must be in 1..={}", pyramid.levels());
    }
    let forest: WaveletForest = extract_forest(&pyramid, args.direction)?;
    let config = fit_config(cli);
    let report = fit_glg(&forest, &config)?;
    let lm = report.params.level_moments();
    let (mu, var) = (lm.mu[args.level - 1], lm.sigma_sq[args.level - 1]);
    let band = pyramid.subband(args.direction, args.level);
    let extent = band.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let width = 2.0 * extent / args.bins as f64;
    let mut counts = vec![0usize; args.bins];
    for &v in band {
        let b = (((v + extent) / width).floor() as usize).min(args.bins - 1);
        counts[b] += 1;
    }
    let rule = crate::estimate::gauss_hermite(config.quad_order)?;
    let mut out = String::from("bin_center,count,glg_density\n");
    for (b, c) in counts.iter().enumerate() {
        let center = -extent + (b as f64 + 0.5) * width;
        let density = root_log_marginal(&rule, center, mu, var).exp();
        out.push_str(&format!("{center},{c},{density}\n"));
    }
    write_file(&args.out_csv, out.as_bytes())
}

fn write_file(path: &Path, data: &[u8]) -> anyhow::Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(cli, a),
        Command::Denoise(a) => cmd_denoise(cli, a),
        Command::Edges(a) => cmd_edges(cli, a),
        Command::Psnr(a) => cmd_psnr(a),
        Command::SubbandHist(a) => cmd_subband_hist(cli, a),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = if cli.verbose { "debug" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
