//! Command-line front end.
//!
//! Each subcommand starts from its defaults, or from `--config <file>` when
//! given, and then applies the flags on top. Exit codes: 0 success, 1
//! runtime error, 2 usage or validation error.

mod config;
mod execute;

pub use config::*;
pub use execute::{execute, RunOutput, Table, MAX_CURVE_K};

use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

use crate::error::{invalid, Error, Result};
use crate::iid::{DeltaMixture, KickDistribution};
use crate::memory::KernelVariant;

#[derive(Parser, Debug)]
#[command(name = "stochq", version, about = "Stochastic qubit decoherence, wheel games and the random search game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Independent phase kicks.
    Iid(IidArgs),
    /// Phase kicks with one step of memory.
    Memory(MemoryArgs),
    /// Damping plus phase channel with noisy parameters.
    Dissipative(DissipativeArgs),
    /// Vector-rotating wheel games.
    Parrondo(ParrondoArgs),
    /// Random A/B search game.
    Grover(GroverArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DistKind {
    Delta,
    Gaussian,
    Exponential,
}

#[derive(Args, Debug)]
struct IidArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    dist: Option<DistKind>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    tau1: Option<f64>,
    /// Delta mixture atoms as `weight:angle,weight:angle,...`.
    #[arg(long, allow_hyphen_values = true)]
    atoms: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    tau0: Option<f64>,
    /// Initial state as `a,b_re,b_im,c`.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Skip Monte Carlo.
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct MemoryArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<KernelVariant>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct DissipativeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    lambda_ad: Option<f64>,
    #[arg(long)]
    lambda_pd: Option<f64>,
    #[arg(long)]
    first_order_limit: Option<f64>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct ParrondoArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated odd game moduli.
    #[arg(long, value_delimiter = ',')]
    moduli: Option<Vec<u64>>,
    /// Skip the simulation.
    #[arg(long)]
    exact: bool,
    /// Exact win probability for each of the first N rounds.
    #[arg(long)]
    transient: Option<usize>,
}

#[derive(Args, Debug)]
struct GroverArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, alias = "n")]
    n_qubits: Option<u32>,
    #[arg(long)]
    target: Option<u64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyKind>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    k_star: Option<u64>,
    #[arg(long)]
    max_k: Option<u64>,
}

fn parse_variant(s: &str) -> std::result::Result<KernelVariant, String> {
    match s {
        "pure-a" | "pure_a" | "a" => Ok(KernelVariant::PureA),
        "pure-b" | "pure_b" | "b" => Ok(KernelVariant::PureB),
        "combined" => Ok(KernelVariant::Combined),
        _ => Err(format!("unknown variant {s:?} (expected pure-a, pure-b or combined)")),
    }
}

fn parse_floats(s: &str, sep: char) -> Result<Vec<f64>> {
    s.split(sep)
        .map(|x| x.trim().parse::<f64>().map_err(|_| invalid(format!("cannot parse {x:?} as a number"))))
        .collect()
}

fn parse_rho(s: &str) -> Result<InitialState> {
    match parse_floats(s, ',')?[..] {
        [a, b_re, b_im, c] => Ok(InitialState { a, b_re, b_im, c }),
        _ => Err(invalid("--rho takes four values a,b_re,b_im,c")),
    }
}

fn parse_atoms(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|pair| match parse_floats(pair, ':')?[..] {
            [w, angle] => Ok((w, angle)),
            _ => Err(invalid(format!("atom {pair:?} is not weight:angle"))),
        })
        .collect()
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn merge_dist(current: &KickDistribution, a: &IidArgs) -> Result<KickDistribution> {
    let kind = a.dist.unwrap_or(match current {
        KickDistribution::DeltaMixture { .. } => DistKind::Delta,
        KickDistribution::Gaussian { .. } => DistKind::Gaussian,
        KickDistribution::Exponential { .. } => DistKind::Exponential,
    });
    let need = |v: Option<f64>, old: Option<f64>, name: &str| {
        v.or(old).ok_or_else(|| invalid(format!("--{name} is required for this distribution")))
    };
    Ok(match kind {
        DistKind::Gaussian => {
            let (mu0, s0) = match *current {
                KickDistribution::Gaussian { mu, sigma2 } => (Some(mu), Some(sigma2)),
                _ => (None, None),
            };
            KickDistribution::Gaussian { mu: need(a.mu, mu0.or(Some(0.0)), "mu")?, sigma2: need(a.sigma2, s0, "sigma2")? }
        }
        DistKind::Exponential => {
            let (o0, t0) = match *current {
                KickDistribution::Exponential { omega, tau1 } => (Some(omega), Some(tau1)),
                _ => (None, None),
            };
            KickDistribution::Exponential { omega: need(a.omega, o0, "omega")?, tau1: need(a.tau1, t0, "tau1")? }
        }
        DistKind::Delta => match (&a.atoms, current) {
            (Some(s), _) => KickDistribution::DeltaMixture { atoms: DeltaMixture::new(parse_atoms(s)?)? },
            (None, KickDistribution::DeltaMixture { .. }) => current.clone(),
            (None, _) => return Err(invalid("--atoms is required for a delta mixture")),
        },
    })
}

fn load_config(path: &PathBuf, command: &str) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| invalid(format!("bad config {}: {e}", path.display())))?;
    if cfg.params.command() != command {
        return Err(invalid(format!("config is for `{}`, not `{command}`", cfg.params.command())));
    }
    Ok(cfg)
}

fn base(common: &Common, command: &str, default: Params) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p, command)?,
        None => RunConfig::new(default),
    };
    set(&mut cfg.seed, common.seed);
    set(&mut cfg.trials, common.trials);
    set(&mut cfg.format, common.format);
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    Ok(cfg)
}

fn build(command: Command) -> Result<(RunConfig, Option<usize>)> {
    macro_rules! params {
        ($cfg:expr, $v:ident) => {
            match &mut $cfg.params {
                Params::$v(p) => p,
                _ => unreachable!("command checked on load"),
            }
        };
    }
    Ok(match command {
        Command::Iid(a) => {
            let mut cfg = base(&a.common, "iid", Params::Iid(IidParams::default()))?;
            let p = params!(cfg, Iid);
            let any_dist = a.dist.is_some() || a.mu.is_some() || a.sigma2.is_some() || a.omega.is_some() || a.tau1.is_some() || a.atoms.is_some();
            if any_dist {
                p.dist = merge_dist(&p.dist, &a)?;
            }
            set(&mut p.steps, a.steps);
            set(&mut p.tau0, a.tau0);
            set(&mut p.initial, a.rho.as_deref().map(parse_rho).transpose()?);
            p.exact |= a.exact;
            (cfg, a.common.threads)
        }
        Command::Memory(a) => {
            let mut cfg = base(&a.common, "memory", Params::Memory(MemoryParams::default()))?;
            let p = params!(cfg, Memory);
            set(&mut p.variant, a.variant);
            set(&mut p.epsilon, a.epsilon);
            set(&mut p.steps, a.steps);
            set(&mut p.initial, a.rho.as_deref().map(parse_rho).transpose()?);
            p.exact |= a.exact;
            (cfg, a.common.threads)
        }
        Command::Dissipative(a) => {
            let mut cfg = base(&a.common, "dissipative", Params::Dissipative(DissipativeParams::default()))?;
            let p = params!(cfg, Dissipative);
            set(&mut p.p, a.p);
            set(&mut p.lambda_ad, a.lambda_ad);
            set(&mut p.lambda_pd, a.lambda_pd);
            set(&mut p.first_order_limit, a.first_order_limit);
            set(&mut p.tau0, a.tau0);
            set(&mut p.initial, a.rho.as_deref().map(parse_rho).transpose()?);
            p.exact |= a.exact;
            (cfg, a.common.threads)
        }
        Command::Parrondo(a) => {
            let mut cfg = base(&a.common, "parrondo", Params::Parrondo(ParrondoParams::default()))?;
            let p = params!(cfg, Parrondo);
            set(&mut p.moduli, a.moduli);
            if a.transient.is_some() {
                p.transient = a.transient;
            }
            p.exact |= a.exact;
            (cfg, a.common.threads)
        }
        Command::Grover(a) => {
            let mut cfg = base(&a.common, "grover", Params::Grover(GroverParams::default()))?;
            let p = params!(cfg, Grover);
            set(&mut p.n_qubits, a.n_qubits);
            set(&mut p.target, a.target);
            set(&mut p.strategy, a.strategy);
            if a.m.is_some() {
                p.m = a.m;
            }
            if a.k_star.is_some() {
                p.k_star = a.k_star;
            }
            if a.max_k.is_some() {
                p.max_k = a.max_k;
            }
            (cfg, a.common.threads)
        }
    })
}

/// Runs `config` on a pool of `threads` workers (the global pool if `None`).
pub fn execute_with_threads(config: &RunConfig, threads: Option<usize>) -> Result<RunOutput> {
    match threads {
        None => execute(config),
        Some(0) => Err(invalid("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Capacity(format!("thread pool: {e}")))?
            .install(|| execute(config)),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        1
    }
}

/// Entry point for the binary; returns the process exit code.
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
    let (cfg, threads) = match build(cli.command) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let out = match execute_with_threads(&cfg, threads).and_then(|o| o.render(cfg.format)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, out),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    0
}
