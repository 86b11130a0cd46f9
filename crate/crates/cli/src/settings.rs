//! Experiment settings: defaults, overlaid by a `key = value` config file,
//! overlaid by command-line flags. Every flag has a config-file key of the
//! same name (minus the leading `--`).

use std::fs;
use std::path::PathBuf;

use clap::Args;
use comid::sim::{read_trace, Algo, DelaySchedule, InitKind, SimConfig};
use comid::{Error, Result};

/// Seed salt so the random delay draw does not share a stream with the
/// sample shuffle.
const DELAY_SEED_SALT: u64 = 0x64656c61;

/// Flags shared by `run` and (as common overrides) `compare`. All optional:
/// absent flags fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file of `key = value` lines (`#` comments); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Optimizer: dsgd | comid | comidl2 | l2trick | ftrl | aftrl.
    #[arg(long)]
    pub algo: Option<String>,

    /// Worker count (threaded mode thread count; defaults to tau-max + 1).
    #[arg(long)]
    pub workers: Option<usize>,

    /// Staleness bound (defaults to workers - 1).
    #[arg(long = "tau-max")]
    pub tau_max: Option<u64>,

    /// Delay schedule in simulated mode: fixed | random.
    #[arg(long)]
    pub delay: Option<String>,

    /// Step size for the dense-iterate optimizers.
    #[arg(long)]
    pub eta: Option<f64>,

    /// L2 coefficient for the dense-iterate optimizers.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// L1 coefficient (comid/ftrl composite term, aftrl threshold).
    #[arg(long)]
    pub lambda1: Option<f64>,

    /// Per-coordinate FTRL L2 coefficient.
    #[arg(long)]
    pub lambda2: Option<f64>,

    /// Per-coordinate FTRL learning-rate numerator.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Per-coordinate FTRL learning-rate offset.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Passes over the dataset; 0 emits the CSV header only.
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Seed for shuffling, synthetic data, and random delays.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Dataset path (libsvm text, `.gz` accepted).
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Synthetic dataset profile `dim,n,nnz_lo,nnz_hi`.
    #[arg(long)]
    pub synthetic: Option<String>,

    /// Label synthetic data with a planted model of this weight scale
    /// (default: random labels).
    #[arg(long = "planted-scale")]
    pub planted_scale: Option<f64>,

    /// Execution mode: sim (deterministic pipeline) | threaded (real threads).
    #[arg(long)]
    pub mode: Option<String>,

    /// Steps between CSV rows (default: one epoch).
    #[arg(long = "eval-every")]
    pub eval_every: Option<u64>,

    /// CSV output path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Seed the aftrl accumulators so every weight starts at one.
    #[arg(
        long = "init-z-for-w1-ones",
        num_args = 0..=1,
        default_missing_value = "true"
    )]
    pub init_z_for_w1_ones: Option<bool>,

    /// Replay a recorded delay trace (simulated mode).
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// Record the realized delay trace to this path.
    #[arg(long = "trace-out")]
    pub trace_out: Option<PathBuf>,
}

/// Single text-valued overlay slot: tracks whether any layer set it.
#[derive(Debug, Clone, Default)]
struct Overlay {
    pairs: Vec<(String, String)>,
}

impl Overlay {
    fn set(&mut self, key: &str, value: String) {
        self.pairs.push((key.to_string(), value));
    }

    fn from_file(path: &PathBuf) -> Result<Overlay> {
        let shown = path.display().to_string();
        let text = fs::read_to_string(path)?;
        let mut o = Overlay::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: shown.clone(),
                    line: lineno + 1,
                    msg: format!("expected `key = value`, got {line:?}"),
                });
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Parse {
                    path: shown.clone(),
                    line: lineno + 1,
                    msg: format!("unknown key {key:?}"),
                });
            }
            o.set(key, value.trim().to_string());
        }
        Ok(o)
    }

    fn from_args(args: &RunArgs) -> Overlay {
        let mut o = Overlay::default();
        macro_rules! put {
            ($field:ident, $key:literal) => {
                if let Some(v) = &args.$field {
                    o.set($key, v.to_string());
                }
            };
        }
        put!(algo, "algo");
        put!(workers, "workers");
        put!(tau_max, "tau-max");
        put!(delay, "delay");
        put!(eta, "eta");
        put!(lambda, "lambda");
        put!(lambda1, "lambda1");
        put!(lambda2, "lambda2");
        put!(alpha, "alpha");
        put!(beta, "beta");
        put!(epochs, "epochs");
        put!(seed, "seed");
        put!(synthetic, "synthetic");
        put!(planted_scale, "planted-scale");
        put!(mode, "mode");
        put!(eval_every, "eval-every");
        put!(init_z_for_w1_ones, "init-z-for-w1-ones");
        if let Some(v) = &args.data {
            o.set("data", v.display().to_string());
        }
        if let Some(v) = &args.out {
            o.set("out", v.display().to_string());
        }
        if let Some(v) = &args.trace {
            o.set("trace", v.display().to_string());
        }
        if let Some(v) = &args.trace_out {
            o.set("trace-out", v.display().to_string());
        }
        o
    }

    /// Last write wins.
    fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

const KNOWN_KEYS: &[&str] = &[
    "algo",
    "workers",
    "tau-max",
    "delay",
    "eta",
    "lambda",
    "lambda1",
    "lambda2",
    "alpha",
    "beta",
    "epochs",
    "seed",
    "data",
    "synthetic",
    "planted-scale",
    "mode",
    "eval-every",
    "out",
    "init-z-for-w1-ones",
    "trace",
    "trace-out",
];

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic {
        dim: usize,
        n: usize,
        nnz_lo: usize,
        nnz_hi: usize,
        planted_scale: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sim,
    Threaded,
}

/// Fully resolved experiment: what to run, on what data, where to write.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub cfg: SimConfig,
    pub source: DataSource,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
}

fn parse_synthetic(v: &str) -> Result<(usize, usize, usize, usize)> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "--synthetic wants `dim,n,nnz_lo,nnz_hi`, got {v:?}"
        )));
    }
    Ok((
        parse_num("synthetic dim", parts[0])?,
        parse_num("synthetic n", parts[1])?,
        parse_num("synthetic nnz_lo", parts[2])?,
        parse_num("synthetic nnz_hi", parts[3])?,
    ))
}

/// Defaults <- config file <- flags, then cross-field resolution.
pub fn resolve(args: &RunArgs) -> Result<RunPlan> {
    let mut o = Overlay::default();
    if let Some(path) = &args.config {
        let file = Overlay::from_file(path)?;
        o.pairs.extend(file.pairs);
    }
    o.pairs.extend(Overlay::from_args(args).pairs);

    let mut cfg = SimConfig::default();
    if let Some(v) = o.get("algo") {
        cfg.algo = Algo::parse(v)?;
    }
    if let Some(v) = o.get("eta") {
        cfg.eta = parse_num("eta", v)?;
    }
    if let Some(v) = o.get("lambda") {
        cfg.lambda = parse_num("lambda", v)?;
    }
    if let Some(v) = o.get("lambda1") {
        cfg.lambda1 = parse_num("lambda1", v)?;
    }
    if let Some(v) = o.get("lambda2") {
        cfg.lambda2 = parse_num("lambda2", v)?;
    }
    if let Some(v) = o.get("alpha") {
        cfg.alpha = parse_num("alpha", v)?;
    }
    if let Some(v) = o.get("beta") {
        cfg.beta = parse_num("beta", v)?;
    }
    if let Some(v) = o.get("epochs") {
        cfg.epochs = parse_num("epochs", v)?;
    }
    if let Some(v) = o.get("seed") {
        cfg.seed = parse_num("seed", v)?;
    }
    if let Some(v) = o.get("eval-every") {
        cfg.eval_every = Some(parse_num("eval-every", v)?);
    }
    if let Some(v) = o.get("init-z-for-w1-ones") {
        if parse_num::<bool>("init-z-for-w1-ones", v)? {
            cfg.init = InitKind::FtrlOnes;
        }
    }

    // Delay schedule: an explicit trace wins; otherwise fixed/random under
    // the staleness bound. Workers and tau-max default off each other.
    let explicit_tau: Option<u64> = match o.get("tau-max") {
        Some(v) => Some(parse_num("tau-max", v)?),
        None => None,
    };
    let explicit_workers: Option<usize> = match o.get("workers") {
        Some(v) => Some(parse_num("workers", v)?),
        None => None,
    };
    let trace_schedule = match o.get("trace") {
        Some(p) => Some(read_trace(p)?),
        None => None,
    };
    let tau_max = match (&trace_schedule, explicit_tau) {
        (Some(s), Some(t)) if s.tau_max() != t => {
            return Err(Error::Config(format!(
                "trace header has tau_max={} but --tau-max says {t}",
                s.tau_max()
            )));
        }
        (Some(s), _) => s.tau_max(),
        (None, Some(t)) => t,
        (None, None) => explicit_workers.map_or(0, |w| w.saturating_sub(1) as u64),
    };
    cfg.workers = explicit_workers.unwrap_or(tau_max as usize + 1);
    cfg.delay = match trace_schedule {
        Some(s) => s,
        None => match o.get("delay").unwrap_or("fixed") {
            "fixed" => DelaySchedule::Fixed { tau_max },
            "random" => DelaySchedule::RandomBounded {
                tau_max,
                seed: cfg.seed.wrapping_add(DELAY_SEED_SALT),
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown delay schedule {other:?} (expected fixed|random)"
                )))
            }
        },
    };

    let source = match (o.get("data"), o.get("synthetic")) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "pick one data source: --data or --synthetic".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "a data source is required: --data or --synthetic".into(),
            ))
        }
        (Some(p), None) => {
            if o.get("planted-scale").is_some() {
                return Err(Error::Config(
                    "--planted-scale applies to synthetic data only".into(),
                ));
            }
            DataSource::File(PathBuf::from(p))
        }
        (None, Some(v)) => {
            let (dim, n, nnz_lo, nnz_hi) = parse_synthetic(v)?;
            let planted_scale = match o.get("planted-scale") {
                Some(s) => Some(parse_num("planted-scale", s)?),
                None => None,
            };
            DataSource::Synthetic {
                dim,
                n,
                nnz_lo,
                nnz_hi,
                planted_scale,
            }
        }
    };

    let mode = match o.get("mode").unwrap_or("sim") {
        "sim" => Mode::Sim,
        "threaded" => Mode::Threaded,
        other => {
            return Err(Error::Config(format!(
                "unknown mode {other:?} (expected sim|threaded)"
            )))
        }
    };

    cfg.validate()?;
    Ok(RunPlan {
        cfg,
        source,
        mode,
        out: o.get("out").map(PathBuf::from),
        trace_out: o.get("trace-out").map(PathBuf::from),
    })
}
