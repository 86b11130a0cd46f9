//! Deterministic event-driven runner.
//!
//! The gradient applied at step `t` must be evaluated at snapshot
//! `tau(t) <= t`, so the runner pipelines: when the server state reaches
//! version `v` it first evaluates the gradients of every future step whose
//! snapshot is `v` (into a pending window of at most `tau_max + 1` slots),
//! then applies the pending message for step `v`. No dense state is ever
//! copied except for the delayed-SGD baseline, whose protocol transmits a
//! dense term per message.

use std::time::Instant;

use super::config::{sample_stream, Algo, InitKind, SimConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{composite_grad_norm, logloss_dataset, GradBoundTracker, RunRecord};
use crate::objectives::{sigmoid, LabeledSample, QuadraticMap, Regularizer};
use crate::optim::{
    comid_l2_closed_step, comid_step_generic, dsgd_step, ftrl_argmin_step, ftrl_coordinate_update,
    l2_trick_step, FtrlArgminState, FtrlState, GradientMsg, ModelState,
};
use crate::sparse::{DenseVec, SparseVec};

/// A worker-to-server message: which step it fills, who sent it, which
/// sample it was computed on, and the gradient itself.
#[derive(Debug, Clone)]
pub struct SimEvent {
    pub step: u64,
    pub worker: usize,
    pub sample_idx: usize,
    pub msg: GradientMsg,
}

/// Transmission accounting: sparse algorithms pay the gradient support,
/// the dense baseline pays the full dimension per push.
#[derive(Debug, Clone, Copy)]
pub enum TxBaseline {
    Dense(usize),
    Sparse,
}

#[derive(Debug, Clone)]
pub struct TxAccounting {
    baseline: TxBaseline,
    total: u64,
}

impl TxAccounting {
    pub fn new(baseline: TxBaseline) -> Self {
        Self { baseline, total: 0 }
    }

    pub fn push(&mut self, msg: &GradientMsg) {
        self.total += match self.baseline {
            TxBaseline::Dense(d) => d as u64,
            TxBaseline::Sparse => msg.nnz_pushed as u64,
        };
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

pub(crate) fn tx_baseline_for(algo: Algo, dim: usize) -> TxBaseline {
    match algo {
        Algo::Dsgd => TxBaseline::Dense(dim),
        _ => TxBaseline::Sparse,
    }
}

/// Per-algorithm server state. Weight reads go through `weight`, so the
/// per-coordinate FTRL state materializes lazily and nothing else pays for
/// it.
pub(crate) enum AlgoState {
    Dense(ModelState),
    Coord(FtrlState),
    Argmin(FtrlArgminState),
}

impl AlgoState {
    pub(crate) fn new(cfg: &SimConfig, dim: usize) -> Result<Self> {
        Ok(match cfg.algo {
            Algo::Dsgd | Algo::Comid | Algo::ComidL2 | Algo::L2Trick => {
                AlgoState::Dense(ModelState::zeros(dim))
            }
            Algo::FtrlCoord => match cfg.init {
                InitKind::Zeros => AlgoState::Coord(FtrlState::new(dim, cfg.ftrl_params())?),
                InitKind::FtrlOnes => {
                    let ones = DenseVec::from_vec(vec![1.0; dim]);
                    AlgoState::Coord(FtrlState::with_initial_weights(
                        dim,
                        cfg.ftrl_params(),
                        &ones,
                    )?)
                }
            },
            Algo::FtrlArgmin => AlgoState::Argmin(FtrlArgminState::zeros(dim)),
        })
    }

    pub(crate) fn weight(&self, i: usize) -> f64 {
        match self {
            AlgoState::Dense(s) => s.w[i],
            AlgoState::Coord(s) => s.materialize_coord(i),
            AlgoState::Argmin(s) => s.w[i],
        }
    }

    pub(crate) fn steps(&self) -> u64 {
        match self {
            AlgoState::Dense(s) => s.t,
            AlgoState::Coord(s) => s.t,
            AlgoState::Argmin(s) => s.t,
        }
    }

    /// Dense weights for evaluation; materializes the lazy FTRL state.
    pub(crate) fn eval_weights(&self) -> DenseVec {
        match self {
            AlgoState::Dense(s) => s.w.clone(),
            AlgoState::Coord(s) => s.materialize_all(),
            AlgoState::Argmin(s) => s.w.clone(),
        }
    }

    /// Dense view used by the delayed-SGD baseline's stale L2 term.
    pub(crate) fn dense_weights(&self) -> Result<&DenseVec> {
        match self {
            AlgoState::Dense(s) => Ok(&s.w),
            _ => Err(Error::Config(
                "dense snapshot requested from a lazy state".into(),
            )),
        }
    }

    pub(crate) fn apply(
        self,
        cfg: &SimConfig,
        reg: &Regularizer,
        msg: &GradientMsg,
        stale: Option<&DenseVec>,
    ) -> Result<Self> {
        Ok(match (cfg.algo, self) {
            (Algo::Dsgd, AlgoState::Dense(s)) => {
                let stale = stale.ok_or_else(|| {
                    Error::Config("delayed SGD message lost its dense term".into())
                })?;
                AlgoState::Dense(dsgd_step(s, msg, cfg.lambda, stale, cfg.eta)?)
            }
            (Algo::Comid, AlgoState::Dense(s)) => {
                AlgoState::Dense(comid_step_generic(s, msg, reg, &QuadraticMap, cfg.eta)?)
            }
            (Algo::ComidL2, AlgoState::Dense(s)) => {
                AlgoState::Dense(comid_l2_closed_step(s, msg, cfg.lambda, cfg.eta)?)
            }
            (Algo::L2Trick, AlgoState::Dense(s)) => {
                AlgoState::Dense(l2_trick_step(s, msg, cfg.lambda, cfg.eta)?)
            }
            (Algo::FtrlArgmin, AlgoState::Argmin(s)) => {
                // All curvature arrives with the first message, making the
                // effective per-step quadratic 1/(2 eta) |w - w_t|^2.
                let sigma = if s.t == 0 { 1.0 / cfg.eta } else { 0.0 };
                AlgoState::Argmin(ftrl_argmin_step(s, msg, sigma, reg)?)
            }
            (Algo::FtrlCoord, AlgoState::Coord(s)) => {
                AlgoState::Coord(ftrl_coordinate_update(s, msg)?)
            }
            _ => return Err(Error::Config("algorithm/state mismatch".into())),
        })
    }
}

/// Snapshot weights over the sample support, in support order. This is all
/// a worker reads from the server for one sparse-gradient push.
pub(crate) fn pulled_weights(state: &AlgoState, sample: &LabeledSample) -> Vec<f64> {
    sample.x.iter().map(|(i, _)| state.weight(i)).collect()
}

/// Gradient from a pulled snapshot: margin accumulated in support order,
/// then `(sigmoid(margin) - y01) * x`. Both runners go through this one
/// function so the same pull yields the same bits.
pub(crate) fn gradient_from_pull(weights: &[f64], sample: &LabeledSample) -> SparseVec {
    let mut margin = 0.0;
    for ((_, v), w) in sample.x.iter().zip(weights) {
        margin += w * v;
    }
    sample.x.scaled(sigmoid(margin) - sample.y01())
}

/// What a worker pushes for `sample` given the snapshot it can see.
pub(crate) fn gradient_for(state: &AlgoState, sample: &LabeledSample) -> SparseVec {
    gradient_from_pull(&pulled_weights(state, sample), sample)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep a dense copy of every pre-update iterate (regret replay;
    /// simulated mode, small dimension only).
    pub log_iterates: bool,
    /// Track the gradient-norm maxima entering the regret bound.
    pub track_constants: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub final_weights: DenseVec,
    /// Snapshot index per applied step (realized schedule).
    pub taus: Vec<u64>,
    pub sample_order: Vec<usize>,
    pub iterates: Option<Vec<DenseVec>>,
    pub bounds: GradBoundTracker,
    pub tx_values: u64,
    pub pushed_messages: u64,
    pub applied_updates: u64,
}

const ITERATE_LOG_MAX_DIM: usize = 64;

struct Pending {
    event: SimEvent,
    stale: Option<DenseVec>,
}

/// Runs `cfg` over `data` with an explicit delay schedule. Bit-deterministic
/// in `(cfg, data)`; wall time is reported as zero because simulated steps
/// take no time.
pub fn run_simulated(cfg: &SimConfig, data: &Dataset, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    if data.is_empty() && cfg.epochs > 0 {
        return Err(Error::Config("cannot run on an empty dataset".into()));
    }
    let t_total = (data.len() * cfg.epochs) as u64;
    if opts.log_iterates && data.dim > ITERATE_LOG_MAX_DIM {
        return Err(Error::Config(format!(
            "iterate logging is limited to dimension {ITERATE_LOG_MAX_DIM}, got {}",
            data.dim
        )));
    }

    let reg = cfg.reg()?;
    let taus = cfg.delay.realize(t_total)?;
    let stream = sample_stream(data.len(), cfg.epochs, cfg.seed);
    let eval_every = cfg.eval_every.unwrap_or(data.len().max(1) as u64);

    // Steps whose gradient is evaluated at version v, grouped by v.
    let mut buckets: Vec<Vec<u64>> = vec![Vec::new(); t_total as usize];
    for (t, &tau) in taus.iter().enumerate() {
        buckets[tau as usize].push(t as u64);
    }

    let mut state = AlgoState::new(cfg, data.dim)?;
    let window = cfg.delay.tau_max() as usize + 1;
    let mut pending: Vec<Option<Pending>> = (0..window).map(|_| None).collect();
    let mut tx = TxAccounting::new(tx_baseline_for(cfg.algo, data.dim));
    let mut bounds = GradBoundTracker::default();
    let mut iterates = opts.log_iterates.then(Vec::new);
    let mut records = Vec::new();
    let mut pushed = 0u64;

    for v in 0..t_total {
        for &t in &buckets[v as usize] {
            let sample_idx = stream[t as usize];
            let g = gradient_for(&state, &data.samples[sample_idx]);
            if opts.track_constants {
                bounds.observe_push(g.l2_norm());
            }
            let stale = match cfg.algo {
                Algo::Dsgd => Some(state.dense_weights()?.clone()),
                _ => None,
            };
            let slot = (t % window as u64) as usize;
            debug_assert!(pending[slot].is_none());
            pending[slot] = Some(Pending {
                event: SimEvent {
                    step: t,
                    worker: (t % cfg.workers as u64) as usize,
                    sample_idx,
                    msg: GradientMsg::new(g, v),
                },
                stale,
            });
            pushed += 1;
        }

        let slot = (v % window as u64) as usize;
        let Pending { event, stale } = pending[slot]
            .take()
            .ok_or_else(|| Error::Config(format!("no gradient scheduled for step {v}")))?;
        debug_assert_eq!(event.step, v);

        if opts.track_constants {
            let w_t = state.eval_weights();
            let (comp, reg_norm) = composite_grad_norm(&event.msg.g, &reg, &w_t)?;
            bounds.observe_apply(comp, reg_norm);
            if v < cfg.delay.tau_max() {
                bounds.early_reg_sum += reg.value(&w_t);
            }
        }
        if let Some(log) = iterates.as_mut() {
            log.push(state.eval_weights());
        }

        state = state.apply(cfg, &reg, &event.msg, stale.as_ref())?;
        tx.push(&event.msg);

        let done = v + 1;
        if done % eval_every == 0 || done == t_total {
            let w = state.eval_weights();
            let logloss_sum = logloss_dataset(data, &w)?;
            records.push(RunRecord {
                step: done,
                epoch: done as f64 / data.len().max(1) as f64,
                logloss_sum,
                logloss_mean: logloss_sum / data.len() as f64,
                regret: None,
                tx_values: tx.total(),
                wall_ms: 0.0,
            });
        }
    }

    let applied = state.steps();
    debug_assert_eq!(applied, pushed);
    Ok(RunOutput {
        records,
        final_weights: state.eval_weights(),
        taus,
        sample_order: stream,
        iterates,
        bounds,
        tx_values: tx.total(),
        pushed_messages: pushed,
        applied_updates: applied,
    })
}

/// Shared by the threaded runner so both modes time evaluation identically.
pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
