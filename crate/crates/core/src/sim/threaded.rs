//! Shared-memory runner with real worker threads.
//!
//! Worker `k` owns steps `k, k+W, 2W+k, ...` of the served sample stream.
//! For each step it pulls a snapshot from the server (blocking until the
//! snapshot would be at most `tau_max` versions stale), computes the
//! gradient outside the lock, and pushes it over its own rendezvous
//! channel. The server applies pushes in strict round-robin order, so the
//! applied sample order is identical to the simulated runner for every
//! worker count, and the realized staleness trace replays bit-exactly
//! through [`run_simulated`](super::run_simulated).

use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::sync::{Condvar, Mutex};
use std::time::Instant;

use super::config::{sample_stream, Algo, SimConfig};
use super::runner::{
    elapsed_ms, gradient_from_pull, pulled_weights, tx_baseline_for, AlgoState, RunOptions,
    RunOutput, TxAccounting,
};
use super::schedule::DelaySchedule;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{logloss_dataset, GradBoundTracker, RunRecord};
use crate::optim::GradientMsg;
use crate::sparse::DenseVec;

struct ServerInner {
    state: Option<AlgoState>,
    version: u64,
    shutdown: bool,
}

struct Push {
    step: u64,
    msg: GradientMsg,
    stale: Option<DenseVec>,
}

/// Runs `cfg` over `data` with one OS thread per worker. Requires a fixed
/// delay bound: the schedule is realized by actual thread timing, throttled
/// so no applied gradient is staler than `tau_max`. Iterate logging and
/// constant tracking are simulated-mode features and are rejected here.
pub fn run_threaded(cfg: &SimConfig, data: &Dataset, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let cap = match cfg.delay {
        DelaySchedule::Fixed { tau_max } => tau_max,
        _ => {
            return Err(Error::Config(
                "threaded mode realizes its own delays; give it a fixed staleness bound".into(),
            ))
        }
    };
    if opts.log_iterates || opts.track_constants {
        return Err(Error::Config(
            "iterate logging and constant tracking need the simulated runner".into(),
        ));
    }
    if data.is_empty() && cfg.epochs > 0 {
        return Err(Error::Config("cannot run on an empty dataset".into()));
    }

    let t_total = (data.len() * cfg.epochs) as u64;
    let reg = cfg.reg()?;
    let stream = sample_stream(data.len(), cfg.epochs, cfg.seed);
    let eval_every = cfg.eval_every.unwrap_or(data.len().max(1) as u64);
    let workers = cfg.workers;

    let server = (
        Mutex::new(ServerInner {
            state: Some(AlgoState::new(cfg, data.dim)?),
            version: 0,
            shutdown: false,
        }),
        Condvar::new(),
    );

    let mut senders: Vec<Option<SyncSender<Push>>> = Vec::with_capacity(workers);
    let mut receivers: Vec<Receiver<Push>> = Vec::with_capacity(workers);
    for _ in 0..workers {
        let (tx, rx) = sync_channel::<Push>(1);
        senders.push(Some(tx));
        receivers.push(rx);
    }

    let start = Instant::now();
    let mut taus = Vec::with_capacity(t_total as usize);
    // (step, wall_ms, tx_values, weights): loglosses are computed after the
    // threads join so evaluation never blocks the update path.
    let mut snapshots: Vec<(u64, f64, u64, DenseVec)> = Vec::new();
    let mut tx_acc = TxAccounting::new(tx_baseline_for(cfg.algo, data.dim));

    let loop_result: Result<()> = std::thread::scope(|scope| {
        let server_ref = &server;
        let data_ref = &data;
        let stream_ref = &stream;
        for (k, tx) in senders.iter_mut().enumerate() {
            let tx = tx.take().expect("each worker takes its own sender");
            let algo = cfg.algo;
            scope.spawn(move || {
                let (lock, cvar) = server_ref;
                let mut t = k as u64;
                while t < t_total {
                    let sample = &data_ref.samples[stream_ref[t as usize]];
                    let (weights, version, stale) = {
                        let mut inner = lock.lock().unwrap();
                        while !inner.shutdown && inner.version + cap < t {
                            inner = cvar.wait(inner).unwrap();
                        }
                        if inner.shutdown {
                            return;
                        }
                        let state = inner
                            .state
                            .as_ref()
                            .expect("server holds the state between steps");
                        let stale = match algo {
                            Algo::Dsgd => Some(
                                state
                                    .dense_weights()
                                    .expect("the delayed-SGD state is dense")
                                    .clone(),
                            ),
                            _ => None,
                        };
                        (pulled_weights(state, sample), inner.version, stale)
                    };
                    let g = gradient_from_pull(&weights, sample);
                    let push = Push {
                        step: t,
                        msg: GradientMsg::new(g, version),
                        stale,
                    };
                    if tx.send(push).is_err() {
                        return; // server bailed out; nothing left to do
                    }
                    t += workers as u64;
                }
            });
        }

        let (lock, cvar) = &server;
        // The serving closure borrows taus/snapshots mutably; scope it so
        // the borrows end before the shutdown/unblock epilogue below.
        let outcome = {
            let mut serve = || -> Result<()> {
                for t in 0..t_total {
                    let push = receivers[(t % workers as u64) as usize]
                        .recv()
                        .map_err(|_| Error::Config("a worker exited before its step".into()))?;
                    debug_assert_eq!(push.step, t);
                    let mut inner = lock.lock().unwrap();
                    let state = inner
                        .state
                        .take()
                        .expect("server holds the state between steps");
                    // A failed step consumes the state, so flag the shutdown
                    // before releasing the lock; workers check it before they
                    // touch the state.
                    let next = match state.apply(cfg, &reg, &push.msg, push.stale.as_ref()) {
                        Ok(next) => next,
                        Err(e) => {
                            inner.shutdown = true;
                            drop(inner);
                            cvar.notify_all();
                            return Err(e);
                        }
                    };
                    inner.state = Some(next);
                    inner.version = t + 1;
                    taus.push(push.msg.produced_at);
                    tx_acc.push(&push.msg);
                    let done = t + 1;
                    if done % eval_every == 0 || done == t_total {
                        let w = inner.state.as_ref().unwrap().eval_weights();
                        snapshots.push((done, elapsed_ms(start), tx_acc.total(), w));
                    }
                    drop(inner);
                    cvar.notify_all();
                }
                Ok(())
            };
            serve()
        };
        if outcome.is_err() {
            let mut inner = lock.lock().unwrap();
            inner.shutdown = true;
            drop(inner);
            cvar.notify_all();
        }
        drop(receivers); // unblock any worker mid-send
        outcome
    });
    loop_result?;

    let inner = server.0.into_inner().unwrap();
    let state = inner.state.expect("server holds the state between steps");
    let mut records = Vec::with_capacity(snapshots.len());
    for (step, wall_ms, tx_values, w) in snapshots {
        let logloss_sum = logloss_dataset(data, &w)?;
        records.push(RunRecord {
            step,
            epoch: step as f64 / data.len().max(1) as f64,
            logloss_sum,
            logloss_mean: logloss_sum / data.len() as f64,
            regret: None,
            tx_values,
            wall_ms,
        });
    }

    let applied = state.steps();
    Ok(RunOutput {
        records,
        final_weights: state.eval_weights(),
        taus,
        sample_order: stream,
        iterates: None,
        bounds: GradBoundTracker::default(),
        tx_values: tx_acc.total(),
        pushed_messages: t_total,
        applied_updates: applied,
    })
}
