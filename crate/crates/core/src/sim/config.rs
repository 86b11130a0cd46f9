//! Run configuration shared by the simulated and threaded runners.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schedule::DelaySchedule;
use crate::error::{Error, Result};
use crate::objectives::Regularizer;
use crate::optim::FtrlParams;

/// Which optimizer the server runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    /// Delayed SGD with the L2 term evaluated at the worker's stale snapshot.
    Dsgd,
    /// Exact proximal mirror step with the configured regularizer.
    Comid,
    /// Explicit L2 closed form (shrink the pre-gradient iterate).
    ComidL2,
    /// Plain update `(1 - eta*lambda) w - eta g`.
    L2Trick,
    /// Follow-the-leader accumulator form; one curvature unit of `1/eta` up
    /// front makes it the leader-form twin of `comid`.
    FtrlArgmin,
    /// Per-coordinate lazy FTRL (`z`/`n` accumulators).
    FtrlCoord,
}

impl Algo {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "dsgd" => Algo::Dsgd,
            "comid" => Algo::Comid,
            "comidl2" => Algo::ComidL2,
            "l2trick" => Algo::L2Trick,
            "ftrl" => Algo::FtrlArgmin,
            "aftrl" => Algo::FtrlCoord,
            _ => {
                return Err(Error::Config(format!(
                    "unknown algorithm {s:?} (expected dsgd|comid|comidl2|l2trick|ftrl|aftrl)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algo::Dsgd => "dsgd",
            Algo::Comid => "comid",
            Algo::ComidL2 => "comidl2",
            Algo::L2Trick => "l2trick",
            Algo::FtrlArgmin => "ftrl",
            Algo::FtrlCoord => "aftrl",
        }
    }
}

/// Initial server state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitKind {
    #[default]
    Zeros,
    /// Seed the per-coordinate FTRL `z` so every weight first materializes
    /// to one.
    FtrlOnes,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub algo: Algo,
    pub workers: usize,
    pub delay: DelaySchedule,
    pub eta: f64,
    /// L2 coefficient for the dense-iterate algorithms.
    pub lambda: f64,
    /// L1 coefficient (comid/ftrl composite term, aftrl threshold).
    pub lambda1: f64,
    /// Per-coordinate FTRL L2 coefficient.
    pub lambda2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Steps between evaluation rows; defaults to one epoch.
    pub eval_every: Option<u64>,
    pub init: InitKind,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Comid,
            workers: 1,
            delay: DelaySchedule::Fixed { tau_max: 0 },
            eta: 1e-2,
            lambda: 0.0,
            lambda1: 0.0,
            lambda2: 0.0,
            alpha: 0.1,
            beta: 1.0,
            epochs: 1,
            seed: 0,
            eval_every: None,
            init: InitKind::Zeros,
        }
    }
}

impl SimConfig {
    /// Composite regularizer used by `comid` and `ftrl`.
    pub fn reg(&self) -> Result<Regularizer> {
        Regularizer::from_coeffs(self.lambda1, self.lambda)
    }

    pub fn ftrl_params(&self) -> FtrlParams {
        FtrlParams {
            alpha: self.alpha,
            beta: self.beta,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers < 1 {
            return Err(Error::Config("need at least one worker".into()));
        }
        if self.workers == 1 && self.delay.tau_max() != 0 {
            return Err(Error::Config(
                "a single worker has no one to lag behind: tau_max must be 0".into(),
            ));
        }
        if self.lambda < 0.0 || self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::Config(
                "regularizer coefficients must be nonnegative".into(),
            ));
        }
        match self.algo {
            Algo::FtrlCoord => self.ftrl_params().validate()?,
            Algo::Dsgd | Algo::ComidL2 | Algo::L2Trick => {
                if self.eta.is_nan() || self.eta <= 0.0 {
                    return Err(Error::Config(format!(
                        "step size must be positive, got {}",
                        self.eta
                    )));
                }
                if self.lambda1 > 0.0 {
                    return Err(Error::Config(format!(
                        "{} supports L2 regularization only (lambda1 must be 0)",
                        self.algo.name()
                    )));
                }
                if self.algo == Algo::L2Trick && self.eta * self.lambda >= 1.0 {
                    return Err(Error::Config(format!(
                        "l2trick needs eta*lambda < 1, got {}",
                        self.eta * self.lambda
                    )));
                }
            }
            Algo::Comid | Algo::FtrlArgmin => {
                if self.eta.is_nan() || self.eta <= 0.0 {
                    return Err(Error::Config(format!(
                        "step size must be positive, got {}",
                        self.eta
                    )));
                }
                self.reg()?;
            }
        }
        if self.init == InitKind::FtrlOnes && self.algo != Algo::FtrlCoord {
            return Err(Error::Config(
                "the all-ones z seeding applies to aftrl only".into(),
            ));
        }
        if let Some(every) = self.eval_every {
            if every == 0 {
                return Err(Error::Config("eval_every must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Order in which samples are served: a fresh seeded permutation per epoch,
/// concatenated. Workers take disjoint round-robin shards, so worker `k`
/// serves positions `k, k + workers, ...` of this stream and the applied
/// order is independent of the worker count.
pub fn sample_stream(n_samples: usize, epochs: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = Vec::with_capacity(n_samples * epochs);
    let mut perm: Vec<usize> = (0..n_samples).collect();
    for _ in 0..epochs {
        perm.shuffle(&mut rng);
        stream.extend_from_slice(&perm);
    }
    stream
}
