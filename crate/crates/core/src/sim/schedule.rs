//! Delay schedules: which past snapshot the gradient applied at step `t` was
//! computed against. Every schedule keeps `0 <= t - tau(t) <= tau_max`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::tau_fixed;

#[derive(Debug, Clone, PartialEq)]
pub enum DelaySchedule {
    /// Snapshot lags by exactly `tau_max` once the pipeline has filled.
    Fixed { tau_max: u64 },
    /// Lag drawn uniformly from `[0, min(t, tau_max)]` per step,
    /// deterministic in the seed.
    RandomBounded { tau_max: u64, seed: u64 },
    /// Replay of recorded snapshot indices, one per step.
    Trace { tau_max: u64, taus: Vec<u64> },
}

impl DelaySchedule {
    pub fn tau_max(&self) -> u64 {
        match self {
            DelaySchedule::Fixed { tau_max }
            | DelaySchedule::RandomBounded { tau_max, .. }
            | DelaySchedule::Trace { tau_max, .. } => *tau_max,
        }
    }

    /// Snapshot index for every step of a `t_total`-step run.
    pub fn realize(&self, t_total: u64) -> Result<Vec<u64>> {
        match self {
            DelaySchedule::Fixed { tau_max } => {
                Ok((0..t_total).map(|t| tau_fixed(t, *tau_max)).collect())
            }
            DelaySchedule::RandomBounded { tau_max, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..t_total)
                    .map(|t| t - rng.gen_range(0..=t.min(*tau_max)))
                    .collect())
            }
            DelaySchedule::Trace { tau_max, taus } => {
                if (taus.len() as u64) < t_total {
                    return Err(Error::Config(format!(
                        "trace has {} entries but the run needs {t_total}",
                        taus.len()
                    )));
                }
                let taus: Vec<u64> = taus[..t_total as usize].to_vec();
                for (t, &tau) in taus.iter().enumerate() {
                    let t = t as u64;
                    if tau > t || t - tau > *tau_max {
                        return Err(Error::Config(format!(
                            "trace entry {t} has tau={tau}, outside [{}, {t}]",
                            t.saturating_sub(*tau_max)
                        )));
                    }
                }
                Ok(taus)
            }
        }
    }
}

/// Writes `tau_max=<k>` followed by one snapshot index per line.
pub fn write_trace(path: impl AsRef<Path>, tau_max: u64, taus: &[u64]) -> Result<()> {
    let mut text = format!("tau_max={tau_max}\n");
    for tau in taus {
        text.push_str(&format!("{tau}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<DelaySchedule> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: shown.clone(),
        line: 1,
        msg: "empty trace file".into(),
    })?;
    let tau_max: u64 = header
        .strip_prefix("tau_max=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse {
            path: shown.clone(),
            line: 1,
            msg: format!("expected tau_max=<k>, got {header:?}"),
        })?;
    let mut taus = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        taus.push(line.parse().map_err(|_| Error::Parse {
            path: shown.clone(),
            line: lineno + 1,
            msg: format!("unparseable snapshot index {line:?}"),
        })?);
    }
    Ok(DelaySchedule::Trace { tau_max, taus })
}
