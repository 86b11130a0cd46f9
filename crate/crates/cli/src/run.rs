//! `run`: execute one experiment and emit its learning curve as CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use comid::data::{gen_synthetic, read_libsvm, Dataset};
use comid::metrics::RunRecord;
use comid::sim::{run_simulated, run_threaded, write_trace, RunOptions, RunOutput};
use comid::sparse::DenseVec;
use comid::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::settings::{DataSource, Mode, RunPlan};

pub const CSV_HEADER: &str = "step,epoch,logloss_sum,logloss_mean,regret,tx_values,wall_ms";

/// Seed salts so the planted model and the sample draw do not share a
/// stream with the shuffle.
const PLANTED_SEED_SALT: u64 = 0x706c616e;
const DATA_SEED_SALT: u64 = 0x64617461;

pub fn build_dataset(plan: &RunPlan) -> Result<Dataset> {
    match &plan.source {
        DataSource::File(path) => read_libsvm(path, None),
        DataSource::Synthetic {
            dim,
            n,
            nnz_lo,
            nnz_hi,
            planted_scale,
        } => {
            let planted = planted_scale.map(|scale| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(plan.cfg.seed.wrapping_add(PLANTED_SEED_SALT));
                let mut w = DenseVec::zeros(*dim);
                for i in 0..*dim {
                    w[i] = scale * (2.0 * rng.gen::<f64>() - 1.0);
                }
                w
            });
            gen_synthetic(
                *dim,
                *n,
                *nnz_lo,
                *nnz_hi,
                plan.cfg.seed.wrapping_add(DATA_SEED_SALT),
                planted.as_ref(),
            )
        }
    }
}

pub fn execute(plan: &RunPlan, data: &Dataset) -> Result<RunOutput> {
    let opts = RunOptions::default();
    match plan.mode {
        Mode::Sim => run_simulated(&plan.cfg, data, &opts),
        Mode::Threaded => run_threaded(&plan.cfg, data, &opts),
    }
}

fn write_row(w: &mut impl Write, r: &RunRecord) -> io::Result<()> {
    let regret = r.regret.map(|v| v.to_string()).unwrap_or_default();
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        r.step, r.epoch, r.logloss_sum, r.logloss_mean, regret, r.tx_values, r.wall_ms
    )
}

pub fn write_csv(records: &[RunRecord], w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        write_row(w, r)?;
    }
    Ok(())
}

pub fn cmd_run(plan: &RunPlan) -> Result<()> {
    let data = build_dataset(plan)?;
    let out = execute(plan, &data)?;
    match &plan.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(&out.records, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_csv(&out.records, &mut w)?;
            w.flush()?;
        }
    }
    if let Some(path) = &plan.trace_out {
        write_trace(path, plan.cfg.delay.tau_max(), &out.taus)?;
    }
    Ok(())
}
