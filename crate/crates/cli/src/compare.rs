//! `compare`: run two configurations on the same data and seed, report the
//! per-eval-point logloss gap and the final-model L-infinity distance.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use comid::{Error, Result};

use crate::run::{build_dataset, execute};
use crate::settings::{resolve, RunArgs, RunPlan};

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Config file for side A.
    #[arg(long)]
    pub a: PathBuf,

    /// Config file for side B.
    #[arg(long)]
    pub b: PathBuf,

    /// Shared overrides applied to both sides (data, seed, epochs, ...).
    #[command(flatten)]
    pub shared: RunArgs,
}

fn resolve_side(file: &Path, shared: &RunArgs) -> Result<RunPlan> {
    let mut args = shared.clone();
    args.config = Some(file.to_path_buf());
    args.out = None;
    args.trace_out = None;
    resolve(&args)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    if args.shared.config.is_some() {
        return Err(Error::Config(
            "compare takes its config files via --a and --b".into(),
        ));
    }
    let plan_a = resolve_side(&args.a, &args.shared)?;
    let plan_b = resolve_side(&args.b, &args.shared)?;
    if plan_a.source != plan_b.source {
        return Err(Error::Config(
            "both sides must use the same data source".into(),
        ));
    }
    if plan_a.cfg.seed != plan_b.cfg.seed {
        return Err(Error::Config(format!(
            "both sides must share the seed, got {} and {}",
            plan_a.cfg.seed, plan_b.cfg.seed
        )));
    }

    let data = build_dataset(&plan_a)?;
    let out_a = execute(&plan_a, &data)?;
    let out_b = execute(&plan_b, &data)?;
    if out_a.records.len() != out_b.records.len()
        || out_a
            .records
            .iter()
            .zip(&out_b.records)
            .any(|(ra, rb)| ra.step != rb.step)
    {
        return Err(Error::Config(
            "eval points differ; align --epochs and --eval-every on both sides".into(),
        ));
    }

    let final_linf = out_a.final_weights.linf_distance(&out_b.final_weights)?;
    let render = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "step,logloss_a,logloss_b,gap,tx_a,tx_b")?;
        for (ra, rb) in out_a.records.iter().zip(&out_b.records) {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                ra.step,
                ra.logloss_mean,
                rb.logloss_mean,
                ra.logloss_mean - rb.logloss_mean,
                ra.tx_values,
                rb.tx_values
            )?;
        }
        writeln!(
            w,
            "# a = {}, b = {}",
            plan_a.cfg.algo.name(),
            plan_b.cfg.algo.name()
        )?;
        writeln!(w, "# final_linf = {final_linf}")?;
        writeln!(
            w,
            "# tx_ratio = {}",
            out_a.tx_values as f64 / out_b.tx_values as f64
        )?;
        Ok(())
    };
    match &args.shared.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            render(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            render(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
