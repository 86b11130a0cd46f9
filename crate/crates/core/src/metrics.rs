//! Run bookkeeping: dataset loss, regret against a fixed comparator, the
//! full-batch reference solver, and the delayed-regret bound.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::objectives::{logloss_sample, sigmoid, BoundConstants, LabeledSample, Regularizer};
use crate::sparse::DenseVec;

/// One evaluation row of a run; serialized as a CSV line by the CLI.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub step: u64,
    pub epoch: f64,
    pub logloss_sum: f64,
    pub logloss_mean: f64,
    pub regret: Option<f64>,
    pub tx_values: u64,
    pub wall_ms: f64,
}

/// Sum of per-sample loglosses over the dataset.
pub fn logloss_dataset(data: &Dataset, w: &DenseVec) -> Result<f64> {
    let mut sum = 0.0;
    for s in &data.samples {
        sum += logloss_sample(s, w)?;
    }
    Ok(sum)
}

/// Cumulative composite regret against a fixed comparator:
/// `sum_t [loss_t(w_t) + r(w_t)] - [loss_t(w*) + r(w*)]`.
#[derive(Debug, Clone)]
pub struct RegretAccumulator {
    w_star: DenseVec,
    reg: Regularizer,
    r_star: f64,
    pub total: f64,
    pub increments: Vec<f64>,
}

impl RegretAccumulator {
    pub fn new(w_star: DenseVec, reg: Regularizer) -> Self {
        let r_star = reg.value(&w_star);
        Self {
            w_star,
            reg,
            r_star,
            total: 0.0,
            increments: Vec::new(),
        }
    }

    /// Charges round `t`: the iterate `w_t` plays against the sample served
    /// at that step.
    pub fn update(&mut self, w_t: &DenseVec, sample: &LabeledSample) -> Result<f64> {
        let played = logloss_sample(sample, w_t)? + self.reg.value(w_t);
        let comparator = logloss_sample(sample, &self.w_star)? + self.r_star;
        let inc = played - comparator;
        self.total += inc;
        self.increments.push(inc);
        Ok(self.total)
    }
}

/// Replays logged iterates against the served sample order; returns the
/// cumulative regret after each step.
pub fn regret_series(
    iterates: &[DenseVec],
    data: &Dataset,
    order: &[usize],
    reg: &Regularizer,
    w_star: &DenseVec,
) -> Result<Vec<f64>> {
    if iterates.len() != order.len() {
        return Err(Error::Config(format!(
            "{} iterates vs {} served samples",
            iterates.len(),
            order.len()
        )));
    }
    let mut acc = RegretAccumulator::new(w_star.clone(), *reg);
    let mut out = Vec::with_capacity(order.len());
    for (w_t, &idx) in iterates.iter().zip(order) {
        out.push(acc.update(w_t, &data.samples[idx])?);
    }
    Ok(out)
}

/// Mean regularized logistic objective: `(1/m) sum_i loss_i(w) + r(w)`.
pub fn full_objective(data: &Dataset, reg: &Regularizer, w: &DenseVec) -> Result<f64> {
    Ok(logloss_dataset(data, w)? / data.len() as f64 + reg.value(w))
}

fn full_gradient(data: &Dataset, reg: &Regularizer, w: &DenseVec) -> Result<DenseVec> {
    let mut g = reg.subgrad(w);
    let inv_m = 1.0 / data.len() as f64;
    for s in &data.samples {
        let coeff = (sigmoid(s.x.dot(w)?) - s.y01()) * inv_m;
        for (i, v) in s.x.iter() {
            g[i] += coeff * v;
        }
    }
    Ok(g)
}

/// Full-batch gradient descent with backtracking line search on the mean
/// regularized objective, run until the gradient norm drops below `tol`.
/// Deterministic. On a non-strongly-convex configuration that refuses to
/// converge it warns and returns the best iterate found.
pub fn solve_w_star(data: &Dataset, reg: &Regularizer, tol: f64) -> Result<DenseVec> {
    if data.is_empty() {
        return Err(Error::Config(
            "cannot fit a comparator to an empty dataset".into(),
        ));
    }
    const MAX_ITERS: usize = 200_000;
    const ARMIJO: f64 = 1e-4;

    let mut w = DenseVec::zeros(data.dim);
    let mut f = full_objective(data, reg, &w)?;
    let mut step = 1.0;
    for _ in 0..MAX_ITERS {
        let g = full_gradient(data, reg, &w)?;
        let g_sq: f64 = g.as_slice().iter().map(|v| v * v).sum();
        if g_sq.sqrt() <= tol {
            return Ok(w);
        }
        // Backtrack from a step that grows again after each success.
        step *= 2.0;
        loop {
            let mut trial = w.clone();
            for i in 0..trial.dim() {
                trial[i] -= step * g[i];
            }
            let f_trial = full_objective(data, reg, &trial)?;
            if f_trial <= f - ARMIJO * step * g_sq {
                w = trial;
                f = f_trial;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                eprintln!("solve_w_star: line search stalled; returning current iterate");
                return Ok(w);
            }
        }
    }
    eprintln!("solve_w_star: gradient norm above {tol} after {MAX_ITERS} iterations");
    Ok(w)
}

fn reg_cache_tag(reg: &Regularizer) -> String {
    format!("l1={:e};l2={:e}", reg.l1_coeff(), reg.l2_coeff())
}

/// `solve_w_star` with a content-addressed disk cache: the key hashes the
/// dataset bytes, the regularizer, and the tolerance.
pub fn solve_w_star_cached(
    data: &Dataset,
    reg: &Regularizer,
    tol: f64,
    cache_dir: impl AsRef<Path>,
) -> Result<DenseVec> {
    let cache_dir = cache_dir.as_ref();
    let mut hasher = Sha256::new();
    hasher.update(data.canonical_bytes());
    hasher.update(reg_cache_tag(reg).as_bytes());
    hasher.update(format!("tol={tol:e}").as_bytes());
    let digest = hasher.finalize();
    let key: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    let path = cache_dir.join(format!("wstar-{key}.txt"));

    if let Ok(text) = fs::read_to_string(&path) {
        let values: Vec<f64> = text
            .lines()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("corrupt comparator cache {path:?}: {e}")))?;
        if values.len() == data.dim {
            return Ok(DenseVec::from_vec(values));
        }
    }

    let w = solve_w_star(data, reg, tol)?;
    fs::create_dir_all(cache_dir)?;
    let mut text = String::new();
    for v in w.as_slice() {
        text.push_str(&format!("{v}\n"));
    }
    fs::write(&path, text)?;
    Ok(w)
}

/// Both variants of the delayed-regret bound at horizon `t`:
/// `B_init/eta + early_reg_sum + tau_max * eta * alpha * t * (2*M^2 + M_in*M_out)`
/// with `M = M_out` (composite-gradient bound, the looser and authoritative
/// variant) and `M = M_in` (loss-only gradient bound).
#[derive(Debug, Clone, Copy)]
pub struct RegretBound {
    pub m_out_variant: f64,
    pub m_in_variant: f64,
}

pub fn regret_bound_rhs(consts: &BoundConstants, t: u64) -> RegretBound {
    let base = consts.b_init / consts.eta + consts.early_reg_sum;
    let cross = consts.m_in * consts.m_out;
    let scale = consts.tau_max as f64 * consts.eta * consts.alpha * t as f64;
    RegretBound {
        m_out_variant: base + scale * (2.0 * consts.m_out * consts.m_out + cross),
        m_in_variant: base + scale * (2.0 * consts.m_in * consts.m_in + cross),
    }
}

/// Running maxima of gradient norms observed during a run, used to fill
/// [`BoundConstants`] after the fact.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradBoundTracker {
    pub m_in: f64,
    pub m_out: f64,
    pub m_reg: f64,
    pub early_reg_sum: f64,
}

impl GradBoundTracker {
    pub fn observe_push(&mut self, loss_grad_norm: f64) {
        self.m_in = self.m_in.max(loss_grad_norm);
    }

    pub fn observe_apply(&mut self, composite_grad_norm: f64, reg_grad_norm: f64) {
        self.m_out = self.m_out.max(composite_grad_norm);
        self.m_reg = self.m_reg.max(reg_grad_norm);
    }
}

/// Composite gradient norm `|g + r'(w)|_2` without materializing the sum.
pub fn composite_grad_norm(
    g: &crate::sparse::SparseVec,
    reg: &Regularizer,
    w: &DenseVec,
) -> Result<(f64, f64)> {
    if g.dim() != w.dim() {
        return Err(Error::DimMismatch {
            expected: w.dim(),
            got: g.dim(),
        });
    }
    let r = reg.subgrad(w);
    let mut reg_sq = 0.0;
    let mut comp_sq = 0.0;
    for (i, &ri) in r.as_slice().iter().enumerate() {
        reg_sq += ri * ri;
        let c = ri + g.get(i);
        comp_sq += c * c;
    }
    Ok((comp_sq.sqrt(), reg_sq.sqrt()))
}
