//! Server-side optimizer steps.
//!
//! Every step is a pure function from (state, gradient message) to a new
//! state; the simulator owns scheduling and staleness. Gradient messages
//! carry the step index of the snapshot they were computed against, and the
//! fixed-delay function bounds how far behind that snapshot may be.
//!
//! Two families are implemented:
//!
//! * dense-iterate steps: delayed SGD (`dsgd_step`), the exact proximal
//!   mirror step (`comid_step_generic`), its explicit L2 closed form
//!   (`comid_l2_closed_step`), and the plain-update L2 trick
//!   (`l2_trick_step`);
//! * follow-the-leader forms: the accumulator-based argmin step
//!   (`ftrl_argmin_step`) with its mirror-descent twin (`comid_seq_step`),
//!   and the per-coordinate lazy FTRL update (`ftrl_coordinate_update`).

use crate::error::{Error, Result};
use crate::objectives::{sgn0, soft_threshold, QuadraticMap, Regularizer};
use crate::sparse::{DenseVec, SparseVec};

/// Dense model vector plus the number of applied updates.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub w: DenseVec,
    pub t: u64,
}

impl ModelState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            w: DenseVec::zeros(dim),
            t: 0,
        }
    }
}

/// Sparse gradient as pushed by a worker, tagged with the snapshot step it
/// was computed at.
#[derive(Debug, Clone)]
pub struct GradientMsg {
    pub g: SparseVec,
    pub produced_at: u64,
    pub nnz_pushed: usize,
}

impl GradientMsg {
    pub fn new(g: SparseVec, produced_at: u64) -> Self {
        let nnz_pushed = g.nnz();
        Self {
            g,
            produced_at,
            nnz_pushed,
        }
    }
}

/// Snapshot index under a fixed staleness bound: 0 while the pipeline fills,
/// then exactly `tau_max` behind.
pub fn tau_fixed(t: u64, tau_max: u64) -> u64 {
    t.saturating_sub(tau_max)
}

fn check_msg(dim: usize, t: u64, msg: &GradientMsg) -> Result<()> {
    if msg.g.dim() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: msg.g.dim(),
        });
    }
    if msg.produced_at > t {
        return Err(Error::Config(format!(
            "gradient produced at step {} applied at earlier step {t}",
            msg.produced_at
        )));
    }
    Ok(())
}

/// Delayed SGD baseline: `w -= eta * (g + lambda * w_stale)`. The worker
/// evaluates the L2 term at its stale snapshot, so the message it transmits
/// is dense; accounting charges it the full dimension.
pub fn dsgd_step(
    mut state: ModelState,
    msg: &GradientMsg,
    lambda: f64,
    stale_w: &DenseVec,
    eta: f64,
) -> Result<ModelState> {
    check_msg(state.w.dim(), state.t, msg)?;
    if stale_w.dim() != state.w.dim() {
        return Err(Error::DimMismatch {
            expected: state.w.dim(),
            got: stale_w.dim(),
        });
    }
    if lambda != 0.0 {
        let c = eta * lambda;
        for i in 0..state.w.dim() {
            state.w[i] -= c * stale_w[i];
        }
    }
    state.w.axpy_sparse(-eta, &msg.g)?;
    state.t += 1;
    Ok(state)
}

/// Exact proximal mirror step for the quadratic map:
/// `w_new = argmin { eta*<g, w> + eta*r(w) + |w - w_old|^2 / 2 }`,
/// solved coordinatewise as soft-threshold-then-shrink of `w_old - eta*g`.
pub fn comid_step_generic(
    mut state: ModelState,
    msg: &GradientMsg,
    reg: &Regularizer,
    _psi: &QuadraticMap,
    eta: f64,
) -> Result<ModelState> {
    check_msg(state.w.dim(), state.t, msg)?;
    if eta <= 0.0 {
        return Err(Error::Config(format!(
            "step size must be positive, got {eta}"
        )));
    }
    state.w.axpy_sparse(-eta, &msg.g)?;
    if *reg != Regularizer::None {
        for i in 0..state.w.dim() {
            state.w[i] = reg.prox_coord(state.w[i], eta);
        }
    }
    state.t += 1;
    Ok(state)
}

/// Explicit L2 form: `w_new = w_old / (1 + lambda*eta) - eta*g`. The shrink
/// is applied to the pre-gradient iterate, so from a shared state this step
/// and `l2_trick_step` differ by exactly
/// `(eta*lambda)^2 / (1 + eta*lambda) * w_old` (the gradient terms cancel),
/// while it trails the exact proximal step by
/// `eta^2*lambda / (1 + eta*lambda) * g`.
pub fn comid_l2_closed_step(
    mut state: ModelState,
    msg: &GradientMsg,
    lambda: f64,
    eta: f64,
) -> Result<ModelState> {
    check_msg(state.w.dim(), state.t, msg)?;
    if lambda * eta < 0.0 {
        return Err(Error::Config(format!(
            "lambda*eta must be nonnegative, got {}",
            lambda * eta
        )));
    }
    state.w.scale(1.0 / (1.0 + lambda * eta));
    state.w.axpy_sparse(-eta, &msg.g)?;
    state.t += 1;
    Ok(state)
}

/// Plain delayed update with the regularizer gradient taken at the current
/// iterate: `w_new = (1 - eta*lambda) * w_old - eta*g`. Requires
/// `eta*lambda < 1`, otherwise the scale factor flips sign.
pub fn l2_trick_step(
    mut state: ModelState,
    msg: &GradientMsg,
    lambda: f64,
    eta: f64,
) -> Result<ModelState> {
    check_msg(state.w.dim(), state.t, msg)?;
    let s = eta * lambda;
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Config(format!(
            "eta*lambda must lie in [0, 1), got {s}"
        )));
    }
    state.w.scale(1.0 - s);
    state.w.axpy_sparse(-eta, &msg.g)?;
    state.t += 1;
    Ok(state)
}

/// Mirror-descent form driven by a per-step curvature stream:
/// `w_new = argmin { <g, w> + r(w) + S/2 * |w - w_old|^2 }` with
/// `S` the running sum of the `sigma` values seen so far.
#[derive(Debug, Clone)]
pub struct ComidSeqState {
    pub w: DenseVec,
    pub sigma_sum: f64,
    pub t: u64,
}

impl ComidSeqState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            w: DenseVec::zeros(dim),
            sigma_sum: 0.0,
            t: 0,
        }
    }
}

pub fn comid_seq_step(
    mut state: ComidSeqState,
    msg: &GradientMsg,
    sigma: f64,
    reg: &Regularizer,
) -> Result<ComidSeqState> {
    check_msg(state.w.dim(), state.t, msg)?;
    if sigma < 0.0 {
        return Err(Error::Config(format!(
            "sigma must be nonnegative, got {sigma}"
        )));
    }
    state.sigma_sum += sigma;
    let s = state.sigma_sum;
    let (l1, l2) = (reg.l1_coeff(), reg.l2_coeff());
    let denom = s + l2;
    let mut v = state.w.clone();
    v.scale(s);
    v.axpy_sparse(-1.0, &msg.g)?;
    for i in 0..v.dim() {
        let thresholded = soft_threshold(v[i], l1);
        if denom == 0.0 {
            if thresholded != 0.0 {
                return Err(Error::UndefinedArgmin);
            }
            state.w[i] = 0.0;
        } else {
            state.w[i] = thresholded / denom;
        }
    }
    state.t += 1;
    Ok(state)
}

/// Follow-the-leader form equivalent to `comid_seq_step`: accumulates the
/// gradient history, the regularizer subgradients chosen by each argmin, and
/// the curvature centered at its own iterates, then re-solves
/// `argmin { <grads + reg_grads, w> + sum_i sigma_i/2 * |w - w_i|^2 + r(w) }`
/// from scratch every step.
#[derive(Debug, Clone)]
pub struct FtrlArgminState {
    pub w: DenseVec,
    pub sigma_sum: f64,
    pub t: u64,
    grad_sum: DenseVec,
    reg_grad_sum: DenseVec,
    center_sum: DenseVec,
}

impl FtrlArgminState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            w: DenseVec::zeros(dim),
            sigma_sum: 0.0,
            t: 0,
            grad_sum: DenseVec::zeros(dim),
            reg_grad_sum: DenseVec::zeros(dim),
            center_sum: DenseVec::zeros(dim),
        }
    }
}

pub fn ftrl_argmin_step(
    mut state: FtrlArgminState,
    msg: &GradientMsg,
    sigma: f64,
    reg: &Regularizer,
) -> Result<FtrlArgminState> {
    check_msg(state.w.dim(), state.t, msg)?;
    if sigma < 0.0 {
        return Err(Error::Config(format!(
            "sigma must be nonnegative, got {sigma}"
        )));
    }
    // Quadratic term sigma/2 * |w - w_t|^2 is centered at the current iterate.
    if sigma != 0.0 {
        for i in 0..state.w.dim() {
            state.center_sum[i] += sigma * state.w[i];
        }
    }
    state.sigma_sum += sigma;
    state.grad_sum.axpy_sparse(1.0, &msg.g)?;

    let s = state.sigma_sum;
    let (l1, l2) = (reg.l1_coeff(), reg.l2_coeff());
    let denom = s + l2;
    for i in 0..state.w.dim() {
        let b = state.grad_sum[i] + state.reg_grad_sum[i] - state.center_sum[i];
        let thresholded = soft_threshold(-b, l1);
        let w_new = if denom == 0.0 {
            if thresholded != 0.0 {
                return Err(Error::UndefinedArgmin);
            }
            0.0
        } else {
            thresholded / denom
        };
        state.w[i] = w_new;
        // The subgradient of r the argmin committed to, read off its
        // optimality condition; for L1 at zero this lies strictly inside
        // [-lambda1, lambda1] rather than at sgn(0)*lambda1.
        state.reg_grad_sum[i] += -b - s * w_new;
    }
    state.t += 1;
    Ok(state)
}

/// Hyperparameters of the per-coordinate FTRL update.
#[derive(Debug, Clone, Copy)]
pub struct FtrlParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl FtrlParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.beta < 0.0 || self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::Config(format!(
                "beta/lambda1/lambda2 must be nonnegative, got {} {} {}",
                self.beta, self.lambda1, self.lambda2
            )));
        }
        Ok(())
    }
}

/// Per-coordinate FTRL server state. `z` and `n` are the linear and
/// squared-gradient accumulators; `w` caches the last materialized weight of
/// each coordinate and is only ever written on gradient support.
#[derive(Debug, Clone)]
pub struct FtrlState {
    pub z: DenseVec,
    pub n: DenseVec,
    pub w: DenseVec,
    pub params: FtrlParams,
    pub t: u64,
}

impl FtrlState {
    pub fn new(dim: usize, params: FtrlParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            z: DenseVec::zeros(dim),
            n: DenseVec::zeros(dim),
            w: DenseVec::zeros(dim),
            params,
            t: 0,
        })
    }

    /// Seeds `z` so that every coordinate first materializes to `w1[i]`:
    /// `z_i = -w1_i * ((beta + sqrt(n_i)) / alpha + lambda2) - sgn(w1_i) * lambda1`.
    pub fn with_initial_weights(dim: usize, params: FtrlParams, w1: &DenseVec) -> Result<Self> {
        if w1.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: w1.dim(),
            });
        }
        let mut state = Self::new(dim, params)?;
        let denom = params.beta / params.alpha + params.lambda2;
        for i in 0..dim {
            state.z[i] = -w1[i] * denom - sgn0(w1[i]) * params.lambda1;
            state.w[i] = state.materialize_coord(i);
        }
        Ok(state)
    }

    /// Weight implied by the current `z_i`, `n_i`: 0 inside the L1 dead zone,
    /// otherwise the shrunk overshoot.
    pub fn materialize_coord(&self, i: usize) -> f64 {
        let z = self.z[i];
        let p = &self.params;
        if z.abs() <= p.lambda1 {
            0.0
        } else {
            -(z - sgn0(z) * p.lambda1) / ((p.beta + self.n[i].sqrt()) / p.alpha + p.lambda2)
        }
    }

    pub fn materialize_all(&self) -> DenseVec {
        let mut w = DenseVec::zeros(self.z.dim());
        for i in 0..w.dim() {
            w[i] = self.materialize_coord(i);
        }
        w
    }
}

/// Lazy per-coordinate FTRL update. Only coordinates in the gradient support
/// are touched; for each, the weight is materialized from the old `z`, `n`
/// first, then the accumulators advance:
/// `sigma = (sqrt(n + g^2) - sqrt(n)) / alpha`, `z += g - sigma*w`, `n += g^2`.
pub fn ftrl_coordinate_update(mut state: FtrlState, msg: &GradientMsg) -> Result<FtrlState> {
    check_msg(state.z.dim(), state.t, msg)?;
    let alpha = state.params.alpha;
    for (i, gi) in msg.g.iter() {
        let w_i = state.materialize_coord(i);
        state.w[i] = w_i;
        let n_i = state.n[i];
        let sigma = ((n_i + gi * gi).sqrt() - n_i.sqrt()) / alpha;
        state.z[i] += gi - sigma * w_i;
        state.n[i] = n_i + gi * gi;
    }
    state.t += 1;
    Ok(state)
}
