//! Logistic loss, composite regularizers, and the mirror map used by the
//! proximal steps.
//!
//! Labels live in `{-1, +1}`. The loss on a sample is
//! `log(1 + exp(-y * (w . x)))`, evaluated through an overflow-guarded
//! branch, and its gradient is `(sigmoid(w . x) - y01) * x` with
//! `y01 = (y + 1) / 2`. `sgn(0)` is defined as `0` everywhere a sign is
//! taken.

use crate::error::{Error, Result};
use crate::sparse::{DenseVec, SparseVec};

/// Sign with `sgn(0) = 0`, unlike `f64::signum`.
pub fn sgn0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sgn(x) * max(|x| - k, 0)` for `k >= 0`.
pub fn soft_threshold(x: f64, k: f64) -> f64 {
    if x > k {
        x - k
    } else if x < -k {
        x + k
    } else {
        0.0
    }
}

/// `log(1 + exp(z))` without overflow; for `z > 30` the `1` is below f64
/// resolution of the result and `z` is returned directly.
pub fn log1p_exp(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Sparse feature vector plus a `{-1, +1}` label.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub x: SparseVec,
    y: f64,
}

impl LabeledSample {
    pub fn new(x: SparseVec, y: f64) -> Result<Self> {
        if y != 1.0 && y != -1.0 {
            return Err(Error::InvalidLabel(y));
        }
        Ok(Self { x, y })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Label mapped to `{0, 1}`.
    pub fn y01(&self) -> f64 {
        (self.y + 1.0) / 2.0
    }
}

/// `log(1 + exp(-y * (w . x)))`.
pub fn logloss_sample(s: &LabeledSample, w: &DenseVec) -> Result<f64> {
    let margin = s.x.dot(w)?;
    Ok(log1p_exp(-s.y * margin))
}

/// `(sigmoid(w . x) - y01) * x`; support is contained in the support of `x`.
pub fn logloss_grad(s: &LabeledSample, w: &DenseVec) -> Result<SparseVec> {
    let coeff = sigmoid(s.x.dot(w)?) - s.y01();
    Ok(s.x.scaled(coeff))
}

/// Composite regularizer `r(w)`; coefficients are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    None,
    L1 { lambda1: f64 },
    L2 { lambda: f64 },
    ElasticNet { lambda1: f64, lambda2: f64 },
}

impl Regularizer {
    /// Picks the variant implied by which coefficients are nonzero.
    pub fn from_coeffs(lambda1: f64, lambda2: f64) -> Result<Self> {
        if lambda1 < 0.0 || lambda2 < 0.0 {
            return Err(Error::Config(format!(
                "regularizer coefficients must be nonnegative, got l1={lambda1} l2={lambda2}"
            )));
        }
        Ok(match (lambda1 > 0.0, lambda2 > 0.0) {
            (false, false) => Regularizer::None,
            (true, false) => Regularizer::L1 { lambda1 },
            (false, true) => Regularizer::L2 { lambda: lambda2 },
            (true, true) => Regularizer::ElasticNet { lambda1, lambda2 },
        })
    }

    pub fn l1_coeff(&self) -> f64 {
        match *self {
            Regularizer::L1 { lambda1 } | Regularizer::ElasticNet { lambda1, .. } => lambda1,
            _ => 0.0,
        }
    }

    pub fn l2_coeff(&self) -> f64 {
        match *self {
            Regularizer::L2 { lambda } => lambda,
            Regularizer::ElasticNet { lambda2, .. } => lambda2,
            _ => 0.0,
        }
    }

    /// `lambda1 * |w|_1 + lambda2 / 2 * |w|_2^2` with the variant's coefficients.
    pub fn value(&self, w: &DenseVec) -> f64 {
        let (l1, l2) = (self.l1_coeff(), self.l2_coeff());
        let mut abs_sum = 0.0;
        let mut sq_sum = 0.0;
        for &v in w.as_slice() {
            abs_sum += v.abs();
            sq_sum += v * v;
        }
        l1 * abs_sum + 0.5 * l2 * sq_sum
    }

    /// Subgradient with `sgn(0) = 0`.
    pub fn subgrad(&self, w: &DenseVec) -> DenseVec {
        let (l1, l2) = (self.l1_coeff(), self.l2_coeff());
        let mut g = DenseVec::zeros(w.dim());
        for (i, &v) in w.as_slice().iter().enumerate() {
            g[i] = l1 * sgn0(v) + l2 * v;
        }
        g
    }

    /// Coordinatewise `argmin_u { (u - v)^2 / (2 eta) + r(u) }`:
    /// soft-threshold then shrink.
    pub fn prox_coord(&self, v: f64, eta: f64) -> f64 {
        soft_threshold(v, eta * self.l1_coeff()) / (1.0 + eta * self.l2_coeff())
    }
}

/// Distance-generating map for the mirror-descent steps. Only the quadratic
/// map is implemented; the trait fixes what a replacement would owe.
pub trait MirrorMap {
    fn value(&self, w: &DenseVec) -> f64;
    fn grad(&self, w: &DenseVec) -> DenseVec;
    /// Modulus of strong convexity with respect to the L2 norm.
    fn strong_convexity(&self) -> f64;
    /// Constant `a` with `a * |grad(w) - grad(v)| >= |w - v|`.
    fn inverse_lipschitz(&self) -> f64;

    fn bregman(&self, w: &DenseVec, v: &DenseVec) -> Result<f64> {
        if w.dim() != v.dim() {
            return Err(Error::DimMismatch {
                expected: w.dim(),
                got: v.dim(),
            });
        }
        let gv = self.grad(v);
        let mut ip = 0.0;
        for i in 0..w.dim() {
            ip += gv[i] * (w[i] - v[i]);
        }
        Ok(self.value(w) - self.value(v) - ip)
    }
}

/// `psi(w) = |w|^2 / 2`; its Bregman divergence is `|w - v|^2 / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticMap;

impl MirrorMap for QuadraticMap {
    fn value(&self, w: &DenseVec) -> f64 {
        0.5 * w.as_slice().iter().map(|v| v * v).sum::<f64>()
    }

    fn grad(&self, w: &DenseVec) -> DenseVec {
        w.clone()
    }

    fn strong_convexity(&self) -> f64 {
        1.0
    }

    fn inverse_lipschitz(&self) -> f64 {
        1.0
    }

    fn bregman(&self, w: &DenseVec, v: &DenseVec) -> Result<f64> {
        if w.dim() != v.dim() {
            return Err(Error::DimMismatch {
                expected: w.dim(),
                got: v.dim(),
            });
        }
        let d: f64 = w
            .as_slice()
            .iter()
            .zip(v.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(0.5 * d)
    }
}

/// Constants entering the delayed-regret bound, measured on visited iterates.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    /// Largest observed norm of a pushed loss gradient.
    pub m_in: f64,
    /// Largest observed norm of a composite (loss + regularizer) gradient.
    pub m_out: f64,
    pub tau_max: u64,
    pub eta: f64,
    /// Bregman divergence from the comparator to the initial iterate.
    pub b_init: f64,
    /// Inverse-Lipschitz constant of the mirror map (1 for the quadratic map).
    pub alpha: f64,
    /// Sum of `r` over the first `tau_max` iterates of the run.
    pub early_reg_sum: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dim: usize, pairs: Vec<(usize, f64)>, y: f64) -> LabeledSample {
        LabeledSample::new(SparseVec::from_pairs(dim, pairs).unwrap(), y).unwrap()
    }

    #[test]
    fn label_validation() {
        assert!(LabeledSample::new(SparseVec::empty(1), 0.5).is_err());
        assert!(LabeledSample::new(SparseVec::empty(1), -1.0).is_ok());
    }

    #[test]
    fn logloss_hand_values() {
        // w.x = 1, y = -1: log(1 + e).
        let s = sample(2, vec![(0, 1.0)], -1.0);
        let w = DenseVec::from_vec(vec![1.0, 0.0]);
        assert!((logloss_sample(&s, &w).unwrap() - 1.3132616875182228).abs() < 1e-12);

        // Zero margin: log 2.
        let s = sample(2, vec![(1, 1.0)], 1.0);
        assert!((logloss_sample(&s, &w).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn logloss_extreme_margins_are_finite() {
        let s_pos = sample(1, vec![(0, 1.0)], 1.0);
        let s_neg = sample(1, vec![(0, 1.0)], -1.0);
        let big = DenseVec::from_vec(vec![1000.0]);
        let small = DenseVec::from_vec(vec![-1000.0]);
        for (s, w) in [
            (&s_pos, &big),
            (&s_pos, &small),
            (&s_neg, &big),
            (&s_neg, &small),
        ] {
            let l = logloss_sample(s, w).unwrap();
            assert!(l.is_finite() && l >= 0.0, "loss {l} not finite/nonneg");
        }
        // Wrong-side huge margin costs about the margin itself.
        assert!((logloss_sample(&s_neg, &big).unwrap() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn grad_hand_value() {
        // w = (1, 0), x = {0: 1}, y01 = 0: gradient is sigmoid(1) at coord 0.
        let s = sample(2, vec![(0, 1.0)], -1.0);
        let w = DenseVec::from_vec(vec![1.0, 0.0]);
        let g = logloss_grad(&s, &w).unwrap();
        assert_eq!(g.nnz(), 1);
        assert!((g.get(0) - 0.7310585786300049).abs() < 1e-12);
    }

    #[test]
    fn grad_support_contained_in_x() {
        let s = sample(5, vec![(1, 0.3), (4, 0.9)], 1.0);
        let w = DenseVec::zeros(5);
        let g = logloss_grad(&s, &w).unwrap();
        assert!(g.indices().all(|i| i == 1 || i == 4));
    }

    #[test]
    fn sgn_of_zero_is_zero() {
        assert_eq!(sgn0(0.0), 0.0);
        assert_eq!(sgn0(-0.0), 0.0);
        assert_eq!(sgn0(3.0), 1.0);
        assert_eq!(sgn0(-0.1), -1.0);
    }

    #[test]
    fn regularizer_values_and_subgrads() {
        let w = DenseVec::from_vec(vec![1.0, -2.0, 0.0]);
        let l1 = Regularizer::from_coeffs(0.5, 0.0).unwrap();
        let l2 = Regularizer::from_coeffs(0.0, 2.0).unwrap();
        let en = Regularizer::from_coeffs(0.5, 2.0).unwrap();

        assert_eq!(l1.value(&w), 1.5);
        assert_eq!(l2.value(&w), 5.0);
        assert_eq!(en.value(&w), 6.5);
        assert_eq!(Regularizer::None.value(&w), 0.0);

        assert_eq!(l1.subgrad(&w).as_slice(), &[0.5, -0.5, 0.0]);
        assert_eq!(l2.subgrad(&w).as_slice(), &[2.0, -4.0, 0.0]);
    }

    #[test]
    fn from_coeffs_picks_variant() {
        assert_eq!(
            Regularizer::from_coeffs(0.0, 0.0).unwrap(),
            Regularizer::None
        );
        assert!(matches!(
            Regularizer::from_coeffs(0.1, 0.0).unwrap(),
            Regularizer::L1 { .. }
        ));
        assert!(matches!(
            Regularizer::from_coeffs(0.0, 0.1).unwrap(),
            Regularizer::L2 { .. }
        ));
        assert!(matches!(
            Regularizer::from_coeffs(0.1, 0.1).unwrap(),
            Regularizer::ElasticNet { .. }
        ));
        assert!(Regularizer::from_coeffs(-0.1, 0.0).is_err());
    }

    #[test]
    fn quadratic_bregman_is_half_squared_distance() {
        let w = DenseVec::from_vec(vec![1.0, 2.0]);
        let v = DenseVec::from_vec(vec![0.0, -1.0]);
        let psi = QuadraticMap;
        assert_eq!(psi.bregman(&w, &v).unwrap(), 5.0);
        assert_eq!(psi.bregman(&w, &w).unwrap(), 0.0);
    }
}
