//! `verify`: fast self-checks of the library's central claims, one
//! machine-readable PASS/FAIL line per property. Exit code 1 if any fails.
//!
//! These are trimmed-down twins of the release-gate checks: the two
//! leader-form equivalence, the explicit-L2 gap identity, gradient and
//! optimality-condition correctness, the delayed regret bound, sequential
//! degeneration, and threaded replay fidelity — plus a mutation probe that
//! confirms the equivalence checker actually detects a perturbed run.

use comid::data::gen_synthetic;
use comid::metrics::{regret_bound_rhs, regret_series, solve_w_star};
use comid::objectives::{
    logloss_grad, logloss_sample, sigmoid, BoundConstants, MirrorMap, QuadraticMap, Regularizer,
};
use comid::optim::{
    comid_l2_closed_step, comid_seq_step, comid_step_generic, ftrl_argmin_step,
    ftrl_coordinate_update, l2_trick_step, tau_fixed, ComidSeqState, FtrlArgminState, FtrlState,
    GradientMsg, ModelState,
};
use comid::sim::{
    run_simulated, run_threaded, sample_stream, Algo, DelaySchedule, RunOptions, SimConfig,
};
use comid::sparse::{DenseVec, SparseVec};
use comid::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn planted(dim: usize, scale: f64, seed: u64) -> DenseVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DenseVec::zeros(dim);
    for i in 0..dim {
        w[i] = scale * (2.0 * rng.gen::<f64>() - 1.0);
    }
    w
}

/// Curvature stream for the leader-form twins: strictly positive at the
/// first step, occasionally zero afterwards.
fn sigma_at(t: u64) -> f64 {
    if t == 0 {
        1.0
    } else if t % 7 == 3 {
        0.0
    } else {
        1.0 / ((t + 1) as f64).sqrt()
    }
}

/// Runs the mirror-descent form and the from-scratch leader form on one
/// shared delayed-gradient stream; returns the worst per-step L-infinity
/// gap between their iterates (optionally after perturbing the leader-form
/// iterate at the last step).
fn twin_gap(reg: &Regularizer, schedule: &DelaySchedule, seed: u64, perturb: f64) -> Result<f64> {
    let dim = 8;
    let t_total = 600u64;
    let data = gen_synthetic(dim, 60, 2, 5, seed, None)?;
    let order = sample_stream(data.len(), 10, seed);
    let taus = schedule.realize(t_total)?;

    let mut seq = ComidSeqState::zeros(dim);
    let mut ftrl = FtrlArgminState::zeros(dim);
    let mut history: Vec<DenseVec> = vec![seq.w.clone()];
    let mut worst = 0.0f64;
    for t in 0..t_total {
        let stale = &history[taus[t as usize] as usize];
        let g = logloss_grad(&data.samples[order[t as usize]], stale)?;
        let sigma = sigma_at(t);
        seq = comid_seq_step(
            seq,
            &GradientMsg::new(g.clone(), taus[t as usize]),
            sigma,
            reg,
        )?;
        ftrl = ftrl_argmin_step(ftrl, &GradientMsg::new(g, taus[t as usize]), sigma, reg)?;
        let mut hat = ftrl.w.clone();
        if t == t_total - 1 && perturb != 0.0 {
            hat[0] += perturb;
        }
        worst = worst.max(seq.w.linf_distance(&hat)?);
        history.push(seq.w.clone());
    }
    Ok(worst)
}

fn check_twin_equivalence() -> Result<Check> {
    let configs: Vec<(Regularizer, DelaySchedule)> = vec![
        (
            Regularizer::L2 { lambda: 0.01 },
            DelaySchedule::Fixed { tau_max: 3 },
        ),
        (
            Regularizer::L1 { lambda1: 0.05 },
            DelaySchedule::RandomBounded {
                tau_max: 3,
                seed: 5,
            },
        ),
        (
            Regularizer::ElasticNet {
                lambda1: 0.02,
                lambda2: 0.01,
            },
            DelaySchedule::Fixed { tau_max: 0 },
        ),
        (
            Regularizer::L2 { lambda: 0.1 },
            DelaySchedule::RandomBounded {
                tau_max: 5,
                seed: 6,
            },
        ),
    ];
    let mut worst = 0.0f64;
    for (i, (reg, schedule)) in configs.iter().enumerate() {
        worst = worst.max(twin_gap(reg, schedule, 20 + i as u64, 0.0)?);
    }
    Ok(Check {
        name: "twin-equivalence",
        pass: worst < 1e-8,
        detail: format!("4 configs, worst per-step Linf gap {worst:.2e}"),
    })
}

fn check_sensitivity() -> Result<Check> {
    let gap = twin_gap(
        &Regularizer::L2 { lambda: 0.01 },
        &DelaySchedule::Fixed { tau_max: 3 },
        20,
        1e-6,
    )?;
    Ok(Check {
        name: "checker-sensitivity",
        pass: gap >= 1e-8,
        detail: format!("1e-6 perturbation registers as a {gap:.2e} gap"),
    })
}

fn check_gap_identity() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let dim = 12;
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let mut w = DenseVec::zeros(dim);
        for i in 0..dim {
            w[i] = 4.0 * rng.gen::<f64>() - 2.0;
        }
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        for i in 0..dim {
            if rng.gen_bool(0.4) {
                pairs.push((i, rng.gen::<f64>()));
            }
        }
        let g = SparseVec::from_pairs(dim, pairs).unwrap();
        let eta = 1e-3 + 0.099 * rng.gen::<f64>();
        let lambda = 0.5 * rng.gen::<f64>();
        let closed = comid_l2_closed_step(
            ModelState { w: w.clone(), t: 0 },
            &GradientMsg::new(g.clone(), 0),
            lambda,
            eta,
        )?;
        let plain = l2_trick_step(
            ModelState { w: w.clone(), t: 0 },
            &GradientMsg::new(g, 0),
            lambda,
            eta,
        )?;
        let s = eta * lambda;
        let coef = s * s / (1.0 + s);
        for i in 0..dim {
            let actual = closed.w[i] - plain.w[i];
            worst = worst.max((actual - coef * w[i]).abs());
        }
    }
    Ok(Check {
        name: "l2-gap-identity",
        pass: worst < 1e-12,
        detail: format!("300 states, worst coordinate error {worst:.2e}"),
    })
}

fn check_gradient_fd() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let dim = rng.gen_range(2..=32);
        let data = gen_synthetic(dim, 1, 1, dim.min(6), rng.gen(), None)?;
        let s = &data.samples[0];
        let mut w = DenseVec::zeros(dim);
        for i in 0..dim {
            w[i] = 3.0 * rng.gen::<f64>() - 1.5;
        }
        let g = logloss_grad(s, &w)?;
        let h = 1e-6;
        for (i, gi) in g.iter() {
            let mut wp = w.clone();
            wp[i] += h;
            let mut wm = w.clone();
            wm[i] -= h;
            let fd = (logloss_sample(s, &wp)? - logloss_sample(s, &wm)?) / (2.0 * h);
            worst = worst.max((gi - fd).abs() / gi.abs().max(1.0));
        }
    }
    Ok(Check {
        name: "gradient-fd",
        pass: worst < 1e-5,
        detail: format!("200 pairs, worst relative error {worst:.2e}"),
    })
}

fn check_residual() -> Result<Check> {
    let dim = 16;
    let (eta, lambda) = (0.05, 0.05);
    let reg = Regularizer::L2 { lambda };
    let data = gen_synthetic(dim, 80, 2, 6, 99, None)?;
    let order = sample_stream(data.len(), 25, 99);
    let t_total = 2000usize;
    let mut state = ModelState {
        w: DenseVec::zeros(dim),
        t: 0,
    };
    let mut history = vec![state.w.clone()];
    let mut worst = 0.0f64;
    for (t, &idx) in order.iter().take(t_total).enumerate() {
        let tau = tau_fixed(t as u64, 2) as usize;
        let g = logloss_grad(&data.samples[idx], &history[tau])?;
        let prev = state.w.clone();
        state = comid_step_generic(
            state,
            &GradientMsg::new(g.clone(), tau as u64),
            &reg,
            &QuadraticMap,
            eta,
        )?;
        let gd = g.to_dense();
        for i in 0..dim {
            let r = eta * gd[i] + eta * lambda * state.w[i] + state.w[i] - prev[i];
            worst = worst.max(r.abs());
        }
        history.push(state.w.clone());
    }
    Ok(Check {
        name: "optimality-residual",
        pass: worst < 1e-10,
        detail: format!("{t_total} delayed steps, worst residual {worst:.2e}"),
    })
}

fn check_degeneration() -> Result<Check> {
    let data = gen_synthetic(40, 100, 2, 6, 3, None)?;

    let cfg = SimConfig {
        algo: Algo::FtrlCoord,
        alpha: 0.1,
        beta: 1.0,
        lambda1: 0.01,
        lambda2: 0.001,
        epochs: 2,
        seed: 3,
        ..SimConfig::default()
    };
    let out = run_simulated(&cfg, &data, &RunOptions::default())?;
    let mut state = FtrlState::new(data.dim, cfg.ftrl_params())?;
    for idx in sample_stream(data.len(), cfg.epochs, cfg.seed) {
        let s = &data.samples[idx];
        let mut margin = 0.0;
        for (i, v) in s.x.iter() {
            margin += state.materialize_coord(i) * v;
        }
        let coeff = sigmoid(margin) - s.y01();
        let g = s.x.scaled(coeff);
        let msg = GradientMsg::new(g, state.t);
        state = ftrl_coordinate_update(state, &msg)?;
    }
    let ftrl_ok = out.final_weights.bits_eq(&state.materialize_all());

    let cfg = SimConfig {
        algo: Algo::L2Trick,
        eta: 1e-2,
        lambda: 1e-3,
        epochs: 2,
        seed: 3,
        ..SimConfig::default()
    };
    let out = run_simulated(&cfg, &data, &RunOptions::default())?;
    let mut state = ModelState {
        w: DenseVec::zeros(data.dim),
        t: 0,
    };
    for idx in sample_stream(data.len(), cfg.epochs, cfg.seed) {
        let g = logloss_grad(&data.samples[idx], &state.w)?;
        let msg = GradientMsg::new(g, state.t);
        state = l2_trick_step(state, &msg, cfg.lambda, cfg.eta)?;
    }
    let l2_ok = out.final_weights.bits_eq(&state.w);

    Ok(Check {
        name: "delay-degeneration",
        pass: ftrl_ok && l2_ok,
        detail: format!("bitwise match: aftrl {ftrl_ok}, l2trick {l2_ok}"),
    })
}

fn check_regret_bound() -> Result<Check> {
    let dim = 8;
    let w_true = planted(dim, 1.5, 11);
    let data = gen_synthetic(dim, 150, 2, 5, 12, Some(&w_true))?;
    let reg = Regularizer::L2 { lambda: 0.01 };
    let w_star = solve_w_star(&data, &reg, 1e-8)?;
    let cfg = SimConfig {
        algo: Algo::Comid,
        workers: 4,
        delay: DelaySchedule::Fixed { tau_max: 3 },
        eta: 1e-2,
        lambda: 0.01,
        epochs: 4,
        seed: 13,
        ..SimConfig::default()
    };
    let opts = RunOptions {
        log_iterates: true,
        track_constants: true,
    };
    let out = run_simulated(&cfg, &data, &opts)?;
    let regret = regret_series(
        out.iterates.as_ref().unwrap(),
        &data,
        &out.sample_order,
        &reg,
        &w_star,
    )?;
    let consts = BoundConstants {
        m_in: out.bounds.m_in,
        m_out: out.bounds.m_out,
        tau_max: 3,
        eta: cfg.eta,
        b_init: 0.5 * w_star.l2_norm().powi(2),
        alpha: QuadraticMap.inverse_lipschitz(),
        early_reg_sum: out.bounds.early_reg_sum,
    };
    let violation = regret
        .iter()
        .enumerate()
        .find(|(t, &r)| r > regret_bound_rhs(&consts, *t as u64 + 1).m_out_variant);
    Ok(Check {
        name: "regret-bound",
        pass: violation.is_none(),
        detail: match violation {
            None => format!("{} steps all under the bound", regret.len()),
            Some((t, &r)) => format!("regret {r:.4} exceeds the bound at step {}", t + 1),
        },
    })
}

fn check_replay() -> Result<Check> {
    let data = gen_synthetic(40, 120, 2, 6, 21, None)?;
    let cfg = SimConfig {
        algo: Algo::FtrlCoord,
        workers: 4,
        delay: DelaySchedule::Fixed { tau_max: 3 },
        alpha: 0.1,
        beta: 1.0,
        lambda1: 0.01,
        lambda2: 0.001,
        epochs: 2,
        seed: 21,
        ..SimConfig::default()
    };
    let live = run_threaded(&cfg, &data, &RunOptions::default())?;
    let replay_cfg = SimConfig {
        delay: DelaySchedule::Trace {
            tau_max: 3,
            taus: live.taus.clone(),
        },
        ..cfg
    };
    let replay = run_simulated(&replay_cfg, &data, &RunOptions::default())?;
    let gap = live.final_weights.linf_distance(&replay.final_weights)?;
    Ok(Check {
        name: "replay-fidelity",
        pass: gap <= 1e-12,
        detail: format!("threaded run replayed through its trace, final Linf {gap:.2e}"),
    })
}

/// Runs the whole suite; returns true when every check passes.
pub fn cmd_verify() -> Result<bool> {
    let checks = [
        check_twin_equivalence()?,
        check_sensitivity()?,
        check_gap_identity()?,
        check_gradient_fd()?,
        check_residual()?,
        check_degeneration()?,
        check_regret_bound()?,
        check_replay()?,
    ];
    let mut all = true;
    for c in &checks {
        println!(
            "verify {}: {} ({})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
        all &= c.pass;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("verify: {} checks, {} failed", checks.len(), failed);
    Ok(all)
}
