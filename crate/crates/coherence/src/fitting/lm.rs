//! The Levenberg-Marquardt iteration.

use nalgebra::{DMatrix, DVector};

use super::uncertainty::{uncertainties, weighted_chi2};
use super::{Dataset, FitResult};
use crate::error::{Error, Result};
use crate::models::ModelFn;

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e12;
const LAMBDA_UP: f64 = 10.0;
const LAMBDA_DOWN: f64 = 0.3;

/// Options for [`lm_fit`]. `None` fields fall back to the model's guess
/// heuristics and default bounds.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Initial parameter vector; must lie within bounds.
    pub init: Option<Vec<f64>>,
    /// Box bounds per parameter, enforced by projection at every iterate.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Frozen-parameter mask; frozen entries keep their initial value.
    pub frozen: Option<Vec<bool>>,
    /// Iteration cap (solve attempts).
    pub max_iter: usize,
    /// Convergence threshold on the relative chi² decrease of an accepted
    /// step.
    pub ftol: f64,
    /// Convergence threshold on the largest scaled parameter step.
    pub xtol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            init: None,
            bounds: None,
            frozen: None,
            max_iter: 500,
            ftol: 1e-10,
            xtol: 1e-10,
        }
    }
}

/// Weighted least-squares fit of `model` to `data`.
///
/// Deterministic: identical inputs produce bit-identical results. Each free
/// parameter is scaled internally by max(|init|, 1) so coefficients of very
/// different magnitude (a T⁷ prefactor next to an O(1) offset) condition
/// the normal equations equally. Damping starts at λ = 1e-3, shrinks ×0.3
/// on accepted steps and grows ×10 on rejected ones, clamped to
/// [1e-12, 1e12]. Singular normal equations end the fit with
/// `converged = false` and `condition_warning = true`.
pub fn lm_fit(model: &dyn ModelFn, data: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    let n_par = model.n_params();
    let n_pts = data.len();

    let (init, init_from_guess) = match &opts.init {
        Some(v) => (v.clone(), false),
        None => (model.guess(data), true),
    };
    if init.len() != n_par {
        return Err(Error::argument(format!(
            "initial vector has {} entries, model '{}' has {} parameters",
            init.len(),
            model.name(),
            n_par
        )));
    }
    let bounds = match &opts.bounds {
        Some(b) => b.clone(),
        None => model.default_bounds(),
    };
    if bounds.len() != n_par {
        return Err(Error::argument("bounds length mismatch".to_string()));
    }
    if bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
        return Err(Error::argument("bounds must satisfy lo <= hi".to_string()));
    }
    let frozen = match &opts.frozen {
        Some(f) => f.clone(),
        None => vec![false; n_par],
    };
    if frozen.len() != n_par {
        return Err(Error::argument("frozen mask length mismatch".to_string()));
    }

    let mut p: Vec<f64> = init.clone();
    for i in 0..n_par {
        let (lo, hi) = bounds[i];
        if p[i] < lo || p[i] > hi {
            if init_from_guess {
                // Heuristic guesses are clamped rather than rejected, so
                // unattended fits from a file always start.
                p[i] = p[i].clamp(lo, hi);
            } else {
                return Err(Error::argument(format!(
                    "initial {} = {} outside bounds [{lo}, {hi}]",
                    model.param_names()[i],
                    p[i]
                )));
            }
        }
    }

    let free: Vec<usize> = (0..n_par).filter(|&i| !frozen[i]).collect();
    let k = free.len();
    if k == 0 {
        return Err(Error::argument("no free parameters".to_string()));
    }
    if n_pts < k {
        return Err(Error::argument(format!(
            "{n_pts} data points cannot constrain {k} free parameters"
        )));
    }
    for &x in data.x() {
        model.check_x(x)?;
    }

    let scale: Vec<f64> = free.iter().map(|&i| p[i].abs().max(1.0)).collect();
    let w_sqrt: Vec<f64> = (0..n_pts).map(|i| data.weight(i).sqrt()).collect();

    let eval_residuals = |params: &[f64], out: &mut [f64]| -> f64 {
        let mut chi2 = 0.0;
        for i in 0..n_pts {
            let r = (data.y()[i] - model.value(data.x()[i], params)) * w_sqrt[i];
            out[i] = r;
            chi2 += r * r;
        }
        chi2
    };

    let mut resid = vec![0.0; n_pts];
    let mut chi2 = eval_residuals(&p, &mut resid);
    if !chi2.is_finite() {
        return Err(Error::argument(
            "model produced non-finite values at the initial point".to_string(),
        ));
    }
    let mut trace = vec![chi2];
    let mut n_iter = 0usize;
    let mut converged = false;
    let mut condition_warning = false;

    if chi2 == 0.0 {
        // Data exactly on the model: accept the initial point outright.
        converged = true;
    } else {
        let mut lambda = LAMBDA_INIT;
        let mut jtj = DMatrix::<f64>::zeros(k, k);
        let mut jtr = DVector::<f64>::zeros(k);
        let mut need_jacobian = true;
        let mut dp = vec![0.0; n_par];
        let mut row = vec![0.0; k];
        let mut trial = vec![0.0; n_par];
        let mut resid_trial = vec![0.0; n_pts];

        while n_iter < opts.max_iter {
            n_iter += 1;

            if need_jacobian {
                jtj.fill(0.0);
                jtr.fill(0.0);
                for i in 0..n_pts {
                    model.value_and_partials(data.x()[i], &p, &mut dp);
                    for (j, &fi) in free.iter().enumerate() {
                        row[j] = dp[fi] * scale[j] * w_sqrt[i];
                    }
                    for a in 0..k {
                        jtr[a] += row[a] * resid[i];
                        for b in a..k {
                            jtj[(a, b)] += row[a] * row[b];
                        }
                    }
                }
                for a in 0..k {
                    for b in 0..a {
                        jtj[(a, b)] = jtj[(b, a)];
                    }
                }
                need_jacobian = false;
            }

            let mut augmented = jtj.clone();
            for j in 0..k {
                augmented[(j, j)] = jtj[(j, j)] * (1.0 + lambda);
            }
            let step = match augmented.cholesky() {
                Some(chol) => chol.solve(&jtr),
                None => {
                    if lambda >= LAMBDA_MAX {
                        condition_warning = true;
                        break;
                    }
                    lambda = (lambda * LAMBDA_UP).min(LAMBDA_MAX);
                    continue;
                }
            };

            trial.copy_from_slice(&p);
            for (j, &fi) in free.iter().enumerate() {
                let (lo, hi) = bounds[fi];
                trial[fi] = (p[fi] + step[j] * scale[j]).clamp(lo, hi);
            }
            let chi2_trial = eval_residuals(&trial, &mut resid_trial);

            if chi2_trial.is_finite() && chi2_trial <= chi2 {
                let max_step = free
                    .iter()
                    .enumerate()
                    .map(|(j, &fi)| ((trial[fi] - p[fi]) / scale[j]).abs())
                    .fold(0.0, f64::max);
                let rel_decrease = (chi2 - chi2_trial) / chi2;
                p.copy_from_slice(&trial);
                resid.copy_from_slice(&resid_trial);
                chi2 = chi2_trial;
                trace.push(chi2);
                lambda = (lambda * LAMBDA_DOWN).max(LAMBDA_MIN);
                need_jacobian = true;
                if chi2 == 0.0 || rel_decrease < opts.ftol || max_step < opts.xtol {
                    converged = true;
                    break;
                }
            } else {
                // A rejected trial whose projected step is already below
                // xtol means no representable move can improve chi2 —
                // typical when a parameter sits pinned on a bound.
                let max_step = free
                    .iter()
                    .enumerate()
                    .map(|(j, &fi)| ((trial[fi] - p[fi]) / scale[j]).abs())
                    .fold(0.0, f64::max);
                if max_step < opts.xtol {
                    converged = true;
                    break;
                }
                lambda = (lambda * LAMBDA_UP).min(LAMBDA_MAX);
            }
        }
    }

    // Covariance at the solution from the unscaled free-parameter jacobian.
    let mut dp = vec![0.0; n_par];
    let mut jac_free = vec![vec![0.0; k]; n_pts];
    let mut raw_resid = vec![0.0; n_pts];
    for i in 0..n_pts {
        let v = model.value_and_partials(data.x()[i], &p, &mut dp);
        raw_resid[i] = data.y()[i] - v;
        for (j, &fi) in free.iter().enumerate() {
            jac_free[i][j] = dp[fi];
        }
    }
    let weights: Option<Vec<f64>> = data
        .sigma()
        .map(|s| s.iter().map(|sig| 1.0 / (sig * sig)).collect());
    let (stderr_free, cov_free, rank_warning) =
        uncertainties(&jac_free, &raw_resid, weights.as_deref())?;
    condition_warning |= rank_warning;
    debug_assert!((weighted_chi2(&raw_resid, weights.as_deref()) - chi2).abs() <= 1e-8 * chi2.max(1.0));

    let mut stderr = vec![0.0; n_par];
    let mut covariance = vec![vec![0.0; n_par]; n_par];
    for (a, &fa) in free.iter().enumerate() {
        stderr[fa] = stderr_free[a];
        for (b, &fb) in free.iter().enumerate() {
            covariance[fa][fb] = cov_free[a][b];
        }
    }

    let mut result = FitResult {
        params: p,
        stderr,
        covariance,
        chi2,
        n_iter,
        converged,
        condition_warning,
        chi2_trace: trace,
    };
    if let Some(perm) = model.canonical_permutation(&result.params) {
        apply_permutation(&mut result, &perm);
    }
    Ok(result)
}

fn apply_permutation(result: &mut FitResult, perm: &[usize]) {
    let n = perm.len();
    let params: Vec<f64> = perm.iter().map(|&i| result.params[i]).collect();
    let stderr: Vec<f64> = perm.iter().map(|&i| result.stderr[i]).collect();
    let covariance: Vec<Vec<f64>> = perm
        .iter()
        .map(|&a| (0..n).map(|b| result.covariance[a][perm[b]]).collect())
        .collect();
    result.params = params;
    result.stderr = stderr;
    result.covariance = covariance;
}
