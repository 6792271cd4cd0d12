//! Finite-difference Jacobian and covariance-based parameter uncertainties.

use nalgebra::{DMatrix, DVector};

use super::Dataset;
use crate::error::{Error, Result};
use crate::models::ModelFn;

/// Central-difference Jacobian ∂f/∂pⱼ at every data abscissa, with
/// per-parameter relative step 1e-6 and absolute floor 1e-9.
///
/// Serves two roles: fallback for models without analytic partials, and
/// the independent oracle the analytic partials are checked against. It
/// calls only [`ModelFn::value`], never the analytic-partial path.
///
/// Parameters must sit strictly inside their bounds by at least the step
/// size; that is the caller's responsibility.
pub fn finite_diff_jacobian(
    model: &dyn ModelFn,
    params: &[f64],
    data: &Dataset,
) -> Vec<Vec<f64>> {
    let n_par = params.len();
    let mut jac = vec![vec![0.0; n_par]; data.len()];
    let mut hi = params.to_vec();
    let mut lo = params.to_vec();
    for j in 0..n_par {
        let h = (1e-6 * params[j].abs()).max(1e-9);
        hi[j] = params[j] + h;
        lo[j] = params[j] - h;
        // divide by the step as actually represented
        let denom = hi[j] - lo[j];
        for (i, &x) in data.x().iter().enumerate() {
            jac[i][j] = (model.value(x, &hi) - model.value(x, &lo)) / denom;
        }
        hi[j] = params[j];
        lo[j] = params[j];
    }
    jac
}

/// 1σ uncertainties and covariance from a Jacobian and residuals:
/// cov = chi²/(N−k) · (JᵀWJ)⁻¹, with N data points and k parameters.
///
/// `weights` are per-point 1/σᵢ² multipliers (None = unweighted). Returns
/// `(stderr, covariance, condition_warning)`; on rank deficiency the
/// warning is set and a pseudo-inverse is used.
pub fn uncertainties(
    jacobian: &[Vec<f64>],
    residuals: &[f64],
    weights: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, bool)> {
    let n = jacobian.len();
    if n == 0 {
        return Err(Error::argument("empty jacobian".to_string()));
    }
    let k = jacobian[0].len();
    if jacobian.iter().any(|row| row.len() != k) {
        return Err(Error::argument("ragged jacobian".to_string()));
    }
    if residuals.len() != n {
        return Err(Error::argument(format!(
            "residual count {} does not match {} jacobian rows",
            residuals.len(),
            n
        )));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::argument("weight count mismatch".to_string()));
        }
        if w.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::argument("weights must be > 0".to_string()));
        }
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);

    let mut jtwj = DMatrix::<f64>::zeros(k, k);
    let mut chi2 = 0.0;
    for i in 0..n {
        let w = weight(i);
        chi2 += w * residuals[i] * residuals[i];
        for a in 0..k {
            for b in a..k {
                jtwj[(a, b)] += w * jacobian[i][a] * jacobian[i][b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            jtwj[(a, b)] = jtwj[(b, a)];
        }
    }

    let dof = n.saturating_sub(k).max(1) as f64;
    let factor = chi2 / dof;

    let (inv, warning) = match jtwj.clone().cholesky() {
        Some(chol) => (chol.inverse(), false),
        None => {
            let svd = jtwj.svd(true, true);
            let eps = svd.singular_values.max() * 1e-12;
            let pinv = svd
                .pseudo_inverse(eps.max(f64::MIN_POSITIVE))
                .unwrap_or_else(|_| DMatrix::zeros(k, k));
            (pinv, true)
        }
    };

    let covariance: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| factor * inv[(a, b)]).collect())
        .collect();
    let stderr: Vec<f64> = (0..k).map(|a| covariance[a][a].max(0.0).sqrt()).collect();
    Ok((stderr, covariance, warning))
}

/// Weighted residual sum for raw residuals, matching the chi² definition
/// used by [`uncertainties`].
pub(crate) fn weighted_chi2(residuals: &[f64], weights: Option<&[f64]>) -> f64 {
    residuals
        .iter()
        .enumerate()
        .map(|(i, r)| weights.map_or(1.0, |w| w[i]) * r * r)
        .sum()
}

/// Convenience used by tests and the gradient suite: residual vector wrapper.
#[allow(dead_code)]
pub(crate) fn as_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Mims, ModelFn};
    use approx::assert_relative_eq;

    /// y = p·x, whose jacobian column is exactly x.
    struct LinearModel;

    impl ModelFn for LinearModel {
        fn name(&self) -> &'static str {
            "linear"
        }
        fn param_names(&self) -> &'static [&'static str] {
            &["slope"]
        }
        fn param_units(&self) -> &'static [&'static str] {
            &["1"]
        }
        fn value(&self, x: f64, p: &[f64]) -> f64 {
            p[0] * x
        }
        fn default_bounds(&self) -> Vec<(f64, f64)> {
            vec![(f64::NEG_INFINITY, f64::INFINITY)]
        }
        fn guess(&self, _data: &Dataset) -> Vec<f64> {
            vec![1.0]
        }
        fn has_analytic_partials(&self) -> bool {
            false
        }
    }

    /// y = c.
    struct ConstantModel;

    impl ModelFn for ConstantModel {
        fn name(&self) -> &'static str {
            "constant"
        }
        fn param_names(&self) -> &'static [&'static str] {
            &["c"]
        }
        fn param_units(&self) -> &'static [&'static str] {
            &["1"]
        }
        fn value(&self, _x: f64, p: &[f64]) -> f64 {
            p[0]
        }
        fn default_bounds(&self) -> Vec<(f64, f64)> {
            vec![(f64::NEG_INFINITY, f64::INFINITY)]
        }
        fn guess(&self, _data: &Dataset) -> Vec<f64> {
            vec![0.0]
        }
    }

    #[test]
    fn linear_model_column_is_exact() {
        let xs = vec![0.5, 1.0, 2.0, 4.0];
        let data = Dataset::new(xs.clone(), vec![0.0; 4], None).unwrap();
        let jac = finite_diff_jacobian(&LinearModel, &[3.0], &data);
        for (row, &x) in jac.iter().zip(&xs) {
            assert_relative_eq!(row[0], x, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_model_gives_derivative_wrt_param_one() {
        // ∂c/∂c = 1 everywhere; a model with no x dependence has a constant
        // jacobian column.
        let data = Dataset::new(vec![1.0, 2.0, 3.0], vec![0.0; 3], None).unwrap();
        let jac = finite_diff_jacobian(&ConstantModel, &[5.0], &data);
        for row in &jac {
            assert_relative_eq!(row[0], 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn matches_analytic_partials_of_mims() {
        // Analytic-vs-numeric oracle at 50 spread-out points.
        let model = Mims;
        let p = [1.3, 421.5, 1.4];
        let xs: Vec<f64> = (1..=50).map(|i| i as f64 * 12.0).collect();
        let data = Dataset::new(xs.clone(), vec![0.0; 50], None).unwrap();
        let jac = finite_diff_jacobian(&model, &p, &data);
        let mut dp = [0.0; 3];
        for (i, &x) in xs.iter().enumerate() {
            model.value_and_partials(x, &p, &mut dp);
            for j in 0..3 {
                let denom = dp[j].abs().max(jac[i][j].abs()).max(1e-9);
                assert!(
                    (dp[j] - jac[i][j]).abs() / denom < 1e-5,
                    "mismatch at x={x} param {j}: {} vs {}",
                    dp[j],
                    jac[i][j]
                );
            }
        }
    }

    #[test]
    fn zero_residuals_zero_stderr() {
        let jac = vec![vec![1.0, 0.5], vec![2.0, 0.25], vec![3.0, 4.0]];
        let (stderr, cov, warn) = uncertainties(&jac, &[0.0, 0.0, 0.0], None).unwrap();
        assert!(!warn);
        assert!(stderr.iter().all(|&s| s == 0.0));
        assert!(cov.iter().flatten().all(|&c| c == 0.0));
    }

    #[test]
    fn single_parameter_linear_closed_form() {
        // Weighted single-parameter fit: stderr² = [Σw r²/(N−1)]·(Σw x²)⁻¹.
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let resid = [0.1, -0.05, 0.2, -0.15, 0.02];
        let sigma = [0.1, 0.2, 0.1, 0.3, 0.15];
        let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
        let jac: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let (stderr, _, warn) = uncertainties(&jac, &resid, Some(&w)).unwrap();
        assert!(!warn);

        let chi2: f64 = resid.iter().zip(&w).map(|(r, wi)| wi * r * r).sum();
        let sxx: f64 = xs.iter().zip(&w).map(|(x, wi)| wi * x * x).sum();
        let expected = (chi2 / 4.0 / sxx).sqrt();
        assert_relative_eq!(stderr[0], expected, max_relative = 1e-10);
    }

    #[test]
    fn rank_deficiency_sets_warning() {
        // Two identical columns: JᵀWJ is singular.
        let jac = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let (_, _, warn) = uncertainties(&jac, &[0.1, 0.1, 0.1], None).unwrap();
        assert!(warn);
    }
}
