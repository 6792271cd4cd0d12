//! Deterministic Levenberg-Marquardt nonlinear least squares with box
//! bounds, parameter freezing, and covariance-based uncertainties.

mod lm;
mod uncertainty;

pub use lm::{lm_fit, FitOptions};
pub use uncertainty::{finite_diff_jacobian, uncertainties};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered (x, y, σ) samples with declared axis units.
///
/// Construction sorts rows lexicographically by (x, y, σ), so any
/// permutation of the same rows produces an identical dataset and therefore
/// a bit-identical fit. Duplicate x values are allowed but flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    sigma: Option<Vec<f64>>,
    x_unit: String,
    y_unit: String,
    has_duplicate_x: bool,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::data("dataset is empty".to_string()));
        }
        if x.len() != y.len() {
            return Err(Error::data(format!(
                "x and y lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if let Some(s) = &sigma {
            if s.len() != x.len() {
                return Err(Error::data(format!(
                    "sigma length {} does not match {} points",
                    s.len(),
                    x.len()
                )));
            }
            if let Some(bad) = s.iter().find(|v| !(**v > 0.0)) {
                return Err(Error::data(format!("sigma values must be > 0, got {bad}")));
            }
        }
        for (name, col) in [("x", &x), ("y", &y)] {
            if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::data(format!("non-finite {name} value {bad}")));
            }
        }

        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&i, &j| {
            x[i].total_cmp(&x[j])
                .then(y[i].total_cmp(&y[j]))
                .then_with(|| match &sigma {
                    Some(s) => s[i].total_cmp(&s[j]),
                    None => std::cmp::Ordering::Equal,
                })
        });
        let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let sigmas = sigma.map(|s| order.iter().map(|&i| s[i]).collect::<Vec<f64>>());
        let has_duplicate_x = xs.windows(2).any(|w| w[0] == w[1]);

        Ok(Dataset {
            x: xs,
            y: ys,
            sigma: sigmas,
            x_unit: String::new(),
            y_unit: String::new(),
            has_duplicate_x,
        })
    }

    pub fn with_units(mut self, x_unit: impl Into<String>, y_unit: impl Into<String>) -> Self {
        self.x_unit = x_unit.into();
        self.y_unit = y_unit.into();
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn sigma(&self) -> Option<&[f64]> {
        self.sigma.as_deref()
    }

    pub fn x_unit(&self) -> &str {
        &self.x_unit
    }

    pub fn y_unit(&self) -> &str {
        &self.y_unit
    }

    pub fn has_duplicate_x(&self) -> bool {
        self.has_duplicate_x
    }

    /// Least-squares weight 1/σᵢ² (1 when no uncertainties were supplied).
    pub fn weight(&self, i: usize) -> f64 {
        match &self.sigma {
            Some(s) => 1.0 / (s[i] * s[i]),
            None => 1.0,
        }
    }
}

/// Outcome of [`lm_fit`]: best-fit parameters with 1σ uncertainties from
/// the scaled covariance chi²/(N−k)·(JᵀWJ)⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Best-fit parameter vector (frozen entries keep their input value).
    pub params: Vec<f64>,
    /// 1σ uncertainty per parameter; 0 for frozen parameters.
    pub stderr: Vec<f64>,
    /// Covariance matrix; zero rows/columns for frozen parameters.
    pub covariance: Vec<Vec<f64>>,
    /// Weighted residual sum Σ((yᵢ−f(xᵢ))/σᵢ)².
    pub chi2: f64,
    /// Number of LM iterations performed (solve attempts).
    pub n_iter: usize,
    /// Whether a convergence criterion (relative chi² decrease or step
    /// norm) was met.
    pub converged: bool,
    /// Set when the normal equations were singular or rank-deficient and a
    /// pseudo-inverse had to be used.
    pub condition_warning: bool,
    /// chi² after each accepted step, starting at the initial value.
    #[serde(skip)]
    pub chi2_trace: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_sorts_by_x() {
        let d = Dataset::new(vec![3.0, 1.0, 2.0], vec![30.0, 10.0, 20.0], None).unwrap();
        assert_eq!(d.x(), &[1.0, 2.0, 3.0]);
        assert_eq!(d.y(), &[10.0, 20.0, 30.0]);
        assert!(!d.has_duplicate_x());
    }

    #[test]
    fn dataset_flags_duplicates() {
        let d = Dataset::new(vec![1.0, 1.0, 2.0], vec![5.0, 6.0, 7.0], None).unwrap();
        assert!(d.has_duplicate_x());
    }

    #[test]
    fn dataset_rejects_bad_sigma() {
        assert!(Dataset::new(vec![1.0], vec![2.0], Some(vec![0.0])).is_err());
        assert!(Dataset::new(vec![1.0], vec![2.0], Some(vec![-1.0])).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![2.0, 3.0], Some(vec![1.0])).is_err());
    }

    #[test]
    fn dataset_rejects_empty_and_mismatched() {
        assert!(Dataset::new(vec![], vec![], None).is_err());
        assert!(Dataset::new(vec![1.0], vec![1.0, 2.0], None).is_err());
        assert!(Dataset::new(vec![f64::NAN], vec![1.0], None).is_err());
    }

    #[test]
    fn permutations_produce_identical_datasets() {
        let a = Dataset::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], None).unwrap();
        let b = Dataset::new(vec![3.0, 1.0, 2.0], vec![6.0, 4.0, 5.0], None).unwrap();
        assert_eq!(a, b);
    }
}
