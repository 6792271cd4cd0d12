//! Closed-form forward-recall efficiency of an atomic frequency comb.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comb tooth profile. The storage simulator and the analytic efficiency
/// must always use the same shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToothShape {
    /// Flat-top teeth of width Δ/F — the closer match to optically pumped
    /// trough combs, and the default.
    Square,
    /// Gaussian teeth with FWHM Δ/F.
    Gaussian,
}

impl std::fmt::Display for ToothShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ToothShape::Square => write!(f, "square"),
            ToothShape::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl std::str::FromStr for ToothShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(ToothShape::Square),
            "gaussian" => Ok(ToothShape::Gaussian),
            other => Err(Error::argument(format!(
                "unknown tooth shape '{other}' (expected 'square' or 'gaussian')"
            ))),
        }
    }
}

/// First-order AFC echo efficiency for a comb of tooth depth `d` above a
/// flat background `d0`, with finesse `finesse` >= 1.
///
/// Square teeth:   η = (d/F)²·sinc²(π/F)·e^(−d/F)·e^(−d0)
/// Gaussian teeth: η = (d/F)²·e^(−7/F²)·e^(−d/F)·e^(−d0)
///
/// where sinc(z) = sin(z)/z. For fixed F and d0 the efficiency peaks at
/// d = 2F.
pub fn afc_efficiency_analytic(d: f64, finesse: f64, d0: f64, shape: ToothShape) -> Result<f64> {
    if d < 0.0 || !d.is_finite() {
        return Err(Error::domain(format!("optical depth must be >= 0, got {d}")));
    }
    if !(finesse >= 1.0) {
        return Err(Error::domain(format!("finesse must be >= 1, got {finesse}")));
    }
    if d0 < 0.0 || !d0.is_finite() {
        return Err(Error::domain(format!("background depth must be >= 0, got {d0}")));
    }
    let deff = d / finesse;
    let dephasing = match shape {
        ToothShape::Square => {
            let z = std::f64::consts::PI / finesse;
            let sinc = z.sin() / z;
            sinc * sinc
        }
        ToothShape::Gaussian => (-7.0 / (finesse * finesse)).exp(),
    };
    Ok(deff * deff * dephasing * (-deff).exp() * (-d0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn no_absorber_no_echo() {
        assert_eq!(afc_efficiency_analytic(0.0, 4.0, 0.0, ToothShape::Square).unwrap(), 0.0);
        assert_eq!(afc_efficiency_analytic(0.0, 2.0, 1.5, ToothShape::Gaussian).unwrap(), 0.0);
    }

    #[test]
    fn reference_point() {
        // d = 1, F = 4: 0.0625 · 0.81057 · 0.77880 = 0.03946.
        let eta = afc_efficiency_analytic(1.0, 4.0, 0.0, ToothShape::Square).unwrap();
        assert!((eta - 0.03946).abs() < 5e-5, "got {eta}");
    }

    #[test]
    fn background_scales_by_inverse_e() {
        for shape in [ToothShape::Square, ToothShape::Gaussian] {
            let base = afc_efficiency_analytic(2.0, 3.0, 0.0, shape).unwrap();
            let shaded = afc_efficiency_analytic(2.0, 3.0, 1.0, shape).unwrap();
            assert_relative_eq!(shaded, base * (-1.0f64).exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(afc_efficiency_analytic(-1.0, 4.0, 0.0, ToothShape::Square).is_err());
        assert!(afc_efficiency_analytic(1.0, 0.9, 0.0, ToothShape::Square).is_err());
        assert!(afc_efficiency_analytic(1.0, 4.0, -0.5, ToothShape::Square).is_err());
    }

    #[test]
    fn unique_maximum_at_twice_finesse() {
        // Grid scan in d for a few F: the interior maximum sits at d = 2F.
        for &finesse in &[2.0, 3.0, 4.0, 6.0] {
            let mut best = (0.0, f64::MIN);
            let mut d = 0.05;
            while d < 6.0 * finesse {
                let eta = afc_efficiency_analytic(d, finesse, 0.0, ToothShape::Square).unwrap();
                if eta > best.1 {
                    best = (d, eta);
                }
                d += 0.05;
            }
            assert!(
                (best.0 - 2.0 * finesse).abs() <= 0.051,
                "max at d={} for F={finesse}",
                best.0
            );
        }
    }

    #[test]
    fn efficiency_bounded_by_one() {
        for &f in &[1.0, 2.0, 4.0, 10.0] {
            let mut d = 0.0;
            while d < 40.0 {
                for shape in [ToothShape::Square, ToothShape::Gaussian] {
                    let eta = afc_efficiency_analytic(d, f, 0.0, shape).unwrap();
                    assert!((0.0..=1.0).contains(&eta));
                }
                d += 0.5;
            }
        }
    }

    #[test]
    fn tooth_shape_parsing() {
        assert_eq!("square".parse::<ToothShape>().unwrap(), ToothShape::Square);
        assert_eq!("Gaussian".parse::<ToothShape>().unwrap(), ToothShape::Gaussian);
        assert!("round".parse::<ToothShape>().is_err());
    }
}
