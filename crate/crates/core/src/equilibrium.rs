//! Prices of production and the uniform profit rate.
//!
//! With the nominal wage as numéraire (`pb = 1`) the long-run system is
//! `p = (1 + π) p M` with `M = A + bL`. The profit factor `1 + π` is the
//! reciprocal of the Perron root of `M` and `p` is its left Perron vector.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};
use crate::linear_economy::{check_productive_indecomposable, Technology, ValueSystem, WageBundle};

/// Default bound on the fixed-point residual `‖p − (1 + π) p M‖∞`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Strictness margin for `1 + e < maxₖ pₖ/λₖ`.
pub const B2_MARGIN: f64 = 1e-12;

const NORMALIZATION_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    /// Prices of production, normalized so that `p·b = 1`.
    #[serde(rename = "p")]
    pub prices: Vec<f64>,
    #[serde(rename = "pi")]
    pub profit_rate: f64,
    /// Spectral radius of the augmented matrix.
    #[serde(rename = "rho")]
    pub spectral_radius: f64,
    /// `‖p − (1 + π) p M‖∞` after normalization.
    pub residual: f64,
}

impl Equilibrium {
    pub fn price_value_ratios(&self, values: &[f64]) -> Vec<f64> {
        self.prices.iter().zip(values).map(|(p, v)| p / v).collect()
    }
}

/// Solves `p = (1 + π) p (A + bL)`, `p·b = 1`.
pub fn uniform_profit_rate(tech: &Technology, bundle: &WageBundle) -> Result<Equilibrium> {
    bundle.check_len(tech.sectors())?;
    let augmented = tech.augmented(bundle);
    // Every row j with b_j > 0 gives M a positive diagonal entry, so the
    // irreducible M is primitive and needs no shift.
    let pair = linalg::perron_left(&augmented, 0.0)?;
    let scale = dot(&pair.vector, bundle.as_slice());
    if !(scale > NORMALIZATION_FLOOR) {
        return Err(Error::DegenerateNormalization(scale));
    }
    let prices: Vec<f64> = pair.vector.iter().map(|v| v / scale).collect();
    let profit_rate = 1.0 / pair.root - 1.0;
    let residual = fixed_point_residual(&augmented, &prices, profit_rate);
    Ok(Equilibrium {
        prices,
        profit_rate,
        spectral_radius: pair.root,
        residual,
    })
}

/// `‖p − (1 + π) p M‖∞`.
pub fn fixed_point_residual(augmented: &Matrix, prices: &[f64], profit_rate: f64) -> f64 {
    let image = augmented.vec_mul(prices);
    prices
        .iter()
        .zip(&image)
        .fold(0.0, |m, (p, q)| m.max((p - (1.0 + profit_rate) * q).abs()))
}

/// Maximal profit rate `R` with `1 + R = 1/ρ(A)`; infinite when ρ(A) = 0.
pub fn max_profit_rate(tech: &Technology) -> Result<f64> {
    let diagnosis = check_productive_indecomposable(tech.inputs())?;
    Ok(1.0 / diagnosis.spectral_radius - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionBReport {
    pub in_b1: bool,
    pub in_b2: bool,
    pub max_ratio: f64,
    /// 0-based sector attaining the largest price-value ratio (lowest index on ties).
    pub argmax: usize,
    pub one_plus_e: f64,
}

impl AssumptionBReport {
    pub fn in_b(&self) -> bool {
        self.in_b1 && self.in_b2
    }
}

pub fn check_assumption_b(tech: &Technology, bundle: &WageBundle) -> Result<AssumptionBReport> {
    let eq = uniform_profit_rate(tech, bundle)?;
    let values = ValueSystem::new(tech, bundle)?;
    Ok(assumption_b_report(&eq.prices, &values.values, bundle))
}

/// Evaluates both admissibility conditions on given prices and values.
pub fn assumption_b_report(
    prices: &[f64],
    values: &[f64],
    bundle: &WageBundle,
) -> AssumptionBReport {
    let bundle_value = dot(values, bundle.as_slice());
    let (argmax, max_ratio) = argmax_ratio(prices, values);
    let one_plus_e = 1.0 / bundle_value;
    AssumptionBReport {
        in_b1: bundle_value > 0.0 && bundle_value <= 1.0,
        in_b2: one_plus_e + B2_MARGIN < max_ratio,
        max_ratio,
        argmax,
        one_plus_e,
    }
}

/// Index and value of `maxₖ pₖ/λₖ`, ties to the lowest index.
pub fn argmax_ratio(prices: &[f64], values: &[f64]) -> (usize, f64) {
    prices
        .iter()
        .zip(values)
        .map(|(p, v)| p / v)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, r)| {
            if r > best.1 {
                (k, r)
            } else {
                best
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn example() -> (Technology, WageBundle) {
        let tech = Technology::from_rows(
            &[
                vec![0.35, 0.05, 0.25],
                vec![0.15, 0.45, 0.05],
                vec![0.15, 0.15, 0.35],
            ],
            &[0.2, 0.15, 0.25],
        )
        .unwrap();
        (tech, WageBundle::new(vec![1.0 / 3.0; 3]).unwrap())
    }

    #[test]
    fn example_equilibrium() {
        let (tech, b) = example();
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        assert!((eq.profit_rate - 0.1764706).abs() < 1e-7);
        assert!(max_abs_diff(&eq.prices, &[1.0, 0.9090909, 1.090909]) < 1e-6);
        assert!((eq.spectral_radius - 0.85).abs() < 1e-12);
        assert!(eq.residual <= RESIDUAL_TOLERANCE);
        assert!((dot(&eq.prices, b.as_slice()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn post_change_equilibrium() {
        let tech = Technology::from_rows(
            &[
                vec![0.35, 0.05, 0.27],
                vec![0.15, 0.45, 0.07],
                vec![0.15, 0.15, 0.37],
            ],
            &[0.2, 0.15, 0.18],
        )
        .unwrap();
        let b = WageBundle::new(vec![0.008613, 1.170977, 0.008613]).unwrap();
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        assert!((eq.profit_rate - 0.1604551).abs() < 1e-6);
        assert!(max_abs_diff(&eq.prices, &[0.9288424, 0.8398318, 0.9956171]) < 2e-6);
    }

    #[test]
    fn scalar_economy() {
        let tech = Technology::from_rows(&[vec![0.5]], &[1.0]).unwrap();
        let b = WageBundle::new(vec![0.25]).unwrap();
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        assert!((eq.spectral_radius - 0.75).abs() < 1e-15);
        assert!((eq.profit_rate - 1.0 / 3.0).abs() < 1e-14);
        assert!((eq.prices[0] - 4.0).abs() < 1e-14);
        assert!((max_profit_rate(&tech).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn example_max_profit_rate() {
        let (tech, _) = example();
        // ρ(A) = 0.65 exactly, so R = 1/0.65 − 1.
        assert!((max_profit_rate(&tech).unwrap() - (1.0 / 0.65 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn max_profit_rate_falls_as_inputs_grow() {
        let base = [vec![0.3, 0.2], vec![0.1, 0.4]];
        let mut last = f64::INFINITY;
        for s in [1.0, 1.2, 1.4, 1.55] {
            let rows: Vec<Vec<f64>> = base
                .iter()
                .map(|r| r.iter().map(|v| v * s).collect())
                .collect();
            let r = max_profit_rate(&Technology::from_rows(&rows, &[1.0, 1.0]).unwrap()).unwrap();
            assert!(r > 0.0 && r < last);
            last = r;
        }
    }

    #[test]
    fn example_assumption_b() {
        let (tech, b) = example();
        let report = check_assumption_b(&tech, &b).unwrap();
        assert!(report.in_b1 && report.in_b2);
        assert_eq!(report.argmax, 1);
        assert!((report.max_ratio - 1.8181818).abs() < 1e-7);
        assert!((report.one_plus_e - 1.75).abs() < 1e-12);
    }

    #[test]
    fn equal_organic_composition_fails_b2() {
        let tech = Technology::from_rows(&vec![vec![0.2; 3]; 3], &[0.3; 3]).unwrap();
        let b = WageBundle::new(vec![0.4; 3]).unwrap();
        let report = check_assumption_b(&tech, &b).unwrap();
        assert!(report.in_b1);
        assert!(!report.in_b2);
        assert!((report.max_ratio - report.one_plus_e).abs() < 1e-12);
        assert_eq!(report.argmax, 0);
    }

    #[test]
    fn bundle_length_checked() {
        let (tech, _) = example();
        let b = WageBundle::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            uniform_profit_rate(&tech, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn equilibrium_json_field_names() {
        let (tech, b) = example();
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        let v: serde_json::Value = serde_json::to_value(&eq).unwrap();
        for key in ["pi", "p", "rho", "residual"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
