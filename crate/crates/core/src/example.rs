//! The three-sector worked example and its published figures.
//!
//! Sector 3 switches to a technique that uses 0.02 more of every input and
//! 0.07 less direct labor. The post-change bundle keeps the value of the wage
//! at 4/7 while making it dearer at the old prices.

use serde::Serialize;

use crate::equilibrium::{argmax_ratio, uniform_profit_rate};
use crate::error::Result;
use crate::linalg::{dot, Matrix};
use crate::linear_economy::{labor_values, Technology, WageBundle};
use crate::synthesis::build_region;
use crate::technical_change::{apply, classify, TechChange};

/// Absolute tolerance for the golden replay.
pub const GOLDEN_TOLERANCE: f64 = 1e-5;

pub fn input_rows() -> Vec<Vec<f64>> {
    vec![
        vec![0.35, 0.05, 0.25],
        vec![0.15, 0.45, 0.05],
        vec![0.15, 0.15, 0.35],
    ]
}

pub const LABOR: [f64; 3] = [0.2, 0.15, 0.25];
pub const NEW_RECIPE: [f64; 3] = [0.27, 0.07, 0.37];
pub const NEW_LABOR: f64 = 0.18;
/// 0-based index of the changing sector.
pub const CHANGED_SECTOR: usize = 2;
/// Post-change bundle as printed (six decimals).
pub const NEW_BUNDLE: [f64; 3] = [0.008613, 1.170977, 0.008613];
/// The uniform draw on `(x₂, y₂)` that produced the printed bundle.
pub const PIVOT_DRAW: f64 = 1.170977;

#[derive(Clone, Debug)]
pub struct WorkedExample {
    pub tech: Technology,
    pub bundle: WageBundle,
    pub change: TechChange,
    pub new_bundle: WageBundle,
}

impl WorkedExample {
    pub fn new() -> Result<Self> {
        Self::with_inputs(Matrix::from_rows(&input_rows())?)
    }

    /// Same economy with a caller-supplied input matrix.
    pub fn with_inputs(inputs: Matrix) -> Result<Self> {
        let tech = Technology::new(inputs, LABOR.to_vec())?;
        let change = TechChange::new(&tech, CHANGED_SECTOR, NEW_RECIPE.to_vec(), NEW_LABOR)?;
        Ok(WorkedExample {
            tech,
            bundle: WageBundle::new(vec![1.0 / 3.0; 3])?,
            change,
            new_bundle: WageBundle::new(NEW_BUNDLE.to_vec())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureCheck {
    pub name: &'static str,
    pub expected: Vec<f64>,
    pub actual: Vec<f64>,
    pub max_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoldenReport {
    pub checks: Vec<FixtureCheck>,
    pub pass: bool,
}

impl GoldenReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &FixtureCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Recomputes every published figure of the example and compares it to the
/// printed value within [`GOLDEN_TOLERANCE`].
pub fn replay(example: &WorkedExample) -> Result<GoldenReport> {
    let WorkedExample {
        tech,
        bundle,
        change,
        new_bundle,
    } = example;
    let eq = uniform_profit_rate(tech, bundle)?;
    let values = labor_values(tech)?;
    let bundle_value = dot(&values, bundle.as_slice());
    let (_, max_ratio) = argmax_ratio(&eq.prices, &values);
    let new_tech = apply(tech, change)?;
    let values_after = labor_values(&new_tech)?;
    let cls = classify(tech, &eq, change)?;
    let region = build_region(&eq, &values_after, bundle_value, &cls)?;
    let eq_after = uniform_profit_rate(&new_tech, new_bundle)?;
    let (_, max_ratio_after) = argmax_ratio(&eq_after.prices, &values_after);

    let fixtures: Vec<(&'static str, Vec<f64>, Vec<f64>)> = vec![
        ("profit rate", vec![0.1764706], vec![eq.profit_rate]),
        ("prices", vec![1.0, 0.9090909, 1.090909], eq.prices.clone()),
        (
            "labor values",
            vec![0.5714286, 0.5, 0.6428571],
            values.clone(),
        ),
        ("value of wage bundle", vec![0.5714286], vec![bundle_value]),
        ("max price-value ratio", vec![1.8181818], vec![max_ratio]),
        (
            "post-change labor values",
            vec![0.5511364, 0.4797078, 0.5752165],
            values_after.clone(),
        ),
        (
            "sector 3 unit cost before",
            vec![0.9272727],
            vec![cls.cost_before],
        ),
        (
            "sector 3 unit cost after",
            vec![0.9172727],
            vec![cls.cost_after],
        ),
        ("alpha", vec![1.0555556], vec![cls.alpha]),
        (
            "price-plane intercepts",
            vec![1.0555556, 1.1611111, 0.9675926],
            region.x_intercepts.clone(),
        ),
        (
            "value-plane intercepts",
            vec![1.0368189, 1.1912014, 0.9934149],
            region.y_intercepts.clone(),
        ),
        (
            "post-change value of wage bundle",
            vec![0.5714286],
            vec![dot(&values_after, new_bundle.as_slice())],
        ),
        (
            "post-change profit rate",
            vec![0.1604551],
            vec![eq_after.profit_rate],
        ),
        (
            "post-change prices",
            vec![0.9288424, 0.8398318, 0.9956171],
            eq_after.prices.clone(),
        ),
        (
            "post-change max price-value ratio",
            vec![1.750715],
            vec![max_ratio_after],
        ),
    ];
    let checks: Vec<FixtureCheck> = fixtures
        .into_iter()
        .map(|(name, expected, actual)| {
            let max_error = if expected.len() == actual.len() {
                expected
                    .iter()
                    .zip(&actual)
                    .fold(0.0, |m: f64, (e, a)| m.max((e - a).abs()))
            } else {
                f64::INFINITY
            };
            FixtureCheck {
                name,
                expected,
                actual,
                max_error,
                pass: max_error <= GOLDEN_TOLERANCE,
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(GoldenReport { checks, pass })
}
