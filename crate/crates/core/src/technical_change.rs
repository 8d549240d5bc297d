//! Single-sector technique replacement and its classification.
//!
//! Capitalists in sector `i` compare unit costs at the prices and wage that
//! prevail before the change. Everything here therefore evaluates at the
//! pre-change equilibrium prices `p` with wage `pb = 1`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::linear_economy::{Technology, WageBundle};

/// Margin for the strict inequalities (viability, CU-LS, P1, P3).
pub const STRICT_MARGIN: f64 = 1e-12;
/// Tolerance for the constant-value equality (P2).
pub const VALUE_EQUALITY_TOLERANCE: f64 = 1e-9;

/// Replacement of sector `i`'s technique by a new input column and labor coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct TechChange {
    sector: usize,
    recipe: Vec<f64>,
    labor: f64,
}

impl TechChange {
    /// Validates the change against `tech`: sector in range, nonnegative
    /// column, positive labor, and a patched economy that is still productive
    /// and indecomposable.
    pub fn new(tech: &Technology, sector: usize, recipe: Vec<f64>, labor: f64) -> Result<Self> {
        let change = TechChange {
            sector,
            recipe,
            labor,
        };
        apply(tech, &change)?;
        Ok(change)
    }

    /// 0-based sector index.
    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn recipe(&self) -> &[f64] {
        &self.recipe
    }

    pub fn labor(&self) -> f64 {
        self.labor
    }

    pub fn to_spec(&self) -> TechChangeSpec {
        TechChangeSpec {
            sector: self.sector + 1,
            column: self.recipe.clone(),
            labor: self.labor,
        }
    }
}

/// Interchange form of a [`TechChange`]; `sector` is 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechChangeSpec {
    pub sector: usize,
    pub column: Vec<f64>,
    pub labor: f64,
}

impl TechChangeSpec {
    pub fn into_change(self, tech: &Technology) -> Result<TechChange> {
        let n = tech.sectors();
        if self.sector == 0 || self.sector > n {
            return Err(Error::InvalidSector {
                sector: self.sector,
                n,
            });
        }
        TechChange::new(tech, self.sector - 1, self.column, self.labor)
    }
}

/// Technology with sector `i` switched to the new technique.
pub fn apply(tech: &Technology, change: &TechChange) -> Result<Technology> {
    let n = tech.sectors();
    if change.sector >= n {
        return Err(Error::InvalidSector {
            sector: change.sector,
            n,
        });
    }
    if change.recipe.len() != n {
        return Err(Error::DimensionMismatch {
            what: "new input column",
            expected: n,
            found: change.recipe.len(),
        });
    }
    if !(change.labor > 0.0) || !change.labor.is_finite() {
        return Err(Error::NonPositiveNewLabor(change.labor));
    }
    tech.with_sector(change.sector, &change.recipe, change.labor)
}

/// How strictly "capital-using" is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CapitalUsing {
    /// Every input coefficient of the sector rises strictly.
    #[default]
    Strict,
    /// No coefficient falls and at least one rises.
    Weak,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChangeClassification {
    pub viable: bool,
    pub culs: bool,
    pub cost_before: f64,
    pub cost_after: f64,
    /// `(pA∗ᵢ + Lᵢ) − (pĀ∗ᵢ + L̄ᵢ)`.
    pub cost_drop: f64,
    /// Cost drop as a fraction of the new labor cost, `cost_drop / L̄ᵢ`.
    pub g: f64,
    /// Offset of the price hyperplane, `1 + g`.
    pub alpha: f64,
}

pub fn classify(
    tech: &Technology,
    eq: &Equilibrium,
    change: &TechChange,
) -> Result<ChangeClassification> {
    classify_at_prices(tech, &eq.prices, 1.0, change, CapitalUsing::Strict)
}

/// Classification at arbitrary prices and nominal wage.
///
/// Unit costs are `p A∗ᵢ + w Lᵢ`. The verdicts are homogeneous of degree
/// one in `(p, w)`; `g` and `alpha` are reported in wage units.
pub fn classify_at_prices(
    tech: &Technology,
    prices: &[f64],
    wage: f64,
    change: &TechChange,
    rule: CapitalUsing,
) -> Result<ChangeClassification> {
    let n = tech.sectors();
    let i = change.sector;
    if i >= n {
        return Err(Error::InvalidSector { sector: i, n });
    }
    if prices.len() != n || change.recipe.len() != n {
        return Err(Error::DimensionMismatch {
            what: "prices or new column",
            expected: n,
            found: if prices.len() != n {
                prices.len()
            } else {
                change.recipe.len()
            },
        });
    }
    let old_recipe = tech.recipe(i);
    let old_labor = tech.labor()[i];
    let cost_before = dot(prices, &old_recipe) + wage * old_labor;
    let cost_after = dot(prices, &change.recipe) + wage * change.labor;
    let cost_drop = cost_before - cost_after;
    let scale = cost_before.abs().max(1.0);
    let viable = cost_drop > STRICT_MARGIN * scale;

    let labor_saving = change.labor < old_labor - STRICT_MARGIN;
    let pairs = || old_recipe.iter().zip(&change.recipe);
    let capital_using = match rule {
        CapitalUsing::Strict => pairs().all(|(old, new)| *new > old + STRICT_MARGIN),
        CapitalUsing::Weak => {
            pairs().all(|(old, new)| *new >= *old)
                && pairs().any(|(old, new)| *new > old + STRICT_MARGIN)
        }
    };

    let g = cost_drop / (wage * change.labor);
    Ok(ChangeClassification {
        viable,
        culs: capital_using && labor_saving,
        cost_before,
        cost_after,
        cost_drop,
        g,
        alpha: 1.0 + g,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    /// P1: `p b̄ > 1`.
    pub more_expensive: bool,
    /// P2: `Λ b = Λ̄ b̄`.
    pub constant_value: bool,
    /// P3: `0 < cost_drop < L̄ᵢ (p b̄ − 1)`.
    pub bounded_cost_drop: bool,
    /// `0 < Λ̄ b̄ ≤ 1`.
    pub new_bundle_in_b1: bool,
    pub new_bundle_price: f64,
    pub value_before: f64,
    pub value_after: f64,
    pub cost_drop: f64,
    pub labor_cost_rise: f64,
}

impl PropertyReport {
    pub fn all(&self) -> bool {
        self.more_expensive
            && self.constant_value
            && self.bounded_cost_drop
            && self.new_bundle_in_b1
    }
}

/// Evaluates a candidate post-change bundle against the three properties.
pub fn check_properties(
    tech: &Technology,
    change: &TechChange,
    eq: &Equilibrium,
    values_before: &[f64],
    values_after: &[f64],
    bundle: &WageBundle,
    new_bundle: &WageBundle,
) -> Result<PropertyReport> {
    let n = tech.sectors();
    bundle.check_len(n)?;
    new_bundle.check_len(n)?;
    let cls = classify(tech, eq, change)?;
    let new_bundle_price = dot(&eq.prices, new_bundle.as_slice());
    let value_before = dot(values_before, bundle.as_slice());
    let value_after = dot(values_after, new_bundle.as_slice());
    let labor_cost_rise = change.labor * (new_bundle_price - 1.0);
    Ok(PropertyReport {
        more_expensive: new_bundle_price > 1.0 + STRICT_MARGIN,
        constant_value: (value_before - value_after).abs() <= VALUE_EQUALITY_TOLERANCE,
        bounded_cost_drop: cls.cost_drop > STRICT_MARGIN
            && cls.cost_drop < labor_cost_rise - STRICT_MARGIN,
        new_bundle_in_b1: value_after > 0.0 && value_after <= 1.0,
        new_bundle_price,
        value_before,
        value_after,
        cost_drop: cls.cost_drop,
        labor_cost_rise,
    })
}
