//! Constructive side: wage bundles that lower the profit rate, and technical
//! changes that are guaranteed to admit them.
//!
//! # The wage region
//!
//! After a viable change in sector `i`, two hyperplanes in bundle space
//! decide the fate of a candidate post-change bundle `b̄ ≥ 0`:
//!
//! * the price plane `P = { b̄ : p·b̄ = α }` with `α = (pA∗ᵢ + Lᵢ − pĀ∗ᵢ)/L̄ᵢ = 1 + g`.
//!   Bundles strictly above it are dearer than the old wage at old prices
//!   and make the cost saving smaller than the rise in labor cost;
//! * the value plane `V = { b̄ : Λ̄·b̄ = β }` with `β = Λb`. Bundles on it keep
//!   the rate of exploitation unchanged; bundles below it raise it.
//!
//! The planes cut axis `j` at `xⱼ = α/pⱼ` and `yⱼ = β/λ̄ⱼ`. Some part of `V`
//! in the nonnegative orthant lies strictly above `P` exactly when
//! `yⱼ > xⱼ` for some `j`, which is the same statement as
//! `pⱼ/λ̄ⱼ > (1 + e)(1 + g)`.
//!
//! Any bundle on `V` whose pivot coordinate `b̄ₖ` exceeds `xₖ` is above `P`,
//! because `p·b̄ ≥ pₖ b̄ₖ > pₖ xₖ = α`. The samplers draw `b̄ₖ ∈ (xₖ, yₖ)`
//! and spread the remaining value over the other commodities.
//!
//! # Synthesizing a change
//!
//! Given an admissible bundle (`1 + e < maxₖ pₖ/λₖ`), pick the pivot
//! `j = argmax pₖ/λₖ` and `φ = Λb·pⱼ/λⱼ > 1`. Adding `ε ∈ (0, Lᵢ/Σpₖ)` to
//! every input of sector `i` and choosing new labor inside
//! `((Lᵢ − εΣpₖ)/φ, Lᵢ − εΣpₖ)` gives a viable, capital-using labor-saving
//! change whose region is feasible at `j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::{assumption_b_report, Equilibrium};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::linear_economy::{Technology, ValueSystem, WageBundle};
use crate::technical_change::{ChangeClassification, TechChange, STRICT_MARGIN};

/// Tolerance for membership of the value plane.
pub const ON_PLANE_TOLERANCE: f64 = 1e-10;
/// Proposal budget for the samplers.
pub const MAX_PROPOSALS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WageRegion {
    /// Offset of the price plane, `1 + g`.
    pub alpha: f64,
    /// Offset of the value plane, `Λb`.
    pub beta: f64,
    /// Normal of the price plane (pre-change prices).
    pub prices: Vec<f64>,
    /// Normal of the value plane (post-change labor values).
    pub values: Vec<f64>,
    pub x_intercepts: Vec<f64>,
    pub y_intercepts: Vec<f64>,
    pub feasible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub on_v: bool,
    pub above_p: bool,
    pub below_v: bool,
    pub nonneg: bool,
}

impl Membership {
    /// On `V`, strictly above `P`, nonnegative: constant exploitation, falling profit.
    pub fn constant_exploitation(&self) -> bool {
        self.on_v && self.above_p && self.nonneg
    }

    /// Strictly between the planes: rising exploitation, falling profit.
    pub fn rising_exploitation(&self) -> bool {
        self.below_v && self.above_p && self.nonneg
    }
}

impl WageRegion {
    pub fn sectors(&self) -> usize {
        self.prices.len()
    }

    /// Sector whose value-plane intercept exceeds the price-plane intercept
    /// by the largest factor (lowest index on ties).
    pub fn pivot(&self) -> usize {
        self.y_intercepts
            .iter()
            .zip(&self.x_intercepts)
            .map(|(y, x)| y / x)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, r)| {
                if r > best.1 {
                    (k, r)
                } else {
                    best
                }
            })
            .0
    }

    /// Sectors with `yⱼ > xⱼ`.
    pub fn feasible_sectors(&self) -> Vec<usize> {
        (0..self.sectors())
            .filter(|&j| self.y_intercepts[j] > self.x_intercepts[j])
            .collect()
    }

    pub fn membership(&self, bundle: &[f64]) -> Membership {
        let price = dot(&self.prices, bundle);
        let value = dot(&self.values, bundle);
        Membership {
            on_v: (value - self.beta).abs() <= ON_PLANE_TOLERANCE,
            above_p: price > self.alpha + STRICT_MARGIN,
            below_v: value < self.beta - STRICT_MARGIN,
            nonneg: bundle.iter().all(|&q| q >= 0.0) && bundle.iter().any(|&q| q > 0.0),
        }
    }
}

/// Price and value planes for a viable change.
pub fn build_region(
    eq_before: &Equilibrium,
    values_after: &[f64],
    bundle_value: f64,
    cls: &ChangeClassification,
) -> Result<WageRegion> {
    if !cls.viable {
        return Err(Error::NotViable {
            cost_drop: cls.cost_drop,
        });
    }
    let n = eq_before.prices.len();
    if values_after.len() != n {
        return Err(Error::DimensionMismatch {
            what: "post-change labor values",
            expected: n,
            found: values_after.len(),
        });
    }
    if !(bundle_value > 0.0) {
        return Err(Error::NonPositiveValue(bundle_value));
    }
    let alpha = cls.alpha;
    let beta = bundle_value;
    let x_intercepts: Vec<f64> = eq_before.prices.iter().map(|p| alpha / p).collect();
    let y_intercepts: Vec<f64> = values_after.iter().map(|v| beta / v).collect();
    let feasible = y_intercepts.iter().zip(&x_intercepts).any(|(y, x)| y > x);
    Ok(WageRegion {
        alpha,
        beta,
        prices: eq_before.prices.clone(),
        values: values_after.to_vec(),
        x_intercepts,
        y_intercepts,
        feasible,
    })
}

/// Per-sector test `pⱼ/λ̄ⱼ > (1 + e)(1 + g)`.
pub fn price_value_condition(
    prices: &[f64],
    values_after: &[f64],
    exploitation: f64,
    g: f64,
) -> Vec<bool> {
    let threshold = (1.0 + exploitation) * (1.0 + g);
    prices
        .iter()
        .zip(values_after)
        .map(|(p, v)| p / v > threshold)
        .collect()
}

/// How the value left over after the pivot commodity is spread.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingStrategy {
    /// In proportion to a reference basket (usually the pre-change bundle).
    /// Falls back to equal quantities if the reference has no weight off the pivot.
    Proportional(Vec<f64>),
    /// Equal quantities of every non-pivot commodity.
    EqualRest,
}

/// Point of `V` with the pivot quantity fixed and the rest spread per `strategy`.
pub fn bundle_on_value_plane(
    region: &WageRegion,
    pivot: usize,
    pivot_quantity: f64,
    strategy: &SamplingStrategy,
) -> Result<WageBundle> {
    let n = region.sectors();
    if pivot >= n {
        return Err(Error::InvalidSector { sector: pivot, n });
    }
    if n == 1 {
        return WageBundle::new(vec![region.beta / region.values[0]]);
    }
    let remaining = region.beta - region.values[pivot] * pivot_quantity;
    let equal = |k: usize| if k == pivot { 0.0 } else { 1.0 };
    let mut weights: Vec<f64> = match strategy {
        SamplingStrategy::Proportional(reference) => {
            if reference.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "reference basket",
                    expected: n,
                    found: reference.len(),
                });
            }
            (0..n)
                .map(|k| {
                    if k == pivot {
                        0.0
                    } else {
                        reference[k].max(0.0)
                    }
                })
                .collect()
        }
        SamplingStrategy::EqualRest => (0..n).map(equal).collect(),
    };
    let mut weight_value = dot(&weights, &region.values);
    if !(weight_value > 0.0) {
        weights = (0..n).map(equal).collect();
        weight_value = dot(&weights, &region.values);
    }
    let mut bundle: Vec<f64> = weights
        .iter()
        .map(|w| (w * remaining / weight_value).max(0.0))
        .collect();
    bundle[pivot] = pivot_quantity;
    let value = dot(&bundle, &region.values);
    if value > 0.0 {
        let rescale = region.beta / value;
        bundle.iter_mut().for_each(|q| *q *= rescale);
    }
    WageBundle::new(bundle)
}

/// Bundle on the value plane strictly above the price plane.
///
/// Deterministic in `(region, seed, strategy)`.
pub fn sample_constant_exploitation(
    region: &WageRegion,
    seed: u64,
    strategy: &SamplingStrategy,
) -> Result<WageBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    constant_with(region, &mut rng, strategy)
}

fn constant_with(
    region: &WageRegion,
    rng: &mut ChaCha8Rng,
    strategy: &SamplingStrategy,
) -> Result<WageBundle> {
    if !region.feasible {
        return Err(Error::Infeasible);
    }
    let k = region.pivot();
    let (lo, hi) = (region.x_intercepts[k], region.y_intercepts[k]);
    for _ in 0..MAX_PROPOSALS {
        let quantity = if region.sectors() == 1 {
            hi
        } else {
            rng.random_range(lo..hi)
        };
        let bundle = bundle_on_value_plane(region, k, quantity, strategy)?;
        if region.membership(bundle.as_slice()).constant_exploitation() {
            return Ok(bundle);
        }
    }
    Err(Error::SamplingExhausted {
        proposals: MAX_PROPOSALS,
    })
}

/// Bundle strictly between the planes: below `V`, above `P`.
///
/// Shrinks a constant-exploitation point `b̄` radially by a factor drawn
/// from `(α / p·b̄, 1)`.
pub fn sample_rising_exploitation(
    region: &WageRegion,
    seed: u64,
    strategy: &SamplingStrategy,
) -> Result<WageBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_PROPOSALS {
        let base = constant_with(region, &mut rng, strategy)?;
        let floor = region.alpha / dot(&region.prices, base.as_slice());
        let factor = floor + (1.0 - floor) * rng.random::<f64>();
        let candidate = base.scaled(factor)?;
        if region
            .membership(candidate.as_slice())
            .rising_exploitation()
        {
            return Ok(candidate);
        }
    }
    Err(Error::SamplingExhausted {
        proposals: MAX_PROPOSALS,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedChange {
    pub change: TechChange,
    /// Sector attaining `max pₖ/λₖ` (0-based).
    pub pivot: usize,
    pub phi: f64,
    pub epsilon: f64,
    /// Open interval for the new labor coefficient.
    pub labor_interval: (f64, f64),
}

/// Builds a viable capital-using labor-saving change in `sector` whose wage
/// region is feasible.
///
/// `epsilon_frac` places `ε` inside `(0, Lᵢ/Σpₖ)` and `labor_frac` places
/// the new labor coefficient inside its interval; both must be in `(0, 1)`.
pub fn synthesize_culs_change(
    tech: &Technology,
    bundle: &WageBundle,
    eq: &Equilibrium,
    sector: usize,
    epsilon_frac: f64,
    labor_frac: f64,
) -> Result<SynthesizedChange> {
    for (name, value) in [("epsilon_frac", epsilon_frac), ("labor_frac", labor_frac)] {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::InvalidFraction { name, value });
        }
    }
    let n = tech.sectors();
    if sector >= n {
        return Err(Error::InvalidSector { sector, n });
    }
    let values = ValueSystem::new(tech, bundle)?;
    let report = assumption_b_report(&eq.prices, &values.values, bundle);
    if !report.in_b1 {
        return Err(Error::NotInB {
            reason: format!(
                "value of the wage bundle {} is outside (0, 1]",
                values.bundle_value
            ),
        });
    }
    if !report.in_b2 {
        return Err(Error::NotInB {
            reason: format!(
                "max price-value ratio {} does not exceed 1 + e = {}",
                report.max_ratio, report.one_plus_e
            ),
        });
    }
    let pivot = report.argmax;
    let phi = values.bundle_value * eq.prices[pivot] / values.values[pivot];
    let price_sum: f64 = eq.prices.iter().sum();
    let old_labor = tech.labor()[sector];
    let epsilon = epsilon_frac * old_labor / price_sum;
    let upper = old_labor - epsilon * price_sum;
    let lower = upper / phi;
    let new_labor = lower + labor_frac * (upper - lower);
    let recipe: Vec<f64> = tech.recipe(sector).iter().map(|a| a + epsilon).collect();
    let change = TechChange::new(tech, sector, recipe, new_labor)?;
    Ok(SynthesizedChange {
        change,
        pivot,
        phi,
        epsilon,
        labor_interval: (lower, upper),
    })
}
