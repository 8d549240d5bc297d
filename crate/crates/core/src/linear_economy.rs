//! Technologies, wage bundles and labor values.
//!
//! A [`Technology`] is the pair `(A, L)`: column `i` of `A` is the input
//! recipe of sector `i` (units of each commodity used per unit of output) and
//! `L[i]` is its direct labor per unit of output. Labor values solve
//! `Λ = Λ A + L`, i.e. `Λ = L (I − A)⁻¹`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};

/// Productivity margin: ρ(A) must stay below `1 − PRODUCTIVITY_MARGIN`.
pub const PRODUCTIVITY_MARGIN: f64 = 1e-12;

/// Post-condition bound on `‖Λ(I − A) − L‖∞`.
pub const VALUE_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Validated input-output technology: `A ≥ 0` productive and indecomposable, `L ≫ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Technology {
    inputs: Matrix,
    labor: Vec<f64>,
}

impl Technology {
    pub fn new(inputs: Matrix, labor: Vec<f64>) -> Result<Self> {
        let n = inputs.dim();
        if n == 0 {
            return Err(Error::Empty);
        }
        if labor.len() != n {
            return Err(Error::DimensionMismatch {
                what: "direct labor vector L",
                expected: n,
                found: labor.len(),
            });
        }
        for (row, col, value) in inputs.entries() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    what: "input matrix A",
                    index: row * n + col,
                });
            }
            if value < 0.0 {
                return Err(Error::NegativeInput { row, col, value });
            }
        }
        for (index, &value) in labor.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    what: "direct labor vector L",
                    index,
                });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveLabor { index, value });
            }
        }
        let diagnosis = check_productive_indecomposable(&inputs)?;
        if !diagnosis.productive {
            return Err(Error::NotProductive {
                rho: diagnosis.spectral_radius,
            });
        }
        if !diagnosis.strongly_connected {
            return Err(Error::Decomposable);
        }
        Ok(Technology { inputs, labor })
    }

    pub fn from_rows(rows: &[Vec<f64>], labor: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, labor.to_vec())
    }

    pub fn sectors(&self) -> usize {
        self.labor.len()
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn labor(&self) -> &[f64] {
        &self.labor
    }

    /// Input recipe of sector `i` (column `i` of `A`).
    pub fn recipe(&self, sector: usize) -> Vec<f64> {
        self.inputs.column(sector)
    }

    /// Augmented input matrix `M = A + b L`.
    pub fn augmented(&self, bundle: &WageBundle) -> Matrix {
        self.inputs
            .add(&Matrix::outer(bundle.as_slice(), &self.labor))
    }

    pub(crate) fn with_sector(&self, sector: usize, recipe: &[f64], labor: f64) -> Result<Self> {
        let mut inputs = self.inputs.clone();
        inputs.set_column(sector, recipe);
        let mut labor_vec = self.labor.clone();
        labor_vec[sector] = labor;
        Technology::new(inputs, labor_vec)
    }
}

/// Real wage bundle: commodities per unit of labor hired, `b ≥ 0`, `b ≠ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WageBundle(Vec<f64>);

impl WageBundle {
    pub fn new(quantities: Vec<f64>) -> Result<Self> {
        if quantities.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &value) in quantities.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    what: "wage bundle b",
                    index,
                });
            }
            if value < 0.0 {
                return Err(Error::NegativeBundle { index, value });
            }
        }
        if quantities.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroBundle);
        }
        Ok(WageBundle(quantities))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// The same basket scaled by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        WageBundle::new(self.0.iter().map(|v| v * factor).collect())
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                what: "wage bundle b",
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for WageBundle {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WageBundle::new(v)
    }
}

impl From<WageBundle> for Vec<f64> {
    fn from(b: WageBundle) -> Self {
        b.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueSystem {
    /// Labor values Λ.
    pub values: Vec<f64>,
    /// Value of the wage bundle Λb.
    pub bundle_value: f64,
    /// Rate of exploitation `(1 − Λb)/Λb`.
    pub exploitation: f64,
}

impl ValueSystem {
    pub fn new(tech: &Technology, bundle: &WageBundle) -> Result<Self> {
        bundle.check_len(tech.sectors())?;
        let values = labor_values(tech)?;
        let bundle_value = value_of_bundle(&values, bundle)?;
        let exploitation = exploitation_rate(bundle_value)?;
        Ok(ValueSystem {
            values,
            bundle_value,
            exploitation,
        })
    }

    /// `0 < Λb ≤ 1`.
    pub fn in_b1(&self) -> bool {
        self.bundle_value > 0.0 && self.bundle_value <= 1.0
    }

    /// Set when `Λb > 1`: workers are paid more than the working day produces.
    pub fn negative_exploitation(&self) -> bool {
        self.exploitation < 0.0
    }
}

/// `Λ = L (I − A)⁻¹` for a validated technology.
pub fn labor_values(tech: &Technology) -> Result<Vec<f64>> {
    leontief_values(tech.inputs(), tech.labor())
}

/// `Λ = L (I − A)⁻¹` on raw inputs, solved as the row system `Λ (I − A) = L`.
///
/// Only requires `I − A` to be nonsingular; positivity of the result is the
/// caller's business. Singular systems are reported with ρ(A).
pub fn leontief_values(inputs: &Matrix, labor: &[f64]) -> Result<Vec<f64>> {
    let n = inputs.dim();
    if labor.len() != n {
        return Err(Error::DimensionMismatch {
            what: "direct labor vector L",
            expected: n,
            found: labor.len(),
        });
    }
    let leontief = Matrix::identity(n).sub(inputs);
    let lu = linalg::Lu::factor(&leontief).map_err(|_| Error::SingularSystem {
        rho: linalg::spectral_radius(inputs).unwrap_or(f64::NAN),
    })?;
    Ok(lu.solve_row(labor))
}

/// `Λb`, the labor time embodied in the wage bundle.
pub fn value_of_bundle(values: &[f64], bundle: &WageBundle) -> Result<f64> {
    bundle.check_len(values.len())?;
    Ok(dot(values, bundle.as_slice()))
}

/// `e = (1 − vb)/vb`.
///
/// Values above one are not rejected; they produce a negative rate, which
/// [`ValueSystem::negative_exploitation`] reports.
pub fn exploitation_rate(bundle_value: f64) -> Result<f64> {
    if !(bundle_value > 0.0) {
        return Err(Error::NonPositiveValue(bundle_value));
    }
    Ok((1.0 - bundle_value) / bundle_value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnosis {
    pub spectral_radius: f64,
    pub productive: bool,
    pub strongly_connected: bool,
    pub pass: bool,
}

/// Spectral radius and connectivity verdict for a nonnegative input matrix.
pub fn check_productive_indecomposable(inputs: &Matrix) -> Result<Diagnosis> {
    let spectral_radius = linalg::spectral_radius(inputs)?;
    let productive = spectral_radius < 1.0 - PRODUCTIVITY_MARGIN;
    let strongly_connected = linalg::strongly_connected(inputs);
    Ok(Diagnosis {
        spectral_radius,
        productive,
        strongly_connected,
        pass: productive && strongly_connected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    pub(crate) fn example() -> (Technology, WageBundle) {
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
    fn example_labor_values() {
        let (tech, b) = example();
        let values = labor_values(&tech).unwrap();
        assert!(max_abs_diff(&values, &[0.5714286, 0.5, 0.6428571]) < 1e-7);
        let lu_residual = max_abs_diff(
            &Matrix::identity(3).sub(tech.inputs()).vec_mul(&values),
            tech.labor(),
        );
        assert!(lu_residual <= VALUE_RESIDUAL_TOLERANCE);
        let vb = value_of_bundle(&values, &b).unwrap();
        assert!((vb - 0.5714286).abs() < 1e-7);
        assert!((exploitation_rate(vb).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn no_produced_inputs_means_value_equals_labor() {
        let labor = [0.2, 0.15, 0.25];
        let values = leontief_values(&Matrix::zeros(3), &labor).unwrap();
        assert_eq!(values, labor);
    }

    #[test]
    fn one_sector_geometric_series() {
        let tech = Technology::from_rows(&[vec![0.5]], &[1.0]).unwrap();
        assert!(max_abs_diff(&labor_values(&tech).unwrap(), &[2.0]) < 1e-15);
    }

    #[test]
    fn unit_bundle_projects_value() {
        let values = [0.3, 0.7, 0.2];
        let b = WageBundle::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(value_of_bundle(&values, &b).unwrap(), 0.7);
        let short = WageBundle::new(vec![1.0]).unwrap();
        assert!(matches!(
            value_of_bundle(&values, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exploitation_rate_edges() {
        assert_eq!(exploitation_rate(1.0).unwrap(), 0.0);
        assert_eq!(exploitation_rate(0.25).unwrap(), 3.0);
        assert!(exploitation_rate(1.25).unwrap() < 0.0);
        assert!(matches!(
            exploitation_rate(0.0),
            Err(Error::NonPositiveValue(_))
        ));
        assert!(matches!(
            exploitation_rate(-0.1),
            Err(Error::NonPositiveValue(_))
        ));
        for vb in [0.1, 0.37, 0.5714286, 0.99] {
            let e = exploitation_rate(vb).unwrap();
            assert!((1.0 + e - 1.0 / vb).abs() < 1e-15);
        }
    }

    #[test]
    fn diagnosis_of_example_and_failures() {
        let (tech, _) = example();
        let d = check_productive_indecomposable(tech.inputs()).unwrap();
        assert!(d.pass);
        // Perron root of the cubic λ³ − 1.15λ² + 0.385λ − 0.039.
        assert!((d.spectral_radius - 0.65).abs() < 1e-12);

        let d = check_productive_indecomposable(&Matrix::identity(3)).unwrap();
        assert!(!d.productive && !d.pass);
        assert!((d.spectral_radius - 1.0).abs() < 1e-15);

        let diag = Matrix::from_rows(&[vec![0.1, 0.0], vec![0.0, 0.1]]).unwrap();
        let d = check_productive_indecomposable(&diag).unwrap();
        assert!(d.productive && !d.strongly_connected && !d.pass);
    }

    #[test]
    fn technology_validation_errors() {
        let rows = [vec![0.2, 0.1], vec![0.1, 0.2]];
        assert!(matches!(
            Technology::from_rows(&rows, &[0.1, -0.1]),
            Err(Error::NonPositiveLabor { index: 1, .. })
        ));
        assert!(matches!(
            Technology::from_rows(&[vec![0.2, -0.1], vec![0.1, 0.2]], &[0.1, 0.1]),
            Err(Error::NegativeInput { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            Technology::from_rows(&[vec![0.6, 0.6], vec![0.6, 0.6]], &[0.1, 0.1]),
            Err(Error::NotProductive { .. })
        ));
        assert!(matches!(
            Technology::from_rows(&[vec![0.1, 0.0], vec![0.0, 0.1]], &[0.1, 0.1]),
            Err(Error::Decomposable)
        ));
        assert!(matches!(
            Technology::from_rows(&rows, &[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Technology::from_rows(&[vec![0.2, f64::NAN], vec![0.1, 0.2]], &[0.1, 0.1]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn wage_bundle_validation() {
        assert!(matches!(
            WageBundle::new(vec![0.0, 0.0]),
            Err(Error::ZeroBundle)
        ));
        assert!(matches!(
            WageBundle::new(vec![0.5, -0.1]),
            Err(Error::NegativeBundle { index: 1, .. })
        ));
        assert!(WageBundle::new(vec![0.0, 0.3]).is_ok());
        assert!(serde_json::from_str::<WageBundle>("[0.0, 0.0]").is_err());
    }

    #[test]
    fn singular_system_reports_spectral_radius() {
        let err = leontief_values(&Matrix::identity(2), &[1.0, 1.0]).unwrap_err();
        match err {
            Error::SingularSystem { rho } => assert!((rho - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }
}
