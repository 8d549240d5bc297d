//! Small dense square matrices, LU solves and the Perron root.
//!
//! Everything here is sized for input-output tables with a handful of
//! sectors. Matrices are stored row-major; vectors are plain `Vec<f64>` and
//! are treated as row or column vectors depending on the product used
//! (`vec_mul` is `x M`, `mul_vec` is `M x`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries at or below this magnitude count as structural zeros.
pub const PATTERN_ZERO: f64 = 1e-14;

const PIVOT_FLOOR: f64 = 1e-13;

/// Iteration cap for the power method.
pub const MAX_POWER_ITERATIONS: usize = 10_000;
/// Stopping tolerance for successive eigenvalue estimates and iterates.
pub const POWER_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a square matrix from rows. Every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Outer product `u vᵀ`.
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |r, c| u[r] * v[c])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[f64]) {
        for (r, &v) in values.iter().enumerate() {
            self[(r, c)] = v;
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k / n, k % n, v))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        debug_assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self::from_fn(self.n, |r, c| {
            (0..self.n).map(|k| self[(r, k)] * other[(k, c)]).sum()
        })
    }

    /// Column product `M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self[(r, c)] * x[c]).sum())
            .collect()
    }

    /// Row product `x M`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|c| (0..self.n).map(|r| x[r] * self[(r, c)]).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.n.max(1))
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::new(self)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.n + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.n + c]
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.rows()
    }
}

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

/// Raised by [`Lu::new`] when a pivot falls below the singularity floor.
#[derive(Debug, Clone, Copy)]
pub struct Singular;

impl Lu {
    fn new(m: &Matrix) -> Result<Self> {
        Self::factor(m).map_err(|Singular| Error::SingularSystem { rho: f64::NAN })
    }

    pub fn factor(m: &Matrix) -> std::result::Result<Self, Singular> {
        let n = m.n;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.norm_inf().max(1.0);
        for k in 0..n {
            let (pivot_row, pivot) =
                (k..n)
                    .map(|r| (r, lu[(r, k)].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot <= PIVOT_FLOOR * scale {
                return Err(Singular);
            }
            if pivot_row != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let d = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / d;
                lu[(r, k)] = f;
                for c in k + 1..n {
                    lu[(r, c)] -= f * lu[(k, c)];
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    /// Solves `M x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] -= self.lu[(r, c)] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[(r, c)] * x[c];
            }
            x[r] /= self.lu[(r, r)];
        }
        x
    }

    /// Solves the row system `x M = rhs`, i.e. `Mᵀ xᵀ = rhsᵀ`.
    pub fn solve_row(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        // Uᵀ z = rhs
        let mut z = rhs.to_vec();
        for r in 0..n {
            for c in 0..r {
                z[r] -= self.lu[(c, r)] * z[c];
            }
            z[r] /= self.lu[(r, r)];
        }
        // Lᵀ w = z
        for r in (0..n).rev() {
            for c in r + 1..n {
                z[r] -= self.lu[(c, r)] * z[c];
            }
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Dominant eigenpair of a nonnegative matrix from the left: `v M = ρ v`.
#[derive(Clone, Debug)]
pub struct PerronPair {
    pub root: f64,
    /// Left eigenvector, scaled to unit infinity norm and positive orientation.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Power iteration on the row product `x ↦ x (M + shift·I)`.
///
/// A unit shift makes any irreducible nonnegative matrix primitive without
/// moving its eigenvectors, so it is used whenever the matrix may be cyclic.
pub fn perron_left(m: &Matrix, shift: f64) -> Result<PerronPair> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut x = vec![1.0; n];
    let mut estimate = f64::NAN;
    for iteration in 1..=MAX_POWER_ITERATIONS {
        let mut y = m.vec_mul(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let size = norm_inf(&y);
        if size == 0.0 {
            // Nilpotent pattern: every iterate vanishes, the root is zero.
            return Ok(PerronPair {
                root: 0.0,
                vector: x,
                iterations: iteration,
            });
        }
        // x is normalized to norm 1, so the growth factor estimates the root.
        let next_estimate = size;
        y.iter_mut().for_each(|v| *v /= size);
        let step = max_abs_diff(&x, &y);
        let settled = (next_estimate - estimate).abs() < POWER_TOLERANCE && step < POWER_TOLERANCE;
        x = y;
        estimate = next_estimate;
        if settled {
            orient_positive(&mut x);
            return Ok(PerronPair {
                root: estimate - shift,
                vector: x,
                iterations: iteration,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_POWER_ITERATIONS,
    })
}

fn orient_positive(v: &mut [f64]) {
    let largest = v
        .iter()
        .copied()
        .fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m });
    if largest < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Strong connectivity of the directed graph with an arc `r → c` for every
/// entry above [`PATTERN_ZERO`]. A single sector is trivially connected.
pub fn strongly_connected(m: &Matrix) -> bool {
    let n = m.dim();
    if n <= 1 {
        return true;
    }
    let forward = reach_all(n, |r, c| m[(r, c)] > PATTERN_ZERO);
    let backward = reach_all(n, |r, c| m[(c, r)] > PATTERN_ZERO);
    forward && backward
}

fn reach_all(n: usize, arc: impl Fn(usize, usize) -> bool) -> bool {
    reachable(n, 0, arc).into_iter().all(|s| s)
}

fn reachable(n: usize, start: usize, arc: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(r) = stack.pop() {
        for c in 0..n {
            if !seen[c] && arc(r, c) {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    seen
}

/// Strongly connected components of the sparsity graph, each sorted.
pub fn strong_components(m: &Matrix) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut assigned = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if assigned[start] {
            continue;
        }
        let forward = reachable(n, start, |r, c| m[(r, c)] > PATTERN_ZERO);
        let backward = reachable(n, start, |r, c| m[(c, r)] > PATTERN_ZERO);
        let component: Vec<usize> = (0..n).filter(|&k| forward[k] && backward[k]).collect();
        component.iter().for_each(|&k| assigned[k] = true);
        components.push(component);
    }
    components
}

/// Spectral radius of a nonnegative matrix, reducible or not.
///
/// The spectrum of a reducible matrix is the union of the spectra of its
/// diagonal blocks, so the radius is the largest Perron root over strong
/// components. Each block is irreducible, where shifted power iteration
/// converges; on the whole matrix it can stall on a defective root.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    if m.dim() == 0 {
        return Err(Error::Empty);
    }
    let mut rho: f64 = 0.0;
    for component in strong_components(m) {
        let root = if component.len() == 1 {
            m[(component[0], component[0])]
        } else {
            let block = Matrix::from_fn(component.len(), |r, c| m[(component[r], component[c])]);
            perron_left(&block, 1.0)?.root
        };
        rho = rho.max(root);
    }
    Ok(rho)
}
