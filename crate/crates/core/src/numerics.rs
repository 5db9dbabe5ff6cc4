//! Small dense linear algebra for the ≤4×4 matrices that appear in the motor
//! model and the EMC unit.
//!
//! Everything here is stack allocated except [`Polynomial`] and the
//! eigenvalue lists. Eigenvalues come from closed-form roots of the
//! characteristic polynomial, so only matrices up to 3×3 are supported.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest dimension a [`Mat`] or [`Vector`] can hold.
pub const MAX_DIM: usize = 4;

/// Pivots smaller than this fraction of `‖A‖∞` are treated as zero.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Number of Taylor terms kept after scaling in [`expm`].
const EXPM_TERMS: usize = 16;

/// Dense row-major matrix with at most [`MAX_DIM`] rows and columns.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: [[f64; MAX_DIM]; MAX_DIM],
}

impl Mat {
    /// All-zero matrix. Panics if a dimension is outside `1..=MAX_DIM`.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&rows) && (1..=MAX_DIM).contains(&cols),
            "matrix shape {rows}x{cols} outside 1..={MAX_DIM}"
        );
        Self {
            rows,
            cols,
            data: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    /// `n × n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = 1.0;
        }
        m
    }

    /// Square diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i][i] = *v;
        }
        m
    }

    /// Builds a matrix from row slices of equal length.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if !(1..=MAX_DIM).contains(&n_rows)
            || !(1..=MAX_DIM).contains(&n_cols)
            || rows.iter().any(|r| r.len() != n_cols)
        {
            return Err(Error::Dimension {
                rows: n_rows,
                cols: n_cols,
            });
        }
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            m.data[i][..n_cols].copy_from_slice(row);
        }
        Ok(m)
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True for square matrices.
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        (0..self.rows).all(|i| self.data[i][..self.cols].iter().all(|v| v.is_finite()))
    }

    /// Multiplies every entry by `k`.
    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i][j] *= k;
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &Vector) -> Vector {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        let mut out = Vector::zeros(self.rows);
        for i in 0..self.rows {
            out.data[i] = (0..self.cols).map(|j| self.data[i][j] * v.data[j]).sum();
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| {
                self.data[i][..self.cols]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i][i]).sum()
    }

    /// Copies the `rows × cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.data[i][j] = self.data[r0 + i][c0 + j];
            }
        }
        out
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vector {
        let mut out = Vector::zeros(self.rows);
        for i in 0..self.rows {
            out.data[i] = self.data[i][j];
        }
        out
    }

    /// Monic characteristic polynomial `det(zI − self)` for square matrices up
    /// to 3×3.
    pub fn characteristic_polynomial(&self) -> Result<Polynomial> {
        if !self.is_square() || self.rows > 3 {
            return Err(Error::Dimension {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let a = &self.data;
        let coeffs = match self.rows {
            1 => alloc::vec![-a[0][0], 1.0],
            2 => {
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                alloc::vec![det, -(a[0][0] + a[1][1]), 1.0]
            }
            _ => {
                let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2]
                    - a[0][2] * a[2][0]
                    + a[1][1] * a[2][2]
                    - a[1][2] * a[2][1];
                let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
                alloc::vec![-det, minors, -self.trace(), 1.0]
            }
        };
        Ok(Polynomial { coeffs })
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &mut self.data[i][j]
    }
}

impl Add for Mat {
    type Output = Mat;

    fn add(self, rhs: Mat) -> Mat {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        let mut out = self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i][j] += rhs.data[i][j];
            }
        }
        out
    }
}

impl Sub for Mat {
    type Output = Mat;

    fn sub(self, rhs: Mat) -> Mat {
        self + rhs.scale(-1.0)
    }
}

impl Mul for Mat {
    type Output = Mat;

    fn mul(self, rhs: Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                out.data[i][j] = (0..self.cols)
                    .map(|k| self.data[i][k] * rhs.data[k][j])
                    .sum();
            }
        }
        out
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            list.entry(&&self.data[i][..self.cols]);
        }
        list.finish()
    }
}

/// Dense column vector with at most [`MAX_DIM`] entries.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    len: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    /// All-zero vector of length `len`.
    pub fn zeros(len: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&len),
            "vector length {len} outside 1..={MAX_DIM}"
        );
        Self {
            len,
            data: [0.0; MAX_DIM],
        }
    }

    /// Copies a slice.
    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; vectors hold at least one entry.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Entries as a slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    /// Multiplies every entry by `k`.
    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        out.data[..self.len].iter_mut().for_each(|v| *v *= k);
        out
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        assert!(i < self.len);
        &mut self.data[i]
    }
}

impl Add for Vector {
    type Output = Vector;

    fn add(self, rhs: Vector) -> Vector {
        assert_eq!(self.len, rhs.len);
        let mut out = self;
        for i in 0..self.len {
            out.data[i] += rhs.data[i];
        }
        out
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.as_slice().fmt(f)
    }
}

/// Real polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Wraps ascending-degree coefficients. Trailing zeros are trimmed so the
    /// degree is meaningful; the zero polynomial keeps a single `0.0`.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// Ascending-degree coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree (0 for constants).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        self.coeffs
            .iter()
            .rev()
            .fold((zero, zero), |(p, dp), c| (p * z + c, dp * z + p))
    }

    /// Roots of a polynomial of degree ≤ 3 by closed-form formulas, sorted by
    /// real part then imaginary part.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n > 3 {
            return Err(Error::Dimension { rows: n, cols: n });
        }
        let lead = self.coeffs[n];
        let monic: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        let mut roots = match n {
            0 => Vec::new(),
            1 => alloc::vec![Complex64::new(-monic[0], 0.0)],
            2 => quadratic_roots(monic[1], monic[0]).to_vec(),
            _ => cubic_roots(monic[2], monic[1], monic[0]).to_vec(),
        };
        if n == 3 {
            let p = Polynomial { coeffs: monic };
            for r in roots.iter_mut() {
                *r = p.polish(*r);
            }
            // keep the pair exactly conjugate after polishing
            if roots[1].im != 0.0 {
                roots[2] = roots[1].conj();
            }
        }
        sort_complex(&mut roots);
        Ok(roots)
    }

    /// Two Newton steps, each accepted only if it lowers the residual.
    fn polish(&self, mut z: Complex64) -> Complex64 {
        let real = z.im == 0.0;
        for _ in 0..2 {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let mut next = z - p / dp;
            if real {
                next.im = 0.0;
            }
            if self.eval(next).norm() < p.norm() {
                z = next;
            } else {
                break;
            }
        }
        z
    }
}

/// Roots of `z² + b z + c`.
fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + libm::copysign(libm::sqrt(disc), b));
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let im = 0.5 * libm::sqrt(-disc);
        [Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

/// Roots of `z³ + a2 z² + a1 z + a0`. Trigonometric form for three real roots,
/// Cardano otherwise. The complex pair, if any, is returned at indices 1 and 2.
fn cubic_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    let shift = -a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    if disc < 0.0 {
        // p < 0 is implied
        let r = 2.0 * libm::sqrt(-p / 3.0);
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = libm::acos(arg) / 3.0;
        let third = 2.0 * core::f64::consts::PI / 3.0;
        return [0.0, 1.0, 2.0]
            .map(|k| Complex64::new(r * libm::cos(phi - k * third) + shift, 0.0));
    }

    let sq = libm::sqrt(disc);
    // larger-magnitude branch first to avoid cancellation
    let u = libm::cbrt(-q / 2.0 - libm::copysign(sq, q));
    let v = if u == 0.0 { 0.0 } else { -p / (3.0 * u) };
    let re = -(u + v) / 2.0 + shift;
    let im = (u - v) * libm::sqrt(3.0) / 2.0;
    [
        Complex64::new(u + v + shift, 0.0),
        Complex64::new(re, im.abs()),
        Complex64::new(re, -im.abs()),
    ]
}

/// Sorts by real part, then imaginary part.
pub fn sort_complex(values: &mut [Complex64]) {
    values.sort_by(|a, b| match a.re.total_cmp(&b.re) {
        Ordering::Equal => a.im.total_cmp(&b.im),
        o => o,
    });
}

/// Monic polynomial with the given roots. Complex roots must come in
/// conjugate pairs; the pairing is checked with a relative tolerance.
pub fn poly_from_roots(roots: &[Complex64]) -> Result<Polynomial> {
    let mut used = alloc::vec![false; roots.len()];
    for (i, r) in roots.iter().enumerate() {
        if r.im == 0.0 || used[i] {
            continue;
        }
        let tol = 1e-12 * r.norm().max(1.0);
        let partner =
            (0..roots.len()).find(|&j| j != i && !used[j] && (roots[j] - r.conj()).norm() <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return Err(Error::UnpairedComplexRoot { index: i }),
        }
    }

    let mut coeffs = alloc::vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        // multiply by (z - r)
        let mut next = alloc::vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        coeffs = next;
    }
    Ok(Polynomial {
        coeffs: coeffs.into_iter().map(|c| c.re).collect(),
    })
}

/// Eigenvalues of a square matrix up to 3×3 as roots of `det(zI − m)`,
/// sorted by real part then imaginary part.
pub fn eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    m.characteristic_polynomial()?.roots()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Mat, b: &Vector) -> Result<Vector> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Dimension {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let norm = a.norm_inf();
    let mut m = *a;
    let mut rhs = *b;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap_or(col);
        if pivot_row != col {
            m.data.swap(pivot_row, col);
            rhs.data.swap(pivot_row, col);
        }
        let pivot = m[(col, col)];
        min_pivot = min_pivot.min(pivot.abs());
        if pivot.abs() <= SINGULARITY_THRESHOLD * norm || norm == 0.0 {
            return Err(Error::SingularMatrix {
                condition_estimate: if pivot == 0.0 {
                    f64::INFINITY
                } else {
                    norm / pivot.abs()
                },
            });
        }
        for row in col + 1..n {
            let factor = m[(row, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m.data[row][k] -= factor * m.data[col][k];
            }
            rhs.data[row] -= factor * rhs.data[col];
        }
    }
    debug_assert!(min_pivot > 0.0);

    let mut x = Vector::zeros(n);
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[(row, k)] * x.data[k]).sum();
        x.data[row] = (rhs.data[row] - tail) / m[(row, row)];
    }
    Ok(x)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is halved until `‖m‖∞ < 0.5`, the first 16 terms
/// of the series are summed, and the result is squared back up.
pub fn expm(m: &Mat) -> Mat {
    assert!(m.is_square(), "expm needs a square matrix");
    let n = m.rows();
    let norm = m.norm_inf();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm >= 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let x = m.scale(libm::ldexp(1.0, -(squarings as i32)));

    let mut sum = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=EXPM_TERMS {
        term = (term * x).scale(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Zero-order-hold discretization of `ẋ = A x + b u` over `dt`.
///
/// Returns `(exp(A dt), ∫₀^dt exp(A s) ds · b)`, both read off the exponential
/// of the augmented matrix `[[A, b], [0, 0]]·dt`.
pub fn zoh_discretize(a_ct: &Mat, b_ct: &Vector, dt: f64) -> Result<(Mat, Vector)> {
    let n = a_ct.rows();
    if !a_ct.is_square() || n >= MAX_DIM || b_ct.len() != n {
        return Err(Error::Dimension {
            rows: a_ct.rows(),
            cols: a_ct.cols(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: "must be positive and finite",
        });
    }
    let mut aug = Mat::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a_ct[(i, j)] * dt;
        }
        aug[(i, n)] = b_ct[i] * dt;
    }
    let e = expm(&aug);
    Ok((e.block(0, 0, n, n), e.block(0, n, n, 1).column(0)))
}
