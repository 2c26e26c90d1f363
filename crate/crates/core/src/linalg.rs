//! Dense matrices over ℂ and ℍ.
//!
//! Storage is row-major. Quaternionic matrices act on column vectors from the
//! left, so `M·(x·q) = (M·x)·q`; scalars multiplying a matrix entrywise are
//! applied with [`Matrix::left_scale`] or [`Matrix::right_scale`] and the two
//! differ over ℍ.
//!
//! Hermitian eigenproblems are solved with cyclic Jacobi over ℂ. The
//! quaternionic solver runs on the complex image `χ(H)` and lifts one member
//! of each symplectic pair back to ℍ.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalars::{Quaternion, Scalar};

#[derive(Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: fmt::Debug> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = F::from_real(x);
        }
        m
    }

    pub fn column_vector(v: &[F]) -> Self {
        Matrix::from_vec(v.len(), 1, v.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[F]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix<F>) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Columns listed by index, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(F) -> F) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// `q·M`, every entry multiplied on the left.
    pub fn left_scale(&self, q: F) -> Self {
        self.map(|x| q * x)
    }

    /// `M·q`, every entry multiplied on the right.
    pub fn right_scale(&self, q: F) -> Self {
        self.map(|x| x * q)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| x.scale(s))
    }

    /// `diag(d)·M`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.rows);
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(d[i]))
    }

    /// `M·diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.cols);
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(d[j]))
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == F::zero() {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has length {}",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (&a, &x) in self.row(i).iter().zip(v) {
                    acc += a * x;
                }
                acc
            })
            .collect())
    }

    pub fn try_add(&self, other: &Matrix<F>) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Matrix<F>) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix<F>, f: impl Fn(F, F) -> F) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn trace(&self) -> F {
        (0..self.rows.min(self.cols)).fold(F::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `‖M − M*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Spectral norm by power iteration on `M*M`.
    pub fn op_norm(&self) -> f64 {
        op_norm_power(self, 1000, 1e-15)
    }

    /// Solves `M·X = B` by Gaussian elimination with partial pivoting.
    ///
    /// Row operations are left multiplications, so the routine is valid over
    /// the skew field.
    pub fn solve(&self, b: &Matrix<F>) -> Result<Matrix<F>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("solve needs a square matrix".into()));
        }
        if b.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                b.rows, self.rows
            )));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut x = b.clone();
        let scale = self.max_abs();
        for k in 0..n {
            let (piv, pmag) = (k..n)
                .map(|i| (i, m[(i, k)].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(pmag > 1e-14 * scale) {
                return Err(Error::Singular(format!(
                    "pivot {pmag:e} at column {k} (scale {scale:e})"
                )));
            }
            if piv != k {
                m.swap_rows(piv, k);
                x.swap_rows(piv, k);
            }
            let inv = m[(k, k)].inv();
            for i in k + 1..n {
                let l = m[(i, k)] * inv;
                if l == F::zero() {
                    continue;
                }
                for j in k..n {
                    let t = l * m[(k, j)];
                    m[(i, j)] -= t;
                }
                for j in 0..x.cols {
                    let t = l * x[(k, j)];
                    x[(i, j)] -= t;
                }
            }
        }
        for k in (0..n).rev() {
            let inv = m[(k, k)].inv();
            for j in 0..x.cols {
                let mut acc = x[(k, j)];
                for c in k + 1..n {
                    acc -= m[(k, c)] * x[(c, j)];
                }
                x[(k, j)] = inv * acc;
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<F>> {
        self.solve(&Matrix::identity(self.rows))
    }

    /// Lower-triangular `L` with `M = L·L*`; fails unless `M` is positive
    /// definite.
    pub fn cholesky(&self) -> Result<Matrix<F>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("cholesky needs a square matrix".into()));
        }
        let n = self.rows;
        let mut l: Matrix<F> = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re();
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::Precondition(format!(
                    "not positive definite: pivot {d:e} at {j}"
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = F::from_real(djj);
            for i in j + 1..n {
                let mut acc = self[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = acc.scale(1.0 / djj);
            }
        }
        Ok(l)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Converts entrywise into another field; `None` if some entry does not
    /// belong to it.
    pub fn convert<G: Scalar>(&self) -> Option<Matrix<G>> {
        let data = self
            .data
            .iter()
            .map(|x| G::from_quaternion(x.to_quaternion()))
            .collect::<Option<Vec<G>>>()?;
        Some(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<F: Scalar> Add for &Matrix<F> {
    type Output = Matrix<F>;
    fn add(self, o: &Matrix<F>) -> Matrix<F> {
        self.try_add(o).expect("matrix add: shape mismatch")
    }
}

impl<F: Scalar> Sub for &Matrix<F> {
    type Output = Matrix<F>;
    fn sub(self, o: &Matrix<F>) -> Matrix<F> {
        self.try_sub(o).expect("matrix sub: shape mismatch")
    }
}

impl<F: Scalar> Mul for &Matrix<F> {
    type Output = Matrix<F>;
    fn mul(self, o: &Matrix<F>) -> Matrix<F> {
        self.matmul(o).expect("matrix mul: shape mismatch")
    }
}

impl<F: Scalar> Neg for &Matrix<F> {
    type Output = Matrix<F>;
    fn neg(self) -> Matrix<F> {
        self.map(|x| -x)
    }
}

/// `⟨x, y⟩ = y*·x = Σ conj(yᵢ)·xᵢ`.
pub fn inner<F: Scalar>(x: &[F], y: &[F]) -> F {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = F::zero();
    for (&a, &b) in x.iter().zip(y) {
        acc += b.conj() * a;
    }
    acc
}

pub fn vec_norm<F: Scalar>(x: &[F]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn op_norm_power<F: Scalar>(m: &Matrix<F>, max_iter: usize, tol: f64) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let n = m.cols;
    // Deterministic start vector with no special alignment to coordinate axes.
    let mut v: Vec<F> = (0..n)
        .map(|i| F::from_real(1.0 + 0.37 * ((i * 7919) % 13) as f64))
        .collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|x| *x = x.scale(1.0 / nv));
    let mh = m.adjoint();
    let mut est = 0.0;
    for _ in 0..max_iter {
        let w = m.mul_vec(&v).expect("square shapes");
        let z = mh.mul_vec(&w).expect("square shapes");
        let nz = vec_norm(&z);
        if nz == 0.0 {
            return vec_norm(&w).sqrt().max(est);
        }
        let new = nz.sqrt();
        v = z.into_iter().map(|x| x.scale(1.0 / nz)).collect();
        if (new - est).abs() <= tol * new {
            est = new;
            break;
        }
        est = new;
    }
    est
}

/// Eigenvalues in ascending order and unitary eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct EigDecomposition<F> {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix<F>,
}

impl<F: Scalar> EigDecomposition<F> {
    /// `‖H·U − U·diag(Λ)‖_F`.
    pub fn residual(&self, h: &Matrix<F>) -> f64 {
        let hu = h.matmul(&self.eigenvectors).expect("shape");
        let ul = self.eigenvectors.scale_cols(&self.eigenvalues);
        (&hu - &ul).frobenius()
    }

    /// `‖U*·U − I‖_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let u = &self.eigenvectors;
        let g = &u.adjoint() * u;
        (&g - &Matrix::identity(u.cols)).frobenius()
    }
}

const HERMITIAN_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 50;
const PAIRING_TOL: f64 = 1e-8;

fn check_hermitian<F: Scalar>(h: &Matrix<F>) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Precondition(format!(
            "Hermitian input must be square, got {}x{}",
            h.rows, h.cols
        )));
    }
    let defect = h.hermitian_defect();
    let scale = h.frobenius();
    if defect > HERMITIAN_TOL * scale || !defect.is_finite() {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian: ‖H − H*‖ = {defect:e}, ‖H‖ = {scale:e}"
        )));
    }
    Ok(())
}

fn off_norm(a: &Matrix<Complex64>) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Complex Hermitian eigendecomposition by cyclic Jacobi rotations.
pub fn herm_eig(h: &Matrix<Complex64>) -> Result<EigDecomposition<Complex64>> {
    check_hermitian(h)?;
    let n = h.rows;
    // Symmetrize so rounding asymmetry in the input cannot leak into the sweep.
    let mut a = Matrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = Matrix::<Complex64>::identity(n);
    let norm = a.frobenius();
    let target = JACOBI_TOL * norm;

    let mut converged = n <= 1 || off_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_norm(&a) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            off: off_norm(&a),
        });
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    Ok(EigDecomposition {
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors: v.select_columns(&order),
    })
}

/// One Jacobi rotation annihilating `a[p][q]`.
///
/// `G = diag(1, e^{−iφ})·[[c, s], [−s, c]]` where `a[p][q] = |g|e^{iφ}`;
/// then `A ← G*AG` and `V ← VG`.
fn rotate(a: &mut Matrix<Complex64>, v: &mut Matrix<Complex64>, p: usize, q: usize) {
    let g = a[(p, q)];
    let gabs = g.norm();
    if gabs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * gabs);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = (g / gabs).conj();
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase * (-s);
    let g_qq = phase * c;

    let n = a.rows;
    for i in 0..n {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = x * g_pp + y * g_qp;
        a[(i, q)] = x * g_pq + y * g_qq;
    }
    for j in 0..n {
        let x = a[(p, j)];
        let y = a[(q, j)];
        a[(p, j)] = g_pp.conj() * x + g_qp.conj() * y;
        a[(q, j)] = g_pq.conj() * x + g_qq.conj() * y;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for i in 0..v.rows {
        let x = v[(i, p)];
        let y = v[(i, q)];
        v[(i, p)] = x * g_pp + y * g_qp;
        v[(i, q)] = x * g_pq + y * g_qq;
    }
}

/// `χ(M) = [[A, B], [−B̄, Ā]]` for `M = A + B·j`.
pub fn chi_embed(m: &Matrix<Quaternion>) -> Matrix<Complex64> {
    let (r, c) = (m.rows, m.cols);
    let mut out = Matrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let (a, b) = m[(i, j)].split();
            out[(i, j)] = a;
            out[(i, c + j)] = b;
            out[(r + i, j)] = -b.conj();
            out[(r + i, c + j)] = a.conj();
        }
    }
    out
}

/// Inverse of [`chi_embed`] on its image; reads the top block row.
pub fn chi_unembed(m: &Matrix<Complex64>) -> Result<Matrix<Quaternion>> {
    if !m.rows.is_multiple_of(2) || !m.cols.is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "χ-image must have even dimensions, got {}x{}",
            m.rows, m.cols
        )));
    }
    let (r, c) = (m.rows / 2, m.cols / 2);
    Ok(Matrix::from_fn(r, c, |i, j| {
        Quaternion::from_pair(m[(i, j)], m[(i, c + j)])
    }))
}

/// Quaternionic Hermitian eigendecomposition through `χ(H)`.
///
/// The doubled complex spectrum is paired greedily in ascending order. For
/// each cluster of numerically equal eigenvalues the lifted vectors
/// `x + (−ȳ)·j` are re-orthonormalized over ℍ.
pub fn quat_herm_eig(h: &Matrix<Quaternion>) -> Result<EigDecomposition<Quaternion>> {
    check_hermitian(h)?;
    let n = h.rows;
    if n == 0 {
        return Ok(EigDecomposition {
            eigenvalues: vec![],
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let ce = herm_eig(&chi_embed(h))?;
    let spectrum = ce.eigenvalues.clone();
    let scale = spectrum.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = PAIRING_TOL * scale.max(f64::MIN_POSITIVE);

    let mut unpaired = Vec::new();
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (spectrum[2 * k], spectrum[2 * k + 1]);
        if (a - b).abs() > tol {
            unpaired.push(a);
            unpaired.push(b);
        }
        values.push(0.5 * (a + b));
    }
    if !unpaired.is_empty() {
        return Err(Error::Pairing { unpaired, spectrum });
    }

    let lift = |col: usize| -> Vec<Quaternion> {
        (0..n)
            .map(|i| {
                let x = ce.eigenvectors[(i, col)];
                let y = ce.eigenvectors[(n + i, col)];
                Quaternion::from_pair(x, -y.conj())
            })
            .collect()
    };

    let mut basis: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[end - 1]).abs() <= tol {
            end += 1;
        }
        let need = end - start;
        let mut got = 0;
        for col in 2 * start..2 * end {
            if got == need {
                break;
            }
            let mut v = lift(col);
            let cluster = &basis[start..start + got];
            for _ in 0..2 {
                for q in cluster {
                    let coeff = inner(&v, q);
                    for (vi, &qi) in v.iter_mut().zip(q) {
                        *vi -= qi * coeff;
                    }
                }
            }
            let nv = vec_norm(&v);
            if nv > 0.5 {
                basis.push(v.into_iter().map(|x| x.scale(1.0 / nv)).collect());
                got += 1;
            }
        }
        if got < need {
            return Err(Error::Pairing {
                unpaired: values[start..end].to_vec(),
                spectrum,
            });
        }
        start = end;
    }

    let mut u = Matrix::zeros(n, n);
    for (j, col) in basis.iter().enumerate() {
        u.set_column(j, col);
    }
    Ok(EigDecomposition {
        eigenvalues: values,
        eigenvectors: u,
    })
}

/// Diagonal fundamental symmetry with entries `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature(Vec<f64>);

impl Signature {
    pub fn new(signs: Vec<f64>) -> Result<Self> {
        if let Some((i, s)) = signs
            .iter()
            .enumerate()
            .find(|(_, &s)| s != 1.0 && s != -1.0)
        {
            return Err(Error::Precondition(format!(
                "signature entry {i} is {s}, expected ±1"
            )));
        }
        Ok(Signature(signs))
    }

    pub fn identity(n: usize) -> Self {
        Signature(vec![1.0; n])
    }

    /// Accepts only diagonal matrices with `±1` on the diagonal.
    pub fn from_matrix<F: Scalar>(j: &Matrix<F>) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::Precondition("signature matrix must be square".into()));
        }
        let n = j.rows();
        let mut signs = Vec::with_capacity(n);
        for r in 0..n {
            for c in 0..n {
                let v = j[(r, c)];
                if r != c && v != F::zero() {
                    return Err(Error::Precondition(format!(
                        "signature matrix has off-diagonal entry at ({r}, {c})"
                    )));
                }
            }
            let v = j[(r, r)];
            if v == F::one() {
                signs.push(1.0);
            } else if v == -F::one() {
                signs.push(-1.0);
            } else {
                return Err(Error::Precondition(format!(
                    "signature diagonal entry {r} is {v:?}, expected ±1"
                )));
            }
        }
        Ok(Signature(signs))
    }

    pub fn signs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_matrix<F: Scalar>(&self) -> Matrix<F> {
        Matrix::diag_real(&self.0)
    }
}

/// `J·A*·J` for square `A`.
pub fn krein_adjoint<F: Scalar>(a: &Matrix<F>, j: &Signature) -> Result<Matrix<F>> {
    krein_adjoint_between(a, j, j)
}

/// `J_out·A*·J_in` where `A: K_in → K_out` in the sense of the signatures:
/// `j_out` has `a.cols()` entries and `j_in` has `a.rows()` entries.
pub fn krein_adjoint_between<F: Scalar>(
    a: &Matrix<F>,
    j_out: &Signature,
    j_in: &Signature,
) -> Result<Matrix<F>> {
    if j_out.len() != a.cols() || j_in.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "Krein adjoint of a {}x{} matrix needs signatures of length {} and {}, got {} and {}",
            a.rows(),
            a.cols(),
            a.cols(),
            a.rows(),
            j_out.len(),
            j_in.len()
        )));
    }
    Ok(a.adjoint().scale_rows(j_out.signs()).scale_cols(j_in.signs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_quat(rng: &mut ChaCha8Rng) -> Quaternion {
        Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    }

    fn random_herm_q(n: usize, rng: &mut ChaCha8Rng) -> Matrix<Quaternion> {
        let m = Matrix::from_fn(n, n, |_, _| random_quat(rng));
        &m + &m.adjoint()
    }

    fn random_herm_c(n: usize, rng: &mut ChaCha8Rng) -> Matrix<Complex64> {
        let m = Matrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        &m + &m.adjoint()
    }

    #[test]
    fn classic_two_by_two() {
        let h = Matrix::from_rows(&[vec![c(2., 0.), c(1., 0.)], vec![c(1., 0.), c(2., 0.)]]).unwrap();
        let e = herm_eig(&h).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_sorted_with_permutation() {
        let h = Matrix::<Complex64>::diag_real(&[5.0, -3.0]);
        let e = herm_eig(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![-3.0, 5.0]);
        assert_eq!(e.eigenvectors[(1, 0)], c(1., 0.));
        assert_eq!(e.eigenvectors[(0, 1)], c(1., 0.));
    }

    #[test]
    fn random_complex_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 8, 20] {
            let h = random_herm_c(n, &mut rng);
            let e = herm_eig(&h).unwrap();
            assert!(e.residual(&h) <= 1e-10 * h.frobenius(), "n={n}");
            assert!(e.orthogonality_defect() <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = Matrix::from_rows(&[vec![c(1., 0.), c(1., 0.)], vec![c(0., 0.), c(1., 0.)]]).unwrap();
        assert!(matches!(herm_eig(&h), Err(Error::Precondition(_))));
    }

    #[test]
    fn chi_identity_and_j() {
        let i3 = Matrix::<Quaternion>::identity(3);
        assert_eq!(chi_embed(&i3), Matrix::<Complex64>::identity(6));
        let mj = Matrix::from_vec(1, 1, vec![Quaternion::J]);
        let x = chi_embed(&mj);
        assert_eq!(x[(0, 0)], c(0., 0.));
        assert_eq!(x[(0, 1)], c(1., 0.));
        assert_eq!(x[(1, 0)], c(-1., 0.));
        assert_eq!(x[(1, 1)], c(0., 0.));
    }

    #[test]
    fn chi_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = Matrix::from_fn(3, 3, |_, _| random_quat(&mut rng));
            let n = Matrix::from_fn(3, 3, |_, _| random_quat(&mut rng));
            let lhs = chi_embed(&(&m * &n));
            let rhs = &chi_embed(&m) * &chi_embed(&n);
            assert!((&lhs - &rhs).max_abs() < 1e-14);
            assert_eq!(chi_unembed(&chi_embed(&m)).unwrap(), m);
        }
    }

    #[test]
    fn quaternion_diagonal_and_offdiagonal() {
        let d = Matrix::<Quaternion>::diag_real(&[1.0, 2.0]);
        let e = quat_herm_eig(&d).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 2.0).abs() < 1e-14);

        let h = Matrix::from_rows(&[
            vec![Quaternion::ZERO, Quaternion::J],
            vec![-Quaternion::J, Quaternion::ZERO],
        ])
        .unwrap();
        let e = quat_herm_eig(&h).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(e.residual(&h) < 1e-13);
    }

    #[test]
    fn quaternion_random_residual_and_doubling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 3, 8, 16] {
            let h = random_herm_q(n, &mut rng);
            let e = quat_herm_eig(&h).unwrap();
            assert!(e.residual(&h) <= 1e-10 * h.frobenius(), "n={n}");
            assert!(e.orthogonality_defect() <= 1e-10);
            let doubled = herm_eig(&chi_embed(&h)).unwrap().eigenvalues;
            for (k, &l) in e.eigenvalues.iter().enumerate() {
                assert!((doubled[2 * k] - l).abs() < 1e-9);
                assert!((doubled[2 * k + 1] - l).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quaternion_degenerate_cluster() {
        // Unitary conjugate of diag(1, 1, 1, 2): a threefold cluster.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = Matrix::from_fn(4, 4, |_, _| random_quat(&mut rng));
        let q = gram_schmidt_columns(&g);
        let h = &(&q * &Matrix::diag_real(&[1.0, 1.0, 1.0, 2.0])) * &q.adjoint();
        let h = Matrix::from_fn(4, 4, |i, j| (h[(i, j)] + h[(j, i)].conj()).scale(0.5));
        let e = quat_herm_eig(&h).unwrap();
        assert!(e.residual(&h) < 1e-12);
        assert!(e.orthogonality_defect() < 1e-12);
    }

    fn gram_schmidt_columns(m: &Matrix<Quaternion>) -> Matrix<Quaternion> {
        let mut cols: Vec<Vec<Quaternion>> = Vec::new();
        for j in 0..m.cols() {
            let mut v = m.column(j);
            for q in &cols {
                let coeff = inner(&v, q);
                for (vi, &qi) in v.iter_mut().zip(q) {
                    *vi -= qi * coeff;
                }
            }
            let n = vec_norm(&v);
            cols.push(v.into_iter().map(|x| x.scale(1.0 / n)).collect());
        }
        let mut out = Matrix::zeros(m.rows(), m.cols());
        for (j, c) in cols.iter().enumerate() {
            out.set_column(j, c);
        }
        out
    }

    #[test]
    fn solve_quaternion_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = Matrix::from_fn(5, 5, |_, _| random_quat(&mut rng));
        let b = Matrix::from_fn(5, 2, |_, _| random_quat(&mut rng));
        let x = m.solve(&b).unwrap();
        assert!((&(&m * &x) - &b).max_abs() < 1e-12);
        let inv = m.inverse().unwrap();
        assert!((&(&inv * &m) - &Matrix::identity(5)).max_abs() < 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let m = Matrix::<Complex64>::zeros(2, 2);
        assert!(matches!(m.solve(&Matrix::identity(2)), Err(Error::Singular(_))));
    }

    #[test]
    fn cholesky_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let g = Matrix::from_fn(4, 4, |_, _| random_quat(&mut rng));
        let m = &(&g * &g.adjoint()) + &Matrix::identity(4);
        let l = m.cholesky().unwrap();
        assert!((&(&l * &l.adjoint()) - &m).max_abs() < 1e-12);
        let neg = &m.scale(-1.0) + &Matrix::zeros(4, 4);
        assert!(neg.cholesky().is_err());
    }

    #[test]
    fn krein_adjoint_examples() {
        let a = Matrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]).unwrap();
        let id = Signature::identity(2);
        assert_eq!(krein_adjoint(&a, &id).unwrap(), a.adjoint());
        let j = Signature::new(vec![1.0, -1.0]).unwrap();
        let ka = krein_adjoint(&a, &j).unwrap();
        let expect = Matrix::from_rows(&[vec![c(0., 0.), c(0., 0.)], vec![c(-1., 0.), c(0., 0.)]]).unwrap();
        assert_eq!(ka, expect);
        assert_eq!(krein_adjoint(&ka, &j).unwrap(), a);
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::new(vec![1.0, 0.5]).is_err());
        let bad = Matrix::<Complex64>::from_rows(&[vec![c(1., 0.), c(1., 0.)], vec![c(0., 0.), c(-1., 0.)]]).unwrap();
        assert!(Signature::from_matrix(&bad).is_err());
        let good = Matrix::<Complex64>::diag_real(&[1.0, -1.0]);
        assert_eq!(Signature::from_matrix(&good).unwrap().signs(), &[1.0, -1.0]);
    }

    #[test]
    fn op_norm_matches_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h = random_herm_c(6, &mut rng);
        let e = herm_eig(&h).unwrap();
        let expect = e.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((h.op_norm() - expect).abs() < 1e-8 * expect);
    }
}
