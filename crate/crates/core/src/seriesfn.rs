//! Matrix-valued polynomials `Φ(p) = Σ pⁿ Φₙ` with left coefficients.
//!
//! Over ℍ the variable multiplies every coefficient entry from the left. The
//! ⋆-product is the Cauchy product of coefficient lists, which reduces to the
//! pointwise product over ℂ.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalars::{Quaternion, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeries<F> {
    coeffs: Vec<Matrix<F>>,
    r0: f64,
}

impl<F: Scalar> OperatorSeries<F> {
    /// Requires at least one coefficient, all `d×d` with the same `d ≥ 1`,
    /// and `0 < r0 ≤ 1`.
    pub fn new(coeffs: Vec<Matrix<F>>, r0: f64) -> Result<Self> {
        let d = coeffs
            .first()
            .ok_or_else(|| Error::Precondition("series needs at least one coefficient".into()))?
            .rows();
        if d == 0 {
            return Err(Error::Precondition("coefficient dimension must be positive".into()));
        }
        for (n, c) in coeffs.iter().enumerate() {
            if c.rows() != d || c.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {n} is {}x{}, expected {d}x{d}",
                    c.rows(),
                    c.cols()
                )));
            }
            if !c.is_finite() {
                return Err(Error::Precondition(format!("coefficient {n} is not finite")));
            }
        }
        if !(r0 > 0.0 && r0 <= 1.0) {
            return Err(Error::Precondition(format!("radius r0 = {r0} must lie in (0, 1]")));
        }
        Ok(OperatorSeries { coeffs, r0 })
    }

    /// Scalar series (`d = 1`) from its coefficients.
    pub fn scalar(coeffs: &[F], r0: f64) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Matrix::from_vec(1, 1, vec![c])).collect(), r0)
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn coeffs(&self) -> &[Matrix<F>] {
        &self.coeffs
    }

    /// Index of the last stored coefficient.
    pub fn len_minus_one(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the last nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.max_abs() != 0.0)
            .unwrap_or(0)
    }

    /// `Φₙ`, zero past the stored length.
    pub fn coeff(&self, n: usize) -> Matrix<F> {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dim(), self.dim()))
    }

    /// `Σ pⁿ Φₙ` by left Horner evaluation.
    pub fn eval(&self, p: F) -> Matrix<F> {
        let mut acc = self.coeffs.last().expect("nonempty").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = c + &acc.left_scale(p);
        }
        acc
    }

    /// `Φ♯(p) = Σ pⁿ Φₙ*`.
    pub fn sharp(&self) -> Self {
        OperatorSeries {
            coeffs: self.coeffs.iter().map(Matrix::adjoint).collect(),
            r0: self.r0,
        }
    }

    pub fn star_mul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "⋆-product of series with d = {} and d = {}",
                self.dim(),
                other.dim()
            )));
        }
        let d = self.dim();
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![Matrix::zeros(d, d); len];
        for (r, f) in self.coeffs.iter().enumerate() {
            for (s, g) in other.coeffs.iter().enumerate() {
                out[r + s] = &out[r + s] + &(f * g);
            }
        }
        Ok(OperatorSeries {
            coeffs: out,
            r0: self.r0.min(other.r0),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("series dimensions differ".into()));
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        Ok(OperatorSeries {
            coeffs: (0..len).map(|n| &self.coeff(n) + &other.coeff(n)).collect(),
            r0: self.r0.min(other.r0),
        })
    }

    /// Coefficient-wise `Φₙ·M`.
    pub fn mul_right(&self, m: &Matrix<F>) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.matmul(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs, self.r0)
    }

    /// Largest coefficient operator norm.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(Matrix::op_norm).fold(0.0, f64::max)
    }
}

/// Result of a truncated ⋆-inverse.
#[derive(Debug, Clone)]
pub struct StarInverse<F> {
    pub partial_sum: Matrix<F>,
    /// Power-iteration estimate of `‖T‖`.
    pub norm_estimate: f64,
    /// `|p|·‖T‖`.
    pub rate: f64,
    pub tail_bound: f64,
    /// `None` when the quadratic companion of `T` is singular.
    pub closed_form: Option<Matrix<F>>,
    /// `‖partial_sum − closed_form‖_F`.
    pub discrepancy: Option<f64>,
}

impl<F: Scalar> StarInverse<F> {
    pub fn closed_form_unavailable(&self) -> bool {
        self.closed_form.is_none()
    }
}

/// `Q(T) = I − 2Re(p)·T + |p|²·T²`, a real polynomial in `T`.
fn quadratic_companion<F: Scalar>(t: &Matrix<F>, p: F) -> Matrix<F> {
    let n = t.rows();
    let t2 = t * t;
    let q = &Matrix::identity(n) - &t.scale(2.0 * p.re());
    &q + &t2.scale(p.norm_sqr())
}

fn check_rate<F: Scalar>(t: &Matrix<F>, p: F) -> Result<(f64, f64)> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "⋆-inverse needs a square operator, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    let norm = t.op_norm();
    let rate = p.abs() * norm;
    if !(rate < 1.0) {
        return Err(Error::Divergence { rate });
    }
    Ok((norm, rate))
}

fn geometric_tail(rate: f64, order: usize) -> f64 {
    rate.powi(order as i32 + 1) / (1.0 - rate)
}

/// Truncated `(I − pT)^{−⋆} = Σ_{n ≤ order} pⁿTⁿ` with its geometric tail,
/// cross-checked against the S-resolvent closed form
/// `−p⁻¹(T − s̄I)(T² − 2Re(s)T + |s|²I)⁻¹` at `s = p⁻¹`.
pub fn star_inv_linear<F: Scalar>(t: &Matrix<F>, p: F, order: usize) -> Result<StarInverse<F>> {
    let (norm, rate) = check_rate(t, p)?;
    let n = t.rows();
    let partial_sum = power_sum(&Matrix::identity(n), t, p, order);

    let closed_form = if p == F::zero() {
        Some(Matrix::identity(n))
    } else {
        let s = p.inv();
        let shifted = t - &Matrix::identity(n).left_scale(s.conj());
        let comp = &(t * t) - &t.scale(2.0 * s.re());
        let comp = &comp + &Matrix::identity(n).scale(s.norm_sqr());
        comp.inverse()
            .ok()
            .map(|ci| (&shifted * &ci).left_scale(-p.inv()))
    };
    let discrepancy = closed_form
        .as_ref()
        .map(|c| (&partial_sum - c).frobenius());
    Ok(StarInverse {
        partial_sum,
        norm_estimate: norm,
        rate,
        tail_bound: geometric_tail(rate, order),
        closed_form,
        discrepancy,
    })
}

/// `left ⋆ (I − pT)^{−⋆} = Σ_{n ≤ order} pⁿ·(left·Tⁿ)`, cross-checked
/// against `(left − p̄·left·T)·Q(T)⁻¹`.
pub fn star_resolvent<F: Scalar>(
    left: &Matrix<F>,
    t: &Matrix<F>,
    p: F,
    order: usize,
) -> Result<StarInverse<F>> {
    let (norm, rate) = check_rate(t, p)?;
    if left.cols() != t.rows() {
        return Err(Error::DimensionMismatch(format!(
            "left factor has {} columns, operator has {} rows",
            left.cols(),
            t.rows()
        )));
    }
    let partial_sum = power_sum(left, t, p, order);
    let lt = left * t;
    let numer = left - &lt.left_scale(p.conj());
    let closed_form = quadratic_companion(t, p)
        .inverse()
        .ok()
        .map(|qi| &numer * &qi);
    let discrepancy = closed_form
        .as_ref()
        .map(|c| (&partial_sum - c).frobenius());
    Ok(StarInverse {
        partial_sum,
        norm_estimate: norm,
        rate,
        tail_bound: left.op_norm() * geometric_tail(rate, order),
        closed_form,
        discrepancy,
    })
}

fn power_sum<F: Scalar>(left: &Matrix<F>, t: &Matrix<F>, p: F, order: usize) -> Matrix<F> {
    let mut term = left.clone();
    let mut acc = left.clone();
    let mut pn = F::one();
    for _ in 0..order {
        term = &term * t;
        pn *= p;
        acc = &acc + &term.left_scale(pn);
    }
    acc
}

/// `(α, β)` with `f(x + Iy) = α + I·β`, where `I = axis`.
///
/// Over ℂ the only admissible axes are `±i`.
pub fn slice_components<F: Scalar>(
    f: &OperatorSeries<F>,
    x: f64,
    y: f64,
    axis: Quaternion,
) -> Result<(Matrix<F>, Matrix<F>)> {
    if axis.w.abs() > 1e-12 || (axis.abs() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("axis {axis} is not a unit imaginary quaternion")));
    }
    let i = F::from_quaternion(axis)
        .ok_or_else(|| Error::Domain(format!("axis {axis} does not lie in the {} field", F::FIELD)))?;
    let plus = f.eval(F::from_real(x) + i.scale(y));
    let minus = f.eval(F::from_real(x) - i.scale(y));
    let alpha = (&plus + &minus).scale(0.5);
    let beta = (&plus - &minus).left_scale(-i).scale(0.5);
    Ok((alpha, beta))
}
