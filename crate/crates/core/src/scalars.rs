//! Scalars of the two coefficient fields.
//!
//! [`Quaternion`] is stored as four reals `w + xi + yj + zk`. The complex
//! split `q = z₁ + z₂j` with `z₁ = w + xi`, `z₂ = y + zi` is computed on
//! demand by [`Quaternion::split`] and drives the embedding [`chi_scalar`].
//!
//! The [`Scalar`] trait abstracts over `Complex64` and `Quaternion` so the
//! matrix, series and Gram layers are written once for both fields. Products
//! are never assumed to commute.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{self, EigDecomposition, Matrix};

/// Which field a [`Scalar`] implementation lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Complex,
    Quaternion,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Complex => f.write_str("complex"),
            FieldKind::Quaternion => f.write_str("quaternion"),
        }
    }
}

/// Real quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    /// `z₁ + z₂j`.
    pub fn from_pair(z1: Complex64, z2: Complex64) -> Self {
        Quaternion::new(z1.re, z1.im, z2.re, z2.im)
    }

    /// Returns `(z₁, z₂)` with `self = z₁ + z₂j`.
    pub fn split(self) -> (Complex64, Complex64) {
        (Complex64::new(self.w, self.x), Complex64::new(self.y, self.z))
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn re(self) -> f64 {
        self.w
    }

    /// Imaginary part `xi + yj + zk`.
    pub fn im(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse; `0⁻¹` yields non-finite components.
    pub fn inv(self) -> Self {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    pub fn powi(self, n: u32) -> Self {
        (0..n).fold(Quaternion::ONE, |acc, _| acc * self)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Complex64> for Quaternion {
    fn from(z: Complex64) -> Self {
        Quaternion::new(z.re, z.im, 0.0, 0.0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product, generated by `i² = j² = k² = ijk = −1`.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.w, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (o.w, o.x, o.y, o.z);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

/// Right division `a / b = a·b⁻¹`.
impl Div for Quaternion {
    type Output = Quaternion;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Quaternion) -> Quaternion {
        self * o.inv()
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, o: Quaternion) {
        *self = *self * o;
    }
}

impl Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

/// `q = x0 + axis·y` with `y ≥ 0` and `axis ∈ 𝕊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceForm {
    pub x0: f64,
    pub y: f64,
    pub axis: Quaternion,
}

impl SliceForm {
    pub fn reconstruct(&self) -> Quaternion {
        Quaternion::real(self.x0) + self.axis.scale(self.y)
    }
}

/// Tolerance below which `|Im q|` counts as zero in [`slice_decompose`].
pub fn real_axis_tolerance(q: Quaternion) -> f64 {
    1e-14 * (1.0 + q.abs())
}

pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

/// Splits `q` as `Re(q) + I·|Im(q)|`. Real input (`|Im q|` within
/// [`real_axis_tolerance`]) gets the axis `i`.
pub fn slice_decompose(q: Quaternion) -> SliceForm {
    let im = q.im();
    let y = im.abs();
    if y <= real_axis_tolerance(q) {
        SliceForm {
            x0: q.w,
            y: 0.0,
            axis: Quaternion::I,
        }
    } else {
        SliceForm {
            x0: q.w,
            y,
            axis: im.scale(1.0 / y),
        }
    }
}

/// `χ(q) = [[z₁, z₂], [−z̄₂, z̄₁]]` for `q = z₁ + z₂j`.
pub fn chi_scalar(q: Quaternion) -> [[Complex64; 2]; 2] {
    let (z1, z2) = q.split();
    [[z1, z2], [-z2.conj(), z1.conj()]]
}

/// Field abstraction shared by the complex and quaternionic arms.
///
/// Multiplication need not commute. Vectors are acted on by scalars from the
/// left, and the inner product is `⟨c, d⟩ = Σ conj(dᵢ)·cᵢ`.
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const FIELD: FieldKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// Embeds a complex number; `i` maps to the quaternion unit `i`.
    fn from_complex(z: Complex64) -> Self;
    /// Returns `None` if the value is not in the requested field.
    fn from_quaternion(q: Quaternion) -> Option<Self>;
    fn to_quaternion(self) -> Quaternion;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;

    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    fn inv(self) -> Self {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    fn is_finite(self) -> bool {
        self.to_quaternion().is_finite()
    }

    /// Hermitian eigendecomposition in this field.
    fn eigh(h: &Matrix<Self>) -> Result<EigDecomposition<Self>>;
}

impl Scalar for Complex64 {
    const FIELD: FieldKind = FieldKind::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn from_quaternion(q: Quaternion) -> Option<Self> {
        (q.y == 0.0 && q.z == 0.0).then(|| Complex64::new(q.w, q.x))
    }
    fn to_quaternion(self) -> Quaternion {
        Quaternion::from(self)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn eigh(h: &Matrix<Self>) -> Result<EigDecomposition<Self>> {
        linalg::herm_eig(h)
    }
}

impl Scalar for Quaternion {
    const FIELD: FieldKind = FieldKind::Quaternion;

    fn zero() -> Self {
        Quaternion::ZERO
    }
    fn one() -> Self {
        Quaternion::ONE
    }
    fn from_real(x: f64) -> Self {
        Quaternion::real(x)
    }
    fn from_complex(z: Complex64) -> Self {
        Quaternion::from(z)
    }
    fn from_quaternion(q: Quaternion) -> Option<Self> {
        Some(q)
    }
    fn to_quaternion(self) -> Quaternion {
        self
    }
    fn conj(self) -> Self {
        Quaternion::conj(self)
    }
    fn re(self) -> f64 {
        self.w
    }
    fn norm_sqr(self) -> f64 {
        Quaternion::norm_sqr(self)
    }
    fn scale(self, s: f64) -> Self {
        Quaternion::scale(self, s)
    }
    fn eigh(h: &Matrix<Self>) -> Result<EigDecomposition<Self>> {
        linalg::quat_herm_eig(h)
    }
}

/// `qⁿ` by repeated left multiplication.
pub fn powi<F: Scalar>(q: F, n: usize) -> F {
    (0..n).fold(F::one(), |acc, _| acc * q)
}
