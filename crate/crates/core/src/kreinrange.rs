//! Spectral split of a Hermitian Gram matrix into its Krein range.
//!
//! Eigenpairs with `|λ| ≤ ε·max|λ|` are treated as kernel. The kept pairs
//! define `|P|^{1/2}`, the sign `σ` and the kernel projection `π`. Both forms
//! on the range are evaluated in eigen-coordinates `c_k = |λ_k|^{−1/2}·u_k*x`,
//! so `|P|^{1/2}` is never inverted.

use crate::error::{Error, Result};
use crate::linalg::{inner, Matrix};
use crate::scalars::Scalar;

/// Inertia `(n₊, n₋, n₀)` after the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn as_tuple(self) -> (usize, usize, usize) {
        (self.positive, self.negative, self.zero)
    }
}

/// Kept eigenpairs ordered by decreasing `|λ|`; ties keep ascending order.
#[derive(Debug, Clone)]
pub struct KreinBasis<F> {
    pub eigenvalues: Vec<f64>,
    pub signs: Vec<f64>,
    /// Orthonormal columns `u_k`.
    pub vectors: Matrix<F>,
    /// Relative cutoff `ε`.
    pub cutoff: f64,
    /// Absolute threshold `ε·max|λ|`.
    pub threshold: f64,
    pub inertia: Inertia,
    /// Full ascending spectrum of the input.
    pub spectrum: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Decade above the cutoff in which kept eigenvalues raise a warning.
pub const CONDITIONING_WINDOW: f64 = 1e3;

pub fn spectral_split<F: Scalar>(p: &Matrix<F>, eps: f64) -> Result<KreinBasis<F>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("cutoff ε = {eps} must lie in (0, 1)")));
    }
    let n = p.rows();
    let eig = F::eigh(p)?;
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let threshold = eps * max;

    let mut kept: Vec<usize> = (0..n)
        .filter(|&i| max > 0.0 && eig.eigenvalues[i].abs() > threshold)
        .collect();
    kept.sort_by(|&i, &j| eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()));

    let eigenvalues: Vec<f64> = kept.iter().map(|&i| eig.eigenvalues[i]).collect();
    let signs: Vec<f64> = eigenvalues.iter().map(|&l| l.signum()).collect();
    let positive = signs.iter().filter(|&&s| s > 0.0).count();
    let inertia = Inertia {
        positive,
        negative: kept.len() - positive,
        zero: n - kept.len(),
    };
    let warnings = eigenvalues
        .iter()
        .filter(|l| l.abs() <= CONDITIONING_WINDOW * threshold)
        .map(|l| {
            format!(
                "eigenvalue {l:e} lies within a factor {CONDITIONING_WINDOW:e} of the cutoff {threshold:e}"
            )
        })
        .collect();
    Ok(KreinBasis {
        vectors: eig.eigenvectors.select_columns(&kept),
        eigenvalues,
        signs,
        cutoff: eps,
        threshold,
        inertia,
        spectrum: eig.eigenvalues,
        warnings,
    })
}

impl<F: Scalar> KreinBasis<F> {
    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    /// Number of kept eigenpairs `m`.
    pub fn kept(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.abs()).collect()
    }

    /// `c_k = |λ_k|^{−1/2}·⟨x, u_k⟩`; the component of `x` in the kernel is
    /// discarded.
    pub fn coordinates(&self, x: &[F]) -> Result<Vec<F>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        Ok((0..self.kept())
            .map(|k| inner(x, &self.vectors.column(k)).scale(self.eigenvalues[k].abs().powf(-0.5)))
            .collect())
    }

    /// `⟨x, y⟩_P = Σ_k conj(d_k)·c_k`.
    pub fn hilbert_form(&self, x: &[F], y: &[F]) -> Result<F> {
        let (c, d) = (self.coordinates(x)?, self.coordinates(y)?);
        Ok(inner(&c, &d))
    }

    /// `[x, y]_P = Σ_k conj(d_k)·s_k·c_k`.
    pub fn krein_form(&self, x: &[F], y: &[F]) -> Result<F> {
        let (c, d) = (self.coordinates(x)?, self.coordinates(y)?);
        let mut acc = F::zero();
        for k in 0..self.kept() {
            acc += d[k].conj() * c[k].scale(self.signs[k]);
        }
        Ok(acc)
    }

    /// `Σ_k w_k·u_k·u_k*`.
    fn spectral_sum(&self, w: &[f64]) -> Matrix<F> {
        &self.vectors.scale_cols(w) * &self.vectors.adjoint()
    }

    /// `|P|^{1/2}`.
    pub fn abs_sqrt(&self) -> Matrix<F> {
        let w: Vec<f64> = self.eigenvalues.iter().map(|l| l.abs().sqrt()).collect();
        self.spectral_sum(&w)
    }

    /// `|P|`.
    pub fn abs(&self) -> Matrix<F> {
        self.spectral_sum(&self.magnitudes())
    }

    /// `σ`.
    pub fn sign(&self) -> Matrix<F> {
        self.spectral_sum(&self.signs)
    }

    /// `π = I − Σ_k u_k·u_k*`.
    pub fn kernel_projection(&self) -> Matrix<F> {
        &Matrix::identity(self.dim()) - &self.spectral_sum(&vec![1.0; self.kept()])
    }

    /// `Σ_k λ_k·u_k·u_k*`.
    pub fn reconstruct(&self) -> Matrix<F> {
        self.spectral_sum(&self.eigenvalues)
    }

    /// `|λ_k|^{1/2}·u_k`, the range vector whose coordinates are `e_k`.
    pub fn range_vector(&self, k: usize) -> Vec<F> {
        let s = self.eigenvalues[k].abs().sqrt();
        self.vectors.column(k).into_iter().map(|x| x.scale(s)).collect()
    }
}
