//! The Hermitian form `[f, g]_Φ` on truncated Laurent coefficient vectors.
//!
//! A vector `f` stands for `f(z) = Σ_{u=1}^{N} z^{−u} f_u` with `f_u ∈ F^d`.
//! The form is available three ways: the direct coefficient double sum
//! ([`form_coeff`]), the block Gram matrix `A` ([`build_form_matrix`]) and
//! trapezoidal quadrature of the contour integral ([`form_contour`], complex
//! only). Block `(u, v)` of `A` is `Φ₀ + Φ₀*` on the diagonal, `Φ_{v−u}`
//! above it and `Φ*_{u−v}` below it, so `[f, g] = g*·A·f`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, Matrix};
use crate::scalars::{powi, FieldKind, Quaternion, Scalar};
use crate::seriesfn::OperatorSeries;

/// A series together with the truncation radius `r` and block count `N`.
#[derive(Debug, Clone)]
pub struct GramSpec<F> {
    series: OperatorSeries<F>,
    r: f64,
    blocks: usize,
}

impl<F: Scalar> GramSpec<F> {
    /// Requires `0 < r < r0 < 1` and `N ≥ 1`.
    pub fn new(series: OperatorSeries<F>, r: f64, blocks: usize) -> Result<Self> {
        let r0 = series.r0();
        if !(r > 0.0 && r < r0 && r0 < 1.0) {
            return Err(Error::Precondition(format!(
                "radii must satisfy 0 < r < r0 < 1, got r = {r}, r0 = {r0}"
            )));
        }
        if blocks == 0 {
            return Err(Error::Precondition("block count N must be positive".into()));
        }
        Ok(GramSpec { series, r, blocks })
    }

    pub fn series(&self) -> &OperatorSeries<F> {
        &self.series
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r0(&self) -> f64 {
        self.series.r0()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    /// `N·d`.
    pub fn size(&self) -> usize {
        self.blocks * self.dim()
    }

    pub fn with_blocks(&self, blocks: usize) -> Result<Self> {
        GramSpec::new(self.series.clone(), self.r, blocks)
    }
}

/// Coordinate system for the Gram matrix handed to the spectral split.
///
/// `Weighted` splits `P̃ = D·A·D` with `D = diag(r^u)`; `Unweighted` splits
/// `A` itself. The two are congruent, so they agree in exact arithmetic. At a
/// relative cutoff `ε` they differ: the spectrum of `P̃` spans a factor of
/// about `r^{2N}`, so the weighted split discards directions once
/// `r^{2N} < ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coordinates {
    Weighted,
    #[default]
    Unweighted,
}

impl Coordinates {
    /// Radius `ρ` with `D_ρ = diag(ρ^u)`.
    pub fn radius(self, r: f64) -> f64 {
        match self {
            Coordinates::Weighted => r,
            Coordinates::Unweighted => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Coordinates::Weighted => "weighted",
            Coordinates::Unweighted => "unweighted",
        }
    }
}

/// Blocks `f₁ … f_N` of length `d`, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector<F> {
    d: usize,
    data: Vec<F>,
}

impl<F: Scalar> CoeffVector<F> {
    pub fn zeros(blocks: usize, d: usize) -> Self {
        CoeffVector {
            d,
            data: vec![F::zero(); blocks * d],
        }
    }

    /// Panics unless `d > 0` divides the length.
    pub fn from_flat(d: usize, data: Vec<F>) -> Self {
        assert!(d > 0 && data.len().is_multiple_of(d), "flat length must be a multiple of d");
        CoeffVector { d, data }
    }

    pub fn from_blocks(blocks: &[Vec<F>]) -> Result<Self> {
        let d = blocks.first().map_or(0, Vec::len);
        if d == 0 || blocks.iter().any(|b| b.len() != d) {
            return Err(Error::DimensionMismatch("blocks must share a positive length".into()));
        }
        Ok(CoeffVector {
            d,
            data: blocks.concat(),
        })
    }

    /// `e_{u,i}`, 1-based block `u`, 0-based component `i`.
    pub fn unit(blocks: usize, d: usize, u: usize, i: usize) -> Self {
        let mut v = Self::zeros(blocks, d);
        v.block_mut(u)[i] = F::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> usize {
        self.data.len() / self.d
    }

    /// Block `f_u`, 1-based.
    pub fn block(&self, u: usize) -> &[F] {
        &self.data[(u - 1) * self.d..u * self.d]
    }

    pub fn block_mut(&mut self, u: usize) -> &mut [F] {
        &mut self.data[(u - 1) * self.d..u * self.d]
    }

    pub fn as_flat(&self) -> &[F] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<F> {
        self.data
    }

    /// `(Tf)_u = f_{u+1}`.
    pub fn shift_down(&self) -> Self {
        let mut out = Self::zeros(self.blocks(), self.d);
        out.data[..self.data.len() - self.d].copy_from_slice(&self.data[self.d..]);
        out
    }

    /// `(M_{1/b} g)_u = g_{u−1}`, `(M_{1/b} g)_1 = 0`; block `N` is dropped.
    pub fn shift_up(&self) -> Self {
        let mut out = Self::zeros(self.blocks(), self.d);
        out.data[self.d..].copy_from_slice(&self.data[..self.data.len() - self.d]);
        out
    }

    /// `f·q`, every entry multiplied on the right.
    pub fn right_scale(&self, q: F) -> Self {
        CoeffVector {
            d: self.d,
            data: self.data.iter().map(|&x| x * q).collect(),
        }
    }

    /// Largest block index carrying a nonzero entry (0 if none).
    pub fn support_end(&self) -> usize {
        (1..=self.blocks())
            .rev()
            .find(|&u| self.block(u).iter().any(|&x| x != F::zero()))
            .unwrap_or(0)
    }
}

fn check_vector<F: Scalar>(f: &CoeffVector<F>, spec: &GramSpec<F>, name: &str) -> Result<()> {
    if f.blocks() != spec.blocks() || f.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{name} has {} blocks of length {}, expected {} of length {}",
            f.blocks(),
            f.dim(),
            spec.blocks(),
            spec.dim()
        )));
    }
    Ok(())
}

/// `[f, g]` as the direct double sum
/// `Σ_v Σ_{u≤v} ⟨Φ_{v−u} f_v, g_u⟩ + Σ_u Σ_{v≤u} ⟨Φ*_{u−v} f_v, g_u⟩`.
pub fn form_coeff<F: Scalar>(f: &CoeffVector<F>, g: &CoeffVector<F>, spec: &GramSpec<F>) -> Result<F> {
    check_vector(f, spec, "f")?;
    check_vector(g, spec, "g")?;
    let n = spec.blocks();
    let coeffs = spec.series().coeffs();
    let adjoints: Vec<Matrix<F>> = coeffs.iter().map(Matrix::adjoint).collect();
    let m = coeffs.len();
    let mut acc = F::zero();
    for v in 1..=n {
        for u in v.saturating_sub(m - 1).max(1)..=v {
            let phi_f = coeffs[v - u].mul_vec(f.block(v))?;
            acc += inner(&phi_f, g.block(u));
        }
    }
    for u in 1..=n {
        for v in u.saturating_sub(m - 1).max(1)..=u {
            let phi_f = adjoints[u - v].mul_vec(f.block(v))?;
            acc += inner(&phi_f, g.block(u));
        }
    }
    Ok(acc)
}

/// Unweighted Gram matrix `A` and its weighted congruence `P̃ = D·A·D`.
#[derive(Debug, Clone)]
pub struct GramOperator<F> {
    pub a: Matrix<F>,
    pub ptilde: Matrix<F>,
    /// Diagonal of `D`: `r^u` repeated `d` times per block.
    pub weights: Vec<f64>,
    pub r: f64,
    pub d: usize,
}

impl<F: Scalar> GramOperator<F> {
    pub fn blocks(&self) -> usize {
        self.a.rows() / self.d
    }

    pub fn matrix_in(&self, coords: Coordinates) -> &Matrix<F> {
        match coords {
            Coordinates::Weighted => &self.ptilde,
            Coordinates::Unweighted => &self.a,
        }
    }

    /// `P` in coefficient coordinates: `(Pf)_u = r^{2u}(Af)_u`.
    pub fn apply_p(&self, f: &CoeffVector<F>) -> Result<CoeffVector<F>> {
        let af = self.a.mul_vec(f.as_flat())?;
        let out = af
            .into_iter()
            .zip(&self.weights)
            .map(|(x, &w)| x.scale(w * w))
            .collect();
        Ok(CoeffVector::from_flat(self.d, out))
    }

    /// `D_ρ·A·D_ρ` with `D_ρ = diag(ρ^u)`.
    pub fn congruence(&self, rho: f64) -> Matrix<F> {
        let w = block_weights(rho, self.blocks(), self.d);
        self.a.scale_rows(&w).scale_cols(&w)
    }
}

/// `ρ^u` for `u = 1…N`, each repeated `d` times.
pub fn block_weights(rho: f64, blocks: usize, d: usize) -> Vec<f64> {
    (1..=blocks)
        .flat_map(|u| std::iter::repeat_n(rho.powi(u as i32), d))
        .collect()
}

/// Assembles `A` block by block from the lower triangle and mirrors it, so
/// `A = A*` holds exactly.
pub fn build_form_matrix<F: Scalar>(spec: &GramSpec<F>) -> GramOperator<F> {
    let (n, d) = (spec.blocks(), spec.dim());
    let coeffs = spec.series().coeffs();
    let mut a = Matrix::zeros(n * d, n * d);
    let diag = &coeffs[0] + &coeffs[0].adjoint();
    for u in 1..=n {
        for i in 0..d {
            for j in 0..=i {
                let x = diag[(i, j)];
                a[((u - 1) * d + i, (u - 1) * d + j)] = x;
                a[((u - 1) * d + j, (u - 1) * d + i)] = x.conj();
            }
        }
        for v in 1..u {
            let k = u - v;
            if k >= coeffs.len() {
                continue;
            }
            let block = coeffs[k].adjoint();
            for i in 0..d {
                for j in 0..d {
                    let x = block[(i, j)];
                    a[((u - 1) * d + i, (v - 1) * d + j)] = x;
                    a[((v - 1) * d + j, (u - 1) * d + i)] = x.conj();
                }
            }
        }
    }
    let weights = block_weights(spec.r(), n, d);
    let ptilde = a.scale_rows(&weights).scale_cols(&weights);
    GramOperator {
        a,
        ptilde,
        weights,
        r: spec.r(),
        d,
    }
}

fn to_c<F: Scalar>(x: F) -> Complex64 {
    let q = x.to_quaternion();
    Complex64::new(q.w, q.x)
}

fn complex_only<F: Scalar>(what: &str) -> Result<()> {
    match F::FIELD {
        FieldKind::Complex => Ok(()),
        FieldKind::Quaternion => Err(Error::UnsupportedField(format!(
            "{what} is defined for the complex field only"
        ))),
    }
}

/// Kernel grid `C_Φ(a_i, b_j) = (Φ(a_i) + Φ(b_j)*)/(1 − a_i·b̄_j)` on `n`
/// equispaced nodes of `|a| = |b| = r`, reusable across many form
/// evaluations.
#[derive(Debug, Clone)]
pub struct ContourForm {
    nodes: Vec<Complex64>,
    d: usize,
    blocks: usize,
    /// `kernel[j*n + i]` is `C_Φ(a_i, b_j)`, row-major `d×d`.
    kernel: Vec<Vec<Complex64>>,
}

impl ContourForm {
    pub fn new<F: Scalar>(spec: &GramSpec<F>, nodes: usize) -> Result<Self> {
        complex_only::<F>("the contour form")?;
        if nodes < 64 || !nodes.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "node count must be a power of two ≥ 64, got {nodes}"
            )));
        }
        let d = spec.dim();
        let r = spec.r();
        let pts: Vec<Complex64> = (0..nodes)
            .map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / nodes as f64))
            .collect();
        let series: Vec<Matrix<Complex64>> = spec
            .series()
            .coeffs()
            .iter()
            .map(|m| Matrix::from_fn(d, d, |i, j| to_c(m[(i, j)])))
            .collect();
        let series = OperatorSeries::new(series, spec.r0())?;
        let vals: Vec<Matrix<Complex64>> = pts.iter().map(|&z| series.eval(z)).collect();
        let mut kernel = Vec::with_capacity(nodes * nodes);
        for (j, &b) in pts.iter().enumerate() {
            let phib_h = vals[j].adjoint();
            for (i, &a) in pts.iter().enumerate() {
                let denom = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - a * b.conj());
                let m = &vals[i] + &phib_h;
                kernel.push(m.as_slice().iter().map(|&x| x * denom).collect());
            }
        }
        Ok(ContourForm {
            nodes: pts,
            d,
            blocks: spec.blocks(),
            kernel,
        })
    }

    /// `z·f(z) = Σ_u f_u z^{1−u}` at every node.
    fn section(&self, f: &CoeffVector<Complex64>) -> Vec<Vec<Complex64>> {
        self.nodes
            .iter()
            .map(|&z| {
                let zi = z.inv();
                let mut out = vec![Complex64::new(0.0, 0.0); self.d];
                let mut pw = Complex64::new(1.0, 0.0);
                for u in 1..=self.blocks {
                    for (o, &x) in out.iter_mut().zip(f.block(u)) {
                        *o += x * pw;
                    }
                    pw *= zi;
                }
                out
            })
            .collect()
    }

    /// `(1/n²)·Σ_{i,j} (g(b_j)·b_j)*·C_Φ(a_i, b_j)·(f(a_i)·a_i)`.
    ///
    /// With `da = i·a dθ` and `db̄ = −i·b̄ dφ` the factors of `i` cancel and
    /// the double integral becomes a plain average over the node grid.
    pub fn eval(&self, f: &CoeffVector<Complex64>, g: &CoeffVector<Complex64>) -> Result<Complex64> {
        for (v, name) in [(f, "f"), (g, "g")] {
            if v.blocks() != self.blocks || v.dim() != self.d {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has {} blocks of length {}, expected {} of length {}",
                    v.blocks(),
                    v.dim(),
                    self.blocks,
                    self.d
                )));
            }
        }
        let n = self.nodes.len();
        let d = self.d;
        let fa = self.section(f);
        let gb = self.section(g);
        let mut total = Complex64::new(0.0, 0.0);
        for (j, gj) in gb.iter().enumerate() {
            let row = &self.kernel[j * n..(j + 1) * n];
            let mut acc = vec![Complex64::new(0.0, 0.0); d];
            for (k, fi) in row.iter().zip(&fa) {
                for r in 0..d {
                    let mut s = Complex64::new(0.0, 0.0);
                    for c in 0..d {
                        s += k[r * d + c] * fi[c];
                    }
                    acc[r] += s;
                }
            }
            for r in 0..d {
                total += gj[r].conj() * acc[r];
            }
        }
        Ok(total / (n * n) as f64)
    }
}

/// Trapezoidal quadrature of the contour form; see [`ContourForm::eval`].
pub fn form_contour<F: Scalar>(
    f: &CoeffVector<F>,
    g: &CoeffVector<F>,
    spec: &GramSpec<F>,
    nodes: usize,
) -> Result<F> {
    let cf = ContourForm::new(spec, nodes)?;
    let conv = |v: &CoeffVector<F>| {
        CoeffVector::from_flat(v.dim(), v.as_flat().iter().map(|&x| to_c(x)).collect())
    };
    cf.eval(&conv(f), &conv(g)).map(F::from_complex)
}

/// `(g_a c)_u = ā^{u−1}·c` for `u = 1…N`.
pub fn cauchy_vector<F: Scalar>(a: F, c: &[F], r: f64, blocks: usize) -> Result<CoeffVector<F>> {
    if !(a.abs() < r) {
        return Err(Error::Domain(format!("|a| = {} must be below r = {r}", a.abs())));
    }
    if c.is_empty() {
        return Err(Error::DimensionMismatch("empty coefficient vector".into()));
    }
    let abar = a.conj();
    let mut out = CoeffVector::zeros(blocks, c.len());
    let mut pw = F::one();
    for u in 1..=blocks {
        for (o, &x) in out.block_mut(u).iter_mut().zip(c) {
            *o = pw * x;
        }
        pw *= abar;
    }
    Ok(out)
}

/// Closed-form action of `P` on the Cauchy section `ξ/(a − w̄)`, evaluated at
/// `|b| = r`: `(r²/b)·(Φ(b)* + Φ(w̄))·(1 − b̄w̄)⁻¹·ξ`.
///
/// Its Laurent coefficients are `r^{2u}(A·g_w ξ)_u`.
pub fn apply_p_cauchy<F: Scalar>(spec: &GramSpec<F>, w: F, xi: &[F], b: F) -> Result<Vec<F>> {
    complex_only::<F>("the Cauchy-kernel action")?;
    let r = spec.r();
    let (w, b) = (to_c(w), to_c(b));
    if !(w.norm() < r) {
        return Err(Error::Domain(format!("|w| = {} must be below r = {r}", w.norm())));
    }
    if (b.norm() - r).abs() > 1e-12 * r {
        return Err(Error::Domain(format!("|b| = {} must equal r = {r}", b.norm())));
    }
    if xi.len() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "ξ has length {}, expected {}",
            xi.len(),
            spec.dim()
        )));
    }
    let d = spec.dim();
    let series: Vec<Matrix<Complex64>> = spec
        .series()
        .coeffs()
        .iter()
        .map(|m| Matrix::from_fn(d, d, |i, j| to_c(m[(i, j)])))
        .collect();
    let series = OperatorSeries::new(series, spec.r0())?;
    let kernel = &series.eval(b).adjoint() + &series.eval(w.conj());
    let factor = Complex64::new(r * r, 0.0) / b / (Complex64::new(1.0, 0.0) - b.conj() * w.conj());
    let xi_c: Vec<Complex64> = xi.iter().map(|&x| to_c(x)).collect();
    Ok(kernel
        .mul_vec(&xi_c)?
        .into_iter()
        .map(|x| F::from_complex(x * factor))
        .collect())
}

/// `Σ_{u ≤ N−1} ⟨Φ_u* f₁, g_u⟩`, the boundary term in
/// `[f, M_{1/b} g] = [Tf, g] + Σ_u ⟨Φ_u* f₁, g_u⟩`, valid when `g_N = 0`.
pub fn shift_boundary_term<F: Scalar>(
    f: &CoeffVector<F>,
    g: &CoeffVector<F>,
    spec: &GramSpec<F>,
) -> Result<F> {
    check_vector(f, spec, "f")?;
    check_vector(g, spec, "g")?;
    let mut acc = F::zero();
    for u in 1..spec.blocks() {
        let phi = spec.series().coeff(u).adjoint();
        acc += inner(&phi.mul_vec(f.block(1))?, g.block(u));
    }
    Ok(acc)
}

/// `K(p, a) = Σ_{n<terms} pⁿ·(Φ♯(p) + Φ♯(a)*)·āⁿ`.
///
/// Over ℂ the sum converges to `(Φ♯(p) + Φ♯(a)*)/(1 − p·ā)`, and
/// `[g_a ξ, g_p η] = η*·K(p, a)·ξ` in the limit `N → ∞`.
pub fn model_kernel<F: Scalar>(series: &OperatorSeries<F>, p: F, a: F, terms: usize) -> Matrix<F> {
    let sharp = series.sharp();
    let m = &sharp.eval(p) + &sharp.eval(a).adjoint();
    let abar = a.conj();
    let mut acc = Matrix::zeros(m.rows(), m.cols());
    let (mut pl, mut pr) = (F::one(), F::one());
    for _ in 0..terms {
        acc = &acc + &m.left_scale(pl).right_scale(pr);
        pl *= p;
        pr *= abar;
    }
    acc
}

/// `E_z·A·E_w* = Σ_{u,v} z^{u−1}·A_{uv}·w̄^{v−1}`, the kernel carried by a
/// finite Gram matrix.
pub fn truncated_kernel<F: Scalar>(a: &Matrix<F>, d: usize, z: F, w: F) -> Matrix<F> {
    let n = a.rows() / d;
    let zp: Vec<F> = (0..n).map(|k| powi(z, k)).collect();
    let wp: Vec<F> = (0..n).map(|k| powi(w.conj(), k)).collect();
    Matrix::from_fn(d, d, |i, j| {
        let mut acc = F::zero();
        for u in 0..n {
            for v in 0..n {
                acc += zp[u] * a[(u * d + i, v * d + j)] * wp[v];
            }
        }
        acc
    })
}

/// Outcome of [`norm_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBound {
    /// Power-iteration estimate of `‖P̃‖`.
    pub norm_estimate: f64,
    /// `2·M·r0²/(1 − r0²)²`.
    pub bound: f64,
    /// Sampled `max_{|z|=r0} ‖Φ(z)‖`.
    pub m_sup: f64,
    pub pass: bool,
}

/// Compares `‖P̃‖` with `2·M·r0²/(1 − r0²)²`.
///
/// `M` is sampled at `samples` points of `|z| = r0`; over ℍ each of the
/// three coordinate slices `ℂ_i`, `ℂ_j`, `ℂ_k` gets `samples` points.
pub fn norm_bound_check<F: Scalar>(spec: &GramSpec<F>, samples: usize) -> Result<NormBound> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is required".into()));
    }
    let gram = build_form_matrix(spec);
    let norm_estimate = gram.ptilde.op_norm();
    let r0 = spec.r0();
    let axes: Vec<Quaternion> = match F::FIELD {
        FieldKind::Complex => vec![Quaternion::I],
        FieldKind::Quaternion => vec![Quaternion::I, Quaternion::J, Quaternion::K],
    };
    let mut m_sup = 0.0f64;
    for axis in axes {
        let unit = F::from_quaternion(axis).expect("axis lies in the field");
        for k in 0..samples {
            let t = 2.0 * PI * k as f64 / samples as f64;
            let z = F::from_real(r0 * t.cos()) + unit.scale(r0 * t.sin());
            m_sup = m_sup.max(spectral_norm(&spec.series().eval(z))?);
        }
    }
    let bound = 2.0 * m_sup * r0 * r0 / (1.0 - r0 * r0).powi(2);
    Ok(NormBound {
        norm_estimate,
        bound,
        m_sup,
        pass: norm_estimate <= bound,
    })
}

/// `‖M‖₂` from the Hermitian eigendecomposition of `M*M`.
fn spectral_norm<F: Scalar>(m: &Matrix<F>) -> Result<f64> {
    let g = &m.adjoint() * m;
    let g = Matrix::from_fn(g.rows(), g.cols(), |i, j| (g[(i, j)] + g[(j, i)].conj()).scale(0.5));
    let e = F::eigh(&g)?;
    Ok(e.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}
