//! Model space, point evaluation `C`, backward shift `R₀` and the checks of
//! the coisometric realization.
//!
//! The model space is stored through the Taylor table `T` of its
//! Krein-orthonormal basis `{F_k}`: row block `n` of `T` holds the `n`-th
//! Taylor coefficients of all `F_k`. With `G_ρ = D_ρ·A·D_ρ = Σ λ_k u_k u_k*`
//! the table is `(F_k)_n = ρ^{−(n+1)}·|λ_k|^{1/2}·(u_k)_{n+1}`, so that
//! `T·J·T* = A` on the kept range. Every identity below is then a matrix
//! identity in these coordinates:
//!
//! * `C = T₀` and `S·T = T·R₀` where `S` drops the constant coefficient,
//! * `C·R₀ⁿ·C^{[*]} = Φₙ*` for `n ≥ 1` and `C·C^{[*]} = Φ₀ + Φ₀*`,
//! * `C·(I − zR₀)⁻¹·J·(I − wR₀)^{−*}·C* = Σ z^{u−1}·A_{uv}·w̄^{v−1}`.

use crate::error::{Error, Result};
use crate::gram::{build_form_matrix, Coordinates, GramOperator, GramSpec};
use crate::kreinrange::{spectral_split, KreinBasis};
use crate::linalg::{inner, krein_adjoint, krein_adjoint_between, vec_norm, Matrix, Signature};
use crate::scalars::{FieldKind, Scalar};
use crate::seriesfn::{star_resolvent, OperatorSeries};

/// Taylor table of the Krein-orthonormal basis of the model space.
#[derive(Debug, Clone)]
pub struct ModelSpace<F> {
    /// Coordinate radius `ρ` the basis was computed in.
    pub radius: f64,
    pub d: usize,
    pub blocks: usize,
    /// `(N·d) × m`; row `n·d + i` is component `i` of the `n`-th coefficient.
    pub taylor: Matrix<F>,
    pub signs: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl<F: Scalar> ModelSpace<F> {
    pub fn kept(&self) -> usize {
        self.signs.len()
    }

    /// Row block `n` of the table (`d × m`).
    pub fn coefficient(&self, n: usize) -> Matrix<F> {
        self.taylor.submatrix(n * self.d, 0, self.d, self.kept())
    }

    /// `[F_1(z) … F_m(z)]` as a `d × m` matrix, `Σ zⁿ·T_n`.
    pub fn eval(&self, z: F) -> Matrix<F> {
        let mut acc = self.coefficient(self.blocks - 1);
        for n in (0..self.blocks - 1).rev() {
            acc = &self.coefficient(n) + &acc.left_scale(z);
        }
        acc
    }

    /// `Σ_k s_k·F_k(z)·F_k(w)*`.
    pub fn synthesized_kernel(&self, z: F, w: F) -> Matrix<F> {
        let fz = self.eval(z);
        let fw = self.eval(w);
        &fz.scale_cols(&self.signs) * &fw.adjoint()
    }
}

/// Builds the Taylor table from a basis of `D_ρ·A·D_ρ`, `ρ` taken from
/// `coords`.
pub fn build_model_space<F: Scalar>(
    basis: &KreinBasis<F>,
    spec: &GramSpec<F>,
    coords: Coordinates,
) -> Result<ModelSpace<F>> {
    if basis.dim() != spec.size() {
        return Err(Error::DimensionMismatch(format!(
            "basis lives in dimension {}, spec has N·d = {}",
            basis.dim(),
            spec.size()
        )));
    }
    let rho = coords.radius(spec.r());
    let (n, d) = (spec.blocks(), spec.dim());
    let magnitudes = basis.magnitudes();
    let col_scale: Vec<f64> = magnitudes.iter().map(|l| l.sqrt()).collect();
    let row_scale: Vec<f64> = (0..n)
        .flat_map(|b| std::iter::repeat_n(rho.powi(-(b as i32 + 1)), d))
        .collect();
    let taylor = basis.vectors.scale_cols(&col_scale).scale_rows(&row_scale);
    Ok(ModelSpace {
        radius: rho,
        d,
        blocks: n,
        taylor,
        signs: basis.signs.clone(),
        magnitudes,
    })
}

/// `C`, column `k` equal to `F_k(0)`.
pub fn build_c<F: Scalar>(model: &ModelSpace<F>) -> Matrix<F> {
    model.coefficient(0)
}

/// `(R₀)_{lk} = ρ⁻¹·|λ_k|^{1/2}·|λ_l|^{−1/2}·⟨S u_k, u_l⟩` with `S` the block
/// left shift.
pub fn build_r0<F: Scalar>(model: &ModelSpace<F>, basis: &KreinBasis<F>) -> Result<Matrix<F>> {
    if basis.kept() != model.kept() || basis.dim() != model.blocks * model.d {
        return Err(Error::DimensionMismatch("model space and basis differ".into()));
    }
    let (n, d, m) = (basis.dim(), model.d, model.kept());
    let u = &basis.vectors;
    let su = Matrix::from_fn(n, m, |i, k| if i + d < n { u[(i + d, k)] } else { F::zero() });
    let g = &u.adjoint() * &su;
    let sq: Vec<f64> = model.magnitudes.iter().map(|l| l.sqrt()).collect();
    let inv_sq: Vec<f64> = sq.iter().map(|s| 1.0 / s).collect();
    Ok(g.scale_rows(&inv_sq).scale_cols(&sq).scale(1.0 / model.radius))
}

/// `(C, R₀, J)` together with the skew part of `Φ₀` and the coefficient-space
/// signature `J_C` (identity unless a Krein coefficient space is used).
#[derive(Debug, Clone)]
pub struct Realization<F> {
    pub c: Matrix<F>,
    pub r0: Matrix<F>,
    pub signs: Signature,
    pub skew: Matrix<F>,
    pub coefficient_signature: Signature,
}

impl<F: Scalar> Realization<F> {
    pub fn state_dim(&self) -> usize {
        self.r0.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }

    /// `C^{[*]} = J·C*·J_C`.
    pub fn c_adjoint(&self) -> Matrix<F> {
        krein_adjoint_between(&self.c, &self.signs, &self.coefficient_signature)
            .expect("signature lengths fixed at construction")
    }

    /// `R₀^{[*]} = J·R₀*·J`.
    pub fn r0_adjoint(&self) -> Matrix<F> {
        krein_adjoint(&self.r0, &self.signs).expect("signature length fixed at construction")
    }

    /// `C·R₀ⁿ·C^{[*]}` for `n = 0…nmax`.
    pub fn moments(&self, nmax: usize) -> Vec<Matrix<F>> {
        let cadj = self.c_adjoint();
        let mut left = self.c.clone();
        let mut out = Vec::with_capacity(nmax + 1);
        for n in 0..=nmax {
            if n > 0 {
                left = &left * &self.r0;
            }
            out.push(&left * &cadj);
        }
        out
    }
}

/// `(Φ₀ − Φ₀*)/2`.
pub fn skew_part<F: Scalar>(series: &OperatorSeries<F>) -> Matrix<F> {
    let p0 = &series.coeffs()[0];
    (p0 - &p0.adjoint()).scale(0.5)
}

pub fn build_realization<F: Scalar>(
    model: &ModelSpace<F>,
    basis: &KreinBasis<F>,
    series: &OperatorSeries<F>,
    coefficient_signature: Option<Signature>,
) -> Result<Realization<F>> {
    let jc = coefficient_signature.unwrap_or_else(|| Signature::identity(model.d));
    if jc.len() != model.d {
        return Err(Error::DimensionMismatch(format!(
            "coefficient signature has length {}, expected {}",
            jc.len(),
            model.d
        )));
    }
    Ok(Realization {
        c: build_c(model),
        r0: build_r0(model, basis)?,
        signs: Signature::new(model.signs.clone())?,
        skew: skew_part(series),
        coefficient_signature: jc,
    })
}

/// How [`realization_eval`] computed the resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    /// LU solve of `(I − pR₀)`; complex field.
    Resolvent,
    /// Truncated ⋆-geometric series; quaternionic field.
    StarSeries,
}

#[derive(Debug, Clone)]
pub struct RealizationEval<F> {
    /// `G(p) = C ⋆ (I − pR₀)^{−⋆} ⋆ C^{[*]}`.
    pub g: Matrix<F>,
    /// `G(p) − ½·C·C^{[*]} − skew`, equal to `Φ♯(p)`.
    pub proof_arrangement: Matrix<F>,
    /// `G(−p) − ½·C·C^{[*]} − skew`, i.e. `½C(I − pR₀)(I + pR₀)^{−1}C^{[*]} − skew`.
    pub stated_arrangement: Matrix<F>,
    pub method: EvalMethod,
    /// Geometric tail bound of the series (`None` for the resolvent).
    pub tail_bound: Option<f64>,
}

/// `C ⋆ (I − pR₀)^{−⋆}` as a `d × m` matrix.
fn observability_row<F: Scalar>(
    real: &Realization<F>,
    p: F,
    order: usize,
) -> Result<(Matrix<F>, EvalMethod, Option<f64>)> {
    let m = real.state_dim();
    if m == 0 {
        return Ok((Matrix::zeros(real.output_dim(), 0), EvalMethod::Resolvent, None));
    }
    match F::FIELD {
        FieldKind::Complex => {
            let lhs = &Matrix::identity(m) - &real.r0.left_scale(p);
            // C·(I − pR₀)⁻¹ = ((I − pR₀)^{−*}·C*)*
            let y = lhs.adjoint().solve(&real.c.adjoint()).map_err(|e| {
                Error::Spectral(format!("I − pR₀ is not invertible at |p| = {}: {e}", p.abs()))
            })?;
            Ok((y.adjoint(), EvalMethod::Resolvent, None))
        }
        FieldKind::Quaternion => {
            let s = star_resolvent(&real.c, &real.r0, p, order).map_err(|e| match e {
                Error::Divergence { rate } => Error::Spectral(format!(
                    "|p|·‖R₀‖ = {rate:.6} ≥ 1, the ⋆-series does not converge"
                )),
                other => other,
            })?;
            Ok((s.partial_sum, EvalMethod::StarSeries, Some(s.tail_bound)))
        }
    }
}

/// Evaluates the realization at `p` and both signed arrangements of the
/// skew term.
///
/// Over ℂ the resolvent is solved directly, so `‖R₀‖` may exceed `1/|p|` as
/// long as `I − pR₀` is invertible. Over ℍ the ⋆-series needs
/// `|p|·‖R₀‖ < 1`.
pub fn realization_eval<F: Scalar>(
    real: &Realization<F>,
    p: F,
    order: usize,
) -> Result<RealizationEval<F>> {
    let cadj = real.c_adjoint();
    let (yp, method, tail) = observability_row(real, p, order)?;
    let (ym, _, tail_m) = observability_row(real, -p, order)?;
    let g = &yp * &cadj;
    let gm = &ym * &cadj;
    let half = (&real.c * &cadj).scale(0.5);
    let shift = &half + &real.skew;
    Ok(RealizationEval {
        proof_arrangement: &g - &shift,
        stated_arrangement: &gm - &shift,
        g,
        method,
        tail_bound: match (tail, tail_m) {
            (Some(a), Some(b)) => Some(a.max(b) * cadj.op_norm()),
            _ => None,
        },
    })
}

/// `e₀ = ‖C·C^{[*]} − (Φ₀ + J_C·Φ₀*·J_C)‖_F` and
/// `e_n = ‖C·R₀ⁿ·C^{[*]} − J_C·Φₙ*·J_C‖_F` for `n = 1…nmax`.
pub fn moment_check<F: Scalar>(
    real: &Realization<F>,
    series: &OperatorSeries<F>,
    nmax: usize,
) -> Result<Vec<f64>> {
    if series.dim() != real.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "series has d = {}, realization has d = {}",
            series.dim(),
            real.output_dim()
        )));
    }
    let jc = real.coefficient_signature.signs();
    let conj_jc = |m: &Matrix<F>| m.scale_rows(jc).scale_cols(jc);
    let moments = real.moments(nmax);
    Ok(moments
        .iter()
        .enumerate()
        .map(|(n, m)| {
            let target = if n == 0 {
                &series.coeff(0) + &conj_jc(&series.coeff(0).adjoint())
            } else {
                conj_jc(&series.coeff(n).adjoint())
            };
            (m - &target).frobenius()
        })
        .collect())
}

/// `C(I − zR₀)^{−⋆}·((I − wR₀)^{−⋆})^{[*]}·C^{[*]}`, assembled as
/// `Y(z)·Y(w)^{[*]}` with `Y(p) = C ⋆ (I − pR₀)^{−⋆}`.
pub fn kernel_reconstruct<F: Scalar>(
    real: &Realization<F>,
    z: F,
    w: F,
    order: usize,
) -> Result<Matrix<F>> {
    let (yz, _, _) = observability_row(real, z, order)?;
    let (yw, _, _) = observability_row(real, w, order)?;
    let yw_adj = krein_adjoint_between(&yw, &real.signs, &real.coefficient_signature)?;
    Ok(&yz * &yw_adj)
}

/// Coisometry defects of `R₀` in the Krein metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoisometryDefect {
    /// `‖(R₀R₀^{[*]} − I)·Q‖_F` on the observable subspace.
    pub observable: f64,
    /// `‖R₀R₀^{[*]} − I‖_F` on the whole state space.
    pub raw: f64,
    /// Dimension of the observable subspace.
    pub subspace_dim: usize,
}

/// Relative threshold below which a Gram–Schmidt residual counts as
/// dependent.
const RANK_TOL: f64 = 1e-10;

/// Measures `R₀R₀^{[*]} − I` on `span{R₀^{[*]n}·C^{[*]}·c : n ≤ K}`, which is
/// orthonormalized in the Euclidean metric first.
pub fn coisometry_defect<F: Scalar>(real: &Realization<F>, k: usize) -> CoisometryDefect {
    let m = real.state_dim();
    if m == 0 {
        return CoisometryDefect {
            observable: 0.0,
            raw: 0.0,
            subspace_dim: 0,
        };
    }
    let radj = real.r0_adjoint();
    let defect = &(&real.r0 * &radj) - &Matrix::identity(m);

    let mut block = real.c_adjoint();
    let mut q: Vec<Vec<F>> = Vec::new();
    for n in 0..=k {
        if n > 0 {
            block = &radj * &block;
        }
        for j in 0..block.cols() {
            let mut v = block.column(j);
            let norm0 = vec_norm(&v);
            if norm0 == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for b in &q {
                    let coeff = inner(&v, b);
                    for (vi, &bi) in v.iter_mut().zip(b) {
                        *vi -= bi * coeff;
                    }
                }
            }
            let nv = vec_norm(&v);
            if nv > RANK_TOL * norm0 {
                q.push(v.into_iter().map(|x| x.scale(1.0 / nv)).collect());
            }
        }
    }
    let mut qm = Matrix::zeros(m, q.len());
    for (j, col) in q.iter().enumerate() {
        qm.set_column(j, col);
    }
    CoisometryDefect {
        observable: (&defect * &qm).frobenius(),
        raw: defect.frobenius(),
        subspace_dim: q.len(),
    }
}

/// `‖C_A R₀ᴬⁿ C_A^{[*]} − C_B R₀ᴮⁿ C_B^{[*]}‖_F` for `n = 0…nmax`.
pub fn moment_equiv<F: Scalar>(a: &Realization<F>, b: &Realization<F>, nmax: usize) -> Result<Vec<f64>> {
    if a.output_dim() != b.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "realizations act on d = {} and d = {}",
            a.output_dim(),
            b.output_dim()
        )));
    }
    Ok(a.moments(nmax)
        .iter()
        .zip(b.moments(nmax))
        .map(|(x, y)| (x - &y).frobenius())
        .collect())
}

/// `max_{n ≤ nmax} ‖T_n − C·R₀ⁿ‖_F`: the Taylor coefficients of the basis
/// against the realization.
pub fn evaluation_identity_error<F: Scalar>(model: &ModelSpace<F>, real: &Realization<F>, nmax: usize) -> f64 {
    let mut left = real.c.clone();
    let mut worst = 0.0f64;
    for n in 0..=nmax.min(model.blocks - 1) {
        if n > 0 {
            left = &left * &real.r0;
        }
        worst = worst.max((&model.coefficient(n) - &left).frobenius());
    }
    worst
}

/// Options for [`realize`].
#[derive(Debug, Clone)]
pub struct RealizeOptions {
    pub cutoff: f64,
    pub coordinates: Coordinates,
    /// `J_C`; when present the pipeline runs on `Φ·J_C`.
    pub coefficient_signature: Option<Signature>,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            cutoff: 1e-12,
            coordinates: Coordinates::Unweighted,
            coefficient_signature: None,
        }
    }
}

/// Every stage of one truncation order.
#[derive(Debug, Clone)]
pub struct RealizationRun<F> {
    /// The series actually realized (`Φ·J_C` when a signature is given).
    pub realized_series: OperatorSeries<F>,
    pub spec: GramSpec<F>,
    pub gram: GramOperator<F>,
    pub basis: KreinBasis<F>,
    pub model: ModelSpace<F>,
    pub realization: Realization<F>,
}

/// Gram matrix → spectral split → model space → realization.
pub fn realize<F: Scalar>(spec: &GramSpec<F>, opts: &RealizeOptions) -> Result<RealizationRun<F>> {
    let (realized_series, work_spec) = match &opts.coefficient_signature {
        Some(jc) => {
            if jc.len() != spec.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient signature has length {}, expected {}",
                    jc.len(),
                    spec.dim()
                )));
            }
            let s = spec.series().mul_right(&jc.to_matrix())?;
            let ws = GramSpec::new(s.clone(), spec.r(), spec.blocks())?;
            (s, ws)
        }
        None => (spec.series().clone(), spec.clone()),
    };
    let gram = build_form_matrix(&work_spec);
    let rho = opts.coordinates.radius(work_spec.r());
    let target = match opts.coordinates {
        Coordinates::Weighted => gram.ptilde.clone(),
        Coordinates::Unweighted => gram.congruence(rho),
    };
    let basis = spectral_split(&target, opts.cutoff)?;
    let model = build_model_space(&basis, &work_spec, opts.coordinates)?;
    let mut realization = build_realization(&model, &basis, spec.series(), opts.coefficient_signature.clone())?;
    realization.skew = skew_part(spec.series());
    Ok(RealizationRun {
        realized_series,
        spec: work_spec,
        gram,
        basis,
        model,
        realization,
    })
}
