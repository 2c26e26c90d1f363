//! Build → split → realize → verify, once per truncation order.

use std::fmt;

use krein_core::gram::{model_kernel, norm_bound_check};
use krein_core::realize::{
    coisometry_defect, evaluation_identity_error, kernel_reconstruct, moment_check, realization_eval,
    RealizationRun,
};
use krein_core::{
    realize, Complex64, Error, FieldKind, GramSpec, Matrix, OperatorSeries, Quaternion, RealizeOptions, Scalar,
    Signature,
};
use rayon::prelude::*;

use crate::config::{echo, Coefficients, RunConfig};
use crate::report::{
    Assertion, CoisometryRecord, Environment, EvaluationRecord, InertiaRecord, KernelRecord, NormBoundRecord,
    Record, Report,
};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "KREIN_REALIZE_THREADS";

/// A module error together with the truncation order it occurred at.
#[derive(Debug)]
pub struct PipelineError {
    pub n: usize,
    pub source: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at N = {}: {}", self.n, self.source)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// Kernel tolerance `10·0.9^{2N}·scale`.
pub fn kernel_tolerance(n: usize, scale: f64) -> f64 {
    10.0 * 0.9f64.powi(2 * n as i32) * scale
}

/// Terms of the ⋆-geometric series needed for a `1e−16` tail at `rate`.
fn series_order(rate: f64) -> usize {
    if rate <= 0.0 {
        return 1;
    }
    ((-16.0 * std::f64::consts::LN_10) / rate.ln()).ceil().clamp(64.0, 20_000.0) as usize
}

/// Runs the pipeline on the global rayon pool.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Report, PipelineError> {
    let records = match &cfg.coeffs {
        Coefficients::Complex(c) => run_all::<Complex64>(cfg, c)?,
        Coefficients::Quaternion(c) => run_all::<Quaternion>(cfg, c)?,
    };
    let pass = records.iter().all(Record::pass);
    Ok(Report {
        config: echo(cfg),
        environment: Environment::current(),
        records,
        pass,
    })
}

/// Runs the pipeline on a pool of at most `threads` workers.
pub fn run_pipeline_with_threads(cfg: &RunConfig, threads: Option<usize>) -> Result<Report, PipelineError> {
    match threads {
        None => run_pipeline(cfg),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("thread pool with a positive worker count");
            pool.install(|| run_pipeline(cfg))
        }
    }
}

fn run_all<F: Scalar>(cfg: &RunConfig, coeffs: &[Matrix<F>]) -> Result<Vec<Record>, PipelineError> {
    let first = *cfg.n_list.first().expect("nonempty N_list");
    let at = |n: usize| move |source: Error| PipelineError { n, source };
    let series = OperatorSeries::new(coeffs.to_vec(), cfg.r0).map_err(at(first))?;
    // par_iter keeps the input order, so the merge is ordered by N.
    cfg.n_list
        .par_iter()
        .map(|&n| run_one(cfg, &series, n).map_err(at(n)))
        .collect()
}

fn point<F: Scalar>(p: &[f64; 4]) -> F {
    F::from_quaternion(Quaternion::from(*p)).expect("grid point lies in the field")
}

fn run_one<F: Scalar>(cfg: &RunConfig, series: &OperatorSeries<F>, n: usize) -> Result<Record, Error> {
    let spec = GramSpec::new(series.clone(), cfg.r, n)?;
    let jc = cfg.coefficient_symmetry.clone().map(Signature::new).transpose()?;
    let opts = RealizeOptions {
        cutoff: cfg.cutoff,
        coordinates: cfg.coordinates,
        coefficient_signature: jc.clone(),
    };
    let run = realize(&spec, &opts)?;
    let real = &run.realization;
    let r0_norm = real.r0.op_norm();

    let moment_errors = moment_check(real, spec.series(), cfg.nmax)?;
    let cois = coisometry_defect(real, cfg.coisometry_depth);
    let grid: Vec<F> = cfg.grid.iter().map(point).collect();
    let (kernel, mut warnings) = kernel_checks(&run, &grid, jc.as_ref(), r0_norm)?;
    let evaluation = match jc {
        Some(_) => None,
        None => Some(evaluation_checks(&run, &grid, r0_norm)?),
    };
    let nb = norm_bound_check(&run.spec, cfg.samples)?;
    warnings.splice(0..0, run.basis.warnings.iter().cloned());

    let kernel_tol = kernel_tolerance(n, kernel.scale);
    let max_moment = moment_errors.iter().copied().fold(0.0, f64::max);
    let assertions = vec![
        Assertion::at_most("moment_identity", max_moment, cfg.tolerances.moment),
        Assertion::at_most("coisometry_observable", cois.observable, cfg.tolerances.coisometry),
        Assertion::at_most("kernel_three_way", kernel.max_discrepancy, kernel_tol),
        Assertion::at_most("norm_bound", nb.norm_estimate, nb.bound),
    ];
    let inertia = run.basis.inertia;
    Ok(Record {
        n,
        signature: InertiaRecord {
            positive: inertia.positive,
            negative: inertia.negative,
            zero: inertia.zero,
        },
        kept: run.basis.kept(),
        cutoff_threshold: run.basis.threshold,
        moment_errors,
        evaluation_identity_error: evaluation_identity_error(&run.model, real, cfg.nmax),
        coisometry: CoisometryRecord {
            observable: cois.observable,
            raw: cois.raw,
            subspace_dim: cois.subspace_dim,
        },
        kernel,
        evaluation,
        norm_bound: NormBoundRecord {
            ptilde_norm: nb.norm_estimate,
            bound: nb.bound,
            m_sup: nb.m_sup,
        },
        r0_norm,
        warnings,
        assertions,
    })
}

/// `Some(order)` when the ⋆-series at `p` converges, `None` otherwise.
/// Over ℂ the resolvent is solved directly and needs no order.
fn resolvent_order<F: Scalar>(p: F, r0_norm: f64) -> Option<usize> {
    match F::FIELD {
        FieldKind::Complex => Some(0),
        FieldKind::Quaternion => {
            let rate = p.abs() * r0_norm;
            (rate < 1.0).then(|| series_order(rate))
        }
    }
}

fn kernel_checks<F: Scalar>(
    run: &RealizationRun<F>,
    grid: &[F],
    jc: Option<&Signature>,
    r0_norm: f64,
) -> Result<(KernelRecord, Vec<String>), Error> {
    let max_mod = grid.iter().map(|p| p.abs()).fold(0.0, f64::max);
    let ratio = max_mod * max_mod;
    let terms = if ratio > 0.0 {
        ((-40.0 * std::f64::consts::LN_10) / ratio.ln()).ceil().max(1.0) as usize + 1
    } else {
        1
    };
    let right = |m: Matrix<F>| match jc {
        Some(s) => m.scale_cols(s.signs()),
        None => m,
    };
    let mut warnings = Vec::new();
    let (mut cs, mut cr, mut sr) = (0.0f64, None::<f64>, None::<f64>);
    let mut scale = 1.0f64;
    let mut skipped = 0;
    for &z in grid {
        for &w in grid {
            let closed = right(model_kernel(&run.realized_series, z, w, terms));
            let synth = right(run.model.synthesized_kernel(z, w));
            scale = scale.max(closed.frobenius());
            cs = cs.max((&closed - &synth).frobenius());
            let order = resolvent_order(z, r0_norm).zip(resolvent_order(w, r0_norm)).map(|(a, b)| a.max(b));
            let resolvent = match order {
                Some(o) => match kernel_reconstruct(&run.realization, z, w, o) {
                    Ok(k) => Some(k),
                    Err(Error::Spectral(msg)) => {
                        warnings.push(format!("kernel resolvent skipped: {msg}"));
                        None
                    }
                    Err(e) => return Err(e),
                },
                None => None,
            };
            match resolvent {
                Some(k) => {
                    cr = Some(cr.unwrap_or(0.0).max((&closed - &k).frobenius()));
                    sr = Some(sr.unwrap_or(0.0).max((&synth - &k).frobenius()));
                }
                None => skipped += 1,
            }
        }
    }
    if skipped > 0 {
        warnings.push(format!(
            "{skipped} kernel pairs skipped: |p|·‖R₀‖ = {:.3} ≥ 1 at the outer grid points",
            max_mod * r0_norm
        ));
    }
    let max_discrepancy = [Some(cs), cr, sr].into_iter().flatten().fold(0.0, f64::max);
    Ok((
        KernelRecord {
            closed_vs_synthesized: cs,
            closed_vs_resolvent: cr,
            synthesized_vs_resolvent: sr,
            max_discrepancy,
            scale,
            skipped_pairs: skipped,
        },
        warnings,
    ))
}

fn evaluation_checks<F: Scalar>(run: &RealizationRun<F>, grid: &[F], r0_norm: f64) -> Result<EvaluationRecord, Error> {
    let sharp = run.realized_series.sharp();
    let (mut proof, mut stated) = (0.0f64, 0.0f64);
    let mut skipped = 0;
    for &p in grid {
        let Some(order) = resolvent_order(p, r0_norm) else {
            skipped += 1;
            continue;
        };
        match realization_eval(&run.realization, p, order) {
            Ok(ev) => {
                let target = sharp.eval(p);
                proof = proof.max((&ev.proof_arrangement - &target).frobenius());
                stated = stated.max((&ev.stated_arrangement - &target).frobenius());
            }
            Err(Error::Spectral(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(EvaluationRecord {
        proof_arrangement_error: proof,
        stated_arrangement_error: stated,
        skipped_points: skipped,
    })
}
