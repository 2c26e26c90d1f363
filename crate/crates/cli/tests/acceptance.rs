//! Acceptance criteria. Prints one PASS/FAIL line per criterion followed by
//! the measured quantities, and exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use krein_core::gram::{
    apply_p_cauchy, build_form_matrix, cauchy_vector, form_coeff, norm_bound_check, CoeffVector, ContourForm,
};
use krein_core::linalg::{chi_embed, herm_eig, quat_herm_eig};
use krein_core::realize::{coisometry_defect, kernel_reconstruct, moment_check};
use krein_core::scalars::chi_scalar;
use krein_core::seriesfn::{slice_components, star_inv_linear, star_resolvent};
use krein_core::{realize, Complex64, GramSpec, Matrix, OperatorSeries, Quaternion, RealizeOptions, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;
type Q = Quaternion;

const R: f64 = 0.5;
const R0: f64 = 0.8;
const CUTOFF: f64 = 1e-12;

/// Measured quantities of one criterion.
#[derive(Default)]
struct Checks {
    lines: Vec<String>,
    failed: bool,
}

impl Checks {
    fn at_most(&mut self, label: &str, value: f64, tol: f64) {
        let ok = value <= tol;
        self.failed |= !ok;
        self.lines.push(format!("{} {label}: {value:.3e} <= {tol:.1e}", mark(ok)));
    }

    fn at_least(&mut self, label: &str, value: f64, floor: f64) {
        let ok = value >= floor;
        self.failed |= !ok;
        self.lines.push(format!("{} {label}: {value:.3e} >= {floor:.1e}", mark(ok)));
    }

    fn holds(&mut self, label: &str, ok: bool) {
        self.failed |= !ok;
        self.lines.push(format!("{} {label}", mark(ok)));
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok  "
    } else {
        "FAIL"
    }
}

fn opts() -> RealizeOptions {
    RealizeOptions {
        cutoff: CUTOFF,
        ..Default::default()
    }
}

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn rand_c(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    Q::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

fn rand_series<F: Scalar>(d: usize, deg: usize, rng: &mut ChaCha8Rng, draw: fn(&mut ChaCha8Rng) -> F) -> OperatorSeries<F> {
    let cs = (0..=deg).map(|_| Matrix::from_fn(d, d, |_, _| draw(rng))).collect();
    OperatorSeries::new(cs, R0).unwrap()
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn constant_case(ck: &mut Checks) {
    let spec = GramSpec::new(OperatorSeries::scalar(&[c(1.0)], R0).unwrap(), R, 32).unwrap();
    let run = realize(&spec, &opts()).unwrap();
    ck.holds(
        &format!("signature {:?} == (32, 0, 0)", run.basis.inertia.as_tuple()),
        run.basis.inertia.as_tuple() == (32, 0, 0),
    );
    let e = moment_check(&run.realization, spec.series(), 8).unwrap();
    ck.at_most("e0 = |CC[*] - 2|", e[0], 1e-12);
    ck.at_most("max e_n, n = 1..8", max(&e[1..]), 1e-12);
    let d = coisometry_defect(&run.realization, 8);
    ck.at_most("observable coisometry defect, K = 8", d.observable, 1e-12);
    let k = kernel_reconstruct(&run.realization, c(0.2), c(0.1), 0).unwrap();
    ck.at_most("|K(0.2, 0.1) - 2/(1 - 0.02)|", (k[(0, 0)] - c(2.0 / 0.98)).norm(), 1e-10);
}

fn indefinite_case(ck: &mut Checks) {
    let series = OperatorSeries::scalar(&[c(1.0), c(3.0)], R0).unwrap();
    let p = build_form_matrix(&GramSpec::new(series.clone(), R, 2).unwrap()).ptilde;
    let det = (p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)]).re;
    ck.holds(&format!("leading 2x2 determinant {det:.6e} < 0"), det < 0.0);
    ck.at_most("|det + 5 r^6|", (det + 5.0 * R.powi(6)).abs(), 1e-15);

    let mut errors = Vec::new();
    for n in [16, 32, 64] {
        let spec = GramSpec::new(series.clone(), R, n).unwrap();
        let run = realize(&spec, &opts()).unwrap();
        let inertia = run.basis.inertia;
        ck.holds(&format!("N = {n}: signature {:?} has n- >= 1", inertia.as_tuple()), inertia.negative >= 1);
        errors.push(moment_check(&run.realization, spec.series(), 6).unwrap());
    }
    let (e32, e64) = (&errors[1], &errors[2]);
    ck.at_most("N = 64: max e_n, n <= 6", max(e64), 1e-6);
    ck.lines.push(format!("     e_n at N = 32: {}", fmt_list(e32)));
    ck.lines.push(format!("     e_n at N = 64: {}", fmt_list(e64)));
    ck.at_least("shrink max e_n(N = 32) / max e_n(N = 64)", max(e32) / max(e64), 10.0);
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ")
}

fn oracle_equivalence(ck: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 64;
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for s in 0..10 {
        let d = 1 + s % 2;
        let deg = rng.gen_range(0..=8);
        let spec = GramSpec::new(rand_series(d, deg, &mut rng, rand_c), R, n).unwrap();
        let contour = ContourForm::new(&spec, 512).unwrap();
        for _ in 0..10 {
            // f_u = r^u·φ_u keeps the boundary values of order one.
            let draw = |rng: &mut ChaCha8Rng| {
                let mut v = CoeffVector::zeros(n, d);
                for u in 1..=n {
                    for x in v.block_mut(u) {
                        *x = rand_c(rng) * R.powi(u as i32);
                    }
                }
                v
            };
            let f = draw(&mut rng);
            let g = draw(&mut rng);
            let exact = form_coeff(&f, &g, &spec).unwrap();
            let quad = contour.eval(&f, &g).unwrap();
            worst = worst.max((quad - exact).norm() / (1.0 + exact.norm()));
            pairs += 1;
        }
    }
    ck.at_most(&format!("max |contour - coeff| / (1 + |value|) over {pairs} pairs"), worst, 1e-10);
}

fn norm_bound(ck: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ratio = 0.0f64;
    let mut all = true;
    for _ in 0..20 {
        let deg = rng.gen_range(0..=3);
        let spec = GramSpec::new(rand_series(2, deg, &mut rng, rand_c), R, 64).unwrap();
        let nb = norm_bound_check(&spec, 256).unwrap();
        all &= nb.pass;
        worst_ratio = worst_ratio.max(nb.norm_estimate / nb.bound);
    }
    ck.holds("||P~|| <= 2 M r0^2 / (1 - r0^2)^2 for 20 random series", all);
    ck.at_most("max ||P~|| / bound", worst_ratio, 1.0);
}

fn quaternion_pipeline(ck: &mut Checks) {
    let spec = GramSpec::new(OperatorSeries::scalar(&[Q::ONE, Q::J.scale(0.5)], R0).unwrap(), R, 64).unwrap();
    let run = realize(&spec, &opts()).unwrap();
    let e = moment_check(&run.realization, spec.series(), 6).unwrap();
    ck.at_most("max e_n, n <= 6", max(&e), 1e-6);
    for (name, m) in [("A", &run.gram.a), ("P~", &run.gram.ptilde)] {
        let eig = quat_herm_eig(m).unwrap();
        ck.at_most(&format!("eigen residual of {name}"), eig.residual(m), 1e-10);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (p, q) = (rand_q(&mut rng), rand_q(&mut rng));
        let lhs = chi_scalar(p * q);
        let (a, b) = (chi_scalar(p), chi_scalar(q));
        let mut err = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let prod = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                err = err.max((lhs[i][j] - prod).norm());
            }
        }
        worst = worst.max(err / (1.0 + p.abs() * q.abs()));
    }
    ck.at_most("scalar chi homomorphism, 10^4 pairs", worst, 1e-13);

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = Matrix::from_fn(4, 4, |_, _| rand_q(&mut rng));
        let b = Matrix::from_fn(4, 4, |_, _| rand_q(&mut rng));
        let err = (&chi_embed(&(&a * &b)) - &(&chi_embed(&a) * &chi_embed(&b))).frobenius();
        worst = worst.max(err / (1.0 + a.frobenius() * b.frobenius()));
    }
    ck.at_most("matrix chi homomorphism, 100 pairs", worst, 1e-13);

    let (mut worst_neg, mut worst_pair) = (0.0f64, 0.0f64);
    let mut indefinite_kept = true;
    for k in 0..50 {
        let b = Matrix::from_fn(6, 6, |_, _| rand_q(&mut rng));
        let mut m = &b.adjoint() * &b;
        if k % 2 == 1 {
            m = &m - &Matrix::identity(6).scale(m.frobenius() / 6.0);
        }
        let scale = m.frobenius();
        let qe = quat_herm_eig(&m).unwrap();
        let ce = herm_eig(&chi_embed(&m)).unwrap();
        for (i, &l) in qe.eigenvalues.iter().enumerate() {
            worst_pair = worst_pair.max((ce.eigenvalues[2 * i] - l).abs() / scale);
            worst_pair = worst_pair.max((ce.eigenvalues[2 * i + 1] - l).abs() / scale);
        }
        if k % 2 == 0 {
            worst_neg = worst_neg.max(-ce.eigenvalues[0] / scale);
        } else {
            indefinite_kept &= (qe.eigenvalues[0] < 0.0) == (ce.eigenvalues[0] < 0.0);
        }
    }
    ck.at_most("chi(B*B) negative part / ||B*B||", worst_neg.max(0.0), 1e-13);
    ck.at_most("chi spectrum = doubled quaternionic spectrum", worst_pair, 1e-13);
    ck.holds("indefinite M has indefinite chi(M)", indefinite_kept);
}

fn star_calculus(ck: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let dim = if k < 50 { 1 } else { 4 };
        let t = Matrix::from_fn(dim, dim, |_, _| rand_q(&mut rng));
        let p = rand_q(&mut rng);
        let p = p.scale(rng.gen_range(0.05..0.5) / (p.abs() * t.op_norm()));
        let lin = star_inv_linear(&t, p, 80).unwrap();
        let res = star_resolvent(&Matrix::identity(dim), &t, p, 80).unwrap();
        worst = worst.max(lin.discrepancy.unwrap()).max(res.discrepancy.unwrap());
    }
    ck.at_most("series vs S-resolvent, 50 scalar + 50 4x4", worst, 1e-10);

    let unit = |rng: &mut ChaCha8Rng| loop {
        let v = Q::new(0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.abs() > 0.1 {
            return v.scale(1.0 / v.abs());
        }
    };
    let (mut axis_err, mut parity_err) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let f = rand_series(2, rng.gen_range(0..=4), &mut rng, rand_q);
        let (x, y) = (rng.gen_range(-0.5..0.5), rng.gen_range(0.01..0.5));
        let (i1, i2) = (unit(&mut rng), unit(&mut rng));
        let (a1, b1) = slice_components(&f, x, y, i1).unwrap();
        let (a2, b2) = slice_components(&f, x, y, i2).unwrap();
        let (a3, b3) = slice_components(&f, x, -y, i1).unwrap();
        axis_err = axis_err.max((&a1 - &a2).max_abs()).max((&b1 - &b2).max_abs());
        parity_err = parity_err.max((&a1 - &a3).max_abs()).max((&b1 + &b3).max_abs());
    }
    ck.at_most("slice components axis independence", axis_err, 1e-12);
    ck.at_most("alpha even / beta odd in y", parity_err, 1e-12);
}

fn cauchy_oracle(ck: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 64;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let deg = rng.gen_range(0..=3);
        let spec = GramSpec::new(rand_series(2, deg, &mut rng, rand_c), R, n).unwrap();
        let gram = build_form_matrix(&spec);
        let interior = n - 1 - deg;
        let xi = [rand_c(&mut rng), rand_c(&mut rng)];
        for w in [c(0.0), c(0.1), C::new(0.0, 0.2)] {
            let pf = gram.apply_p(&cauchy_vector(w, &xi, R, n).unwrap()).unwrap();
            for k in 0..64 {
                let b = C::from_polar(R, 2.0 * PI * k as f64 / 64.0);
                let closed = apply_p_cauchy(&spec, w, &xi, b).unwrap();
                for i in 0..2 {
                    let series: C = (1..=interior).map(|u| pf.block(u)[i] * b.powi(-(u as i32))).sum();
                    worst = worst.max((closed[i] - series).norm() / (1.0 + closed[i].norm()));
                }
            }
        }
    }
    ck.at_most("closed form vs A * Cauchy coefficients", worst, 1e-9);
}

fn shift_relation_for<F: Scalar>(draw: fn(&mut ChaCha8Rng) -> F, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 20;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let deg = rng.gen_range(0..=3);
        let spec = GramSpec::new(rand_series(2, deg, &mut rng, draw), R, n).unwrap();
        let mut f = CoeffVector::zeros(n, 2);
        let mut g = CoeffVector::zeros(n, 2);
        for u in 2..n {
            for i in 0..2 {
                f.block_mut(u)[i] = draw(&mut rng);
                g.block_mut(u)[i] = draw(&mut rng);
            }
        }
        let lhs = form_coeff(&f.shift_down(), &g, &spec).unwrap();
        let rhs = form_coeff(&f, &g.shift_up(), &spec).unwrap();
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    worst
}

fn shift_relation(ck: &mut Checks) {
    ck.at_most("[Tf, g] vs [f, M g], complex", shift_relation_for(rand_c, 8), 1e-13);
    ck.at_most("[Tf, g] vs [f, M g], quaternion", shift_relation_for(rand_q, 9), 1e-13);
}

type Criterion = (u32, &'static str, fn(&mut Checks), Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "constant case", constant_case, Some(Duration::from_secs(1))),
        (2, "indefinite case", indefinite_case, Some(Duration::from_secs(5))),
        (3, "contour vs coefficient form", oracle_equivalence, Some(Duration::from_secs(2))),
        (4, "norm bound", norm_bound, None),
        (5, "quaternionic pipeline", quaternion_pipeline, Some(Duration::from_secs(10))),
        (6, "star calculus", star_calculus, None),
        (7, "Cauchy kernel action", cauchy_oracle, None),
        (8, "shift relation", shift_relation, None),
    ];
    let mut failures = 0;
    for (k, title, run, limit) in criteria {
        let mut ck = Checks::default();
        let start = Instant::now();
        run(&mut ck);
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            ck.at_most("runtime [s]", elapsed.as_secs_f64(), limit.as_secs_f64());
        }
        let status = if ck.failed { "FAIL" } else { "PASS" };
        println!("{status} criterion {k}: {title} ({:.3} s)", elapsed.as_secs_f64());
        for line in &ck.lines {
            println!("    {line}");
        }
        failures += ck.failed as u32;
    }
    println!("{} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
