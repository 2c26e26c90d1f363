use krein_core::gram::model_kernel;
use krein_core::realize::{
    evaluation_identity_error, kernel_reconstruct, moment_check, moment_equiv, realization_eval, RealizationRun,
};
use krein_core::{realize, Complex64, Coordinates, GramSpec, Matrix, OperatorSeries, Quaternion, RealizeOptions, Scalar};
use proptest::prelude::*;

type C = Complex64;
type Q = Quaternion;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

fn run<F: Scalar>(coeffs: Vec<Matrix<F>>, n: usize) -> RealizationRun<F> {
    let spec = GramSpec::new(OperatorSeries::new(coeffs, 0.8).unwrap(), 0.5, n).unwrap();
    realize(&spec, &RealizeOptions::default()).unwrap()
}

fn scalar<F: Scalar>(xs: &[F]) -> Vec<Matrix<F>> {
    xs.iter().map(|&x| Matrix::from_vec(1, 1, vec![x])).collect()
}

#[test]
fn constant_series_evaluates_to_two_everywhere() {
    let r = run(scalar(&[c(1.0)]), 16);
    for p in [c(0.0), c(0.3), C::new(-0.1, 0.4), C::from_polar(0.45, 2.5)] {
        let ev = realization_eval(&r.realization, p, 0).unwrap();
        assert!((ev.g[(0, 0)] - c(2.0)).norm() < 1e-14);
        assert!((ev.proof_arrangement[(0, 0)] - c(1.0)).norm() < 1e-14);
    }
}

#[test]
fn linear_kernel_at_origin() {
    let r = run(scalar(&[c(1.0), c(3.0)]), 64);
    let k = r.model.synthesized_kernel(c(0.0), c(0.0));
    assert!((k[(0, 0)] - c(2.0)).norm() < 1e-8);
}

#[test]
fn kernel_three_way_on_grid() {
    let coeffs = vec![
        Matrix::from_rows(&[vec![c(1.0), C::new(0.2, -0.1)], vec![c(0.0), C::new(0.5, 0.3)]]).unwrap(),
        Matrix::from_rows(&[vec![c(0.4), c(0.0)], vec![C::new(0.1, 0.1), c(-0.7)]]).unwrap(),
        Matrix::from_rows(&[vec![c(0.0), c(0.3)], vec![c(0.2), c(0.1)]]).unwrap(),
    ];
    let rr = 0.5;
    for n in [16, 32] {
        let r = run(coeffs.clone(), n);
        let grid = [c(0.0), c(0.3 * rr), C::new(0.0, 0.6 * rr), C::from_polar(0.9 * rr, 2.0)];
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for &z in &grid {
            for &w in &grid {
                let closed = model_kernel(&r.realized_series, z, w, 400);
                let synth = r.model.synthesized_kernel(z, w);
                let res = kernel_reconstruct(&r.realization, z, w, 0).unwrap();
                scale = scale.max(closed.frobenius());
                worst = worst
                    .max((&closed - &synth).frobenius())
                    .max((&closed - &res).frobenius())
                    .max((&synth - &res).frobenius());
            }
        }
        assert!(worst <= 10.0 * 0.9f64.powi(2 * n as i32) * scale, "N = {n}: {worst:e}");
    }
}

#[test]
fn weighted_and_unweighted_agree_on_moments() {
    let spec = GramSpec::new(OperatorSeries::scalar(&[c(1.0), c(3.0)], 0.8).unwrap(), 0.5, 12).unwrap();
    let a = realize(&spec, &RealizeOptions::default()).unwrap();
    let opts = RealizeOptions {
        coordinates: Coordinates::Weighted,
        ..Default::default()
    };
    let b = realize(&spec, &opts).unwrap();
    assert_eq!(a.basis.inertia, b.basis.inertia);
    let e = moment_equiv(&a.realization, &b.realization, 6).unwrap();
    assert!(e.iter().all(|&x| x < 1e-9), "{e:?}");
}

#[test]
fn quaternion_kernel_matches_closed_form() {
    let r = run(scalar(&[Q::ONE, Q::new(0.0, 0.2, 0.5, -0.1)]), 32);
    let pts = [Q::ZERO, Q::new(0.1, 0.0, 0.1, 0.0), Q::new(0.0, 0.0, 0.0, 0.2)];
    for &z in &pts {
        for &w in &pts {
            let closed = model_kernel(&r.realized_series, z, w, 200);
            let synth = r.model.synthesized_kernel(z, w);
            let res = kernel_reconstruct(&r.realization, z, w, 400).unwrap();
            assert!((&closed - &synth).max_abs() < 1e-12);
            assert!((&synth - &res).max_abs() < 1e-12);
        }
    }
}

fn arb_series(d: usize) -> impl Strategy<Value = Vec<Matrix<C>>> {
    proptest::collection::vec(proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d), 1..4).prop_map(
        move |cs| {
            cs.into_iter()
                .map(|m| Matrix::from_vec(d, d, m.into_iter().map(|(a, b)| C::new(a, b)).collect()))
                .collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn realization_invariants(coeffs in arb_series(2)) {
        let r = run(coeffs, 20);
        let b = &r.basis;
        for k in 0..b.kept() {
            for l in 0..b.kept() {
                let v = b.krein_form(&b.range_vector(k), &b.range_vector(l)).unwrap();
                let expect = if k == l { b.signs[k] } else { 0.0 };
                prop_assert!((v - c(expect)).norm() <= 1e-12);
            }
        }
        let e = moment_check(&r.realization, r.spec.series(), 6).unwrap();
        let scale = r.spec.series().max_coeff_norm().max(1.0);
        prop_assert!(e.iter().all(|&x| x <= 1e-9 * scale), "{:?}", e);
        prop_assert!(evaluation_identity_error(&r.model, &r.realization, 6) <= 1e-9 * scale);
    }
}
