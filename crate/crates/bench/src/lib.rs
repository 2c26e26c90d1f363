//! Fixed problems shared by the benchmarks under `benches/`.

use krein_cli::{parse_config, RunConfig};
use krein_core::{Complex64, GramSpec, OperatorSeries, Quaternion};

/// `Φ(z) = 1 + 3z` at `r = 0.5`, `r0 = 0.8`.
pub fn linear_spec(blocks: usize) -> GramSpec<Complex64> {
    let s = OperatorSeries::scalar(&[Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)], 0.8).expect("valid series");
    GramSpec::new(s, 0.5, blocks).expect("valid spec")
}

/// `Φ(p) = 1 + p·j/2` at `r = 0.5`, `r0 = 0.8`.
pub fn quaternion_spec(blocks: usize) -> GramSpec<Quaternion> {
    let s = OperatorSeries::scalar(&[Quaternion::ONE, Quaternion::J.scale(0.5)], 0.8).expect("valid series");
    GramSpec::new(s, 0.5, blocks).expect("valid spec")
}

/// CLI sweep of `Φ(z) = 1 + 3z` over `n_list`.
pub fn linear_config(n_list: &[usize]) -> RunConfig {
    let list: Vec<String> = n_list.iter().map(usize::to_string).collect();
    let text = format!(
        r#"{{"field":"complex","dim":1,"coeffs":[[[[1,0]]],[[[3,0]]]],"r":0.5,"r0":0.8,"N_list":[{}]}}"#,
        list.join(",")
    );
    parse_config(text.as_bytes()).expect("valid config")
}
