//! JSON run configuration.
//!
//! Matrices are row-major nested arrays. Complex entries are `[re, im]`,
//! quaternion entries `[w, x, y, z]`. Every error names the JSON path it
//! refers to.

use std::fmt;

use krein_core::{Complex64, Coordinates, FieldKind, Matrix, Quaternion, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_CUTOFF: f64 = 1e-12;
pub const DEFAULT_NMAX: usize = 6;
pub const DEFAULT_COISOMETRY_DEPTH: usize = 8;
pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_MOMENT_TOL: f64 = 1e-6;
pub const DEFAULT_COISOMETRY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Coefficients in the field named by the config.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Complex(Vec<Matrix<Complex64>>),
    Quaternion(Vec<Matrix<Quaternion>>),
}

/// Evaluation points, stored as quaternions; complex configs only use `w, x`.
pub type Point = [f64; 4];

/// Tolerances asserted by the pipeline. The kernel tolerance is derived
/// from `N` and is not configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub moment: f64,
    pub coisometry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            moment: DEFAULT_MOMENT_TOL,
            coisometry: DEFAULT_COISOMETRY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub field: FieldKind,
    pub dim: usize,
    pub coeffs: Coefficients,
    pub r: f64,
    pub r0: f64,
    pub n_list: Vec<usize>,
    pub cutoff: f64,
    pub coefficient_symmetry: Option<Vec<f64>>,
    pub nmax: usize,
    pub coisometry_depth: usize,
    pub samples: usize,
    pub coordinates: Coordinates,
    pub grid: Vec<Point>,
    pub tolerances: Tolerances,
    pub output: Option<String>,
}

/// `{0, 0.3r, 0.6r, 0.9r}` in modulus, spread over distinct directions.
pub fn default_grid(field: FieldKind, r: f64) -> Vec<Point> {
    match field {
        FieldKind::Complex => vec![
            [0.0, 0.0, 0.0, 0.0],
            [0.3 * r, 0.0, 0.0, 0.0],
            [0.0, 0.6 * r, 0.0, 0.0],
            [0.9 * r * 2f64.cos(), 0.9 * r * 2f64.sin(), 0.0, 0.0],
        ],
        FieldKind::Quaternion => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            vec![
                [0.0, 0.0, 0.0, 0.0],
                [0.3 * r, 0.0, 0.0, 0.0],
                [0.0, 0.6 * r * h, 0.6 * r * h, 0.0],
                [0.9 * r * 1f64.cos(), 0.0, 0.0, 0.9 * r * 1f64.sin()],
            ]
        }
    }
}

pub fn parse_config(text: &[u8]) -> Result<RunConfig, ConfigError> {
    let text = std::str::from_utf8(text).map_err(|e| err("$", format!("not UTF-8: {e}")))?;
    let root: Value = serde_json::from_str(text).map_err(|e| err("$", format!("malformed JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| err("$", "expected an object"))?;

    const KNOWN: [&str; 15] = [
        "field",
        "dim",
        "coeffs",
        "r",
        "r0",
        "N_list",
        "cutoff",
        "coefficient_symmetry",
        "nmax",
        "coisometry_K",
        "samples",
        "coordinates",
        "grid",
        "tolerances",
        "output",
    ];
    if let Some(k) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(err(&format!("$.{k}"), "unknown field"));
    }

    let field = match required(obj, "field")?.as_str() {
        Some("complex") => FieldKind::Complex,
        Some("quaternion") => FieldKind::Quaternion,
        _ => return Err(err("$.field", "expected \"complex\" or \"quaternion\"")),
    };
    let dim = positive_int(required(obj, "dim")?, "$.dim")?;
    let coeffs = match field {
        FieldKind::Complex => Coefficients::Complex(parse_coeffs(required(obj, "coeffs")?, dim, 2, |e| {
            Complex64::new(e[0], e[1])
        })?),
        FieldKind::Quaternion => Coefficients::Quaternion(parse_coeffs(required(obj, "coeffs")?, dim, 4, |e| {
            Quaternion::new(e[0], e[1], e[2], e[3])
        })?),
    };

    let r = number(required(obj, "r")?, "$.r")?;
    let r0 = number(required(obj, "r0")?, "$.r0")?;
    if !(r > 0.0 && r < r0 && r0 < 1.0) {
        return Err(err("$.r", format!("need 0 < r < r0 < 1, got r = {r}, r0 = {r0}")));
    }

    let n_val = required(obj, "N_list")?;
    let n_arr = n_val.as_array().ok_or_else(|| err("$.N_list", "expected an array"))?;
    if n_arr.is_empty() {
        return Err(err("$.N_list", "must be nonempty"));
    }
    let mut n_list = Vec::with_capacity(n_arr.len());
    for (i, v) in n_arr.iter().enumerate() {
        let path = format!("$.N_list[{i}]");
        let n = positive_int(v, &path)?;
        if let Some(&prev) = n_list.last() {
            if n <= prev {
                return Err(err(&path, format!("N_list must be strictly ascending, {n} follows {prev}")));
            }
        }
        n_list.push(n);
    }

    let cutoff = match obj.get("cutoff") {
        Some(v) => number(v, "$.cutoff")?,
        None => DEFAULT_CUTOFF,
    };
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(err("$.cutoff", format!("must lie in (0, 1), got {cutoff}")));
    }

    let coefficient_symmetry = match obj.get("coefficient_symmetry") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let arr = v.as_array().ok_or_else(|| err("$.coefficient_symmetry", "expected an array"))?;
            if arr.len() != dim {
                return Err(err(
                    "$.coefficient_symmetry",
                    format!("length {} does not match dim = {dim}", arr.len()),
                ));
            }
            let mut signs = Vec::with_capacity(dim);
            for (i, s) in arr.iter().enumerate() {
                let path = format!("$.coefficient_symmetry[{i}]");
                let x = number(s, &path)?;
                if x != 1.0 && x != -1.0 {
                    return Err(err(&path, format!("expected ±1, got {x}")));
                }
                signs.push(x);
            }
            Some(signs)
        }
    };

    let nmax = optional_int(obj, "nmax", DEFAULT_NMAX)?;
    let coisometry_depth = optional_int(obj, "coisometry_K", DEFAULT_COISOMETRY_DEPTH)?;
    let samples = optional_int(obj, "samples", DEFAULT_SAMPLES)?;
    if samples == 0 {
        return Err(err("$.samples", "must be positive"));
    }

    let coordinates = match obj.get("coordinates").map(Value::as_str) {
        None | Some(Some("unweighted")) => Coordinates::Unweighted,
        Some(Some("weighted")) => Coordinates::Weighted,
        _ => return Err(err("$.coordinates", "expected \"weighted\" or \"unweighted\"")),
    };

    let grid = match obj.get("grid") {
        None => default_grid(field, r),
        Some(v) => {
            let arr = v.as_array().ok_or_else(|| err("$.grid", "expected an array"))?;
            let width = if field == FieldKind::Complex { 2 } else { 4 };
            let mut pts = Vec::with_capacity(arr.len());
            for (i, p) in arr.iter().enumerate() {
                let path = format!("$.grid[{i}]");
                let e = entry(p, width, &path)?;
                let mut q = [0.0; 4];
                q[..width].copy_from_slice(&e);
                let modulus = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                if modulus >= r {
                    return Err(err(&path, format!("point modulus {modulus} must be below r = {r}")));
                }
                pts.push(q);
            }
            if pts.is_empty() {
                return Err(err("$.grid", "must be nonempty"));
            }
            pts
        }
    };

    let tolerances = match obj.get("tolerances") {
        None => Tolerances::default(),
        Some(v) => {
            let t = v.as_object().ok_or_else(|| err("$.tolerances", "expected an object"))?;
            let mut tol = Tolerances::default();
            for (k, x) in t {
                let path = format!("$.tolerances.{k}");
                let val = number(x, &path)?;
                if !(val > 0.0) {
                    return Err(err(&path, "must be positive"));
                }
                match k.as_str() {
                    "moment" => tol.moment = val,
                    "coisometry" => tol.coisometry = val,
                    _ => return Err(err(&path, "unknown tolerance")),
                }
            }
            tol
        }
    };

    let output = match obj.get("output") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(err("$.output", "expected a string")),
    };

    Ok(RunConfig {
        field,
        dim,
        coeffs,
        r,
        r0,
        n_list,
        cutoff,
        coefficient_symmetry,
        nmax,
        coisometry_depth,
        samples,
        coordinates,
        grid,
        tolerances,
        output,
    })
}

fn required<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value, ConfigError> {
    obj.get(key).ok_or_else(|| err(&format!("$.{key}"), "missing required field"))
}

fn number(v: &Value, path: &str) -> Result<f64, ConfigError> {
    let x = v.as_f64().ok_or_else(|| err(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(err(path, "must be finite"));
    }
    Ok(x)
}

fn positive_int(v: &Value, path: &str) -> Result<usize, ConfigError> {
    match v.as_u64() {
        Some(n) if n > 0 => Ok(n as usize),
        _ => Err(err(path, "expected a positive integer")),
    }
}

fn optional_int(obj: &serde_json::Map<String, Value>, key: &str, default: usize) -> Result<usize, ConfigError> {
    match obj.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| err(&format!("$.{key}"), "expected a nonnegative integer")),
    }
}

fn entry(v: &Value, width: usize, path: &str) -> Result<Vec<f64>, ConfigError> {
    let arr = v.as_array().ok_or_else(|| err(path, format!("expected an array of {width} numbers")))?;
    if arr.len() != width {
        return Err(err(path, format!("expected {width} components, got {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn parse_coeffs<F: Scalar>(
    v: &Value,
    dim: usize,
    width: usize,
    make: impl Fn(&[f64]) -> F,
) -> Result<Vec<Matrix<F>>, ConfigError> {
    let list = v.as_array().ok_or_else(|| err("$.coeffs", "expected an array of matrices"))?;
    if list.is_empty() {
        return Err(err("$.coeffs", "needs at least one coefficient"));
    }
    let mut out = Vec::with_capacity(list.len());
    for (n, m) in list.iter().enumerate() {
        let mpath = format!("$.coeffs[{n}]");
        let rows = m.as_array().ok_or_else(|| err(&mpath, "expected an array of rows"))?;
        if rows.len() != dim {
            return Err(err(&mpath, format!("expected {dim} rows, got {}", rows.len())));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let rpath = format!("{mpath}[{i}]");
            let cols = row.as_array().ok_or_else(|| err(&rpath, "expected an array of entries"))?;
            if cols.len() != dim {
                return Err(err(&rpath, format!("expected {dim} entries, got {}", cols.len())));
            }
            for (j, e) in cols.iter().enumerate() {
                data.push(make(&entry(e, width, &format!("{rpath}[{j}]"))?));
            }
        }
        out.push(Matrix::from_vec(dim, dim, data));
    }
    Ok(out)
}

/// Echo of the configuration, in the same encoding as the input.
pub fn echo(cfg: &RunConfig) -> Value {
    use serde_json::json;
    let coeffs: Value = match &cfg.coeffs {
        Coefficients::Complex(ms) => ms
            .iter()
            .map(|m| {
                (0..m.rows())
                    .map(|i| (0..m.cols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())
                    .collect()
            })
            .collect::<Vec<Vec<Vec<Value>>>>()
            .into(),
        Coefficients::Quaternion(ms) => ms
            .iter()
            .map(|m| {
                (0..m.rows())
                    .map(|i| (0..m.cols()).map(|j| json!(m[(i, j)].to_array())).collect())
                    .collect()
            })
            .collect::<Vec<Vec<Vec<Value>>>>()
            .into(),
    };
    let width = if cfg.field == FieldKind::Complex { 2 } else { 4 };
    let grid: Vec<Value> = cfg.grid.iter().map(|p| json!(p[..width].to_vec())).collect();
    json!({
        "field": cfg.field.to_string(),
        "dim": cfg.dim,
        "coeffs": coeffs,
        "r": cfg.r,
        "r0": cfg.r0,
        "N_list": cfg.n_list,
        "cutoff": cfg.cutoff,
        "coefficient_symmetry": cfg.coefficient_symmetry,
        "nmax": cfg.nmax,
        "coisometry_K": cfg.coisometry_depth,
        "samples": cfg.samples,
        "coordinates": cfg.coordinates.name(),
        "grid": grid,
        "tolerances": cfg.tolerances,
        "output": cfg.output,
    })
}
