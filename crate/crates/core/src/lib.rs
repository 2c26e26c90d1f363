//! Krein-space state realizations of operator-valued power series over ℂ and ℍ.

pub mod error;
pub mod gram;
pub mod kreinrange;
pub mod linalg;
pub mod realize;
pub mod scalars;
pub mod seriesfn;

pub use error::{Error, Result};
pub use gram::{Coordinates, GramSpec};
pub use kreinrange::{Inertia, KreinBasis};
pub use linalg::{EigDecomposition, Matrix, Signature};
pub use num_complex::Complex64;
pub use realize::{realize, Realization, RealizeOptions};
pub use scalars::{FieldKind, Quaternion, Scalar, SliceForm};
pub use seriesfn::OperatorSeries;
