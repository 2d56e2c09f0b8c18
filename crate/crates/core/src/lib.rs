//! Exact cutting-and-stacking machinery: interval-set algebra over the
//! rationals, scheme parsing, a rank-one tower engine with certified
//! correlation enclosures, and the set constructions built on top of it.

pub mod certified;
pub mod constructions;
pub mod engine;
pub mod error;
pub mod interval_set;
pub mod products;
pub mod scalar;
pub mod scheme;
pub mod set_expr;

pub use certified::CertifiedValue;
pub use engine::{Engine, GridOracle, OrbitResult, PartialImage, Stage};
pub use error::{Error, Result};
pub use interval_set::IntervalSet;
pub use scalar::Scalar;
pub use scheme::{parse_scheme, SchemeSpec, StageRule};
pub use set_expr::{parse_set_expr, SetExpr};
