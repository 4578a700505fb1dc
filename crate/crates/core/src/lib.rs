//! Exact segmenting-description elimination for systems of linear
//! inequalities, and the preference analyses built on it.

pub mod engine;
pub mod error;
pub mod expr;
pub mod rational;

pub use engine::*;
pub use error::{Error, Result};
pub use expr::{parse_relation, parse_relations, LinearExpr, OriginKind, OriginTag, RelOp, Relation, Var, Variables};
pub use rational::{parse_rational, Rational};
pub mod io;
pub mod uta;
pub mod analysis;
