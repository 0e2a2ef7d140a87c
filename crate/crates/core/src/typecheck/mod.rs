//! Type inference and pattern coverage.

pub mod coverage;
pub mod infer;
pub mod types;

pub use coverage::{
    check_coverage, coverage_report, CoverageError, CoverageReport, RedundancyWarning, Witness,
};
pub use infer::{infer, CtorInfo, DataInfo, LiteralType, TypeError, TypedProgram, BUILTIN_TYPES};
pub use types::{display_types, unify, Scheme, Subst, TVar, Type, UnifyError};
