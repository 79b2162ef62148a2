// Negated float comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod lemmas;
pub mod model;
pub mod scenario;
pub mod spectral;
pub mod timestepper;
