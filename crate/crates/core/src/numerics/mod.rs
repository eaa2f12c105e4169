//! Deterministic quadrature over semi-infinite intervals and bracketed
//! root-finding for monotone functions.
//!
//! Every routine here is a pure function of its arguments. Identical inputs
//! produce bit-identical outputs.

mod quadrature;
mod root;

pub use quadrature::{
    integrate_interval, integrate_semiinf, try_integrate_interval, try_integrate_semiinf,
    QuadratureSpec,
};
pub use root::{find_root_monotone, Monotonicity, RootSpec};
