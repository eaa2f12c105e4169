//! Capacity regions of fading Gaussian multi-access and broadcast channels
//! with full channel state information, with emphasis on the low-power
//! regime.
//!
//! All rates are in nats per symbol and all noise powers are normalized to
//! one.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bc;
pub mod error;
pub mod fading;
pub mod mac;
pub mod montecarlo;
pub mod numerics;
pub mod region;
pub mod single_user;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
pub use fading::{ChannelSpec, FadingModel, GfrLimit};
pub use region::{RatePoint, RegionBoundary, RegionKind};
