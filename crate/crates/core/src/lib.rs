//! Interference in β-Ginibre wireless networks: exact spectral quantities,
//! samplers, closed-form large-deviation rates and tail estimators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod fading;
pub mod geometry;
pub mod interference;
pub mod numeric;
pub mod rates;
pub mod sampling;
pub mod spectral;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
pub use estimation::{Estimator, SlopeReport, TailEstimate};
pub use fading::{FadingKind, FadingSpec};
pub use geometry::{Disk, PlanarPoint};
pub use interference::{MarkedPattern, NetworkModel};
pub use rates::{LdpRegime, RegimeKind};
pub use sampling::{PointPattern, ProcessKind, RngStream};
pub use spectral::{DiskRestriction, EigenvalueSeq};
