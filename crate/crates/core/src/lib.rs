//! One-dimensional arterial flow through a segment whose outlet is a
//! stenosis.
//!
//! * [`model`]: pressure law, eigenvalues, Riemann transforms, fundamental diagram.
//! * [`boundary`]: inlet flow closure and the static, dynamic and
//!   non-reflecting outlet closures.
//! * [`solver`]: first-order HLL finite-volume integrator with
//!   characteristic boundary ghosts.
//! * [`lwr`]: scalar Godunov solver for the fundamental-diagram reduction.
//! * [`scenario`]: configuration, inlet waveforms, sensor readout and CSV output.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod lwr;
pub mod model;
pub mod roots;
pub mod scenario;
pub mod solver;

pub use model::{FlowState, OutletModel, Regime, RiemannPair, StenosisParams, VesselParams};
