//! Entanglement localization after a beamsplitter coupling to an incoherent
//! surrounding photon.
//!
//! The crate has two independent routes to every protocol state:
//!
//! - [`protocol`]: the analytic pipeline (coupling, environment measurement,
//!   local filtration) plus the closed-form concurrences and probabilities.
//! - [`fock`]: a brute-force two-photon bosonic simulation of the
//!   beamsplitter with post-selection, which also covers partially
//!   indistinguishable environments and Hong-Ou-Mandel interference.
//!
//! [`sweep`], [`verify`] and [`report`] drive both routes over parameter
//! grids; independent grid points are evaluated with rayon when the
//! `parallel` feature is enabled.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fock;
pub mod measures;
pub mod protocol;
pub mod qmat;
pub mod random;
pub mod report;
pub mod states;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use protocol::{CouplingConfig, FilterConfig, Stage, StageOutcome};
pub use qmat::{ComplexMatrix, DensityMatrix};
pub use states::{Pol, TwoQubitState};
