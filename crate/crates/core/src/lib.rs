//! Sparse-gradient optimizers and a deterministic parameter-server simulator.
//!
//! The crate has three layers:
//!
//! * numeric kernels: sparse/dense vectors, logistic loss, regularizers
//!   ([`sparse`], [`objectives`]);
//! * optimizer steps: delayed SGD, composite mirror descent with closed-form
//!   proximal updates, and FTRL-proximal in both its follow-the-leader and
//!   per-coordinate lazy forms ([`optim`]);
//! * experiment plumbing: a parameter-server simulator with pluggable delay
//!   schedules and an equivalent multi-threaded runner, dataset generation and
//!   LIBSVM I/O, and regret/bound bookkeeping ([`sim`], [`data`], [`metrics`]).
//!
//! Everything that consumes randomness is seeded, and simulated runs are
//! bit-reproducible: a threaded run can dump its realized delay trace and be
//! replayed through the simulator to the identical final model.

mod error;

pub mod data;
pub mod metrics;
pub mod objectives;
pub mod optim;
pub mod sim;
pub mod sparse;

pub use error::{Error, Result};
