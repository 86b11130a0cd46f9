//! Parameter-server execution: delay schedules, run configuration, the
//! deterministic single-threaded simulator, and the multi-threaded runner.
//!
//! Both runners drive the same step functions and the same worker-side
//! gradient computation. The simulator realizes an explicit delay schedule;
//! the threaded runner lets real interleaving produce the delays, records
//! them, and any such trace replayed through the simulator reproduces the
//! threaded run's final model exactly.

mod config;
mod runner;
mod schedule;
mod threaded;

pub use config::{sample_stream, Algo, InitKind, SimConfig};
pub use runner::{run_simulated, RunOptions, RunOutput, SimEvent, TxAccounting, TxBaseline};
pub use schedule::{read_trace, write_trace, DelaySchedule};
pub use threaded::run_threaded;
