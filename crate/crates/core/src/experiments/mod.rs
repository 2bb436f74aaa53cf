//! Numerical experiments: ε-sweeps, the worked examples and the oracle self-test.

pub mod config;
pub mod fit;
pub mod selftest;
pub mod sweep;
pub mod worked;

pub use config::{EpsGrid, SweepConfig, SweepOverrides};
pub use selftest::{cmd_selftest, SelftestReport};
pub use sweep::{cmd_sweep, run_sweep, SweepReport};
pub use worked::{cmd_example1, cmd_example2, Check, Example1Report, Example2Report};
