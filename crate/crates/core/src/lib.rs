//! Analytical model of an IR-UWB body-area-network link and a frame-size /
//! PHY-mode optimizer that maximizes energy efficiency under a throughput floor.
//!
//! The layers build on each other: [`frame`] and [`channel`] give frame
//! geometry and bit-error probabilities, [`reliability`] and [`energy`] turn
//! those into success probabilities and Joules, [`metrics`] combines them
//! into efficiency and throughput, and [`optimizer`] searches over frame size
//! and pulses-per-burst. [`sim`], [`output`] and [`config`] drive sweeps.

pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod optimizer;
pub mod output;
pub mod reliability;
pub mod sim;

pub use error::{ModelError, Result};
pub use frame::PhyMode;
pub use metrics::{ModeModel, QosSpec, SystemModel};
pub use optimizer::{cloee, exhaustive_search, Branch, OptResult, SolverConfig};
pub use sim::{run_curves, run_sweep, Scenario, StrategyId, SweepRow};
