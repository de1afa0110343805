//! Two-scale simulation of wall-shear-stress driven plaque growth with
//! parallel-in-time integration on the macro scale.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the command line lives in the companion `plaque-cli` crate.
//!
//! Layout:
//!
//! * [`kinematics`]: multiplicative growth split and Saint Venant–Kirchhoff stresses.
//! * [`microflow`]: the surrogate heartbeat-scale flow problem and its periodicity loop.
//! * [`growth`]: the scalar ODE and the reaction-diffusion growth models.
//! * [`twoscale`]: the serial two-scale driver.
//! * [`parareal`]: standard, re-usage and heuristic-coarse parareal.
//! * [`costs`]: cost ledger and closed-form cost/speedup calculators.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod costs;
pub mod error;
pub mod growth;
pub mod kinematics;
pub mod microflow;
pub mod parareal;
pub mod twoscale;

mod math;

pub use costs::{CostLedger, CostModelParams, Level, LedgerSnapshot};
pub use error::{Error, Result};
pub use growth::field::{Field, FieldState, Grid, PdeModel};
pub use growth::{GrowthModel, GrowthParams, InterfaceProfile, OdeModel, OdeRate, ScalarState};
pub use microflow::{Channel, GrowthSample, MicroParams, MicroState, Periodicity};
pub use parareal::{Executor, Mode, PararealConfig, PararealReport, Sequential, StopOn, StoppingCriterion};
pub use twoscale::{CoarseMode, Schedule, Trajectory, TrajectoryRow, TwoScale};

/// Seconds per day; scenario files use days, everything internal uses seconds.
pub const SECONDS_PER_DAY: f64 = 86_400.0;
