//! Experiment plumbing: sweep configuration, parallel sweeps, MPS files and
//! bound reports.

pub mod config;
pub mod persist;
pub mod report;
pub mod sweep;

pub use config::{NRange, PartialConfig, SweepConfig};
pub use persist::{load_mps, save_mps};
pub use report::{report_bounds, BoundsReport, ReportOptions};
pub use sweep::{run_sweep, SweepOutput, SweepRow};
