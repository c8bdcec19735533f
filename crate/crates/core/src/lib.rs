//! Power and timing model of a low-power microcontroller with adaptive
//! reverse body bias and retention-capable SRAM.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abb;
pub mod activity;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod device;
pub mod error;
pub mod modes;
pub mod report;
pub mod signoff;
pub mod sram;
pub mod trace;

pub use abb::{
    regulate_to_lock, regulator_step, retention_retarget, RegulatorConfig, RegulatorState,
};
pub use activity::{evaluate_trace_power, ActivityEnergies, PowerBreakdown, Table2Targets};
pub use calibration::{
    calibrate_models, calibrate_with, AnchorSet, Calibration, CalibrationPolicy,
};
pub use device::{
    effective_threshold, leakage_power, max_frequency, thermal_voltage, BiasPair, CornerLabel,
    DeviceParams, OperatingPoint, ProcessCorner,
};
pub use error::{Error, NoLockReason, Result};
pub use modes::{mode_power, simulate_schedule, ModeSchedule, PlatformConfig, PowerMode};
pub use signoff::{
    bounding_corner_check, corner_sweep, shmoo_scan, ShmooCell, ShmooGrid, SignoffGrid,
};
pub use sram::{BankConfig, SramMacroConfig, SramPowerState};
pub use trace::{generate_trace, AccessRecord, Trace, TraceGenConfig};
