//! Retention-capable SRAM macros: power-state machine, staged wake-up with
//! in-rush limiting, leakage per state and retention-controller area.

use std::fmt;

use crate::device::{leakage_power, BiasPair, DeviceParams, OperatingPoint};
use crate::error::{Error, Result};

pub const MACRO_SIZES_KIB: [u32; 4] = [1, 2, 4, 8];
pub const BANK_KIB: u32 = 32;
pub const N_BANKS: u32 = 4;
pub const BANK_BYTES: u32 = BANK_KIB * 1024;
/// Array density of the memory, KiB per mm².
pub const ARRAY_DENSITY_KIB_PER_MM2: f64 = 468.0;
/// Area share of the retention controller in a 4 KiB macro.
pub const CONTROLLER_SHARE_4KIB: f64 = 0.021;
pub const DEFAULT_SEGMENTS: u32 = 8;
pub const DEFAULT_WAKE_S: f64 = 200e-9;
/// Rail capacitance re-charged on wake-up, F per KiB.
pub const MACRO_CAPACITANCE_PER_KIB: f64 = 10e-12;
pub const DEFAULT_CURRENT_LIMIT_A: f64 = 0.2e-3;
/// Power-switch leakage left in power-down, as a fraction of the Active
/// macro leakage.
pub const DEFAULT_POWERDOWN_RESIDUAL: f64 = 0.008;

#[derive(Debug, Clone, PartialEq)]
pub struct SramMacroConfig {
    pub size_kib: u32,
    pub n_power_segments: u32,
    /// Rail capacitance switched in by one power segment, F.
    pub segment_capacitance: f64,
    /// Peak in-rush budget per stage, A.
    pub current_limit: f64,
    /// Time between enabling consecutive segments, s. Also the switch time
    /// constant of each stage.
    pub stage_spacing: f64,
    pub controller_area: f64,
    pub array_area_per_kib: f64,
    pub powerdown_residual: f64,
}

/// Controller area solved from the 4 KiB overhead share.
pub fn default_controller_area() -> f64 {
    let array = 4.0 / ARRAY_DENSITY_KIB_PER_MM2;
    CONTROLLER_SHARE_4KIB * array / (1.0 - CONTROLLER_SHARE_4KIB)
}

impl SramMacroConfig {
    /// Default configuration for a macro of `size_kib`, with the segment
    /// capacitance derived from the macro size.
    pub fn new(size_kib: u32) -> Result<Self> {
        Self::with_segments(
            size_kib,
            DEFAULT_SEGMENTS,
            DEFAULT_WAKE_S / DEFAULT_SEGMENTS as f64,
        )
    }

    /// Split the macro rail over `n_segments` stages spaced `stage_spacing` apart.
    pub fn with_segments(size_kib: u32, n_segments: u32, stage_spacing: f64) -> Result<Self> {
        if n_segments == 0 {
            return Err(Error::invalid(
                "sram config",
                "n_power_segments must be >= 1",
            ));
        }
        let cfg = SramMacroConfig {
            size_kib,
            n_power_segments: n_segments,
            segment_capacitance: MACRO_CAPACITANCE_PER_KIB * size_kib as f64 / n_segments as f64,
            current_limit: DEFAULT_CURRENT_LIMIT_A,
            stage_spacing,
            controller_area: default_controller_area(),
            array_area_per_kib: 1.0 / ARRAY_DENSITY_KIB_PER_MM2,
            powerdown_residual: DEFAULT_POWERDOWN_RESIDUAL,
        };
        if !MACRO_SIZES_KIB.contains(&size_kib) {
            return Err(Error::invalid(
                "sram config",
                format!("macro size {size_kib} KiB not in {{1, 2, 4, 8}}"),
            ));
        }
        Ok(cfg)
    }

    /// Checks the staged-wake invariants. A single-segment macro is
    /// representable so its in-rush can be evaluated, but fails here.
    pub fn validate(&self) -> Result<()> {
        if !MACRO_SIZES_KIB.contains(&self.size_kib) {
            return Err(Error::invalid(
                "sram config",
                format!("macro size {}", self.size_kib),
            ));
        }
        if self.n_power_segments < 2 {
            return Err(Error::invalid(
                "sram config",
                "n_power_segments must be >= 2",
            ));
        }
        if !(self.current_limit > 0.0) {
            return Err(Error::invalid("sram config", "current_limit must be > 0"));
        }
        if !(self.stage_spacing > 0.0 && self.segment_capacitance > 0.0) {
            return Err(Error::invalid(
                "sram config",
                "stage timing and capacitance must be > 0",
            ));
        }
        if !(0.0..1.0).contains(&self.powerdown_residual) {
            return Err(Error::invalid(
                "sram config",
                "powerdown_residual outside [0, 1)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerState {
    Active,
    Retention,
    PowerDown,
    WakingUp(u32),
}

impl fmt::Display for PowerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerState::Active => write!(f, "Active"),
            PowerState::Retention => write!(f, "Retention"),
            PowerState::PowerDown => write!(f, "PowerDown"),
            PowerState::WakingUp(s) => write!(f, "WakingUp({s})"),
        }
    }
}

/// Settled states a transition may be requested into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SettledState {
    Active,
    Retention,
    PowerDown,
}

impl SettledState {
    pub const ALL: [SettledState; 3] = [
        SettledState::Active,
        SettledState::Retention,
        SettledState::PowerDown,
    ];
}

impl From<SettledState> for PowerState {
    fn from(s: SettledState) -> Self {
        match s {
            SettledState::Active => PowerState::Active,
            SettledState::Retention => PowerState::Retention,
            SettledState::PowerDown => PowerState::PowerDown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SramPowerState {
    state: PowerState,
    contents_valid: bool,
}

impl SramPowerState {
    /// Freshly powered macro with undefined contents.
    pub fn powered_down() -> Self {
        SramPowerState {
            state: PowerState::PowerDown,
            contents_valid: false,
        }
    }

    pub fn active(contents_valid: bool) -> Self {
        SramPowerState {
            state: PowerState::Active,
            contents_valid,
        }
    }

    pub fn state(&self) -> PowerState {
        self.state
    }

    pub fn contents_valid(&self) -> bool {
        self.contents_valid
    }

    /// Write-back or initialization of the array; only possible while Active.
    pub fn revalidate(&self) -> Result<Self> {
        match self.state {
            PowerState::Active => Ok(SramPowerState {
                state: PowerState::Active,
                contents_valid: true,
            }),
            other => Err(Error::IllegalTransition {
                from: other.to_string(),
                to: "revalidate".into(),
            }),
        }
    }

    /// Advance a wake-up sequence by one stage. Outside `WakingUp` this is a no-op.
    pub fn advance_wake(&self, cfg: &SramMacroConfig) -> Self {
        match self.state {
            PowerState::WakingUp(s) if s + 1 >= cfg.n_power_segments => SramPowerState {
                state: PowerState::Active,
                ..*self
            },
            PowerState::WakingUp(s) => SramPowerState {
                state: PowerState::WakingUp(s + 1),
                ..*self
            },
            _ => *self,
        }
    }

    /// Run a pending wake-up to completion.
    pub fn complete_wake(&self, cfg: &SramMacroConfig) -> Self {
        let mut s = *self;
        while matches!(s.state, PowerState::WakingUp(_)) {
            s = s.advance_wake(cfg);
        }
        s
    }
}

fn illegal(from: PowerState, to: SettledState) -> Error {
    Error::IllegalTransition {
        from: from.to_string(),
        to: PowerState::from(to).to_string(),
    }
}

/// Request a move to a settled state.
///
/// Waking from Retention or PowerDown enters `WakingUp(0)`; drive it to
/// Active with [`SramPowerState::advance_wake`]. Requesting Active while
/// waking leaves the sequence running, and a wake may be aborted into
/// PowerDown. Retention can only be entered from Active.
pub fn request_transition(s: &SramPowerState, target: SettledState) -> Result<SramPowerState> {
    use PowerState as P;
    use SettledState as T;
    let next = |state, contents_valid| SramPowerState {
        state,
        contents_valid,
    };
    match (s.state, target) {
        (P::Active, T::Active) | (P::Retention, T::Retention) | (P::PowerDown, T::PowerDown) => {
            Ok(*s)
        }
        (P::Active, T::Retention) => Ok(next(P::Retention, s.contents_valid)),
        (P::Active, T::PowerDown) | (P::Retention, T::PowerDown) => Ok(next(P::PowerDown, false)),
        (P::Retention, T::Active) | (P::PowerDown, T::Active) => {
            Ok(next(P::WakingUp(0), s.contents_valid))
        }
        (P::WakingUp(_), T::Active) => Ok(*s),
        (P::WakingUp(_), T::PowerDown) => Ok(next(P::PowerDown, false)),
        (P::PowerDown, T::Retention) | (P::WakingUp(_), T::Retention) => {
            Err(illegal(s.state, target))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WakeProfile {
    /// Enable time of each stage relative to the wake request, s.
    pub stage_times: Vec<f64>,
    /// Peak in-rush of each stage, A.
    pub stage_peak_currents: Vec<f64>,
    pub total_duration: f64,
}

/// Staged power-switch schedule for re-powering the periphery/array rail.
pub fn wake_sequence_profile(cfg: &SramMacroConfig, vdd: f64) -> Result<WakeProfile> {
    if !(vdd > 0.0) {
        return Err(Error::invalid("wake profile", format!("vdd={vdd}")));
    }
    if cfg.n_power_segments == 0 || !(cfg.stage_spacing > 0.0) {
        return Err(Error::invalid(
            "wake profile",
            "stage timing must be positive",
        ));
    }
    let tau = cfg.stage_spacing;
    let peak = cfg.segment_capacitance * vdd / tau;
    if peak > cfg.current_limit {
        return Err(Error::CurrentBudgetInfeasible {
            peak_a: peak,
            limit_a: cfg.current_limit,
        });
    }
    let n = cfg.n_power_segments as usize;
    Ok(WakeProfile {
        stage_times: (0..n).map(|i| i as f64 * tau).collect(),
        stage_peak_currents: vec![peak; n],
        total_duration: n as f64 * tau,
    })
}

/// Leakage of one macro in state `s`, W.
pub fn macro_power(
    cfg: &SramMacroConfig,
    s: &SramPowerState,
    op: &OperatingPoint,
    b: &BiasPair,
    p: &DeviceParams,
) -> f64 {
    let kib = cfg.size_kib as f64;
    let cell = leakage_power(p, op, b, p.i0_sram_cell * kib);
    let periph = leakage_power(p, op, b, p.i0_sram_periph * kib);
    match s.state {
        PowerState::Active | PowerState::WakingUp(_) => cell + periph,
        PowerState::Retention => cell,
        PowerState::PowerDown => cfg.powerdown_residual * (cell + periph),
    }
}

/// Retention-controller share of macro area, %.
pub fn retention_area_overhead(cfg: &SramMacroConfig) -> f64 {
    area_overhead_at(cfg, cfg.size_kib as f64)
}

pub(crate) fn area_overhead_at(cfg: &SramMacroConfig, size_kib: f64) -> f64 {
    let array = cfg.array_area_per_kib * size_kib;
    100.0 * cfg.controller_area / (cfg.controller_area + array)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BankConfig {
    pub bank_kib: u32,
    pub macro_size_kib: u32,
    pub macros_per_bank: u32,
    pub n_banks: u32,
}

impl BankConfig {
    pub fn new(macro_size_kib: u32) -> Result<Self> {
        if !MACRO_SIZES_KIB.contains(&macro_size_kib) {
            return Err(Error::invalid(
                "bank config",
                format!("macro size {macro_size_kib} KiB not in {{1, 2, 4, 8}}"),
            ));
        }
        Ok(BankConfig {
            bank_kib: BANK_KIB,
            macro_size_kib,
            macros_per_bank: BANK_KIB / macro_size_kib,
            n_banks: N_BANKS,
        })
    }

    /// Degenerate bank made of one full-size macro; bus gating has nothing
    /// to gate here.
    pub fn monolithic() -> Self {
        BankConfig {
            bank_kib: BANK_KIB,
            macro_size_kib: BANK_KIB,
            macros_per_bank: 1,
            n_banks: N_BANKS,
        }
    }

    pub fn total_kib(&self) -> u32 {
        self.bank_kib * self.n_banks
    }

    pub fn total_macros(&self) -> u32 {
        self.macros_per_bank * self.n_banks
    }
}
