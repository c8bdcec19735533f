//! Wake-up controller model: processing-element power modes, their power
//! at an operating point, and energy accounting over timed schedules.

use std::fmt;

use crate::abb::{regulate_from, retention_retarget, LockResult, RegulatorConfig};
use crate::activity::PowerBreakdown;
use crate::device::{leakage_power, BiasPair, DeviceParams, OperatingPoint};
use crate::error::{Error, Result};
use crate::sram::{wake_sequence_profile, BankConfig, SramMacroConfig};

/// Chip-level configuration shared by the mode, shmoo and sign-off models.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatformConfig {
    pub abb: RegulatorConfig,
    pub sram: SramMacroConfig,
    pub bank: BankConfig,
    /// Lowest supply at which the PLL locks, V.
    pub pll_vmin: f64,
    /// Lowest supply at which the SRAM passes built-in self test, V.
    pub sram_vmin: f64,
}

impl Default for PlatformConfig {
    fn default() -> Self {
        PlatformConfig {
            abb: RegulatorConfig::default(),
            sram: SramMacroConfig::new(4).expect("4 KiB is a valid macro size"),
            bank: BankConfig::new(4).expect("4 KiB is a valid macro size"),
            pll_vmin: 0.45,
            sram_vmin: 0.50,
        }
    }
}

impl PlatformConfig {
    pub fn validate(&self) -> Result<()> {
        self.abb.validate()?;
        self.sram.validate()?;
        if self.bank.macro_size_kib != self.sram.size_kib {
            return Err(Error::invalid(
                "platform config",
                format!(
                    "bank uses {} KiB macros but the macro config is {} KiB",
                    self.bank.macro_size_kib, self.sram.size_kib
                ),
            ));
        }
        for (name, v) in [("pll_vmin", self.pll_vmin), ("sram_vmin", self.sram_vmin)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("platform config", format!("{name}={v}")));
            }
        }
        Ok(())
    }

    pub fn total_sram_kib(&self) -> f64 {
        self.bank.total_kib() as f64
    }
}

/// Leakage of each block sharing the processing-element bias, W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageParts {
    pub logic: f64,
    pub wake: f64,
    pub sram_cell: f64,
    pub sram_periph: f64,
}

impl LeakageParts {
    pub fn at(p: &DeviceParams, cfg: &PlatformConfig, op: &OperatingPoint, b: &BiasPair) -> Self {
        let kib = cfg.total_sram_kib();
        LeakageParts {
            logic: leakage_power(p, op, b, p.i0_logic),
            wake: leakage_power(p, op, b, p.i0_wake),
            sram_cell: leakage_power(p, op, b, p.i0_sram_cell * kib),
            sram_periph: leakage_power(p, op, b, p.i0_sram_periph * kib),
        }
    }

    /// Everything powered: logic, wake-up domain and Active SRAM.
    pub fn awake(&self) -> f64 {
        self.logic + self.wake + self.sram_cell + self.sram_periph
    }

    /// Logic and SRAM periphery off, bitcells and wake-up domain on.
    pub fn retained(&self) -> f64 {
        self.sram_cell + self.wake
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerMode {
    /// Clocked at the given frequency, Hz.
    Active(f64),
    Sleep,
    Retention,
}

impl fmt::Display for PowerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerMode::Active(hz) => write!(f, "active@{}MHz", hz / 1e6),
            PowerMode::Sleep => write!(f, "sleep"),
            PowerMode::Retention => write!(f, "retention"),
        }
    }
}

/// Mode power with its quadrant split and the bias the regulator locked to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePoint {
    pub breakdown: PowerBreakdown,
    pub lock: LockResult,
}

impl ModePoint {
    pub fn total(&self) -> f64 {
        self.breakdown.total()
    }
}

fn lock_for(
    mode: PowerMode,
    op: &OperatingPoint,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<LockResult> {
    let abb = match mode {
        PowerMode::Active(f) => cfg.abb.with_target(f),
        PowerMode::Sleep => cfg.abb.clone(),
        PowerMode::Retention => retention_retarget(&cfg.abb),
    };
    regulate_from(&abb, op, p, BiasPair::ZERO)
}

/// Power of the processing element in `mode`, split into quadrants.
///
/// Logic leakage includes the always-on wake-up domain. Dynamic power of the
/// whole chip is lumped into the logic switched capacitance.
pub fn mode_point(
    mode: PowerMode,
    op: &OperatingPoint,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<ModePoint> {
    if let PowerMode::Active(f) = mode {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::invalid(
                "power mode",
                format!("active frequency {f} Hz"),
            ));
        }
    }
    let lock = lock_for(mode, op, p, cfg)?;
    let leak = LeakageParts::at(p, cfg, op, &lock.bias);
    let breakdown = match mode {
        PowerMode::Active(f) => PowerBreakdown::new(
            p.cdyn_logic * op.vdd() * op.vdd() * f,
            leak.logic + leak.wake,
            0.0,
            leak.sram_cell + leak.sram_periph,
        ),
        PowerMode::Sleep => PowerBreakdown::new(
            0.0,
            leak.logic + leak.wake,
            0.0,
            leak.sram_cell + leak.sram_periph,
        ),
        PowerMode::Retention => PowerBreakdown::new(0.0, leak.wake, 0.0, leak.sram_cell),
    };
    Ok(ModePoint { breakdown, lock })
}

pub fn mode_power(
    mode: PowerMode,
    op: &OperatingPoint,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<f64> {
    mode_point(mode, op, p, cfg).map(|m| m.total())
}

/// Energy per CoreMark iteration, µJ/CM, from a PDP in µW/MHz and an
/// architectural performance in CM/(s·MHz).
pub fn energy_per_coremark(pdp_total: f64, arch_perf: f64) -> Result<f64> {
    if !(pdp_total > 0.0 && arch_perf > 0.0) {
        return Err(Error::invalid(
            "energy per CoreMark",
            format!("pdp={pdp_total}, arch_perf={arch_perf} must both be > 0"),
        ));
    }
    Ok(pdp_total / arch_perf)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSchedule {
    pub segments: Vec<(PowerMode, f64)>,
    pub op: OperatingPoint,
}

fn parse_quantity(s: &str, units: &[(&str, f64)], what: &'static str) -> Result<f64> {
    let s = s.trim();
    for (suffix, scale) in units {
        if let Some(num) = s.strip_suffix(suffix) {
            if let Ok(v) = num.trim().parse::<f64>() {
                return Ok(v * scale);
            }
        }
    }
    Err(Error::invalid(what, format!("cannot parse `{s}`")))
}

const TIME_UNITS: [(&str, f64); 4] = [("ns", 1e-9), ("us", 1e-6), ("ms", 1e-3), ("s", 1.0)];
const FREQ_UNITS: [(&str, f64); 4] = [("MHz", 1e6), ("kHz", 1e3), ("GHz", 1e9), ("Hz", 1.0)];

impl ModeSchedule {
    pub fn new(segments: Vec<(PowerMode, f64)>, op: OperatingPoint) -> Result<Self> {
        for (m, d) in &segments {
            if !(*d > 0.0 && d.is_finite()) {
                return Err(Error::invalid(
                    "schedule",
                    format!("{m} segment lasts {d} s"),
                ));
            }
        }
        Ok(ModeSchedule { segments, op })
    }

    /// Parse `active 10ms | sleep 5ms | retention 990ms`. Segments may also
    /// be given one per line; `#` starts a comment. `active@25MHz` selects a
    /// clock other than `default_active_hz`.
    pub fn parse(text: &str, op: OperatingPoint, default_active_hz: f64) -> Result<Self> {
        let mut segments = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for part in line.split('|') {
                let toks: Vec<&str> = part.split_whitespace().collect();
                if toks.is_empty() {
                    continue;
                }
                if toks.len() != 2 {
                    return Err(Error::invalid(
                        "schedule",
                        format!("segment `{}`", part.trim()),
                    ));
                }
                let (name, freq) = match toks[0].split_once('@') {
                    Some((n, f)) => (
                        n,
                        Some(parse_quantity(f, &FREQ_UNITS, "schedule frequency")?),
                    ),
                    None => (toks[0], None),
                };
                let mode = match (name.to_ascii_lowercase().as_str(), freq) {
                    ("active", f) => PowerMode::Active(f.unwrap_or(default_active_hz)),
                    ("sleep", None) => PowerMode::Sleep,
                    ("retention", None) => PowerMode::Retention,
                    _ => return Err(Error::invalid("schedule", format!("mode `{}`", toks[0]))),
                };
                let d = parse_quantity(toks[1], &TIME_UNITS, "schedule duration")?;
                segments.push((mode, d));
            }
        }
        Self::new(segments, op)
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.1).sum()
    }

    pub fn concat(&self, other: &ModeSchedule) -> Result<ModeSchedule> {
        if self.op != other.op {
            return Err(Error::invalid(
                "schedule",
                "cannot join schedules at different operating points",
            ));
        }
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        Ok(ModeSchedule {
            segments,
            op: self.op,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEnergy {
    pub mode: PowerMode,
    pub duration: f64,
    pub power: f64,
    pub energy: f64,
    pub breakdown: PowerBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub segments: Vec<SegmentEnergy>,
    /// Wake-up and relock energy charged at Retention→Active boundaries, J.
    pub transition_energy: f64,
    pub transitions: usize,
    pub total_energy: f64,
    pub duration: f64,
    pub average_power: f64,
}

/// Energy of leaving retention for `active`: the SRAM wake sequence at
/// Active power, then the relock from retention bias billed at retention power.
pub fn wake_transition_energy(
    active: PowerMode,
    op: &OperatingPoint,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<f64> {
    let act = mode_point(active, op, p, cfg)?;
    let ret = mode_point(PowerMode::Retention, op, p, cfg)?;
    let wake = wake_sequence_profile(&cfg.sram, op.vdd())?;
    let abb = match active {
        PowerMode::Active(f) => cfg.abb.with_target(f),
        _ => cfg.abb.clone(),
    };
    let relock = regulate_from(&abb, op, p, ret.lock.bias)?;
    Ok(wake.total_duration * act.total() + relock.steps as f64 * cfg.abb.step_period * ret.total())
}

pub fn simulate_schedule(
    s: &ModeSchedule,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<EnergyReport> {
    let mut segments = Vec::with_capacity(s.segments.len());
    let mut transition_energy = 0.0;
    let mut transitions = 0;
    let mut prev: Option<PowerMode> = None;
    for &(mode, duration) in &s.segments {
        if let (Some(PowerMode::Retention), PowerMode::Active(_)) = (prev, mode) {
            transition_energy += wake_transition_energy(mode, &s.op, p, cfg)?;
            transitions += 1;
        }
        let m = mode_point(mode, &s.op, p, cfg)?;
        let power = m.total();
        segments.push(SegmentEnergy {
            mode,
            duration,
            power,
            energy: power * duration,
            breakdown: m.breakdown,
        });
        prev = Some(mode);
    }
    let segment_energy: f64 = segments.iter().map(|e| e.energy).sum();
    let total_energy = segment_energy + transition_energy;
    let duration = s.duration();
    Ok(EnergyReport {
        segments,
        transition_energy,
        transitions,
        total_energy,
        duration,
        average_power: if duration > 0.0 {
            total_energy / duration
        } else {
            0.0
        },
    })
}

/// Sleep and retention power over a temperature sweep: `(temp, sleep, retention)`.
pub fn retention_vs_temperature(
    p: &DeviceParams,
    cfg: &PlatformConfig,
    base: &OperatingPoint,
    temps: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    temps
        .iter()
        .map(|&t| {
            let op = base.with_temp(t)?;
            Ok((
                t,
                mode_power(PowerMode::Sleep, &op, p, cfg)?,
                mode_power(PowerMode::Retention, &op, p, cfg)?,
            ))
        })
        .collect()
}
