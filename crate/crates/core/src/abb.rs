//! Adaptive body-bias regulator.
//!
//! A proportional loop compares a delay-monitor frequency with the programmed
//! target and moves the well biases: a fast monitor deepens reverse bias, a
//! slow one relaxes it. Lock is declared after a streak of in-tolerance steps.

use crate::device::{
    effective_threshold, max_frequency, threshold_for_frequency, BiasPair, DeviceParams,
    OperatingPoint,
};
use crate::error::{Error, NoLockReason, Result};

/// Wake-up clock and retention performance target, Hz.
pub const RETENTION_TARGET_HZ: f64 = 5.0e6;

#[derive(Debug, Clone, PartialEq)]
pub struct RegulatorConfig {
    /// Zero is accepted as a degenerate target that any silicon satisfies.
    pub target_freq: f64,
    pub retention_target_freq: f64,
    pub epsilon_rel: f64,
    pub lock_count: u32,
    /// Volts of mean bias per unit relative frequency error.
    pub gain: f64,
    pub max_steps: u32,
    pub bias_rail_max: f64,
    /// Share of each bias move applied to the N-well. 0.5 moves both wells
    /// symmetrically, which is the default.
    pub nwell_share: f64,
    /// Relative error of the delay monitor against the real critical path.
    pub monitor_offset_rel: f64,
    /// Wall time of one regulator iteration, s.
    pub step_period: f64,
}

impl Default for RegulatorConfig {
    fn default() -> Self {
        RegulatorConfig {
            target_freq: 50.0e6,
            retention_target_freq: RETENTION_TARGET_HZ,
            epsilon_rel: 0.01,
            lock_count: 4,
            gain: 0.2,
            max_steps: 1000,
            bias_rail_max: 1.5,
            nwell_share: 0.5,
            monitor_offset_rel: 0.0,
            step_period: 1.0e-6,
        }
    }
}

impl RegulatorConfig {
    pub fn with_target(&self, target_freq: f64) -> Self {
        RegulatorConfig {
            target_freq,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |d: String| Err(Error::invalid("regulator config", d));
        if !(self.target_freq >= 0.0 && self.target_freq.is_finite()) {
            return bad(format!("target_freq={} must be >= 0", self.target_freq));
        }
        if !(self.retention_target_freq > 0.0 && self.retention_target_freq.is_finite()) {
            return bad(format!(
                "retention_target_freq={} must be > 0",
                self.retention_target_freq
            ));
        }
        if !(self.epsilon_rel > 0.0 && self.epsilon_rel < 0.1) {
            return bad(format!("epsilon_rel={} outside (0, 0.1)", self.epsilon_rel));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return bad(format!("gain={} must be > 0", self.gain));
        }
        if self.lock_count == 0 || self.max_steps == 0 {
            return bad("lock_count and max_steps must be >= 1".into());
        }
        if !(self.bias_rail_max > 0.0 && self.bias_rail_max.is_finite()) {
            return bad(format!("bias_rail_max={} must be > 0", self.bias_rail_max));
        }
        if !(0.0..=1.0).contains(&self.nwell_share) {
            return bad(format!("nwell_share={} outside [0, 1]", self.nwell_share));
        }
        if !(self.monitor_offset_rel > -1.0 && self.monitor_offset_rel.is_finite()) {
            return bad(format!("monitor_offset_rel={}", self.monitor_offset_rel));
        }
        if !(self.step_period > 0.0) {
            return bad(format!("step_period={} must be > 0", self.step_period));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegulatorState {
    pub bias: BiasPair,
    pub steps_taken: u32,
    pub in_tolerance_streak: u32,
    pub locked: bool,
}

impl RegulatorState {
    pub fn at(bias: BiasPair) -> Self {
        RegulatorState {
            bias,
            ..Default::default()
        }
    }
}

/// Relative frequency error seen by the regulator.
pub fn relative_error(cfg: &RegulatorConfig, monitor_freq: f64) -> f64 {
    if cfg.target_freq == 0.0 {
        f64::INFINITY
    } else {
        (monitor_freq - cfg.target_freq) / cfg.target_freq
    }
}

/// One proportional update of the bias pair.
///
/// A step counts as in tolerance when `|e| <= epsilon_rel`, or when the
/// monitor is still fast with both wells pinned at the rail: the silicon
/// cannot be slowed further and the loop holds the saturated point.
pub fn regulator_step(
    state: &RegulatorState,
    cfg: &RegulatorConfig,
    monitor_freq: f64,
) -> RegulatorState {
    let e = relative_error(cfg, monitor_freq.max(0.0));
    let rail = cfg.bias_rail_max;
    let delta = cfg.gain * e;
    let clamp = |v: f64| v.clamp(0.0, rail);
    let bias = if delta == 0.0 {
        state.bias
    } else {
        BiasPair {
            vnw: clamp(state.bias.vnw + 2.0 * cfg.nwell_share * delta),
            vpw: clamp(state.bias.vpw + 2.0 * (1.0 - cfg.nwell_share) * delta),
        }
    };
    let saturated = e > 0.0 && bias.vnw >= rail && bias.vpw >= rail;
    let in_tol = e.abs() <= cfg.epsilon_rel || saturated;
    let streak = if in_tol {
        state.in_tolerance_streak + 1
    } else {
        0
    };
    RegulatorState {
        bias,
        steps_taken: state.steps_taken + 1,
        in_tolerance_streak: streak,
        locked: streak >= cfg.lock_count,
    }
}

/// Outcome of a successful lock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockResult {
    /// Bias at which the final in-tolerance measurement was taken.
    pub bias: BiasPair,
    /// Critical-path frequency at `bias`.
    pub fmax: f64,
    pub steps: u32,
    /// True when the lock holds at the rail with the silicon still fast.
    pub saturated: bool,
}

fn monitor(cfg: &RegulatorConfig, p: &DeviceParams, op: &OperatingPoint, b: &BiasPair) -> f64 {
    let f = max_frequency(p, op, b).unwrap_or(0.0);
    f * (1.0 + cfg.monitor_offset_rel)
}

/// Run the loop from `start` until lock or failure.
pub fn regulate_from(
    cfg: &RegulatorConfig,
    op: &OperatingPoint,
    p: &DeviceParams,
    start: BiasPair,
) -> Result<LockResult> {
    cfg.validate()?;
    let unlock = |reason| Error::NoLock {
        target_hz: cfg.target_freq,
        reason,
    };
    let mut state = RegulatorState::at(start);
    while state.steps_taken < cfg.max_steps {
        let measured = state.bias;
        let f = monitor(cfg, p, op, &measured);
        let e = relative_error(cfg, f);
        let zero_floor = measured.vnw <= 0.0 && measured.vpw <= 0.0;
        if zero_floor && e < -cfg.epsilon_rel {
            return Err(unlock(NoLockReason::Unreachable));
        }
        state = regulator_step(&state, cfg, f);
        if state.locked {
            let rail = cfg.bias_rail_max;
            return Ok(LockResult {
                bias: measured,
                fmax: max_frequency(p, op, &measured).unwrap_or(0.0),
                steps: state.steps_taken,
                saturated: e > cfg.epsilon_rel && measured.vnw >= rail && measured.vpw >= rail,
            });
        }
    }
    Err(unlock(NoLockReason::BudgetExhausted))
}

/// Lock from zero bias and return the bias pair.
pub fn regulate_to_lock(
    cfg: &RegulatorConfig,
    op: &OperatingPoint,
    p: &DeviceParams,
) -> Result<BiasPair> {
    regulate_from(cfg, op, p, BiasPair::ZERO).map(|r| r.bias)
}

/// Same regulator with the retention performance target.
pub fn retention_retarget(cfg: &RegulatorConfig) -> RegulatorConfig {
    cfg.with_target(cfg.retention_target_freq)
}

/// Closed-form fixed point of the loop with a perfect monitor: the symmetric
/// bias that puts the critical path exactly on target, clamped to the rails.
pub fn settled_bias(cfg: &RegulatorConfig, op: &OperatingPoint, p: &DeviceParams) -> BiasPair {
    let unbiased = effective_threshold(p, op, &BiasPair::ZERO);
    let b = if cfg.target_freq == 0.0 {
        cfg.bias_rail_max
    } else {
        let needed = threshold_for_frequency(p, op.vdd(), cfg.target_freq);
        ((needed - unbiased) / p.gamma_body).clamp(0.0, cfg.bias_rail_max)
    };
    BiasPair { vnw: b, vpw: b }
}
