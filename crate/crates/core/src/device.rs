//! Device-level models: threshold voltage under body bias, subthreshold
//! leakage and alpha-power-law logic speed.
//!
//! All models are pure functions of an immutable [`DeviceParams`] record, an
//! [`OperatingPoint`] and a [`BiasPair`].

use crate::error::{Error, Result};

/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Elementary charge, C (CODATA 2018, exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const ZERO_CELSIUS_K: f64 = 273.15;

/// Qualified temperature range of the part, °C.
pub const TEMP_MIN_C: f64 = -40.0;
pub const TEMP_MAX_C: f64 = 125.0;
pub const VDD_MIN_V: f64 = 0.3;
pub const VDD_MAX_V: f64 = 1.0;

/// Thermal voltage kT/q in volts.
pub fn thermal_voltage(temp_c: f64) -> Result<f64> {
    if temp_c.is_nan() || temp_c <= -ZERO_CELSIUS_K {
        return Err(Error::invalid(
            "temperature",
            format!("{temp_c} °C is at or below absolute zero"),
        ));
    }
    Ok(BOLTZMANN * (temp_c + ZERO_CELSIUS_K) / ELEMENTARY_CHARGE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CornerLabel {
    SlowSlow,
    Typical,
    FastFast,
}

impl CornerLabel {
    pub fn sigma(self) -> f64 {
        match self {
            CornerLabel::SlowSlow => 1.0,
            CornerLabel::Typical => 0.0,
            CornerLabel::FastFast => -1.0,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            CornerLabel::SlowSlow => "ss",
            CornerLabel::Typical => "tt",
            CornerLabel::FastFast => "ff",
        }
    }
}

/// Process corner as a continuous threshold-shift multiplier.
///
/// `sigma = +1` is the slow-slow extreme, `0` typical and `-1` fast-fast.
/// Interior values are allowed so sign-off can sample between the named corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessCorner {
    sigma: f64,
}

impl ProcessCorner {
    pub const SLOW_SLOW: ProcessCorner = ProcessCorner { sigma: 1.0 };
    pub const TYPICAL: ProcessCorner = ProcessCorner { sigma: 0.0 };
    pub const FAST_FAST: ProcessCorner = ProcessCorner { sigma: -1.0 };

    pub fn interior(sigma: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&sigma) {
            return Err(Error::invalid(
                "process corner",
                format!("sigma {sigma} outside [-1, 1]"),
            ));
        }
        Ok(ProcessCorner { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The named corner this sample coincides with, if any.
    pub fn label(&self) -> Option<CornerLabel> {
        [
            CornerLabel::SlowSlow,
            CornerLabel::Typical,
            CornerLabel::FastFast,
        ]
        .into_iter()
        .find(|l| l.sigma() == self.sigma)
    }

    pub fn name(&self) -> String {
        match self.label() {
            Some(l) => l.short_name().to_string(),
            None => format!("sigma={:+.4}", self.sigma),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ss" | "ssg" | "slow" | "slowslow" => Ok(Self::SLOW_SLOW),
            "tt" | "typ" | "typical" => Ok(Self::TYPICAL),
            "ff" | "ffg" | "fast" | "fastfast" => Ok(Self::FAST_FAST),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::invalid("process corner", other.to_string()))
                .and_then(Self::interior),
        }
    }
}

impl From<CornerLabel> for ProcessCorner {
    fn from(l: CornerLabel) -> Self {
        ProcessCorner { sigma: l.sigma() }
    }
}

/// Supply voltage, junction temperature and process corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    vdd: f64,
    temp_c: f64,
    corner: ProcessCorner,
}

impl OperatingPoint {
    pub fn new(vdd: f64, temp_c: f64, corner: ProcessCorner) -> Result<Self> {
        if !(VDD_MIN_V..=VDD_MAX_V).contains(&vdd) {
            return Err(Error::invalid(
                "operating point",
                format!("vdd {vdd} V outside [{VDD_MIN_V}, {VDD_MAX_V}]"),
            ));
        }
        if !(TEMP_MIN_C..=TEMP_MAX_C).contains(&temp_c) {
            return Err(Error::invalid(
                "operating point",
                format!("temperature {temp_c} °C outside [{TEMP_MIN_C}, {TEMP_MAX_C}]"),
            ));
        }
        Ok(OperatingPoint {
            vdd,
            temp_c,
            corner,
        })
    }

    pub fn vdd(&self) -> f64 {
        self.vdd
    }

    pub fn temp_c(&self) -> f64 {
        self.temp_c
    }

    pub fn corner(&self) -> ProcessCorner {
        self.corner
    }

    pub fn with_vdd(&self, vdd: f64) -> Result<Self> {
        Self::new(vdd, self.temp_c, self.corner)
    }

    pub fn with_temp(&self, temp_c: f64) -> Result<Self> {
        Self::new(self.vdd, temp_c, self.corner)
    }
}

/// Reverse body-bias magnitudes: N-well above VDD and P-well below ground.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BiasPair {
    pub vnw: f64,
    pub vpw: f64,
}

impl BiasPair {
    pub const ZERO: BiasPair = BiasPair { vnw: 0.0, vpw: 0.0 };

    pub fn new(vnw: f64, vpw: f64) -> Result<Self> {
        if !(vnw >= 0.0 && vpw >= 0.0 && vnw.is_finite() && vpw.is_finite()) {
            return Err(Error::invalid(
                "bias pair",
                format!("vnw={vnw}, vpw={vpw} must be finite and >= 0"),
            ));
        }
        Ok(BiasPair { vnw, vpw })
    }

    pub fn symmetric(v: f64) -> Result<Self> {
        Self::new(v, v)
    }

    /// Mean reverse-bias magnitude; this is what shifts the threshold.
    pub fn magnitude(&self) -> f64 {
        0.5 * (self.vnw + self.vpw)
    }

    pub fn is_zero(&self) -> bool {
        self.vnw == 0.0 && self.vpw == 0.0
    }

    pub fn within_rail(&self, rail_max: f64) -> bool {
        self.vnw <= rail_max && self.vpw <= rail_max
    }
}

/// Calibrated device coefficients shared by the logic and SRAM models.
///
/// Leakage scales (`i0_*`) are exponential prefactors: the leakage a block
/// would draw at the reference supply if its threshold were zero.
/// SRAM scales are per KiB of array.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Zero-bias threshold at the typical corner, V.
    pub vth0: f64,
    /// Threshold shift per unit corner sigma, V.
    pub sigma_vth: f64,
    /// Threshold shift per volt of mean reverse bias, V/V.
    pub gamma_body: f64,
    pub n_slope: f64,
    pub i0_logic: f64,
    pub i0_sram_cell: f64,
    pub i0_sram_periph: f64,
    /// Wake-up controller domain (biased together with the PE).
    pub i0_wake: f64,
    pub alpha: f64,
    /// Per-stage delay scale, s·V^(alpha-1).
    pub k_delay: f64,
    /// Logical depth of the critical path.
    pub n_crit: f64,
    /// Switched capacitance per cycle, F.
    pub cdyn_logic: f64,
    /// Supply at which the leakage prefactors are referenced, V.
    pub vdd_ref: f64,
    /// Peak threshold lowering at mid-range temperature, V. Zero for physical
    /// parameter sets.
    pub vth_temp_bow: f64,
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let scales = [
            ("i0_logic", self.i0_logic),
            ("i0_sram_cell", self.i0_sram_cell),
            ("i0_sram_periph", self.i0_sram_periph),
            ("i0_wake", self.i0_wake),
            ("k_delay", self.k_delay),
            ("n_crit", self.n_crit),
            ("cdyn_logic", self.cdyn_logic),
            ("vdd_ref", self.vdd_ref),
        ];
        for (name, v) in scales {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "device params",
                    format!("{name}={v} must be > 0"),
                ));
            }
        }
        if !(1.0..=2.0).contains(&self.alpha) {
            return Err(Error::invalid(
                "device params",
                format!("alpha={} outside [1, 2]", self.alpha),
            ));
        }
        if !(1.0..=2.0).contains(&self.n_slope) {
            return Err(Error::invalid(
                "device params",
                format!("n_slope={} outside [1, 2]", self.n_slope),
            ));
        }
        if !(self.gamma_body > 0.0) {
            return Err(Error::invalid(
                "device params",
                format!("gamma_body={} must be > 0", self.gamma_body),
            ));
        }
        if !self.vth0.is_finite() || !self.sigma_vth.is_finite() || !self.vth_temp_bow.is_finite() {
            return Err(Error::invalid("device params", "non-finite threshold term"));
        }
        Ok(())
    }

    /// Threshold before body bias: corner shift plus the temperature bow.
    pub fn unbiased_threshold(&self, op: &OperatingPoint) -> f64 {
        let span = TEMP_MAX_C - TEMP_MIN_C;
        let bow = 4.0 * (op.temp_c - TEMP_MIN_C) * (TEMP_MAX_C - op.temp_c) / (span * span);
        self.vth0 + self.sigma_vth * op.corner.sigma - self.vth_temp_bow * bow
    }
}

pub fn effective_threshold(p: &DeviceParams, op: &OperatingPoint, b: &BiasPair) -> f64 {
    p.unbiased_threshold(op) + p.gamma_body * b.magnitude()
}

/// Subthreshold leakage of a block with exponential prefactor `scale`, W.
pub fn leakage_power(p: &DeviceParams, op: &OperatingPoint, b: &BiasPair, scale: f64) -> f64 {
    let vt = BOLTZMANN * (op.temp_c + ZERO_CELSIUS_K) / ELEMENTARY_CHARGE;
    let vth = effective_threshold(p, op, b);
    scale * (-vth / (p.n_slope * vt)).exp() * (op.vdd / p.vdd_ref)
}

/// Alpha-power-law critical-path frequency, Hz.
pub fn max_frequency(p: &DeviceParams, op: &OperatingPoint, b: &BiasPair) -> Result<f64> {
    let vth = effective_threshold(p, op, b);
    frequency_at_threshold(p, op.vdd, vth)
}

pub(crate) fn frequency_at_threshold(p: &DeviceParams, vdd: f64, vth: f64) -> Result<f64> {
    if vdd <= vth {
        return Err(Error::NonFunctional { vdd, vth });
    }
    let stage_delay = p.k_delay * vdd / (vdd - vth).powf(p.alpha);
    Ok(1.0 / (p.n_crit * stage_delay))
}

/// Inverse of [`frequency_at_threshold`]: the threshold at which the critical
/// path runs exactly at `freq`.
pub(crate) fn threshold_for_frequency(p: &DeviceParams, vdd: f64, freq: f64) -> f64 {
    let overdrive = (freq * p.n_crit * p.k_delay * vdd).powf(1.0 / p.alpha);
    vdd - overdrive
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_params() -> DeviceParams {
        DeviceParams {
            vth0: 0.26,
            sigma_vth: 0.075,
            gamma_body: 0.085,
            n_slope: 1.3,
            i0_logic: 1.0,
            i0_sram_cell: 0.01,
            i0_sram_periph: 0.015,
            i0_wake: 0.2,
            alpha: 1.3,
            k_delay: 1.0e-10,
            n_crit: 24.0,
            cdyn_logic: 1.4e-11,
            vdd_ref: 0.55,
            vth_temp_bow: 0.0,
        }
    }

    fn op(vdd: f64, t: f64, c: ProcessCorner) -> OperatingPoint {
        OperatingPoint::new(vdd, t, c).unwrap()
    }

    #[test]
    fn thermal_voltage_reference_values() {
        // k_B * 298.15 / q_e and k_B * 398.15 / q_e, computed by hand.
        assert!((thermal_voltage(25.0).unwrap() - 0.025693).abs() < 5e-7);
        assert!((thermal_voltage(125.0).unwrap() - 0.034310).abs() < 5e-7);
        assert!(thermal_voltage(-273.15 + 1e-9).unwrap() < 1e-12);
        assert!(thermal_voltage(-273.15).is_err());
        assert!(thermal_voltage(f64::NAN).is_err());
    }

    #[test]
    fn threshold_cases() {
        let p = sample_params();
        let tt = op(0.55, 25.0, ProcessCorner::TYPICAL);
        assert_eq!(effective_threshold(&p, &tt, &BiasPair::ZERO), p.vth0);
        let one = BiasPair::symmetric(1.0).unwrap();
        assert!((effective_threshold(&p, &tt, &one) - (p.vth0 + 0.085)).abs() < 1e-15);
        let ss = op(0.55, 25.0, ProcessCorner::SLOW_SLOW);
        let ff = op(0.55, 25.0, ProcessCorner::FAST_FAST);
        let d = effective_threshold(&p, &ss, &one) - effective_threshold(&p, &ff, &one);
        assert!((d - 2.0 * p.sigma_vth).abs() < 1e-15);
    }

    #[test]
    fn frequency_pole_and_bias_monotone() {
        let p = sample_params();
        let tt = op(0.55, 25.0, ProcessCorner::TYPICAL);
        let ss_vth = p.vth0 + p.sigma_vth;
        let near = op(ss_vth + 1e-9, 25.0, ProcessCorner::SLOW_SLOW);
        assert!(max_frequency(&p, &near, &BiasPair::ZERO).unwrap() < 1.0);
        let at = op(0.3, 25.0, ProcessCorner::SLOW_SLOW);
        assert!(matches!(
            max_frequency(&p, &at, &BiasPair::ZERO),
            Err(Error::NonFunctional { .. })
        ));
        let mut last = f64::INFINITY;
        for i in 0..=10 {
            let b = BiasPair::symmetric(0.05 * i as f64).unwrap();
            let f = max_frequency(&p, &tt, &b).unwrap();
            assert!(f < last);
            last = f;
        }
    }

    #[test]
    fn threshold_inverse_roundtrip() {
        let p = sample_params();
        let vth = threshold_for_frequency(&p, 0.55, 50e6);
        let f = frequency_at_threshold(&p, 0.55, vth).unwrap();
        assert!((f / 50e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operating_point_bounds() {
        assert!(OperatingPoint::new(0.29, 25.0, ProcessCorner::TYPICAL).is_err());
        assert!(OperatingPoint::new(0.55, 126.0, ProcessCorner::TYPICAL).is_err());
        assert!(OperatingPoint::new(f64::NAN, 25.0, ProcessCorner::TYPICAL).is_err());
        assert!(ProcessCorner::interior(1.5).is_err());
        assert_eq!(
            ProcessCorner::parse("ssg").unwrap().label(),
            Some(CornerLabel::SlowSlow)
        );
        assert_eq!(ProcessCorner::parse("-0.25").unwrap().label(), None);
        assert!(BiasPair::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn params_validation() {
        let mut p = sample_params();
        assert!(p.validate().is_ok());
        p.alpha = 2.5;
        assert!(p.validate().is_err());
        let mut p = sample_params();
        p.i0_wake = 0.0;
        assert!(p.validate().is_err());
    }
}
