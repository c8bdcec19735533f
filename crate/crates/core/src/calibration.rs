//! Anchor files and the deterministic fit of [`DeviceParams`] to them.
//!
//! The fit runs in a fixed order: temperature sensitivity from the two
//! retention powers, threshold from the bias and corner policy, delay scale
//! from the frequency floor, leakage magnitudes, and finally the switched
//! capacitance. An outer bisection on the subthreshold slope places the
//! minimum PDP at the sign-off border inside its anchor window.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::abb::regulate_from;
use crate::device::{
    thermal_voltage, BiasPair, DeviceParams, OperatingPoint, ProcessCorner, TEMP_MAX_C, TEMP_MIN_C,
};
use crate::error::{Error, Result};
use crate::modes::{mode_point, LeakageParts, PlatformConfig, PowerMode};

pub const PAPER_ANCHORS: &str = include_str!("../anchors/paper.cfg");

pub const KEY_RETENTION: &str = "retention_uW";
pub const KEY_PDP: &str = "total_pdp_uW_per_MHz";
pub const KEY_FMIN: &str = "fmin_MHz";
pub const KEY_SIGNOFF_VMIN: &str = "signoff_vdd_min";
pub const KEY_VDD_NOM: &str = "vdd_nom";
pub const KEY_TEMP_RANGE: &str = "temp_range";
pub const KEY_ARCH_PERF: &str = "arch_perf_CM_per_s_MHz";

/// A closed interval; point anchors have `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite());
        // Split on the first `..` that is not part of a leading sign.
        match s.find("..") {
            Some(i) if i > 0 => {
                let (lo, hi) = (num(&s[..i])?, num(&s[i + 2..])?);
                (lo <= hi).then_some(Interval { lo, hi })
            }
            _ => num(s).map(Interval::point),
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

/// Published measurements the model is fitted to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnchorSet {
    /// Retention power in µW keyed by temperature in °C.
    pub retention_uw: Vec<(f64, f64)>,
    /// Total PDP in µW/MHz keyed by supply in V.
    pub pdp: Vec<(f64, Interval)>,
    pub fmin_mhz: Option<f64>,
    pub signoff_vdd_min: Option<f64>,
    pub vdd_nom: Option<f64>,
    pub temp_range: Option<Interval>,
    pub arch_perf: Option<f64>,
}

fn split_at_condition<'a>(key: &'a str, prefix: &str, unit: &str) -> Option<&'a str> {
    key.strip_prefix(prefix)?
        .strip_prefix('@')?
        .strip_suffix(unit)
}

impl AnchorSet {
    pub fn paper() -> Self {
        Self::parse(PAPER_ANCHORS).expect("shipped anchor file parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut a = AnchorSet::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |detail: String| Error::Config {
                line: i + 1,
                detail,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let iv = Interval::parse(value)
                .ok_or_else(|| err(format!("bad value `{value}` for {key}")))?;
            let scalar = || {
                if iv.is_point() {
                    Ok(iv.lo)
                } else {
                    Err(err(format!("{key} takes a single value")))
                }
            };
            if let Some(t) = split_at_condition(key, KEY_RETENTION, "C") {
                let t: f64 = t
                    .parse()
                    .map_err(|_| err(format!("temperature in `{key}`")))?;
                a.retention_uw.push((t, scalar()?));
            } else if let Some(v) = split_at_condition(key, KEY_PDP, "V") {
                let v: f64 = v.parse().map_err(|_| err(format!("supply in `{key}`")))?;
                a.pdp.push((v, iv));
            } else {
                match key {
                    KEY_FMIN => a.fmin_mhz = Some(scalar()?),
                    KEY_SIGNOFF_VMIN => a.signoff_vdd_min = Some(scalar()?),
                    KEY_VDD_NOM => a.vdd_nom = Some(scalar()?),
                    KEY_TEMP_RANGE => a.temp_range = Some(iv),
                    KEY_ARCH_PERF => a.arch_perf = Some(scalar()?),
                    other => return Err(err(format!("unknown anchor `{other}`"))),
                }
            }
        }
        a.retention_uw.sort_by(|x, y| x.0.total_cmp(&y.0));
        a.pdp.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(a)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Canonical text form; parsing it yields the same set.
    pub fn to_text(&self) -> String {
        let mut lines = BTreeMap::new();
        for (t, v) in &self.retention_uw {
            lines.insert(format!("{KEY_RETENTION}@{t}C"), v.to_string());
        }
        for (v, iv) in &self.pdp {
            lines.insert(format!("{KEY_PDP}@{v}V"), iv.to_string());
        }
        let opt = [
            (KEY_FMIN, self.fmin_mhz),
            (KEY_SIGNOFF_VMIN, self.signoff_vdd_min),
            (KEY_VDD_NOM, self.vdd_nom),
            (KEY_ARCH_PERF, self.arch_perf),
        ];
        for (k, v) in opt {
            if let Some(v) = v {
                lines.insert(k.to_string(), v.to_string());
            }
        }
        if let Some(r) = self.temp_range {
            lines.insert(KEY_TEMP_RANGE.to_string(), r.to_string());
        }
        let mut out = String::new();
        for (k, v) in lines {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    fn pdp_at(&self, vdd: f64) -> Option<Interval> {
        self.pdp
            .iter()
            .find(|(v, _)| (v - vdd).abs() < 1e-9)
            .map(|x| x.1)
    }
}

/// Free choices of the fit that the anchors do not pin down.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPolicy {
    pub gamma_body: f64,
    pub sigma_vth: f64,
    pub alpha: f64,
    pub n_crit: f64,
    /// Share of the reference retention power drawn by the wake-up domain.
    pub wake_share: f64,
    /// Periphery share of Active SRAM leakage.
    pub periph_fraction: f64,
    /// Active logic leakage over Active SRAM leakage.
    pub logic_to_sram_leakage: f64,
    /// Margin of the slow corner over the frequency floor at the lowest
    /// sign-off supply.
    pub delay_guard: f64,
    /// Relative supply spread of sign-off around the nominal supply.
    pub vdd_spread: f64,
    pub n_slope_range: (f64, f64),
    /// Used when no border PDP anchor is given.
    pub n_slope_default: f64,
    /// Clock frequencies scanned for the border PDP, Hz.
    pub pdp_freqs: Vec<f64>,
    pub tolerance: f64,
}

impl Default for CalibrationPolicy {
    fn default() -> Self {
        CalibrationPolicy {
            gamma_body: 0.10,
            sigma_vth: 0.075,
            alpha: 1.3,
            n_crit: 24.0,
            wake_share: 0.25,
            periph_fraction: 0.6,
            logic_to_sram_leakage: 2.4 / 4.2,
            delay_guard: 1.02,
            vdd_spread: 0.10,
            n_slope_range: (1.0, 1.2),
            n_slope_default: 1.3,
            pdp_freqs: (0..19).map(|i| (10.0 + 5.0 * i as f64) * 1e6).collect(),
            tolerance: 0.02,
        }
    }
}

impl CalibrationPolicy {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("gamma_body", self.gamma_body),
            ("alpha", self.alpha),
            ("n_crit", self.n_crit),
            ("delay_guard", self.delay_guard),
            ("tolerance", self.tolerance),
        ];
        for (k, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("calibration policy", format!("{k}={v}")));
            }
        }
        for (k, v) in [
            ("wake_share", self.wake_share),
            ("periph_fraction", self.periph_fraction),
            ("vdd_spread", self.vdd_spread),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(
                    "calibration policy",
                    format!("{k}={v} outside (0, 1)"),
                ));
            }
        }
        if !(self.sigma_vth >= 0.0 && self.logic_to_sram_leakage > 0.0) {
            return Err(Error::invalid(
                "calibration policy",
                "negative corner spread or leakage ratio",
            ));
        }
        let (lo, hi) = self.n_slope_range;
        if !(1.0 <= lo && lo < hi && hi <= 2.0) {
            return Err(Error::invalid(
                "calibration policy",
                format!("n_slope_range {lo}..{hi}"),
            ));
        }
        Ok(())
    }
}

/// One anchor compared with the calibrated model.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorCheck {
    pub anchor: String,
    pub target: Interval,
    pub model: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub params: DeviceParams,
    pub checks: Vec<AnchorCheck>,
    pub vdd_nom: f64,
    pub vdd_signoff_min: f64,
    pub vdd_signoff_max: f64,
    pub fmin_hz: f64,
    /// Frequency of the minimum-PDP cell at the sign-off border, if scanned.
    pub border_pdp: Option<(f64, f64)>,
}

struct Required {
    ret_lo: (f64, f64),
    ret_hi: (f64, f64),
    vdd_nom: f64,
    pdp_nom: f64,
    fmin_hz: f64,
    vdd_border: f64,
    pdp_border: Option<Interval>,
}

fn required(a: &AnchorSet) -> Result<Required> {
    let missing = |k: &str| Error::infeasible(k, "anchor missing");
    let ret_lo = *a
        .retention_uw
        .first()
        .ok_or_else(|| missing("retention_uW@25C"))?;
    let ret_hi = *a
        .retention_uw
        .last()
        .filter(|r| r.0 > ret_lo.0)
        .ok_or_else(|| missing("retention_uW@125C"))?;
    let vdd_nom = a.vdd_nom.ok_or_else(|| missing(KEY_VDD_NOM))?;
    let pdp_key = format!("{KEY_PDP}@{vdd_nom}V");
    let pdp_nom = a.pdp_at(vdd_nom).ok_or_else(|| missing(&pdp_key))?;
    if !pdp_nom.is_point() {
        return Err(Error::infeasible(
            pdp_key,
            "nominal PDP must be a single value",
        ));
    }
    let fmin = a.fmin_mhz.ok_or_else(|| missing(KEY_FMIN))?;
    let vdd_border = a.signoff_vdd_min.ok_or_else(|| missing(KEY_SIGNOFF_VMIN))?;
    if let Some(r) = a.temp_range {
        if r.lo < TEMP_MIN_C || r.hi > TEMP_MAX_C {
            return Err(Error::infeasible(
                KEY_TEMP_RANGE,
                format!("{r} exceeds the modelled range"),
            ));
        }
    }
    for (t, v) in &a.retention_uw {
        if !(*v > 0.0) || !(TEMP_MIN_C..=TEMP_MAX_C).contains(t) {
            return Err(Error::infeasible(
                format!("{KEY_RETENTION}@{t}C"),
                format!("value {v}"),
            ));
        }
    }
    if !(ret_hi.1 > ret_lo.1) {
        return Err(Error::infeasible(
            format!("{KEY_RETENTION}@{}C", ret_hi.0),
            "retention power must rise with temperature",
        ));
    }
    Ok(Required {
        ret_lo,
        ret_hi,
        vdd_nom,
        pdp_nom: pdp_nom.lo,
        fmin_hz: fmin * 1e6,
        vdd_border,
        pdp_border: a.pdp_at(vdd_border),
    })
}

fn op(vdd: f64, t: f64, c: ProcessCorner, anchor: &str) -> Result<OperatingPoint> {
    OperatingPoint::new(vdd, t, c).map_err(|e| Error::infeasible(anchor, e.to_string()))
}

/// Fit every coefficient for a given subthreshold slope.
fn fit_for_slope(
    n: f64,
    r: &Required,
    pol: &CalibrationPolicy,
    plat: &PlatformConfig,
) -> Result<DeviceParams> {
    let ret_anchor = format!("{KEY_RETENTION}@{}C", r.ret_lo.0);
    let vt_lo = thermal_voltage(r.ret_lo.0)?;
    let vt_hi = thermal_voltage(r.ret_hi.0)?;
    // Temperature fit: at a fixed (rail-saturated) retention bias the ratio
    // of the two anchors depends only on vth/n.
    let theta = (r.ret_hi.1 / r.ret_lo.1).ln() / (1.0 / vt_lo - 1.0 / vt_hi);
    let vth_ret = n * theta;
    // Bias/corner fit: typical retention sits on the bias rail.
    let rail = plat.abb.bias_rail_max;
    let vth0 = vth_ret - pol.gamma_body * rail;
    // Delay fit: slow corner at zero bias and the lowest sign-off supply
    // clears the frequency floor by the guard margin.
    let vdd_min = r.vdd_nom * (1.0 - pol.vdd_spread);
    let overdrive = vdd_min - (vth0 + pol.sigma_vth);
    if overdrive <= 0.0 {
        return Err(Error::infeasible(
            KEY_FMIN,
            format!(
                "slow corner threshold {:.3} V above {vdd_min:.3} V",
                vth0 + pol.sigma_vth
            ),
        ));
    }
    let k_delay = overdrive.powf(pol.alpha) / (pol.n_crit * vdd_min * r.fmin_hz * pol.delay_guard);
    // Leakage magnitudes from the reference retention power.
    let vdd_ref = r.vdd_nom;
    let unit = (-vth_ret / (n * vt_lo)).exp();
    let p_ret = r.ret_lo.1 * 1e-6;
    let kib = plat.total_sram_kib();
    let i0_wake = pol.wake_share * p_ret / unit;
    let i0_sram_cell = (1.0 - pol.wake_share) * p_ret / (unit * kib);
    let i0_sram_periph = i0_sram_cell * pol.periph_fraction / (1.0 - pol.periph_fraction);
    let i0_logic = kib * (i0_sram_cell + i0_sram_periph) * pol.logic_to_sram_leakage;
    let mut p = DeviceParams {
        vth0,
        sigma_vth: pol.sigma_vth,
        gamma_body: pol.gamma_body,
        n_slope: n,
        i0_logic,
        i0_sram_cell,
        i0_sram_periph,
        i0_wake,
        alpha: pol.alpha,
        k_delay,
        n_crit: pol.n_crit,
        cdyn_logic: 1.0,
        vdd_ref,
        vth_temp_bow: 0.0,
    };
    p.validate()
        .map_err(|e| Error::infeasible(&ret_anchor, e.to_string()))?;
    // Dynamic capacitance from the nominal PDP at the locked active bias.
    let pdp_anchor = format!("{KEY_PDP}@{}V", r.vdd_nom);
    let nom = op(r.vdd_nom, r.ret_lo.0, ProcessCorner::TYPICAL, &pdp_anchor)?;
    let abb = plat.abb.with_target(r.fmin_hz);
    let lock = regulate_from(&abb, &nom, &p, BiasPair::ZERO)
        .map_err(|e| Error::infeasible(&pdp_anchor, e.to_string()))?;
    let leak = LeakageParts::at(&p, plat, &nom, &lock.bias).awake();
    let p_active = r.pdp_nom * 1e-6 * (r.fmin_hz / 1e6);
    let cdyn = (p_active - leak) / (r.vdd_nom * r.vdd_nom * r.fmin_hz);
    if !(cdyn > 0.0) {
        return Err(Error::infeasible(
            pdp_anchor,
            format!(
                "leakage {:.1} µW exceeds active power {:.1} µW",
                leak * 1e6,
                p_active * 1e6
            ),
        ));
    }
    p.cdyn_logic = cdyn;
    Ok(p)
}

/// Minimum PDP over frequencies that pass every shmoo predicate, µW/MHz.
pub(crate) fn min_pdp_at(
    p: &DeviceParams,
    plat: &PlatformConfig,
    base: &OperatingPoint,
    freqs: &[f64],
) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &f in freqs {
        if let Ok(c) = crate::signoff::shmoo_cell(base, f, p, plat) {
            if let Some(pdp) = c.pdp() {
                if best.is_none_or(|(_, b)| pdp < b) {
                    best = Some((f, pdp));
                }
            }
        }
    }
    best
}

fn rel_check(anchor: String, target: f64, model: f64, tol: f64) -> AnchorCheck {
    AnchorCheck {
        pass: ((model - target) / target).abs() <= tol,
        anchor,
        target: Interval::point(target),
        model,
    }
}

fn verify(
    p: &DeviceParams,
    r: &Required,
    a: &AnchorSet,
    pol: &CalibrationPolicy,
    plat: &PlatformConfig,
) -> Result<(Vec<AnchorCheck>, Option<(f64, f64)>)> {
    let mut checks = Vec::new();
    for &(t, v) in &a.retention_uw {
        let name = format!("{KEY_RETENTION}@{t}C");
        let o = op(r.vdd_nom, t, ProcessCorner::TYPICAL, &name)?;
        let m = mode_point(PowerMode::Retention, &o, p, plat)
            .map_err(|e| Error::infeasible(&name, e.to_string()))?;
        checks.push(rel_check(name, v, m.total() * 1e6, pol.tolerance));
    }
    let name = format!("{KEY_PDP}@{}V", r.vdd_nom);
    let nom = op(r.vdd_nom, r.ret_lo.0, ProcessCorner::TYPICAL, &name)?;
    let act = mode_point(PowerMode::Active(r.fmin_hz), &nom, p, plat)
        .map_err(|e| Error::infeasible(&name, e.to_string()))?;
    checks.push(rel_check(
        name,
        r.pdp_nom,
        act.total() * 1e6 / (r.fmin_hz / 1e6),
        pol.tolerance,
    ));

    let vdd_min = r.vdd_nom * (1.0 - pol.vdd_spread);
    let mut worst = f64::INFINITY;
    for t in [TEMP_MIN_C, TEMP_MAX_C] {
        let o = op(vdd_min, t, ProcessCorner::SLOW_SLOW, KEY_FMIN)?;
        let f = crate::device::max_frequency(p, &o, &BiasPair::ZERO).unwrap_or(0.0);
        worst = worst.min(f);
    }
    checks.push(AnchorCheck {
        anchor: KEY_FMIN.into(),
        target: Interval {
            lo: r.fmin_hz / 1e6,
            hi: f64::INFINITY,
        },
        model: worst / 1e6,
        pass: worst >= r.fmin_hz,
    });

    let border_op = op(
        r.vdd_border,
        r.ret_lo.0,
        ProcessCorner::TYPICAL,
        KEY_SIGNOFF_VMIN,
    )?;
    let border = min_pdp_at(p, plat, &border_op, &pol.pdp_freqs);
    checks.push(AnchorCheck {
        anchor: KEY_SIGNOFF_VMIN.into(),
        target: Interval::point(r.vdd_border),
        model: if border.is_some() {
            r.vdd_border
        } else {
            f64::NAN
        },
        pass: border.is_some() && plat.sram_vmin <= r.vdd_border + 1e-9,
    });
    if let Some(iv) = r.pdp_border {
        let model = border.map_or(f64::NAN, |b| b.1);
        checks.push(AnchorCheck {
            anchor: format!("{KEY_PDP}@{}V", r.vdd_border),
            target: iv,
            pass: model >= iv.lo && model <= iv.hi,
            model,
        });
    }
    Ok((checks, border))
}

/// Fit with the default policy and platform and return the parameters.
pub fn calibrate_models(anchors: &AnchorSet) -> Result<DeviceParams> {
    calibrate_with(
        anchors,
        &CalibrationPolicy::default(),
        &PlatformConfig::default(),
    )
    .map(|c| c.params)
}

pub fn calibrate_with(
    anchors: &AnchorSet,
    policy: &CalibrationPolicy,
    platform: &PlatformConfig,
) -> Result<Calibration> {
    policy.validate()?;
    platform.validate()?;
    let r = required(anchors)?;
    let params = match r.pdp_border {
        None => fit_for_slope(policy.n_slope_default, &r, policy, platform)?,
        Some(window) => fit_slope(&r, window, policy, platform)?,
    };
    let (checks, border_pdp) = verify(&params, &r, anchors, policy, platform)?;
    if let Some(bad) = checks.iter().find(|c| !c.pass) {
        return Err(Error::infeasible(
            bad.anchor.clone(),
            format!("model {:.4} vs target {}", bad.model, bad.target),
        ));
    }
    Ok(Calibration {
        params,
        checks,
        vdd_nom: r.vdd_nom,
        vdd_signoff_min: r.vdd_nom * (1.0 - policy.vdd_spread),
        vdd_signoff_max: r.vdd_nom * (1.0 + policy.vdd_spread),
        fmin_hz: r.fmin_hz,
        border_pdp,
    })
}

/// Bisection on the slope factor towards the middle of the border window.
/// The border PDP moves in small steps where the regulator's landing point
/// inside its tolerance band changes, so the candidate closest to the window
/// centre is kept rather than the last bracket.
fn fit_slope(
    r: &Required,
    window: Interval,
    pol: &CalibrationPolicy,
    plat: &PlatformConfig,
) -> Result<DeviceParams> {
    let border_anchor = format!("{KEY_PDP}@{}V", r.vdd_border);
    let border_op = op(
        r.vdd_border,
        r.ret_lo.0,
        ProcessCorner::TYPICAL,
        &border_anchor,
    )?;
    let target = window.mid();
    let eval = |n: f64| -> Result<(DeviceParams, f64)> {
        let p = fit_for_slope(n, r, pol, plat)?;
        let pdp = min_pdp_at(&p, plat, &border_op, &pol.pdp_freqs)
            .map(|b| b.1)
            .ok_or_else(|| {
                Error::infeasible(&border_anchor, format!("no passing cell at n={n:.4}"))
            })?;
        Ok((p, pdp))
    };
    let (mut lo, mut hi) = pol.n_slope_range;
    let (p_lo, d_lo) = eval(lo)?;
    let (p_hi, d_hi) = eval(hi)?;
    let mut best = if (d_lo - target).abs() <= (d_hi - target).abs() {
        (p_lo, d_lo)
    } else {
        (p_hi, d_hi)
    };
    if (d_lo - target).signum() == (d_hi - target).signum() {
        return Err(Error::infeasible(
            border_anchor,
            format!("border PDP spans {d_lo:.3}..{d_hi:.3} over the slope range, target {window}"),
        ));
    }
    let rising = d_hi > d_lo;
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        let (p, d) = eval(mid)?;
        if (d - target).abs() < (best.1 - target).abs() {
            best = (p, d);
        }
        if (d < target) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
        if (d - target).abs() < 1e-9 * target {
            break;
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_parsing() {
        assert_eq!(
            Interval::parse("3.8..3.9"),
            Some(Interval { lo: 3.8, hi: 3.9 })
        );
        assert_eq!(
            Interval::parse("-40..125"),
            Some(Interval {
                lo: -40.0,
                hi: 125.0
            })
        );
        assert_eq!(Interval::parse("4.8"), Some(Interval::point(4.8)));
        assert_eq!(Interval::parse("3..1"), None);
        assert_eq!(Interval::parse("x"), None);
    }

    #[test]
    fn shipped_anchor_file() {
        let a = AnchorSet::paper();
        assert_eq!(a.retention_uw, vec![(25.0, 3.2), (125.0, 142.0)]);
        assert_eq!(a.pdp_at(0.55), Some(Interval::point(4.8)));
        assert_eq!(a.pdp_at(0.50), Some(Interval { lo: 3.8, hi: 3.9 }));
        assert_eq!(a.fmin_mhz, Some(50.0));
        assert_eq!(a.signoff_vdd_min, Some(0.50));
        assert_eq!(a.vdd_nom, Some(0.55));
        assert_eq!(
            a.temp_range,
            Some(Interval {
                lo: -40.0,
                hi: 125.0
            })
        );
        assert_eq!(AnchorSet::parse(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn anchor_parse_errors() {
        assert!(matches!(
            AnchorSet::parse("nonsense"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(AnchorSet::parse("mystery_key=1").is_err());
        assert!(AnchorSet::parse("fmin_MHz=40..50").is_err());
        assert!(AnchorSet::parse("retention_uW@hotC=3").is_err());
    }

    #[test]
    fn temperature_oracle() {
        // Two-point exponential fit solved by hand: T_c = 100 / ln(142/3.2).
        let tc = 100.0 / (142.0f64 / 3.2).ln();
        assert!((tc - 26.37).abs() < 0.01);
    }

    #[test]
    fn empty_set_is_infeasible() {
        match calibrate_models(&AnchorSet::default()) {
            Err(Error::CalibrationInfeasible { anchor, .. }) => {
                assert_eq!(anchor, "retention_uW@25C")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn first_missing_anchor_is_named() {
        let mut a = AnchorSet::paper();
        a.fmin_mhz = None;
        match calibrate_models(&a) {
            Err(Error::CalibrationInfeasible { anchor, .. }) => assert_eq!(anchor, KEY_FMIN),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unreachable_border_window_is_reported() {
        let mut a = AnchorSet::paper();
        a.pdp = vec![
            (0.50, Interval { lo: 1.0, hi: 1.1 }),
            (0.55, Interval::point(4.8)),
        ];
        match calibrate_models(&a) {
            Err(Error::CalibrationInfeasible { anchor, .. }) => {
                assert_eq!(anchor, "total_pdp_uW_per_MHz@0.5V")
            }
            other => panic!("{other:?}"),
        }
    }
}
