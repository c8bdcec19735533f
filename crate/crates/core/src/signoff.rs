//! PVT sign-off under adaptive body bias and shmoo scanning.

use std::cmp::Ordering;
use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abb::{regulate_from, settled_bias};
use crate::device::{
    max_frequency, BiasPair, DeviceParams, OperatingPoint, ProcessCorner, TEMP_MAX_C, TEMP_MIN_C,
};
use crate::error::{Error, NoLockReason, Result};
use crate::modes::{mode_point, LeakageParts, PlatformConfig, PowerMode};

/// Slack on supply thresholds so axis values like 0.50 compare as intended.
const VDD_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SignoffGrid {
    pub corners: Vec<ProcessCorner>,
    pub vdd_points: Vec<f64>,
    pub temps: Vec<f64>,
}

impl SignoffGrid {
    /// Slow to fast corners, nominal ±`spread`, and temperatures across the
    /// qualified range.
    pub fn standard(vdd_nom: f64, spread: f64) -> Result<Self> {
        let g = SignoffGrid {
            corners: vec![
                ProcessCorner::SLOW_SLOW,
                ProcessCorner::TYPICAL,
                ProcessCorner::FAST_FAST,
            ],
            vdd_points: vec![vdd_nom * (1.0 - spread), vdd_nom, vdd_nom * (1.0 + spread)],
            temps: vec![TEMP_MIN_C, 0.0, 25.0, 85.0, TEMP_MAX_C],
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.corners.is_empty() || self.vdd_points.is_empty() || self.temps.is_empty() {
            return Err(Error::invalid(
                "sign-off grid",
                "every axis needs at least one point",
            ));
        }
        Ok(())
    }

    /// True when the grid contains the slow/fast × cold/hot extremes.
    pub fn has_bounding_corners(&self) -> bool {
        let has_c = |c: ProcessCorner| self.corners.contains(&c);
        let has_t = |t: f64| self.temps.contains(&t);
        has_c(ProcessCorner::SLOW_SLOW)
            && has_c(ProcessCorner::FAST_FAST)
            && has_t(TEMP_MIN_C)
            && has_t(TEMP_MAX_C)
    }

    pub fn points(&self) -> Result<Vec<OperatingPoint>> {
        let mut out =
            Vec::with_capacity(self.corners.len() * self.vdd_points.len() * self.temps.len());
        for &c in &self.corners {
            for &v in &self.vdd_points {
                for &t in &self.temps {
                    out.push(OperatingPoint::new(v, t, c)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignoffPoint {
    pub op: OperatingPoint,
    /// Locked bias, or the reason the regulator failed.
    pub lock: std::result::Result<BiasPair, NoLockReason>,
    pub fmax: f64,
    /// Awake leakage of the chip at the locked bias, W.
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignoffReport {
    pub target_freq: f64,
    pub points: Vec<SignoffPoint>,
    pub worst_fmax: Option<SignoffPoint>,
    pub worst_leakage: Option<SignoffPoint>,
}

impl SignoffReport {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.lock.is_err()).count()
    }
}

fn point_key(op: &OperatingPoint) -> (f64, f64, f64) {
    (op.corner().sigma(), op.vdd(), op.temp_c())
}

/// Orders by value, then by operating point, so that the chosen extreme does
/// not depend on the order grid points are visited in.
fn order(a_val: f64, a: &OperatingPoint, b_val: f64, b: &OperatingPoint) -> Ordering {
    let (ka, kb) = (point_key(a), point_key(b));
    a_val
        .total_cmp(&b_val)
        .then(ka.0.total_cmp(&kb.0))
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
}

pub fn corner_sweep(
    grid: &SignoffGrid,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<SignoffReport> {
    grid.validate()?;
    let mut points = Vec::new();
    for op in grid.points()? {
        let point = match regulate_from(&cfg.abb, &op, p, BiasPair::ZERO) {
            Ok(l) => SignoffPoint {
                op,
                lock: Ok(l.bias),
                fmax: l.fmax,
                leakage: LeakageParts::at(p, cfg, &op, &l.bias).awake(),
            },
            Err(Error::NoLock { reason, .. }) => SignoffPoint {
                op,
                lock: Err(reason),
                fmax: max_frequency(p, &op, &BiasPair::ZERO).unwrap_or(0.0),
                leakage: LeakageParts::at(p, cfg, &op, &BiasPair::ZERO).awake(),
            },
            Err(e) => return Err(e),
        };
        points.push(point);
    }
    let worst_fmax = points
        .iter()
        .min_by(|a, b| order(a.fmax, &a.op, b.fmax, &b.op))
        .cloned();
    let worst_leakage = points
        .iter()
        .max_by(|a, b| order(a.leakage, &a.op, b.leakage, &b.op))
        .cloned();
    Ok(SignoffReport {
        target_freq: cfg.abb.target_freq,
        points,
        worst_fmax,
        worst_leakage,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Speed,
    Leakage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub op: OperatingPoint,
    pub fmax: f64,
    pub leakage: f64,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundingResult {
    pub pass: bool,
    pub samples: usize,
    pub corner_fmax_min: f64,
    pub corner_leakage_max: f64,
    pub counterexamples: Vec<Counterexample>,
}

/// Relative slack for comparing samples against corners; the settled bias is
/// a closed form, so only rounding separates equal frequencies.
const BOUNDING_REL_TOL: f64 = 1e-9;

fn settled_eval(p: &DeviceParams, cfg: &PlatformConfig, op: &OperatingPoint) -> (f64, f64) {
    let b = settled_bias(&cfg.abb, op, p);
    let f = max_frequency(p, op, &b).unwrap_or(0.0);
    (f, LeakageParts::at(p, cfg, op, &b).awake())
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Check that interior PVT points never beat the slow/fast × cold/hot corners.
///
/// Samples draw sigma, supply and temperature uniformly; every point is
/// evaluated at the regulator's settled bias. Corners are evaluated at both
/// ends of `vdd_range`.
pub fn bounding_corner_check(
    p: &DeviceParams,
    cfg: &PlatformConfig,
    vdd_range: (f64, f64),
    n_samples: usize,
    seed: u64,
) -> Result<BoundingResult> {
    let (vlo, vhi) = vdd_range;
    if !(vlo <= vhi) {
        return Err(Error::invalid(
            "bounding check",
            format!("vdd range {vlo}..{vhi}"),
        ));
    }
    let mut fmin = f64::INFINITY;
    let mut lmax: f64 = 0.0;
    for c in [ProcessCorner::SLOW_SLOW, ProcessCorner::FAST_FAST] {
        for t in [TEMP_MIN_C, TEMP_MAX_C] {
            for v in [vlo, vhi] {
                let (f, l) = settled_eval(p, cfg, &OperatingPoint::new(v, t, c)?);
                fmin = fmin.min(f);
                lmax = lmax.max(l);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counterexamples = Vec::new();
    for _ in 0..n_samples {
        let sigma = -1.0 + 2.0 * unit(&mut rng);
        let vdd = vlo + (vhi - vlo) * unit(&mut rng);
        let temp = TEMP_MIN_C + (TEMP_MAX_C - TEMP_MIN_C) * unit(&mut rng);
        let op = OperatingPoint::new(vdd, temp, ProcessCorner::interior(sigma)?)?;
        let (f, l) = settled_eval(p, cfg, &op);
        if f < fmin * (1.0 - BOUNDING_REL_TOL) {
            counterexamples.push(Counterexample {
                op,
                fmax: f,
                leakage: l,
                violation: Violation::Speed,
            });
        }
        if l > lmax * (1.0 + BOUNDING_REL_TOL) {
            counterexamples.push(Counterexample {
                op,
                fmax: f,
                leakage: l,
                violation: Violation::Leakage,
            });
        }
    }
    Ok(BoundingResult {
        pass: counterexamples.is_empty(),
        samples: n_samples,
        corner_fmax_min: fmin,
        corner_leakage_max: lmax,
        counterexamples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailCause {
    PllLock,
    AbbLock,
    Mbist,
    Workload,
}

impl fmt::Display for FailCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailCause::PllLock => "PllLock",
            FailCause::AbbLock => "AbbLock",
            FailCause::Mbist => "Mbist",
            FailCause::Workload => "Workload",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShmooCell {
    /// `pdp` in µW/MHz at the locked bias.
    Pass {
        pdp: f64,
    },
    Fail(FailCause),
}

impl ShmooCell {
    pub fn is_pass(&self) -> bool {
        matches!(self, ShmooCell::Pass { .. })
    }

    pub fn pdp(&self) -> Option<f64> {
        match self {
            ShmooCell::Pass { pdp } => Some(*pdp),
            ShmooCell::Fail(_) => None,
        }
    }

    pub fn code(&self) -> String {
        match self {
            ShmooCell::Pass { .. } => "P".to_string(),
            ShmooCell::Fail(c) => format!("F:{c}"),
        }
    }
}

/// Evaluate one shmoo cell: PLL lock, ABB lock at `freq`, MBIST, workload.
///
/// An ABB target the silicon cannot reach even at zero bias is a workload
/// failure: the regulator settles at zero bias and the clock outruns the
/// critical path. The workload passes when `freq` is within the lock
/// tolerance of the locked critical-path frequency.
pub fn shmoo_cell(
    base: &OperatingPoint,
    freq: f64,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<ShmooCell> {
    let vdd = base.vdd();
    if vdd < cfg.pll_vmin - VDD_SLACK {
        return Ok(ShmooCell::Fail(FailCause::PllLock));
    }
    let point = match mode_point(PowerMode::Active(freq), base, p, cfg) {
        Ok(m) => Some(m),
        Err(Error::NoLock {
            reason: NoLockReason::BudgetExhausted,
            ..
        }) => return Ok(ShmooCell::Fail(FailCause::AbbLock)),
        Err(Error::NoLock {
            reason: NoLockReason::Unreachable,
            ..
        }) => None,
        Err(e) => return Err(e),
    };
    if vdd < cfg.sram_vmin - VDD_SLACK {
        return Ok(ShmooCell::Fail(FailCause::Mbist));
    }
    match point {
        Some(m) if freq <= m.lock.fmax * (1.0 + cfg.abb.epsilon_rel) => Ok(ShmooCell::Pass {
            pdp: m.total() * 1e6 / (freq / 1e6),
        }),
        _ => Ok(ShmooCell::Fail(FailCause::Workload)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShmooGrid {
    /// Ascending supplies, V.
    pub vdd_axis: Vec<f64>,
    /// Ascending clock frequencies, Hz.
    pub freq_axis: Vec<f64>,
    /// `cells[i][j]` is at `vdd_axis[i]`, `freq_axis[j]`.
    pub cells: Vec<Vec<ShmooCell>>,
    pub temp_c: f64,
    pub corner: ProcessCorner,
}

impl ShmooGrid {
    pub fn cell(&self, vdd: f64, freq: f64) -> Option<ShmooCell> {
        let i = self.vdd_axis.iter().position(|v| (v - vdd).abs() < 1e-9)?;
        let j = self
            .freq_axis
            .iter()
            .position(|f| (f - freq).abs() < 1e-3)?;
        Some(self.cells[i][j])
    }

    /// Passing frequencies at each supply form a prefix of the frequency axis.
    pub fn is_downward_closed(&self) -> bool {
        self.cells.iter().all(|row| {
            let first_fail = row.iter().position(|c| !c.is_pass()).unwrap_or(row.len());
            row[first_fail..].iter().all(|c| !c.is_pass())
        })
    }

    /// Passing supplies at each frequency form a suffix of the supply axis.
    pub fn is_upward_closed(&self) -> bool {
        (0..self.freq_axis.len()).all(|j| {
            let col: Vec<bool> = self.cells.iter().map(|r| r[j].is_pass()).collect();
            let first_pass = col.iter().position(|&b| b).unwrap_or(col.len());
            col[first_pass..].iter().all(|&b| b)
        })
    }

    /// Lowest PDP among passing cells at `vdd`, with its frequency.
    pub fn min_pdp_at(&self, vdd: f64) -> Option<(f64, f64)> {
        let i = self.vdd_axis.iter().position(|v| (v - vdd).abs() < 1e-9)?;
        self.cells[i]
            .iter()
            .zip(&self.freq_axis)
            .filter_map(|(c, &f)| c.pdp().map(|d| (f, d)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Inclusive `start:stop:step` axis with values rounded to 6 decimals.
pub fn parse_axis(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::invalid("axis", format!("`{text}`")))
    };
    match parts.as_slice() {
        [one] => Ok(vec![round6(num(one)?)]),
        [a, b, s] => {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if !(s > 0.0) || b < a {
                return Err(Error::invalid(
                    "axis",
                    format!("`{text}` needs start <= stop and step > 0"),
                ));
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(Error::invalid(
                    "axis",
                    format!("`{text}` has too many points"),
                ));
            }
            Ok((0..=n).map(|i| round6(a + s * i as f64)).collect())
        }
        _ => Err(Error::invalid(
            "axis",
            format!("`{text}` is not start:stop:step"),
        )),
    }
}

pub fn shmoo_scan(
    vdd_axis: &[f64],
    freq_axis: &[f64],
    temp_c: f64,
    corner: ProcessCorner,
    p: &DeviceParams,
    cfg: &PlatformConfig,
) -> Result<ShmooGrid> {
    let sorted = |a: &[f64]| !a.is_empty() && a.windows(2).all(|w| w[0] < w[1]);
    if !sorted(vdd_axis) || !sorted(freq_axis) {
        return Err(Error::invalid(
            "shmoo axes",
            "axes must be non-empty and strictly ascending",
        ));
    }
    if freq_axis[0] <= 0.0 {
        return Err(Error::invalid("shmoo axes", "frequencies must be > 0"));
    }
    let vdd_axis: Vec<f64> = vdd_axis.iter().map(|&v| round6(v)).collect();
    let mut cells = Vec::with_capacity(vdd_axis.len());
    for &v in &vdd_axis {
        let base = OperatingPoint::new(v, temp_c, corner)?;
        let row = freq_axis
            .iter()
            .map(|&f| shmoo_cell(&base, f, p, cfg))
            .collect::<Result<Vec<_>>>()?;
        cells.push(row);
    }
    Ok(ShmooGrid {
        vdd_axis,
        freq_axis: freq_axis.to_vec(),
        cells,
        temp_c,
        corner,
    })
}
