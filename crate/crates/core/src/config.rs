//! Run configuration: flat `section.key=value` files layered over the
//! built-in `paper` preset.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::abb::RegulatorConfig;
use crate::calibration::{AnchorSet, CalibrationPolicy};
use crate::device::{OperatingPoint, ProcessCorner};
use crate::error::{Error, Result};
use crate::modes::PlatformConfig;
use crate::sram::{BankConfig, SramMacroConfig, DEFAULT_SEGMENTS};
use crate::trace::TraceGenConfig;

pub const DEFAULT_OUT_DIR: &str = "abbsim-out";
pub const OUT_ENV: &str = "ABBSIM_OUT";

#[derive(Debug, Clone, PartialEq)]
pub struct SramSection {
    pub macro_kib: u32,
    pub segments: u32,
    pub current_limit_ma: f64,
    /// Wake time of the reference eight-stage sequence; the stage spacing is
    /// this divided by eight, so more segments take proportionally longer.
    pub wake_ns: f64,
}

impl Default for SramSection {
    fn default() -> Self {
        SramSection {
            macro_kib: 4,
            segments: DEFAULT_SEGMENTS,
            current_limit_ma: 0.2,
            wake_ns: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` selects the shipped anchor set.
    pub anchors_path: Option<PathBuf>,
    pub anchors: AnchorSet,
    pub policy: CalibrationPolicy,
    pub abb: RegulatorConfig,
    pub sram: SramSection,
    pub pll_vmin: f64,
    pub sram_vmin: f64,
    pub bounding_samples: usize,
    pub trace: TraceGenConfig,
    pub trace_cycles: u64,
    pub report_temp_c: f64,
    pub report_corner: ProcessCorner,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::preset("paper").expect("paper preset exists")
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::invalid("config value", format!("{key}={v} is not a number")))
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::invalid("config value", format!("{key}={v} is not an integer")))
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper" => Ok(RunConfig {
                anchors_path: None,
                anchors: AnchorSet::paper(),
                policy: CalibrationPolicy::default(),
                abb: RegulatorConfig::default(),
                sram: SramSection::default(),
                pll_vmin: 0.45,
                sram_vmin: 0.50,
                bounding_samples: 10_000,
                trace: TraceGenConfig::default(),
                trace_cycles: 200_000,
                report_temp_c: 25.0,
                report_corner: ProcessCorner::TYPICAL,
                out_dir: None,
                seed: 0,
            }),
            other => Err(Error::invalid(
                "preset",
                format!("unknown preset `{other}` (available: paper)"),
            )),
        }
    }

    /// Apply one `section.key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let f = |k| parse_f64(k, v);
        match key {
            "anchors.path" => {
                let p = PathBuf::from(v);
                self.anchors = AnchorSet::read(&p)?;
                self.anchors_path = Some(p);
            }
            "device.gamma_body" => self.policy.gamma_body = f(key)?,
            "device.sigma_vth" => self.policy.sigma_vth = f(key)?,
            "device.alpha" => self.policy.alpha = f(key)?,
            "device.n_crit" => self.policy.n_crit = f(key)?,
            "device.wake_share" => self.policy.wake_share = f(key)?,
            "device.periph_fraction" => self.policy.periph_fraction = f(key)?,
            "device.delay_guard" => self.policy.delay_guard = f(key)?,
            "abb.target_mhz" => self.abb.target_freq = f(key)? * 1e6,
            "abb.retention_target_mhz" => self.abb.retention_target_freq = f(key)? * 1e6,
            "abb.gain" => self.abb.gain = f(key)?,
            "abb.epsilon_rel" => self.abb.epsilon_rel = f(key)?,
            "abb.rail_max_v" => self.abb.bias_rail_max = f(key)?,
            "abb.lock_count" => self.abb.lock_count = parse_int(key, v)?,
            "abb.max_steps" => self.abb.max_steps = parse_int(key, v)?,
            "abb.step_period_us" => self.abb.step_period = f(key)? * 1e-6,
            "abb.nwell_share" => self.abb.nwell_share = f(key)?,
            "abb.monitor_offset_rel" => self.abb.monitor_offset_rel = f(key)?,
            "sram.macro_kib" => self.sram.macro_kib = parse_int(key, v)?,
            "sram.segments" => self.sram.segments = parse_int(key, v)?,
            "sram.current_limit_ma" => self.sram.current_limit_ma = f(key)?,
            "sram.wake_ns" => self.sram.wake_ns = f(key)?,
            "signoff.pll_vmin" => self.pll_vmin = f(key)?,
            "signoff.sram_vmin" => self.sram_vmin = f(key)?,
            "signoff.samples" => self.bounding_samples = parse_int(key, v)?,
            "trace.rate" => self.trace.access_rate = f(key)?,
            "trace.write_fraction" => self.trace.write_fraction = f(key)?,
            "trace.locality" => self.trace.locality = f(key)?,
            "trace.toggle_mean" => self.trace.toggle_mean = f(key)?,
            "trace.cycles" => self.trace_cycles = parse_int(key, v)?,
            "report.temp_c" => self.report_temp_c = f(key)?,
            "report.corner" => self.report_corner = ProcessCorner::parse(v)?,
            "output.dir" => self.out_dir = Some(PathBuf::from(v)),
            other => {
                return Err(Error::invalid(
                    "config key",
                    format!("unknown key `{other}`"),
                ))
            }
        }
        Ok(())
    }

    /// Layer a config file's settings onto `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                detail: format!("expected section.key=value, found `{line}`"),
            })?;
            self.set(k.trim(), v).map_err(|e| Error::Config {
                line: i + 1,
                detail: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    /// Every model-relevant setting in canonical sorted form. The anchor set
    /// is included by content so equal files at different paths hash alike.
    pub fn canonical_entries(&self) -> Vec<(String, String)> {
        let a = &self.abb;
        let mut e: Vec<(String, String)> = vec![
            ("abb.epsilon_rel".into(), a.epsilon_rel.to_string()),
            ("abb.gain".into(), a.gain.to_string()),
            ("abb.lock_count".into(), a.lock_count.to_string()),
            ("abb.max_steps".into(), a.max_steps.to_string()),
            (
                "abb.monitor_offset_rel".into(),
                a.monitor_offset_rel.to_string(),
            ),
            ("abb.nwell_share".into(), a.nwell_share.to_string()),
            ("abb.rail_max_v".into(), a.bias_rail_max.to_string()),
            (
                "abb.retention_target_mhz".into(),
                (a.retention_target_freq / 1e6).to_string(),
            ),
            (
                "abb.step_period_us".into(),
                (a.step_period * 1e6).to_string(),
            ),
            ("abb.target_mhz".into(), (a.target_freq / 1e6).to_string()),
            ("device.alpha".into(), self.policy.alpha.to_string()),
            (
                "device.delay_guard".into(),
                self.policy.delay_guard.to_string(),
            ),
            (
                "device.gamma_body".into(),
                self.policy.gamma_body.to_string(),
            ),
            ("device.n_crit".into(), self.policy.n_crit.to_string()),
            (
                "device.periph_fraction".into(),
                self.policy.periph_fraction.to_string(),
            ),
            ("device.sigma_vth".into(), self.policy.sigma_vth.to_string()),
            (
                "device.wake_share".into(),
                self.policy.wake_share.to_string(),
            ),
            ("report.corner".into(), self.report_corner.name()),
            ("report.temp_c".into(), self.report_temp_c.to_string()),
            ("signoff.pll_vmin".into(), self.pll_vmin.to_string()),
            ("signoff.samples".into(), self.bounding_samples.to_string()),
            ("signoff.sram_vmin".into(), self.sram_vmin.to_string()),
            (
                "sram.current_limit_ma".into(),
                self.sram.current_limit_ma.to_string(),
            ),
            ("sram.macro_kib".into(), self.sram.macro_kib.to_string()),
            ("sram.segments".into(), self.sram.segments.to_string()),
            ("sram.wake_ns".into(), self.sram.wake_ns.to_string()),
            ("trace.cycles".into(), self.trace_cycles.to_string()),
            ("trace.locality".into(), self.trace.locality.to_string()),
            ("trace.rate".into(), self.trace.access_rate.to_string()),
            (
                "trace.toggle_mean".into(),
                self.trace.toggle_mean.to_string(),
            ),
            (
                "trace.write_fraction".into(),
                self.trace.write_fraction.to_string(),
            ),
        ];
        for line in self.anchors.to_text().lines() {
            if let Some((k, v)) = line.split_once('=') {
                e.push((format!("anchors.{k}"), v.to_string()));
            }
        }
        e.sort();
        e
    }

    /// SHA-256 of the canonical entries, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.canonical_entries() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn platform(&self) -> Result<PlatformConfig> {
        let mut sram = SramMacroConfig::with_segments(
            self.sram.macro_kib,
            self.sram.segments,
            self.sram.wake_ns * 1e-9 / DEFAULT_SEGMENTS as f64,
        )?;
        sram.current_limit = self.sram.current_limit_ma * 1e-3;
        let p = PlatformConfig {
            abb: self.abb.clone(),
            sram,
            bank: BankConfig::new(self.sram.macro_kib)?,
            pll_vmin: self.pll_vmin,
            sram_vmin: self.sram_vmin,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn vdd_nom(&self) -> f64 {
        self.anchors.vdd_nom.unwrap_or(0.55)
    }

    pub fn report_op(&self) -> Result<OperatingPoint> {
        OperatingPoint::new(self.vdd_nom(), self.report_temp_c, self.report_corner)
    }

    /// Output directory: explicit flag, then the environment, then the
    /// config file, then the default.
    pub fn resolve_out_dir(&self, flag: Option<&Path>, env: Option<&str>) -> PathBuf {
        if let Some(f) = flag {
            return f.to_path_buf();
        }
        if let Some(e) = env.filter(|e| !e.is_empty()) {
            return PathBuf::from(e);
        }
        self.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_changes_the_hash() {
        let base = RunConfig::default();
        let h0 = base.hash();
        for (k, v) in base.canonical_entries() {
            if k.starts_with("anchors.") {
                continue;
            }
            let mut c = base.clone();
            let bumped = match k.as_str() {
                "report.corner" => "ff".to_string(),
                _ if v.parse::<u64>().is_ok() => (v.parse::<u64>().unwrap() + 1).to_string(),
                _ => (v.parse::<f64>().unwrap() * 0.9 + 0.001).to_string(),
            };
            c.set(&k, &bumped).unwrap();
            assert_ne!(c.hash(), h0, "{k}");
        }
        let mut c = base.clone();
        c.anchors.fmin_mhz = Some(49.0);
        assert_ne!(c.hash(), h0);
        let mut c = base.clone();
        c.seed = 9;
        c.out_dir = Some("elsewhere".into());
        assert_eq!(c.hash(), h0);
    }

    #[test]
    fn file_parsing() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nabb.target_mhz = 40\n\nsram.macro_kib=8\n")
            .unwrap();
        assert_eq!(c.abb.target_freq, 40e6);
        assert_eq!(c.platform().unwrap().bank.macros_per_bank, 4);
        assert!(matches!(
            c.apply_text("abb.bogus=1"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            c.apply_text("\nabb.gain"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(c.apply_text("abb.gain=fast").is_err());
        assert!(RunConfig::preset("other").is_err());
    }

    #[test]
    fn sram_section_maps_to_staging() {
        let c = RunConfig::default();
        let p = c.platform().unwrap();
        assert!((p.sram.stage_spacing - 25e-9).abs() < 1e-18);
        assert!((p.sram.current_limit - 0.2e-3).abs() < 1e-15);
    }

    #[test]
    fn out_dir_precedence() {
        let mut c = RunConfig::default();
        assert_eq!(
            c.resolve_out_dir(None, None),
            PathBuf::from(DEFAULT_OUT_DIR)
        );
        c.out_dir = Some("cfg".into());
        assert_eq!(c.resolve_out_dir(None, None), PathBuf::from("cfg"));
        assert_eq!(c.resolve_out_dir(None, Some("env")), PathBuf::from("env"));
        assert_eq!(
            c.resolve_out_dir(Some(Path::new("flag")), Some("env")),
            PathBuf::from("flag")
        );
    }
}
