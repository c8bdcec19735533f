//! Python bindings for the `abbsim` model.

use std::collections::BTreeMap;

use abbsim::activity::{table2_report, Table2Targets, NETLIST_CLOCK_HZ};
use abbsim::calibration::{calibrate_with, AnchorSet, CalibrationPolicy};
use abbsim::device::{DeviceParams, OperatingPoint, ProcessCorner};
use abbsim::modes::{
    energy_per_coremark, mode_point, simulate_schedule, ModeSchedule, PlatformConfig, PowerMode,
};
use abbsim::signoff::shmoo_scan;
use abbsim::sram::{
    request_transition, wake_sequence_profile, BankConfig, PowerState, SettledState,
    SramMacroConfig, SramPowerState,
};
use abbsim::trace::{generate_trace, TraceGenConfig};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    abbsim,
    ModelError,
    PyException,
    "The model has no valid answer for these inputs."
);

fn to_py(e: abbsim::Error) -> PyErr {
    match e {
        abbsim::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e if e.is_model_error() => ModelError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn operating_point(vdd: f64, temp_c: f64, corner: &str) -> PyResult<OperatingPoint> {
    let c = ProcessCorner::parse(corner).map_err(to_py)?;
    OperatingPoint::new(vdd, temp_c, c).map_err(to_py)
}

fn parse_mode(mode: &str, freq_mhz: f64) -> PyResult<PowerMode> {
    match mode.to_ascii_lowercase().as_str() {
        "active" => Ok(PowerMode::Active(freq_mhz * 1e6)),
        "sleep" => Ok(PowerMode::Sleep),
        "retention" => Ok(PowerMode::Retention),
        other => Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    }
}

/// Calibrated device parameters together with the platform they were fitted on.
#[pyclass(frozen)]
pub struct Model {
    params: DeviceParams,
    platform: PlatformConfig,
    checks: Vec<(String, String, f64, bool)>,
}

#[pymethods]
impl Model {
    /// Calibrate against an anchor file's text, or the built-in anchors when omitted.
    #[new]
    #[pyo3(signature = (anchors=None))]
    fn new(anchors: Option<&str>) -> PyResult<Self> {
        let set = match anchors {
            Some(t) => AnchorSet::parse(t).map_err(to_py)?,
            None => AnchorSet::paper(),
        };
        let platform = PlatformConfig::default();
        let cal = calibrate_with(&set, &CalibrationPolicy::default(), &platform).map_err(to_py)?;
        let checks = cal
            .checks
            .iter()
            .map(|c| (c.anchor.clone(), c.target.to_string(), c.model, c.pass))
            .collect();
        Ok(Model {
            params: cal.params,
            platform,
            checks,
        })
    }

    /// `(anchor, target, model, pass)` for every calibration anchor.
    fn checks(&self) -> Vec<(String, String, f64, bool)> {
        self.checks.clone()
    }

    fn params(&self) -> BTreeMap<&'static str, f64> {
        let p = &self.params;
        BTreeMap::from([
            ("vth0", p.vth0),
            ("sigma_vth", p.sigma_vth),
            ("gamma_body", p.gamma_body),
            ("n_slope", p.n_slope),
            ("i0_logic", p.i0_logic),
            ("i0_sram_cell", p.i0_sram_cell),
            ("i0_sram_periph", p.i0_sram_periph),
            ("i0_wake", p.i0_wake),
            ("alpha", p.alpha),
            ("k_delay", p.k_delay),
            ("n_crit", p.n_crit),
            ("cdyn_logic", p.cdyn_logic),
            ("vdd_ref", p.vdd_ref),
        ])
    }

    /// Power of `mode` ("active", "sleep" or "retention") in µW.
    #[pyo3(signature = (mode, vdd=0.55, temp_c=25.0, corner="tt", freq_mhz=50.0))]
    fn mode_power(
        &self,
        mode: &str,
        vdd: f64,
        temp_c: f64,
        corner: &str,
        freq_mhz: f64,
    ) -> PyResult<f64> {
        let op = operating_point(vdd, temp_c, corner)?;
        let m = parse_mode(mode, freq_mhz)?;
        let mp = mode_point(m, &op, &self.params, &self.platform).map_err(to_py)?;
        Ok(mp.total() * 1e6)
    }

    /// Regulated `(vnw, vpw)` bias for `mode`, V.
    #[pyo3(signature = (mode, vdd=0.55, temp_c=25.0, corner="tt", freq_mhz=50.0))]
    fn mode_bias(
        &self,
        mode: &str,
        vdd: f64,
        temp_c: f64,
        corner: &str,
        freq_mhz: f64,
    ) -> PyResult<(f64, f64)> {
        let op = operating_point(vdd, temp_c, corner)?;
        let m = parse_mode(mode, freq_mhz)?;
        let mp = mode_point(m, &op, &self.params, &self.platform).map_err(to_py)?;
        Ok((mp.lock.bias.vnw, mp.lock.bias.vpw))
    }

    /// Energy totals of a schedule such as `"active 10ms | retention 990ms"`.
    #[pyo3(signature = (schedule, vdd=0.55, temp_c=25.0, corner="tt"))]
    fn schedule_energy(
        &self,
        schedule: &str,
        vdd: f64,
        temp_c: f64,
        corner: &str,
    ) -> PyResult<BTreeMap<&'static str, f64>> {
        let op = operating_point(vdd, temp_c, corner)?;
        let s = ModeSchedule::parse(schedule, op, self.platform.abb.target_freq).map_err(to_py)?;
        let r = simulate_schedule(&s, &self.params, &self.platform).map_err(to_py)?;
        Ok(BTreeMap::from([
            ("total_energy_uJ", r.total_energy * 1e6),
            ("transition_energy_uJ", r.transition_energy * 1e6),
            ("duration_s", r.duration),
            ("average_power_uW", r.average_power * 1e6),
        ]))
    }

    /// Shmoo codes indexed `[vdd][freq]` ("P" or "F:<cause>").
    #[pyo3(signature = (vdd_axis, freq_mhz_axis, temp_c=25.0, corner="tt"))]
    fn shmoo(
        &self,
        vdd_axis: Vec<f64>,
        freq_mhz_axis: Vec<f64>,
        temp_c: f64,
        corner: &str,
    ) -> PyResult<Vec<Vec<String>>> {
        let c = ProcessCorner::parse(corner).map_err(to_py)?;
        let freqs: Vec<f64> = freq_mhz_axis.iter().map(|f| f * 1e6).collect();
        let g = shmoo_scan(&vdd_axis, &freqs, temp_c, c, &self.params, &self.platform)
            .map_err(to_py)?;
        Ok(g.cells
            .iter()
            .map(|r| r.iter().map(|c| c.code()).collect())
            .collect())
    }
}

/// Bus-gating breakdown on a generated trace: `{"ungated": [...], "gated": [...], "savings": [...], "total_savings": x}`.
#[pyfunction]
#[pyo3(signature = (cycles=200_000, seed=0, macro_kib=4))]
fn table2(py: Python<'_>, cycles: u64, seed: u64, macro_kib: u32) -> PyResult<Py<PyAny>> {
    let trace = generate_trace(&TraceGenConfig::default(), cycles, seed).map_err(to_py)?;
    let bank = BankConfig::new(macro_kib).map_err(to_py)?;
    let r = py
        .detach(|| table2_report(&Table2Targets::paper(), &trace, &bank, NETLIST_CLOCK_HZ))
        .map_err(to_py)?;
    let uw = |c: [f64; 4]| c.map(|v| v * 1e6).to_vec();
    let d = pyo3::types::PyDict::new(py);
    d.set_item("ungated", uw(r.ungated.cells()))?;
    d.set_item("gated", uw(r.gated.cells()))?;
    d.set_item("savings", r.savings.to_vec())?;
    d.set_item("total_savings", r.total_savings)?;
    d.set_item("warning", r.warning.map(|w| w.to_string()))?;
    Ok(d.into_any().unbind())
}

/// Text form of a synthetic access trace.
#[pyfunction]
#[pyo3(signature = (cycles, seed=0))]
fn trace_text(cycles: u64, seed: u64) -> PyResult<String> {
    let cfg = TraceGenConfig::default();
    let t = generate_trace(&cfg, cycles, seed).map_err(to_py)?;
    Ok(t.to_text(&cfg.header(seed)))
}

/// µJ per CoreMark from a PDP in µW/MHz.
#[pyfunction]
#[pyo3(signature = (pdp, arch_perf=3.19))]
fn coremark_energy(pdp: f64, arch_perf: f64) -> PyResult<f64> {
    energy_per_coremark(pdp, arch_perf).map_err(to_py)
}

fn settled(name: &str) -> PyResult<SettledState> {
    match name.to_ascii_lowercase().as_str() {
        "active" => Ok(SettledState::Active),
        "retention" => Ok(SettledState::Retention),
        "powerdown" | "power_down" => Ok(SettledState::PowerDown),
        other => Err(PyValueError::new_err(format!(
            "unknown SRAM state `{other}`"
        ))),
    }
}

/// Power-state machine of one SRAM macro.
#[pyclass]
pub struct SramMacro {
    cfg: SramMacroConfig,
    state: SramPowerState,
}

#[pymethods]
impl SramMacro {
    #[new]
    #[pyo3(signature = (size_kib=4))]
    fn new(size_kib: u32) -> PyResult<Self> {
        Ok(SramMacro {
            cfg: SramMacroConfig::new(size_kib).map_err(to_py)?,
            state: SramPowerState::powered_down(),
        })
    }

    #[getter]
    fn state(&self) -> String {
        self.state.state().to_string()
    }

    #[getter]
    fn contents_valid(&self) -> bool {
        self.state.contents_valid()
    }

    /// Request "active", "retention" or "powerdown".
    fn request(&mut self, target: &str) -> PyResult<String> {
        self.state = request_transition(&self.state, settled(target)?).map_err(to_py)?;
        Ok(self.state())
    }

    /// Enable the next power segment of a running wake sequence.
    fn advance_wake(&mut self) -> String {
        self.state = self.state.advance_wake(&self.cfg);
        self.state()
    }

    /// Run any pending wake sequence to completion.
    fn finish_wake(&mut self) -> String {
        while let PowerState::WakingUp(_) = self.state.state() {
            self.state = self.state.advance_wake(&self.cfg);
        }
        self.state()
    }

    /// Mark the macro contents as freshly written.
    fn write_all(&mut self) -> PyResult<()> {
        self.state = self.state.revalidate().map_err(to_py)?;
        Ok(())
    }

    /// `(stage_times_s, peak_currents_A, total_s)` of a wake at `vdd`.
    #[pyo3(signature = (vdd=0.55))]
    fn wake_profile(&self, vdd: f64) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
        let w = wake_sequence_profile(&self.cfg, vdd).map_err(to_py)?;
        Ok((w.stage_times, w.stage_peak_currents, w.total_duration))
    }
}

#[pymodule]
#[pyo3(name = "abbsim")]
fn abbsim_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ModelError", m.py().get_type::<ModelError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Model>()?;
    m.add_class::<SramMacro>()?;
    m.add_function(wrap_pyfunction!(table2, m)?)?;
    m.add_function(wrap_pyfunction!(trace_text, m)?)?;
    m.add_function(wrap_pyfunction!(coremark_energy, m)?)?;
    Ok(())
}
