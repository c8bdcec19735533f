//! Trace-driven dynamic power of the logic and SRAM blocks with optional
//! data-bus gating.
//!
//! Each bank has one bus segment per macro. Without gating an access drives
//! the data bus into every macro of the bank; with gating only the segment of
//! the addressed macro toggles and the others are tied low.

use std::fmt;

use crate::error::{Error, Result};
use crate::sram::{BankConfig, BANK_BYTES};
use crate::trace::{Trace, TraceStats};

/// Clock of the pre-silicon power analysis, Hz.
pub const NETLIST_CLOCK_HZ: f64 = 50.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerBreakdown {
    pub logic_dynamic: f64,
    pub logic_leakage: f64,
    pub sram_dynamic: f64,
    pub sram_leakage: f64,
}

impl PowerBreakdown {
    pub fn new(
        logic_dynamic: f64,
        logic_leakage: f64,
        sram_dynamic: f64,
        sram_leakage: f64,
    ) -> Self {
        PowerBreakdown {
            logic_dynamic,
            logic_leakage,
            sram_dynamic,
            sram_leakage,
        }
    }

    pub fn from_microwatts(cells: [f64; 4]) -> Self {
        let [a, b, c, d] = cells.map(|v| v * 1e-6);
        Self::new(a, b, c, d)
    }

    pub fn total(&self) -> f64 {
        self.logic_dynamic + self.logic_leakage + self.sram_dynamic + self.sram_leakage
    }

    pub fn dynamic(&self) -> f64 {
        self.logic_dynamic + self.sram_dynamic
    }

    pub fn cells(&self) -> [f64; 4] {
        [
            self.logic_dynamic,
            self.logic_leakage,
            self.sram_dynamic,
            self.sram_leakage,
        ]
    }

    pub fn scaled(&self, k: f64) -> Self {
        let [a, b, c, d] = self.cells().map(|v| v * k);
        Self::new(a, b, c, d)
    }

    pub fn is_valid(&self) -> bool {
        self.cells().iter().all(|v| *v >= 0.0 && v.is_finite())
    }
}

impl std::ops::Add for PowerBreakdown {
    type Output = PowerBreakdown;
    fn add(self, o: PowerBreakdown) -> PowerBreakdown {
        PowerBreakdown::new(
            self.logic_dynamic + o.logic_dynamic,
            self.logic_leakage + o.logic_leakage,
            self.sram_dynamic + o.sram_dynamic,
            self.sram_leakage + o.sram_leakage,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityEnergies {
    /// Macro array energy per read or write, J.
    pub e_macro_access: f64,
    /// Logic-side bus driver energy per toggling bit per bus segment, J.
    pub e_bus_toggle_per_bit: f64,
    /// Macro-side column input energy per toggling bit per bus segment, J.
    pub e_column_toggle_per_bit: f64,
    pub e_logic_per_cycle: f64,
    /// Added logic leakage of isolation cells when gating is on, W.
    pub leak_gating_overhead: f64,
}

impl ActivityEnergies {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.e_macro_access,
            self.e_bus_toggle_per_bit,
            self.e_column_toggle_per_bit,
            self.e_logic_per_cycle,
            self.leak_gating_overhead,
        ];
        if all.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(
                "activity energies",
                format!("{self:?} has a negative term"),
            ))
        }
    }
}

/// Issued when a macro size is expected to miss timing closure at the target
/// clock because of routing congestion around many small macros.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingClosureWarning {
    pub macro_size_kib: u32,
    pub target_freq: f64,
}

impl fmt::Display for TimingClosureWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} KiB macros at {:.0} MHz: routing congestion makes timing closure unlikely (minimum 4 KiB)",
            self.macro_size_kib,
            self.target_freq / 1e6
        )
    }
}

pub const MIN_ROUTABLE_MACRO_KIB: u32 = 4;

pub fn check_macro_timing(macro_size_kib: u32, target_freq: f64) -> Option<TimingClosureWarning> {
    (macro_size_kib < MIN_ROUTABLE_MACRO_KIB && target_freq >= NETLIST_CLOCK_HZ).then_some(
        TimingClosureWarning {
            macro_size_kib,
            target_freq,
        },
    )
}

pub fn select_macro(address: u32, macro_size_kib: u32) -> Result<u32> {
    if address >= BANK_BYTES {
        return Err(Error::AddressOutOfRange { address });
    }
    if macro_size_kib == 0 {
        return Err(Error::invalid("macro size", "0 KiB"));
    }
    Ok(address / (macro_size_kib * 1024))
}

/// Bus-segment bit toggles for a trace summary.
fn segment_toggles(toggles: u64, bank: &BankConfig, gating: bool) -> f64 {
    if gating {
        toggles as f64
    } else {
        toggles as f64 * bank.macros_per_bank as f64
    }
}

pub fn evaluate_trace_power(
    trace: &Trace,
    e: &ActivityEnergies,
    bank: &BankConfig,
    gating: bool,
    f_clk: f64,
    leakage_baseline: &PowerBreakdown,
) -> Result<PowerBreakdown> {
    if !(f_clk > 0.0 && f_clk.is_finite()) {
        return Err(Error::invalid("clock", format!("f_clk={f_clk}")));
    }
    trace.validate()?;
    let mut per_macro = vec![0u64; (bank.n_banks * bank.macros_per_bank) as usize];
    let mut toggles = 0u64;
    for r in &trace.records {
        let m = select_macro(r.address, bank.macro_size_kib)?;
        per_macro[(r.bank as u32 * bank.macros_per_bank + m) as usize] += 1;
        toggles += r.data_toggles as u64;
    }
    let accesses: u64 = per_macro.iter().sum();
    let overhead = if gating { e.leak_gating_overhead } else { 0.0 };
    let mut out = PowerBreakdown::new(
        0.0,
        leakage_baseline.logic_leakage + overhead,
        0.0,
        leakage_baseline.sram_leakage,
    );
    if trace.n_cycles == 0 {
        return Ok(out);
    }
    let seg = segment_toggles(toggles, bank, gating);
    let per_cycle = f_clk / trace.n_cycles as f64;
    let logic_energy = e.e_logic_per_cycle * trace.n_cycles as f64 + e.e_bus_toggle_per_bit * seg;
    let sram_energy = e.e_macro_access * accesses as f64 + e.e_column_toggle_per_bit * seg;
    out.logic_dynamic = logic_energy * per_cycle;
    out.sram_dynamic = sram_energy * per_cycle;
    Ok(out)
}

/// Target breakdowns for the two gating modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table2Targets {
    pub ungated: PowerBreakdown,
    pub gated: PowerBreakdown,
}

impl Table2Targets {
    /// Netlist power analysis at 50 MHz with 4 KiB macros, µW converted to W.
    pub fn paper() -> Self {
        Table2Targets {
            ungated: PowerBreakdown::from_microwatts([308.2, 2.4, 69.9, 4.2]),
            gated: PowerBreakdown::from_microwatts([211.8, 2.6, 51.9, 4.2]),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Table2Targets {
            ungated: self.ungated.scaled(k),
            gated: self.gated.scaled(k),
        }
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Result<[f64; N]> {
    for col in 0..N {
        let scale = a.iter().map(|r| r[col].abs()).fold(0.0, f64::max);
        let (piv, val) = (col..N)
            .map(|r| (r, a[r][col].abs()))
            .fold((col, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if !(scale > 0.0) || val <= 1e-12 * scale {
            return Err(Error::SingularSystem(format!("no pivot in column {col}")));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..N {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let tail: f64 = (r + 1..N).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Ok(x)
}

/// Fit the energy coefficients so that the reference trace reproduces both
/// gating-mode breakdowns exactly.
pub fn calibrate_activity_energies(
    targets: &Table2Targets,
    stats: &TraceStats,
    bank: &BankConfig,
    f_clk: f64,
) -> Result<ActivityEnergies> {
    if stats.accesses == 0 {
        return Err(Error::SingularSystem(
            "reference trace has zero accesses".into(),
        ));
    }
    if stats.toggles == 0 {
        return Err(Error::SingularSystem(
            "reference trace has zero bus toggles".into(),
        ));
    }
    if bank.macros_per_bank < 2 {
        return Err(Error::SingularSystem(
            "one macro per bank makes gated and ungated bus activity identical".into(),
        ));
    }
    if !(f_clk > 0.0) {
        return Err(Error::invalid("clock", format!("f_clk={f_clk}")));
    }
    let n = stats.n_cycles as f64;
    let acc = stats.accesses as f64;
    let b_off = segment_toggles(stats.toggles, bank, false);
    let b_on = segment_toggles(stats.toggles, bank, true);
    let energy = |watts: f64| watts * n / f_clk;
    // Unknowns: [e_logic_per_cycle, e_bus_toggle_per_bit, e_macro_access, e_column_toggle_per_bit]
    let a = [
        [n, b_off, 0.0, 0.0],
        [n, b_on, 0.0, 0.0],
        [0.0, 0.0, acc, b_off],
        [0.0, 0.0, acc, b_on],
    ];
    let rhs = [
        energy(targets.ungated.logic_dynamic),
        energy(targets.gated.logic_dynamic),
        energy(targets.ungated.sram_dynamic),
        energy(targets.gated.sram_dynamic),
    ];
    // Column scaling keeps the pivots comparable.
    let col_scale = [n, b_off, acc, b_off];
    let mut scaled = a;
    for row in scaled.iter_mut() {
        for (c, v) in row.iter_mut().enumerate() {
            *v /= col_scale[c];
        }
    }
    let y = solve_dense(scaled, rhs)?;
    let x: Vec<f64> = y.iter().zip(col_scale).map(|(v, s)| v / s).collect();
    let e = ActivityEnergies {
        e_logic_per_cycle: x[0],
        e_bus_toggle_per_bit: x[1],
        e_macro_access: x[2],
        e_column_toggle_per_bit: x[3],
        leak_gating_overhead: targets.gated.logic_leakage - targets.ungated.logic_leakage,
    };
    e.validate()?;
    Ok(e)
}

/// Per-quadrant savings against the ungated total, in percentage points.
pub fn savings_percent(ungated: &PowerBreakdown, gated: &PowerBreakdown) -> ([f64; 4], f64) {
    let total = ungated.total();
    let u = ungated.cells();
    let g = gated.cells();
    let per = [0, 1, 2, 3].map(|i| 100.0 * (u[i] - g[i]) / total);
    (per, 100.0 * (total - gated.total()) / total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Report {
    pub energies: ActivityEnergies,
    pub ungated: PowerBreakdown,
    pub gated: PowerBreakdown,
    pub savings: [f64; 4],
    pub total_savings: f64,
    pub stats: TraceStats,
    pub warning: Option<TimingClosureWarning>,
}

/// Calibrate on `trace` and evaluate both gating modes.
pub fn table2_report(
    targets: &Table2Targets,
    trace: &Trace,
    bank: &BankConfig,
    f_clk: f64,
) -> Result<Table2Report> {
    let stats = trace.stats();
    let energies = calibrate_activity_energies(targets, &stats, bank, f_clk)?;
    let baseline = PowerBreakdown::new(
        0.0,
        targets.ungated.logic_leakage,
        0.0,
        targets.ungated.sram_leakage,
    );
    let ungated = evaluate_trace_power(trace, &energies, bank, false, f_clk, &baseline)?;
    let gated = evaluate_trace_power(trace, &energies, bank, true, f_clk, &baseline)?;
    let (savings, total_savings) = savings_percent(&ungated, &gated);
    Ok(Table2Report {
        energies,
        ungated,
        gated,
        savings,
        total_savings,
        stats,
        warning: check_macro_timing(bank.macro_size_kib, f_clk),
    })
}
