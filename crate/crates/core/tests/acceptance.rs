//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line, and exits non-zero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use abbsim::activity::{
    evaluate_trace_power, table2_report, PowerBreakdown, Table2Targets, NETLIST_CLOCK_HZ,
};
use abbsim::calibration::{calibrate_with, AnchorSet, Calibration, CalibrationPolicy};
use abbsim::cli::{execute, Cli};
use abbsim::device::{DeviceParams, OperatingPoint, ProcessCorner};
use abbsim::modes::{energy_per_coremark, mode_point, PlatformConfig, PowerMode};
use abbsim::signoff::{bounding_corner_check, corner_sweep, parse_axis, shmoo_scan, SignoffGrid};
use abbsim::sram::{
    macro_power, request_transition, retention_area_overhead, wake_sequence_profile, BankConfig,
    PowerState, SettledState, SramMacroConfig, SramPowerState, MACRO_SIZES_KIB,
};
use abbsim::trace::{generate_trace, TraceGenConfig};
use abbsim::BiasPair;
use clap::Parser;

const RETENTION_TOL_REL: f64 = 0.02;
const RATIO_RANGE: (f64, f64) = (71.0, 79.0);
const ACTIVE_UW: f64 = 240.0;
const ACTIVE_TOL_REL: f64 = 0.02;
const TABLE2_CELL_TOL_REL: f64 = 1e-3;
const TABLE2_SAVINGS_TOL_PTS: f64 = 0.1;
const TABLE2_CYCLES: u64 = 1_000_000;
const TABLE2_BUDGET: Duration = Duration::from_secs(5);
const RETENTION_BUDGET: Duration = Duration::from_secs(1);
const SHMOO_BUDGET: Duration = Duration::from_secs(10);
const FMIN_HZ: f64 = 50e6;
const BOUNDING_SAMPLES: usize = 10_000;
const ADVERSARY_BOW_V: f64 = 0.2;
const WAKE_TOTAL_S: f64 = 200e-9;
const POWERDOWN_MAX_SHARE: f64 = 0.01;
const AREA_AT_4KIB_PCT: f64 = 2.1;
const AREA_TOL_PCT: f64 = 0.05;
const TRACE_SEEDS: u64 = 100;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn calibrate() -> Result<(Calibration, PlatformConfig), String> {
    let plat = PlatformConfig::default();
    let cal = calibrate_with(&AnchorSet::paper(), &CalibrationPolicy::default(), &plat)
        .map_err(|e| e.to_string())?;
    Ok((cal, plat))
}

fn nominal(temp: f64) -> OperatingPoint {
    OperatingPoint::new(0.55, temp, ProcessCorner::TYPICAL).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn c1_retention() -> Outcome {
    let t0 = Instant::now();
    let (cal, plat) = calibrate()?;
    let mut parts = Vec::new();
    for (temp, target) in [(25.0, 3.2), (125.0, 142.0)] {
        let r = mode_point(PowerMode::Retention, &nominal(temp), &cal.params, &plat)
            .map_err(|e| e.to_string())?
            .total()
            * 1e6;
        ensure(rel(r, target) <= RETENTION_TOL_REL, || {
            format!("retention at {temp} C = {r:.4} uW, want {target} +-2%")
        })?;
        parts.push(format!("{r:.3} uW @{temp}C"));
    }
    let dt = t0.elapsed();
    ensure(dt < RETENTION_BUDGET, || format!("took {dt:?}"))?;
    Ok(format!("{} in {dt:.2?}", parts.join(", ")))
}

fn c2_ratio() -> Outcome {
    let (cal, plat) = calibrate()?;
    let op = nominal(25.0);
    let active = mode_point(PowerMode::Active(50e6), &op, &cal.params, &plat)
        .map_err(|e| e.to_string())?
        .total()
        * 1e6;
    let ret = mode_point(PowerMode::Retention, &op, &cal.params, &plat)
        .map_err(|e| e.to_string())?
        .total()
        * 1e6;
    ensure(rel(active, ACTIVE_UW) <= ACTIVE_TOL_REL, || {
        format!("active {active:.3} uW, want 240 (4.8 uW/MHz x 50 MHz)")
    })?;
    let ratio = active / ret;
    ensure((RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio), || {
        format!("ratio {ratio:.2} outside [71, 79]")
    })?;
    Ok(format!(
        "active {active:.2} uW / retention {ret:.3} uW = {ratio:.2}x"
    ))
}

fn c3_table2() -> Outcome {
    let t0 = Instant::now();
    let trace =
        generate_trace(&TraceGenConfig::default(), TABLE2_CYCLES, 0).map_err(|e| e.to_string())?;
    let bank = BankConfig::new(4).unwrap();
    let r = table2_report(&Table2Targets::paper(), &trace, &bank, NETLIST_CLOCK_HZ)
        .map_err(|e| e.to_string())?;
    let dt = t0.elapsed();
    let want_u = [308.2, 2.4, 69.9, 4.2];
    let want_g = [211.8, 2.6, 51.9, 4.2];
    for (got, want) in [(r.ungated, want_u), (r.gated, want_g)] {
        for (g, w) in got.cells().iter().zip(want) {
            let g = g * 1e6;
            ensure(rel(g, w) <= TABLE2_CELL_TOL_REL, || {
                format!("cell {g:.4} uW, want {w}")
            })?;
        }
    }
    // Savings recomputed from the rounded published cells.
    let want_s = [25.1, -0.1, 4.7, 0.0];
    for (g, w) in r.savings.iter().zip(want_s) {
        ensure((g - w).abs() <= TABLE2_SAVINGS_TOL_PTS, || {
            format!("saving {g:.3} %, want {w}")
        })?;
    }
    let total_want = (1.0 - want_g.iter().sum::<f64>() / want_u.iter().sum::<f64>()) * 100.0;
    ensure(r.total_savings > 29.0, || {
        format!("total saving {:.3} % not > 29", r.total_savings)
    })?;
    ensure(
        (r.total_savings - total_want).abs() <= TABLE2_SAVINGS_TOL_PTS,
        || {
            format!(
                "total saving {:.3} %, want {total_want:.2}",
                r.total_savings
            )
        },
    )?;
    ensure(dt < TABLE2_BUDGET, || format!("1e6-cycle run took {dt:?}"))?;
    Ok(format!(
        "savings {:?} total {:.2}% on {} cycles in {dt:.2?}",
        r.savings.map(|s| (s * 10.0).round() / 10.0),
        r.total_savings,
        TABLE2_CYCLES
    ))
}

fn c4_coremark() -> Outcome {
    let mut parts = Vec::new();
    for (pdp, want) in [(4.8, "1.5"), (3.8, "1.2")] {
        let e = energy_per_coremark(pdp, 3.19).map_err(|e| e.to_string())?;
        let printed = format!("{e:.1}");
        ensure(printed == want, || {
            format!("{pdp}/3.19 = {e:.4} prints {printed}, want {want}")
        })?;
        parts.push(format!("{pdp}->{printed}"));
    }
    Ok(format!("uJ/CM {}", parts.join(", ")))
}

fn c5_shmoo() -> Outcome {
    let (cal, plat) = calibrate()?;
    let vdd = parse_axis("0.41:0.70:0.01").map_err(|e| e.to_string())?;
    let freq: Vec<f64> = parse_axis("5:100:5")
        .map_err(|e| e.to_string())?
        .iter()
        .map(|f| f * 1e6)
        .collect();
    ensure(vdd.len() == 30 && freq.len() == 20, || {
        format!("grid {}x{}", vdd.len(), freq.len())
    })?;
    let t0 = Instant::now();
    let g = shmoo_scan(
        &vdd,
        &freq,
        25.0,
        ProcessCorner::TYPICAL,
        &cal.params,
        &plat,
    )
    .map_err(|e| e.to_string())?;
    let dt = t0.elapsed();
    let nominal = g.cell(0.55, 50e6).ok_or("no (0.55 V, 50 MHz) cell")?;
    ensure(nominal.is_pass(), || {
        format!("(0.55 V, 50 MHz) is {}", nominal.code())
    })?;
    for (i, v) in g.vdd_axis.iter().enumerate() {
        if *v < 0.50 - 1e-9 {
            ensure(g.cells[i].iter().all(|c| !c.is_pass()), || {
                format!("a cell at {v} V passes")
            })?;
        }
    }
    ensure(g.is_downward_closed(), || "not downward closed".into())?;
    ensure(g.is_upward_closed(), || "not upward closed".into())?;
    ensure(dt < SHMOO_BUDGET, || format!("took {dt:?}"))?;
    let passes = g.cells.iter().flatten().filter(|c| c.is_pass()).count();
    Ok(format!(
        "30x20 grid, {passes} pass, closed both ways, {dt:.2?}"
    ))
}

fn c6_signoff() -> Outcome {
    let (cal, plat) = calibrate()?;
    let grid = SignoffGrid::standard(0.55, 0.10).map_err(|e| e.to_string())?;
    ensure(grid.has_bounding_corners(), || {
        "grid lacks ss/ff corners".into()
    })?;
    let rep = corner_sweep(&grid, &cal.params, &plat).map_err(|e| e.to_string())?;
    ensure(rep.failures() == 0, || {
        format!("{} points without lock", rep.failures())
    })?;
    let w = rep.worst_fmax.ok_or("empty sweep")?;
    ensure(w.fmax >= FMIN_HZ, || {
        format!("worst fmax {:.3} MHz", w.fmax / 1e6)
    })?;
    Ok(format!(
        "{} points, worst fmax {:.3} MHz at {} {:.3} V {} C",
        rep.points.len(),
        w.fmax / 1e6,
        w.op.corner().name(),
        w.op.vdd(),
        w.op.temp_c()
    ))
}

fn c7_bounding() -> Outcome {
    let (cal, plat) = calibrate()?;
    let range = (cal.vdd_signoff_min, cal.vdd_signoff_max);
    let r = bounding_corner_check(&cal.params, &plat, range, BOUNDING_SAMPLES, 0)
        .map_err(|e| e.to_string())?;
    ensure(r.pass && r.counterexamples.is_empty(), || {
        format!("{} counterexamples", r.counterexamples.len())
    })?;
    let adversary = DeviceParams {
        vth_temp_bow: ADVERSARY_BOW_V,
        ..cal.params.clone()
    };
    let a = bounding_corner_check(&adversary, &plat, range, BOUNDING_SAMPLES, 0)
        .map_err(|e| e.to_string())?;
    ensure(!a.counterexamples.is_empty(), || {
        "non-monotone adversary not detected".into()
    })?;
    Ok(format!(
        "{} samples clean; adversary gives {} counterexamples",
        r.samples,
        a.counterexamples.len()
    ))
}

fn expected_transition(
    from: PowerState,
    valid: bool,
    to: SettledState,
) -> Option<(PowerState, bool)> {
    use PowerState as P;
    use SettledState as T;
    match (from, to) {
        (P::Active, T::Active) => Some((P::Active, valid)),
        (P::Active, T::Retention) => Some((P::Retention, valid)),
        (P::Retention, T::Retention) => Some((P::Retention, valid)),
        (P::Retention, T::Active) => Some((P::WakingUp(0), valid)),
        (P::PowerDown, T::Active) => Some((P::WakingUp(0), false)),
        (P::WakingUp(s), T::Active) => Some((P::WakingUp(s), valid)),
        (_, T::PowerDown) => Some((P::PowerDown, false)),
        (P::PowerDown, T::Retention) | (P::WakingUp(_), T::Retention) => None,
    }
}

fn c8_sram() -> Outcome {
    let cfg = SramMacroConfig::new(4).unwrap();
    // Reach every state through the public interface.
    let mut sources = vec![SramPowerState::powered_down()];
    for valid in [false, true] {
        let a = SramPowerState::active(valid);
        let r = request_transition(&a, SettledState::Retention).unwrap();
        let mut w = request_transition(&r, SettledState::Active).unwrap();
        sources.extend([a, r]);
        while let PowerState::WakingUp(_) = w.state() {
            sources.push(w);
            w = w.advance_wake(&cfg);
        }
    }
    let mut checked = 0;
    for from in &sources {
        for to in SettledState::ALL {
            let got = request_transition(from, to);
            match expected_transition(from.state(), from.contents_valid(), to) {
                Some(want) => {
                    let s = got.map_err(|e| format!("{from:?} -> {to:?}: {e}"))?;
                    ensure((s.state(), s.contents_valid()) == want, || {
                        format!("{from:?} -> {to:?} gave {:?}", s.state())
                    })?;
                }
                None => ensure(got.is_err(), || format!("{from:?} -> {to:?} accepted"))?,
            }
            checked += 1;
        }
    }
    let prof = wake_sequence_profile(&cfg, 0.55).map_err(|e| e.to_string())?;
    ensure((prof.total_duration - WAKE_TOTAL_S).abs() < 1e-15, || {
        format!("wake {:.1} ns", prof.total_duration * 1e9)
    })?;
    ensure(
        prof.stage_peak_currents
            .iter()
            .all(|i| *i <= cfg.current_limit),
        || "in-rush over limit".into(),
    )?;

    let (cal, _) = calibrate()?;
    let op = nominal(25.0);
    let b = BiasPair::ZERO;
    let act = macro_power(&cfg, &SramPowerState::active(true), &op, &b, &cal.params);
    let pd = macro_power(&cfg, &SramPowerState::powered_down(), &op, &b, &cal.params);
    ensure(pd <= POWERDOWN_MAX_SHARE * act, || {
        format!("power-down share {:.4}", pd / act)
    })?;

    let overheads: Vec<f64> = MACRO_SIZES_KIB
        .iter()
        .map(|&k| retention_area_overhead(&SramMacroConfig::new(k).unwrap()))
        .collect();
    let at4 = retention_area_overhead(&cfg);
    ensure((at4 - AREA_AT_4KIB_PCT).abs() <= AREA_TOL_PCT, || {
        format!("area at 4 KiB {at4:.3} %")
    })?;
    ensure(overheads.windows(2).all(|w| w[1] < w[0]), || {
        format!("area not decreasing: {overheads:?}")
    })?;
    Ok(format!(
        "{checked} transitions, wake {:.0} ns, power-down {:.2}% of active, area {at4:.2}% @4KiB",
        prof.total_duration * 1e9,
        100.0 * pd / act
    ))
}

fn c9_bus_gating() -> Outcome {
    let bank = BankConfig::new(4).unwrap();
    let reference =
        generate_trace(&TraceGenConfig::default(), 100_000, 0).map_err(|e| e.to_string())?;
    let e = table2_report(&Table2Targets::paper(), &reference, &bank, NETLIST_CLOCK_HZ)
        .map_err(|e| e.to_string())?
        .energies;
    let base = PowerBreakdown::from_microwatts([0.0, 2.4, 0.0, 4.2]);
    let mono = BankConfig::monolithic();
    for seed in 0..TRACE_SEEDS {
        let gen = TraceGenConfig {
            access_rate: 0.05 + 0.9 * ((seed * 37) % 100) as f64 / 100.0,
            locality: ((seed * 53) % 100) as f64 / 100.0,
            ..TraceGenConfig::default()
        };
        let t = generate_trace(&gen, 5_000, seed).map_err(|e| e.to_string())?;
        for (bk, strict_eq) in [(&bank, false), (&mono, true)] {
            let u = evaluate_trace_power(&t, &e, bk, false, NETLIST_CLOCK_HZ, &base)
                .map_err(|e| e.to_string())?;
            let g = evaluate_trace_power(&t, &e, bk, true, NETLIST_CLOCK_HZ, &base)
                .map_err(|e| e.to_string())?;
            ensure(g.dynamic() <= u.dynamic() * (1.0 + 1e-12), || {
                format!("seed {seed}: gated > ungated")
            })?;
            if strict_eq {
                ensure(g.dynamic() == u.dynamic(), || {
                    format!("seed {seed}: monolithic bank differs")
                })?;
            }
            ensure(g.sram_leakage == u.sram_leakage, || {
                format!("seed {seed}: SRAM leakage changed")
            })?;
        }
    }
    Ok(format!(
        "{TRACE_SEEDS} traces, gated <= ungated, equal at one macro per bank"
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut argv = vec!["abbsim", "--seed", "7", "--out"];
    let d = dir.to_str().unwrap();
    argv.push(d);
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(&argv).map_err(|e| e.to_string())?;
    let files = execute(&cli, None).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for f in files {
        let name = f.file_name().unwrap().to_string_lossy().into_owned();
        out.push((name, std::fs::read(&f).map_err(|e| e.to_string())?));
    }
    Ok(out)
}

fn c10_determinism() -> Outcome {
    let commands: [&[&str]; 7] = [
        &["calibrate"],
        &["power-report"],
        &["modes"],
        &["shmoo", "--svg"],
        &["signoff", "--samples", "2000"],
        &["trace-gen", "--cycles", "20000"],
        &["table2", "--cycles", "50000"],
    ];
    let mut n_files = 0;
    for args in commands {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        let ra = run_cli(a.path(), args)?;
        let rb = run_cli(b.path(), args)?;
        ensure(!ra.is_empty(), || format!("{args:?} wrote nothing"))?;
        ensure(ra == rb, || format!("{args:?} differs between runs"))?;
        n_files += ra.len();
    }
    Ok(format!("7 subcommands, {n_files} files byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("retention anchors", c1_retention),
        ("active/retention ratio", c2_ratio),
        ("bus-gating table", c3_table2),
        ("energy per CoreMark", c4_coremark),
        ("shmoo structure", c5_shmoo),
        ("sign-off robustness", c6_signoff),
        ("bounding corners", c7_bounding),
        ("SRAM state machine", c8_sram),
        ("bus-gating properties", c9_bus_gating),
        ("CLI determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
