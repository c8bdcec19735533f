//! `abbsim` command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::activity::{table2_report, Table2Targets, NETLIST_CLOCK_HZ};
use crate::calibration::{calibrate_with, Calibration};
use crate::config::{RunConfig, OUT_ENV};
use crate::device::{ProcessCorner, TEMP_MAX_C, TEMP_MIN_C};
use crate::error::{Error, Result};
use crate::modes::{
    energy_per_coremark, mode_point, retention_vs_temperature, simulate_schedule, ModeSchedule,
    PlatformConfig, PowerMode,
};
use crate::report::{
    emit_report, fmt_num, shmoo_pdp_table, shmoo_svg, shmoo_table, ReportBundle, RunMeta, Table,
};
use crate::signoff::{bounding_corner_check, corner_sweep, parse_axis, shmoo_scan, SignoffGrid};
use crate::sram::BankConfig;
use crate::trace::{generate_trace, Trace};

#[derive(Debug, Parser)]
#[command(
    name = "abbsim",
    version,
    about = "Body-bias aware MCU power and timing simulator"
)]
pub struct Cli {
    /// Seed for trace generation and sign-off sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Built-in parameter preset.
    #[arg(long, global = true, default_value = "paper")]
    pub preset: String,
    /// Flat `section.key=value` file applied on top of the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides ABBSIM_OUT and `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit device parameters to the anchor set and report every anchor.
    Calibrate,
    /// Mode powers at the report operating point and the temperature sweep.
    PowerReport,
    /// Energy over a mode schedule.
    Modes(ModesArgs),
    /// PASS/FAIL scan over supply and frequency.
    Shmoo(ShmooArgs),
    /// PVT corner sweep and bounding-corner sampling.
    Signoff(SignoffArgs),
    /// Write a synthetic SRAM access trace.
    TraceGen(TraceGenArgs),
    /// Bus-gating power breakdown of the netlist-level model.
    Table2(Table2Args),
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    /// Schedule file, e.g. `active 10ms | sleep 5ms | retention 990ms`.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Inline schedule used when no file is given.
    #[arg(long, default_value = "active 10ms | retention 990ms")]
    pub segments: String,
}

#[derive(Debug, Args)]
pub struct ShmooArgs {
    /// Supply axis `start:stop:step` in V.
    #[arg(long, default_value = "0.40:0.70:0.01")]
    pub vdd: String,
    /// Frequency axis `start:stop:step` in MHz.
    #[arg(long, default_value = "10:100:5")]
    pub freq: String,
    /// Temperature in °C (defaults to `report.temp_c`).
    #[arg(long, allow_hyphen_values = true)]
    pub temp: Option<f64>,
    /// Process corner: ss, tt, ff or a sigma in [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    pub corner: Option<String>,
    /// Also write an SVG heat map.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SignoffArgs {
    /// Interior samples for the bounding-corner check (defaults to `signoff.samples`).
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TraceGenArgs {
    /// Number of cycles (defaults to `trace.cycles`).
    #[arg(long)]
    pub cycles: Option<u64>,
    /// File name inside the output directory.
    #[arg(long, default_value = "trace.txt")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    /// Reference trace; generated from the seed when absent.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Cycles of the generated reference trace (defaults to `trace.cycles`).
    #[arg(long)]
    pub cycles: Option<u64>,
}

/// Exit status of a run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MODEL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_MODEL,
        e if e.is_model_error() => EXIT_MODEL,
        _ => EXIT_USAGE,
    }
}

/// Parse `argv` (including the program name), run, and return the exit status.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let env = std::env::var(OUT_ENV).ok();
    match execute(&cli, env.as_deref()) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("abbsim: {e}");
            exit_code(&e)
        }
    }
}

/// Build the configuration for `cli`.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::preset(&cli.preset)?;
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    cfg.seed = cli.seed;
    Ok(cfg)
}

/// Run the subcommand and write its reports; returns the written paths.
pub fn execute(cli: &Cli, env_out: Option<&str>) -> Result<Vec<PathBuf>> {
    let cfg = load_config(cli)?;
    let out = cfg.resolve_out_dir(cli.out.as_deref(), env_out);
    let bundle = build_bundle(&cli.command, &cfg)?;
    emit_report(&bundle, &out)
}

fn calibrate(cfg: &RunConfig, plat: &PlatformConfig) -> Result<Calibration> {
    calibrate_with(&cfg.anchors, &cfg.policy, plat)
}

fn uw(v: f64) -> String {
    fmt_num(v * 1e6, 4)
}

fn mhz(v: f64) -> String {
    fmt_num(v / 1e6, 4)
}

/// Compute the reports of one subcommand without touching the filesystem
/// except for declared inputs.
pub fn build_bundle(cmd: &Command, cfg: &RunConfig) -> Result<ReportBundle> {
    let plat = cfg.platform()?;
    let mut b = ReportBundle::new(RunMeta::new(cfg.hash(), cfg.seed));
    match cmd {
        Command::Calibrate => {
            let c = calibrate(cfg, &plat)?;
            let mut t = Table::new(["anchor", "target", "model", "pass"]);
            t.comment("every anchor must be reproduced within 2 % relative (intervals: inside)");
            for ch in &c.checks {
                t.row([
                    ch.anchor.clone(),
                    ch.target.to_string(),
                    fmt_num(ch.model, 4),
                    ch.pass.to_string(),
                ]);
            }
            b.table("calibration.csv", t);
            let p = &c.params;
            let mut d = Table::new(["parameter", "value"]);
            d.comment("calibrated device coefficients (SI units; SRAM scales per KiB)");
            for (k, v) in [
                ("vth0_V", p.vth0),
                ("sigma_vth_V", p.sigma_vth),
                ("gamma_body", p.gamma_body),
                ("n_slope", p.n_slope),
                ("i0_logic_W", p.i0_logic),
                ("i0_sram_cell_W_per_KiB", p.i0_sram_cell),
                ("i0_sram_periph_W_per_KiB", p.i0_sram_periph),
                ("i0_wake_W", p.i0_wake),
                ("alpha", p.alpha),
                ("k_delay", p.k_delay),
                ("n_crit", p.n_crit),
                ("cdyn_logic_F", p.cdyn_logic),
                ("vdd_ref_V", p.vdd_ref),
            ] {
                d.row([k.to_string(), format!("{v:.9e}")]);
            }
            b.table("device_params.csv", d);
        }
        Command::PowerReport => {
            let c = calibrate(cfg, &plat)?;
            let p = &c.params;
            let op = cfg.report_op()?;
            let mut t = Table::new([
                "mode",
                "power_uW",
                "logic_dynamic_uW",
                "logic_leakage_uW",
                "sram_dynamic_uW",
                "sram_leakage_uW",
                "bias_vnw_V",
                "bias_vpw_V",
                "locked_fmax_MHz",
            ]);
            t.comment(format!(
                "operating point {} V, {} C, corner {}",
                fmt_num(op.vdd(), 3),
                fmt_num(op.temp_c(), 1),
                op.corner().name()
            ));
            t.comment(
                "sleep keeps the SRAM active-idle with the logic clock gated (model-derived)",
            );
            t.comment("the retention split between SRAM cells and the wake-up domain is inferred");
            let modes = [
                ("active", PowerMode::Active(plat.abb.target_freq)),
                ("sleep", PowerMode::Sleep),
                ("retention", PowerMode::Retention),
            ];
            let mut powers = Vec::new();
            for (name, m) in modes {
                let mp = mode_point(m, &op, p, &plat)?;
                let bd = mp.breakdown;
                powers.push(mp.total());
                t.row([
                    name.to_string(),
                    uw(mp.total()),
                    uw(bd.logic_dynamic),
                    uw(bd.logic_leakage),
                    uw(bd.sram_dynamic),
                    uw(bd.sram_leakage),
                    fmt_num(mp.lock.bias.vnw, 4),
                    fmt_num(mp.lock.bias.vpw, 4),
                    mhz(mp.lock.fmax),
                ]);
            }
            let pdp = powers[0] * 1e6 / (plat.abb.target_freq / 1e6);
            t.summary_row(["metric", "value"]);
            t.summary_row([
                "active_over_retention".to_string(),
                fmt_num(powers[0] / powers[2], 2),
            ]);
            t.summary_row(["active_pdp_uW_per_MHz".to_string(), fmt_num(pdp, 3)]);
            if let Some((f, d)) = c.border_pdp {
                t.summary_row([
                    format!(
                        "border_pdp_uW_per_MHz@{}V_{}MHz",
                        fmt_num(cfg.anchors.signoff_vdd_min.unwrap_or(0.0), 2),
                        fmt_num(f / 1e6, 0)
                    ),
                    fmt_num(d, 3),
                ]);
                t.comment("border PDP anchor is an interval because the published figures disagree (3.8 vs 3.9 uW/MHz)");
                if let Some(ap) = cfg.anchors.arch_perf {
                    t.summary_row([
                        "border_energy_uJ_per_CM".to_string(),
                        fmt_num(energy_per_coremark(d, ap)?, 3),
                    ]);
                }
            }
            if let Some(ap) = cfg.anchors.arch_perf {
                t.summary_row([
                    "active_energy_uJ_per_CM".to_string(),
                    fmt_num(energy_per_coremark(pdp, ap)?, 3),
                ]);
            }
            b.table("power_report.csv", t);
            b.table("retention_vs_temp.csv", temperature_table(p, &plat, cfg)?);
        }
        Command::Modes(a) => {
            let c = calibrate(cfg, &plat)?;
            let op = cfg.report_op()?;
            let text = match &a.schedule {
                Some(path) => std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
                None => a.segments.clone(),
            };
            let sched = ModeSchedule::parse(&text, op, plat.abb.target_freq)?;
            let r = simulate_schedule(&sched, &c.params, &plat)?;
            let mut t = Table::new(["segment", "mode", "duration_s", "power_uW", "energy_uJ"]);
            t.comment(format!(
                "schedule at {} V, {} C, corner {}",
                fmt_num(op.vdd(), 3),
                fmt_num(op.temp_c(), 1),
                op.corner().name()
            ));
            t.comment("relock energy after retention is a configured estimate, not a measurement");
            for (i, s) in r.segments.iter().enumerate() {
                t.row([
                    i.to_string(),
                    s.mode.to_string(),
                    format!("{:e}", s.duration),
                    uw(s.power),
                    fmt_num(s.energy * 1e6, 6),
                ]);
            }
            t.summary_row(["metric", "value"]);
            t.summary_row(["wake_transitions".to_string(), r.transitions.to_string()]);
            t.summary_row([
                "transition_energy_uJ".to_string(),
                fmt_num(r.transition_energy * 1e6, 6),
            ]);
            t.summary_row([
                "total_energy_uJ".to_string(),
                fmt_num(r.total_energy * 1e6, 6),
            ]);
            t.summary_row(["duration_s".to_string(), format!("{:e}", r.duration)]);
            t.summary_row(["average_power_uW".to_string(), uw(r.average_power)]);
            b.table("modes.csv", t);
        }
        Command::Shmoo(a) => {
            let c = calibrate(cfg, &plat)?;
            let vdd = parse_axis(&a.vdd)?;
            let freq: Vec<f64> = parse_axis(&a.freq)?.iter().map(|f| f * 1e6).collect();
            let temp = a.temp.unwrap_or(cfg.report_temp_c);
            let corner = match &a.corner {
                Some(s) => ProcessCorner::parse(s)?,
                None => cfg.report_corner,
            };
            let g = shmoo_scan(&vdd, &freq, temp, corner, &c.params, &plat)?;
            b.table("shmoo.csv", shmoo_table(&g));
            b.table("shmoo_pdp.csv", shmoo_pdp_table(&g));
            if a.svg {
                b.svgs.push(("shmoo.svg".into(), shmoo_svg(&g)));
            }
        }
        Command::Signoff(a) => {
            let c = calibrate(cfg, &plat)?;
            let grid = SignoffGrid::standard(c.vdd_nom, cfg.policy.vdd_spread)?;
            let rep = corner_sweep(&grid, &c.params, &plat)?;
            let n = a.samples.unwrap_or(cfg.bounding_samples);
            let bound = bounding_corner_check(
                &c.params,
                &plat,
                (c.vdd_signoff_min, c.vdd_signoff_max),
                n,
                cfg.seed,
            )?;
            let mut t = Table::new([
                "corner",
                "vdd_V",
                "temp_C",
                "lock",
                "bias_vnw_V",
                "bias_vpw_V",
                "fmax_MHz",
                "leakage_uW",
            ]);
            t.comment(format!(
                "ABB target {} MHz; grid {} corners x {} supplies x {} temperatures ({}..{} C)",
                fmt_num(rep.target_freq / 1e6, 1),
                grid.corners.len(),
                grid.vdd_points.len(),
                grid.temps.len(),
                TEMP_MIN_C,
                TEMP_MAX_C
            ));
            for pt in &rep.points {
                let (lock, bias) = match &pt.lock {
                    Ok(bp) => ("locked".to_string(), *bp),
                    Err(r) => (format!("nolock:{r}"), Default::default()),
                };
                t.row([
                    pt.op.corner().name(),
                    fmt_num(pt.op.vdd(), 4),
                    fmt_num(pt.op.temp_c(), 1),
                    lock,
                    fmt_num(bias.vnw, 4),
                    fmt_num(bias.vpw, 4),
                    mhz(pt.fmax),
                    uw(pt.leakage),
                ]);
            }
            t.summary_row(["metric", "value", "corner", "vdd_V", "temp_C"]);
            let loc = |name: &str, v: String, pt: &crate::signoff::SignoffPoint| {
                vec![
                    name.to_string(),
                    v,
                    pt.op.corner().name(),
                    fmt_num(pt.op.vdd(), 4),
                    fmt_num(pt.op.temp_c(), 1),
                ]
            };
            if let Some(w) = &rep.worst_fmax {
                t.summary.push(loc("worst_fmax_MHz", mhz(w.fmax), w));
            }
            if let Some(w) = &rep.worst_leakage {
                t.summary.push(loc("worst_leakage_uW", uw(w.leakage), w));
            }
            t.summary_row(["nolock_points".to_string(), rep.failures().to_string()]);
            t.summary_row(["bounding_samples".to_string(), bound.samples.to_string()]);
            t.summary_row(["bounding_pass".to_string(), bound.pass.to_string()]);
            t.summary_row([
                "bounding_counterexamples".to_string(),
                bound.counterexamples.len().to_string(),
            ]);
            b.table("signoff.csv", t);
        }
        Command::TraceGen(a) => {
            let n = a.cycles.unwrap_or(cfg.trace_cycles);
            if n == 0 {
                return Err(Error::invalid("trace-gen", "--cycles must be > 0"));
            }
            let name = Path::new(&a.name);
            if name.components().count() != 1 {
                return Err(Error::invalid(
                    "trace-gen",
                    "--name must be a plain file name",
                ));
            }
            let t = generate_trace(&cfg.trace, n, cfg.seed)?;
            let mut header = cfg.trace.header(cfg.seed);
            header.insert(
                1,
                format!(
                    "abbsim {} config_sha256: {}",
                    crate::report::TOOL_VERSION,
                    cfg.hash()
                ),
            );
            b.raw.push((a.name.clone(), t.to_text(&header)));
        }
        Command::Table2(a) => {
            let trace = match &a.trace {
                Some(path) => Trace::read(path)?,
                None => generate_trace(&cfg.trace, a.cycles.unwrap_or(cfg.trace_cycles), cfg.seed)?,
            };
            let bank = BankConfig::new(cfg.sram.macro_kib)?;
            let r = table2_report(&Table2Targets::paper(), &trace, &bank, NETLIST_CLOCK_HZ)?;
            let mut t = Table::new([
                "row",
                "logic_dynamic",
                "logic_leakage",
                "sram_dynamic",
                "sram_leakage",
                "total",
            ]);
            t.comment(format!(
                "netlist-level breakdown at {} MHz, {} KiB macros, trace {} cycles / {} accesses",
                fmt_num(NETLIST_CLOCK_HZ / 1e6, 0),
                bank.macro_size_kib,
                r.stats.n_cycles,
                r.stats.accesses
            ));
            t.comment("power rows in uW; savings rows in percent of the ungated total");
            if let Some(w) = &r.warning {
                t.comment(format!("warning: {w}"));
                eprintln!("abbsim: warning: {w}");
            }
            let prow = |name: &str, p: &crate::activity::PowerBreakdown| {
                let mut v = vec![name.to_string()];
                v.extend(p.cells().iter().map(|c| fmt_num(c * 1e6, 2)));
                v.push(fmt_num(p.total() * 1e6, 2));
                v
            };
            t.rows.push(prow("no_bus_gating_uW", &r.ungated));
            t.rows.push(prow("bus_gating_uW", &r.gated));
            let mut s = vec!["savings_pct".to_string()];
            s.extend(r.savings.iter().map(|v| fmt_num(*v, 1)));
            s.push(fmt_num(r.total_savings, 1));
            t.rows.push(s);
            b.table("table2.csv", t);
        }
    }
    Ok(b)
}

fn temperature_table(
    p: &crate::device::DeviceParams,
    plat: &PlatformConfig,
    cfg: &RunConfig,
) -> Result<Table> {
    let base = cfg.report_op()?;
    let temps: Vec<f64> = (0..=33).map(|i| TEMP_MIN_C + 5.0 * i as f64).collect();
    let rows = retention_vs_temperature(p, plat, &base, &temps)?;
    let mut t = Table::new(["temp_C", "sleep_uW", "retention_uW"]);
    t.comment(format!(
        "sleep and retention power at {} V, corner {}",
        fmt_num(base.vdd(), 3),
        base.corner().name()
    ));
    for (temp, s, r) in rows {
        t.row([fmt_num(temp, 1), uw(s), uw(r)]);
    }
    Ok(t)
}
