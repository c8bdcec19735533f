//! SRAM access traces: record type, text format and a seeded synthetic
//! generator standing in for a CoreMark activity dump.
//!
//! The generator uses ChaCha8 from `rand_chacha` seeded with
//! `seed_from_u64(seed)`. Uniform doubles take the top 53 bits of
//! `next_u64`, so traces are identical on every platform for a given seed.

use std::fmt::Write as _;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sram::{BANK_BYTES, N_BANKS};

pub const BUS_BITS: u8 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRecord {
    pub cycle: u64,
    pub bank: u8,
    /// Byte offset within the bank.
    pub address: u32,
    pub is_write: bool,
    /// Data-bus bits that flip on this access.
    pub data_toggles: u8,
}

impl AccessRecord {
    pub fn validate(&self) -> Result<()> {
        if self.bank as u32 >= N_BANKS {
            return Err(Error::invalid(
                "access record",
                format!("bank {} >= {N_BANKS}", self.bank),
            ));
        }
        if self.address >= BANK_BYTES {
            return Err(Error::AddressOutOfRange {
                address: self.address,
            });
        }
        if self.data_toggles > BUS_BITS {
            return Err(Error::invalid(
                "access record",
                format!("{} toggles on a {BUS_BITS}-bit bus", self.data_toggles),
            ));
        }
        Ok(())
    }
}

/// A window of `n_cycles` clock cycles and the SRAM accesses inside it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub n_cycles: u64,
    pub records: Vec<AccessRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceStats {
    pub n_cycles: u64,
    pub accesses: u64,
    pub writes: u64,
    pub toggles: u64,
}

impl Trace {
    pub fn new(n_cycles: u64, records: Vec<AccessRecord>) -> Result<Self> {
        let t = Trace { n_cycles, records };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let mut last = 0;
        for (i, r) in self.records.iter().enumerate() {
            r.validate()?;
            if r.cycle < last {
                return Err(Error::MalformedTrace {
                    line: i + 1,
                    detail: format!("cycle {} after cycle {last}", r.cycle),
                });
            }
            if r.cycle >= self.n_cycles {
                return Err(Error::MalformedTrace {
                    line: i + 1,
                    detail: format!("cycle {} outside a {}-cycle window", r.cycle, self.n_cycles),
                });
            }
            last = r.cycle;
        }
        Ok(())
    }

    pub fn stats(&self) -> TraceStats {
        let mut s = TraceStats {
            n_cycles: self.n_cycles,
            ..Default::default()
        };
        for r in &self.records {
            s.accesses += 1;
            s.writes += r.is_write as u64;
            s.toggles += r.data_toggles as u64;
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let bad = |detail: String| Error::MalformedTrace {
                line: line_no,
                detail,
            };
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("cycles:") {
                    let n = v
                        .trim()
                        .parse::<u64>()
                        .map_err(|e| bad(format!("cycle count `{}`: {e}", v.trim())))?;
                    declared = Some(n);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(bad(format!("expected 5 fields, found {}", fields.len())));
            }
            let num = |s: &str, what: &str| {
                let parsed = match s.strip_prefix("0x") {
                    Some(hex) => u64::from_str_radix(hex, 16),
                    None => s.parse::<u64>(),
                };
                parsed.map_err(|e| bad(format!("{what} `{s}`: {e}")))
            };
            let cycle = num(fields[0], "cycle")?;
            let bank = num(fields[1], "bank")?;
            let address = num(fields[2], "address")?;
            let is_write = match fields[3] {
                "R" | "r" => false,
                "W" | "w" => true,
                other => return Err(bad(format!("access kind `{other}` is not R or W"))),
            };
            let toggles = num(fields[4], "toggles")?;
            if bank >= N_BANKS as u64 || toggles > BUS_BITS as u64 {
                return Err(bad(format!(
                    "bank {bank} or toggles {toggles} out of range"
                )));
            }
            if address >= BANK_BYTES as u64 {
                return Err(Error::AddressOutOfRange {
                    address: address.min(u32::MAX as u64) as u32,
                });
            }
            if let Some(prev) = records.last().map(|r: &AccessRecord| r.cycle) {
                if cycle < prev {
                    return Err(bad(format!("cycle {cycle} after cycle {prev}")));
                }
            }
            records.push(AccessRecord {
                cycle,
                bank: bank as u8,
                address: address as u32,
                is_write,
                data_toggles: toggles as u8,
            });
        }
        let implied = records.last().map_or(0, |r| r.cycle + 1);
        let n_cycles = declared.unwrap_or(implied);
        if n_cycles < implied {
            return Err(Error::MalformedTrace {
                line: 0,
                detail: format!("header declares {n_cycles} cycles but records reach {implied}"),
            });
        }
        Ok(Trace { n_cycles, records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Serialize with a header describing the generator, if any.
    pub fn to_text(&self, header: &[String]) -> String {
        let mut out = String::with_capacity(24 * self.records.len() + 256);
        for h in header {
            let _ = writeln!(out, "# {h}");
        }
        let _ = writeln!(out, "# cycles: {}", self.n_cycles);
        let _ = writeln!(out, "# cycle bank address R|W toggles");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                r.cycle,
                r.bank,
                r.address,
                if r.is_write { 'W' } else { 'R' },
                r.data_toggles
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceGenConfig {
    /// Probability of an SRAM access in a cycle.
    pub access_rate: f64,
    pub write_fraction: f64,
    /// Probability that an access continues sequentially from the previous
    /// address in the same bank instead of jumping.
    pub locality: f64,
    /// Mean toggling data bits per access, out of 32.
    pub toggle_mean: f64,
}

impl Default for TraceGenConfig {
    fn default() -> Self {
        TraceGenConfig {
            access_rate: 0.35,
            write_fraction: 0.3,
            locality: 0.8,
            toggle_mean: 8.0,
        }
    }
}

impl TraceGenConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("access_rate", self.access_rate),
            ("write_fraction", self.write_fraction),
            ("locality", self.locality),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(
                    "trace config",
                    format!("{name}={v} outside [0, 1]"),
                ));
            }
        }
        if !(0.0..=BUS_BITS as f64).contains(&self.toggle_mean) {
            return Err(Error::invalid(
                "trace config",
                format!("toggle_mean={} outside [0, 32]", self.toggle_mean),
            ));
        }
        Ok(())
    }

    pub fn header(&self, seed: u64) -> Vec<String> {
        vec![
            "abbsim synthetic SRAM trace".to_string(),
            format!("generator: ChaCha8Rng::seed_from_u64({seed}), doubles from the top 53 bits of next_u64"),
            format!(
                "access_rate={} write_fraction={} locality={} toggle_mean={}",
                self.access_rate, self.write_fraction, self.locality, self.toggle_mean
            ),
        ]
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Cumulative distribution of Binomial(32, p), for inverse-CDF sampling.
fn binomial_cdf(p: f64) -> [f64; BUS_BITS as usize + 1] {
    let n = BUS_BITS as usize;
    let mut cdf = [0.0; BUS_BITS as usize + 1];
    let mut acc = 0.0;
    for (k, slot) in cdf.iter_mut().enumerate() {
        let mut c = 1.0;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        acc += c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
        *slot = acc;
    }
    cdf[n] = 1.0;
    cdf
}

/// Generate a trace over `n_cycles` cycles.
pub fn generate_trace(cfg: &TraceGenConfig, n_cycles: u64, seed: u64) -> Result<Trace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cdf = binomial_cdf(cfg.toggle_mean / BUS_BITS as f64);
    let words = BANK_BYTES / 4;
    let mut cursor = [0u32; N_BANKS as usize];
    let mut records = Vec::with_capacity((n_cycles as f64 * cfg.access_rate * 1.01) as usize + 16);
    for cycle in 0..n_cycles {
        if unit(&mut rng) >= cfg.access_rate {
            continue;
        }
        let bank = ((unit(&mut rng) * N_BANKS as f64) as u32).min(N_BANKS - 1) as usize;
        let is_write = unit(&mut rng) < cfg.write_fraction;
        let address = if unit(&mut rng) < cfg.locality {
            (cursor[bank] + 4) % BANK_BYTES
        } else {
            ((unit(&mut rng) * words as f64) as u32).min(words - 1) * 4
        };
        cursor[bank] = address;
        let u = unit(&mut rng);
        let toggles = cdf.iter().position(|&c| u < c).unwrap_or(BUS_BITS as usize) as u8;
        records.push(AccessRecord {
            cycle,
            bank: bank as u8,
            address,
            is_write,
            data_toggles: toggles,
        });
    }
    Ok(Trace { n_cycles, records })
}
