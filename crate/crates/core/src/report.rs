//! CSV and SVG report assembly and emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::signoff::{ShmooCell, ShmooGrid};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeta {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl RunMeta {
    pub fn new(config_hash: String, seed: u64) -> Self {
        RunMeta {
            config_hash,
            seed,
            version: TOOL_VERSION.to_string(),
        }
    }
}

/// One CSV file: leading `#` comment lines, a header and rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Optional trailing block separated by a blank line.
    pub summary: Vec<Vec<String>>,
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

fn push_row(out: &mut String, row: &[String]) {
    let cells: Vec<String> = row.iter().map(|c| escape(c)).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn comment(&mut self, c: impl Into<String>) -> &mut Self {
        self.comments.push(c.into());
        self
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) -> &mut Self {
        self.rows.push(cells.into_iter().map(Into::into).collect());
        self
    }

    pub fn summary_row<S: Into<String>>(
        &mut self,
        cells: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        self.summary
            .push(cells.into_iter().map(Into::into).collect());
        self
    }

    pub fn render(&self, meta: &RunMeta) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# abbsim {}", meta.version);
        let _ = writeln!(out, "# config_sha256: {}", meta.config_hash);
        let _ = writeln!(out, "# seed: {}", meta.seed);
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        push_row(&mut out, &self.header);
        for r in &self.rows {
            push_row(&mut out, r);
        }
        if !self.summary.is_empty() {
            out.push('\n');
            for r in &self.summary {
                push_row(&mut out, r);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportBundle {
    pub tables: Vec<(String, Table)>,
    pub svgs: Vec<(String, String)>,
    /// Files copied verbatim, such as generated traces.
    pub raw: Vec<(String, String)>,
    pub meta: Option<RunMeta>,
}

impl ReportBundle {
    pub fn new(meta: RunMeta) -> Self {
        ReportBundle {
            meta: Some(meta),
            ..Default::default()
        }
    }

    pub fn table(&mut self, name: &str, t: Table) {
        self.tables.push((name.to_string(), t));
    }

    /// Rendered file contents in emission order.
    pub fn rendered(&self) -> Vec<(String, String)> {
        let meta = self
            .meta
            .clone()
            .unwrap_or_else(|| RunMeta::new("unknown".into(), 0));
        let mut files: Vec<(String, String)> = self
            .tables
            .iter()
            .map(|(n, t)| (n.clone(), t.render(&meta)))
            .collect();
        files.extend(self.svgs.iter().cloned());
        files.extend(self.raw.iter().cloned());
        files
    }
}

/// Write every file of `bundle` under `dir`, creating it if needed.
pub fn emit_report(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, content) in bundle.rendered() {
        let path = dir.join(&name);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn fmt_num(v: f64, decimals: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        let s = format!("{v:.decimals$}");
        // Avoid a signed zero in the output.
        if s.trim_start_matches('-')
            .chars()
            .all(|c| c == '0' || c == '.')
        {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

fn shmoo_header(g: &ShmooGrid) -> Vec<String> {
    let mut h = vec!["vdd_V\\freq_MHz".to_string()];
    h.extend(g.freq_axis.iter().map(|f| fmt_num(f / 1e6, 3)));
    h
}

/// PASS/FAIL matrix: rows by descending supply, columns by ascending frequency.
pub fn shmoo_table(g: &ShmooGrid) -> Table {
    let mut t = Table {
        header: shmoo_header(g),
        ..Default::default()
    };
    t.comment(format!(
        "shmoo at corner {} and {} C; cells P or F:<cause>",
        g.corner.name(),
        fmt_num(g.temp_c, 1)
    ));
    for (i, row) in g.cells.iter().enumerate().rev() {
        let mut r = vec![fmt_num(g.vdd_axis[i], 3)];
        r.extend(row.iter().map(ShmooCell::code));
        t.rows.push(r);
    }
    t
}

/// PDP of passing cells in µW/MHz, blank for failing cells.
pub fn shmoo_pdp_table(g: &ShmooGrid) -> Table {
    let mut t = Table {
        header: shmoo_header(g),
        ..Default::default()
    };
    t.comment("power-delay product of passing cells, uW/MHz");
    for (i, row) in g.cells.iter().enumerate().rev() {
        let mut r = vec![fmt_num(g.vdd_axis[i], 3)];
        r.extend(
            row.iter()
                .map(|c| c.pdp().map(|d| fmt_num(d, 4)).unwrap_or_default()),
        );
        t.rows.push(r);
    }
    t
}

/// Heat map: passing cells shaded by PDP, failing cells grey.
pub fn shmoo_svg(g: &ShmooGrid) -> String {
    let cw = 28.0;
    let ch = 14.0;
    let left = 60.0;
    let top = 30.0;
    let nf = g.freq_axis.len() as f64;
    let nv = g.vdd_axis.len() as f64;
    let width = left + cw * nf + 20.0;
    let height = top + ch * nv + 40.0;
    let pdps: Vec<f64> = g
        .cells
        .iter()
        .flatten()
        .filter_map(ShmooCell::pdp)
        .collect();
    let lo = pdps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pdps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="monospace" font-size="9">"#,
        fmt_num(width, 1),
        fmt_num(height, 1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="14">shmoo {} {} C (darker = lower PDP)</text>"#,
        fmt_num(left, 1),
        g.corner.name(),
        fmt_num(g.temp_c, 1)
    );
    let rows = g.vdd_axis.len();
    for (i, row) in g.cells.iter().enumerate() {
        let y = top + ch * (rows - 1 - i) as f64;
        let _ = writeln!(
            s,
            r#"<text x="4" y="{}">{}</text>"#,
            fmt_num(y + ch - 3.0, 1),
            fmt_num(g.vdd_axis[i], 3)
        );
        for (j, c) in row.iter().enumerate() {
            let x = left + cw * j as f64;
            let fill = match c.pdp() {
                Some(d) => {
                    let t = if hi > lo { (d - lo) / (hi - lo) } else { 0.0 };
                    let g8 = (80.0 + 150.0 * t).round() as u8;
                    format!("rgb(30,{g8},60)")
                }
                None => "rgb(200,200,200)".to_string(),
            };
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="white"><title>{}</title></rect>"#,
                fmt_num(x, 1),
                fmt_num(y, 1),
                fmt_num(cw, 1),
                fmt_num(ch, 1),
                c.code()
            );
        }
    }
    let y = top + ch * nv + 12.0;
    for (j, f) in g.freq_axis.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            fmt_num(left + cw * j as f64 + 2.0, 1),
            fmt_num(y, 1),
            fmt_num(f / 1e6, 0)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_layout() {
        let mut t = Table::new(["a", "b"]);
        t.comment("hello")
            .row(["1", "x,y"])
            .summary_row(["total", "2"]);
        let s = t.render(&RunMeta::new("abc".into(), 3));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[1], "# config_sha256: abc");
        assert_eq!(lines[2], "# seed: 3");
        assert_eq!(lines[3], "# hello");
        assert_eq!(lines[4], "a,b");
        assert_eq!(lines[5], "1,\"x,y\"");
        assert_eq!(lines[6], "");
        assert_eq!(lines[7], "total,2");
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(-0.0000001, 3), "0.000");
        assert_eq!(fmt_num(3.14159, 2), "3.14");
        assert_eq!(fmt_num(f64::NAN, 2), "nan");
    }

    #[test]
    fn unwritable_dir_names_the_path() {
        let tmp = tempfile::tempdir().unwrap();
        let blocker = tmp.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let dir = blocker.join("sub");
        let mut b = ReportBundle::new(RunMeta::new("h".into(), 0));
        b.table("t.csv", Table::new(["a"]));
        let err = emit_report(&b, &dir).unwrap_err();
        assert!(
            err.to_string().contains(&dir.display().to_string()),
            "{err}"
        );
    }
}
