//! Machine-readable run artifacts: a hand-rolled JSON report and CSV tables.
//! Everything is written with a fixed field order and floats at 17 significant
//! digits, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::MoprhError;

/// 17 significant digits — enough to round-trip any f64 bit pattern.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// One identity checked at one degree.
#[derive(Clone, Debug)]
pub struct Record {
    pub suite: &'static str,
    pub identity: String,
    pub anchor: String,
    pub n: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// comparison records are informational and never gate the exit code
    pub gating: bool,
}

/// β/γ table row: entries row-major as [re, im].
#[derive(Clone, Debug)]
pub struct RecurrenceRow {
    pub n: usize,
    pub beta: Vec<[f64; 2]>,
    pub gamma: Vec<[f64; 2]>,
}

/// Lattice-vs-quadrature comparison row.
#[derive(Clone, Debug)]
pub struct LatticeRow {
    pub variant: &'static str,
    pub n: usize,
    pub lattice: Vec<[f64; 2]>,
    pub oracle: Vec<[f64; 2]>,
    pub diff: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub name: String,
    pub precision: &'static str,
    pub dim: usize,
    pub records: Vec<Record>,
    pub warnings: Vec<String>,
    pub findings: Vec<String>,
    pub recurrence_rows: Vec<RecurrenceRow>,
    pub lattice_rows: Vec<LatticeRow>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().filter(|r| r.gating).all(|r| r.pass)
    }

    /// `config_json` is embedded verbatim and must already be valid JSON.
    pub fn to_json(&self, config_json: &str) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"name\": \"{}\",", json_escape(&self.name));
        let _ = writeln!(s, "  \"precision\": \"{}\",", self.precision);
        let _ = writeln!(s, "  \"all_pass\": {},", self.all_pass());
        let _ = writeln!(s, "  \"warnings\": [");
        for (i, w) in self.warnings.iter().enumerate() {
            let comma = if i + 1 < self.warnings.len() { "," } else { "" };
            let _ = writeln!(s, "    \"{}\"{}", json_escape(w), comma);
        }
        s.push_str("  ],\n  \"findings\": [\n");
        for (i, f) in self.findings.iter().enumerate() {
            let comma = if i + 1 < self.findings.len() { "," } else { "" };
            let _ = writeln!(s, "    \"{}\"{}", json_escape(f), comma);
        }
        s.push_str("  ],\n  \"records\": [\n");
        for (i, r) in self.records.iter().enumerate() {
            let comma = if i + 1 < self.records.len() { "," } else { "" };
            let _ = writeln!(
                s,
                "    {{\"suite\": \"{}\", \"identity\": \"{}\", \"anchor\": \"{}\", \"n\": {}, \"residual\": {}, \"tolerance\": {}, \"pass\": {}}}{}",
                json_escape(r.suite),
                json_escape(&r.identity),
                json_escape(&r.anchor),
                r.n,
                fmt17(r.residual),
                fmt17(r.tolerance),
                r.pass,
                comma
            );
        }
        s.push_str("  ],\n  \"config\": ");
        s.push_str(config_json.trim_end());
        s.push_str("\n}\n");
        s
    }

    pub fn recurrence_csv(&self) -> String {
        let dim = self.dim.max(1);
        let mut s = String::from("n");
        for name in ["beta", "gamma"] {
            for i in 0..dim {
                for j in 0..dim {
                    let _ = write!(s, ",{name}_{i}{j}_re,{name}_{i}{j}_im");
                }
            }
        }
        s.push('\n');
        for row in &self.recurrence_rows {
            let _ = write!(s, "{}", row.n);
            for e in row.beta.iter().chain(row.gamma.iter()) {
                let _ = write!(s, ",{},{}", fmt17(e[0]), fmt17(e[1]));
            }
            s.push('\n');
        }
        s
    }

    pub fn lattice_csv(&self) -> String {
        let dim = self.dim.max(1);
        let mut s = String::from("variant,n,diff");
        for name in ["lattice", "oracle"] {
            for i in 0..dim {
                for j in 0..dim {
                    let _ = write!(s, ",{name}_{i}{j}_re,{name}_{i}{j}_im");
                }
            }
        }
        s.push('\n');
        for row in &self.lattice_rows {
            let _ = write!(s, "{},{},{}", row.variant, row.n, fmt17(row.diff));
            for e in row.lattice.iter().chain(row.oracle.iter()) {
                let _ = write!(s, ",{},{}", fmt17(e[0]), fmt17(e[1]));
            }
            s.push('\n');
        }
        s
    }

    pub fn residuals_csv(&self) -> String {
        let mut s = String::from("suite,identity,anchor,n,residual,tolerance,pass\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.suite,
                r.identity,
                r.anchor,
                r.n,
                fmt17(r.residual),
                fmt17(r.tolerance),
                r.pass
            );
        }
        s
    }

    /// Write report.json, recurrence.csv, lattice.csv, residuals.csv into `dir`.
    pub fn write_files(&self, dir: &Path, config_json: &str) -> Result<(), MoprhError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json(config_json))?;
        fs::write(dir.join("recurrence.csv"), self.recurrence_csv())?;
        fs::write(dir.join("lattice.csv"), self.lattice_csv())?;
        fs::write(dir.join("residuals.csv"), self.residuals_csv())?;
        Ok(())
    }
}
