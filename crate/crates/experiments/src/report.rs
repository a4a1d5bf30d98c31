//! Tables, verdicts and plot series written by every driver.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Shortest round-trip decimal form, so output bytes depend only on the value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub pass: bool,
    /// The quantity compared against `threshold`.
    pub measured: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Verdict {
    /// Passes when `measured ≤ threshold`.
    pub fn at_most(claim: &str, measured: f64, threshold: f64) -> Self {
        Verdict { claim: claim.into(), pass: measured <= threshold, measured, threshold, detail: String::new() }
    }

    /// Passes when `measured ≥ threshold`.
    pub fn at_least(claim: &str, measured: f64, threshold: f64) -> Self {
        Verdict { claim: claim.into(), pass: measured >= threshold, measured, threshold, detail: String::new() }
    }

    /// Counts of failures; passes at zero.
    pub fn none(claim: &str, violations: usize) -> Self {
        Verdict::at_most(claim, violations as f64, 0.0)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub experiment: String,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub plots: Vec<PlotSeries>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    experiment: &'a str,
    passed: bool,
    verdicts: &'a [Verdict],
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    warnings: &'a [String],
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Report { experiment: experiment.to_string(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, claim: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.claim == claim)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdicts_json(&self) -> Result<String> {
        let file = VerdictFile {
            experiment: &self.experiment,
            passed: self.passed(),
            verdicts: &self.verdicts,
            warnings: &self.warnings,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Writes `<experiment>_<table>.csv`, `<experiment>_verdicts.json` and, on request, `<experiment>_plot.csv`.
    pub fn write(&self, dir: &Path, plot_data: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
            Ok(())
        };
        for t in &self.tables {
            put(format!("{}_{}.csv", self.experiment, t.name), t.to_csv()?)?;
        }
        put(format!("{}_verdicts.json", self.experiment), self.verdicts_json()?)?;
        if plot_data && !self.plots.is_empty() {
            let mut t = Table::new("plot", &["series", "x", "y"]);
            for s in &self.plots {
                for &(x, y) in &s.points {
                    t.push(vec![s.name.clone(), num(x), num(y)]);
                }
            }
            put(format!("{}_plot.csv", self.experiment), t.to_csv()?)?;
        }
        Ok(written)
    }
}

/// True when every step goes strictly down.
pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares `c` in `err ≈ c/t`.
pub fn fit_inverse_t(points: &[(f64, f64)]) -> f64 {
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(t, e)| (n + e / t, d + 1.0 / (t * t)));
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_formats() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![num(0.1), "p,q".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n0.1,\"p,q\"\n");
    }

    #[test]
    fn inverse_t_fit_recovers_constant() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&t| (t, 0.7 / t)).collect();
        assert!((fit_inverse_t(&pts) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn verdicts_serialize() {
        let mut r = Report::new("demo");
        r.verdicts.push(Verdict::at_most("small", 1e-12, 1e-9));
        let json = r.verdicts_json().unwrap();
        assert!(json.contains("\"passed\": true"));
    }
}
