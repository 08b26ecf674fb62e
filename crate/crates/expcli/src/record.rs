use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::RunError;

/// Feasible rows must clear this audit margin.
pub const AUDIT_FLOOR: f64 = -1e-6;

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub experiment: String,
    pub channel: String,
    pub mode: String,
    /// Demand, MAC rate or `a1;a2;a3` rate profile.
    pub demand: String,
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
    #[serde(rename = "R2")]
    pub r2: Option<f64>,
    #[serde(rename = "R3")]
    pub r3: Option<f64>,
    #[serde(rename = "P_total")]
    pub p_total: Option<f64>,
    /// Per-user powers separated by `;`.
    #[serde(rename = "P_per_user")]
    pub p_per_user: String,
    pub status: String,
    pub iters: usize,
    pub audit_slack: Option<f64>,
    pub seed: u64,
}

impl CurvePoint {
    pub fn feasible(&self) -> bool {
        self.status != "infeasible"
    }

    pub fn audited(&self) -> bool {
        !self.feasible() || self.audit_slack.is_none_or(|s| s >= AUDIT_FLOOR)
    }
}

pub fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// Comparison of a computed value against a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub target: String,
    pub value: Option<f64>,
    pub delta: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// `|value − target| ≤ rel·|target|`.
    pub fn relative(name: &str, target: f64, rel: f64, value: Option<f64>) -> Self {
        let delta = value.map(|v| v - target);
        Self {
            name: name.into(),
            target: format!("{target} ± {}%", rel * 100.0),
            value,
            delta,
            pass: delta.is_some_and(|d| d.abs() <= rel * target.abs()),
        }
    }

    /// `|value − target| ≤ tol`.
    pub fn absolute(name: &str, target: f64, tol: f64, value: Option<f64>) -> Self {
        let delta = value.map(|v| v - target);
        Self {
            name: name.into(),
            target: format!("{target} ± {tol}"),
            value,
            delta,
            pass: delta.is_some_and(|d| d.abs() <= tol),
        }
    }

    pub fn range(name: &str, lo: f64, hi: f64, value: Option<f64>) -> Self {
        Self {
            name: name.into(),
            target: format!("[{lo}, {hi}]"),
            value,
            delta: value.map(|v| if v < lo { v - lo } else if v > hi { v - hi } else { 0.0 }),
            pass: value.is_some_and(|v| (lo..=hi).contains(&v)),
        }
    }

    /// Passes when no value was produced.
    pub fn infeasible(name: &str, value: Option<f64>) -> Self {
        Self { name: name.into(), target: "infeasible".into(), value, delta: None, pass: value.is_none() }
    }

    /// A property; `value` carries the worst violation when it fails.
    pub fn holds(name: &str, pass: bool, worst: Option<f64>) -> Self {
        Self { name: name.into(), target: "holds".into(), value: worst, delta: None, pass }
    }
}

/// Result of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub channel: String,
    pub seed: u64,
    pub rows: Vec<CurvePoint>,
    pub checks: Vec<Check>,
    pub elapsed_seconds: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    channel: &'a str,
    seed: u64,
    rows: usize,
    infeasible_rows: usize,
    audit_ok: bool,
    elapsed_seconds: f64,
    checks: &'a [Check],
}

impl Report {
    pub fn audit_ok(&self) -> bool {
        self.rows.iter().all(CurvePoint::audited)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// File stem `<experiment>-<channel>` with path-unsafe characters replaced.
    pub fn stem(&self) -> String {
        let ch: String = Path::new(&self.channel)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.channel.clone())
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        format!("{}-{ch}", self.experiment)
    }

    pub fn csv(&self) -> Result<Vec<u8>, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.into_inner().map_err(|e| RunError::Io { path: "<buffer>".into(), source: e.into_error() })
    }

    pub fn summary_json(&self) -> Result<String, RunError> {
        let s = Summary {
            experiment: &self.experiment,
            channel: &self.channel,
            seed: self.seed,
            rows: self.rows.len(),
            infeasible_rows: self.rows.iter().filter(|r| !r.feasible()).count(),
            audit_ok: self.audit_ok(),
            elapsed_seconds: self.elapsed_seconds,
            checks: &self.checks,
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), RunError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| RunError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let csv_path = dir.join(format!("{}.csv", self.stem()));
        let json_path = dir.join(format!("{}.json", self.stem()));
        fs::write(&csv_path, self.csv()?).map_err(io(&csv_path))?;
        fs::write(&json_path, self.summary_json()?).map_err(io(&json_path))?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        assert!(Check::relative("a", 2.0, 0.01, Some(2.019)).pass);
        assert!(!Check::relative("a", 2.0, 0.01, None).pass);
        let r = Check::range("r", 23.0, 46.0, Some(50.0));
        assert!(!r.pass);
        assert_eq!(r.delta, Some(4.0));
        assert!(Check::infeasible("i", None).pass);
        assert!(!Check::absolute("b", 1.0, 0.1, Some(1.2)).pass);
    }

    #[test]
    fn stem_sanitizes_channel() {
        let r = Report {
            experiment: "multiuser".into(),
            channel: "H1+Hprime(5)".into(),
            seed: 0,
            rows: vec![],
            checks: vec![],
            elapsed_seconds: 0.0,
        };
        assert_eq!(r.stem(), "multiuser-H1_Hprime_5_");
        let f = Report { channel: "/tmp/x/my chan.txt".into(), ..r };
        assert_eq!(f.stem(), "multiuser-my_chan");
    }
}
