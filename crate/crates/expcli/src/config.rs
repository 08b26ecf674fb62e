use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    /// Pareto boundary points along rate profiles.
    RateRegion,
    /// Best P2P rate for a symmetric MAC rate.
    P2pVsMac,
    /// Minimum power under SINR demands.
    PowerSinr,
    /// Minimum power under rate demands.
    PowerRate,
    /// Boundary point followed by power minimization.
    Table1,
    /// Minimum power with more MAC users.
    Multiuser,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        Self::RateRegion,
        Self::P2pVsMac,
        Self::PowerSinr,
        Self::PowerRate,
        Self::Table1,
        Self::Multiuser,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::RateRegion => "rate-region",
            Self::P2pVsMac => "p2p-vs-mac",
            Self::PowerSinr => "power-sinr",
            Self::PowerRate => "power-rate",
            Self::Table1 => "table1",
            Self::Multiuser => "multiuser",
        }
    }

    pub fn default_channel(self) -> &'static str {
        match self {
            Self::Multiuser => "H1+Hprime",
            _ => "H1",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    All,
    Proper,
    Improper,
}

impl Mode {
    pub fn proper(self) -> bool {
        self != Mode::Improper
    }

    pub fn improper(self) -> bool {
        self != Mode::Proper
    }
}

/// Sorted list of sweep values, written `lo:hi:step` or `a,b,c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid(Vec<f64>);

impl Grid {
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self, String> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(format!("grid step must be > 0, got {step}"));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(format!("grid bounds {lo}:{hi} are empty"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok(Self((0..=n).map(|k| round(lo + k as f64 * step)).collect()))
    }

    pub fn values(values: Vec<f64>) -> Result<Self, String> {
        if values.is_empty() {
            return Err("grid is empty".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        Ok(Self(values))
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }
}

/// Snaps accumulated steps like `0.30000000000000004` back to `0.3`.
fn round(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad grid value {t:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, step] => Self::range(num(lo)?, num(hi)?, num(step)?),
            [_] if s.trim().is_empty() => Err("grid is empty".into()),
            [_] => Self::values(s.split(',').map(num).collect::<Result<_, _>>()?),
            _ => Err(format!("grid {s:?} is neither lo:hi:step nor a comma list")),
        }
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.0.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
    }
}

/// Solver knobs that may be overridden per run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub tol_bis: Option<f64>,
    pub k_rand: Option<usize>,
    pub refine: Option<bool>,
    pub max_iter: Option<usize>,
    pub eps_star: Option<f64>,
    pub r_reinit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Builtin name or channel file; `None` picks the experiment default.
    pub channel: Option<String>,
    pub mode: Mode,
    /// Decoding order 1 (user 1 first) or 2; `None` runs both where it matters.
    pub order: Option<usize>,
    /// Symbol extension length of the extended runs.
    pub extension: usize,
    /// Demand, MAC-rate or `α₃` grid; `None` picks the experiment default.
    pub grid: Option<Grid>,
    /// Single rate profile for rate-region and table1.
    pub alpha: Option<[f64; 3]>,
    /// Resolution of the `α₁ : α₂` split in rate-region.
    pub alpha_step: f64,
    /// User counts of the multiuser experiment.
    pub users: Vec<usize>,
    pub seed: u64,
    /// Output directory.
    pub out: PathBuf,
    pub solver: SolverOverrides,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            channel: None,
            mode: Mode::All,
            order: None,
            extension: 3,
            grid: None,
            alpha: None,
            alpha_step: 0.25,
            users: vec![3, 7],
            seed: 0,
            out: PathBuf::from("out"),
            solver: SolverOverrides::default(),
        }
    }

    pub fn channel_name(&self) -> &str {
        self.channel.as_deref().unwrap_or(self.experiment.default_channel())
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.extension == 0 {
            return bad("extension must be ≥ 1".into());
        }
        if let Some(o) = self.order {
            if !(1..=2).contains(&o) {
                return bad(format!("order must be 1 or 2, got {o}"));
            }
        }
        if let Some(a) = self.alpha {
            if a.iter().any(|x| !(*x >= 0.0)) || (a.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad(format!("alpha {a:?} must be nonnegative and sum to 1"));
            }
        }
        if !(self.alpha_step > 0.0 && self.alpha_step <= 0.5) {
            return bad(format!("alpha step must lie in (0, 0.5], got {}", self.alpha_step));
        }
        if self.users.is_empty() || self.users.iter().any(|j| !(3..=crate::channel::MAX_USERS).contains(j)) {
            return bad(format!("users {:?} must be a non-empty subset of 3..=7", self.users));
        }
        let s = &self.solver;
        for (name, v) in [("tol_bis", s.tol_bis), ("eps_star", s.eps_star)] {
            if v.is_some_and(|v| !(v > 0.0)) {
                return bad(format!("{name} must be > 0"));
            }
        }
        if s.k_rand == Some(0) || s.max_iter == Some(0) {
            return bad("k_rand and max_iter must be ≥ 1".into());
        }
        if let Some(g) = &self.grid {
            let neg = g.points().iter().any(|&x| x < 0.0);
            if neg {
                return bad("grid values must be ≥ 0".into());
            }
            if self.experiment == ExperimentId::RateRegion && g.points().iter().any(|&x| x > 1.0) {
                return bad("rate-region grid holds α₃ values in [0, 1]".into());
            }
        }
        Ok(())
    }

    /// Applies the fields present in a TOML document on top of `self`.
    pub fn apply_toml(&mut self, text: &str) -> Result<(), RunError> {
        let f: ConfigFile = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        if let Some(v) = f.experiment {
            self.experiment = v;
        }
        if f.channel.is_some() {
            self.channel = f.channel;
        }
        if let Some(v) = f.mode {
            self.mode = v;
        }
        if f.order.is_some() {
            self.order = f.order;
        }
        if let Some(v) = f.extension {
            self.extension = v;
        }
        if f.grid.is_some() {
            self.grid = f.grid;
        }
        if f.alpha.is_some() {
            self.alpha = f.alpha;
        }
        if let Some(v) = f.alpha_step {
            self.alpha_step = v;
        }
        if let Some(v) = f.users {
            self.users = v;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = f.out {
            self.out = v;
        }
        if let Some(s) = f.solver {
            let o = &mut self.solver;
            o.tol_bis = s.tol_bis.or(o.tol_bis);
            o.k_rand = s.k_rand.or(o.k_rand);
            o.refine = s.refine.or(o.refine);
            o.max_iter = s.max_iter.or(o.max_iter);
            o.eps_star = s.eps_star.or(o.eps_star);
            o.r_reinit = s.r_reinit.or(o.r_reinit);
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<ExperimentId>,
    channel: Option<String>,
    mode: Option<Mode>,
    order: Option<usize>,
    extension: Option<usize>,
    grid: Option<Grid>,
    alpha: Option<[f64; 3]>,
    alpha_step: Option<f64>,
    users: Option<Vec<usize>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    solver: Option<SolverOverrides>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_snaps_steps() {
        let g = Grid::range(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.points().len(), 11);
        assert_eq!(g.points()[3], 0.3);
        assert_eq!(g.points()[10], 1.0);
        assert!(Grid::range(0.0, 1.0, 0.0).is_err());
        assert!(Grid::range(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn grid_syntax() {
        assert_eq!("0.2, 0.5".parse::<Grid>().unwrap().points(), &[0.2, 0.5]);
        assert!("".parse::<Grid>().is_err());
        assert!("1:2".parse::<Grid>().is_err());
        assert!("a,b".parse::<Grid>().is_err());
        assert!("nan".parse::<Grid>().is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::new(ExperimentId::RateRegion);
        assert!(c.validate().is_ok());
        c.grid = Some(Grid::values(vec![1.5]).unwrap());
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(ExperimentId::Multiuser);
        c.users = vec![2];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(ExperimentId::PowerRate);
        c.order = Some(3);
        assert!(c.validate().is_err());
        c.order = None;
        c.alpha = Some([0.5, 0.5, 0.5]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_overrides_and_rejects_unknown_keys() {
        let mut c = ExperimentConfig::new(ExperimentId::PowerSinr);
        c.apply_toml("seed = 4\ngrid = \"0:0.2:0.1\"\n[solver]\nk_rand = 9\n").unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.grid.as_ref().unwrap().points(), &[0.0, 0.1, 0.2]);
        assert_eq!(c.solver.k_rand, Some(9));
        assert!(c.apply_toml("sed = 4").is_err());
    }
}
