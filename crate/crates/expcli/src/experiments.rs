use std::f64::consts::LN_2;
use std::time::Instant;

use pimac::model::{natural_order, vector_rates, ChannelInstance, Decoding, RateProfile, TransmitCovariance};
use pimac::power_min::{
    ccp_min_power_rates, joint_min_power, proper_min_power_rates, proper_min_power_sinr, separate_min_power,
    successive_opt, Demands, PowerOptions, PowerResult, Status,
};
use pimac::rate_region::{max_p2p_given_mac, max_sum_rate, RegionError, RegionOptions, RegionPoint, Signaling};
use rayon::prelude::*;

use crate::channel::{builtin, load_channel};
use crate::config::{ExperimentConfig, ExperimentId, Grid};
use crate::record::{join, Check, CurvePoint, Report};
use crate::RunError;

/// Power caps used by the power minimizations on builtin channels.
pub const LOOSE_CAP: f64 = 1e6;

/// MAC rates at which the P2P rate is reported by default.
const P2P_GRID: [f64; 11] = [
    0.0,
    0.106298955871207,
    0.238995414822772,
    0.407580337757025,
    0.634418498532304,
    0.899741224877468,
    1.01038597987462,
    1.03599402148905,
    1.03838191707311,
    1.08411864722439,
    1.62661330503882,
];

/// Table rows: profile and the reference savings in percent.
const TABLE_ROWS: [([f64; 3], f64, f64); 4] = [
    ([0.6, 0.2, 0.2], 23.0, 46.0),
    ([0.4, 0.1, 0.5], 14.0, 30.0),
    ([0.4, 0.4, 0.2], 28.0, 44.0),
    ([0.2, 0.6, 0.2], 32.0, 40.0),
];

/// Runs the experiment and writes `<out>/<experiment>-<channel>.{csv,json}`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let report = execute(cfg)?;
    report.write(&cfg.out)?;
    Ok(report)
}

/// Runs the experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    cfg.validate()?;
    let start = Instant::now();
    let run = Run { cfg, name: canonical(cfg.channel_name()) };
    let (rows, checks) = match cfg.experiment {
        ExperimentId::RateRegion => run.rate_region()?,
        ExperimentId::P2pVsMac => run.p2p_vs_mac()?,
        ExperimentId::PowerSinr => run.power_sinr()?,
        ExperimentId::PowerRate => run.power_rate()?,
        ExperimentId::Table1 => run.table1()?,
        ExperimentId::Multiuser => run.multiuser()?,
    };
    Ok(Report {
        experiment: cfg.experiment.name().into(),
        channel: run.name,
        seed: cfg.seed,
        rows,
        checks,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Builtin names in canonical spelling, file paths unchanged.
fn canonical(selector: &str) -> String {
    let up = selector.trim().to_ascii_uppercase();
    match up.as_str() {
        "H1" | "H2" => up,
        _ => match up.strip_prefix("H1+HPRIME") {
            Some(rest) => format!("H1+Hprime{rest}"),
            None => selector.to_string(),
        },
    }
}

type Rows = (Vec<CurvePoint>, Vec<Check>);

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    name: String,
}

impl Run<'_> {
    fn channel(&self) -> Result<ChannelInstance, RunError> {
        Ok(load_channel(self.cfg.channel_name())?)
    }

    /// Channel for power minimization: builtins get loose caps, files keep theirs.
    fn power_channel(&self, ch: &ChannelInstance) -> Result<ChannelInstance, RunError> {
        if builtin(self.cfg.channel_name())?.is_some() {
            Ok(ch.with_uniform_caps(LOOSE_CAP)?)
        } else {
            Ok(ch.clone())
        }
    }

    fn is(&self, name: &str) -> bool {
        self.name == name
    }

    fn region_options(&self) -> RegionOptions {
        let mut o = RegionOptions::default();
        o.solver.seed = self.cfg.seed;
        let s = &self.cfg.solver;
        if let Some(v) = s.tol_bis {
            o.solver.tol_bis = v;
        }
        if let Some(v) = s.k_rand {
            o.solver.k_rand = v;
        }
        if let Some(v) = s.refine {
            o.refine = v;
        }
        o
    }

    fn power_options(&self, decoding: Decoding) -> PowerOptions {
        let mut o = PowerOptions { decoding, ..PowerOptions::default() };
        o.solver.seed = self.cfg.seed;
        let s = &self.cfg.solver;
        if let Some(v) = s.max_iter {
            o.max_iter = v;
        }
        if let Some(v) = s.eps_star {
            o.eps_star = v;
        }
        if let Some(v) = s.r_reinit {
            o.r_reinit = v;
        }
        o
    }

    fn grid(&self, default: Grid) -> Grid {
        self.cfg.grid.clone().unwrap_or(default)
    }

    /// Decoding orders by number: 1 decodes user 1 first.
    fn orders(&self, default: &[usize]) -> Vec<usize> {
        self.cfg.order.map_or_else(|| default.to_vec(), |o| vec![o])
    }

    fn signalings(&self) -> Vec<Signaling> {
        let mut out = Vec::new();
        if self.cfg.mode.proper() {
            out.push(Signaling::Proper);
        }
        if self.cfg.mode.improper() {
            out.push(Signaling::Improper);
        }
        out
    }

    fn row(&self, mode: &str, demand: String) -> CurvePoint {
        CurvePoint {
            experiment: self.cfg.experiment.name().into(),
            channel: self.name.clone(),
            mode: mode.into(),
            demand,
            r1: None,
            r2: None,
            r3: None,
            p_total: None,
            p_per_user: String::new(),
            status: "infeasible".into(),
            iters: 0,
            audit_slack: None,
            seed: self.cfg.seed,
        }
    }

    fn region_row(&self, mode: &str, demand: String, p: &RegionPoint) -> CurvePoint {
        let powers: Vec<f64> = p.signals.iter().map(|s| s.variance()).collect();
        let b = p.bounds;
        let r = p.rates;
        let slack = [(b.l1, r[0]), (b.l2, r[1]), (b.l3, r[2]), (b.l4, r[0] + r[1])]
            .into_iter()
            .map(|(got, want)| (got - want) / want.max(1.0))
            .fold(f64::INFINITY, f64::min);
        CurvePoint {
            r1: Some(r[0]),
            r2: Some(r[1]),
            r3: Some(r[2]),
            p_total: Some(powers.iter().sum()),
            p_per_user: join(&powers),
            status: "ok".into(),
            iters: p.bisection_steps,
            audit_slack: Some(slack),
            ..self.row(mode, demand)
        }
    }

    fn power_row(&self, mode: &str, demand: f64, r: &PowerResult, rates: Option<[f64; 3]>) -> CurvePoint {
        let mut row = CurvePoint { iters: r.iterations, ..self.row(mode, demand.to_string()) };
        if !r.is_feasible() {
            return row;
        }
        row.p_total = Some(r.total);
        row.p_per_user = join(&r.per_user);
        row.status = match r.status {
            Status::Converged => "converged",
            Status::IterLimit => "iter-limit",
            Status::Infeasible => "infeasible",
        }
        .into();
        row.audit_slack = r.audit_slack.is_finite().then_some(r.audit_slack);
        if let Some(x) = rates {
            (row.r1, row.r2, row.r3) = (Some(x[0]), Some(x[1]), Some(x[2]));
        }
        row
    }

    fn rate_region(&self) -> Result<Rows, RunError> {
        let ch = self.channel()?;
        let opts = self.region_options();
        let profiles: Vec<[f64; 3]> = match self.cfg.alpha {
            Some(a) => vec![a],
            None => {
                let a3s = self.grid(Grid::range(0.0, 0.5, 0.25).expect("static grid"));
                let step = self.cfg.alpha_step;
                let splits: Vec<f64> = (1..).map(|k| k as f64 * step).take_while(|s| *s < 1.0 - 1e-9).collect();
                let mut out: Vec<[f64; 3]> = a3s
                    .points()
                    .iter()
                    .filter(|&&a3| a3 < 1.0)
                    .flat_map(|&a3| splits.iter().map(move |&s| [(1.0 - a3) * s, (1.0 - a3) * (1.0 - s), a3]))
                    .collect();
                out.push([0.0, 0.0, 1.0]);
                out
            }
        };
        let modes = self.signalings();
        let jobs: Vec<([f64; 3], Signaling)> =
            profiles.iter().flat_map(|a| modes.iter().map(move |m| (*a, *m))).collect();
        let points: Vec<RegionPoint> = jobs
            .par_iter()
            .map(|(a, m)| max_sum_rate(&RateProfile::new(*a)?, &ch, *m, &opts))
            .collect::<Result<_, _>>()?;
        let rows: Vec<CurvePoint> = jobs
            .iter()
            .zip(&points)
            .map(|((a, m), p)| self.region_row(signaling_name(*m), join(a), p))
            .collect();

        let mut checks = Vec::new();
        let endpoint = |m: Signaling| {
            jobs.iter().zip(&points).find(|((a, mm), _)| *a == [0.0, 0.0, 1.0] && *mm == m).map(|(_, p)| p.value)
        };
        for (name, target) in [("H1", 3.1894), ("H2", 3.6508)] {
            if self.is(name) {
                for m in &modes {
                    if let Some(v) = endpoint(*m) {
                        checks.push(Check::absolute(&format!("p2p endpoint {}", signaling_name(*m)), target, 5e-3, Some(v)));
                    }
                }
            }
        }
        if modes.len() == 2 {
            let tol = 2.0 * opts.solver.tol_bis / LN_2;
            let (mut above, mut equal) = (f64::INFINITY, 0.0f64);
            let mut zero_rows = 0;
            for pair in points.chunks(2).zip(&profiles) {
                let ([pr, im], a) = (pair.0, pair.1) else { continue };
                above = above.min(im.value - pr.value);
                if a[2] == 0.0 {
                    zero_rows += 1;
                    equal = equal.max((im.value - pr.value).abs());
                }
            }
            checks.push(Check::holds("improper sum rate ≥ proper", above >= -tol, Some(above)));
            if zero_rows > 0 {
                checks.push(Check::holds("improper = proper when α₃ = 0", equal <= tol, Some(equal)));
            }
        }
        Ok((rows, checks))
    }

    fn p2p_vs_mac(&self) -> Result<Rows, RunError> {
        let ch = self.channel()?;
        let opts = self.region_options();
        let grid = self.grid(Grid::values(P2P_GRID.to_vec()).expect("static grid"));
        let modes = self.signalings();
        let jobs: Vec<(f64, Signaling)> =
            grid.points().iter().flat_map(|r| modes.iter().map(move |m| (*r, *m))).collect();
        let points: Vec<Option<RegionPoint>> = jobs
            .par_iter()
            .map(|(r, m)| match max_p2p_given_mac(*r, &ch, *m, &opts) {
                Ok(p) => Ok(Some(p)),
                Err(RegionError::RateInfeasible(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_, _>>()?;
        let rows = jobs
            .iter()
            .zip(&points)
            .map(|((r, m), p)| match p {
                Some(p) => self.region_row(signaling_name(*m), r.to_string(), p),
                None => self.row(signaling_name(*m), r.to_string()),
            })
            .collect();
        let value = |r: f64, m: Signaling| {
            jobs.iter()
                .zip(&points)
                .find(|((x, mm), _)| (x - r).abs() < 1e-6 && *mm == m)
                .map(|(_, p)| p.as_ref().map(|p| p.value))
        };
        let mut checks = Vec::new();
        if self.is("H1") {
            for m in &modes {
                if let Some(v) = value(0.0, *m) {
                    checks.push(Check::absolute(&format!("free P2P rate {}", signaling_name(*m)), 3.1894, 5e-3, v));
                }
            }
            if let Some(v) = value(0.899741, Signaling::Improper) {
                checks.push(Check::range("improper plateau at r_mac 0.899741", 1.62, 1.80, v));
            }
            if let Some(v) = value(0.899741, Signaling::Proper) {
                checks.push(Check::relative("proper at r_mac 0.899741", 0.0654, 0.1, v));
            }
        }
        Ok((rows, checks))
    }

    fn power_sinr(&self) -> Result<Rows, RunError> {
        let ch = self.power_channel(&self.channel()?)?;
        let grid = self.grid(Grid::range(0.0, 1.5, 0.1).expect("static grid"));
        let order = order_list(self.orders(&[1])[0], ch.users());
        let mut curves: Vec<(String, Box<dyn Fn(f64) -> Result<PowerResult, RunError> + Sync + '_>)> = Vec::new();
        if self.cfg.mode.proper() {
            for (label, decoding) in [("par", Decoding::Parallel), ("succ", Decoding::Successive)] {
                let (ch, order) = (&ch, order.clone());
                curves.push((
                    format!("proper/{label}"),
                    Box::new(move |g| Ok(proper_min_power_sinr(ch, &Demands::uniform_sinr(ch.users(), g), decoding, &order)?)),
                ));
            }
        }
        if self.cfg.mode.improper() {
            for (label, decoding) in [("par", Decoding::Parallel), ("succ", Decoding::Successive)] {
                let opts = self.power_options(decoding);
                let ch = &ch;
                let o = opts.clone();
                curves.push((
                    format!("improper/sep/{label}"),
                    Box::new(move |g| Ok(separate_min_power(ch, &Demands::uniform_sinr(ch.users(), g), &o)?)),
                ));
                curves.push((
                    format!("improper/joint/{label}"),
                    Box::new(move |g| Ok(joint_min_power(ch, &Demands::uniform_sinr(ch.users(), g), &opts)?)),
                ));
            }
        }
        let jobs: Vec<(usize, f64)> =
            (0..curves.len()).flat_map(|c| grid.points().iter().map(move |g| (c, *g))).collect();
        let results: Vec<PowerResult> = jobs.par_iter().map(|(c, g)| (curves[*c].1)(*g)).collect::<Result<_, _>>()?;
        let rows = jobs.iter().zip(&results).map(|((c, g), r)| self.power_row(&curves[*c].0, *g, r, None)).collect();

        let value = |curve: &str, g: f64| {
            jobs.iter()
                .zip(&results)
                .find(|((c, x), _)| curves[*c].0 == curve && (x - g).abs() < 1e-9)
                .map(|(_, r)| r.is_feasible().then_some(r.total))
        };
        let mut checks = Vec::new();
        let mut push = |c: Option<Check>| checks.extend(c);
        if self.is("H1") {
            push(value("proper/par", 0.1).map(|v| Check::relative("proper par γ=0.1", 0.09837, 0.02, v)));
            push(value("proper/par", 0.3).map(|v| Check::infeasible("proper par γ=0.3", v)));
            push(value("improper/joint/succ", 0.5).map(|v| Check::relative("joint succ γ=0.5", 0.7398, 0.1, v)));
            push(value("improper/joint/succ", 1.0).map(|v| Check::relative("joint succ γ=1", 2.6165, 0.1, v)));
        }
        if self.is("H2") && order == [0, 1] {
            push(value("proper/succ", 0.5).map(|v| Check::relative("proper succ γ=0.5", 0.35154, 0.02, v)));
        }
        for label in ["par", "succ"] {
            let (sep, joint) = (format!("improper/sep/{label}"), format!("improper/joint/{label}"));
            let mut worst: f64 = 0.0;
            let mut seen = false;
            for &g in grid.points() {
                if let (Some(s), Some(j)) = (value(&sep, g), value(&joint, g)) {
                    seen = true;
                    let excess = match (s, j) {
                        (Some(s), Some(j)) => j - s,
                        (Some(_), None) => f64::INFINITY,
                        _ => 0.0,
                    };
                    worst = worst.max(excess);
                }
            }
            if seen {
                checks.push(Check::holds(&format!("joint ≤ separate ({label})"), worst <= 1e-9, Some(worst)));
            }
        }
        Ok((rows, checks))
    }

    fn power_rate(&self) -> Result<Rows, RunError> {
        let ch = self.power_channel(&self.channel()?)?;
        let grid = self.grid(Grid::range(0.0, 1.0, 0.1).expect("static grid"));
        let orders = self.orders(&[1, 2]);
        let n = self.cfg.extension;
        let opts = self.power_options(Decoding::Successive);
        let three = ch.users() == 3;
        let rates = |r: &PowerResult, n: usize, order: &[usize]| -> Result<Option<[f64; 3]>, RunError> {
            if !three || !r.is_feasible() {
                return Ok(None);
            }
            let x = vector_rates(&ch, &r.covariances, n, order)?;
            Ok(Some([x[0], x[1], x[2]]))
        };

        let mut rows = Vec::new();
        let mut checks = Vec::new();
        if self.cfg.mode.proper() {
            let jobs: Vec<(usize, f64)> = orders.iter().flat_map(|o| grid.points().iter().map(move |b| (*o, *b))).collect();
            let results: Vec<PowerResult> = jobs
                .par_iter()
                .map(|(o, b)| proper_min_power_rates(&ch, &Demands::uniform_rate(ch.users(), *b), &order_list(*o, ch.users())))
                .collect::<Result<_, _>>()?;
            for ((o, b), r) in jobs.iter().zip(&results) {
                let x = rates(r, 1, &order_list(*o, ch.users()))?;
                rows.push(self.power_row(&format!("proper/order{o}"), *b, r, x));
            }
            let value = |o: usize, b: f64| {
                jobs.iter().zip(&results).find(|((oo, x), _)| *oo == o && (x - b).abs() < 1e-9).map(|(_, r)| r.is_feasible().then_some(r.total))
            };
            if self.is("H1") {
                checks.extend(value(1, 0.2).map(|v| Check::relative("proper order1 β=0.2", 0.195371, 0.02, v)));
            }
            if self.is("H2") {
                checks.extend(value(2, 0.2).map(|v| Check::relative("proper order2 β=0.2", 0.0646, 0.02, v)));
            }
        }
        if self.cfg.mode.improper() {
            let chains: Vec<Vec<(PowerResult, Option<PowerResult>)>> = orders
                .par_iter()
                .map(|&o| self.rate_chain(&ch, grid.points(), n, &order_list(o, ch.users()), &opts))
                .collect::<Result<_, _>>()?;
            let mut monotone = true;
            let mut worst_ext: f64 = f64::NEG_INFINITY;
            for (o, chain) in orders.iter().zip(&chains) {
                let order = order_list(*o, ch.users());
                for (b, (one, _)) in grid.points().iter().zip(chain) {
                    rows.push(self.power_row(&format!("improper/N=1/order{o}"), *b, one, rates(one, 1, &order)?));
                }
                for (b, (one, many)) in grid.points().iter().zip(chain) {
                    let Some(many) = many else { continue };
                    rows.push(self.power_row(&format!("improper/N={n}/order{o}"), *b, many, rates(many, n, &order)?));
                    if one.is_feasible() {
                        worst_ext = worst_ext.max(if many.is_feasible() { many.total - one.total } else { f64::INFINITY });
                    }
                }
                for (one, many) in chain {
                    for r in std::iter::once(one).chain(many) {
                        monotone &= r.history.windows(2).all(|w| w[1] <= w[0] + 1e-7 * (1.0 + w[0]));
                    }
                }
            }
            let at = |o: usize, b: f64, ext: bool| {
                let i = grid.points().iter().position(|x| (x - b).abs() < 1e-9)?;
                let k = orders.iter().position(|x| *x == o)?;
                let (one, many) = &chains[k][i];
                let r = if ext { many.as_ref()? } else { one };
                Some(r.is_feasible().then_some(r.total))
            };
            if self.is("H1") {
                checks.extend(at(1, 0.5, false).map(|v| Check::relative("improper N=1 order1 β=0.5", 0.4176, 0.1, v)));
                if n == 3 {
                    checks.extend(at(2, 1.0, true).map(|v| Check::relative("improper N=3 order2 β=1", 1.3649, 0.1, v)));
                }
            }
            if n > 1 {
                checks.push(Check::holds(&format!("N={n} ≤ N=1"), worst_ext <= 1e-6, Some(worst_ext)));
            }
            checks.push(Check::holds("CCP power non-increasing", monotone, None));
        }
        Ok((rows, checks))
    }

    /// Improper minimum powers along a demand grid. Each demand is seeded
    /// with the previous demand's solution; the extended run is also seeded
    /// with the replicated single-symbol solution.
    fn rate_chain(
        &self,
        ch: &ChannelInstance,
        betas: &[f64],
        n: usize,
        order: &[usize],
        opts: &PowerOptions,
    ) -> Result<Vec<(PowerResult, Option<PowerResult>)>, RunError> {
        let mut out: Vec<(PowerResult, Option<PowerResult>)> = Vec::with_capacity(betas.len());
        for &b in betas {
            let d = Demands::uniform_rate(ch.users(), b);
            let prev = out.last();
            let seeds: Vec<Vec<TransmitCovariance>> =
                prev.filter(|p| p.0.is_feasible()).map(|p| p.0.covariances.clone()).into_iter().collect();
            let one = ccp_min_power_rates(ch, &d, 1, order, opts, &seeds)?;
            let many = if n > 1 {
                let mut seeds: Vec<Vec<TransmitCovariance>> = Vec::new();
                if one.is_feasible() {
                    seeds.push(one.covariances.iter().map(|q| q.replicated(n)).collect());
                }
                if let Some((_, Some(m))) = prev.filter(|p| p.1.as_ref().is_some_and(PowerResult::is_feasible)) {
                    seeds.push(m.covariances.clone());
                }
                Some(ccp_min_power_rates(ch, &d, n, order, opts, &seeds)?)
            } else {
                None
            };
            out.push((one, many));
        }
        Ok(out)
    }

    fn table1(&self) -> Result<Rows, RunError> {
        let ch = self.channel()?;
        let pch = self.power_channel(&ch)?;
        let n = self.cfg.extension;
        let region = self.region_options();
        let opts = self.power_options(Decoding::Successive);
        let profiles: Vec<([f64; 3], Option<(f64, f64)>)> = match self.cfg.alpha {
            Some(a) => vec![(a, TABLE_ROWS.iter().find(|r| r.0 == a).map(|r| (r.1, r.2)))],
            None => TABLE_ROWS.iter().map(|r| (r.0, Some((r.1, r.2)))).collect(),
        };
        let results = profiles
            .par_iter()
            .map(|(a, _)| successive_opt(&RateProfile::new(*a)?, &ch, &pch, n, &region, &opts))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        let mut checks = Vec::new();
        for (k, ((a, reference), r)) in profiles.iter().zip(&results).enumerate() {
            let demand = join(a);
            let mut boundary = self.row("boundary", demand.clone());
            (boundary.r1, boundary.r2, boundary.r3) = (Some(r.rates[0]), Some(r.rates[1]), Some(r.rates[2]));
            boundary.p_total = Some(r.boundary_power);
            boundary.status = "ok".into();
            rows.push(boundary);
            for (label, res, order) in [("1", &r.single, &r.single_order), (&n.to_string()[..], &r.extended, &r.extended_order)] {
                let ord = if order.first() == Some(&0) { 1 } else { 2 };
                let mut row = self.power_row(&format!("improper/N={label}/order{ord}"), 0.0, res, Some(r.rates));
                row.demand = demand.clone();
                rows.push(row);
            }
            if self.is("H1") {
                if let Some((s1, sn)) = reference {
                    let row = k + 1;
                    checks.push(Check::absolute(&format!("row {row} boundary power"), 3.0, 5e-3, Some(r.boundary_power)));
                    let pct = |s: Option<f64>| s.map(|x| 100.0 * x);
                    checks.push(Check::absolute(&format!("row {row} saving N=1"), *s1, 5.0, pct(r.saving_single)));
                    if n == 3 {
                        checks.push(Check::absolute(&format!("row {row} saving N=3"), *sn, 5.0, pct(r.saving_extended)));
                    }
                }
            }
        }
        Ok((rows, checks))
    }

    fn multiuser(&self) -> Result<Rows, RunError> {
        let grid = self.grid(Grid::range(0.02, 0.7, 0.04).expect("static grid"));
        let family = self.name == "H1+Hprime";
        let channels: Vec<(usize, ChannelInstance)> = if family {
            self.cfg
                .users
                .iter()
                .map(|&j| {
                    let ch = builtin(&format!("H1+Hprime({j})"))?.expect("builtin family");
                    Ok((j, ch.with_uniform_caps(LOOSE_CAP)?))
                })
                .collect::<Result<_, RunError>>()?
        } else {
            let ch = self.channel()?;
            vec![(ch.users(), self.power_channel(&ch)?)]
        };
        let opts = self.power_options(Decoding::Successive);
        let per_j: Vec<(Vec<PowerResult>, Vec<PowerResult>)> = channels
            .par_iter()
            .map(|(j, ch)| -> Result<_, RunError> {
                let order = natural_order(*j);
                let proper = grid
                    .points()
                    .par_iter()
                    .map(|b| proper_min_power_rates(ch, &Demands::uniform_rate(*j, *b), &order))
                    .collect::<Result<Vec<_>, _>>()?;
                let improper = if self.cfg.mode.improper() {
                    self.rate_chain(ch, grid.points(), 1, &order, &opts)?.into_iter().map(|(one, _)| one).collect()
                } else {
                    Vec::new()
                };
                Ok((proper, improper))
            })
            .collect::<Result<_, _>>()?;

        let mut rows = Vec::new();
        let mut checks = Vec::new();
        for ((j, _), (proper, improper)) in channels.iter().zip(&per_j) {
            if self.cfg.mode.proper() {
                for (b, r) in grid.points().iter().zip(proper) {
                    rows.push(self.power_row(&format!("proper/J={j}"), *b, r, None));
                }
            }
            for (b, r) in grid.points().iter().zip(improper) {
                rows.push(self.power_row(&format!("improper/J={j}"), *b, r, None));
            }
            if improper.is_empty() {
                continue;
            }
            let mut ratios = Vec::new();
            for ((b, p), i) in grid.points().iter().zip(proper).zip(improper) {
                let mut row = self.row(&format!("ratio/J={j}"), b.to_string());
                let ratio = match (p.is_feasible(), i.is_feasible()) {
                    (false, true) => Some(0.0),
                    (true, true) => Some(i.total / p.total),
                    _ => None,
                };
                if let Some(x) = ratio {
                    row.p_total = Some(x);
                    row.status = "ok".into();
                }
                rows.push(row);
                if p.is_feasible() && i.is_feasible() && *b > 0.0 {
                    ratios.push(i.total / p.total);
                }
            }
            let rise = ratios.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::holds(&format!("J={j} ratio non-increasing"), ratios.len() < 2 || rise <= 1e-6, Some(rise)));
        }
        if self.name.starts_with("H1+Hprime") {
            let find = |j: usize, b: f64, improper: bool| {
                let k = channels.iter().position(|c| c.0 == j)?;
                let i = grid.points().iter().position(|x| (x - b).abs() < 1e-9)?;
                let list = if improper { &per_j[k].1 } else { &per_j[k].0 };
                let r = list.get(i)?;
                Some(r.is_feasible().then_some(r.total / j as f64))
            };
            checks.extend(find(3, 0.7, true).map(|v| Check::relative("J=3 improper β=0.7 per user", 1.2663, 0.1, v)));
            checks.extend(find(7, 0.38, false).map(|v| Check::infeasible("J=7 proper β=0.38", v)));
        }
        Ok((rows, checks))
    }
}

fn signaling_name(m: Signaling) -> &'static str {
    match m {
        Signaling::Proper => "proper",
        Signaling::Improper => "improper",
    }
}

/// Order 1 decodes the MAC users in index order, order 2 in reverse.
pub fn order_list(order: usize, users: usize) -> Vec<usize> {
    let mut o = natural_order(users);
    if order == 2 {
        o.reverse();
    }
    o
}
