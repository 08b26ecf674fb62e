//! Achievable TIN rate region of the three-user PIMAC.
//!
//! Each point of the region is found by bisecting over a semidefinite
//! relaxation of the rate rows in the variances `c` and pseudo-variances `c̃`,
//! then recovering a rank-1 (physically meaningful) point by Gaussian
//! randomization followed by a local trust-region refinement.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::convex_core::{
    bisect, find_feasible_sdp, gaussian_randomize, solve_lp, BlockKind, Candidate, Coeff, ConvexError,
    LinearProgram, SemidefiniteProgram, Sense, SolverConfig,
};
use crate::model::{rate_bounds_improper, AugmentedCovariance, ChannelInstance, ModelError, RateBounds, RateProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error("requested rates are infeasible even for the relaxation: {0}")]
    RateInfeasible(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Which input distributions are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signaling {
    /// Circularly symmetric inputs, `c̃ = 0`.
    Proper,
    Improper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionOptions {
    pub solver: SolverConfig,
    /// Run the local refinement after randomization.
    pub refine: bool,
    /// Number of ranked candidates the refinement starts from.
    pub refine_starts: usize,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self { solver: SolverConfig::default(), refine: true, refine_starts: 8 }
    }
}

/// Receiver, numerator set and denominator set of the four rate rows.
const ROWS: [(usize, &[usize], &[usize]); 4] =
    [(0, &[0, 2], &[2]), (0, &[1, 2], &[2]), (1, &[0, 1, 2], &[0, 1]), (0, &[0, 1, 2], &[2])];

/// Lifted data of the relaxation. Row `q` reads
/// `Tr(W_q C) − Tr(Ã_q C̃) ≥ e^{2r_q} (Tr(Z_q C) − Tr(B̃_q C̃))`
/// with the homogenized `C = [1 cᵀ; c ccᵀ]` and `C̃ = c̃ c̃ᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrData {
    pub sigma2: f64,
    pub caps: [f64; 3],
    pub w: Vec<DMatrix<f64>>,
    pub z: Vec<DMatrix<f64>>,
    pub a_tilde: Vec<DMatrix<Complex64>>,
    pub b_tilde: Vec<DMatrix<Complex64>>,
}

fn lifted_row(ch: &ChannelInstance, rx: usize, set: &[usize]) -> (DMatrix<f64>, DMatrix<Complex64>) {
    let mut v = vec![ch.noise_variance(), 0.0, 0.0, 0.0];
    let mut t = vec![Complex64::new(0.0, 0.0); 3];
    for &j in set {
        let h = ch.gain(rx, j);
        v[j + 1] = h.norm_sqr();
        t[j] = h * h;
    }
    let w = DMatrix::from_fn(4, 4, |r, c| v[r] * v[c]);
    let a = DMatrix::from_fn(3, 3, |r, c| t[r].conj() * t[c]);
    (w, a)
}

pub fn build_sdr_data(ch: &ChannelInstance) -> Result<SdrData, RegionError> {
    if ch.users() != 3 {
        return Err(RegionError::InvalidArgument(format!("rate region needs J = 3, got {}", ch.users())));
    }
    if !(ch.noise_variance() > 0.0) {
        return Err(ModelError::Degenerate("noise variance must be positive".into()).into());
    }
    let mut data = SdrData {
        sigma2: ch.noise_variance(),
        caps: [ch.power_caps()[0], ch.power_caps()[1], ch.power_caps()[2]],
        w: Vec::new(),
        z: Vec::new(),
        a_tilde: Vec::new(),
        b_tilde: Vec::new(),
    };
    for (rx, num, den) in ROWS {
        let (w, a) = lifted_row(ch, rx, num);
        let (z, b) = lifted_row(ch, rx, den);
        data.w.push(w);
        data.z.push(z);
        data.a_tilde.push(a);
        data.b_tilde.push(b);
    }
    Ok(data)
}

/// Relaxed point: `c` is the 4×4 homogenized variance block, `ct` the 3×3
/// pseudo-variance block (zero for proper signaling).
#[derive(Debug, Clone, PartialEq)]
pub struct SdrWitness {
    pub c: DMatrix<f64>,
    pub ct: DMatrix<Complex64>,
    pub slack: f64,
}

fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] += 0.5;
    m[(j, i)] += 0.5;
    m
}

/// Adds `Tr(A C) + Tr(B C̃) {sense} rhs` scaled to unit largest coefficient.
fn add_row(
    sdp: &mut SemidefiniteProgram,
    a: DMatrix<f64>,
    b: Option<DMatrix<Complex64>>,
    sense: Sense,
    rhs: f64,
    proper: bool,
) {
    let mut scale = a.amax().max(rhs.abs());
    if let Some(b) = &b {
        scale = scale.max(b.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let s = if scale > 0.0 { 1.0 / scale } else { 1.0 };
    let mut terms = vec![(0, Coeff::Real(a * s))];
    if let (Some(b), false) = (b, proper) {
        terms.push((1, Coeff::Complex(b * Complex64::new(s, 0.0))));
    }
    sdp.add_constraint(terms, sense, rhs * s);
}

fn sdr_program(data: &SdrData, thresholds: &[Option<f64>; 4], mode: Signaling) -> SemidefiniteProgram {
    let proper = mode == Signaling::Proper;
    let blocks = if proper {
        vec![BlockKind::Symmetric(4)]
    } else {
        vec![BlockKind::Symmetric(4), BlockKind::Hermitian(3)]
    };
    let mut sdp = SemidefiniteProgram::new(blocks);
    let s4 = data.sigma2 * data.sigma2;
    sdp.add_constraint(vec![(0, Coeff::Real(unit(4, 0, 0)))], Sense::Eq, 1.0);
    for q in 0..4 {
        let neg = |m: &DMatrix<Complex64>| -m.clone();
        add_row(&mut sdp, data.w[q].clone(), Some(neg(&data.a_tilde[q])), Sense::Ge, s4, proper);
        add_row(&mut sdp, data.z[q].clone(), Some(neg(&data.b_tilde[q])), Sense::Ge, s4, proper);
        if let Some(r) = thresholds[q] {
            let g = (2.0 * r).exp();
            let a = &data.w[q] - &data.z[q] * g;
            let b = &data.b_tilde[q] * Complex64::new(g, 0.0) - &data.a_tilde[q];
            add_row(&mut sdp, a, Some(b), Sense::Ge, 0.0, proper);
        }
    }
    for j in 0..3 {
        let p = data.caps[j];
        add_row(&mut sdp, unit(4, j + 1, j + 1), None, Sense::Le, p * p, proper);
        add_row(&mut sdp, unit(4, 0, j + 1), None, Sense::Ge, 0.0, proper);
        add_row(&mut sdp, unit(4, 0, j + 1), None, Sense::Le, p, proper);
        if !proper {
            let mut e = DMatrix::zeros(3, 3);
            e[(j, j)] = Complex64::new(1.0, 0.0);
            add_row(&mut sdp, -unit(4, j + 1, j + 1), Some(e), Sense::Le, 0.0, proper);
        }
    }
    sdp
}

/// Feasibility of the relaxation with per-row rate thresholds in nats
/// (`None` drops the row).
pub fn sdr_feasible_thresholds(
    thresholds: &[Option<f64>; 4],
    data: &SdrData,
    mode: Signaling,
    cfg: &SolverConfig,
) -> Result<Option<SdrWitness>, RegionError> {
    Ok(relaxation(thresholds, data, mode, cfg)?)
}

fn relaxation(
    thresholds: &[Option<f64>; 4],
    data: &SdrData,
    mode: Signaling,
    cfg: &SolverConfig,
) -> Result<Option<SdrWitness>, ConvexError> {
    let sdp = sdr_program(data, thresholds, mode);
    let Some(sol) = find_feasible_sdp(&sdp, cfg)? else { return Ok(None) };
    let c = sol.blocks[0].real();
    let ct = match mode {
        Signaling::Proper => DMatrix::zeros(3, 3),
        Signaling::Improper => sol.blocks[1].complex(),
    };
    Ok(Some(SdrWitness { c, ct, slack: sol.slack }))
}

/// Feasibility of the relaxation for the rates `α_q R` (nats); rows with a
/// zero weight are dropped.
pub fn sdr_feasible(
    r: f64,
    profile: &RateProfile,
    data: &SdrData,
    mode: Signaling,
    cfg: &SolverConfig,
) -> Result<Option<SdrWitness>, RegionError> {
    Ok(relaxation(&profile_thresholds(profile, r), data, mode, cfg)?)
}

fn profile_thresholds(profile: &RateProfile, r: f64) -> [Option<f64>; 4] {
    profile.weights().map(|w| (w > 0.0).then_some(w * r))
}

/// A recovered point of the region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    /// Optimized objective in bits per channel use: the sum rate for a
    /// profile, the point-to-point rate for a fixed MAC rate.
    pub value: f64,
    /// Rates of the three users.
    pub rates: [f64; 3],
    /// Upper bound on `value` certified by the relaxation.
    pub relaxation_bound: f64,
    pub bounds: RateBounds,
    pub signals: Vec<AugmentedCovariance>,
    pub bisection_steps: usize,
    /// Randomized candidates that passed the evaluation.
    pub feasible_candidates: usize,
}

/// Row floors and weights: rows with positive weight bound the objective
/// `t` through `L_q ≥ floor_q + w_q t`, rows with zero weight are fixed
/// targets `L_q ≥ floor_q`.
#[derive(Debug, Clone, Copy)]
struct Goal {
    floor: [f64; 4],
    weight: [f64; 4],
    active: [bool; 4],
}

const TARGET_TOL: f64 = 1e-9;
const PENALTY: f64 = 100.0;

impl Goal {
    fn objective(&self, l: &[f64; 4]) -> f64 {
        (0..4)
            .filter(|&q| self.active[q] && self.weight[q] > 0.0)
            .map(|q| (l[q] - self.floor[q]) / self.weight[q])
            .fold(f64::INFINITY, f64::min)
    }

    fn violation(&self, l: &[f64; 4]) -> f64 {
        (0..4)
            .filter(|&q| self.active[q] && self.weight[q] == 0.0)
            .map(|q| (self.floor[q] - l[q]).max(0.0))
            .sum()
    }

    fn merit(&self, l: &[f64; 4]) -> f64 {
        self.objective(l) - PENALTY * self.violation(l)
    }

    fn feasible(&self, l: &[f64; 4]) -> bool {
        (0..4).all(|q| !self.active[q] || self.weight[q] > 0.0 || l[q] >= self.floor[q] - TARGET_TOL)
    }
}

fn signals_of(c: &Candidate) -> Option<Vec<AugmentedCovariance>> {
    (0..3).map(|j| AugmentedCovariance::new(c.c[j], c.ct[j]).ok()).collect()
}

fn bounds_of(ch: &ChannelInstance, c: &Candidate) -> Option<[f64; 4]> {
    let sig = signals_of(c)?;
    rate_bounds_improper(ch, &sig).ok().map(|b| b.as_array())
}

/// Polar parametrization `c̃_j = c_j ρ_j e^{iφ_j}` used by the refinement.
struct Param<'a> {
    ch: &'a ChannelInstance,
    caps: [f64; 3],
    improper: bool,
}

impl Param<'_> {
    fn dim(&self) -> usize {
        if self.improper { 9 } else { 3 }
    }

    fn encode(&self, c: &Candidate) -> Vec<f64> {
        let mut x = c.c.clone();
        if self.improper {
            for j in 0..3 {
                x.push(if c.c[j] > 0.0 { (c.ct[j].norm() / c.c[j]).min(1.0) } else { 0.0 });
            }
            for j in 0..3 {
                x.push(c.ct[j].arg());
            }
        }
        x
    }

    fn decode(&self, x: &[f64]) -> Candidate {
        let c: Vec<f64> = (0..3).map(|j| x[j].clamp(0.0, self.caps[j])).collect();
        let ct = (0..3)
            .map(|j| {
                if self.improper {
                    Complex64::from_polar(c[j] * x[3 + j].clamp(0.0, 1.0), x[6 + j])
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Candidate { c, ct }
    }

    fn bounds(&self, i: usize) -> (f64, f64) {
        match i {
            0..=2 => (0.0, self.caps[i]),
            3..=5 => (0.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn scale(&self, i: usize) -> f64 {
        match i {
            0..=2 => self.caps[i].max(1e-12),
            3..=5 => 1.0,
            _ => std::f64::consts::PI,
        }
    }

    fn eval(&self, x: &[f64]) -> Option<[f64; 4]> {
        bounds_of(self.ch, &self.decode(x))
    }

    fn jacobian(&self, x: &[f64]) -> Option<Vec<[f64; 4]>> {
        let mut out = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let (lo, hi) = self.bounds(i);
            let h = 1e-6 * self.scale(i);
            let (xm, xp) = ((x[i] - h).max(lo), (x[i] + h).min(hi));
            if xp <= xm {
                out.push([0.0; 4]);
                continue;
            }
            let mut y = x.to_vec();
            y[i] = xp;
            let fp = self.eval(&y)?;
            y[i] = xm;
            let fm = self.eval(&y)?;
            out.push(std::array::from_fn(|q| (fp[q] - fm[q]) / (xp - xm)));
        }
        Some(out)
    }
}

/// Sequential linear programming with a box trust region on the merit of
/// `goal`. Returns the improved candidate and its merit.
fn refine(param: &Param<'_>, goal: &Goal, start: &Candidate) -> Option<(f64, Candidate)> {
    let n = param.dim();
    let mut x = param.encode(start);
    let mut l = param.eval(&x)?;
    let mut merit = goal.merit(&l);
    let mut radius: f64 = 0.1;
    let rows: Vec<usize> = (0..4).filter(|&q| goal.active[q]).collect();
    let elastic: Vec<usize> = rows.iter().cloned().filter(|&q| goal.weight[q] == 0.0).collect();
    let nv = n + 1 + elastic.len();
    for _ in 0..400 {
        if radius < 1e-9 {
            break;
        }
        let Some(jac) = param.jacobian(&x) else { break };
        let mut cost = vec![0.0; nv];
        cost[n] = -1.0;
        for k in 0..elastic.len() {
            cost[n + 1 + k] = PENALTY;
        }
        let mut lower = vec![0.0; nv];
        let mut lp_rows = Vec::new();
        for i in 0..n {
            let (lo, hi) = param.bounds(i);
            let step = radius * param.scale(i);
            lower[i] = (lo - x[i]).max(-step);
            let mut a = vec![0.0; nv];
            a[i] = 1.0;
            lp_rows.push((a, (hi - x[i]).min(step)));
        }
        lower[n] = -1e3;
        for &q in &rows {
            let mut a = vec![0.0; nv];
            for i in 0..n {
                a[i] = -jac[i][q];
            }
            if goal.weight[q] > 0.0 {
                a[n] = goal.weight[q];
            } else {
                let k = elastic.iter().position(|&e| e == q).unwrap();
                a[n + 1 + k] = -1.0;
            }
            lp_rows.push((a, l[q] - goal.floor[q]));
        }
        let mut lp = LinearProgram::new(cost).with_lower(lower);
        lp.rows = lp_rows;
        let Ok(sol) = solve_lp(&lp) else { break };
        let mut y = x.clone();
        for i in 0..n {
            y[i] += sol.x[i];
        }
        let improved = param.eval(&y).map(|ly| (goal.merit(&ly), ly));
        match improved {
            Some((m, ly)) if m > merit + 1e-12 => {
                x = y;
                l = ly;
                merit = m;
                radius = (radius * 2.0).min(1.0);
            }
            _ => radius *= 0.5,
        }
    }
    goal.feasible(&l).then(|| (goal.objective(&l), param.decode(&x)))
}

fn finish(
    ch: &ChannelInstance,
    goal: &Goal,
    best: Candidate,
    value: f64,
    rates: [f64; 3],
    relaxation_bound: f64,
    bisection_steps: usize,
    feasible_candidates: usize,
) -> Result<RegionPoint, RegionError> {
    let signals = signals_of(&best).ok_or_else(|| ModelError::Degenerate("recovered point is not valid".into()))?;
    let bounds = rate_bounds_improper(ch, &signals)?;
    debug_assert!(goal.feasible(&bounds.as_array()));
    Ok(RegionPoint { value, rates, relaxation_bound, bounds, signals, bisection_steps, feasible_candidates })
}

/// Runs randomization and refinement on a relaxed witness. `repair` maps a
/// raw candidate to one that satisfies the fixed targets, if possible.
fn recover(
    ch: &ChannelInstance,
    goal: &Goal,
    witness: &SdrWitness,
    mode: Signaling,
    opts: &RegionOptions,
    extra: Option<Candidate>,
    repair: &dyn Fn(Candidate) -> Option<Candidate>,
) -> Result<(f64, Candidate, usize), RegionError> {
    let caps = [ch.power_caps()[0], ch.power_caps()[1], ch.power_caps()[2]];
    let score = |c: Candidate| {
        let c = repair(c)?;
        let l = bounds_of(ch, &c)?;
        goal.feasible(&l).then(|| (goal.objective(&l), c))
    };
    let randomized = gaussian_randomize(&witness.c, &witness.ct, &caps, score, opts.solver.k_rand, opts.solver.seed);
    let mut starts: Vec<(f64, Candidate)> = match randomized {
        Ok(r) => r.ranked.clone(),
        Err(ConvexError::RandomizationFailed { .. }) if extra.is_some() => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    let feasible = starts.len();
    if let Some(c) = extra {
        if let Some(l) = bounds_of(ch, &c) {
            if goal.feasible(&l) {
                starts.push((goal.objective(&l), c));
            }
        }
    }
    if starts.is_empty() {
        return Err(ConvexError::RandomizationFailed { tried: opts.solver.k_rand + 1 }.into());
    }
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = starts[0].clone();
    if opts.refine {
        let param = Param { ch, caps, improper: mode == Signaling::Improper };
        let refined: Vec<Option<(f64, Candidate)>> = starts
            .iter()
            .take(opts.refine_starts.max(1))
            .map(|(_, c)| refine(&param, goal, c))
            .collect();
        for (v, c) in refined.into_iter().flatten() {
            if v > best.0 {
                best = (v, c);
            }
        }
    }
    Ok((best.0, best.1, feasible))
}

fn three_user(ch: &ChannelInstance) -> Result<(), RegionError> {
    if ch.users() != 3 {
        return Err(RegionError::InvalidArgument(format!("rate region needs J = 3, got {}", ch.users())));
    }
    Ok(())
}

/// Largest `R` with `(α₁R, α₂R, α₃R)` achievable, in bits per channel use.
pub fn max_sum_rate(
    profile: &RateProfile,
    ch: &ChannelInstance,
    mode: Signaling,
    opts: &RegionOptions,
) -> Result<RegionPoint, RegionError> {
    three_user(ch)?;
    opts.solver.validate()?;
    let data = build_sdr_data(ch)?;
    let s2 = ch.noise_variance();
    let hi: f64 = (0..3)
        .map(|j| (1.0 + ch.gain(ch.receiver(j), j).norm_sqr() * ch.power_caps()[j] / s2).ln())
        .sum();
    let search = bisect(|r| relaxation(&profile_thresholds(profile, r), &data, mode, &opts.solver), 0.0, hi, opts.solver.tol_bis)?;
    let weights = profile.weights();
    let goal = Goal { floor: [0.0; 4], weight: weights, active: weights.map(|w| w > 0.0) };
    let extra = match mode {
        Signaling::Improper => Some(proper_start(max_sum_rate(profile, ch, Signaling::Proper, opts))?),
        Signaling::Proper => None,
    };
    let (value, best, feasible) = recover(ch, &goal, &search.witness, mode, opts, extra, &|c| Some(c))?;
    let rates = profile.alpha().map(|a| a * value);
    let bound = search.infeasible_at.unwrap_or(search.value) / std::f64::consts::LN_2;
    finish(ch, &goal, best, value, rates, bound, search.evaluations, feasible)
}

fn proper_start(p: Result<RegionPoint, RegionError>) -> Result<Candidate, RegionError> {
    let p = p?;
    Ok(Candidate {
        c: p.signals.iter().map(|s| s.variance()).collect(),
        ct: p.signals.iter().map(|s| s.pseudo_variance()).collect(),
    })
}

/// Largest point-to-point rate when both MAC users demand `r_mac` bits.
pub fn max_p2p_given_mac(
    r_mac: f64,
    ch: &ChannelInstance,
    mode: Signaling,
    opts: &RegionOptions,
) -> Result<RegionPoint, RegionError> {
    three_user(ch)?;
    opts.solver.validate()?;
    if !(r_mac.is_finite() && r_mac >= 0.0) {
        return Err(RegionError::InvalidArgument(format!("MAC rate {r_mac} must be ≥ 0")));
    }
    let data = build_sdr_data(ch)?;
    let rn = r_mac * std::f64::consts::LN_2;
    let hi = (1.0 + ch.gain(1, 2).norm_sqr() * ch.power_caps()[2] / ch.noise_variance()).ln();
    let oracle = |r3: f64| {
        let th = [Some(rn), Some(rn), Some(r3), Some(2.0 * rn)];
        relaxation(&th, &data, mode, &opts.solver)
    };
    let search = match bisect(oracle, 0.0, hi, opts.solver.tol_bis) {
        Err(ConvexError::Infeasible) => {
            return Err(RegionError::RateInfeasible(format!("both MAC users at {r_mac} bits")))
        }
        other => other?,
    };
    let goal = Goal { floor: [r_mac, r_mac, 0.0, 2.0 * r_mac], weight: [0.0, 0.0, 1.0, 0.0], active: [true; 4] };
    let extra = match mode {
        Signaling::Improper => match max_p2p_given_mac(r_mac, ch, Signaling::Proper, opts) {
            Ok(p) => Some(proper_start(Ok(p))?),
            Err(RegionError::Convex(ConvexError::RandomizationFailed { .. })) => None,
            Err(e) => return Err(e),
        },
        Signaling::Proper => None,
    };
    let caps = [ch.power_caps()[0], ch.power_caps()[1], ch.power_caps()[2]];
    let repair = |c: Candidate| repair_mac(ch, &goal, c, &caps);
    let (value, best, feasible) = recover(ch, &goal, &search.witness, mode, opts, extra, &repair)?;
    let bound = search.infeasible_at.unwrap_or(search.value) / std::f64::consts::LN_2;
    finish(ch, &goal, best, value, [r_mac, r_mac, value], bound, search.evaluations, feasible)
}

/// Shrinks the point-to-point signal by the largest `λ ∈ [0, 1]` that meets
/// the MAC targets, first raising the MAC users to their caps if even `λ = 0`
/// is not enough.
fn repair_mac(ch: &ChannelInstance, goal: &Goal, c: Candidate, caps: &[f64; 3]) -> Option<Candidate> {
    let scaled = |c: &Candidate, lam: f64| {
        let mut d = c.clone();
        d.c[2] *= lam;
        d.ct[2] *= lam;
        d
    };
    let ok = |c: &Candidate| bounds_of(ch, c).is_some_and(|l| goal.feasible(&l));
    if ok(&c) {
        return Some(c);
    }
    let mut base = c;
    if !ok(&scaled(&base, 0.0)) {
        for j in 0..2 {
            let f = if base.c[j] > 0.0 { caps[j] / base.c[j] } else { 0.0 };
            base.c[j] = caps[j];
            base.ct[j] *= f;
        }
        if !ok(&scaled(&base, 0.0)) {
            return None;
        }
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if ok(&scaled(&base, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(scaled(&base, lo))
}

/// Sum-rate points along a grid of profiles, solved in parallel. Point `i`
/// uses the seed `seed ⊕ i`, so the output does not depend on scheduling.
pub fn pareto_sweep(
    ch: &ChannelInstance,
    grid: &[RateProfile],
    mode: Signaling,
    opts: &RegionOptions,
) -> Vec<Result<RegionPoint, RegionError>> {
    grid.par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut o = opts.clone();
            o.solver.seed = opts.solver.seed_for(i as u64);
            max_sum_rate(p, ch, mode, &o)
        })
        .collect()
}
