use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{relative_slack, Demands, PowerError, PowerOptions, PowerResult, Status};
use crate::convex_core::{
    dominant_rank1, solve_lp, solve_sdp, BlockKind, Coeff, ConvexError, LinearProgram, SemidefiniteProgram, Sense,
};
use crate::model::{
    decoding_sets, sinr, stream_covariances, stream_interferers, ChannelInstance, Decoding, ModelError, StreamLayout,
    TransmitCovariance,
};

const STREAMS: usize = 2;

/// Unit MMSE filter `F⁻¹Gv / ‖F⁻¹Gv‖`.
pub fn mmse_receiver(f: &DMatrix<f64>, g: &DMatrix<f64>, v: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
    let chol = Cholesky::new(f.clone())
        .ok_or_else(|| ModelError::Degenerate("interference-plus-noise covariance is singular".into()))?;
    let u = chol.solve(&(g * v));
    let n = u.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(ModelError::Degenerate("MMSE filter vanishes".into()));
    }
    Ok(u / n)
}

/// Best receive direction for a general signal covariance `T`: the top
/// generalized eigenvector of `(T, F)`.
fn max_sinr_receiver(t: &DMatrix<f64>, f: &DMatrix<f64>) -> Result<DVector<f64>, ModelError> {
    let chol = Cholesky::new(f.clone())
        .ok_or_else(|| ModelError::Degenerate("interference-plus-noise covariance is singular".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| ModelError::Degenerate("singular Cholesky factor".into()))?;
    let m = &linv * t * linv.transpose();
    let (_, y) = dominant_rank1(&m);
    let u = linv.transpose() * y;
    Ok(&u / u.norm())
}

fn lifted_gains(ch: &ChannelInstance) -> Vec<Vec<DMatrix<f64>>> {
    (0..2).map(|i| (0..ch.users()).map(|j| ch.lifted(i, j).to_dmatrix()).collect()).collect()
}

fn stream_counts(layout: &StreamLayout) -> Vec<usize> {
    (0..layout.users()).map(|j| layout.streams(j)).collect()
}

fn require_two_streams(ch: &ChannelInstance, layout: &StreamLayout) -> Result<(), ModelError> {
    if layout.users() != ch.users() {
        return Err(ModelError::InvalidArgument("layout and channel user counts differ".into()));
    }
    for j in 0..layout.users() {
        if layout.streams(j) != STREAMS || layout.v(j, 0).len() != 2 {
            return Err(ModelError::InvalidArgument("stream solvers need two streams per user and N = 1".into()));
        }
    }
    Ok(())
}

/// Orthonormal transmit pair per user at a seeded random rotation, with the
/// given stream powers and matched receivers.
pub fn initial_layout(
    ch: &ChannelInstance,
    powers: Vec<Vec<f64>>,
    decoding: Decoding,
    seed: u64,
) -> Result<StreamLayout, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = lifted_gains(ch);
    let mut v = Vec::new();
    let mut u = Vec::new();
    for j in 0..ch.users() {
        let a: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let pair = vec![DVector::from_vec(vec![a.cos(), a.sin()]), DVector::from_vec(vec![-a.sin(), a.cos()])];
        let gj = &g[ch.receiver(j)][j];
        u.push(
            pair.iter()
                .map(|x| {
                    let y = gj * x;
                    let n = y.norm();
                    if n > 0.0 { y / n } else { x.clone() }
                })
                .collect(),
        );
        v.push(pair);
    }
    StreamLayout::new(v, powers, u, decoding)
}

/// Transmit beamformers from MMSE filters in the reciprocal network, where
/// the receive filters transmit back over the transposed channels with the
/// same powers.
fn reciprocal_update(ch: &ChannelInstance, layout: &StreamLayout) -> Result<Vec<Vec<DVector<f64>>>, ModelError> {
    let g = lifted_gains(ch);
    let counts = stream_counts(layout);
    let noise = ch.lifted_noise();
    let mut hits: Vec<Vec<Vec<(usize, usize)>>> = counts.iter().map(|&c| vec![Vec::new(); c]).collect();
    for l in 0..counts.len() {
        for m in 0..counts[l] {
            for (j, k) in stream_interferers(&counts, l, m, layout.decoding()) {
                hits[j][k].push((l, m));
            }
        }
    }
    let mut out = Vec::with_capacity(counts.len());
    for j in 0..counts.len() {
        let mut per = Vec::with_capacity(counts[j]);
        for k in 0..counts[j] {
            let mut f = DMatrix::identity(2, 2) * noise;
            for &(l, m) in &hits[j][k] {
                let x = g[ch.receiver(l)][j].transpose() * layout.u(l, m);
                f += layout.power(l, m) * &x * x.transpose();
            }
            let gt = g[ch.receiver(j)][j].transpose();
            per.push(mmse_receiver(&f, &gt, layout.u(j, k))?);
        }
        out.push(per);
    }
    Ok(out)
}

/// MMSE receivers of the forward network for the current layout.
fn forward_update(ch: &ChannelInstance, layout: &StreamLayout) -> Result<Vec<Vec<DVector<f64>>>, ModelError> {
    let g = lifted_gains(ch);
    let cov = stream_covariances(ch, layout, 1)?;
    let mut out = Vec::with_capacity(layout.users());
    for j in 0..layout.users() {
        let gj = &g[ch.receiver(j)][j];
        let mut per = Vec::with_capacity(layout.streams(j));
        for k in 0..layout.streams(j) {
            per.push(mmse_receiver(&cov[j][k].f, gj, layout.v(j, k))?);
        }
        out.push(per);
    }
    Ok(out)
}

fn aligned(new: Vec<Vec<DVector<f64>>>, old: impl Fn(usize, usize) -> DVector<f64>) -> (Vec<Vec<DVector<f64>>>, f64) {
    let mut change: f64 = 0.0;
    let out = new
        .into_iter()
        .enumerate()
        .map(|(j, per)| {
            per.into_iter()
                .enumerate()
                .map(|(k, x)| {
                    let o = old(j, k);
                    let x = if x.dot(&o) < 0.0 { -x } else { x };
                    change = change.max((&x - &o).norm());
                    x
                })
                .collect()
        })
        .collect();
    (out, change)
}

/// Alternating forward/reciprocal MMSE beamformer design at fixed powers.
/// Returns the last iterate and the number of sweeps performed.
pub fn algorithm1_beamformers(
    ch: &ChannelInstance,
    init: &StreamLayout,
    max_iter: usize,
    tol: f64,
) -> Result<(StreamLayout, usize), PowerError> {
    require_two_streams(ch, init)?;
    let mut layout = init.clone();
    for it in 0..max_iter {
        let u = forward_update(ch, &layout)?;
        let (u, du) = aligned(u, |j, k| layout.u(j, k).clone());
        let with_u = StreamLayout::new(
            (0..layout.users()).map(|j| (0..STREAMS).map(|k| layout.v(j, k).clone()).collect()).collect(),
            layout.powers().to_vec(),
            u,
            layout.decoding(),
        )?;
        let v = reciprocal_update(ch, &with_u)?;
        let (v, dv) = aligned(v, |j, k| with_u.v(j, k).clone());
        let u = (0..with_u.users()).map(|j| (0..STREAMS).map(|k| with_u.u(j, k).clone()).collect()).collect();
        layout = StreamLayout::new(v, with_u.powers().to_vec(), u, layout.decoding())?;
        if du.max(dv) < tol {
            return Ok((layout, it + 1));
        }
    }
    Ok((layout, max_iter))
}

fn stream_sinrs(ch: &ChannelInstance, layout: &StreamLayout) -> Result<Vec<Vec<f64>>, ModelError> {
    let cov = stream_covariances(ch, layout, 1)?;
    let mut out = Vec::new();
    for j in 0..layout.users() {
        let mut per = Vec::new();
        for k in 0..layout.streams(j) {
            per.push(sinr(&cov[j][k].t, &cov[j][k].f, layout.u(j, k))?);
        }
        out.push(per);
    }
    Ok(out)
}

fn sinr_slack(ch: &ChannelInstance, layout: &StreamLayout, gamma: &[Vec<f64>]) -> Result<f64, ModelError> {
    let s = stream_sinrs(ch, layout)?;
    let mut slack = f64::INFINITY;
    for j in 0..gamma.len() {
        for k in 0..gamma[j].len() {
            if gamma[j][k] > 0.0 {
                slack = slack.min(relative_slack(s[j][k], gamma[j][k]));
            }
        }
    }
    Ok(slack)
}

fn layout_result(
    ch: &ChannelInstance,
    layout: StreamLayout,
    gamma: &[Vec<f64>],
    status: Status,
    iterations: usize,
) -> Result<PowerResult, PowerError> {
    let covs = (0..layout.users())
        .map(|j| TransmitCovariance::new(crate::linalg::symmetrize(&layout.covariance(j)), j))
        .collect::<Result<Vec<_>, _>>()?;
    let mut r = PowerResult::from_covariances(covs, status, iterations);
    r.per_user = layout.powers().iter().map(|p| p.iter().sum()).collect();
    r.total = r.per_user.iter().sum();
    r.audit_slack = sinr_slack(ch, &layout, gamma)?;
    r.layout = Some(layout);
    Ok(r)
}

/// Minimum-power stream powers for fixed beamformers. The SINR constraints
/// are linear in the powers once cross-multiplied.
pub fn power_lp(ch: &ChannelInstance, layout: &StreamLayout, demands: &Demands) -> Result<PowerResult, PowerError> {
    require_two_streams(ch, layout)?;
    let gamma = demands.per_stream(ch.users())?;
    let g = lifted_gains(ch);
    let counts = stream_counts(layout);
    let idx = |j: usize, k: usize| j * STREAMS + k;
    let nv = ch.users() * STREAMS;
    let mut lp = LinearProgram::new(vec![1.0; nv]);
    let noise = ch.lifted_noise();
    for j in 0..ch.users() {
        let i = ch.receiver(j);
        for k in 0..STREAMS {
            let u = layout.u(j, k);
            let gain = |l: usize, m: usize| u.dot(&(&g[i][l] * layout.v(l, m))).powi(2);
            let mut a = vec![0.0; nv];
            a[idx(j, k)] -= gain(j, k);
            for (l, m) in stream_interferers(&counts, j, k, layout.decoding()) {
                a[idx(l, m)] += gamma[j][k] * gain(l, m);
            }
            lp.le(a, -gamma[j][k] * noise);
        }
        let mut cap = vec![0.0; nv];
        for k in 0..STREAMS {
            cap[idx(j, k)] = 1.0;
        }
        lp.le(cap, ch.power_caps()[j]);
    }
    match solve_lp(&lp) {
        Ok(sol) => {
            let p: Vec<Vec<f64>> =
                (0..ch.users()).map(|j| (0..STREAMS).map(|k| sol.x[idx(j, k)].max(0.0)).collect()).collect();
            layout_result(ch, layout.with_powers(p)?, &gamma, Status::Converged, 1)
        }
        Err(ConvexError::Infeasible) => Ok(PowerResult::infeasible(ch.users(), 1)),
        Err(e) => Err(e.into()),
    }
}

/// Beamformers from the alternating MMSE design at `opts.design_power`,
/// then the power LP on those beamformers.
pub fn separate_min_power(
    ch: &ChannelInstance,
    demands: &Demands,
    opts: &PowerOptions,
) -> Result<PowerResult, PowerError> {
    opts.validate()?;
    demands.per_stream(ch.users())?;
    let powers: Vec<Vec<f64>> =
        ch.power_caps().iter().map(|&p| vec![p.min(opts.design_power) / STREAMS as f64; STREAMS]).collect();
    let init = initial_layout(ch, powers, opts.decoding, opts.solver.seed)?;
    let (layout, it) = algorithm1_beamformers(ch, &init, opts.max_iter, opts.tol)?;
    let mut r = power_lp(ch, &layout, demands)?;
    r.iterations = it;
    Ok(r)
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let eig = crate::linalg::symmetrize(m).symmetric_eigen();
    let top = eig.eigenvalues.amax();
    if top <= 0.0 {
        return 0;
    }
    eig.eigenvalues.iter().filter(|&&l| l > 1e-6 * top).count()
}

/// Stream covariances `Q_jk`, indexed `[j][k]`.
type StreamQ = Vec<Vec<DMatrix<f64>>>;

fn q_total(q: &StreamQ) -> f64 {
    q.iter().flatten().map(|m| m.trace()).sum()
}

/// Receive filters maximizing every stream's SINR for the covariances `q`.
fn receivers_for(ch: &ChannelInstance, q: &StreamQ, decoding: Decoding) -> Result<StreamQ, ModelError> {
    let g = lifted_gains(ch);
    let counts: Vec<usize> = q.iter().map(|s| s.len()).collect();
    let mut out = Vec::new();
    for j in 0..q.len() {
        let i = ch.receiver(j);
        let mut per = Vec::new();
        for k in 0..counts[j] {
            let t = &g[i][j] * &q[j][k] * g[i][j].transpose();
            let mut f = DMatrix::identity(2, 2) * ch.lifted_noise();
            for (l, m) in stream_interferers(&counts, j, k, decoding) {
                f += &g[i][l] * &q[l][m] * g[i][l].transpose();
            }
            let u = if t.amax() > 0.0 {
                max_sinr_receiver(&t, &f)?
            } else {
                let (_, w) = dominant_rank1(&(&g[i][j] * g[i][j].transpose()));
                w
            };
            per.push(DMatrix::from_column_slice(2, 1, u.as_slice()));
        }
        out.push(per);
    }
    Ok(out)
}

/// Relaxed covariance program for fixed receivers; `None` when infeasible.
fn covariance_sdp(
    ch: &ChannelInstance,
    u: &StreamQ,
    gamma: &[Vec<f64>],
    decoding: Decoding,
    opts: &PowerOptions,
) -> Result<Option<StreamQ>, PowerError> {
    let g = lifted_gains(ch);
    let users = ch.users();
    let counts = vec![STREAMS; users];
    let block = |j: usize, k: usize| j * STREAMS + k;
    let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(2); users * STREAMS]);
    for b in 0..users * STREAMS {
        sdp.add_objective(b, Coeff::Real(DMatrix::identity(2, 2)));
    }
    let noise = ch.lifted_noise();
    for j in 0..users {
        let i = ch.receiver(j);
        for k in 0..STREAMS {
            let uu = &u[j][k] * u[j][k].transpose();
            let coeff = |l: usize| g[i][l].transpose() * &uu * &g[i][l];
            let mut terms = vec![(block(j, k), Coeff::Real(coeff(j)))];
            for (l, m) in stream_interferers(&counts, j, k, decoding) {
                terms.push((block(l, m), Coeff::Real(coeff(l) * (-gamma[j][k]))));
            }
            sdp.add_constraint(terms, Sense::Ge, gamma[j][k] * noise);
        }
        let cap = (0..STREAMS).map(|k| (block(j, k), Coeff::Real(DMatrix::identity(2, 2)))).collect();
        sdp.add_constraint(cap, Sense::Le, ch.power_caps()[j]);
    }
    match solve_sdp(&sdp, &opts.solver) {
        Ok(sol) => Ok(Some(
            (0..users)
                .map(|j| (0..STREAMS).map(|k| crate::linalg::symmetrize(&sol.blocks[block(j, k)].real())).collect())
                .collect(),
        )),
        Err(ConvexError::Infeasible) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn stream_q(layout: &StreamLayout) -> StreamQ {
    (0..layout.users())
        .map(|j| {
            (0..layout.streams(j))
                .map(|k| layout.power(j, k) * layout.v(j, k) * layout.v(j, k).transpose())
                .collect()
        })
        .collect()
}

/// Layout read off the stream covariances through their dominant
/// eigenvectors, with the given receivers.
fn layout_from_q(q: &StreamQ, u: &StreamQ, decoding: Decoding) -> Result<StreamLayout, ModelError> {
    let mut v = Vec::new();
    let mut p = Vec::new();
    for per in q {
        v.push(per.iter().map(|m| dominant_rank1(m).1).collect());
        p.push(per.iter().map(|m| m.trace().max(0.0)).collect());
    }
    let u = u.iter().map(|per| per.iter().map(|m| DVector::from_column_slice(m.as_slice())).collect()).collect();
    StreamLayout::new(v, p, u, decoding)
}

struct JointRun {
    q: StreamQ,
    u: StreamQ,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

/// Alternates max-SINR receivers with the relaxed covariance program. An
/// infeasible program triggers a reciprocal transmit update instead.
fn joint_from(
    ch: &ChannelInstance,
    start: StreamLayout,
    gamma: &[Vec<f64>],
    opts: &PowerOptions,
) -> Result<Option<JointRun>, PowerError> {
    let decoding = start.decoding();
    let mut layout = start;
    let mut q = stream_q(&layout);
    let mut best: Option<JointRun> = None;
    let mut prev: Option<f64> = None;
    for it in 0..opts.max_iter {
        let u = receivers_for(ch, &q, decoding)?;
        match covariance_sdp(ch, &u, gamma, decoding, opts)? {
            Some(next) => {
                let total = q_total(&next);
                let mut history = best.as_ref().map(|b| b.history.clone()).unwrap_or_default();
                history.push(total);
                let stop = prev.is_some_and(|p| (p - total).abs() < opts.tol * p.abs().max(1.0));
                let keep = best.as_ref().is_none_or(|b| total < q_total(&b.q));
                if keep {
                    best = Some(JointRun { q: next.clone(), u, iterations: it + 1, converged: stop, history });
                } else if let Some(b) = best.as_mut() {
                    b.history = history;
                    b.iterations = it + 1;
                    b.converged = stop;
                }
                prev = Some(total);
                q = next;
                if stop {
                    break;
                }
            }
            None => {
                if best.is_some() {
                    break;
                }
                let ul = u.iter().map(|per| per.iter().map(|m| DVector::from_column_slice(m.as_slice())).collect());
                let with_u = StreamLayout::new(
                    (0..layout.users()).map(|j| (0..STREAMS).map(|k| layout.v(j, k).clone()).collect()).collect(),
                    layout.powers().to_vec(),
                    ul.collect(),
                    decoding,
                )?;
                let v = reciprocal_update(ch, &with_u)?;
                layout = StreamLayout::new(
                    v,
                    with_u.powers().to_vec(),
                    (0..with_u.users()).map(|j| (0..STREAMS).map(|k| with_u.u(j, k).clone()).collect()).collect(),
                    decoding,
                )?;
                q = stream_q(&layout);
            }
        }
    }
    Ok(best)
}

/// Joint transmit/receive design. Starts from the separate solution and
/// `opts.starts` random layouts and keeps the cheapest result, so it never
/// does worse than [`separate_min_power`].
pub fn joint_min_power(
    ch: &ChannelInstance,
    demands: &Demands,
    opts: &PowerOptions,
) -> Result<PowerResult, PowerError> {
    opts.validate()?;
    let gamma = demands.per_stream(ch.users())?;
    let separate = separate_min_power(ch, demands, opts)?;
    let mut starts = Vec::new();
    if let Some(l) = &separate.layout {
        starts.push(l.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.solver.seed_for(0x5eed));
    for s in 0..opts.starts {
        let powers = ch
            .power_caps()
            .iter()
            .map(|&p| (0..STREAMS).map(|_| p.min(1.0) * rng.random_range(0.1..1.0) / STREAMS as f64).collect())
            .collect();
        starts.push(initial_layout(ch, powers, opts.decoding, opts.solver.seed_for(s as u64 + 1))?);
    }
    let mut best: Option<JointRun> = None;
    for start in starts {
        if let Some(run) = joint_from(ch, start, &gamma, opts)? {
            if best.as_ref().is_none_or(|b| q_total(&run.q) < q_total(&b.q)) {
                best = Some(run);
            }
        }
    }
    let Some(run) = best else { return Ok(separate) };
    if separate.is_feasible() && separate.total <= q_total(&run.q) {
        return Ok(separate);
    }
    let ranks: Vec<Vec<usize>> = run.q.iter().map(|per| per.iter().map(numerical_rank).collect()).collect();
    let covs = run
        .q
        .iter()
        .enumerate()
        .map(|(j, per)| {
            let m = per.iter().fold(DMatrix::zeros(2, 2), |acc, x| acc + x);
            TransmitCovariance::new(m, j)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let status = if run.converged { Status::Converged } else { Status::IterLimit };
    let mut r = PowerResult::from_covariances(covs, status, run.iterations);
    r.audit_slack = stream_q_slack(ch, &run.q, &run.u, &gamma, opts.decoding);
    r.layout = layout_from_q(&run.q, &run.u, opts.decoding).ok();
    r.ranks = ranks;
    r.history = run.history;
    Ok(r)
}

/// SINR margins of general stream covariances with fixed receivers.
fn stream_q_slack(ch: &ChannelInstance, q: &StreamQ, u: &StreamQ, gamma: &[Vec<f64>], decoding: Decoding) -> f64 {
    let g = lifted_gains(ch);
    let counts: Vec<usize> = q.iter().map(|s| s.len()).collect();
    let mut slack = f64::INFINITY;
    for j in 0..q.len() {
        let i = ch.receiver(j);
        for k in 0..counts[j] {
            if gamma[j][k] <= 0.0 {
                continue;
            }
            let uk = DVector::from_column_slice(u[j][k].as_slice());
            let power = |l: usize, m: usize| uk.dot(&(&g[i][l] * &q[l][m] * g[i][l].transpose() * &uk));
            let mut den = ch.lifted_noise();
            for (l, m) in stream_interferers(&counts, j, k, decoding) {
                den += power(l, m);
            }
            slack = slack.min(relative_slack(power(j, k) / den, gamma[j][k]));
        }
    }
    slack
}

/// Complex-scalar power control `|h_jj|² p_j ≥ γ_j (σ² + Σ |h_jl|² p_l)`.
pub(crate) fn scalar_power_lp(
    ch: &ChannelInstance,
    gamma: &[f64],
    interferers: &[Vec<usize>],
) -> Result<Option<Vec<f64>>, PowerError> {
    let users = ch.users();
    let mut lp = LinearProgram::new(vec![1.0; users]);
    for j in 0..users {
        let i = ch.receiver(j);
        let mut a = vec![0.0; users];
        a[j] -= ch.gain(i, j).norm_sqr();
        for &l in &interferers[j] {
            a[l] += gamma[j] * ch.gain(i, l).norm_sqr();
        }
        lp.le(a, -gamma[j] * ch.noise_variance());
        let mut cap = vec![0.0; users];
        cap[j] = 1.0;
        lp.le(cap, ch.power_caps()[j]);
    }
    match solve_lp(&lp) {
        Ok(sol) => Ok(Some(sol.x.iter().map(|p| p.max(0.0)).collect())),
        Err(ConvexError::Infeasible) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub(crate) fn scalar_result(
    ch: &ChannelInstance,
    p: Vec<f64>,
    achieved: impl Fn(&[f64], usize) -> f64,
    demand: &[f64],
) -> PowerResult {
    let covs = p.iter().enumerate().map(|(j, &pj)| TransmitCovariance::proper(pj, 1, j)).collect();
    let mut r = PowerResult::from_covariances(covs, Status::Converged, 1);
    r.per_user = p.clone();
    r.total = p.iter().sum();
    r.audit_slack = (0..ch.users())
        .filter(|&j| demand[j] > 0.0)
        .map(|j| relative_slack(achieved(&p, j), demand[j]))
        .fold(f64::INFINITY, f64::min);
    r
}

pub(crate) fn scalar_sinr(ch: &ChannelInstance, p: &[f64], j: usize, interferers: &[usize]) -> f64 {
    let i = ch.receiver(j);
    let den: f64 = ch.noise_variance() + interferers.iter().map(|&l| ch.gain(i, l).norm_sqr() * p[l]).sum::<f64>();
    ch.gain(i, j).norm_sqr() * p[j] / den
}

/// Proper-signaling baseline for SINR demands on complex user signals.
/// Successive decoding removes MAC users decoded earlier along `order`.
pub fn proper_min_power_sinr(
    ch: &ChannelInstance,
    demands: &Demands,
    decoding: Decoding,
    order: &[usize],
) -> Result<PowerResult, PowerError> {
    let gamma = demands.per_user(ch.users())?;
    let interferers: Vec<Vec<usize>> = match decoding {
        Decoding::Parallel => (0..ch.users())
            .map(|j| (0..ch.users()).filter(|&l| l != j).collect())
            .collect(),
        Decoding::Successive => decoding_sets(ch.users(), order)?.into_iter().map(|s| s.interference).collect(),
    };
    match scalar_power_lp(ch, &gamma, &interferers)? {
        Some(p) => Ok(scalar_result(ch, p, |p, j| scalar_sinr(ch, p, j, &interferers[j]), &gamma)),
        None => Ok(PowerResult::infeasible(ch.users(), 1)),
    }
}
