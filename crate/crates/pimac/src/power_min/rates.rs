use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sinr::{scalar_power_lp, scalar_result, scalar_sinr};
use super::{relative_slack, Demands, PowerError, PowerOptions, PowerResult, Status};
use crate::convex_core::{solve_sdp, BlockKind, Coeff, ConvexError, LogDetConstraint, SemidefiniteProgram, Sense};
use crate::linalg::{logdet_pd, symmetrize};
use crate::model::{decoding_sets, received_covariance, vector_rates, ChannelInstance, DecodingSet, ModelError, TransmitCovariance};

fn inverse_pd(m: &DMatrix<f64>) -> Result<DMatrix<f64>, ModelError> {
    nalgebra::Cholesky::new(m.clone())
        .map(|c| c.inverse())
        .ok_or_else(|| ModelError::Degenerate("linearization point is not positive definite".into()))
}

/// `log|Γ| + Tr(Γ⁻¹M) − a`, the tangent upper bound of `log|M|` at `Γ`.
fn tangent_bound(gamma: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64, ModelError> {
    let ld = logdet_pd(gamma).ok_or_else(|| ModelError::Degenerate("Γ is not positive definite".into()))?;
    let inv = inverse_pd(gamma)?;
    Ok(ld + crate::linalg::trace_product(&inv, m) - gamma.nrows() as f64)
}

/// Upper bound `log|Γ| + Tr(Γ⁻¹(Σ A X Aᵀ + I)) − a` on `log|Σ A X Aᵀ + I|`,
/// tight at `Γ = Σ A X Aᵀ + I`. Natural logarithm.
pub fn fenchel_upper_bound(
    gamma: &DMatrix<f64>,
    terms: &[(DMatrix<f64>, DMatrix<f64>)],
    dim: usize,
) -> Result<f64, ModelError> {
    if gamma.shape() != (dim, dim) {
        return Err(ModelError::InvalidArgument(format!("Γ must be {dim}×{dim}")));
    }
    let mut m = DMatrix::identity(dim, dim);
    for (a, x) in terms {
        if a.nrows() != dim || a.ncols() != x.nrows() {
            return Err(ModelError::InvalidArgument("term shapes do not match".into()));
        }
        m += a * x * a.transpose();
    }
    tangent_bound(gamma, &m)
}

struct CcpProblem<'a> {
    /// Channel with noise and caps divided by the scale factor.
    ch: ChannelInstance,
    sets: Vec<DecodingSet>,
    betas: &'a [f64],
    n: usize,
    opts: &'a PowerOptions,
}

struct CcpRun {
    q: Vec<DMatrix<f64>>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
    gaps: Vec<f64>,
}

impl CcpProblem<'_> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn active(&self) -> impl Iterator<Item = &DecodingSet> {
        self.sets.iter().filter(|s| self.betas[s.user] > 0.0)
    }

    fn interference(&self, s: &DecodingSet, q: &[DMatrix<f64>]) -> Result<DMatrix<f64>, ModelError> {
        received_covariance(&self.ch, s.receiver, &s.interference, q, self.n)
    }

    /// Convex restriction around the linearization points `gammas`.
    fn program(&self, gammas: &[DMatrix<f64>]) -> Result<SemidefiniteProgram, PowerError> {
        let users = self.ch.users();
        let d = self.dim();
        let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(d); users]);
        for j in 0..users {
            sdp.add_objective(j, Coeff::Real(DMatrix::identity(d, d)));
            sdp.add_constraint(
                vec![(j, Coeff::Real(DMatrix::identity(d, d)))],
                Sense::Le,
                self.n as f64 * self.ch.power_caps()[j],
            );
        }
        let noise = self.ch.lifted_noise();
        for s in self.active() {
            let g = &gammas[s.user];
            let inv = inverse_pd(g)?;
            let ld = logdet_pd(g).ok_or_else(|| ModelError::Degenerate("Γ is not positive definite".into()))?;
            let ext = |l: usize| self.ch.extended(s.receiver, l, self.n).map(|e| e.entries().clone());
            let congruences = s.signal.iter().map(|&l| ext(l).map(|m| (l, m))).collect::<Result<Vec<_>, _>>()?;
            let linear = s
                .interference
                .iter()
                .map(|&l| ext(l).map(|m| (l, symmetrize(&(m.transpose() * &inv * &m)))))
                .collect::<Result<Vec<_>, _>>()?;
            let target = 2.0 * self.n as f64 * self.betas[s.user] * std::f64::consts::LN_2;
            sdp.add_log_det(LogDetConstraint {
                base: DMatrix::identity(d, d) * noise,
                congruences,
                linear,
                offset: target + ld + noise * inv.trace() - d as f64,
            });
        }
        Ok(sdp)
    }

    /// Iterates from the linearization points `gammas`; `None` when the first
    /// convex restriction is infeasible.
    fn run(&self, mut gammas: Vec<DMatrix<f64>>) -> Result<Option<CcpRun>, PowerError> {
        let mut run: Option<CcpRun> = None;
        for it in 0..self.opts.max_iter {
            let sdp = self.program(&gammas)?;
            let q: Vec<DMatrix<f64>> = match solve_sdp(&sdp, &self.opts.solver) {
                Ok(sol) => sol.blocks.iter().map(|b| symmetrize(&b.real())).collect(),
                Err(ConvexError::Infeasible) | Err(ConvexError::NumericFailure(_)) if run.is_some() => break,
                Err(ConvexError::Infeasible) | Err(ConvexError::NumericFailure(_)) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let mut gap: f64 = 0.0;
            for s in self.active() {
                let x = self.interference(s, &q)?;
                let ld = logdet_pd(&x).ok_or_else(|| ModelError::Degenerate("singular interference".into()))?;
                gap = gap.max(tangent_bound(&gammas[s.user], &x)? - ld);
                gammas[s.user] = x;
            }
            let total: f64 = q.iter().map(|m| m.trace()).sum();
            let r = run.get_or_insert(CcpRun {
                q: q.clone(),
                iterations: 0,
                converged: false,
                history: Vec::new(),
                gaps: Vec::new(),
            });
            r.q = q;
            r.iterations = it + 1;
            r.history.push(total);
            r.gaps.push(gap);
            if gap < self.opts.eps_star {
                r.converged = true;
                break;
            }
        }
        Ok(run)
    }

    /// Walks the demands up in small increments, seeding every stage with
    /// the previous solution. A stage without a usable seed falls back to
    /// random linearization points.
    fn homotopy(&self, rng: &mut ChaCha8Rng) -> Result<Option<CcpRun>, PowerError> {
        let top = self.betas.iter().cloned().fold(0.0, f64::max);
        let stages = ((top / HOMOTOPY_STEP).ceil() as usize).max(1);
        let mut q: Option<Vec<DMatrix<f64>>> = None;
        for k in 1..=stages {
            let t = k as f64 / stages as f64;
            let betas: Vec<f64> = self.betas.iter().map(|b| b * t).collect();
            let stage = CcpProblem { ch: self.ch.clone(), sets: self.sets.clone(), betas: &betas, n: self.n, opts: self.opts };
            let mut run = match &q {
                Some(q) => stage.run_seeded(q)?,
                None => None,
            };
            if run.is_none() {
                run = stage.random_start(rng)?;
            }
            let Some(run) = run else { return Ok(None) };
            if k == stages {
                return Ok(Some(run));
            }
            q = Some(run.q);
        }
        Ok(None)
    }

    /// First run that succeeds from random linearization points.
    fn random_start(&self, rng: &mut ChaCha8Rng) -> Result<Option<CcpRun>, PowerError> {
        for _ in 0..=self.opts.r_reinit {
            if let Some(r) = self.run(self.random_gammas(rng))? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    fn random_gammas(&self, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
        let d = self.dim();
        (0..self.ch.users())
            .map(|_| {
                let a: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
                let m: DMatrix<f64> = &a * a.transpose() + DMatrix::identity(d, d) * 1e-3;
                let f = m.norm();
                m / f
            })
            .collect()
    }

    fn seeded_gammas(&self, q: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>, PowerError> {
        let d = self.dim();
        let mut out = vec![DMatrix::identity(d, d); self.ch.users()];
        for s in &self.sets {
            out[s.user] = self.interference(s, q)?;
        }
        Ok(out)
    }

    /// Smallest margin, in nats per block, by which `q` beats the demands.
    fn margin(&self, q: &[DMatrix<f64>]) -> Result<f64, PowerError> {
        let mut worst = f64::INFINITY;
        for s in self.active() {
            let plus = received_covariance(&self.ch, s.receiver, &s.signal, q, self.n)?;
            let x = self.interference(s, q)?;
            let (Some(a), Some(b)) = (logdet_pd(&plus), logdet_pd(&x)) else { return Ok(f64::NEG_INFINITY) };
            worst = worst.min(a - b - 2.0 * self.n as f64 * self.betas[s.user] * std::f64::consts::LN_2);
        }
        Ok(worst)
    }

    /// Linearization points around a uniformly scaled copy of `q`. Scaling
    /// every covariance up only shrinks the relative noise, so rates grow;
    /// the smallest tried scale that meets every demand strictly (within
    /// the caps) makes the first convex restriction strictly feasible.
    fn inflated_gammas(&self, q: &[DMatrix<f64>]) -> Result<Option<Vec<DMatrix<f64>>>, PowerError> {
        let headroom = (0..self.ch.users())
            .map(|j| self.n as f64 * self.ch.power_caps()[j] / q[j].trace().max(1e-300))
            .fold(f64::INFINITY, f64::min);
        let mut c = 1.0;
        while c <= headroom {
            let scaled: Vec<DMatrix<f64>> = q.iter().map(|m| m * c).collect();
            if self.margin(&scaled)? > SEED_MARGIN {
                return Ok(Some(self.seeded_gammas(&scaled)?));
            }
            c *= 1.25;
        }
        Ok(None)
    }

    /// Runs from the inflated seed `q`, if it can be made feasible.
    fn run_seeded(&self, q: &[DMatrix<f64>]) -> Result<Option<CcpRun>, PowerError> {
        match self.inflated_gammas(q)? {
            Some(g) => self.run(g),
            None => Ok(None),
        }
    }
}

/// Minimum total power meeting per-user rate demands under successive
/// decoding along `order`, with symbol extension length `n`.
///
/// Each iteration replaces the subtracted log-determinant of every rate
/// constraint by its tangent bound, which keeps the previous iterate feasible,
/// so the total power is non-increasing. Runs start from each seed (as
/// `Γ = interference(seed)`) and from random unit-norm `Γ`, re-drawn up to
/// `r_reinit` times while the first restriction is infeasible; the cheapest
/// run wins.
pub fn ccp_min_power_rates(
    ch: &ChannelInstance,
    demands: &Demands,
    n: usize,
    order: &[usize],
    opts: &PowerOptions,
    seeds: &[Vec<TransmitCovariance>],
) -> Result<PowerResult, PowerError> {
    opts.validate()?;
    if n == 0 {
        return Err(ModelError::InvalidArgument("extension length must be ≥ 1".into()).into());
    }
    if 2 * n > crate::convex_core::MAX_BLOCK_DIM {
        return Err(ModelError::InvalidArgument(format!("extension length {n} is too large")).into());
    }
    let betas = demands.rates(ch.users())?;
    let sets = decoding_sets(ch.users(), order)?;
    let users = ch.users();
    if betas.iter().all(|&b| b == 0.0) {
        let covs = (0..users).map(|j| TransmitCovariance::zero(n, j)).collect();
        let mut r = PowerResult::from_covariances(covs, Status::Converged, 0);
        r.audit_slack = 0.0;
        return Ok(r);
    }
    let gs = opts.solver.gamma_scale;
    let scaled = ChannelInstance::new(
        ch.gains().clone(),
        ch.noise_variance() / gs,
        ch.power_caps().iter().map(|p| p / gs).collect(),
    )?;
    let problem = CcpProblem { ch: scaled, sets, betas: &betas, n, opts };

    let mut runs = Vec::new();
    for seed in seeds {
        if seed.len() != users || seed.iter().any(|q| q.extension_length() != n) {
            return Err(ModelError::InvalidArgument("seed covariances do not match the problem".into()).into());
        }
        let q: Vec<DMatrix<f64>> = seed.iter().map(|q| q.matrix() / gs).collect();
        if let Some(r) = problem.run_seeded(&q)? {
            runs.push(r);
        }
    }
    let proper = proper_min_power_rates(ch, demands, order)?;
    if proper.is_feasible() {
        let q: Vec<DMatrix<f64>> = proper.covariances.iter().map(|c| c.replicated(n).matrix() / gs).collect();
        if let Some(r) = problem.run_seeded(&q)? {
            runs.push(r);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.solver.seed);
    if let Some(r) = problem.random_start(&mut rng)? {
        runs.push(r);
    }
    if let Some(r) = problem.homotopy(&mut rng)? {
        runs.push(r);
    }
    let Some(best) = runs.into_iter().min_by(|a, b| total(&a.q).total_cmp(&total(&b.q))) else {
        return Ok(PowerResult::infeasible(users, opts.r_reinit + 1));
    };

    let covs = best
        .q
        .iter()
        .enumerate()
        .map(|(j, m)| TransmitCovariance::new(m * gs, j))
        .collect::<Result<Vec<_>, _>>()?;
    let rates = vector_rates(ch, &covs, n, order)?;
    let status = if best.converged { Status::Converged } else { Status::IterLimit };
    let mut r = PowerResult::from_covariances(covs, status, best.iterations);
    r.audit_slack = (0..users)
        .filter(|&j| betas[j] > 0.0)
        .map(|j| relative_slack(rates[j], betas[j]))
        .fold(f64::INFINITY, f64::min);
    r.history = best.history.iter().map(|t| t * gs / n as f64).collect();
    r.gaps = best.gaps;
    Ok(r)
}

/// Margin, in nats, by which an inflated seed must beat the demands.
const SEED_MARGIN: f64 = 1e-4;
/// Largest rate increment, in bits, between homotopy stages.
const HOMOTOPY_STEP: f64 = 0.1;

fn total(q: &[DMatrix<f64>]) -> f64 {
    q.iter().map(|m| m.trace()).sum()
}

/// Proper-signaling baseline for rate demands: complex-scalar power control
/// with SINR targets `2^β − 1` under successive decoding along `order`.
pub fn proper_min_power_rates(
    ch: &ChannelInstance,
    demands: &Demands,
    order: &[usize],
) -> Result<PowerResult, PowerError> {
    let betas = demands.rates(ch.users())?;
    let gamma: Vec<f64> = betas.iter().map(|b| b.exp2() - 1.0).collect();
    let interferers: Vec<Vec<usize>> = decoding_sets(ch.users(), order)?.into_iter().map(|s| s.interference).collect();
    match scalar_power_lp(ch, &gamma, &interferers)? {
        Some(p) => {
            let rate = |p: &[f64], j: usize| (1.0 + scalar_sinr(ch, p, j, &interferers[j])).log2();
            Ok(scalar_result(ch, p, rate, &betas))
        }
        None => Ok(PowerResult::infeasible(ch.users(), 1)),
    }
}
