use nalgebra::{Cholesky, DMatrix, DVector};

use super::{ConvexError, SolverConfig};
use crate::linalg::{logdet_pd, min_eigenvalue, trace_product};

/// Half-width of the box that bounds phase 1, relative to the start.
const PHASE_ONE_BOX: f64 = 1e6;

/// Linear matrix inequality `F0 + Σ x_k F_k ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lmi {
    pub f0: DMatrix<f64>,
    pub terms: Vec<(usize, DMatrix<f64>)>,
}

/// Scalar inequality `Σ a_k x_k ≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearIneq {
    pub coeffs: Vec<(usize, f64)>,
    pub bound: f64,
}

/// Concave inequality `log det(A0 + Σ x_k A_k) − Σ l_k x_k − offset ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDetIneq {
    pub a0: DMatrix<f64>,
    pub terms: Vec<(usize, DMatrix<f64>)>,
    pub linear: Vec<(usize, f64)>,
    pub offset: f64,
}

/// `min cᵀx` over the intersection of the listed convex sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BarrierProblem {
    pub n: usize,
    pub objective: DVector<f64>,
    pub equalities: Vec<(Vec<(usize, f64)>, f64)>,
    pub linear: Vec<LinearIneq>,
    pub lmis: Vec<Lmi>,
    pub logdets: Vec<LogDetIneq>,
}

/// Result of the slack-minimizing phase 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOne {
    /// Point in the original variables.
    pub x: DVector<f64>,
    /// Smallest uniform slack found: negative means strictly feasible.
    pub slack: f64,
    /// Certified lower bound on the optimal slack.
    pub slack_lower_bound: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    /// Lagrange dual bound `cᵀx − m/t` at the final central point.
    pub dual_bound: f64,
    pub gap: f64,
    pub newton_steps: usize,
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

fn affine(base: &DMatrix<f64>, terms: &[(usize, DMatrix<f64>)], x: &DVector<f64>) -> DMatrix<f64> {
    let mut m = base.clone();
    for (k, fk) in terms {
        if x[*k] != 0.0 {
            m += fk * x[*k];
        }
    }
    m
}

impl BarrierProblem {
    pub fn new(n: usize) -> Self {
        Self { n, objective: DVector::zeros(n), ..Default::default() }
    }

    /// Barrier parameter `m`: the duality gap of a central point is `m/t`.
    pub fn degree(&self) -> f64 {
        (self.lmis.iter().map(|l| l.f0.nrows()).sum::<usize>() + self.linear.len() + self.logdets.len())
            as f64
    }

    pub fn validate(&self) -> Result<(), ConvexError> {
        let bad = |msg: String| Err(ConvexError::InvalidProblem(msg));
        if self.objective.len() != self.n {
            return bad("objective length mismatch".into());
        }
        let check_idx = |k: usize| k < self.n;
        for (row, _) in &self.equalities {
            if !row.iter().all(|(k, _)| check_idx(*k)) {
                return bad("equality references unknown variable".into());
            }
        }
        for l in &self.linear {
            if !l.coeffs.iter().all(|(k, _)| check_idx(*k)) {
                return bad("inequality references unknown variable".into());
            }
        }
        for (i, l) in self.lmis.iter().enumerate() {
            let d = l.f0.nrows();
            if l.f0.ncols() != d || l.terms.iter().any(|(k, f)| !check_idx(*k) || f.shape() != (d, d)) {
                return bad(format!("LMI {i} has inconsistent shapes or indices"));
            }
        }
        for (i, l) in self.logdets.iter().enumerate() {
            let d = l.a0.nrows();
            if l.a0.ncols() != d
                || l.terms.iter().any(|(k, f)| !check_idx(*k) || f.shape() != (d, d))
                || !l.linear.iter().all(|(k, _)| check_idx(*k))
            {
                return bad(format!("log-det constraint {i} has inconsistent shapes or indices"));
            }
        }
        Ok(())
    }

    /// Largest constraint violation at `x`; infinite outside the log-det domain.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut v = f64::NEG_INFINITY;
        for l in &self.lmis {
            v = v.max(-min_eigenvalue(&affine(&l.f0, &l.terms, x)));
        }
        for l in &self.linear {
            v = v.max(l.coeffs.iter().map(|(k, a)| a * x[*k]).sum::<f64>() - l.bound);
        }
        for l in &self.logdets {
            match logdet_pd(&affine(&l.a0, &l.terms, x)) {
                Some(ld) => {
                    let phi = ld - l.linear.iter().map(|(k, a)| a * x[*k]).sum::<f64>() - l.offset;
                    v = v.max(-phi);
                }
                None => return f64::INFINITY,
            }
        }
        v
    }

    /// Barrier value, and optionally its gradient and Hessian.
    fn eval(&self, x: &DVector<f64>, second_order: bool) -> Option<Eval> {
        let n = self.n;
        let mut value = 0.0;
        let mut grad = DVector::zeros(if second_order { n } else { 0 });
        let mut hess = DMatrix::zeros(if second_order { n } else { 0 }, if second_order { n } else { 0 });

        for l in &self.linear {
            let s = l.bound - l.coeffs.iter().map(|(k, a)| a * x[*k]).sum::<f64>();
            if !(s > 0.0) {
                return None;
            }
            value -= s.ln();
            if second_order {
                for &(k, a) in &l.coeffs {
                    grad[k] += a / s;
                    for &(q, b) in &l.coeffs {
                        hess[(k, q)] += a * b / (s * s);
                    }
                }
            }
        }

        for l in &self.lmis {
            let f = affine(&l.f0, &l.terms, x);
            let chol = Cholesky::new(f)?;
            let ld = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            if !ld.is_finite() {
                return None;
            }
            value -= ld;
            if second_order {
                let inv = chol.inverse();
                let p: Vec<DMatrix<f64>> = l.terms.iter().map(|(_, fk)| &inv * fk).collect();
                for (a, (k, _)) in l.terms.iter().enumerate() {
                    grad[*k] -= p[a].trace();
                    for (b, (q, _)) in l.terms.iter().enumerate().skip(a) {
                        let h = trace_product(&p[a], &p[b]);
                        hess[(*k, *q)] += h;
                        if a != b {
                            hess[(*q, *k)] += h;
                        }
                    }
                }
            }
        }

        for l in &self.logdets {
            let a = affine(&l.a0, &l.terms, x);
            let chol = Cholesky::new(a)?;
            let ld = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            let phi = ld - l.linear.iter().map(|(k, c)| c * x[*k]).sum::<f64>() - l.offset;
            if !(phi > 0.0) || !phi.is_finite() {
                return None;
            }
            value -= phi.ln();
            if second_order {
                let inv = chol.inverse();
                let p: Vec<DMatrix<f64>> = l.terms.iter().map(|(_, ak)| &inv * ak).collect();
                let mut dphi = DVector::zeros(n);
                for (t, (k, _)) in l.terms.iter().enumerate() {
                    dphi[*k] += p[t].trace();
                }
                for &(k, c) in &l.linear {
                    dphi[k] -= c;
                }
                grad -= &dphi / phi;
                hess += &dphi * dphi.transpose() / (phi * phi);
                for (s, (k, _)) in l.terms.iter().enumerate() {
                    for (t, (q, _)) in l.terms.iter().enumerate().skip(s) {
                        let h = trace_product(&p[s], &p[t]) / phi;
                        hess[(*k, *q)] += h;
                        if s != t {
                            hess[(*q, *k)] += h;
                        }
                    }
                }
            }
        }
        Some(Eval { value, grad, hess })
    }

    fn equality_system(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        if self.equalities.is_empty() {
            return None;
        }
        let p = self.equalities.len();
        let mut a = DMatrix::zeros(p, self.n);
        let mut b = DVector::zeros(p);
        for (i, (row, rhs)) in self.equalities.iter().enumerate() {
            for &(k, v) in row {
                a[(i, k)] += v;
            }
            b[i] = *rhs;
        }
        Some((a, b))
    }

    /// Minimizes `t·cᵀx + Φ(x)` from a strictly feasible `x` by damped Newton.
    fn center(
        &self,
        t: f64,
        x: &mut DVector<f64>,
        eq: &Option<(DMatrix<f64>, DVector<f64>)>,
        cfg: &SolverConfig,
        stop_below: Option<(usize, f64)>,
    ) -> Result<usize, ConvexError> {
        let n = self.n;
        let mut steps = 0;
        for _ in 0..cfg.max_newton {
            let ev = self
                .eval(x, true)
                .ok_or_else(|| ConvexError::NumericFailure("iterate left the barrier domain".into()))?;
            let g = &self.objective * t + &ev.grad;
            let dx = newton_direction(&ev.hess, &g, eq, n)?;
            let lambda2 = -g.dot(&dx);
            if !lambda2.is_finite() {
                return Err(ConvexError::NumericFailure("Newton decrement is not finite".into()));
            }
            if lambda2 / 2.0 <= cfg.newton_tol {
                break;
            }
            steps += 1;
            let f0 = t * self.objective.dot(x) + ev.value;
            let slope = g.dot(&dx);
            let mut s = 1.0;
            let mut accepted = false;
            while s > 1e-14 {
                let xn = &*x + &dx * s;
                if let Some(e) = self.eval(&xn, false) {
                    let fv = t * self.objective.dot(&xn) + e.value;
                    if fv <= f0 + 0.01 * s * slope {
                        *x = xn;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
            if let Some((k, v)) = stop_below {
                if x[k] < v {
                    break;
                }
            }
        }
        Ok(steps)
    }

    fn project_equalities(&self, x: &mut DVector<f64>) -> Result<(), ConvexError> {
        if let Some((a, b)) = self.equality_system() {
            let r = &a * &*x - &b;
            if r.amax() > 0.0 {
                let aat = &a * a.transpose();
                let svd = aat.svd(true, true);
                let y = svd
                    .solve(&r, 1e-12)
                    .map_err(|e| ConvexError::NumericFailure(e.to_string()))?;
                *x -= a.transpose() * y;
            }
            let res = (&a * &*x - &b).amax();
            if res > 1e-8 * (1.0 + b.amax()) {
                return Err(ConvexError::Infeasible);
            }
        }
        Ok(())
    }

    /// Copy of the problem with a trailing slack variable `s` relaxing every
    /// inequality, plus `s ≥ −1` and the box `|x_k| ≤ bound` to keep phase 1
    /// bounded.
    fn with_slack(&self, bound: f64) -> BarrierProblem {
        let s = self.n;
        let mut p = BarrierProblem::new(self.n + 1);
        p.objective[s] = 1.0;
        p.equalities = self.equalities.clone();
        p.linear = self
            .linear
            .iter()
            .map(|l| {
                let mut coeffs = l.coeffs.clone();
                coeffs.push((s, -1.0));
                LinearIneq { coeffs, bound: l.bound }
            })
            .collect();
        p.linear.push(LinearIneq { coeffs: vec![(s, -1.0)], bound: 1.0 });
        for k in 0..self.n {
            p.linear.push(LinearIneq { coeffs: vec![(k, 1.0)], bound });
            p.linear.push(LinearIneq { coeffs: vec![(k, -1.0)], bound });
        }
        p.lmis = self
            .lmis
            .iter()
            .map(|l| {
                let mut terms = l.terms.clone();
                let d = l.f0.nrows();
                terms.push((s, DMatrix::identity(d, d)));
                Lmi { f0: l.f0.clone(), terms }
            })
            .collect();
        p.logdets = self
            .logdets
            .iter()
            .map(|l| {
                let mut linear = l.linear.clone();
                linear.push((s, -1.0));
                LogDetIneq { a0: l.a0.clone(), terms: l.terms.clone(), linear, offset: l.offset }
            })
            .collect();
        p
    }

    /// Phase 1: minimizes a uniform slack `s` with every inequality relaxed by
    /// `s`. Stops early once the slack is comfortably negative.
    pub fn phase_one(&self, cfg: &SolverConfig, x0: Option<&DVector<f64>>) -> Result<PhaseOne, ConvexError> {
        self.validate()?;
        cfg.validate()?;
        let mut x = x0.cloned().unwrap_or_else(|| DVector::zeros(self.n));
        if x.len() != self.n {
            return Err(ConvexError::InvalidProblem("starting point has wrong length".into()));
        }
        self.project_equalities(&mut x)?;
        let viol = self.max_violation(&x);
        if !viol.is_finite() && viol > 0.0 {
            return Err(ConvexError::NumericFailure("start lies outside the log-det domain".into()));
        }
        if self.lmis.is_empty() && self.linear.is_empty() && self.logdets.is_empty() {
            return Ok(PhaseOne { x, slack: -1.0, slack_lower_bound: -1.0, newton_steps: 0 });
        }
        let bound = PHASE_ONE_BOX * (1.0 + x.amax());
        let p = self.with_slack(bound);
        let target = -1e-3;
        let mut z = DVector::zeros(self.n + 1);
        z.rows_mut(0, self.n).copy_from(&x);
        z[self.n] = viol.max(-0.5) + 1.0;
        let eq = p.equality_system();
        let m = p.degree();
        let mut t = cfg.t0;
        let mut steps = 0;
        for _ in 0..200 {
            steps += p.center(t, &mut z, &eq, cfg, Some((self.n, target)))?;
            let s = z[self.n];
            let lower = s - m / t;
            let done = s < target || lower > 0.0 || m / t < cfg.tol_feas;
            if done {
                return Ok(PhaseOne {
                    x: z.rows(0, self.n).into_owned(),
                    slack: s,
                    slack_lower_bound: lower,
                    newton_steps: steps,
                });
            }
            t *= cfg.mu;
        }
        Err(ConvexError::NumericFailure("phase 1 did not terminate".into()))
    }

    /// Barrier method from a strictly feasible point.
    pub fn minimize(&self, cfg: &SolverConfig, start: DVector<f64>) -> Result<BarrierSolution, ConvexError> {
        self.validate()?;
        cfg.validate()?;
        let mut x = start;
        if self.eval(&x, false).is_none() {
            return Err(ConvexError::InvalidProblem("start is not strictly feasible".into()));
        }
        let eq = self.equality_system();
        let m = self.degree();
        let mut t = cfg.t0;
        let mut steps = 0;
        for _ in 0..200 {
            steps += self.center(t, &mut x, &eq, cfg, None)?;
            let obj = self.objective.dot(&x);
            let gap = m / t;
            if gap <= cfg.tol_feas * (1.0 + obj.abs()) || m == 0.0 {
                return Ok(BarrierSolution { objective: obj, dual_bound: obj - gap, gap, x, newton_steps: steps });
            }
            t *= cfg.mu;
        }
        Err(ConvexError::NumericFailure("barrier method did not converge".into()))
    }

    /// Phase 1 followed by the barrier method.
    pub fn solve(&self, cfg: &SolverConfig, x0: Option<&DVector<f64>>) -> Result<BarrierSolution, ConvexError> {
        let p1 = self.phase_one(cfg, x0)?;
        if p1.slack >= 0.0 {
            return Err(ConvexError::Infeasible);
        }
        self.minimize(cfg, p1.x)
    }
}

fn newton_direction(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    eq: &Option<(DMatrix<f64>, DVector<f64>)>,
    n: usize,
) -> Result<DVector<f64>, ConvexError> {
    match eq {
        None => {
            let scale = h.diagonal().amax().max(1e-300);
            let mut reg = 0.0;
            for _ in 0..8 {
                let mut hr = h.clone();
                for i in 0..n {
                    hr[(i, i)] += reg;
                }
                if let Some(ch) = Cholesky::new(hr) {
                    return Ok(-ch.solve(g));
                }
                reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
            }
            Err(ConvexError::NumericFailure("Hessian is not positive definite".into()))
        }
        Some((a, _)) => {
            let p = a.nrows();
            let mut k = DMatrix::zeros(n + p, n + p);
            k.view_mut((0, 0), (n, n)).copy_from(h);
            k.view_mut((n, 0), (p, n)).copy_from(a);
            k.view_mut((0, n), (n, p)).copy_from(&a.transpose());
            let mut rhs = DVector::zeros(n + p);
            rhs.rows_mut(0, n).copy_from(&(-g));
            let scale = h.diagonal().amax().max(1e-300);
            for i in 0..n {
                k[(i, i)] += 1e-14 * scale;
            }
            let sol = k
                .lu()
                .solve(&rhs)
                .ok_or_else(|| ConvexError::NumericFailure("singular KKT system".into()))?;
            Ok(sol.rows(0, n).into_owned())
        }
    }
}
