use super::ConvexError;

const EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

/// `min cᵀx` subject to rows `aᵢ·x ≤ bᵢ` and `x ≥ lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, f64)>,
    pub lower: Vec<f64>,
}

impl LinearProgram {
    /// Nonnegative variables and no rows yet.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { objective, rows: Vec::new(), lower: vec![0.0; n] }
    }

    pub fn with_lower(mut self, lower: Vec<f64>) -> Self {
        self.lower = lower;
        self
    }

    /// Adds `a·x ≤ b`.
    pub fn le(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        self.rows.push((a, b));
        self
    }

    /// Adds `a·x ≥ b`.
    pub fn ge(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        self.rows.push((a.into_iter().map(|v| -v).collect(), -b));
        self
    }

    fn validate(&self) -> Result<(), ConvexError> {
        let n = self.objective.len();
        if self.lower.len() != n {
            return Err(ConvexError::InvalidProblem("lower bounds length mismatch".into()));
        }
        for (i, (a, b)) in self.rows.iter().enumerate() {
            if a.len() != n {
                return Err(ConvexError::InvalidProblem(format!("row {i} has {} coefficients", a.len())));
            }
            if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                return Err(ConvexError::InvalidProblem(format!("row {i} is not finite")));
            }
        }
        if self.objective.iter().chain(&self.lower).any(|v| !v.is_finite()) {
            return Err(ConvexError::InvalidProblem("objective and bounds must be finite".into()));
        }
        Ok(())
    }
}

/// Optimal point with the row multipliers that certify it.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Multiplier `λᵢ ≥ 0` of each row.
    pub duals: Vec<f64>,
    /// Lagrange dual objective at `duals`.
    pub dual_value: f64,
    /// Largest primal, dual or complementarity residual.
    pub kkt_residual: f64,
}

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland-rule pivots on the objective stored in the last row.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<(), ConvexError> {
        let m = self.basis.len();
        for _ in 0..MAX_PIVOTS {
            let obj = &self.t[m];
            let entering = (0..self.cols).find(|&j| allowed(j) && obj[j] < -EPS);
            let Some(c) = entering else { return Ok(()) };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..m {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.t[i][self.cols] / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => ratio < r - EPS || (ratio <= r + EPS && self.basis[i] < b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return Err(ConvexError::Unbounded),
            }
        }
        Err(ConvexError::NumericFailure("simplex pivot limit reached".into()))
    }
}

/// Dense two-phase simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, ConvexError> {
    lp.validate()?;
    let n = lp.objective.len();
    let m = lp.rows.len();
    let rhs: Vec<f64> = lp
        .rows
        .iter()
        .map(|(a, b)| b - a.iter().zip(&lp.lower).map(|(x, l)| x * l).sum::<f64>())
        .collect();
    let flipped: Vec<bool> = rhs.iter().map(|r| *r < 0.0).collect();
    let n_art = flipped.iter().filter(|f| **f).count();
    let cols = n + m + n_art;
    let mut t = vec![vec![0.0; cols + 1]; m + 1];
    let mut basis = vec![0; m];
    let mut art = n + m;
    for i in 0..m {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * lp.rows[i].0[j];
        }
        t[i][n + i] = sign;
        t[i][cols] = sign * rhs[i];
        if flipped[i] {
            t[i][art] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau { t, basis, cols };
    let is_art = |j: usize| j >= n + m;

    if n_art > 0 {
        // Phase 1: minimize the sum of artificials, expressed in reduced costs.
        for j in 0..=cols {
            let mut v = if j < cols && is_art(j) { 1.0 } else { 0.0 };
            for i in 0..m {
                if is_art(tab.basis[i]) {
                    v -= tab.t[i][j];
                }
            }
            tab.t[m][j] = v;
        }
        tab.run(&|_| true)?;
        let scale = 1.0 + rhs.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if -tab.t[m][cols] > 1e-9 * scale {
            return Err(ConvexError::Infeasible);
        }
        for i in 0..m {
            if is_art(tab.basis[i]) {
                if let Some(c) = (0..n + m).find(|&j| tab.t[i][j].abs() > 1e-9) {
                    tab.pivot(i, c);
                }
            }
        }
    }

    // Phase 2.
    let cost = |j: usize| if j < n { lp.objective[j] } else { 0.0 };
    for j in 0..=cols {
        let mut v = if j < cols { cost(j) } else { 0.0 };
        for i in 0..m {
            v -= cost(tab.basis[i]) * tab.t[i][j];
        }
        tab.t[m][j] = v;
    }
    tab.run(&|j| !is_art(j))?;

    let mut y = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            y[tab.basis[i]] = tab.t[i][cols];
        }
    }
    let x: Vec<f64> = y.iter().zip(&lp.lower).map(|(v, l)| v.max(0.0) + l).collect();
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let duals: Vec<f64> = (0..m).map(|i| tab.t[m][n + i].max(0.0)).collect();
    let dual_value: f64 = lp.objective.iter().zip(&lp.lower).map(|(c, l)| c * l).sum::<f64>()
        - rhs.iter().zip(&duals).map(|(r, l)| r * l).sum::<f64>();

    let mut residual: f64 = 0.0;
    for (i, (a, b)) in lp.rows.iter().enumerate() {
        let ax: f64 = a.iter().zip(&x).map(|(p, q)| p * q).sum();
        residual = residual.max(ax - b).max((duals[i] * (b - ax)).abs());
    }
    for j in 0..n {
        let reduced = lp.objective[j] + (0..m).map(|i| lp.rows[i].0[j] * duals[i]).sum::<f64>();
        residual = residual.max(-reduced).max((reduced * (x[j] - lp.lower[j])).abs());
    }
    Ok(LpSolution { x, value, duals, dual_value, kkt_residual: residual })
}
