use super::ConvexError;

/// Outcome of a bisection search.
#[derive(Debug, Clone, PartialEq)]
pub struct Bisection<T> {
    /// Largest value certified feasible.
    pub value: f64,
    /// Oracle output at `value`.
    pub witness: T,
    /// Smallest value seen infeasible, if any.
    pub infeasible_at: Option<f64>,
    pub evaluations: usize,
}

/// Largest feasible point of a monotone oracle on `[lo, hi]` to within `tol`.
///
/// The oracle returns `Some(witness)` when feasible. After convergence the
/// midpoint between `lo` and the answer is probed once more; an infeasible
/// answer there means the oracle is not monotone.
pub fn bisect<T, F>(mut oracle: F, lo: f64, hi: f64, tol: f64) -> Result<Bisection<T>, ConvexError>
where
    F: FnMut(f64) -> Result<Option<T>, ConvexError>,
{
    if !(lo <= hi) || !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(ConvexError::InvalidProblem(format!("bad bisection interval [{lo}, {hi}] / tol {tol}")));
    }
    let mut evaluations = 1;
    let Some(mut best) = oracle(lo)? else {
        return Err(ConvexError::Infeasible);
    };
    evaluations += 1;
    if let Some(w) = oracle(hi)? {
        return Ok(Bisection { value: hi, witness: w, infeasible_at: None, evaluations });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        evaluations += 1;
        match oracle(mid)? {
            Some(w) => {
                a = mid;
                best = w;
            }
            None => b = mid,
        }
    }
    if a > lo + tol {
        let probe = 0.5 * (lo + a);
        evaluations += 1;
        if oracle(probe)?.is_none() {
            return Err(ConvexError::NonMonotone { feasible: a, infeasible: probe });
        }
    }
    Ok(Bisection { value: a, witness: best, infeasible_at: Some(b), evaluations })
}
