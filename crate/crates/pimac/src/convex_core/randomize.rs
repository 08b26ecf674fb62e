use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::rank1::{dominant_rank1, dominant_rank1_hermitian};
use super::ConvexError;

/// How many of the best candidates are kept for later refinement.
const KEEP: usize = 8;

/// Per-user variances `c` and pseudo-variances `c̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub c: Vec<f64>,
    pub ct: Vec<Complex64>,
}

impl Candidate {
    /// Clips `c` into `[0, cap]` and shrinks `c̃` so that `|c̃_j| ≤ c_j`.
    pub fn project(mut self, caps: &[f64]) -> Self {
        for (j, cap) in caps.iter().enumerate() {
            let v = self.c[j];
            self.c[j] = if v.is_finite() { v.clamp(0.0, *cap) } else { *cap };
            let z = self.ct[j];
            let r = z.norm();
            if !r.is_finite() {
                self.ct[j] = Complex64::new(0.0, 0.0);
            } else if r > self.c[j] {
                self.ct[j] = if r > 0.0 { z * (self.c[j] / r) } else { z };
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Randomized {
    pub best: Candidate,
    pub objective: f64,
    /// Whether the best candidate is the deterministic eigen-projection.
    pub from_eigen: bool,
    /// Up to eight best candidates, best first.
    pub ranked: Vec<(f64, Candidate)>,
    pub tried: usize,
    pub feasible: usize,
}

fn sqrt_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = crate::linalg::symmetrize(m).symmetric_eigen();
    let mut f = eig.eigenvectors.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        for i in 0..f.nrows() {
            f[(i, j)] *= s;
        }
    }
    f
}

fn sqrt_factor_hermitian(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut f = eig.eigenvectors.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        let s = Complex64::new(l.max(0.0).sqrt(), 0.0);
        for i in 0..f.nrows() {
            f[(i, j)] *= s;
        }
    }
    f
}

/// Candidate read off the homogenized vector `ξ = (t, c)` as `c/t`.
fn dehomogenize(xi: &DVector<f64>) -> Vec<f64> {
    let t = xi[0];
    if t.abs() > 1e-12 {
        xi.iter().skip(1).map(|v| v / t).collect()
    } else {
        xi.iter().skip(1).map(|v| v.abs()).collect()
    }
}

/// Recovers rank-1 candidates from a relaxation solution.
///
/// `c_star` is the homogenized `(n+1)×(n+1)` variance block with unit top-left
/// entry, `ct_star` the `n×n` pseudo-variance block. `K_rand` samples
/// `ξ ~ N(0, C*)`, `ζ ~ CN(0, C̃*)` are drawn and projected onto the power
/// set; the eigen-projection is always evaluated too. `evaluate` either
/// rejects a candidate or returns its objective together with the candidate
/// it actually scored, which lets it repair candidates in place.
pub fn gaussian_randomize<F>(
    c_star: &DMatrix<f64>,
    ct_star: &DMatrix<Complex64>,
    caps: &[f64],
    mut evaluate: F,
    k_rand: usize,
    seed: u64,
) -> Result<Randomized, ConvexError>
where
    F: FnMut(Candidate) -> Option<(f64, Candidate)>,
{
    let n = caps.len();
    if c_star.shape() != (n + 1, n + 1) || ct_star.shape() != (n, n) {
        return Err(ConvexError::InvalidProblem("relaxation blocks do not match the cap count".into()));
    }
    let mut ranked: Vec<(f64, usize, Candidate)> = Vec::new();
    let mut feasible = 0;
    let mut consider = |idx: usize, cand: Candidate, ranked: &mut Vec<(f64, usize, Candidate)>| {
        if let Some((v, cand)) = evaluate(cand) {
            if v.is_finite() {
                feasible += 1;
                ranked.push((v, idx, cand));
                ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                ranked.truncate(KEEP);
            }
        }
    };

    let (_, w) = dominant_rank1(c_star);
    let (lt, z) = dominant_rank1_hermitian(ct_star);
    let eigen = Candidate {
        c: dehomogenize(&w),
        ct: z.iter().map(|v| v * lt.max(0.0).sqrt()).collect(),
    }
    .project(caps);
    consider(0, eigen, &mut ranked);

    let fc = sqrt_factor(c_star);
    let fct = sqrt_factor_hermitian(ct_star);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for s in 0..k_rand {
        let g = DVector::from_fn(n + 1, |_, _| StandardNormal.sample(&mut rng));
        let xi = &fc * g;
        let zeta_in = DVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * half, im * half)
        });
        let zeta = &fct * zeta_in;
        let cand = Candidate { c: dehomogenize(&xi), ct: zeta.iter().cloned().collect() }.project(caps);
        consider(s + 1, cand, &mut ranked);
    }

    let tried = k_rand + 1;
    let Some((objective, idx, best)) = ranked.first().cloned() else {
        return Err(ConvexError::RandomizationFailed { tried });
    };
    Ok(Randomized {
        best,
        objective,
        from_eigen: idx == 0,
        ranked: ranked.into_iter().map(|(v, _, c)| (v, c)).collect(),
        tried,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_factor_reproduces_psd_part() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let f = sqrt_factor(&m);
        assert!((&f * f.transpose() - &m).norm() < 1e-12);
        // the negative eigenvalue is clipped
        let n = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let g = sqrt_factor(&n);
        assert!(crate::linalg::min_eigenvalue(&(&g * g.transpose())) > -1e-12);
    }

    #[test]
    fn hermitian_factor() {
        let i = Complex64::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(2.0, 0.0), i, -i, Complex64::new(2.0, 0.0)]);
        let f = sqrt_factor_hermitian(&m);
        assert!((&f * f.adjoint() - &m).norm() < 1e-12);
    }

    #[test]
    fn dehomogenize_divides_by_leading_entry() {
        assert_eq!(dehomogenize(&DVector::from_vec(vec![-2.0, 1.0, -4.0])), vec![-0.5, 2.0]);
        assert_eq!(dehomogenize(&DVector::from_vec(vec![0.0, -1.0, 3.0])), vec![1.0, 3.0]);
    }
}
