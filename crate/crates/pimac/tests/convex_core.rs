use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pimac::convex_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn lp_single_lower_bound() {
    let mut lp = LinearProgram::new(vec![1.0]);
    lp.ge(vec![1.0], 0.5);
    let s = solve_lp(&lp).unwrap();
    assert_abs_diff_eq!(s.x[0], 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(s.value, s.dual_value, epsilon = 1e-10);
}

#[test]
fn lp_two_bounds() {
    let mut lp = LinearProgram::new(vec![1.0, 1.0]);
    lp.ge(vec![1.0, 0.0], 1.0).ge(vec![0.0, 1.0], 2.0);
    let s = solve_lp(&lp).unwrap();
    assert_abs_diff_eq!(s.value, 3.0, epsilon = 1e-12);
    assert!(s.kkt_residual < 1e-9);
}

#[test]
fn lp_single_link_sinr() {
    // |h|² p / σ² ≥ γ with |h| = σ² = 1, γ = 0.5
    let mut lp = LinearProgram::new(vec![1.0]);
    lp.ge(vec![1.0], 0.5);
    assert_abs_diff_eq!(solve_lp(&lp).unwrap().value, 0.5, epsilon = 1e-12);
}

#[test]
fn lp_infeasible_and_unbounded() {
    let mut lp = LinearProgram::new(vec![1.0]);
    lp.ge(vec![1.0], 2.0).le(vec![1.0], 1.0);
    assert_eq!(solve_lp(&lp), Err(ConvexError::Infeasible));
    let mut lp = LinearProgram::new(vec![-1.0]);
    lp.ge(vec![1.0], 0.0);
    assert_eq!(solve_lp(&lp), Err(ConvexError::Unbounded));
}

#[test]
fn lp_with_shifted_lower_bounds() {
    let mut lp = LinearProgram::new(vec![2.0, 1.0]).with_lower(vec![1.0, -3.0]);
    lp.ge(vec![1.0, 1.0], 0.0);
    let s = solve_lp(&lp).unwrap();
    assert_abs_diff_eq!(s.x[0], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.x[1], -1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.value, s.dual_value, epsilon = 1e-10);
}

fn real(m: DMatrix<f64>) -> Coeff {
    Coeff::Real(m)
}

#[test]
fn sdp_trace_with_unit_corner() {
    let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(2)]);
    sdp.add_objective(0, real(DMatrix::identity(2, 2)));
    let mut e11 = DMatrix::zeros(2, 2);
    e11[(0, 0)] = 1.0;
    sdp.add_constraint(vec![(0, real(e11))], Sense::Eq, 1.0);
    let s = solve_sdp(&sdp, &cfg()).unwrap();
    assert_abs_diff_eq!(s.objective, 1.0, epsilon = 1e-6);
    let x = s.blocks[0].real();
    assert_abs_diff_eq!(x[(0, 0)], 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(x[(1, 1)], 0.0, epsilon = 1e-6);
    assert!(s.objective >= s.dual_bound - 1e-7);
}

#[test]
fn sdp_trace_scaling_of_identity() {
    let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(2)]);
    sdp.add_objective(0, real(DMatrix::identity(2, 2)));
    sdp.add_constraint(vec![(0, real(DMatrix::identity(2, 2) * 2.0))], Sense::Ge, 1.0);
    let s = solve_sdp(&sdp, &cfg()).unwrap();
    assert_abs_diff_eq!(s.objective, 0.5, epsilon = 1e-6);
}

#[test]
fn sdp_detects_infeasibility() {
    let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(2)]);
    sdp.add_objective(0, real(DMatrix::identity(2, 2)));
    sdp.add_constraint(vec![(0, real(DMatrix::identity(2, 2)))], Sense::Le, -1.0);
    assert_eq!(solve_sdp(&sdp, &cfg()), Err(ConvexError::Infeasible));
}

#[test]
fn sdp_rejects_oversized_blocks() {
    let sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(17)]);
    assert!(matches!(solve_sdp(&sdp, &cfg()), Err(ConvexError::InvalidProblem(_))));
}

/// Three diagonal-coupled blocks against brute force over diagonal candidates:
/// with diagonal data the optimum is attained at diagonal matrices.
#[test]
fn sdp_three_blocks_against_grid() {
    let costs = [[1.0, 2.0], [1.5, 0.5], [3.0, 1.0]];
    let demand = [[1.0, 0.5], [0.3, 1.0], [0.8, 0.4]];
    let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(2); 3]);
    for b in 0..3 {
        sdp.add_objective(b, real(DMatrix::from_diagonal(&DVector::from_row_slice(&costs[b]))));
    }
    // Tr(D_b X_b) ≥ 1 for each block and a coupling Σ_b X_b[0,0] ≥ 1.5
    for b in 0..3 {
        sdp.add_constraint(
            vec![(b, real(DMatrix::from_diagonal(&DVector::from_row_slice(&demand[b]))))],
            Sense::Ge,
            1.0,
        );
    }
    let mut e = DMatrix::zeros(2, 2);
    e[(0, 0)] = 1.0;
    sdp.add_constraint((0..3).map(|b| (b, real(e.clone()))).collect(), Sense::Ge, 1.5);
    let s = solve_sdp(&sdp, &cfg()).unwrap();

    let step = 0.02;
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * step).collect();
    let mut best_b: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); 3];
    for b in 0..3 {
        for &x0 in &grid {
            // cheapest x1 meeting the per-block demand
            let need = ((1.0 - demand[b][0] * x0) / demand[b][1]).max(0.0);
            let x1 = (need / step).ceil() * step;
            best_b[b].push((x0, x1, costs[b][0] * x0 + costs[b][1] * x1));
        }
    }
    let mut brute = f64::INFINITY;
    for a in &best_b[0] {
        for b in &best_b[1] {
            for c in &best_b[2] {
                if a.0 + b.0 + c.0 >= 1.5 - 1e-12 {
                    brute = brute.min(a.2 + b.2 + c.2);
                }
            }
        }
    }
    assert!(s.objective <= brute + 1e-6, "{} > {}", s.objective, brute);
    assert!(s.objective >= brute - 0.2, "{} ≪ {}", s.objective, brute);
}

#[test]
fn hermitian_block_matches_embedding() {
    // min Tr(X) s.t. Re Tr(A X) ≥ 1 with A = aaᴴ: optimum 1/‖a‖², X ∝ aaᴴ.
    let a = DVector::from_vec(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, -2.0)]);
    let amat = &a * a.adjoint();
    let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Hermitian(2)]);
    sdp.add_objective(0, Coeff::Complex(DMatrix::identity(2, 2)));
    sdp.add_constraint(vec![(0, Coeff::Complex(amat))], Sense::Ge, 1.0);
    let s = solve_sdp(&sdp, &cfg()).unwrap();
    assert_abs_diff_eq!(s.objective, 1.0 / a.norm_squared(), epsilon = 1e-6);
    let x = s.blocks[0].complex();
    let (_, v) = dominant_rank1_hermitian(&x);
    let overlap = (v.adjoint() * &a)[(0, 0)].norm() / a.norm();
    assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-4);
}

#[test]
fn log_det_constraint_matches_closed_form() {
    // min x s.t. log(1 + x) ≥ 1  →  x = e − 1
    let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(1)]);
    sdp.add_objective(0, real(DMatrix::identity(1, 1)));
    sdp.add_log_det(LogDetConstraint {
        base: DMatrix::identity(1, 1),
        congruences: vec![(0, DMatrix::identity(1, 1))],
        linear: vec![],
        offset: 1.0,
    });
    let s = solve_sdp(&sdp, &cfg()).unwrap();
    assert_abs_diff_eq!(s.objective, std::f64::consts::E - 1.0, epsilon = 1e-6);
}

#[test]
fn bisect_threshold() {
    let b = bisect(|r| Ok((r <= 2.5).then_some(())), 0.0, 10.0, 1e-3).unwrap();
    assert!((b.value - 2.5).abs() <= 1e-3);
}

#[test]
fn bisect_saturates_at_hi() {
    let b = bisect(|_| Ok(Some(())), 0.0, 4.0, 1e-3).unwrap();
    assert_eq!(b.value, 4.0);
}

#[test]
fn bisect_infeasible_start() {
    assert_eq!(bisect(|_| Ok(None::<()>), 0.0, 4.0, 1e-3).unwrap_err(), ConvexError::Infeasible);
}

#[test]
fn bisect_detects_non_monotone_oracle() {
    // feasible on [0, 0.1] ∪ [2, 3] only
    let r = bisect(|r| Ok((r <= 0.1 || (2.0..=3.0).contains(&r)).then_some(())), 0.0, 4.0, 1e-3);
    assert!(matches!(r, Err(ConvexError::NonMonotone { .. })), "{r:?}");
}

#[test]
fn rank1_identity_tie_break() {
    let (l, w) = dominant_rank1(&DMatrix::identity(2, 2));
    assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(w[1], 0.0, epsilon = 1e-12);
}

#[test]
fn rank1_diagonal() {
    let (l, w) = dominant_rank1(&DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])));
    assert_abs_diff_eq!(l, 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
}

#[test]
fn rank1_sign_convention() {
    let v = DVector::from_vec(vec![-1.0, 2.0, 0.5]);
    let (_, w) = dominant_rank1(&(&v * v.transpose()));
    assert!(w[0] > 0.0);
}

proptest! {
    #[test]
    fn rank1_recovers_outer_products(v in prop::collection::vec(-3.0f64..3.0, 2..6)) {
        let v = DVector::from_vec(v);
        prop_assume!(v.norm() > 1e-3);
        let (l, w) = dominant_rank1(&(&v * v.transpose()));
        prop_assert!((l - v.norm_squared()).abs() <= 1e-10 * (1.0 + l));
        let u = &v / v.norm();
        let d = (&w - &u).norm().min((&w + &u).norm());
        prop_assert!(d <= 1e-10);
    }

    #[test]
    fn lp_agrees_with_diagonal_sdp(
        c in prop::collection::vec(0.1f64..3.0, 3),
        rows in prop::collection::vec((prop::collection::vec(0.0f64..2.0, 3), 0.1f64..2.0), 1..4),
    ) {
        let mut lp = LinearProgram::new(c.clone());
        let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(1); 3]);
        for (b, cb) in c.iter().enumerate() {
            sdp.add_objective(b, real(DMatrix::from_element(1, 1, *cb)));
        }
        let mut any = false;
        for (a, rhs) in &rows {
            if a.iter().all(|v| *v < 1e-3) { continue; }
            any = true;
            lp.ge(a.clone(), *rhs);
            sdp.add_constraint(
                a.iter().enumerate().map(|(b, v)| (b, real(DMatrix::from_element(1, 1, *v)))).collect(),
                Sense::Ge,
                *rhs,
            );
        }
        prop_assume!(any);
        let l = solve_lp(&lp).unwrap();
        let s = solve_sdp(&sdp, &cfg()).unwrap();
        prop_assert!((l.value - s.objective).abs() <= 1e-6, "{} vs {}", l.value, s.objective);
        prop_assert!(s.objective >= s.dual_bound - 1e-7);
    }

    #[test]
    fn sdp_weak_duality_on_random_instances(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        let mut sdp = SemidefiniteProgram::new(vec![BlockKind::Symmetric(d)]);
        let c = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let c = &c * c.transpose() + DMatrix::identity(d, d) * 0.1;
        sdp.add_objective(0, real(c));
        for _ in 0..2 {
            let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            sdp.add_constraint(vec![(0, real(&a * a.transpose()))], Sense::Ge, 1.0);
        }
        let s = solve_sdp(&sdp, &cfg()).unwrap();
        prop_assert!(s.objective >= s.dual_bound - 1e-7);
        prop_assert!(s.gap <= 1e-7 * (1.0 + s.objective.abs()));
    }
}

#[test]
fn randomize_rank1_relaxation_returns_eigen_candidate() {
    let c = [0.3, 0.7];
    let ct = [Complex64::new(0.1, 0.2), Complex64::new(0.0, 0.0)];
    let h = DVector::from_vec(vec![1.0, c[0], c[1]]);
    let cstar = &h * h.transpose();
    let z = DVector::from_vec(ct.to_vec());
    let ctstar = &z * z.adjoint();
    let score = |cand: Candidate| Some((-(cand.c[0] - c[0]).powi(2) - (cand.c[1] - c[1]).powi(2) - (cand.ct[0].norm() - ct[0].norm()).powi(2), cand));
    let r = gaussian_randomize(&cstar, &ctstar, &[1.0, 1.0], score, 50, 7).unwrap();
    assert!(r.objective > -1e-12);
    for (a, b) in r.best.c.iter().zip(&c) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }
}

#[test]
fn randomize_zero_samples_is_eigen_projection() {
    let cstar = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 0.5, 0.1, 0.2, 0.1, 0.3]);
    let ctstar = DMatrix::<Complex64>::zeros(2, 2);
    let r = gaussian_randomize(&cstar, &ctstar, &[1.0, 1.0], |c| Some((c.c[0] + c.c[1], c)), 0, 1).unwrap();
    assert!(r.from_eigen);
    assert_eq!(r.tried, 1);
}

#[test]
fn randomize_is_deterministic_per_seed() {
    let cstar = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 0.5, 0.1, 0.2, 0.1, 0.3]);
    let ctstar = DMatrix::from_row_slice(2, 2, &[
        Complex64::new(0.2, 0.0), Complex64::new(0.05, 0.05),
        Complex64::new(0.05, -0.05), Complex64::new(0.1, 0.0),
    ]);
    let f = |c: Candidate| Some((c.c[0] - 0.3 * c.c[1] + c.ct[0].re, c));
    let a = gaussian_randomize(&cstar, &ctstar, &[1.0, 1.0], f, 100, 42).unwrap();
    let b = gaussian_randomize(&cstar, &ctstar, &[1.0, 1.0], f, 100, 42).unwrap();
    assert_eq!(a, b);
    assert!(a.best.ct.iter().zip(&a.best.c).all(|(z, c)| z.norm() <= c + 1e-15));
}

#[test]
fn randomize_reports_failure() {
    let cstar = DMatrix::identity(3, 3);
    let ctstar = DMatrix::<Complex64>::zeros(2, 2);
    let r = gaussian_randomize(&cstar, &ctstar, &[1.0, 1.0], |_| None, 10, 0);
    assert_eq!(r.unwrap_err(), ConvexError::RandomizationFailed { tried: 11 });
}
