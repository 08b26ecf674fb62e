use std::f64::consts::LN_2;

use approx::assert_abs_diff_eq;
use pimac::convex_core::SolverConfig;
use pimac::model::*;
use pimac::rate_region::*;
use proptest::prelude::*;

fn channel(rows: [[(f64, f64); 3]; 2]) -> ChannelInstance {
    ChannelInstance::from_polar(&[rows[0].to_vec(), rows[1].to_vec()], 1.0, vec![1.0; 3]).unwrap()
}

fn h1() -> ChannelInstance {
    channel([[(2.03, -0.68), (2.1, 2.64), (3.2, 1.48)], [(4.7, 1.97), (4.5, -0.66), (2.85, 2.41)]])
}

fn h2() -> ChannelInstance {
    channel([[(3.2, -0.72), (2.3, 2.52), (1.9, 1.35)], [(2.8, 1.68), (2.5, -0.76), (3.4, 2.23)]])
}

fn opts() -> RegionOptions {
    RegionOptions::default()
}

fn profile(a: [f64; 3]) -> RateProfile {
    RateProfile::new(a).unwrap()
}

/// Rates delivered by the reported signals must cover the claimed point.
fn assert_achieved(p: &RegionPoint) {
    let b = p.bounds;
    assert!(b.l1 >= p.rates[0] - 1e-9, "{b:?} vs {:?}", p.rates);
    assert!(b.l2 >= p.rates[1] - 1e-9, "{b:?} vs {:?}", p.rates);
    assert!(b.l3 >= p.rates[2] - 1e-9, "{b:?} vs {:?}", p.rates);
    assert!(b.l4 >= p.rates[0] + p.rates[1] - 1e-9, "{b:?} vs {:?}", p.rates);
    for (j, s) in p.signals.iter().enumerate() {
        assert!(s.variance() <= 1.0 + 1e-9, "user {j} over its cap");
    }
}

#[test]
fn p2p_endpoint_matches_closed_form() {
    for (ch, want) in [(h1(), 3.1894), (h2(), 3.6508)] {
        for mode in [Signaling::Proper, Signaling::Improper] {
            let p = max_sum_rate(&profile([0.0, 0.0, 1.0]), &ch, mode, &opts()).unwrap();
            let exact = (1.0 + ch.gain(1, 2).norm_sqr()).log2();
            assert_abs_diff_eq!(p.value, exact, epsilon = 5e-3);
            assert_abs_diff_eq!(p.value, want, epsilon = 5e-3);
            assert_achieved(&p);
        }
    }
}

#[test]
fn single_mac_user_endpoint() {
    let ch = h1();
    let p = max_sum_rate(&profile([1.0, 0.0, 0.0]), &ch, Signaling::Improper, &opts()).unwrap();
    let exact = (1.0 + ch.gain(0, 0).norm_sqr()).log2();
    assert_abs_diff_eq!(p.value, exact, epsilon = 5e-3);
}

#[test]
fn value_sits_below_relaxation_bound() {
    let ch = h1();
    for a in [[0.2, 0.3, 0.5], [0.45, 0.45, 0.1], [0.1, 0.1, 0.8]] {
        for mode in [Signaling::Proper, Signaling::Improper] {
            let p = max_sum_rate(&profile(a), &ch, mode, &opts()).unwrap();
            assert!(p.value <= p.relaxation_bound + 1e-6, "{a:?} {mode:?}: {} > {}", p.value, p.relaxation_bound);
            assert!(p.value > 0.0);
            assert_achieved(&p);
        }
    }
}

#[test]
fn improper_contains_proper() {
    let ch = h2();
    for a in [[0.3, 0.3, 0.4], [0.5, 0.5, 0.0], [0.0, 0.4, 0.6]] {
        let pr = max_sum_rate(&profile(a), &ch, Signaling::Proper, &opts()).unwrap();
        let im = max_sum_rate(&profile(a), &ch, Signaling::Improper, &opts()).unwrap();
        assert!(im.value >= pr.value - 2e-4, "{a:?}: {} < {}", im.value, pr.value);
        if a[2] == 0.0 {
            assert_abs_diff_eq!(im.value, pr.value, epsilon = 2e-4);
        }
    }
}

#[test]
fn proper_points_have_zero_pseudo_variance() {
    let p = max_sum_rate(&profile([0.3, 0.3, 0.4]), &h1(), Signaling::Proper, &opts()).unwrap();
    assert!(p.signals.iter().all(|s| s.is_proper()));
}

#[test]
fn reruns_are_identical() {
    let a = max_sum_rate(&profile([0.25, 0.25, 0.5]), &h1(), Signaling::Improper, &opts()).unwrap();
    let b = max_sum_rate(&profile([0.25, 0.25, 0.5]), &h1(), Signaling::Improper, &opts()).unwrap();
    assert_eq!(a, b);
    let grid = [profile([0.5, 0.5, 0.0]), profile([0.2, 0.2, 0.6])];
    let s1: Vec<_> = pareto_sweep(&h1(), &grid, Signaling::Improper, &opts()).into_iter().map(Result::unwrap).collect();
    let s2: Vec<_> = pareto_sweep(&h1(), &grid, Signaling::Improper, &opts()).into_iter().map(Result::unwrap).collect();
    assert_eq!(s1, s2);
}

#[test]
fn relaxation_feasibility_brackets_the_optimum() {
    let ch = h1();
    let data = build_sdr_data(&ch).unwrap();
    let cfg = SolverConfig::default();
    let prof = profile([0.3, 0.3, 0.4]);
    let p = max_sum_rate(&prof, &ch, Signaling::Improper, &opts()).unwrap();
    let below = 0.9 * p.value * LN_2;
    let above = 1.1 * p.relaxation_bound * LN_2;
    assert!(sdr_feasible(below, &prof, &data, Signaling::Improper, &cfg).unwrap().is_some());
    assert!(sdr_feasible(above, &prof, &data, Signaling::Improper, &cfg).unwrap().is_none());
    assert!(sdr_feasible(0.0, &prof, &data, Signaling::Proper, &cfg).unwrap().is_some());
}

#[test]
fn witness_respects_caps() {
    let ch = h1();
    let data = build_sdr_data(&ch).unwrap();
    let w = sdr_feasible_thresholds(&[Some(0.1), Some(0.1), Some(0.1), Some(0.2)], &data, Signaling::Improper, &SolverConfig::default())
        .unwrap()
        .unwrap();
    assert_abs_diff_eq!(w.c[(0, 0)], 1.0, epsilon = 1e-9);
    for j in 1..4 {
        assert!(w.c[(j, j)] <= 1.0 + 1e-6);
        assert!(w.c[(0, j)] >= -1e-9 && w.c[(0, j)] <= 1.0 + 1e-6);
    }
    for j in 0..3 {
        assert!(w.ct[(j, j)].re <= w.c[(j + 1, j + 1)] + 1e-6);
    }
}

#[test]
fn sdr_rows_reproduce_rate_bounds() {
    // for a rank-one point the lifted rows evaluate to the received moments
    let ch = h2();
    let data = build_sdr_data(&ch).unwrap();
    let c = [0.7, 0.4, 0.9];
    let ct = [
        num_complex::Complex64::new(0.3, 0.2),
        num_complex::Complex64::new(-0.1, 0.0),
        num_complex::Complex64::new(0.0, 0.5),
    ];
    let x = nalgebra::DVector::from_column_slice(&[1.0, c[0], c[1], c[2]]);
    let xc = nalgebra::DVector::from_column_slice(&ct);
    let big = &x * x.transpose();
    let bigt = &xc * xc.adjoint();
    let sig: Vec<_> = (0..3).map(|j| AugmentedCovariance::new(c[j], ct[j]).unwrap()).collect();
    let l = rate_bounds_improper(&ch, &sig).unwrap().as_array();
    for q in 0..4 {
        let num = (&data.w[q] * &big).trace() - (&data.a_tilde[q] * &bigt).trace().re;
        let den = (&data.z[q] * &big).trace() - (&data.b_tilde[q] * &bigt).trace().re;
        assert_abs_diff_eq!(0.5 * (num / den).log2(), l[q], epsilon = 1e-10);
    }
}

#[test]
fn p2p_given_mac_behaviour() {
    let ch = h1();
    let free = max_p2p_given_mac(0.0, &ch, Signaling::Proper, &opts()).unwrap();
    assert_abs_diff_eq!(free.value, 3.1894, epsilon = 5e-3);
    let p = max_p2p_given_mac(0.5, &ch, Signaling::Improper, &opts()).unwrap();
    assert!(p.value <= free.value + 5e-3);
    assert_achieved(&p);
    assert!(matches!(
        max_p2p_given_mac(10.0, &ch, Signaling::Proper, &opts()),
        Err(RegionError::RateInfeasible(_))
    ));
    assert!(max_p2p_given_mac(-1.0, &ch, Signaling::Proper, &opts()).is_err());
}

#[test]
fn rejects_wrong_user_count() {
    let ch = ChannelInstance::new(nalgebra::DMatrix::from_element(2, 4, num_complex::Complex64::new(1.0, 0.0)), 1.0, vec![1.0; 4]).unwrap();
    assert!(matches!(build_sdr_data(&ch), Err(RegionError::InvalidArgument(_))));
    assert!(max_sum_rate(&profile([0.3, 0.3, 0.4]), &ch, Signaling::Proper, &opts()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn recovered_point_is_sandwiched(
        mags in proptest::array::uniform6(0.5..4.0f64),
        phases in proptest::array::uniform6(-3.0..3.0f64),
        a in 0.05..0.9f64,
    ) {
        let rows = [
            [(mags[0], phases[0]), (mags[1], phases[1]), (mags[2], phases[2])],
            [(mags[3], phases[3]), (mags[4], phases[4]), (mags[5], phases[5])],
        ];
        let ch = channel(rows);
        let prof = RateProfile::from_direction([a, 1.0 - a, 1.0]).unwrap();
        let fast = RegionOptions { refine: false, ..RegionOptions::default() };
        let p = max_sum_rate(&prof, &ch, Signaling::Improper, &fast).unwrap();
        prop_assert!(p.value <= p.relaxation_bound + 1e-6);
        let b = p.bounds;
        prop_assert!(b.l1 >= p.rates[0] - 1e-9 && b.l2 >= p.rates[1] - 1e-9 && b.l3 >= p.rates[2] - 1e-9);
    }
}
