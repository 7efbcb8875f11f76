use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};
use ttw::classical::{angular_charge, hamiltonian, integrate_at};
use ttw::coherent::*;
use ttw::conventions::Conventions;
use ttw::params::*;

fn params(omega: f64, alpha: f64, beta: f64, k: &str) -> PotentialParams {
    PotentialParams::new(omega, alpha, beta, k.parse().unwrap()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn state(a: &OscillatorAmplitudes, p: &PotentialParams) -> CoherentState {
    CoherentState::new(a, p, Conventions::default(), SeriesTruncation::default(), MomentGrid::default()).unwrap()
}

/// The same oscillator data as a classical state, with the barriers that
/// the oscillator centres actually feel (α + ¼, β + ¼).
fn shifted(p: &PotentialParams) -> PotentialParams {
    PotentialParams::new(p.omega(), p.alpha() + 0.25, p.beta() + 0.25, p.k()).unwrap()
}

#[test]
fn charge_examples() {
    let a = OscillatorAmplitudes::new(c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, 1.0), 1.0);
    let ch = charges_from_amplitudes(&a);
    assert!((ch.l12 - 1.0).abs() < 1e-15 && (ch.l34 - 1.0).abs() < 1e-15);
    assert_eq!(ch.energy_over_omega, 4.0);
    assert!((expectation_u2(&a, 0.3, 0.75).unwrap() - 1.0).abs() < 1e-15);
    assert!((expectation_v2(&a, 1.7, 0.75).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(expectation_u2(&a, 0.3, 0.5), Err(CoherentError::Constraint { .. })));
}

#[test]
fn alpha_zero_target_is_half() {
    let p = params(1.0, 0.0, 0.0, "1");
    let a = constrain_amplitudes(3.0, &p, 0.2, 0.9, 0.5).unwrap();
    let ch = charges_from_amplitudes(&a);
    assert!((ch.l12 - 0.5).abs() < 1e-14 && (ch.l34 - 0.5).abs() < 1e-14);
}

#[test]
fn constrained_amplitudes_meet_every_target() {
    for k in ["1", "2", "3/2", "5/3"] {
        let p = params(1.7, 0.6, 2.2, k);
        let a = constrain_amplitudes(60.0, &p, -0.4, 1.3, 0.35).unwrap();
        let ch = charges_from_amplitudes(&a);
        let kf = p.k_f64();
        assert!((ch.l12 - kf * 0.85f64.sqrt()).abs() < 1e-12);
        assert!((ch.l34 - kf * 2.45f64.sqrt()).abs() < 1e-12);
        assert!((ch.energy(p.omega()) - 60.0).abs() < 1e-12);
        assert!((a.kappa1.arg() + 0.4).abs() < 1e-15 && (a.lambda1.arg() - 1.3).abs() < 1e-15);
        assert!((a.kappa1.norm() - a.kappa2.norm()).abs() < 1e-14);
    }
}

#[test]
fn infeasible_energy_reports_minimum() {
    let p = params(2.0, 2.0, 0.0, "3");
    match constrain_amplitudes(10.0, &p, 0.0, 0.0, 0.5) {
        Err(CoherentError::Infeasible { requested, minimum }) => {
            assert_eq!(requested, 10.0);
            // ω · 2k p_φ / split = 2 · 2 · 3 · 1.5 / 0.5
            assert!((minimum - 36.0).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn series_is_normalized_and_vanishes_at_the_wall() {
    for k in ["1", "2", "3/2"] {
        let p = params(1.0, 0.5, 1.5, k);
        let a = constrain_amplitudes(18.0, &p, 0.3, 1.1, 0.5).unwrap();
        let s = state(&a, &p);
        s.check_tail(1e-8).unwrap();
        for t in [0.0, 0.3, 1.1] {
            assert!((s.moments(t).norm - 1.0).abs() < 1e-6);
        }
        assert_eq!(s.eval(0.2, 1.5, 0.0), c(0.0, 0.0));
        let near = s.eval(0.2, 1.5, 1e-6).norm();
        let inside = s.eval(0.2, 1.5, 0.3 * p.wedge()).norm();
        assert!(near < 1e-3 * inside);
    }
}

#[test]
fn coherent_eval_matches_table() {
    let p = params(1.0, 0.5, 1.5, "2");
    let a = constrain_amplitudes(18.0, &p, 0.3, 1.1, 0.5).unwrap();
    let s = state(&a, &p);
    let v = coherent_eval(&a, &p, 0.4, 1.2, 0.3, SeriesTruncation::default()).unwrap();
    assert!((v - s.eval(0.4, 1.2, 0.3)).norm() < 1e-12 * v.norm());
    let short = SeriesTruncation {
        l1_max: 1,
        nr_max: 1,
        tail_tol: 1e-8,
    };
    assert!(matches!(coherent_eval(&a, &p, 0.4, 1.2, 0.3, short), Err(CoherentError::Truncation { .. })));
}

#[test]
fn projection_reproduces_largest_coefficients() {
    for k in ["1", "3/2", "3"] {
        let p = params(1.3, 0.8, 0.2, k);
        let a = constrain_amplitudes(25.0, &p, 0.1, -0.7, 0.55).unwrap();
        let s = state(&a, &p);
        let mut top = s.coefficients.clone();
        top.sort_by(|x, y| y.value.norm().total_cmp(&x.value.norm()));
        for t in [0.0, 0.37] {
            for coef in top.iter().take(6) {
                let got = s.project(QuantumNumbers::new(coef.n_r, coef.l1), t).unwrap();
                let want = s.coefficient_at(coef, t);
                assert!((got - want).norm() <= 1e-6 * want.norm(), "k {k} ({}, {})", coef.l1, coef.n_r);
            }
        }
    }
}

/// ⟨ωr²⟩ of the series oscillates as (|S|/2) cos(4ωt − arg S) around a
/// constant: the analytic centre up to a fixed quantum offset.
#[test]
fn series_radius_oscillates_like_the_centre() {
    for k in ["1", "2", "3/2"] {
        let p = params(1.0, 0.75, 1.2, k);
        let a = constrain_amplitudes(16.0, &p, 0.3, 1.1, 0.5).unwrap();
        let s = state(&a, &p);
        let sum_sq = a.kappa1 * a.kappa1 + a.kappa2 * a.kappa2 + a.lambda1 * a.lambda1 + a.lambda2 * a.lambda2;
        let offsets: Vec<f64> = (0..12)
            .map(|i| {
                let t = i as f64 * 0.05;
                s.moments(t).omega_r2 - 0.5 * sum_sq.norm() * (4.0 * t - sum_sq.arg()).cos()
            })
            .collect();
        let spread = offsets.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) - offsets.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        assert!(spread < 1e-8, "k {k}: {spread:e}");
    }
}

#[test]
fn density_period_depends_on_denominator() {
    for (k, q) in [("1", 1.0), ("2", 1.0), ("3/2", 2.0), ("4/3", 3.0)] {
        let p = params(1.0, 0.4, 0.9, k);
        let a = constrain_amplitudes(14.0, &p, 0.0, 0.5, 0.5).unwrap();
        let s = state(&a, &p);
        let period = q * PI / (2.0 * p.omega());
        for (r, th) in [(1.0, 0.2 * p.wedge()), (2.2, 0.6 * p.wedge())] {
            let d0 = s.eval(0.13, r, th).norm_sqr();
            let d1 = s.eval(0.13 + period, r, th).norm_sqr();
            assert!((d0 - d1).abs() < 1e-10 * d0.max(1e-12), "k {k}");
            if q <= 2.0 {
                let d2 = s.eval(0.13 + PI / p.omega(), r, th).norm_sqr();
                assert!((d0 - d2).abs() < 1e-10 * d0.max(1e-12));
            }
        }
    }
}

fn circular(p: &PotentialParams) -> OscillatorAmplitudes {
    let (pp, ps) = p.exponents();
    let k = p.k_f64();
    let e = 2.0 * p.omega() * k * (pp + ps);
    constrain_amplitudes(e, p, 0.4, 0.9, pp / (pp + ps)).unwrap()
}

/// With the barriers shifted by ¼ the oscillator centres trace the classical
/// orbit exactly; r² follows the analytic formula over a full period.
#[test]
fn centre_follows_the_classical_radius() {
    let p = params(1.2, 0.6, 1.4, "1");
    let pc = shifted(&p);
    let sets = [
        constrain_amplitudes(40.0, &p, 0.3, 1.1, 0.45).unwrap(),
        {
            let min = 2.0 * p.omega() * (p.exponents().0 + p.exponents().1);
            constrain_amplitudes(1.02 * min, &p, 0.3, 1.1, p.exponents().0 / (p.exponents().0 + p.exponents().1)).unwrap()
        },
        circular(&p),
    ];
    for a in sets {
        let ch = charges_from_amplitudes(&a);
        let s0 = classical_state(&a, 0.0).unwrap();
        assert!((hamiltonian(&s0, &pc).unwrap() - ch.energy(p.omega())).abs() < 1e-10 * ch.energy(p.omega()));
        assert!((angular_charge(&s0, &pc).unwrap() - ch.angular_charge()).abs() < 1e-9 * ch.angular_charge().max(1.0));
        let period = PI / (2.0 * p.omega());
        let times: Vec<f64> = (0..=200).map(|i| period * i as f64 / 200.0).collect();
        let tr = integrate_at(s0, &pc, &times, 1e-11).unwrap();
        let r2_max = tr.samples.iter().map(|s| s.state.r.powi(2)).fold(0.0, f64::max);
        for s in &tr.samples {
            let e = expectation_r2(ch.energy(p.omega()), ch.angular_charge(), p.omega(), s.t, ch.t0(p.omega())).unwrap();
            assert!((e - s.state.r.powi(2)).abs() <= 1e-4 * r2_max);
        }
    }
}

#[test]
fn sin_squared_tracks_classical_angle_for_large_charges() {
    let p = params(1.0, 0.9, 1.6, "1");
    let a = constrain_amplitudes(80.0, &p, 0.2, 1.0, 0.5).unwrap();
    assert!(a.kappa1.norm_sqr() > 19.0);
    let s0 = classical_state(&a, 0.0).unwrap();
    let period = PI / (2.0 * p.omega());
    let times: Vec<f64> = (0..=100).map(|i| period * i as f64 / 100.0).collect();
    // the bare barriers: the analytic formula neglects the ¼ shifts
    let tr = integrate_at(s0, &p, &times, 1e-10).unwrap();
    for s in &tr.samples {
        let v = expectation_sin2_theta(&a, &p, s.t).unwrap();
        assert!(v > 0.0 && v < 1.0);
        assert!((v - s.state.theta.sin().powi(2)).abs() < 2e-2);
    }
}

#[test]
fn u_squared_peaks_where_predicted() {
    let p = params(1.0, 0.75, 0.75, "1");
    let a = constrain_amplitudes(12.0, &p, 0.35, 0.0, 0.5).unwrap();
    let phi = 0.5 * a.s_kappa().arg();
    let t_peak = phi / 2.0;
    let top = expectation_u2(&a, t_peak, 0.75).unwrap();
    for dt in [-1e-3, 1e-3, 0.1, 0.3] {
        assert!(expectation_u2(&a, t_peak + dt, 0.75).unwrap() <= top);
    }
    assert!((charges_from_amplitudes(&a).delta - 0.5 * (a.s_kappa() + a.s_lambda()).arg() + 0.5 * FRAC_PI_2).abs() < 1e-15);
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn charges_are_conserved(
        k1 in amplitude(), k2 in amplitude(), l1 in amplitude(), l2 in amplitude(),
        omega in 0.2f64..4.0, times in prop::collection::vec(-20.0f64..20.0, 20),
    ) {
        let a = OscillatorAmplitudes::new(k1, k2, l1, l2, omega);
        let c0 = charges_from_amplitudes(&a);
        for t in times {
            let ct = charges_from_amplitudes(&a.evolve(t));
            let scale = c0.energy_over_omega.max(1.0);
            prop_assert!((ct.l12 - c0.l12).abs() <= 1e-12 * scale);
            prop_assert!((ct.l34 - c0.l34).abs() <= 1e-12 * scale);
            prop_assert!((ct.energy_over_omega - c0.energy_over_omega).abs() <= 1e-12 * scale);
            if let (Some(x), Some(y)) = (c0.k0, ct.k0) {
                prop_assert!((x.norm() - y.norm()).abs() <= 1e-12 * x.norm().max(1.0));
            }
            if let (Some(x), Some(y)) = (c0.lambda0, ct.lambda0) {
                prop_assert!((x.norm() - y.norm()).abs() <= 1e-12 * x.norm().max(1.0));
            }
            prop_assert!((a.evolve(t).kappa1.norm() - k1.norm()).abs() <= 1e-12 * k1.norm().max(1.0));
        }
    }

    #[test]
    fn expectations_have_period_quarter_turn(
        omega in 0.2f64..4.0, alpha in 0.0f64..4.0, beta in 0.0f64..4.0,
        excess in 1.05f64..5.0, split in 0.2f64..0.8, pu in -3.0f64..3.0, pv in -3.0f64..3.0,
        t in -10.0f64..10.0,
    ) {
        let p = params(omega, alpha, beta, "1");
        let (pp, ps) = p.exponents();
        let e = excess * omega * (2.0 * pp / split).max(2.0 * ps / (1.0 - split));
        let a = constrain_amplitudes(e, &p, pu, pv, split).unwrap();
        let period = PI / (2.0 * omega);
        let ch = charges_from_amplitudes(&a);
        let (en, big_a) = (ch.energy(omega), ch.angular_charge());
        let f = |t: f64| {
            (
                expectation_u2(&a, t, alpha).unwrap(),
                expectation_v2(&a, t, beta).unwrap(),
                expectation_r2(en, big_a, omega, t, ch.t0(omega)).unwrap(),
            )
        };
        let (u0, v0, r0) = f(t);
        let (u1, v1, r1) = f(t + period);
        let scale = ch.energy_over_omega;
        prop_assert!((u0 - u1).abs() <= 1e-12 * scale);
        prop_assert!((v0 - v1).abs() <= 1e-12 * scale);
        prop_assert!((r0 - r1).abs() <= 1e-12 * scale);
        let m = en / (2.0 * omega * omega);
        prop_assert!(r0 >= m - (m * m - big_a / (omega * omega)).max(0.0).sqrt() - 1e-12 * m);
        prop_assert!(r0 > 0.0);
    }
}

#[test]
fn scaled_pair_squares_reduce_at_unit_k() {
    let p = params(1.0, 0.3, 0.8, "1");
    let a = constrain_amplitudes(15.0, &p, 0.2, -0.4, 0.4).unwrap();
    for t in [0.0, 0.5] {
        assert_eq!(expectation_u2_scaled(&a, &p, t).unwrap(), expectation_u2(&a, t, 0.3).unwrap());
        assert_eq!(expectation_v2_scaled(&a, &p, t).unwrap(), expectation_v2(&a, t, 0.8).unwrap());
    }
    // u² + v² is ω⟨r⟩² for any k
    let p = params(1.0, 0.3, 0.8, "5/2");
    let a = constrain_amplitudes(40.0, &p, 0.2, -0.4, 0.4).unwrap();
    for t in [0.1, 0.6] {
        let sum = expectation_u2_scaled(&a, &p, t).unwrap() + expectation_v2_scaled(&a, &p, t).unwrap();
        assert!((sum - expectation_r2_of(&a, t).unwrap()).abs() < 1e-10 * sum);
    }
}
