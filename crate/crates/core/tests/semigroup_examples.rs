use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use telegraph_core::oracle::taylor_propagator;
use telegraph_core::semigroup::*;
use telegraph_core::spectral::*;

fn params(nu: f64, kappa: f64) -> PhysicalParams {
    PhysicalParams::new(nu, kappa).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, cap: usize) -> StateVector {
    let mut draw = || ModalVector::from_coeffs((0..cap).map(|_| rng.gen_range(-1.0..1.0)).collect());
    StateVector { u: draw(), v: draw() }
}

#[test]
fn regime_examples() {
    let under = classify_mode(1, &params(1.0, 1.0));
    assert_eq!(under.kind, RegimeKind::Underdamped);
    assert!((under.omega_n.unwrap() - (4.0 * PI * PI - 1.0).sqrt() / 2.0).abs() < 1e-14);
    assert_eq!(classify_mode(1, &params(2.0 * PI, 1.0)).kind, RegimeKind::Critical);
    let over = classify_mode(1, &params(10.0, 0.1));
    assert_eq!(over.kind, RegimeKind::Overdamped);
    assert!((over.rho_n.unwrap() - 4.900_310_149_356_984).abs() < 1e-12);
}

#[test]
fn abscissa_examples() {
    assert!((spectral_abscissa(&params(1.0, 1.0), 64).theta + 0.5).abs() < 1e-15);
    let s = spectral_abscissa(&params(10.0, 0.1), 64);
    assert!((s.theta + 0.099_689_850_643_016_16).abs() < 1e-12);
    assert!((spectral_abscissa(&params(2.0 * PI, 1.0), 64).theta + PI).abs() < 1e-15);
}

#[test]
fn propagator_initial_velocity_example() {
    let p = params(1.0, 1.0);
    let w = (4.0 * PI * PI - 1.0).sqrt() / 2.0;
    let m = propagate_mode(1, 0.5, &p).unwrap();
    let (a, b) = m.apply(0.0, 1.0);
    let e = (-0.25f64).exp();
    assert!((a - e * (w * 0.5).sin() / w).abs() < 1e-15);
    assert!((b - e * ((w * 0.5).cos() - (w * 0.5).sin() / (2.0 * w))).abs() < 1e-15);
    assert_eq!(propagate_mode(5, 0.0, &p).unwrap().matrix(), [[1.0, 0.0], [0.0, 1.0]]);
}

#[test]
fn propagator_matches_taylor_in_all_regimes() {
    for &(nu, kappa) in &[(1.0, 1.0), (2.0 * PI, 1.0), (10.0, 0.1)] {
        let p = params(nu, kappa);
        for n in 1..=16 {
            let w = p.stiffness(n).sqrt();
            for i in 0..=10 {
                let t = i as f64;
                let exact = propagate_mode(n, t, &p).unwrap();
                let m = exact.matrix();
                let r = taylor_propagator(n, &p, t).unwrap();
                let diff = spectral_norm_2x2(
                    m[0][0] - r[0][0],
                    (m[0][1] - r[0][1]) * w,
                    (m[1][0] - r[1][0]) / w,
                    m[1][1] - r[1][1],
                );
                let size = spectral_norm_2x2(m[0][0], m[0][1] * w, m[1][0] / w, m[1][1]);
                assert!(diff <= 1e-10 * size, "nu {nu} n {n} t {t}");
                assert!((exact.det() - (-nu * t).exp()).abs() <= 1e-12 * exact.det_scale().max((-nu * t).exp()));
            }
        }
    }
}

#[test]
fn energy_identity_and_rate() {
    let p = params(1.3, 0.7);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = StateVector {
        u: ModalVector::from_coeffs(vec![0.4, -0.2, 0.0]),
        v: ModalVector::zeros(3),
    };
    assert_eq!(energy_rate(&f, &p), 0.0);
    let g = StateVector { u: ModalVector::zeros(3), v: ModalVector::single_mode(3, 1, 1.0).unwrap() };
    assert!((apply_generator(&g, &p).energy_inner(&g, &p) + 1.3).abs() < 1e-14);
    for _ in 0..100 {
        let f = random_state(&mut rng, 8);
        let inner = apply_generator(&f, &p).energy_inner(&f, &p);
        let want = -1.3 * f.v.l2_norm_sq();
        assert!((inner - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}

#[test]
fn zero_state_stays_zero() {
    let p = params(1.0, 1.0);
    let z = StateVector::zeros(6);
    for t in [0.0, 0.5, 20.0] {
        assert_eq!(apply_semigroup(&z, t, &p).unwrap(), z);
    }
}

#[test]
fn resolvent_round_trip_and_bound() {
    let p = params(1.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    assert!(resolvent_apply(1.0, &StateVector::zeros(4), &p).unwrap().energy_norm(&p) == 0.0);
    for &lambda in &[0.1, 1.0, 10.0] {
        for _ in 0..200 {
            let f = random_state(&mut rng, 8);
            let r = resolvent_apply(lambda, &f, &p).unwrap();
            assert!(r.energy_norm(&p) <= f.energy_norm(&p) / lambda * (1.0 + 1e-12));
            let back = shifted_generator(lambda, &r, &p);
            let err = (&back.u - &f.u).l2_norm() + (&back.v - &f.v).l2_norm();
            assert!(err <= 1e-12 * (1.0 + f.u.l2_norm() + f.v.l2_norm()));
        }
    }
    assert!(resolvent_apply(-1.0, &StateVector::zeros(2), &p).is_err());
}

#[test]
fn norm_profile_decays_and_is_grid_stable() {
    let p = params(1.0, 1.0);
    let nb = du_norm_bound(&p, &[0.0, 20.0], 64).unwrap();
    assert!((nb.profile[0].1 - 1.0).abs() < 1e-14);
    assert!(nb.profile[1].1 <= 1e-3 * nb.profile[0].1);
    let horizon = default_norm_horizon(&p);
    let coarse = du_norm_bound(&p, &default_norm_grid(&p, 32, horizon, 1), 32).unwrap();
    let fine = du_norm_bound(&p, &default_norm_grid(&p, 32, horizon, 2), 32).unwrap();
    assert!(coarse.omega >= 1.0);
    assert!((coarse.omega - fine.omega).abs() <= 0.01 * fine.omega);
}
