use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use telegraph_core::oracle::{projection_error_by_quadrature, sampled_width, sine_coefficients};
use telegraph_core::quadrature::QuadratureGrid;
use telegraph_core::spectral::*;

fn unit() -> PhysicalParams {
    PhysicalParams::new(1.0, 1.0).unwrap()
}

#[test]
fn truncation_drops_high_modes() {
    let u = ModalVector::from_coeffs(vec![1.0, 0.0, 3.0]);
    let q = project_q(&u, 2).unwrap();
    assert_eq!(q.active(), &[1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = ModalVector::from_coeffs((0..12).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let q = project_q(&r, 5).unwrap();
    assert_eq!(project_q(&q, 5).unwrap(), q);
}

#[test]
fn projected_function_matches_composite_oracle() {
    let f = |x: f64| x * (PI * x).sin();
    let grid = QuadratureGrid::new(16).unwrap();
    let q = project_function(f, 4, &grid).unwrap();
    let reference = sine_coefficients(f, 16, 64);
    for k in 1..=16 {
        let want = if k <= 4 { reference.coeff(k) } else { 0.0 };
        assert!((q.coeff(k) - want).abs() < 1e-10, "mode {k}");
    }
}

#[test]
fn trajectory_projection_is_pointwise() {
    let constant = vec![ModalVector::single_mode(6, 1, 1.0).unwrap(); 4];
    assert_eq!(project_p(&constant, 3).unwrap(), constant);
    let traj: Vec<ModalVector> = (0..5)
        .map(|i| {
            let t = i as f64 * 0.25;
            ModalVector::from_coeffs((1..=6i32).map(|k| t.powi(k)).collect())
        })
        .collect();
    let p = project_p(&traj, 2).unwrap();
    for (a, b) in p.iter().zip(&traj) {
        assert!(a.coeffs()[2..].iter().all(|x| *x == 0.0));
        assert_eq!(*a, project_q(b, 2).unwrap());
    }
}

#[test]
fn width_formula_examples() {
    for n in 1..6 {
        let k = PhysicalParams::new(1.0, 2.5).unwrap();
        let d = n_width(PI * 2.5f64.sqrt(), n, &k).unwrap();
        assert!((d - 1.0 / (n as f64 + 1.0)).abs() < 1e-15);
    }
    let d1 = n_width(1.0, 1, &unit()).unwrap();
    assert!((d1 - 0.159_154_943_091_895_35).abs() < 1e-15);
}

#[test]
fn extremal_element_attains_width() {
    let p = PhysicalParams::new(1.0, 0.5).unwrap();
    for n in 1..=8 {
        let b = 1.7;
        let e = extremal_element(b, n, &p, 16).unwrap();
        assert!((e.h10_norm(&p) - b).abs() < 1e-12);
        let d = n_width(b, n, &p).unwrap();
        let r = projection_error_bound_check(&e, b, n, &p).unwrap();
        assert!((r.error - d).abs() < 1e-12);
        assert!((projection_error_by_quadrature(&e, n, 64) - d).abs() < 1e-12);
    }
}

#[test]
fn random_ball_elements_respect_width() {
    let p = unit();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let elements: Vec<ModalVector> = (0..100)
        .map(|_| ModalVector::from_coeffs((0..12).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    for n in 1..=4 {
        let d = n_width(1.0, n, &p).unwrap();
        for e in &elements {
            let h = e.scaled(rng.gen_range(0.0..1.0) / e.h10_norm(&p));
            assert!(projection_error_bound_check(&h, 1.0, n, &p).unwrap().within_width);
        }
        assert!(sampled_width(&elements, 1.0, n, &p, 64) <= d * (1.0 + 1e-12));
    }
    let phi1 = ModalVector::single_mode(4, 1, 1.0 / PI).unwrap();
    assert_eq!(projection_error_bound_check(&phi1, 1.0, 1, &p).unwrap().error, 0.0);
}
