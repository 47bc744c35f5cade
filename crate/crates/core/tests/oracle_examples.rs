use std::f64::consts::PI;
use telegraph_core::forcing::*;
use telegraph_core::oracle::*;
use telegraph_core::quadrature::QuadratureGrid;
use telegraph_core::spectral::basis;
use telegraph_core::{ModalVector, PhysicalParams};

fn unit() -> PhysicalParams {
    PhysicalParams::new(1.0, 1.0).unwrap()
}

#[test]
fn fd_linear_drive_converges_at_second_order() {
    let p = unit();
    let times = [0.0, 0.5, 1.0];
    let drive = |x: f64, _t: f64| basis(1, x);
    let mut errors = Vec::new();
    for m in [63usize, 127, 255] {
        let fd = fd_solve(&p, FdForcing::Zero, Some(&drive), &times, m).unwrap();
        let refs: Vec<ModalVector> = times
            .iter()
            .map(|t| ModalVector::single_mode(1, 1, modal_ode_closed_form(1, &p, 0.0, 1.0, *t).0).unwrap())
            .collect();
        errors.push(fd.c_l2_distance(&refs).unwrap());
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}, errors {errors:?}");
    }
}

#[test]
fn fd_identity_forcing_matches_shifted_closed_form() {
    let p = unit();
    let drive = |x: f64, _t: f64| basis(1, x);
    let fd = fd_solve(&p, FdForcing::Linear(1.0), Some(&drive), &[0.0, 0.8], 255).unwrap();
    let a = modal_ode_closed_form(1, &p, -1.0, 1.0, 0.8).0;
    let refs = [ModalVector::zeros(1), ModalVector::single_mode(1, 1, a).unwrap()];
    assert!(fd.c_l2_distance(&refs).unwrap() < 1e-4);
}

#[test]
fn fd_bvp_forcing_is_diagonal_on_sines() {
    let g = FdGrid::new(127).unwrap();
    let u: Vec<f64> = g.points().iter().map(|x| basis(2, *x)).collect();
    let w = g.solve_shifted(&u);
    let factor = 1.0 / (1.0 - g.laplacian_eigenvalue(2));
    for (a, b) in w.iter().zip(&u) {
        assert!((a - factor * b).abs() < 1e-12);
    }
    assert!((factor - BvpComposition::symbol(2)).abs() < 1e-3);
}

#[test]
fn fd_rejects_unsorted_times() {
    assert!(fd_solve(&unit(), FdForcing::Zero, None, &[1.0, 0.5], 32).is_err());
}

#[test]
fn monomial_square_of_first_mode_matches_quadrature() {
    let f = PointwiseForcing::monomial(2, 16).unwrap();
    let u = ModalVector::single_mode(16, 1, 1.0).unwrap();
    let out = f.evaluate(&u).unwrap();
    let reference = sine_coefficients(|x| (PI * x).sin().powi(2), 16, 64);
    for k in 1..=16 {
        assert!((out.coeff(k) - reference.coeff(k)).abs() < 1e-10);
    }
    assert!(PointwiseForcing::sinh(8).unwrap().evaluate(&ModalVector::zeros(8)).unwrap().is_zero());
}

#[test]
fn pointwise_matches_direct_galerkin() {
    let u = ModalVector::from_coeffs(vec![0.4, -0.3, 0.2, 0.1, 0.0, 0.0]);
    let grid = QuadratureGrid::new(6).unwrap();
    for sym in [PointwiseSymbol::Monomial(3), PointwiseSymbol::Sinh] {
        let modal = pointwise_forcing(&sym, &u, &grid).unwrap();
        let direct = sine_coefficients(|x| sym.apply(u.eval(x)), 6, 256);
        for k in 1..=6 {
            assert!((modal.coeff(k) - direct.coeff(k)).abs() < 1e-10, "{sym:?} mode {k}");
        }
    }
}

#[test]
fn bvp_composition_examples() {
    let phi1 = ModalVector::single_mode(4, 1, 1.0).unwrap();
    let w = bvp_composition_forcing(&phi1);
    assert!((w.coeff(1) - 1.0 / (PI * PI + 1.0)).abs() < 1e-15);
    let u = ModalVector::from_coeffs(vec![0.5, -0.25, 0.125, 0.3]);
    let w = bvp_composition_forcing(&u);
    let residual = composite_integral(
        |x| {
            let wxx: f64 = w
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, a)| -a * ((i + 1) as f64 * PI).powi(2) * ((i + 1) as f64 * PI * x).sin())
                .sum();
            (-wxx + w.eval(x) - u.eval(x)).powi(2)
        },
        64,
    );
    assert!(residual.sqrt() <= 1e-10);
}

#[test]
fn local_bound_dominates_sampled_images() {
    use rand::{Rng, SeedableRng};
    let p = unit();
    let f = PointwiseForcing::monomial(3, 16).unwrap();
    let radius = 2.0;
    let c = f.local_bound(radius, &p);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let u = ModalVector::from_coeffs((1..=16).map(|k| rng.gen_range(-1.0..1.0) / (k * k) as f64).collect());
        let u = u.scaled(radius * rng.gen_range(0.0..1.0) / u.du_norm(&p));
        assert!(f.evaluate(&u).unwrap().h10_norm(&p) <= c);
    }
}

#[test]
fn closure_examples() {
    let p = unit();
    let f = PointwiseForcing::monomial(2, 8).unwrap();
    let u = ModalVector::single_mode(8, 1, 1.0).unwrap();
    let constant = vec![u.clone(); 4];
    let rep = closure_property_check(&f, &constant, &u, &p).unwrap();
    assert!(rep.output_errors.iter().all(|e| *e == 0.0));
    let seq: Vec<ModalVector> = (1..=64).map(|k| u.scaled(1.0 - 1.0 / k as f64)).collect();
    let rep = closure_property_check(&f, &seq, &u, &p).unwrap();
    assert_eq!(rep.status, ClosureStatus::Verified);
    for (k, e) in rep.output_errors.iter().enumerate().skip(8) {
        assert!(*e <= 4.0 / (k + 1) as f64);
    }
    let smooth = ModalVector::from_coeffs((1..=8).map(|k| 1.0 / (k * k * k) as f64).collect());
    let seq: Vec<ModalVector> = (1..=8).map(|k| telegraph_core::spectral::project_q(&smooth, k).unwrap()).collect();
    let rep = closure_property_check(&BvpComposition, &seq, &smooth, &p).unwrap();
    for (uk, e) in seq.iter().zip(&rep.output_errors) {
        assert!(*e <= (uk - &smooth).l2_norm() / (PI * PI + 1.0) * (1.0 + 1e-12));
    }
}
