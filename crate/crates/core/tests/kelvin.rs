use kelvinasym::kelvin::{
    hessian_identity_check, kelvin_map, matrices_mnkl, u_from_v, Direction, Jet2, KelvinFrame, PhaseBranch,
};
use kelvinasym::random;
use kelvinasym::scalar::int;
use kelvinasym::{FMatrix, QPoly};
use rand::Rng;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn exterior_samples(rng: &mut impl Rng, n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| random::direction(rng, n).iter().map(|d| d * rng.gen_range(2.0..5.0)).collect()).collect()
}

#[test]
fn kelvin_map_is_an_involution() {
    let mut rng = random::rng(61);
    let r = [1.3, 0.7, 2.1];
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let y = kelvin_map(&x, &r, Direction::Forward).unwrap();
        let back = kelvin_map(&y, &r, Direction::Backward).unwrap();
        for i in 0..3 {
            worst = worst.max((back[i] - x[i]).abs());
        }
        let rx: Vec<f64> = (0..3).map(|i| r[i] * x[i]).collect();
        assert!((norm(&y) * norm(&rx) - 1.0).abs() < 1e-12);
    }
    assert!(worst < 1e-12, "involution error {worst:e}");
}

#[test]
fn u_from_v_examples() {
    let frame = KelvinFrame::centered(PhaseBranch::slag(0.0), vec![0.0; 3]).unwrap();
    let x = [1.5, -2.0, 0.5];
    let r = norm(&x);
    assert!((u_from_v(&frame, |_| 1.0, &x).unwrap() - 1.0 / r).abs() < 1e-15);
    assert!((u_from_v(&frame, |y| y[0], &x).unwrap() - x[0] / r.powi(3)).abs() < 1e-15);
    let quad = KelvinFrame::new(PhaseBranch::slag(0.0), vec![1.0, 2.0, -1.0], vec![0.5, 0.0, 1.0], 3.0).unwrap();
    let want = 0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1] - x[2] * x[2]) + 0.5 * x[0] + x[2] + 3.0;
    assert!((u_from_v(&quad, |_| 0.0, &x).unwrap() - want).abs() < 1e-12);
}

#[test]
fn hessian_of_pure_quadratic() {
    let mut rng = random::rng(62);
    let frame = KelvinFrame::centered(PhaseBranch::slag(1.0), vec![0.5, -1.0, 2.0]).unwrap();
    let xs = exterior_samples(&mut rng, 3, 50);
    let rep = hessian_identity_check(&frame, &QPoly::zero(3), &xs, 1e-4).unwrap();
    assert!(rep.max_abs < 1e-6, "{rep:?}");
}

#[test]
fn hessian_of_linear_profile() {
    let mut rng = random::rng(63);
    let frame = KelvinFrame::centered(PhaseBranch::slag(0.0), vec![0.0; 3]).unwrap();
    let xs = exterior_samples(&mut rng, 3, 100);
    let rep = hessian_identity_check(&frame, &QPoly::var(3, 0), &xs, 1e-4).unwrap();
    assert_eq!(rep.samples, 100);
    assert!(rep.max_rel < 1e-5, "{rep:?}");
}

#[test]
fn hessian_of_radial_profile_with_scaled_frame() {
    let mut rng = random::rng(64);
    let lambda: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let frame = KelvinFrame::centered(PhaseBranch::slag(0.4), lambda).unwrap();
    let xs = exterior_samples(&mut rng, 3, 100);
    let rep = hessian_identity_check(&frame, &QPoly::r2(3, 3), &xs, 1e-4).unwrap();
    assert!(rep.max_rel < 1e-5, "{rep:?}");
}

#[test]
fn kelvin_matrices_are_symmetric_with_trace_identity() {
    let mut rng = random::rng(65);
    for n in 2..=5 {
        let frame = KelvinFrame::centered(PhaseBranch::slag(0.0), (0..n).map(|i| 0.2 * i as f64).collect()).unwrap();
        let v = random::polynomial(&mut rng, n, 3);
        for _ in 0..10 {
            let y: Vec<f64> = random::direction(&mut rng, n).iter().map(|d| d * rng.gen_range(0.1..0.9)).collect();
            let jet = Jet2::of_poly(&v, &y).unwrap();
            let r = matrices_mnkl(&jet, &frame).unwrap();
            assert!(r.m.is_symmetric() && r.n.is_symmetric());
            let lap = jet.hess.trace() * norm(&y).powi(2);
            assert!((r.m.trace() - lap).abs() <= 1e-12 * (1.0 + lap.abs()) * 10.0);
        }
    }
}

#[test]
fn kelvin_matrix_stays_bounded_near_the_origin() {
    let mut rng = random::rng(66);
    let frame = KelvinFrame::centered(PhaseBranch::slag(0.0), vec![0.0; 3]).unwrap();
    let mut v = random::polynomial(&mut rng, 3, 4);
    v.add_term(vec![0; 3], int(1));
    let dir = random::direction(&mut rng, 3);
    let size = |m: &FMatrix| m.rows().into_iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    let sizes: Vec<f64> = (1..=12)
        .map(|k| {
            let y: Vec<f64> = dir.iter().map(|d| d * 0.5f64.powi(k)).collect();
            size(&matrices_mnkl(&Jet2::of_poly(&v, &y).unwrap(), &frame).unwrap().m)
        })
        .collect();
    let (lo, hi) = sizes.iter().fold((f64::MAX, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    assert!(hi / lo < 10.0, "sizes {sizes:?}");
}

#[test]
fn jet_validation() {
    assert!(Jet2::new(vec![0.0; 3], 1.0, vec![0.0; 3], FMatrix::zeros(3)).is_err());
    assert!(Jet2::new(vec![1.5, 0.0, 0.0], 1.0, vec![0.0; 3], FMatrix::zeros(3)).is_err());
    let mut h = FMatrix::zeros(2);
    h.set(0, 1, 1.0);
    assert!(Jet2::new(vec![0.5, 0.0], 1.0, vec![0.0; 2], h).is_err());
}

#[test]
fn admissibility_errors_name_the_index() {
    let err = KelvinFrame::centered(PhaseBranch::recip(0.0), vec![0.5, -1.5, 0.0]).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
    assert!(KelvinFrame::centered(PhaseBranch::from_a(1.25, 0.0).unwrap(), vec![-0.6]).is_err());
    assert!(KelvinFrame::centered(PhaseBranch::from_a(0.6, 0.0).unwrap(), vec![-1.5]).is_err());
}
