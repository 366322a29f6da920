mod common;

use common::oracles;
use kelvinasym::equations::{
    algebraic_residual, linear_part_factor, notheta_residual, residual_scaling_slope, symbolic_residual_n3,
    transformed_residual,
};
use kelvinasym::kelvin::{BranchKind, Jet2, KelvinFrame, PhaseBranch};
use kelvinasym::random;
use kelvinasym::scalar::{int, rat};
use kelvinasym::{FMatrix, MultiPoly, QPoly, QSpectrum, RadPoly};
use rand::Rng;
use std::f64::consts::PI;

#[test]
fn symbolic_residual_matches_numeric_evaluation() {
    let mut rng = random::rng(11);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let s = random::spectrum(&mut rng, 3);
        let p = random::polynomial(&mut rng, 3, 2);
        let q = &random::homogeneous(&mut rng, 3, 2).base().clone() + random::homogeneous(&mut rng, 3, 3).base();
        let sym = symbolic_residual_n3(&p, &q, &s).unwrap();
        let frame = KelvinFrame::centered(PhaseBranch::slag(0.0), s.to_f64()).unwrap();
        let y: Vec<f64> = random::direction(&mut rng, 3).iter().map(|d| d * rng.gen_range(0.2..0.6)).collect();
        let v = RadPoly::from_poly(0, p.clone()) + RadPoly::from_poly(1, q.clone());
        let jet = oracles::radpoly_jet(&v, &y);
        let b = transformed_residual(&jet, &frame).unwrap();
        let exact = sym.eval_f64(&y);
        let rel = (b.total - exact).abs() / exact.abs().max(1.0);
        worst = worst.max(rel);
        assert!(rel < 1e-9, "trial {trial}: numeric {} vs symbolic {exact}", b.total);
    }
    println!("worst relative deviation {worst:e}");
}

#[test]
fn constant_profile_with_zero_spectrum() {
    let p0 = rat(3, 2);
    let s = QSpectrum::new(vec![int(0); 3]);
    let res = symbolic_residual_n3(&QPoly::constant(3, p0.clone()), &QPoly::zero(3), &s).unwrap();
    let want = RadPoly::from_poly(4, QPoly::constant(3, -(int(2) * p0.clone() * p0.clone() * p0)));
    assert_eq!(res, want);
}

fn branches() -> Vec<(PhaseBranch, (f64, f64))> {
    // Each branch with an eigenvalue window inside its admissible range.
    vec![
        (PhaseBranch::slag(0.0), (-3.0, 3.0)),
        (PhaseBranch::from_a(0.6, 0.0).unwrap(), (-1.2, 3.0)),
        (PhaseBranch::recip(0.0), (-0.8, 3.0)),
        (PhaseBranch::from_a(1.25, 0.0).unwrap(), (-0.3, 3.0)),
    ]
}

fn random_rotation(rng: &mut impl Rng, n: usize) -> nalgebra::DMatrix<f64> {
    let m = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

fn symmetric_with_eigenvalues(rng: &mut impl Rng, eigs: &[f64]) -> FMatrix {
    let n = eigs.len();
    let q = random_rotation(rng, n);
    let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigs));
    let h = &q * d * q.transpose();
    FMatrix::from_fn(n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]))
}

/// Inverse of the increasing scalar map `g` on `(lo, hi)` by bisection.
fn g_inverse(branch: &PhaseBranch, target: f64, lo: f64, hi: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    if !(branch.g(a) <= target && target <= branch.g(b)) {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if branch.g(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[test]
fn algebraic_forms_vanish_on_their_level_sets() {
    let mut rng = random::rng(71);
    for (branch, (lo, hi)) in branches() {
        for _ in 0..100 {
            let n = rng.gen_range(2..=5);
            let eigs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
            let h = symmetric_with_eigenvalues(&mut rng, &eigs);
            let theta = branch.operator(&eigs);
            let res = algebraic_residual(&branch, &h, theta);
            let scale = eigs.iter().fold(1.0, |acc, l| acc * (1.0 + l.abs() + branch.a.abs() + branch.b));
            assert!(res.abs() < 1e-9 * scale, "{:?} eigs {eigs:?}: {res:e}", branch.kind);
            // A different phase must not satisfy the form.
            assert!(algebraic_residual(&branch, &h, theta + 0.3).abs() > 1e-6);
        }
    }
}

#[test]
fn theta_free_residual_vanishes_on_the_same_level_set() {
    let mut rng = random::rng(72);
    for (branch, (lo, hi)) in branches() {
        let mut done = 0;
        while done < 30 {
            let n = rng.gen_range(2..=5);
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
            let theta = branch.operator(&s);
            let mut eigs: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(lo..hi)).collect();
            let rest = theta - branch.operator(&eigs);
            let Some(last) = g_inverse(&branch, rest, lo, 1e3) else { continue };
            eigs.push(last);
            let h = symmetric_with_eigenvalues(&mut rng, &eigs);
            let res = notheta_residual(branch.kind, &branch.params(), &s, &h);
            let scale = s.iter().chain(&eigs).fold(1.0, |acc, l| acc * (1.0 + l.abs() + branch.a.abs() + branch.b));
            assert!(res.abs() < 1e-9 * scale, "{:?}: {res:e}", branch.kind);
            done += 1;
        }
    }
}

#[test]
fn explicit_slag_solution_in_three_dimensions() {
    let mut rng = random::rng(73);
    let branch = PhaseBranch::slag(PI / 2.0);
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (e, f) = ((-x[2]).exp(), x[2].exp());
        let h = FMatrix::from_rows(vec![
            vec![2.0 * e, 0.0, -2.0 * x[0] * e],
            vec![0.0, 2.0 * e, -2.0 * x[1] * e],
            vec![-2.0 * x[0] * e, -2.0 * x[1] * e, (x[0] * x[0] + x[1] * x[1] - 1.0) * e + f / 4.0],
        ])
        .unwrap();
        let res = algebraic_residual(&branch, &h, PI / 2.0);
        assert!(res.abs() < 1e-8, "x {x:?}: {res:e}");
    }
}

#[test]
fn transformed_residual_examples() {
    let frame = KelvinFrame::centered(PhaseBranch::slag(0.0), vec![0.0; 3]).unwrap();
    let y = [0.2, -0.3, 0.1];
    let zero = Jet2::new(y.to_vec(), 0.0, vec![0.0; 3], FMatrix::zeros(3)).unwrap();
    assert_eq!(transformed_residual(&zero, &frame).unwrap().total, 0.0);

    // v ≡ 1: only the cubic term survives, −σ₃(M) = −2 at order |y|⁴.
    for t in [0.1, 0.3, 0.7] {
        let y = [t, 0.0, 0.0];
        let one = Jet2::new(y.to_vec(), 1.0, vec![0.0; 3], FMatrix::zeros(3)).unwrap();
        let b = transformed_residual(&one, &frame).unwrap();
        assert!((b.total + 2.0 * t.powi(4)).abs() < 1e-14, "t = {t}: {}", b.total);
        assert_eq!(b.laplace_term, 0.0);
        assert!((b.total - b.laplace_term - b.nonlinear_term).abs() < 1e-12);
    }
}

#[test]
fn transformed_residual_recovers_the_laplacian_for_every_branch() {
    let mut rng = random::rng(74);
    let lambda = vec![0.4, 0.9, 1.5];
    for (branch, _) in branches() {
        let frame = KelvinFrame::centered(branch.clone(), lambda.clone()).unwrap();
        let v = random::polynomial(&mut rng, 3, 3);
        let y = [0.2, 0.1, -0.25];
        let b = transformed_residual(&Jet2::of_poly(&v, &y).unwrap(), &frame).unwrap();
        assert!(b.linear_defect.abs() < 1e-9 * (1.0 + b.laplace_term.abs()), "{:?}: {}", branch.kind, b.linear_defect);
        let gamma = linear_part_factor(&branch, &lambda).unwrap();
        assert_eq!(gamma, b.linear_factor);
    }
    let recip = linear_part_factor(&PhaseBranch::recip(0.0), &[0.0; 3]).unwrap();
    assert!((recip + 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn nonlinear_part_scales_like_a_power_of_the_radius() {
    let ts: Vec<f64> = (3..=10).map(|k| 0.5f64.powi(k)).collect();
    let v = &MultiPoly::constant(3, int(1)) + &QPoly::var(3, 1);
    let frame = KelvinFrame::centered(PhaseBranch::slag(0.2), vec![0.5, 1.0, -0.5]).unwrap();
    let slope = residual_scaling_slope(&frame, &v, &[0.6, 0.8, 0.0], &ts).unwrap();
    assert!(slope >= 0.9, "slope {slope}");
}

#[test]
fn residual_has_no_slot_below_minus_one() {
    let mut rng = random::rng(75);
    for _ in 0..10 {
        let s = random::spectrum(&mut rng, 3);
        let p = random::polynomial(&mut rng, 3, 3);
        let q = random::homogeneous(&mut rng, 3, 2).base().clone();
        let res = symbolic_residual_n3(&p, &q, &s).unwrap();
        assert!(res.min_exponent().is_none_or(|k| k >= -1), "min exponent {:?}", res.min_exponent());
    }
    assert!(symbolic_residual_n3(&QPoly::zero(3), &QPoly::zero(3), &random::spectrum(&mut rng, 3)).unwrap().is_zero());
    assert!(symbolic_residual_n3(&QPoly::zero(2), &QPoly::zero(2), &random::spectrum(&mut rng, 2)).is_err());
}

#[test]
fn slag_linear_factorisation_in_four_dimensions() {
    let s = QSpectrum::new(vec![int(1), rat(-1, 2), int(0), int(2)]);
    let (lhs, rhs) = kelvinasym::equations::slag_linear_part_symbolic(&s).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn branch_kind_round_trip() {
    for k in [BranchKind::Slag, BranchKind::Recip, BranchKind::Atan2, BranchKind::Log] {
        assert_eq!(k.to_string().to_lowercase().parse::<BranchKind>().unwrap(), k);
    }
}
