//! Algebraic and θ-free forms of `F_τ(∇²u) = θ`, the transformed equation
//! for the Kelvin profile `v`, and the exact `n = 3` residual.

use crate::error::{Error, Result};
use crate::exactalg::{MultiPoly, RadPoly};
use crate::kelvin::{kelvin_split, matrices_mnkl, scaling_matrix, BranchKind, Jet2, KelvinFrame, PhaseBranch, SymbolicJet};
use crate::linalg::{interpolate_at_integers, SquareMatrix};
use crate::scalar::{rational_from_f64, Scalar};
use crate::symfun::{even_odd, sigma_bars, sigma_bars_of_matrix, sigmas_of, BranchParams, Spectrum};
use crate::{FMatrix, Rational};

/// Residual of the algebraic (polynomial) form of `F_τ(H) = θ`.
///
/// It vanishes when `F_τ(H) = θ`; arctangent based branches only see `θ`
/// modulo `π` (after the branch rescaling).
pub fn algebraic_residual(branch: &PhaseBranch, h: &FMatrix, theta: f64) -> f64 {
    let n = h.n();
    let (a, b) = (branch.a, branch.b);
    match branch.kind {
        BranchKind::Slag => {
            let (e, o) = even_odd(&h.sigmas());
            theta.cos() * o - theta.sin() * e
        }
        BranchKind::Atan2 => {
            let t = theta * b / branch.root();
            let (e, o) = even_odd(&sigma_bars_of_matrix(h, &branch.params()));
            t.sin() * e - t.cos() * o
        }
        BranchKind::Recip => {
            let sig = h.shift(&1.0).sigmas();
            -std::f64::consts::SQRT_2 * sig[n - 1] - theta * sig[n]
        }
        BranchKind::Log => {
            let ratio = (2.0 * b * theta / branch.root()).exp();
            h.shift(&(a - b)).det() - ratio * h.shift(&(a + b)).det()
        }
    }
}

/// θ-free residual: the algebraic form at `H` cross-multiplied against the
/// same form at `A = diag(s)`. Vanishes at `H = A`.
pub fn notheta_residual<S: Scalar>(kind: BranchKind, p: &BranchParams<S>, s: &[S], h: &SquareMatrix<S>) -> S {
    let n = s.len();
    assert_eq!(h.n(), n, "H and the spectrum must share n");
    match kind {
        BranchKind::Slag => {
            let (ea, oa) = even_odd(&sigmas_of(s));
            let (eh, oh) = even_odd(&h.sigmas());
            ea * oh - oa * eh
        }
        BranchKind::Atan2 => {
            let spec = Spectrum::new(s.to_vec());
            let (ea, oa) = even_odd(&sigma_bars(&spec, p));
            let (eh, oh) = even_odd(&sigma_bars_of_matrix(h, p));
            ea * oh - oa * eh
        }
        BranchKind::Recip => {
            let shifted: Vec<S> = s.iter().map(|l| l.clone() + S::one()).collect();
            let sa = sigmas_of(&shifted);
            let sh = h.shift(&S::one()).sigmas();
            sa[n].clone() * sh[n - 1].clone() - sa[n - 1].clone() * sh[n].clone()
        }
        BranchKind::Log => {
            let plus = p.a.clone() + p.b.clone();
            let minus = p.a.clone() - p.b.clone();
            let det_a = |c: &S| s.iter().fold(S::one(), |acc, l| acc * (l.clone() + c.clone()));
            det_a(&plus) * h.shift(&minus).det() - det_a(&minus) * h.shift(&plus).det()
        }
    }
}

/// Branch parameters as exact rationals for the exact-interpolation paths.
fn exact_params(branch: &PhaseBranch) -> Result<BranchParams<Rational>> {
    Ok(BranchParams { a: rational_from_f64(branch.a)?, b: rational_from_f64(branch.b)? })
}

/// Coefficient of `H_ii` in the part of the θ-free residual that is
/// linear in `H − A`.
pub fn per_index_coefficients<S: Scalar>(kind: BranchKind, p: &BranchParams<S>, s: &[S]) -> Vec<S> {
    let n = s.len();
    let one = S::one();
    (0..n)
        .map(|i| {
            let others = s.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l.clone());
            match kind {
                BranchKind::Slag => others.fold(one.clone(), |acc, l| acc * (one.clone() + l.clone() * l)),
                BranchKind::Recip => -others.fold(one.clone(), |acc, l| {
                    let t = one.clone() + l;
                    acc * t.clone() * t
                }),
                BranchKind::Atan2 => others.fold(S::from_int(1 << n) * p.b.clone(), |acc, l| {
                    let x = l + p.a.clone();
                    acc * (x.clone() * x + p.b.clone() * p.b.clone())
                }),
                BranchKind::Log => others.fold(S::from_int(2) * p.b.clone(), |acc, l| {
                    let x = l + p.a.clone();
                    acc * (x.clone() * x - p.b.clone() * p.b.clone())
                }),
            }
        })
        .collect()
}

/// Coefficient of `t` in `notheta_residual(A + tB)`, by exact
/// interpolation.
pub fn linear_coefficient_along<S: Scalar>(kind: BranchKind, p: &BranchParams<S>, s: &[S], b: &SquareMatrix<S>) -> S {
    let coeffs = epsilon_polynomial(kind, p, s, b);
    coeffs[1].clone()
}

/// Coefficients `[p_0, …, p_n]` of `ε ↦ notheta_residual(A + εB)`.
pub fn epsilon_polynomial<S: Scalar>(kind: BranchKind, p: &BranchParams<S>, s: &[S], b: &SquareMatrix<S>) -> Vec<S> {
    let a = SquareMatrix::from_diag(s);
    let values: Vec<S> = (0..=s.len())
        .map(|t| notheta_residual(kind, p, s, &a.add(&b.scale(&S::from_int(t as i64)))))
        .collect();
    interpolate_at_integers(&values)
}

/// The constant `γ` with linear part of the θ-free residual equal to
/// `γ |y|^{n+2} Δv`.
///
/// Computed as `c_i R_ii²` from the per-index coefficients. Each `c_i`
/// is cross-checked against exact interpolation along `H = A + t e_ii`,
/// and the products must agree for every `i`.
pub fn linear_part_factor(branch: &PhaseBranch, s: &[f64]) -> Result<f64> {
    let r = scaling_matrix(branch, s)?;
    let coeffs = per_index_coefficients(branch.kind, &branch.params(), s);
    let ep = exact_params(branch)?;
    let es: Vec<Rational> = s.iter().map(|&x| rational_from_f64(x)).collect::<Result<_>>()?;
    let n = s.len();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300);
    let mut gamma = None;
    for i in 0..n {
        let mut e = SquareMatrix::zeros(n);
        e.set(i, i, Rational::from_integer(1.into()));
        let direct = linear_coefficient_along(branch.kind, &ep, &es, &e).to_f64_lossy();
        if !close(direct, coeffs[i]) {
            return Err(Error::Mismatch(format!(
                "index {}: interpolated coefficient {direct} vs closed form {}",
                i + 1,
                coeffs[i]
            )));
        }
        let g = coeffs[i] * r[i] * r[i];
        match gamma {
            None => gamma = Some(g),
            Some(g0) if !close(g0, g) => {
                return Err(Error::Mismatch(format!("c_i R_ii^2 differs across indices: {g0} vs {g}")))
            }
            _ => {}
        }
    }
    let g = gamma.ok_or_else(|| Error::Dimension("empty spectrum".into()))?;
    if g == 0.0 {
        return Err(Error::Mismatch("linear factor vanishes".into()));
    }
    Ok(g)
}

/// Split of the transformed equation evaluated at one jet, normalised so
/// that the linear part is exactly `Δv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBreakdown {
    pub laplace_term: f64,
    pub nonlinear_term: f64,
    pub total: f64,
    pub linear_factor: f64,
    /// Difference between the recovered linear part and `Δv`; zero up
    /// to rounding when the factorisation holds.
    pub linear_defect: f64,
}

/// Evaluates the θ-free residual at `H = A + |y|^n N(jet)` divided by
/// `γ |y|^{n+2}`.
///
/// The `ε`-expansion of the residual in `H = A + εN` is computed exactly
/// (inputs are converted to rationals without rounding), so the tiny
/// nonlinear remainder is not lost to cancellation.
pub fn transformed_residual(jet: &Jet2, frame: &KelvinFrame) -> Result<ResidualBreakdown> {
    let n = frame.n;
    let mnkl = matrices_mnkl(jet, frame)?;
    let gamma = linear_part_factor(&frame.branch, &frame.lambda)?;
    let ep = exact_params(&frame.branch)?;
    let es: Vec<Rational> = frame.lambda.iter().map(|&x| rational_from_f64(x)).collect::<Result<_>>()?;
    let mut en = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            en.set(i, j, rational_from_f64(*mnkl.n.get(i, j))?);
        }
    }
    let p: Vec<f64> = epsilon_polynomial(frame.branch.kind, &ep, &es, &en).iter().map(|c| c.to_f64_lossy()).collect();
    let r = jet.y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let laplace = jet.hess.trace();
    let mut nonlinear = 0.0;
    for (m, pm) in p.iter().enumerate().skip(2) {
        nonlinear += r.powi((m * n) as i32 - n as i32 - 2) * pm / gamma;
    }
    Ok(ResidualBreakdown {
        laplace_term: laplace,
        nonlinear_term: nonlinear,
        total: laplace + nonlinear,
        linear_factor: gamma,
        linear_defect: p[1] / (gamma * r * r) - laplace,
    })
}

/// Least-squares slope of `log |nonlinear_term|` against `log t` along
/// `y = t ŷ`.
pub fn residual_scaling_slope<S: Scalar>(
    frame: &KelvinFrame,
    v: &MultiPoly<S>,
    direction: &[f64],
    ts: &[f64],
) -> Result<f64> {
    let mut pts = Vec::new();
    for &t in ts {
        let y: Vec<f64> = direction.iter().map(|d| d * t).collect();
        let b = transformed_residual(&Jet2::of_poly(v, &y)?, frame)?;
        if b.nonlinear_term != 0.0 {
            pts.push((t.ln(), b.nonlinear_term.abs().ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::InsufficientData("nonlinear term vanishes along the ray".into()));
    }
    Ok(log_slope(&pts).0)
}

/// Ordinary least-squares slope and its standard error.
pub fn log_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let stderr = if pts.len() > 2 {
        let sse: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
        (sse / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

fn det3(m: &[Vec<RadPoly<Rational>>]) -> RadPoly<Rational> {
    let minor = |a: usize, b: usize, c: usize, d: usize| &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d]);
    let t0 = &m[0][0] * &minor(1, 2, 2, 1);
    let t1 = &m[0][1] * &minor(0, 2, 2, 0);
    let t2 = &m[0][2] * &minor(0, 1, 1, 0);
    &(&t0 - &t1) + &t2
}

/// Exact residual of the special Lagrangian equation in `n = 3` for
/// `v = P + |y| Q`, normalised as `Δv + |y| I₂ + |y|⁴ I₃` with
/// `I₂ = Σ_{i<j} (λ_i+λ_j)(M_ii M_jj − M_ij²)` and
/// `I₃ = −(1 − σ₂(A)) det M`.
pub fn symbolic_residual_n3(
    p: &MultiPoly<Rational>,
    q: &MultiPoly<Rational>,
    s: &Spectrum<Rational>,
) -> Result<RadPoly<Rational>> {
    if s.n() != 3 || p.n_vars() != 3 || q.n_vars() != 3 {
        return Err(Error::Dimension("symbolic residual is implemented for n = 3".into()));
    }
    let v = &RadPoly::from_poly(0, p.clone()) + &RadPoly::from_poly(1, q.clone());
    let grad: Vec<_> = (0..3).map(|i| v.partial(i)).collect();
    let hess: Vec<Vec<_>> = (0..3).map(|i| (0..3).map(|j| grad[i].partial(j)).collect()).collect();
    let y: Vec<_> = (0..3).map(|i| RadPoly::from_poly(0, MultiPoly::var(3, i))).collect();
    let one = Rational::from_integer(1.into());
    let r2 = RadPoly::radial(3, 3, 2, one.clone());
    let inv_r2 = RadPoly::radial(3, 3, -2, one.clone());
    let data = crate::kelvin::JetData { y: &y, r2: &r2, inv_r2: &inv_r2, v: &v, grad: &grad, hess: &hess };
    let m = kelvin_split(&data).m;

    let l = &s.lambda;
    let mut i2 = RadPoly::zero(3, 3);
    for i in 0..3 {
        for j in i + 1..3 {
            let minor = &(&m[i][i] * &m[j][j]) - &(&m[i][j] * &m[i][j]);
            i2 = &i2 + &minor.scale(&(l[i].clone() + l[j].clone()));
        }
    }
    let sigma2 = sigmas_of(l)[2].clone();
    let i3 = det3(&m).scale(&(sigma2 - one));
    let lap = v.laplacian();
    Ok(&(&lap + &i2.shift(1)) + &i3.shift(4))
}

/// Both sides of the linear factorisation for the special Lagrangian
/// branch with jet entries as indeterminates: the linear part of the
/// θ-free residual at `H = A + |y|^n N`, and `Π(1+λ_i²) |y|^{n+2} Δv`.
///
/// The linear part is assembled from coefficients obtained by exact
/// interpolation in every matrix direction; off-diagonal coefficients
/// must vanish (their `R_ii R_jj` weights are irrational).
pub fn slag_linear_part_symbolic(s: &Spectrum<Rational>) -> Result<(RadPoly<Rational>, RadPoly<Rational>)> {
    let n = s.n();
    let jet = SymbolicJet::<Rational>::new(n);
    let m = kelvin_split(&jet.data()).m;
    let p = BranchParams { a: Rational::from_integer(0.into()), b: Rational::from_integer(1.into()) };
    let one = Rational::from_integer(1.into());
    let mut lhs = RadPoly::zero(jet.v.n_vars(), n);
    for i in 0..n {
        for j in i..n {
            let mut e = SquareMatrix::zeros(n);
            e.set(i, j, one.clone());
            e.set(j, i, one.clone());
            let c = linear_coefficient_along(BranchKind::Slag, &p, &s.lambda, &e);
            if i != j {
                if c != Rational::from_integer(0.into()) {
                    return Err(Error::Mismatch(format!("off-diagonal coefficient ({i},{j}) is nonzero")));
                }
                continue;
            }
            let r2 = one.clone() + s.lambda[i].clone() * s.lambda[i].clone();
            lhs = &lhs + &m[i][i].scale(&(c * r2));
        }
    }
    let gamma = s.lambda.iter().fold(one.clone(), |acc, l| acc * (one.clone() + l.clone() * l.clone()));
    let rhs = jet.laplacian_v().scale(&gamma).shift(n as i32 + 2);
    Ok((lhs.shift(n as i32), rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use std::f64::consts::PI;

    #[test]
    fn slag_identity_hessian() {
        let b = PhaseBranch::slag(0.0);
        assert!(algebraic_residual(&b, &FMatrix::identity(3), 3.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn recip_zero_hessian() {
        let b = PhaseBranch::recip(0.0);
        let th = -3.0 * 2f64.sqrt();
        assert!(algebraic_residual(&b, &FMatrix::zeros(3), th).abs() < 1e-14);
    }

    #[test]
    fn notheta_vanishes_at_a() {
        let s = vec![int(1), int(2), int(3)];
        let p = BranchParams { a: int(0), b: int(1) };
        for kind in [BranchKind::Slag, BranchKind::Recip, BranchKind::Atan2, BranchKind::Log] {
            let h = SquareMatrix::from_diag(&s);
            assert_eq!(notheta_residual(kind, &p, &s, &h), int(0));
        }
    }

    #[test]
    fn notheta_linear_coefficients() {
        let p = BranchParams { a: int(0), b: int(1) };
        let mut e = SquareMatrix::zeros(3);
        e.set(0, 0, int(1));
        let s = vec![int(1), int(2), int(3)];
        assert_eq!(linear_coefficient_along(BranchKind::Slag, &p, &s, &e), int(50));
        let z = vec![int(0); 3];
        let pr = BranchParams { a: int(1), b: int(0) };
        assert_eq!(linear_coefficient_along(BranchKind::Recip, &pr, &z, &e), int(-1));
    }

    #[test]
    fn linear_factor_values() {
        let g = linear_part_factor(&PhaseBranch::slag(0.0), &[1.0, 2.0, 3.0]).unwrap();
        assert!((g - 100.0).abs() < 1e-12);
        assert!((linear_part_factor(&PhaseBranch::slag(0.0), &[0.0; 4]).unwrap() - 1.0).abs() < 1e-15);
        let r = linear_part_factor(&PhaseBranch::recip(0.0), &[0.0; 3]).unwrap();
        assert!((r + 2f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn constant_profile_residual() {
        let frame = KelvinFrame::centered(PhaseBranch::slag(0.0), vec![0.0; 3]).unwrap();
        let y = vec![0.5, 0.0, 0.0];
        let jet = Jet2::new(y, 1.0, vec![0.0; 3], FMatrix::zeros(3)).unwrap();
        let b = transformed_residual(&jet, &frame).unwrap();
        assert_eq!(b.laplace_term, 0.0);
        assert!((b.total + 2.0 * 0.5f64.powi(4)).abs() < 1e-15);
    }
}
