//! The modified Kelvin transform `y = Rx/|Rx|²`, the branch scaling
//! matrices and the second-order Kelvin matrices `M`, `N`, `K`, `L`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exactalg::{MultiPoly, RadPoly};
use crate::scalar::Scalar;
use crate::symfun::BranchParams;
use crate::FMatrix;

const BRANCH_TOL: f64 = 1e-12;

/// Which branch of the operator family `F_τ` is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchKind {
    /// `τ ∈ (0, π/4)`, logarithmic form.
    Log,
    /// `τ = π/4`, reciprocal form.
    Recip,
    /// `τ ∈ (π/4, π/2)`, arctangent of a Möbius ratio.
    Atan2,
    /// `τ = π/2`, the special Lagrangian equation.
    Slag,
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BranchKind::Log => "LOG",
            BranchKind::Recip => "RECIP",
            BranchKind::Atan2 => "ATAN2",
            BranchKind::Slag => "SLAG",
        };
        f.write_str(s)
    }
}

impl FromStr for BranchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(BranchKind::Log),
            "recip" => Ok(BranchKind::Recip),
            "atan2" => Ok(BranchKind::Atan2),
            "slag" => Ok(BranchKind::Slag),
            _ => Err(Error::Parse(format!("unknown branch {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBranch {
    pub kind: BranchKind,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

fn ab_from_tau(tau: f64) -> (f64, f64) {
    let a = if (tau - FRAC_PI_2).abs() < BRANCH_TOL { 0.0 } else { 1.0 / tau.tan() };
    let b = (a * a - 1.0).abs().sqrt();
    (a, b)
}

impl PhaseBranch {
    pub fn new(kind: BranchKind, tau: f64, theta: f64) -> Result<Self> {
        let ok = match kind {
            BranchKind::Log => tau > 0.0 && tau < FRAC_PI_4,
            BranchKind::Recip => (tau - FRAC_PI_4).abs() < BRANCH_TOL,
            BranchKind::Atan2 => tau > FRAC_PI_4 && tau < FRAC_PI_2,
            BranchKind::Slag => (tau - FRAC_PI_2).abs() < BRANCH_TOL,
        };
        if !ok || !theta.is_finite() {
            return Err(Error::Dimension(format!("tau = {tau} is not in the {kind} interval")));
        }
        let (mut a, mut b) = ab_from_tau(tau);
        match kind {
            BranchKind::Recip => (a, b) = (1.0, 0.0),
            BranchKind::Slag => (a, b) = (0.0, 1.0),
            _ => {}
        }
        Ok(PhaseBranch { kind, tau, a, b, theta })
    }

    /// Picks the branch from `τ ∈ (0, π/2]`.
    pub fn from_tau(tau: f64, theta: f64) -> Result<Self> {
        let kind = if (tau - FRAC_PI_2).abs() < BRANCH_TOL {
            BranchKind::Slag
        } else if (tau - FRAC_PI_4).abs() < BRANCH_TOL {
            BranchKind::Recip
        } else if tau < FRAC_PI_4 {
            BranchKind::Log
        } else {
            BranchKind::Atan2
        };
        Self::new(kind, tau, theta)
    }

    /// Branch with `cot τ = a` (so `a ≥ 0`).
    pub fn from_a(a: f64, theta: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::Dimension(format!("a = cot(tau) must be >= 0, got {a}")));
        }
        Self::from_tau((1.0f64).atan2(a), theta)
    }

    pub fn slag(theta: f64) -> Self {
        Self::new(BranchKind::Slag, FRAC_PI_2, theta).expect("valid branch")
    }

    pub fn recip(theta: f64) -> Self {
        Self::new(BranchKind::Recip, FRAC_PI_4, theta).expect("valid branch")
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        PhaseBranch { theta, ..self.clone() }
    }

    pub fn params(&self) -> BranchParams<f64> {
        BranchParams { a: self.a, b: self.b }
    }

    /// Checks that the stored `(a, b)` match `τ`.
    pub fn is_consistent(&self) -> bool {
        let (a, b) = ab_from_tau(self.tau);
        (a - self.a).abs() < 1e-12 && (b - self.b).abs() < 1e-12
    }

    /// `√(a² + 1)`.
    pub fn root(&self) -> f64 {
        (self.a * self.a + 1.0).sqrt()
    }

    /// Per-eigenvalue map `g` with `F_τ(H) = Σ_j g(λ_j(H))`.
    pub fn g(&self, l: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match self.kind {
            BranchKind::Slag => l.atan(),
            BranchKind::Recip => -std::f64::consts::SQRT_2 / (1.0 + l),
            BranchKind::Atan2 => self.root() / b * ((l + a - b) / (l + a + b)).atan(),
            BranchKind::Log => self.root() / (2.0 * b) * ((l + a - b) / (l + a + b)).ln(),
        }
    }

    /// `F_τ` on a list of eigenvalues.
    pub fn operator(&self, eigs: &[f64]) -> f64 {
        eigs.iter().map(|&l| self.g(l)).sum()
    }

    /// Admissibility of one eigenvalue, with the violated inequality.
    pub fn check_eigenvalue(&self, i: usize, l: f64) -> Result<()> {
        let (a, b) = (self.a, self.b);
        let (ok, cond) = match self.kind {
            BranchKind::Slag => (l.is_finite(), "lambda finite".to_string()),
            BranchKind::Log => (l > -a + b, format!("lambda > -a + b = {}", -a + b)),
            BranchKind::Recip => (l > -1.0, "lambda > -1".to_string()),
            BranchKind::Atan2 => (l > -(a + b), format!("lambda > -(a + b) = {}", -(a + b))),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Admissibility { index: i, condition: format!("{cond} (lambda = {l})") })
        }
    }
}

/// Diagonal of the branch scaling matrix `R`.
pub fn scaling_matrix(branch: &PhaseBranch, lambda: &[f64]) -> Result<Vec<f64>> {
    let (a, b) = (branch.a, branch.b);
    let q = (a * a + 1.0).powf(-0.25);
    lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            branch.check_eigenvalue(i + 1, l)?;
            Ok(match branch.kind {
                BranchKind::Slag => (1.0 + l * l).sqrt(),
                BranchKind::Log => q * ((l + a).powi(2) - b * b).sqrt(),
                BranchKind::Recip => 2f64.powf(-0.25) * (1.0 + l),
                BranchKind::Atan2 => q * ((l + a).powi(2) + b * b).sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Forward: `y = Rx/|Rx|²`. Backward: `x = R⁻¹y/|y|²`.
pub fn kelvin_map(p: &[f64], r: &[f64], dir: Direction) -> Result<Vec<f64>> {
    assert_eq!(p.len(), r.len());
    if p.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroPoint);
    }
    Ok(match dir {
        Direction::Forward => {
            let rx: Vec<f64> = p.iter().zip(r).map(|(x, ri)| x * ri).collect();
            let n2: f64 = rx.iter().map(|v| v * v).sum();
            rx.into_iter().map(|v| v / n2).collect()
        }
        Direction::Backward => {
            let n2: f64 = p.iter().map(|v| v * v).sum();
            p.iter().zip(r).map(|(y, ri)| y / ri / n2).collect()
        }
    })
}

/// Data `(A, b, c, R)` of `u = ½xᵀAx + b·x + c + |y|^{n−2} v(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KelvinFrame {
    pub n: usize,
    pub lambda: Vec<f64>,
    pub branch: PhaseBranch,
    pub r: Vec<f64>,
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl KelvinFrame {
    pub fn new(branch: PhaseBranch, lambda: Vec<f64>, linear: Vec<f64>, constant: f64) -> Result<Self> {
        let n = lambda.len();
        if linear.len() != n {
            return Err(Error::Dimension(format!("b has length {}, expected {n}", linear.len())));
        }
        let r = scaling_matrix(&branch, &lambda)?;
        Ok(KelvinFrame { n, lambda, branch, r, linear, constant })
    }

    /// Frame with `b = 0`, `c = 0`.
    pub fn centered(branch: PhaseBranch, lambda: Vec<f64>) -> Result<Self> {
        let n = lambda.len();
        Self::new(branch, lambda, vec![0.0; n], 0.0)
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut q = self.constant;
        for i in 0..self.n {
            q += 0.5 * self.lambda[i] * x[i] * x[i] + self.linear[i] * x[i];
        }
        q
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        kelvin_map(x, &self.r, Direction::Forward)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `u(x) = ½xᵀAx + b·x + c + |y|^{n−2} v(y)` with `y = Rx/|Rx|²`.
pub fn u_from_v(frame: &KelvinFrame, v: impl Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
    let y = frame.forward(x)?;
    Ok(frame.quadratic(x) + norm(&y).powi(frame.n as i32 - 2) * v(&y))
}

/// Second-order jet `(v, ∇v, ∇²v)` at a point of the punctured unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub y: Vec<f64>,
    pub v: f64,
    pub grad: Vec<f64>,
    pub hess: FMatrix,
}

impl Jet2 {
    pub fn new(y: Vec<f64>, v: f64, grad: Vec<f64>, hess: FMatrix) -> Result<Self> {
        let n = y.len();
        if grad.len() != n || hess.n() != n {
            return Err(Error::Dimension("jet components must share the dimension of y".into()));
        }
        let r = norm(&y);
        if r == 0.0 {
            return Err(Error::ZeroPoint);
        }
        if r >= 1.0 {
            return Err(Error::Dimension(format!("|y| = {r} is outside the unit ball")));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (*hess.get(i, j), *hess.get(j, i));
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::Dimension("Hessian is not symmetric".into()));
                }
            }
        }
        Ok(Jet2 { y, v, grad, hess })
    }

    /// Exact jet of a polynomial.
    pub fn of_poly<S: Scalar>(p: &MultiPoly<S>, y: &[f64]) -> Result<Self> {
        let n = y.len();
        let grad: Vec<MultiPoly<S>> = (0..n).map(|i| p.partial(i)).collect();
        let hess = FMatrix::from_fn(n, |i, j| grad[i].partial(j).eval_f64(y));
        Jet2::new(y.to_vec(), p.eval_f64(y), grad.iter().map(|g| g.eval_f64(y)).collect(), hess)
    }
}

/// Ring operations needed to evaluate the Kelvin matrices, so the same
/// formula serves numeric jets and symbolic ones.
pub trait JetRing: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale_int(&self, c: i64) -> Self;
}

impl JetRing for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale_int(&self, c: i64) -> Self {
        self * c as f64
    }
}

impl<S: Scalar> JetRing for RadPoly<S> {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale_int(&self, c: i64) -> Self {
        RadPoly::scale_int(self, c)
    }
}

/// Inputs of the Kelvin matrix formula over a ring `T`.
pub struct JetData<'a, T> {
    pub y: &'a [T],
    /// `|y|²`.
    pub r2: &'a T,
    /// `|y|⁻²`.
    pub inv_r2: &'a T,
    pub v: &'a T,
    pub grad: &'a [T],
    pub hess: &'a [Vec<T>],
}

/// `M = K + L·yyᵀ/|y|²`.
pub struct MSplit<T> {
    pub m: Vec<Vec<T>>,
    pub k: Vec<Vec<T>>,
    pub l: T,
}

/// Kelvin matrices of `w(x) = |y|^{n−2} v(y)`, characterised by
/// `∂²w/∂x_i∂x_j = R_ii R_jj |y|^n M_ij`.
///
/// `L = n(n−2)v + 4n⟨y,∇v⟩ + 4yᵀ∇²v y` and
/// `K_ij = −((n−2)v + 2⟨y,∇v⟩)δ_ij − n(y_i v_j + y_j v_i)
///         − 2(y_i (∇²v y)_j + y_j (∇²v y)_i) + |y|² v_ij`.
pub fn kelvin_split<T: JetRing>(d: &JetData<'_, T>) -> MSplit<T> {
    let n = d.y.len();
    let ni = n as i64;
    let dot = |a: &[T], b: &[T]| -> T {
        let mut acc = a[0].mul(&b[0]);
        for i in 1..n {
            acc = acc.add(&a[i].mul(&b[i]));
        }
        acc
    };
    let y_grad = dot(d.y, d.grad);
    let hy: Vec<T> = (0..n).map(|i| dot(&d.hess[i], d.y)).collect();
    let yhy = dot(d.y, &hy);
    let l = d.v.scale_int(ni * (ni - 2)).add(&y_grad.scale_int(4 * ni)).add(&yhy.scale_int(4));
    let diag = d.v.scale_int(ni - 2).add(&y_grad.scale_int(2));
    let mut k = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for i in 0..n {
        let mut krow = Vec::with_capacity(n);
        let mut mrow = Vec::with_capacity(n);
        for j in 0..n {
            let sym1 = d.y[i].mul(&d.grad[j]).add(&d.y[j].mul(&d.grad[i]));
            let sym2 = d.y[i].mul(&hy[j]).add(&d.y[j].mul(&hy[i]));
            let mut kij = d.r2.mul(&d.hess[i][j]).sub(&sym1.scale_int(ni)).sub(&sym2.scale_int(2));
            if i == j {
                kij = kij.sub(&diag);
            }
            let mij = kij.add(&l.mul(&d.y[i].mul(&d.y[j])).mul(d.inv_r2));
            krow.push(kij);
            mrow.push(mij);
        }
        k.push(krow);
        m.push(mrow);
    }
    MSplit { m, k, l }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mnkl {
    pub m: FMatrix,
    pub n: FMatrix,
    pub k: FMatrix,
    pub l: f64,
}

pub fn matrices_mnkl(jet: &Jet2, frame: &KelvinFrame) -> Result<Mnkl> {
    let n = jet.y.len();
    if n != frame.n {
        return Err(Error::Dimension(format!("jet has n = {n}, frame has n = {}", frame.n)));
    }
    let r2: f64 = jet.y.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::ZeroPoint);
    }
    let inv = 1.0 / r2;
    let hess = jet.hess.rows();
    let split = kelvin_split(&JetData { y: &jet.y, r2: &r2, inv_r2: &inv, v: &jet.v, grad: &jet.grad, hess: &hess });
    let m = FMatrix::from_rows(split.m).expect("square");
    let k = FMatrix::from_rows(split.k).expect("square");
    let nm = FMatrix::from_fn(n, |i, j| frame.r[i] * frame.r[j] * m.get(i, j));
    Ok(Mnkl { m, n: nm, k, l: split.l })
}

/// A jet whose entries are independent indeterminates.
///
/// Variables `0..n` are `y`; then `v`, the gradient, and the upper
/// triangle of the Hessian. `|y|` is taken over the first `n` only.
pub struct SymbolicJet<S> {
    pub y: Vec<RadPoly<S>>,
    pub v: RadPoly<S>,
    pub grad: Vec<RadPoly<S>>,
    pub hess: Vec<Vec<RadPoly<S>>>,
    pub r2: RadPoly<S>,
    pub inv_r2: RadPoly<S>,
}

impl<S: Scalar> SymbolicJet<S> {
    pub fn new(n: usize) -> Self {
        let n_vars = 2 * n + 1 + n * (n + 1) / 2;
        let var = |i: usize| RadPoly::from_slot(n, 0, MultiPoly::var(n_vars, i));
        let y: Vec<_> = (0..n).map(var).collect();
        let v = var(n);
        let grad: Vec<_> = (0..n).map(|i| var(n + 1 + i)).collect();
        let mut idx = 2 * n + 1;
        let mut hess = vec![vec![RadPoly::zero(n_vars, n); n]; n];
        for i in 0..n {
            for j in i..n {
                hess[i][j] = var(idx);
                hess[j][i] = var(idx);
                idx += 1;
            }
        }
        let r2 = RadPoly::radial(n_vars, n, 2, S::one());
        let inv_r2 = RadPoly::radial(n_vars, n, -2, S::one());
        SymbolicJet { y, v, grad, hess, r2, inv_r2 }
    }

    pub fn data(&self) -> JetData<'_, RadPoly<S>> {
        JetData { y: &self.y, r2: &self.r2, inv_r2: &self.inv_r2, v: &self.v, grad: &self.grad, hess: &self.hess }
    }

    pub fn laplacian_v(&self) -> RadPoly<S> {
        let mut acc = self.hess[0][0].clone();
        for i in 1..self.y.len() {
            acc = &acc + &self.hess[i][i];
        }
        acc
    }
}

/// Central-difference Hessian.
pub fn fd_hessian(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64], h: f64) -> Result<FMatrix> {
    let n = x.len();
    let at = |di: &[(usize, f64)]| -> Result<f64> {
        let mut p = x.to_vec();
        for &(i, s) in di {
            p[i] += s;
        }
        f(&p)
    };
    let f0 = f(x)?;
    let mut out = FMatrix::zeros(n);
    for i in 0..n {
        let d2 = (at(&[(i, h)])? - 2.0 * f0 + at(&[(i, -h)])?) / (h * h);
        out.set(i, i, d2);
        for j in 0..i {
            let d = (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                + at(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            out.set(i, j, d);
            out.set(j, i, d);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianReport {
    pub samples: usize,
    pub max_abs: f64,
    pub max_rel: f64,
}

/// Compares a finite-difference Hessian of `u` with `A + |y|^n N(v)`.
///
/// The relative error of a sample is the largest entry deviation divided
/// by the largest entry of the exact Hessian.
pub fn hessian_identity_check<S: Scalar>(
    frame: &KelvinFrame,
    v: &MultiPoly<S>,
    samples: &[Vec<f64>],
    fd_step: f64,
) -> Result<HessianReport> {
    let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
    for x in samples {
        let fd = fd_hessian(|p| u_from_v(frame, |y| v.eval_f64(y), p), x, fd_step)?;
        let y = frame.forward(x)?;
        let jet = Jet2::of_poly(v, &y)?;
        let nm = matrices_mnkl(&jet, frame)?.n;
        let scale = norm(&y).powi(frame.n as i32);
        let mut dev = 0.0f64;
        let mut size = 0.0f64;
        for i in 0..frame.n {
            for j in 0..frame.n {
                let a = if i == j { frame.lambda[i] } else { 0.0 };
                let exact = a + scale * nm.get(i, j);
                dev = dev.max((fd.get(i, j) - exact).abs());
                size = size.max(exact.abs());
            }
        }
        max_abs = max_abs.max(dev);
        max_rel = max_rel.max(if size > 0.0 { dev / size } else { dev });
    }
    Ok(HessianReport { samples: samples.len(), max_abs, max_rel })
}
