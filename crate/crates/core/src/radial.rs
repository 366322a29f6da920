//! Radially symmetric exterior solutions. For `u(x) = U(|x|)` the Hessian
//! has eigenvalues `U''` (once) and `U'/r` (n − 1 times), so
//! `F_τ(∇²u) = θ` becomes a scalar ODE for `U`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::expand::Sample;
use crate::kelvin::{BranchKind, PhaseBranch};
use crate::random::direction;

/// Solves `g(u'') = θ − (n−1) g(p/r)` for `u''`.
pub fn radial_rhs(branch: &PhaseBranch, n: usize, theta: f64, r: f64, p: f64) -> Result<f64> {
    let dom = |quantity: &str, value: f64| Error::Domain { quantity: quantity.into(), value, r };
    let mu = p / r;
    if branch.check_eigenvalue(2, mu).is_err() || !mu.is_finite() {
        return Err(dom("p/r", mu));
    }
    let target = theta - (n as f64 - 1.0) * branch.g(mu);
    let (a, b) = (branch.a, branch.b);
    let lambda = match branch.kind {
        BranchKind::Slag => {
            if target.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(dom("arctan target", target));
            }
            target.tan()
        }
        BranchKind::Atan2 => {
            let s = target * b / branch.root();
            if !(s > -std::f64::consts::FRAC_PI_2 && s < std::f64::consts::FRAC_PI_4) {
                return Err(dom("arctan target", s));
            }
            let t = s.tan();
            (a - b - t * (a + b)) / (t - 1.0)
        }
        BranchKind::Recip => {
            if !(target < 0.0) {
                return Err(dom("w", target));
            }
            -std::f64::consts::SQRT_2 / target - 1.0
        }
        BranchKind::Log => {
            let rho = (2.0 * b * target / branch.root()).exp();
            if !(rho > 0.0 && rho < 1.0) {
                return Err(dom("ratio", rho));
            }
            (rho * (a + b) - a + b) / (1.0 - rho)
        }
    };
    if branch.check_eigenvalue(1, lambda).is_err() || !lambda.is_finite() {
        return Err(dom("u''", lambda));
    }
    Ok(lambda)
}

/// `F_τ` at the radial eigenvalues.
pub fn radial_operator(branch: &PhaseBranch, n: usize, upp: f64, r: f64, p: f64) -> f64 {
    branch.g(upp) + (n as f64 - 1.0) * branch.g(p / r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    /// `u'(r)`.
    pub p: f64,
    /// `|F_τ(u'', u'/r) − θ|` with `u''` from finite differences of `p`.
    pub conservation_residual: f64,
}

/// Integration stopped at `radius`; `partial` holds the nodes reached.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFailure {
    pub partial: Vec<RadialState>,
    pub radius: f64,
    pub error: Error,
}

impl std::fmt::Display for RadialFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "integration failed at r = {}: {}", self.radius, self.error)
    }
}

impl std::error::Error for RadialFailure {}

/// Classical RK4 on `u' = p`, `p' = radial_rhs` from `r = 1` to `r_max`
/// with nodes `r_i = 1 + i·step`.
pub fn integrate_exterior(
    branch: &PhaseBranch,
    n: usize,
    theta: f64,
    u1: f64,
    p1: f64,
    r_max: f64,
    step: f64,
) -> std::result::Result<Vec<RadialState>, RadialFailure> {
    let fail = |nodes: &[(f64, f64, f64)], radius: f64, error: Error| RadialFailure {
        partial: with_residuals(branch, n, theta, nodes, step),
        radius,
        error,
    };
    if !(step > 0.0) || !(r_max >= 1.0) || n < 2 {
        let e = Error::Dimension(format!("need step > 0, r_max >= 1, n >= 2 (got {step}, {r_max}, {n})"));
        return Err(fail(&[], 1.0, e));
    }
    let steps = ((r_max - 1.0) / step).round() as usize;
    let f = |r: f64, p: f64| radial_rhs(branch, n, theta, r, p);
    let mut nodes = Vec::with_capacity(steps + 1);
    if let Err(e) = f(1.0, p1) {
        return Err(fail(&nodes, 1.0, e));
    }
    let (mut u, mut p) = (u1, p1);
    nodes.push((1.0, u, p));
    for i in 0..steps {
        let r = 1.0 + i as f64 * step;
        let h = step;
        let stage = || -> Result<(f64, f64)> {
            let k1p = f(r, p)?;
            let k1u = p;
            let k2p = f(r + h / 2.0, p + h / 2.0 * k1p)?;
            let k2u = p + h / 2.0 * k1p;
            let k3p = f(r + h / 2.0, p + h / 2.0 * k2p)?;
            let k3u = p + h / 2.0 * k2p;
            let k4p = f(r + h, p + h * k3p)?;
            let k4u = p + h * k3p;
            Ok((
                u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
                p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            ))
        };
        match stage() {
            Ok((nu, np)) => {
                u = nu;
                p = np;
                nodes.push((1.0 + (i + 1) as f64 * step, u, p));
            }
            Err(e) => return Err(fail(&nodes, r, e)),
        }
    }
    Ok(with_residuals(branch, n, theta, &nodes, step))
}

/// Fourth-order differences of `p` (one-sided at the ends).
fn derivative(ps: &[f64], h: f64) -> Vec<f64> {
    let m = ps.len();
    if m < 5 {
        return Vec::new();
    }
    let mut d = vec![0.0; m];
    for i in 2..m - 2 {
        d[i] = (-ps[i + 2] + 8.0 * ps[i + 1] - 8.0 * ps[i - 1] + ps[i - 2]) / (12.0 * h);
    }
    let fwd0 = |q: &[f64]| (-25.0 * q[0] + 48.0 * q[1] - 36.0 * q[2] + 16.0 * q[3] - 3.0 * q[4]) / (12.0 * h);
    let fwd1 = |q: &[f64]| (-3.0 * q[0] - 10.0 * q[1] + 18.0 * q[2] - 6.0 * q[3] + q[4]) / (12.0 * h);
    d[0] = fwd0(&ps[..5]);
    d[1] = fwd1(&ps[..5]);
    let rev: Vec<f64> = ps[m - 5..].iter().rev().copied().collect();
    d[m - 1] = -fwd0(&rev);
    d[m - 2] = -fwd1(&rev);
    d
}

fn with_residuals(branch: &PhaseBranch, n: usize, theta: f64, nodes: &[(f64, f64, f64)], h: f64) -> Vec<RadialState> {
    let ps: Vec<f64> = nodes.iter().map(|t| t.2).collect();
    let d = derivative(&ps, h);
    nodes
        .iter()
        .enumerate()
        .map(|(i, &(r, u, p))| {
            let upp = match d.get(i) {
                Some(&v) => v,
                None => radial_rhs(branch, n, theta, r, p).unwrap_or(f64::NAN),
            };
            let res = (radial_operator(branch, n, upp, r, p) - theta).abs();
            RadialState { r, u, p, conservation_residual: if res.is_nan() { f64::INFINITY } else { res } }
        })
        .collect()
}

/// Full-field samples `u(x) = U(|x − center|)` taken at trajectory nodes
/// inside each annulus, with random directions.
pub fn radial_field_samples(
    traj: &[RadialState],
    center: &[f64],
    annuli: &[(f64, f64)],
    per_annulus: usize,
    rng: &mut impl Rng,
) -> Vec<Sample> {
    let n = center.len();
    let mut out = Vec::with_capacity(annuli.len() * per_annulus);
    for &(lo, hi) in annuli {
        let first = traj.partition_point(|s| s.r < lo);
        let last = traj.partition_point(|s| s.r <= hi);
        if first >= last {
            continue;
        }
        for _ in 0..per_annulus {
            let st = &traj[rng.gen_range(first..last)];
            let dir = direction(rng, n);
            let x = (0..n).map(|i| center[i] + st.r * dir[i]).collect();
            out.push(Sample { x, u: st.u });
        }
    }
    out
}

/// Geometric annuli covering `[r_lo, r_hi]`.
pub fn geometric_annuli(r_lo: f64, r_hi: f64, count: usize) -> Vec<(f64, f64)> {
    let q = (r_hi / r_lo).powf(1.0 / count as f64);
    (0..count).map(|i| (r_lo * q.powi(i as i32), r_lo * q.powi(i as i32 + 1))).collect()
}
