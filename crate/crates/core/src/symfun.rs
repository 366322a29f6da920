//! Elementary symmetric functions and the exact combinatorial identities
//! behind the linear part of the transformed equations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{interpolate_at_integers, SquareMatrix};
use crate::scalar::{binomial, format_rational, Scalar};
use crate::Rational;

/// Eigenvalues of the diagonal matrix `A = diag(λ_1, …, λ_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<S> {
    pub lambda: Vec<S>,
}

impl<S: Scalar> Spectrum<S> {
    pub fn new(lambda: Vec<S>) -> Self {
        Spectrum { lambda }
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn matrix(&self) -> SquareMatrix<S> {
        SquareMatrix::from_diag(&self.lambda)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.lambda.iter().map(|x| x.to_f64_lossy()).collect()
    }

    /// `A_(i)` (value 0 at 0-based `i`) or `A^(i)` (value 1).
    pub fn with_entry(&self, i: usize, v: S) -> Self {
        let mut l = self.lambda.clone();
        l[i] = v;
        Spectrum { lambda: l }
    }

    fn without(&self, i: usize) -> Vec<S> {
        self.lambda.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect()
    }
}

/// Branch constants `a = cot τ`, `b = √|cot² τ − 1|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchParams<S> {
    pub a: S,
    pub b: S,
}

/// `[σ_0, …, σ_n]` of a list of numbers.
pub fn sigmas_of<S: Scalar>(vals: &[S]) -> Vec<S> {
    let mut sig = vec![S::one()];
    for v in vals {
        sig.push(S::zero());
        for j in (1..sig.len()).rev() {
            sig[j] = sig[j].clone() + v.clone() * sig[j - 1].clone();
        }
    }
    sig
}

fn pick<S: Scalar>(sig: &[S], k: i64) -> S {
    if k < 0 || k as usize >= sig.len() {
        S::zero()
    } else {
        sig[k as usize].clone()
    }
}

/// `σ_k(λ)`; 1 for `k = 0`, 0 for `k < 0` or `k > n`.
pub fn sigma<S: Scalar>(k: i64, s: &Spectrum<S>) -> S {
    pick(&sigmas_of(&s.lambda), k)
}

/// `σ_k` with `λ_i` deleted (1-based `i`).
pub fn sigma_hat<S: Scalar>(k: i64, i: usize, s: &Spectrum<S>) -> Result<S> {
    check_index(i, s.n())?;
    Ok(pick(&sigmas_of(&s.without(i - 1)), k))
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::Index { index: i, n });
    }
    Ok(())
}

/// `σ̄_k = Σ_{|S|=k} Π_{j∈S}(λ_j+a−b) Π_{j∉S}(λ_j+a+b)`.
///
/// Evaluated as the coefficient of `t^k` in `Π_j ((λ_j+a+b) + t(λ_j+a−b))`,
/// which expands to exactly that subset sum without any division.
pub fn sigma_bar<S: Scalar>(k: i64, s: &Spectrum<S>, p: &BranchParams<S>) -> S {
    pick(&sigma_bars(s, p), k)
}

/// `[σ̄_0, …, σ̄_n]`.
pub fn sigma_bars<S: Scalar>(s: &Spectrum<S>, p: &BranchParams<S>) -> Vec<S> {
    let mut coeffs = vec![S::one()];
    for l in &s.lambda {
        let plus = l.clone() + p.a.clone() + p.b.clone();
        let minus = l.clone() + p.a.clone() - p.b.clone();
        let mut next = vec![S::zero(); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j] = next[j].clone() + c.clone() * plus.clone();
            next[j + 1] = next[j + 1].clone() + c.clone() * minus.clone();
        }
        coeffs = next;
    }
    coeffs
}

/// Weight of `σ_m` in `σ̄_k`:
/// `Σ_j C(m,j) C(n−m,k−j) (a−b)^{k−j} (a+b)^{n−m−k+j}`.
pub fn sigma_bar_weight<S: Scalar>(n: usize, k: i64, m: i64, p: &BranchParams<S>) -> S {
    let (n, mut acc) = (n as i64, S::zero());
    let amb = p.a.clone() - p.b.clone();
    let apb = p.a.clone() + p.b.clone();
    for j in 0..=m {
        let c = binomial(m, j) * binomial(n - m, k - j);
        if c == 0 {
            continue;
        }
        let e1 = (k - j) as u32;
        let e2 = (n - m - k + j) as u32;
        acc = acc + S::from_int(c) * amb.pow_u(e1) * apb.pow_u(e2);
    }
    acc
}

/// `[σ̄_0(H), …, σ̄_n(H)]` of a (not necessarily diagonal) matrix, through
/// its ordinary symmetric functions.
pub fn sigma_bars_of_matrix<S: Scalar>(h: &SquareMatrix<S>, p: &BranchParams<S>) -> Vec<S> {
    let n = h.n();
    let sig = h.sigmas();
    (0..=n as i64)
        .map(|k| {
            (0..=n as i64).fold(S::zero(), |acc, m| {
                acc + sigma_bar_weight(n, k, m, p) * sig[m as usize].clone()
            })
        })
        .collect()
}

/// Coefficient of `t` in `σ_k(A + tB)`, cross-checked against
/// `Σ_i σ̂_{k−1,i}(A) B_ii`.
pub fn linear_coefficient_sigma<S: Scalar>(k: i64, s: &Spectrum<S>, b: &SquareMatrix<S>) -> Result<S> {
    let n = s.n();
    if b.n() != n {
        return Err(Error::Dimension(format!("B is {}x{}, spectrum has n = {n}", b.n(), b.n())));
    }
    if !b.is_symmetric() {
        return Err(Error::Dimension("B must be symmetric".into()));
    }
    let a = s.matrix();
    let nodes = k.clamp(0, n as i64) as usize + 1;
    let values: Vec<S> = (0..nodes)
        .map(|t| a.add(&b.scale(&S::from_int(t as i64))).sigma(k))
        .collect();
    let coeffs = interpolate_at_integers(&values);
    let interpolated = coeffs.get(1).cloned().unwrap_or_else(S::zero);

    let mut by_lemma = S::zero();
    for i in 1..=n {
        by_lemma = by_lemma + sigma_hat(k - 1, i, s)? * b.get(i - 1, i - 1).clone();
    }
    if interpolated != by_lemma {
        return Err(Error::Mismatch(format!(
            "t-coefficient {interpolated:?} differs from diagonal formula {by_lemma:?}"
        )));
    }
    Ok(interpolated)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lemma {
    L32,
    L33,
    L34,
}

impl std::str::FromStr for Lemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "L32" => Ok(Lemma::L32),
            "L33" => Ok(Lemma::L33),
            "L34" => Ok(Lemma::L34),
            _ => Err(Error::Parse(format!("unknown lemma {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactReport<S> {
    pub lemma: Lemma,
    pub lhs: S,
    pub rhs: S,
    pub equal: bool,
}

impl ExactReport<Rational> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lemma": format!("{:?}", self.lemma),
            "lhs": format_rational(&self.lhs),
            "rhs": format_rational(&self.rhs),
            "equal": self.equal,
        })
    }
}

/// Alternating sums `(E, O)` with `E + iO = Π(1 + iλ)` read off a list of
/// symmetric functions: `E = Σ(−1)^k s_{2k}`, `O = Σ(−1)^k s_{2k+1}`.
pub fn even_odd<S: Scalar>(sig: &[S]) -> (S, S) {
    let (mut e, mut o) = (S::zero(), S::zero());
    for (k, v) in sig.iter().enumerate() {
        let sign = if (k / 2) % 2 == 0 { v.clone() } else { -v.clone() };
        if k % 2 == 0 {
            e = e + sign;
        } else {
            o = o + sign;
        }
    }
    (e, o)
}

/// Evaluates both sides of one of the combinatorial identities.
///
/// `aux` is the 1-based index `i` for L32/L34 and the degree `k` for L33.
pub fn verify_identity<S: Scalar>(
    lemma: Lemma,
    s: &Spectrum<S>,
    p: Option<&BranchParams<S>>,
    aux: Option<i64>,
) -> Result<ExactReport<S>> {
    let n = s.n();
    let aux = aux.ok_or_else(|| Error::Arity(format!("{lemma:?} needs an index or degree")))?;
    let params = || p.ok_or_else(|| Error::Arity(format!("{lemma:?} needs (a, b)")));
    let index = || -> Result<usize> {
        if aux < 1 {
            return Err(Error::Index { index: 0, n });
        }
        check_index(aux as usize, n)?;
        Ok(aux as usize)
    };
    let need_three = || -> Result<()> {
        if n < 3 {
            return Err(Error::Dimension(format!("{lemma:?} is stated for n >= 3, got {n}")));
        }
        Ok(())
    };

    let (lhs, rhs) = match lemma {
        Lemma::L32 => {
            need_three()?;
            let i = index()?;
            let (e, o) = even_odd(&sigmas_of(&s.lambda));
            // Hatted sums: σ̂_{2k,i} in the odd slot, σ̂_{2k−1,i} in the even one.
            let hat = sigmas_of(&s.without(i - 1));
            let (mut o_hat, mut e_hat) = (S::zero(), S::zero());
            for k in 0..=n as i64 {
                let sign = |v: S| if k % 2 == 0 { v } else { -v };
                if 2 * k + 1 <= n as i64 {
                    o_hat = o_hat + sign(pick(&hat, 2 * k));
                }
                if 2 * k <= n as i64 {
                    e_hat = e_hat + sign(pick(&hat, 2 * k - 1));
                }
            }
            let lhs = e * o_hat - o * e_hat;
            let rhs = s
                .without(i - 1)
                .into_iter()
                .fold(S::one(), |acc, l| acc * (S::one() + l.clone() * l));
            (lhs, rhs)
        }
        Lemma::L33 => {
            let p = params()?;
            let lhs = sigma_bar(aux, s, p);
            let sig = sigmas_of(&s.lambda);
            let rhs = (0..=n as i64).fold(S::zero(), |acc, m| {
                acc + sigma_bar_weight(n, aux, m, p) * sig[m as usize].clone()
            });
            (lhs, rhs)
        }
        Lemma::L34 => {
            need_three()?;
            let p = params()?;
            let i = index()?;
            let (e, o) = even_odd(&sigma_bars(s, p));
            let hat = sigmas_of(&s.without(i - 1));
            let x = |k: i64| -> S {
                (0..=n as i64).fold(S::zero(), |acc, m| {
                    acc + sigma_bar_weight(n, k, m, p) * pick(&hat, m - 1)
                })
            };
            let xs: Vec<S> = (0..=n as i64).map(x).collect();
            let (x_even, x_odd) = even_odd(&xs);
            let lhs = e * x_odd - o * x_even;
            let rhs = s.without(i - 1).into_iter().fold(
                S::from_int(1 << n) * p.b.clone(),
                |acc, l| {
                    let t = l + p.a.clone();
                    acc * (t.clone() * t + p.b.clone() * p.b.clone())
                },
            );
            (lhs, rhs)
        }
    };
    let equal = lhs == rhs;
    Ok(ExactReport { lemma, lhs, rhs, equal })
}
