use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Exponent = Vec<u32>;

/// Sparse multivariate polynomial. Zero coefficients are never stored, so
/// structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<S> {
    n_vars: usize,
    terms: BTreeMap<Exponent, S>,
}

impl<S: Scalar> MultiPoly<S> {
    pub fn zero(n_vars: usize) -> Self {
        MultiPoly { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, c: S) -> Self {
        Self::monomial(n_vars, vec![0; n_vars], c)
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, S::one())
    }

    /// The coordinate function `y_i` (0-based).
    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = 1;
        Self::monomial(n_vars, e, S::one())
    }

    pub fn monomial(n_vars: usize, exp: Exponent, c: S) -> Self {
        assert_eq!(exp.len(), n_vars, "exponent length must equal n_vars");
        let mut p = Self::zero(n_vars);
        p.add_term(exp, c);
        p
    }

    /// `y_0² + … + y_{dim-1}²`.
    pub fn r2(n_vars: usize, dim: usize) -> Self {
        let mut p = Self::zero(n_vars);
        for i in 0..dim {
            let mut e = vec![0; n_vars];
            e[i] = 2;
            p.add_term(e, S::one());
        }
        p
    }

    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (Exponent, S)>) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        for (e, c) in terms {
            if e.len() != n_vars {
                return Err(Error::Dimension(format!(
                    "exponent {e:?} has length {}, expected {n_vars}",
                    e.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, exp: Exponent, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(old) => {
                let sum = old.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *old = sum;
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32]) -> S {
        self.terms.get(exp).cloned().unwrap_or_else(S::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> S {
        self.coeff(&vec![0; self.n_vars])
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree counted only in the first `dim` variables.
    pub fn partial_degree(exp: &[u32], dim: usize) -> u32 {
        exp[..dim].iter().sum()
    }

    pub fn homogeneous_component(&self, degree: u32) -> Self {
        self.homogeneous_component_in(degree, self.n_vars)
    }

    /// Terms whose degree in the first `dim` variables equals `degree`.
    pub fn homogeneous_component_in(&self, degree: u32, dim: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| Self::partial_degree(e, dim) == degree)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        MultiPoly { n_vars: self.n_vars, terms }
    }

    /// Split by degree in the first `dim` variables.
    pub fn homogeneous_parts_in(&self, dim: usize) -> BTreeMap<u32, Self> {
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (e, c) in &self.terms {
            out.entry(Self::partial_degree(e, dim))
                .or_insert_with(|| Self::zero(self.n_vars))
                .terms
                .insert(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.n_vars);
        }
        let terms = self.terms.iter().map(|(e, a)| (e.clone(), a.clone() * c.clone())).collect();
        MultiPoly { n_vars: self.n_vars, terms }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MultiPoly<T> {
        let mut p = MultiPoly::zero(self.n_vars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), f(c));
        }
        p
    }

    /// Same polynomial viewed in `n_vars` variables (padding or dropping
    /// trailing variables, which must then be absent).
    pub fn with_n_vars(&self, n_vars: usize) -> Result<Self> {
        let mut p = MultiPoly::zero(n_vars);
        for (e, c) in &self.terms {
            if e.iter().skip(n_vars).any(|&x| x > 0) {
                return Err(Error::Dimension("cannot drop a variable that occurs".into()));
            }
            let mut ne = e.clone();
            ne.resize(n_vars, 0);
            p.add_term(ne, c.clone());
        }
        Ok(p)
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut p = Self::zero(self.n_vars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                p.add_term(ne, c.clone() * S::from_int(e[i] as i64));
            }
        }
        p
    }

    /// `Σ_{i<dim} ∂²/∂y_i²`.
    pub fn laplacian_in(&self, dim: usize) -> Self {
        let mut p = Self::zero(self.n_vars);
        for (e, c) in &self.terms {
            for i in 0..dim {
                if e[i] >= 2 {
                    let mut ne = e.clone();
                    ne[i] -= 2;
                    p.add_term(ne, c.clone() * S::from_int((e[i] * (e[i] - 1)) as i64));
                }
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n_vars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient by `y_0² + … + y_{dim-1}²`, if it divides.
    ///
    /// Long division by a polynomial that is monic in `y_0`.
    pub fn div_r2(&self, dim: usize) -> Option<Self> {
        assert!(dim >= 1);
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n_vars);
        loop {
            let Some((e, c)) = rem.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) else {
                return Some(quot);
            };
            // BTreeMap order is lexicographic, so the last key has the
            // largest power of y_0.
            if e[0] < 2 {
                return None;
            }
            let mut qe = e.clone();
            qe[0] -= 2;
            quot.add_term(qe.clone(), c.clone());
            for j in 0..dim {
                let mut te = qe.clone();
                te[j] += 2;
                rem.add_term(te, -c.clone());
            }
        }
    }

    pub fn eval(&self, y: &[S]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in y.iter().zip(e) {
                t = t * x.pow_u(k);
            }
            acc = acc + t;
        }
        acc
    }

    pub fn eval_f64(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64_lossy();
            for (x, &k) in y.iter().zip(e) {
                t *= x.powi(k as i32);
            }
            acc += t;
        }
        acc
    }
}

/// `Σ_i ∂²p/∂y_i²` over the first `n_vars` variables.
pub fn poly_laplacian<S: Scalar>(p: &MultiPoly<S>, n_vars: usize) -> MultiPoly<S> {
    p.laplacian_in(n_vars)
}

impl<S: Scalar> Add for &MultiPoly<S> {
    type Output = MultiPoly<S>;
    fn add(self, rhs: &MultiPoly<S>) -> MultiPoly<S> {
        assert_eq!(self.n_vars, rhs.n_vars);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl<S: Scalar> Sub for &MultiPoly<S> {
    type Output = MultiPoly<S>;
    fn sub(self, rhs: &MultiPoly<S>) -> MultiPoly<S> {
        assert_eq!(self.n_vars, rhs.n_vars);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c.clone());
        }
        p
    }
}

impl<S: Scalar> Mul for &MultiPoly<S> {
    type Output = MultiPoly<S>;
    fn mul(self, rhs: &MultiPoly<S>) -> MultiPoly<S> {
        assert_eq!(self.n_vars, rhs.n_vars);
        let mut p = MultiPoly::zero(self.n_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca.clone() * cb.clone());
            }
        }
        p
    }
}

impl<S: Scalar> Neg for &MultiPoly<S> {
    type Output = MultiPoly<S>;
    fn neg(self) -> MultiPoly<S> {
        self.scale(&-S::one())
    }
}

macro_rules! forward_owned {
    ($ty:ident, $tr:ident, $f:ident) => {
        impl<S: Scalar> $tr for $ty<S> {
            type Output = $ty<S>;
            fn $f(self, rhs: $ty<S>) -> $ty<S> {
                (&self).$f(&rhs)
            }
        }
    };
}
pub(crate) use forward_owned;

forward_owned!(MultiPoly, Add, add);
forward_owned!(MultiPoly, Sub, sub);
forward_owned!(MultiPoly, Mul, mul);

/// Polynomial whose terms all have the same total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HomoPoly<S> {
    base: MultiPoly<S>,
    degree: u32,
}

impl<S: Scalar> HomoPoly<S> {
    pub fn new(base: MultiPoly<S>, degree: u32) -> Result<Self> {
        if let Some(e) = base.terms.keys().find(|e| e.iter().sum::<u32>() != degree) {
            return Err(Error::Dimension(format!("term {e:?} is not of degree {degree}")));
        }
        Ok(HomoPoly { base, degree })
    }

    /// Takes the degree from the polynomial itself; the zero polynomial
    /// is given degree 0.
    pub fn from_poly(base: MultiPoly<S>) -> Result<Self> {
        let d = base.degree().unwrap_or(0);
        Self::new(base, d)
    }

    pub fn base(&self) -> &MultiPoly<S> {
        &self.base
    }

    pub fn into_base(self) -> MultiPoly<S> {
        self.base
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }
}
