//! Small dense square matrices over a [`Scalar`] and the elementary
//! symmetric functions of their eigenvalues.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> SquareMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![S::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![S::one(); n])
    }

    pub fn from_diag(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows must all have length n".into()));
        }
        Ok(SquareMatrix { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.n.max(1)).map(|c| c.to_vec()).take(self.n).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SquareMatrix<T> {
        SquareMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        SquareMatrix { n: self.n, data }
    }

    pub fn scale(&self, c: &S) -> Self {
        SquareMatrix { n: self.n, data: self.data.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// `self + c * I`.
    pub fn shift(&self, c: &S) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            let v = m.get(i, i).clone() + c.clone();
            m.set(i, i, v);
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let mut acc = S::zero();
            for k in 0..n {
                acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
            }
            acc
        })
    }

    pub fn trace(&self) -> S {
        (0..self.n).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Elementary symmetric functions `[σ_0, …, σ_n]` of the eigenvalues,
    /// read off the characteristic polynomial (Faddeev–LeVerrier).
    pub fn sigmas(&self) -> Vec<S> {
        let n = self.n;
        let mut sig = vec![S::one()];
        let mut mk = Self::zeros(n);
        let mut c_prev = S::one();
        for k in 1..=n {
            mk = self.mul(&mk).shift(&c_prev);
            let c = -(self.mul(&mk).trace()) / S::from_int(k as i64);
            sig.push(if k % 2 == 0 { c.clone() } else { -c.clone() });
            c_prev = c;
        }
        sig
    }

    /// `σ_k` of the eigenvalues; 1 for `k = 0`, 0 outside `0..=n`.
    pub fn sigma(&self, k: i64) -> S {
        if k < 0 || k > self.n as i64 {
            return S::zero();
        }
        self.sigmas().swap_remove(k as usize)
    }

    pub fn det(&self) -> S {
        self.sigma(self.n as i64)
    }
}

/// Coefficients `[c_0, …, c_d]` of the unique polynomial of degree ≤ d
/// taking `values[t]` at the nodes `t = 0, 1, …, d`.
pub fn interpolate_at_integers<S: Scalar>(values: &[S]) -> Vec<S> {
    let d = values.len();
    // Newton divided differences on equally spaced integer nodes.
    let mut dd = values.to_vec();
    for level in 1..d {
        for i in (level..d).rev() {
            dd[i] = (dd[i].clone() - dd[i - 1].clone()) / S::from_int(level as i64);
        }
    }
    let mut coeffs = vec![S::zero(); d];
    // Horner in Newton form: p = dd0 + (t-0)(dd1 + (t-1)(dd2 + ...)).
    for i in (0..d).rev() {
        // coeffs <- coeffs * (t - i) + dd[i]
        let mut next = vec![S::zero(); d];
        for (j, c) in coeffs.iter().enumerate() {
            if j + 1 < d {
                next[j + 1] = next[j + 1].clone() + c.clone();
            }
            next[j] = next[j].clone() - c.clone() * S::from_int(i as i64);
        }
        next[0] = next[0].clone() + dd[i].clone();
        coeffs = next;
    }
    coeffs
}
