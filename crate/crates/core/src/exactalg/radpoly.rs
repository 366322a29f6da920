use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly::{forward_owned, MultiPoly};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite sum `Σ_k |y|^k p_k(y)` with integer `k`.
///
/// `|y|` is the Euclidean norm of the first `dim` variables; any further
/// variables are passive indeterminates. The canonical form keeps at most
/// one slot per parity of `k` (even powers of `|y|` are polynomial, so
/// slots of equal parity merge onto the lowest exponent) and then moves
/// every factor of `r² = |y|²` out of the polynomial into the exponent.
/// The result is unique, so equality is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct RadPoly<S> {
    n_vars: usize,
    dim: usize,
    slots: BTreeMap<i32, MultiPoly<S>>,
}

impl<S: Scalar> RadPoly<S> {
    pub fn zero(n_vars: usize, dim: usize) -> Self {
        assert!(dim >= 1 && dim <= n_vars, "need 1 <= dim <= n_vars");
        RadPoly { n_vars, dim, slots: BTreeMap::new() }
    }

    /// Radical polynomial in `n` variables with `|y|` over all of them.
    pub fn from_poly(k: i32, p: MultiPoly<S>) -> Self {
        let n = p.n_vars();
        Self::from_slot(n, k, p)
    }

    pub fn from_slot(dim: usize, k: i32, p: MultiPoly<S>) -> Self {
        Self::from_slots(p.n_vars(), dim, [(k, p)])
    }

    pub fn from_slots(n_vars: usize, dim: usize, slots: impl IntoIterator<Item = (i32, MultiPoly<S>)>) -> Self {
        let mut e = Self::zero(n_vars, dim);
        for (k, p) in slots {
            assert_eq!(p.n_vars(), n_vars);
            e.slots.insert_or_add(k, p);
        }
        e.canonicalize();
        e
    }

    /// The constant `c·|y|^k`.
    pub fn radial(n_vars: usize, dim: usize, k: i32, c: S) -> Self {
        Self::from_slots(n_vars, dim, [(k, MultiPoly::constant(n_vars, c))])
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self) -> &BTreeMap<i32, MultiPoly<S>> {
        &self.slots
    }

    pub fn is_zero(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.slots.keys().next().copied()
    }

    fn canonicalize(&mut self) {
        let old = std::mem::take(&mut self.slots);
        let r2 = MultiPoly::r2(self.n_vars, self.dim);
        for parity in [0, 1] {
            let same: Vec<_> = old.iter().filter(|(k, p)| k.rem_euclid(2) == parity && !p.is_zero()).collect();
            let Some(kmin) = same.iter().map(|(k, _)| **k).min() else { continue };
            let mut acc = MultiPoly::zero(self.n_vars);
            for (k, p) in same {
                acc = &acc + &(&r2.pow(((k - kmin) / 2) as u32) * p);
            }
            if acc.is_zero() {
                continue;
            }
            let mut k = kmin;
            while let Some(q) = acc.div_r2(self.dim) {
                acc = q;
                k += 2;
            }
            self.slots.insert(k, acc);
        }
    }

    /// Re-runs canonicalization; a no-op on any value built through the
    /// public API.
    pub fn normalized(&self) -> Self {
        let mut e = self.clone();
        e.canonicalize();
        e
    }

    /// The polynomial `q` with `(part of self of the parity of k0) = |y|^{k0} q`.
    ///
    /// Fails if that part has a slot below `k0`.
    pub fn part_at(&self, k0: i32) -> Result<MultiPoly<S>> {
        let parity = k0.rem_euclid(2);
        match self.slots.iter().find(|(k, _)| k.rem_euclid(2) == parity) {
            None => Ok(MultiPoly::zero(self.n_vars)),
            Some((&k, p)) if k >= k0 => {
                Ok(&MultiPoly::r2(self.n_vars, self.dim).pow(((k - k0) / 2) as u32) * p)
            }
            Some((&k, _)) => Err(Error::Dimension(format!("slot |y|^{k} lies below |y|^{k0}"))),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        let slots = self.slots.iter().map(|(k, p)| (*k, p.scale(c)));
        Self::from_slots(self.n_vars, self.dim, slots)
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&S::from_int(c))
    }

    /// Multiply by `|y|^j`.
    pub fn shift(&self, j: i32) -> Self {
        let slots = self.slots.iter().map(|(k, p)| (k + j, p.clone()));
        Self::from_slots(self.n_vars, self.dim, slots)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> RadPoly<T> {
        let slots = self.slots.iter().map(|(k, p)| (*k, p.map(&f)));
        RadPoly::from_slots(self.n_vars, self.dim, slots)
    }

    /// `∂/∂y_i`, using `∂_i |y|^k = k |y|^{k-2} y_i` for `i < dim`.
    pub fn partial(&self, i: usize) -> Self {
        let mut slots = Vec::new();
        for (&k, p) in &self.slots {
            slots.push((k, p.partial(i)));
            if i < self.dim && k != 0 {
                let yi = MultiPoly::var(self.n_vars, i);
                slots.push((k - 2, (&yi * p).scale(&S::from_int(k as i64))));
            }
        }
        Self::from_slots(self.n_vars, self.dim, slots)
    }

    /// Laplacian over the first `dim` variables.
    ///
    /// Uses `Δ(|y|^a p_m) = a(a+2m+n-2)|y|^{a-2} p_m + |y|^a Δp_m` for
    /// `p_m` homogeneous of degree `m` in those variables.
    pub fn laplacian(&self) -> Self {
        let n = self.dim as i64;
        let mut slots = Vec::new();
        for (&a, p) in &self.slots {
            slots.push((a, p.laplacian_in(self.dim)));
            if a == 0 {
                continue;
            }
            for (m, pm) in p.homogeneous_parts_in(self.dim) {
                let c = a as i64 * (a as i64 + 2 * m as i64 + n - 2);
                slots.push((a - 2, pm.scale(&S::from_int(c))));
            }
        }
        Self::from_slots(self.n_vars, self.dim, slots)
    }

    pub fn eval_f64(&self, y: &[f64]) -> f64 {
        let r = y[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        self.slots.iter().map(|(k, p)| r.powi(*k) * p.eval_f64(y)).sum()
    }
}

/// Exact Laplacian in `R^n`; `n` must be the radial dimension of `e`.
pub fn radpoly_laplacian<S: Scalar>(e: &RadPoly<S>, n: usize) -> RadPoly<S> {
    assert_eq!(e.dim, n, "Laplacian dimension must match the radial dimension");
    e.laplacian()
}

trait InsertOrAdd<S> {
    fn insert_or_add(&mut self, k: i32, p: MultiPoly<S>);
}

impl<S: Scalar> InsertOrAdd<S> for BTreeMap<i32, MultiPoly<S>> {
    fn insert_or_add(&mut self, k: i32, p: MultiPoly<S>) {
        match self.get_mut(&k) {
            Some(old) => *old = &*old + &p,
            None => {
                self.insert(k, p);
            }
        }
    }
}

impl<S: Scalar> Add for &RadPoly<S> {
    type Output = RadPoly<S>;
    fn add(self, rhs: &RadPoly<S>) -> RadPoly<S> {
        assert_eq!((self.n_vars, self.dim), (rhs.n_vars, rhs.dim));
        let slots = self.slots.iter().chain(&rhs.slots).map(|(k, p)| (*k, p.clone()));
        RadPoly::from_slots(self.n_vars, self.dim, slots)
    }
}

impl<S: Scalar> Sub for &RadPoly<S> {
    type Output = RadPoly<S>;
    fn sub(self, rhs: &RadPoly<S>) -> RadPoly<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Neg for &RadPoly<S> {
    type Output = RadPoly<S>;
    fn neg(self) -> RadPoly<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Mul for &RadPoly<S> {
    type Output = RadPoly<S>;
    fn mul(self, rhs: &RadPoly<S>) -> RadPoly<S> {
        assert_eq!((self.n_vars, self.dim), (rhs.n_vars, rhs.dim));
        let mut slots = Vec::new();
        for (ka, pa) in &self.slots {
            for (kb, pb) in &rhs.slots {
                slots.push((ka + kb, pa * pb));
            }
        }
        RadPoly::from_slots(self.n_vars, self.dim, slots)
    }
}

forward_owned!(RadPoly, Add, add);
forward_owned!(RadPoly, Sub, sub);
forward_owned!(RadPoly, Mul, mul);

impl<S: Scalar> Neg for RadPoly<S> {
    type Output = RadPoly<S>;
    fn neg(self) -> RadPoly<S> {
        -&self
    }
}
