//! Independent reference implementations used only by tests.

use kelvinasym::kelvin::Jet2;
use kelvinasym::{FMatrix, RadPoly, Rational, Scalar};

/// Jet of a radical polynomial by its exact symbolic derivatives.
pub fn radpoly_jet<S: Scalar>(v: &RadPoly<S>, y: &[f64]) -> Jet2 {
    let n = y.len();
    let grad: Vec<_> = (0..n).map(|i| v.partial(i)).collect();
    let hess = FMatrix::from_fn(n, |i, j| grad[i].partial(j).eval_f64(y));
    Jet2::new(y.to_vec(), v.eval_f64(y), grad.iter().map(|g| g.eval_f64(y)).collect(), hess).unwrap()
}

/// `σ_k` by enumerating all k-subsets.
pub fn sigma_subsets(vals: &[Rational], k: usize) -> Rational {
    let n = vals.len();
    let mut acc = Rational::from_integer(0.into());
    if k > n {
        return acc;
    }
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut t = Rational::from_integer(1.into());
        for (j, v) in vals.iter().enumerate() {
            if mask & (1 << j) != 0 {
                t *= v.clone();
            }
        }
        acc += t;
    }
    acc
}

/// Determinant by the Leibniz permutation expansion.
pub fn leibniz_det(m: &[Vec<Rational>]) -> Rational {
    fn perms(k: usize) -> Vec<(Vec<usize>, bool)> {
        if k == 0 {
            return vec![(Vec::new(), true)];
        }
        let mut out = Vec::new();
        for (p, even) in perms(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                // Inserting at `pos` adds `len − pos` inversions.
                let flips = (p.len() - pos) % 2 == 1;
                out.push((q, even != flips));
            }
        }
        out
    }
    let k = m.len();
    let mut acc = Rational::from_integer(0.into());
    for (p, even) in perms(k) {
        let mut t = Rational::from_integer(1.into());
        for (i, &j) in p.iter().enumerate() {
            t *= m[i][j].clone();
        }
        if even {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

/// Sum of all `k × k` principal minors.
pub fn principal_minor_sum(m: &[Vec<Rational>], k: usize) -> Rational {
    let n = m.len();
    let mut acc = Rational::from_integer(0.into());
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let sub: Vec<Vec<Rational>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect();
        acc += leibniz_det(&sub);
    }
    acc
}
