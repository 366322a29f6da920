use super::poly::{HomoPoly, MultiPoly};
use super::radpoly::RadPoly;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// All exponent vectors of total degree `m` in `n` variables, in
/// lexicographic order.
pub fn monomials_of_degree(n: usize, m: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=m {
            prefix.push(k);
            rec(n, m - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, m, &mut Vec::new(), &mut out);
    }
    out
}

/// Solves `Δ(|y|^{n-2} u) = |y|^{n-4} h` for homogeneous `u` of the degree
/// of `h`.
///
/// Equivalent to `c_m u + r² Δu = h` with `c_m = (n-2)(2n-4+2m)`. Taking
/// the Laplacian of that equation gives one of the same shape for
/// `w = Δu` in degree `m − 2`, with constant `c_m + 2n + 4(m − 2)`; once
/// `w` is known, `u = (h − r² w)/c_m`. The answer is checked against the
/// radical Laplacian before it is returned.
pub fn solve_radical_poisson<S: Scalar>(h: &HomoPoly<S>, n: usize) -> Result<HomoPoly<S>> {
    if n <= 2 {
        return Err(Error::Dimension(format!("radical Poisson solve needs n >= 3, got {n}")));
    }
    if h.base().n_vars() != n {
        return Err(Error::Dimension(format!(
            "h has {} variables, expected {n}",
            h.base().n_vars()
        )));
    }
    let m = h.degree();
    let cm = (n as i64 - 2) * (2 * n as i64 - 4 + 2 * m as i64);
    let u = solve_shifted(h.base(), m, cm, n);

    let lhs = RadPoly::from_poly(n as i32 - 2, u.clone()).laplacian();
    let rhs = RadPoly::from_poly(n as i32 - 4, h.base().clone());
    if lhs != rhs {
        return Err(Error::Solve("residual check failed".into()));
    }
    HomoPoly::new(u, m)
}

/// `c u + r² Δu = h` on homogeneous polynomials of degree `m`, `c > 0`.
fn solve_shifted<S: Scalar>(h: &MultiPoly<S>, m: u32, c: i64, n: usize) -> MultiPoly<S> {
    let inv = S::one() / S::from_int(c);
    if m < 2 || h.is_zero() {
        return h.scale(&inv);
    }
    let w = solve_shifted(&h.laplacian_in(n), m - 2, c + 2 * n as i64 + 4 * (m as i64 - 2), n);
    (h - &(&MultiPoly::r2(n, n) * &w)).scale(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::Rational;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_of_degree(7, 6).len(), 924);
        assert_eq!(monomials_of_degree(2, 0), vec![vec![0, 0]]);
    }

    #[test]
    fn constant_source_in_three_dimensions() {
        let h = HomoPoly::new(MultiPoly::<Rational>::one(3), 0).unwrap();
        let u = solve_radical_poisson(&h, 3).unwrap();
        assert_eq!(u.base(), &MultiPoly::constant(3, rat(1, 2)));
    }

    #[test]
    fn harmonic_source_is_scaled() {
        let p = &MultiPoly::<Rational>::var(3, 0) * &MultiPoly::var(3, 1);
        let h = HomoPoly::new(p.clone(), 2).unwrap();
        let u = solve_radical_poisson(&h, 3).unwrap();
        assert_eq!(u.base(), &p.scale(&rat(1, 6)));
    }

    #[test]
    fn rejects_low_dimension() {
        let h = HomoPoly::new(MultiPoly::<Rational>::one(2), 0).unwrap();
        assert!(matches!(solve_radical_poisson(&h, 2), Err(Error::Dimension(_))));
    }
}
