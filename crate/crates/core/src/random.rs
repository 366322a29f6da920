//! Seeded generators for the random inputs used by experiments and tests.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactalg::{monomials_of_degree, HomoPoly, MultiPoly};
use crate::symfun::Spectrum;
use crate::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational with numerator in `[-5, 5]` and denominator in `[1, 7]`.
pub fn small_rational(rng: &mut impl Rng) -> Rational {
    let p: i64 = rng.gen_range(-5..=5);
    let q: i64 = rng.gen_range(1..=7);
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn spectrum(rng: &mut impl Rng, n: usize) -> Spectrum<Rational> {
    Spectrum::new((0..n).map(|_| small_rational(rng)).collect())
}

/// Random homogeneous polynomial of degree `m`; each monomial is kept
/// with probability one half.
pub fn homogeneous(rng: &mut impl Rng, n: usize, m: u32) -> HomoPoly<Rational> {
    let mut p = MultiPoly::zero(n);
    for e in monomials_of_degree(n, m) {
        if rng.gen_bool(0.5) {
            p.add_term(e, small_rational(rng));
        }
    }
    HomoPoly::new(p, m).expect("terms have degree m")
}

/// Random polynomial of total degree at most `max_degree`.
pub fn polynomial(rng: &mut impl Rng, n: usize, max_degree: u32) -> MultiPoly<Rational> {
    let mut p = MultiPoly::zero(n);
    for m in 0..=max_degree {
        p = &p + homogeneous(rng, n, m).base();
    }
    p
}

/// Uniform direction on the unit sphere in `R^n`.
pub fn direction(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}
