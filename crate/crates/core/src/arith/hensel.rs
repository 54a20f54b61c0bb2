//! Newton iteration for integer polynomials in several variables.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::integer::{int_valuation, mod_inverse};
use super::Prime;
use crate::error::{Error, Result};

/// Sparse integer polynomial: a list of `(coefficient, exponent vector)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMultiPoly {
    nvars: usize,
    terms: Vec<(BigInt, Vec<u32>)>,
}

impl IntMultiPoly {
    pub fn new(nvars: usize, terms: Vec<(BigInt, Vec<u32>)>) -> Self {
        assert!(terms.iter().all(|(_, e)| e.len() == nvars));
        let terms = terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        IntMultiPoly { nvars, terms }
    }

    /// Univariate polynomial from coefficients, lowest degree first.
    pub fn univariate(coeffs: &[BigInt]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), vec![i as u32]))
            .collect();
        IntMultiPoly::new(1, terms)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(BigInt, Vec<u32>)] {
        &self.terms
    }

    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(c, e)| {
                let mut term = c.clone();
                for (x, &k) in point.iter().zip(e) {
                    term *= x.pow(k);
                }
                term
            })
            .sum()
    }

    pub fn partial(&self, var: usize) -> IntMultiPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[var] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[var] -= 1;
                (c * BigInt::from(e[var]), e2)
            })
            .collect();
        IntMultiPoly::new(self.nvars, terms)
    }
}

/// Smallest p-adic valuation among the partial derivatives at `point`,
/// together with the variable attaining it. `None` when every partial
/// derivative vanishes.
fn gradient_valuation(
    partials: &[IntMultiPoly],
    point: &[BigInt],
    p: &BigInt,
) -> Option<(u32, usize)> {
    partials
        .iter()
        .enumerate()
        .filter_map(|(i, d)| {
            let v = d.eval(point);
            (!v.is_zero()).then(|| (int_valuation(&v, p), i))
        })
        .min()
}

/// Lifts a residue vector `point` with `F(point) ≡ 0 mod p^k` to a solution
/// modulo `p^target`.
///
/// Requires `k ≥ 2e + 1`, where `e` is the minimal valuation of the partial
/// derivatives at `point`. A target below `k` is raised to `k`, so that
/// `target > 2e`. The result agrees with `point` modulo `p^(k-e)`, is reduced
/// modulo `p^(target-e)`, and satisfies `F ≡ 0 mod p^target`.
pub fn hensel_lift_multivariate(
    f: &IntMultiPoly,
    point: &[BigInt],
    p: &Prime,
    k: u32,
    target: u32,
) -> Result<Vec<BigInt>> {
    let pv = p.value();
    let modulus_k = pv.pow(k);
    if !f.eval(point).mod_floor(&modulus_k).is_zero() {
        return Err(Error::HenselCriterion);
    }
    let partials: Vec<IntMultiPoly> = (0..f.nvars()).map(|i| f.partial(i)).collect();
    let (e, var) = gradient_valuation(&partials, point, pv).ok_or(Error::HenselCriterion)?;
    if k < 2 * e + 1 {
        return Err(Error::HenselCriterion);
    }
    // below 2e + 1 the reduction mod p^(target-e) would not preserve F ≡ 0
    let target = target.max(k);
    let big_mod = pv.pow(target);
    let pe = pv.pow(e);
    let mut x: Vec<BigInt> = point.to_vec();
    loop {
        let value = f.eval(&x);
        let vv = if value.is_zero() { u32::MAX } else { int_valuation(&value, pv) };
        if vv >= target {
            break;
        }
        let d = partials[var].eval(&x);
        // the valuation of the chosen derivative stays e along the iteration
        debug_assert_eq!(int_valuation(&d, pv), e);
        let unit = (&d / &pe).mod_floor(&big_mod);
        let inv = mod_inverse(&unit, &big_mod).ok_or(Error::HenselCriterion)?;
        let step = (&value / &pe * inv).mod_floor(&big_mod);
        x[var] = (&x[var] - step).mod_floor(&big_mod);
    }
    let out_mod = pv.pow(target - e);
    Ok(x.into_iter().map(|c| c.mod_floor(&out_mod)).collect())
}

/// Whether `point` meets the Hensel criterion for `F` at precision `k`, and
/// the gradient valuation if so.
pub fn hensel_certificate(f: &IntMultiPoly, point: &[BigInt], p: &Prime, k: u32) -> Option<u32> {
    let pv = p.value();
    if !f.eval(point).mod_floor(&pv.pow(k)).is_zero() {
        return None;
    }
    let partials: Vec<IntMultiPoly> = (0..f.nvars()).map(|i| f.partial(i)).collect();
    let (e, _) = gradient_valuation(&partials, point, pv)?;
    (k > 2 * e).then_some(e)
}

impl IntMultiPoly {
    /// `x_0^2 - a` in one variable.
    pub fn square_minus(a: &BigInt) -> Self {
        IntMultiPoly::new(1, vec![(BigInt::one(), vec![2]), (-a.clone(), vec![0])])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn lift_seventeen_mod_1024() {
        let f = IntMultiPoly::square_minus(&b(17));
        let x = hensel_lift_multivariate(&f, &[b(1)], &Prime::small(2), 3, 10).unwrap();
        assert_eq!(x, vec![b(233)]);
        // oracle: all square roots of 17 modulo 2^10
        let roots: Vec<i64> = (0..1024).filter(|r| (r * r - 17) % 1024 == 0).collect();
        assert!(roots.contains(&233));
    }

    #[test]
    fn lift_two_mod_49() {
        let f = IntMultiPoly::square_minus(&b(2));
        let x = hensel_lift_multivariate(&f, &[b(3)], &Prime::small(7), 1, 2).unwrap();
        assert_eq!(x, vec![b(10)]);
    }

    #[test]
    fn nonzero_residue_rejected() {
        let f = IntMultiPoly::square_minus(&b(3));
        let err = hensel_lift_multivariate(&f, &[b(1)], &Prime::small(7), 1, 4).unwrap_err();
        assert_eq!(err, Error::HenselCriterion);
    }

    #[test]
    fn multivariate_lift_verifies() {
        // x^2 + y^2 - 5 over Z_3, starting at (1, 1)
        let f = IntMultiPoly::new(
            2,
            vec![(b(1), vec![2, 0]), (b(1), vec![0, 2]), (b(-5), vec![0, 0])],
        );
        let x = hensel_lift_multivariate(&f, &[b(1), b(1)], &Prime::small(3), 1, 12).unwrap();
        assert!(f.eval(&x).mod_floor(&b(3).pow(12)).is_zero());
        assert_eq!(x[0].mod_floor(&b(3)), b(1));
    }
}
