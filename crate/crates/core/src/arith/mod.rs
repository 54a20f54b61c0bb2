//! Exact integer, rational and p-adic primitives.
//!
//! Brauer invariants in this crate are two-torsion, so they are modelled as
//! [`BrInv`], the subgroup {0, 1/2} of Q/Z. Local Hilbert symbols take values
//! there as well.

pub mod hensel;
pub mod integer;

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use hensel::{hensel_lift_multivariate, IntMultiPoly};
pub use integer::{is_prime, legendre, squarefree_part};

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// "num/den" rendering used at every serialization boundary ("3" for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// A rational prime, validated on construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(BigInt);

impl Prime {
    pub fn new(p: BigInt) -> Result<Self> {
        if integer::is_prime(&p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p.to_string()))
        }
    }

    pub fn small(p: u64) -> Self {
        Prime::new(BigInt::from(p)).expect("prime literal")
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        num_traits::ToPrimitive::to_u64(&self.0)
    }

    pub fn is_two(&self) -> bool {
        self.0 == BigInt::from(2)
    }
}

/// A place of Q: the real place or a finite prime.
///
/// Places order with the real place first and primes ascending after it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Real,
    Finite(Prime),
}

impl Place {
    pub fn prime(p: u64) -> Self {
        Place::Finite(Prime::small(p))
    }

    pub fn as_prime(&self) -> Option<&Prime> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Real => None,
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Place::Real)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "real"),
            Place::Finite(p) => write!(f, "{}", p.0),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("real") || s == "inf" || s == "∞" {
            return Ok(Place::Real);
        }
        let n = BigInt::from_str(s).map_err(|_| Error::Parse(format!("not a place: {s:?}")))?;
        Ok(Place::Finite(Prime::new(n)?))
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An element of {0, 1/2} ⊂ Q/Z.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BrInv {
    #[default]
    Zero,
    Half,
}

impl BrInv {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            BrInv::Half
        } else {
            BrInv::Zero
        }
    }

    pub fn is_zero(self) -> bool {
        self == BrInv::Zero
    }
}

impl Add for BrInv {
    type Output = BrInv;

    fn add(self, rhs: BrInv) -> BrInv {
        BrInv::from_bit((self == BrInv::Half) != (rhs == BrInv::Half))
    }
}

impl AddAssign for BrInv {
    fn add_assign(&mut self, rhs: BrInv) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for BrInv {
    fn sum<I: Iterator<Item = BrInv>>(iter: I) -> BrInv {
        iter.fold(BrInv::Zero, |a, b| a + b)
    }
}

impl fmt::Display for BrInv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BrInv::Zero => "0",
            BrInv::Half => "1/2",
        })
    }
}

impl Serialize for BrInv {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Class of a non-zero rational in Q^×/Q^×2.
#[derive(Clone, Debug)]
pub struct SquareClass {
    representative: Rational,
    normalized: BigInt,
}

impl SquareClass {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::ZeroInput("square class"));
        }
        // a/b and a*b differ by the square b^2
        let normalized = squarefree_part(&(value.numer() * value.denom()));
        Ok(SquareClass {
            representative: value,
            normalized,
        })
    }

    pub fn representative(&self) -> &Rational {
        &self.representative
    }

    /// Signed square-free integer in the class.
    pub fn normalized(&self) -> &BigInt {
        &self.normalized
    }

    pub fn is_square(&self) -> bool {
        self.normalized.is_one()
    }

    pub fn normalized_rational(&self) -> Rational {
        Rational::from_integer(self.normalized.clone())
    }
}

impl PartialEq for SquareClass {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for SquareClass {}

/// Whether a non-zero rational is a square in Q.
pub fn is_rational_square(a: &Rational) -> bool {
    !a.is_zero()
        && integer::is_perfect_square(a.numer())
        && integer::is_perfect_square(a.denom())
}

/// p-adic valuation of a non-zero rational.
pub fn valuation(a: &Rational, p: &Prime) -> Result<i64> {
    if a.is_zero() {
        return Err(Error::ValuationOfZero);
    }
    let vn = integer::int_valuation(a.numer(), p.value()) as i64;
    let vd = integer::int_valuation(a.denom(), p.value()) as i64;
    Ok(vn - vd)
}

/// Square-class data of a non-zero element of Q_p: the valuation and a
/// representative of the unit part good modulo p (odd p) or modulo 8 (p = 2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalClass {
    pub valuation: i64,
    pub unit: BigInt,
}

impl LocalClass {
    pub fn of_rational(a: &Rational, p: &Prime) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ValuationOfZero);
        }
        let (vn, un) = integer::split_prime_power(a.numer(), p.value());
        let (vd, ud) = integer::split_prime_power(a.denom(), p.value());
        // u_n / u_d has the same square class as u_n * u_d
        let modulus = unit_modulus(p);
        let unit = (un * ud).mod_floor(&modulus);
        Ok(LocalClass {
            valuation: vn as i64 - vd as i64,
            unit,
        })
    }

    /// Class of a p-adic number known modulo p^precision through the integer
    /// residue `value`. Returns `None` when the precision does not determine
    /// the class.
    pub fn of_residue(value: &BigInt, precision: u32, p: &Prime) -> Option<Self> {
        let modulus = p.value().pow(precision);
        let r = value.mod_floor(&modulus);
        if r.is_zero() {
            return None;
        }
        let (v, u) = integer::split_prime_power(&r, p.value());
        let needed = if p.is_two() { 3 } else { 1 };
        if v + needed > precision {
            return None;
        }
        Some(LocalClass {
            valuation: v as i64,
            unit: u.mod_floor(&unit_modulus(p)),
        })
    }

    pub fn mul(&self, other: &LocalClass, p: &Prime) -> LocalClass {
        LocalClass {
            valuation: self.valuation + other.valuation,
            unit: (&self.unit * &other.unit).mod_floor(&unit_modulus(p)),
        }
    }

    pub fn is_square(&self, p: &Prime) -> bool {
        if self.valuation.is_odd() {
            return false;
        }
        if p.is_two() {
            self.unit == BigInt::one()
        } else {
            integer::legendre(&self.unit, p.value()) == 1
        }
    }

    /// A rational number in this square class.
    pub fn to_rational(&self, p: &Prime) -> Rational {
        let pv = Rational::from_integer(p.value().clone());
        let power = pv.pow(self.valuation as i32);
        power * Rational::from_integer(self.unit.clone())
    }
}

fn unit_modulus(p: &Prime) -> BigInt {
    if p.is_two() {
        BigInt::from(8)
    } else {
        p.value().clone()
    }
}

/// Whether `a` is a square in the completion Q_v.
pub fn is_square_local(a: &Rational, v: &Place) -> Result<bool> {
    if a.is_zero() {
        return Err(Error::ZeroInput("local square test"));
    }
    Ok(match v {
        Place::Real => a.is_positive(),
        Place::Finite(p) => LocalClass::of_rational(a, p)?.is_square(p),
    })
}

/// Hilbert symbol of two local square classes at the prime p.
pub fn hilbert_local(a: &LocalClass, b: &LocalClass, p: &Prime) -> BrInv {
    let (alpha, beta) = (a.valuation.rem_euclid(2), b.valuation.rem_euclid(2));
    if p.is_two() {
        let residue = |u: &BigInt| -> i64 { u.mod_floor(&BigInt::from(8)).try_into().unwrap() };
        let eps = |u: &BigInt| (residue(u) - 1) / 2 % 2;
        let omega = |u: &BigInt| {
            let r = residue(u);
            (r * r - 1) / 8 % 2
        };
        let e = eps(&a.unit) * eps(&b.unit) + alpha * omega(&b.unit) + beta * omega(&a.unit);
        BrInv::from_bit(e % 2 == 1)
    } else {
        let pm = p.value();
        let mut sign = 1i8;
        if alpha == 1 && beta == 1 && (pm % 4u32) == BigInt::from(3) {
            sign = -sign;
        }
        if beta == 1 {
            sign *= integer::legendre(&a.unit, pm);
        }
        if alpha == 1 {
            sign *= integer::legendre(&b.unit, pm);
        }
        BrInv::from_bit(sign < 0)
    }
}

/// Hilbert symbol (a, b)_v as an element of {0, 1/2}: zero exactly when
/// z^2 = a x^2 + b y^2 has a non-trivial solution over Q_v.
pub fn hilbert_symbol(a: &Rational, b: &Rational, v: &Place) -> Result<BrInv> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroInput("Hilbert symbol"));
    }
    Ok(match v {
        Place::Real => BrInv::from_bit(a.is_negative() && b.is_negative()),
        Place::Finite(p) => {
            let ca = LocalClass::of_rational(a, p)?;
            let cb = LocalClass::of_rational(b, p)?;
            hilbert_local(&ca, &cb, p)
        }
    })
}

/// Primes dividing the numerator or denominator of a non-zero rational.
pub fn rational_prime_support(a: &Rational) -> Vec<BigInt> {
    let mut out = integer::prime_divisors(a.numer());
    out.extend(integer::prime_divisors(a.denom()));
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_examples() {
        let two = Prime::small(2);
        assert_eq!(valuation(&rat(512), &two).unwrap(), 9);
        assert_eq!(valuation(&ratio(1, 2), &two).unwrap(), -1);
        assert_eq!(valuation(&rat(-128), &two).unwrap(), 7);
        assert!(matches!(valuation(&rat(0), &two), Err(Error::ValuationOfZero)));
    }

    #[test]
    fn local_squares() {
        assert!(is_square_local(&rat(512), &Place::Real).unwrap());
        assert!(!is_square_local(&rat(2), &Place::prime(2)).unwrap());
        assert!(is_square_local(&rat(17), &Place::prime(2)).unwrap());
        assert!(is_square_local(&rat(2), &Place::prime(7)).unwrap());
        assert!(!is_square_local(&rat(3), &Place::prime(7)).unwrap());
        assert!(is_square_local(&ratio(9, 4), &Place::prime(2)).unwrap());
    }

    #[test]
    fn seventeen_is_a_square_mod_32() {
        // squares of odd residues modulo 32
        let odd_squares: Vec<u32> = (1..32u32).step_by(2).map(|x| x * x % 32).collect();
        assert!(odd_squares.contains(&17));
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_symbol(&rat(1), &rat(-5), &Place::prime(3)).unwrap(), BrInv::Zero);
        assert_eq!(hilbert_symbol(&rat(-1), &rat(-1), &Place::Real).unwrap(), BrInv::Half);
        assert_eq!(hilbert_symbol(&rat(3), &rat(2), &Place::prime(2)).unwrap(), BrInv::Half);
        assert_eq!(hilbert_symbol(&rat(-3), &rat(2), &Place::prime(2)).unwrap(), BrInv::Half);
        assert_eq!(hilbert_symbol(&rat(-1), &rat(-1), &Place::prime(2)).unwrap(), BrInv::Half);
        assert_eq!(hilbert_symbol(&rat(2), &rat(2), &Place::prime(2)).unwrap(), BrInv::Zero);
        assert_eq!(hilbert_symbol(&rat(3), &rat(3), &Place::prime(3)).unwrap(), BrInv::Half);
    }

    #[test]
    fn square_class_normalization() {
        let c = SquareClass::new(rat(512)).unwrap();
        assert_eq!(c.normalized(), &BigInt::from(2));
        assert_eq!(SquareClass::new(ratio(1, 2)).unwrap(), c);
        assert!(SquareClass::new(ratio(9, 4)).unwrap().is_square());
    }

    #[test]
    fn inv_arithmetic() {
        assert_eq!(BrInv::Half + BrInv::Half, BrInv::Zero);
        assert_eq!([BrInv::Half, BrInv::Zero, BrInv::Half, BrInv::Half].into_iter().sum::<BrInv>(), BrInv::Half);
    }
}
