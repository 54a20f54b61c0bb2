//! Square testing in residue fields `Q[t]/(p_i)`.
//!
//! The Trager norm is the ground truth for both answers. Local screening at
//! unramified primes can only prove non-squareness; odd degree rules out
//! every non-square rational at once.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::integer::{legendre, primes};
use crate::arith::{is_rational_square, Prime, Rational};
use crate::error::{Error, Result};
use crate::poly::modp::{factor_degrees, ModPoly};
use crate::poly::{discriminant, factor_over_q, RationalPoly};

/// An element of `Q[t]/(modulus)` stored as its reduced representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NumberFieldElement {
    pub modulus: RationalPoly,
    pub value: RationalPoly,
}

impl NumberFieldElement {
    pub fn new(modulus: RationalPoly, value: RationalPoly) -> Self {
        let value = value.rem(&modulus);
        NumberFieldElement { modulus, value }
    }

    pub fn mul(&self, other: &NumberFieldElement) -> NumberFieldElement {
        NumberFieldElement::new(self.modulus.clone(), &self.value * &other.value)
    }

    pub fn square(&self) -> NumberFieldElement {
        self.mul(self)
    }

    /// Whether the element equals the rational constant `c`.
    pub fn equals_constant(&self, c: &Rational) -> bool {
        self.value == RationalPoly::constant(c.clone())
    }
}

fn field_inverse(a: &RationalPoly, m: &RationalPoly) -> Option<RationalPoly> {
    // extended Euclid: track s with s·a ≡ r (mod m)
    let (mut r0, mut r1) = (m.clone(), a.rem(m));
    let (mut s0, mut s1) = (RationalPoly::zero(), RationalPoly::one());
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, r);
        let s2 = &s0 - &(&q * &s1);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if !r0.is_constant() {
        return None;
    }
    Some(s0.scale(&r0.leading().recip()).rem(m))
}

/// Why an element is not a square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonSquareReason {
    /// Odd-degree field and a non-square rational: Q(√d) cannot embed.
    OddDegree,
    /// `d` is a non-square in some unramified completion above `prime`.
    LocalScreen { prime: u64 },
    /// The squarefree Trager norm for this shift has no factor of the field degree.
    TragerNorm { shift: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum SquareTest {
    Square { witness: NumberFieldElement },
    NonSquare { reason: NonSquareReason },
}

impl SquareTest {
    pub fn is_square(&self) -> bool {
        matches!(self, SquareTest::Square { .. })
    }
}

/// Whether screening results are re-derived by the Trager method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScreenMode {
    #[default]
    Fast,
    Exhaustive,
}

fn rational_sqrt(d: &Rational) -> Rational {
    Rational::new(d.numer().sqrt(), d.denom().sqrt())
}

fn require_irreducible(p: &RationalPoly) -> Result<RationalPoly> {
    if p.is_constant() {
        return Err(Error::ModulusReducible);
    }
    let f = factor_over_q(p);
    if f.factors.len() != 1 || f.factors[0].1 != 1 {
        return Err(Error::ModulusReducible);
    }
    Ok(p.monic())
}

/// Decides whether `d` is a square in `Q[t]/(p_i)`; `true` answers carry a
/// verified square root.
pub fn is_square_in_residue_field(d: &Rational, p_i: &RationalPoly) -> Result<SquareTest> {
    is_square_in_residue_field_with(d, p_i, ScreenMode::Fast)
}

pub fn is_square_in_residue_field_with(
    d: &Rational,
    p_i: &RationalPoly,
    mode: ScreenMode,
) -> Result<SquareTest> {
    if d.is_zero() {
        return Err(Error::ZeroInput("residue field square test"));
    }
    let m = require_irreducible(p_i)?;
    if is_rational_square(d) {
        let w = NumberFieldElement::new(m, RationalPoly::constant(rational_sqrt(d)));
        return Ok(SquareTest::Square { witness: w });
    }
    let screened = if m.deg() % 2 == 1 {
        Some(NonSquareReason::OddDegree)
    } else {
        local_screen(d, &m)
    };
    match (screened, mode) {
        (Some(reason), ScreenMode::Fast) => Ok(SquareTest::NonSquare { reason }),
        (Some(reason), ScreenMode::Exhaustive) => {
            let t = trager_square_test(d, &m);
            assert!(
                !t.is_square(),
                "screening claimed {d} is not a square modulo {m} ({reason:?}) but a root exists"
            );
            Ok(t)
        }
        (None, _) => Ok(trager_square_test(d, &m)),
    }
}

const SCREEN_PRIMES: usize = 40;

fn local_screen(d: &Rational, m: &RationalPoly) -> Option<NonSquareReason> {
    let disc = discriminant(m);
    let mut tried = 0;
    for q in primes().skip(1) {
        if tried >= SCREEN_PRIMES || q > 1 << 20 {
            break;
        }
        let prime = Prime::small(q);
        if let Ok(results) = local_completion_square_test(d, m, &prime, &disc) {
            tried += 1;
            if results.iter().any(|&ok| !ok) {
                return Some(NonSquareReason::LocalScreen { prime: q });
            }
        }
    }
    None
}

fn good_reduction(d: &Rational, m: &RationalPoly, q: &BigInt, disc: &Rational) -> bool {
    let divides = |n: &BigInt| (n % q).is_zero();
    !(divides(&m.denominator())
        || disc.is_zero()
        || divides(disc.numer())
        || divides(disc.denom())
        || divides(d.numer())
        || divides(d.denom()))
}

/// Squareness of `d` in each unramified completion of `Q[t]/(p_i)` above
/// the odd prime `q`, one entry per irreducible factor of `p_i` mod q.
pub fn local_completion_square_test_at(d: &Rational, p_i: &RationalPoly, q: &Prime) -> Result<Vec<bool>> {
    let m = p_i.monic();
    let disc = discriminant(&m);
    local_completion_square_test(d, &m, q, &disc)
}

fn local_completion_square_test(
    d: &Rational,
    m: &RationalPoly,
    q: &Prime,
    disc: &Rational,
) -> Result<Vec<bool>> {
    let qv = q.value();
    if q.is_two() || !good_reduction(d, m, qv, disc) {
        return Err(Error::BadReduction(qv.to_string()));
    }
    let qu = q.to_u64().filter(|&x| x < 1 << 31).ok_or_else(|| Error::BadReduction(qv.to_string()))?;
    let coeffs: Vec<BigInt> = m
        .coeffs()
        .iter()
        .map(|c| {
            let inv = crate::arith::integer::mod_inverse(c.denom(), qv).expect("good reduction");
            (c.numer() * inv).mod_floor(qv)
        })
        .collect();
    let red = ModPoly::from_bigints(&coeffs, qu);
    let residue = (d.numer() * d.denom()).mod_floor(qv);
    let is_qr = legendre(&residue, qv) == 1;
    Ok(factor_degrees(&red)
        .into_iter()
        .map(|f| f % 2 == 0 || is_qr)
        .collect())
}

/// `(x - k t)^2 - d` evaluated at `x = x0`, as a polynomial in t.
fn shifted_quadratic(x0: &Rational, k: i64, d: &Rational) -> RationalPoly {
    let kt = RationalPoly::monomial(Rational::from_integer(k.into()), 1);
    let lin = &RationalPoly::constant(x0.clone()) - &kt;
    &(&lin * &lin) - &RationalPoly::constant(d.clone())
}

/// `N_k(x) = Res_t(m(t), (x - k t)^2 - d)`, by interpolation at 2n+1 points.
pub fn trager_norm(d: &Rational, m: &RationalPoly, k: i64) -> RationalPoly {
    let n = m.deg();
    let points: Vec<Rational> = (0..=2 * n as i64).map(|j| Rational::from_integer(j.into())).collect();
    let values: Vec<Rational> = points
        .iter()
        .map(|x0| crate::poly::resultant(m, &shifted_quadratic(x0, k, d)))
        .collect();
    lagrange(&points, &values)
}

fn lagrange(xs: &[Rational], ys: &[Rational]) -> RationalPoly {
    let mut acc = RationalPoly::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = RationalPoly::one();
        let mut denom = Rational::one();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                basis = &basis * &RationalPoly::linear_root(xj);
                denom *= xi - xj;
            }
        }
        acc = &acc + &basis.scale(&(yi / denom));
    }
    acc
}

fn shifts() -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..).flat_map(|k| [k, -k]))
}

/// `a·x + b` with coefficients in the field, modelling `N mod Q` where
/// `Q = (x - kθ)^2 - d`.
fn reduce_mod_quadratic(norm_factor: &RationalPoly, m: &RationalPoly, k: i64, d: &Rational) -> (RationalPoly, RationalPoly) {
    let ktheta = RationalPoly::monomial(Rational::from_integer(k.into()), 1);
    // x^2 ≡ 2kθ·x - (k^2 θ^2 - d)
    let two_kt = ktheta.scale(&Rational::from_integer(2.into())).rem(m);
    let c0 = (&(&ktheta * &ktheta) - &RationalPoly::constant(d.clone())).rem(m);
    let (mut a, mut b) = (RationalPoly::zero(), RationalPoly::zero());
    for c in norm_factor.coeffs().iter().rev() {
        // (a x + b)·x + c
        let new_a = (&(&two_kt * &a) + &b).rem(m);
        let new_b = (&(-&(&a * &c0)) + &RationalPoly::constant(c.clone())).rem(m);
        a = new_a;
        b = new_b;
    }
    (a, b)
}

/// Trager's method without any screening.
pub fn trager_square_test(d: &Rational, m: &RationalPoly) -> SquareTest {
    let m = m.monic();
    let n = m.deg();
    for k in shifts() {
        let norm = trager_norm(d, &m, k);
        if !norm.is_squarefree() {
            continue;
        }
        let fact = factor_over_q(&norm);
        let Some((factor, _)) = fact.factors.iter().find(|(f, _)| f.deg() == n) else {
            return SquareTest::NonSquare { reason: NonSquareReason::TragerNorm { shift: k } };
        };
        let (a, b) = reduce_mod_quadratic(factor, &m, k, d);
        let inv = field_inverse(&a, &m).expect("linear coefficient is a unit");
        let x0 = (-&(&b * &inv)).rem(&m);
        let g = &x0 - &RationalPoly::monomial(Rational::from_integer(k.into()), 1);
        let witness = NumberFieldElement::new(m.clone(), g);
        assert!(witness.square().equals_constant(d), "Trager witness failed verification");
        return SquareTest::Square { witness };
    }
    unreachable!("shift search always terminates")
}

/// Closed-form criterion over a quadratic modulus `t^2 + bt + c`:
/// `d` is a square iff `d` or `d·(b^2 - 4c)` is a rational square.
pub fn quadratic_modulus_criterion(d: &Rational, m: &RationalPoly) -> bool {
    assert_eq!(m.deg(), 2);
    let m = m.monic();
    let disc = m.coeff(1) * m.coeff(1) - Rational::from_integer(4.into()) * m.coeff(0);
    is_rational_square(d) || is_rational_square(&(d * disc))
}
