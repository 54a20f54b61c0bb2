//! Polynomials over a prime field F_p with p < 2^32.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Polynomial over F_p, lowest degree first, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPoly {
    p: u64,
    c: Vec<u64>,
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

impl ModPoly {
    pub fn new(p: u64, mut c: Vec<u64>) -> Self {
        assert!(p < (1 << 32));
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        ModPoly { p, c }
    }

    pub fn from_bigints(coeffs: &[BigInt], p: u64) -> Self {
        let pb = BigInt::from(p);
        ModPoly::new(
            p,
            coeffs
                .iter()
                .map(|c| c.mod_floor(&pb).to_u64().unwrap())
                .collect(),
        )
    }

    pub fn zero(p: u64) -> Self {
        ModPoly { p, c: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        ModPoly::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        ModPoly::new(p, vec![0, 1])
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn to_bigints(&self) -> Vec<BigInt> {
        self.c.iter().map(|&x| BigInt::from(x)).collect()
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.c.iter().rev().fold(0, |acc, &c| (acc * x + c) % self.p)
    }

    pub fn add(&self, o: &ModPoly) -> ModPoly {
        let n = self.c.len().max(o.c.len());
        let get = |v: &Vec<u64>, i: usize| v.get(i).copied().unwrap_or(0);
        ModPoly::new(self.p, (0..n).map(|i| (get(&self.c, i) + get(&o.c, i)) % self.p).collect())
    }

    pub fn sub(&self, o: &ModPoly) -> ModPoly {
        let n = self.c.len().max(o.c.len());
        let get = |v: &Vec<u64>, i: usize| v.get(i).copied().unwrap_or(0);
        ModPoly::new(
            self.p,
            (0..n)
                .map(|i| (get(&self.c, i) + self.p - get(&o.c, i)) % self.p)
                .collect(),
        )
    }

    pub fn mul(&self, o: &ModPoly) -> ModPoly {
        if self.is_zero() || o.is_zero() {
            return ModPoly::zero(self.p);
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % self.p;
            }
        }
        ModPoly::new(self.p, out)
    }

    pub fn scale(&self, s: u64) -> ModPoly {
        ModPoly::new(self.p, self.c.iter().map(|&a| a * (s % self.p) % self.p).collect())
    }

    pub fn monic(&self) -> ModPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.lead(), self.p))
    }

    pub fn div_rem(&self, d: &ModPoly) -> (ModPoly, ModPoly) {
        assert!(!d.is_zero(), "division by zero polynomial mod p");
        if self.c.len() < d.c.len() {
            return (ModPoly::zero(self.p), self.clone());
        }
        let p = self.p;
        let dd = d.deg();
        let inv = inv_mod(d.lead(), p);
        let mut rem = self.c.clone();
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd] * inv % p;
            if c != 0 {
                for (j, &dc) in d.c.iter().enumerate() {
                    rem[i + j] = (rem[i + j] + p - c * dc % p) % p;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (ModPoly::new(p, quot), ModPoly::new(p, rem))
    }

    pub fn rem(&self, d: &ModPoly) -> ModPoly {
        self.div_rem(d).1
    }

    pub fn gcd(&self, o: &ModPoly) -> ModPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s·self + t·o = g`, `g` monic.
    pub fn ext_gcd(&self, o: &ModPoly) -> (ModPoly, ModPoly, ModPoly) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (ModPoly::one(p), ModPoly::zero(p));
        let (mut t0, mut t1) = (ModPoly::zero(p), ModPoly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s2 = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        let inv = inv_mod(r0.lead(), p);
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    pub fn derivative(&self) -> ModPoly {
        ModPoly::new(
            self.p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| (i as u64 % self.p) * c % self.p)
                .collect(),
        )
    }

    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).deg() == 0
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, e: &BigUint, m: &ModPoly) -> ModPoly {
        let mut result = ModPoly::one(self.p).rem(m);
        let base = self.rem(m);
        for i in (0..e.bits()).rev() {
            result = result.mul(&result).rem(m);
            if e.bit(i) {
                result = result.mul(&base).rem(m);
            }
        }
        result
    }

    fn random_below(deg: usize, p: u64, rng: &mut ChaCha8Rng) -> ModPoly {
        ModPoly::new(p, (0..deg).map(|_| rng.gen_range(0..p)).collect())
    }
}

/// Distinct-degree factorization of a monic squarefree polynomial:
/// pairs `(g, d)` where `g` is the product of all irreducible factors of
/// degree `d`.
pub fn distinct_degree(f: &ModPoly) -> Vec<(ModPoly, usize)> {
    let p = f.modulus();
    let pe = BigUint::from(p);
    let mut out = Vec::new();
    let mut rest = f.monic();
    let mut h = ModPoly::x(p).rem(&rest);
    let mut d = 0;
    while rest.deg() >= 2 * (d + 1) {
        d += 1;
        h = h.pow_mod(&pe, &rest);
        let g = h.sub(&ModPoly::x(p)).gcd(&rest);
        if g.deg() > 0 {
            rest = rest.div_rem(&g).0;
            h = h.rem(&rest);
            out.push((g, d));
        }
    }
    if rest.deg() > 0 {
        let dd = rest.deg();
        out.push((rest, dd));
    }
    out
}

/// Splits a monic product of distinct irreducibles of degree `d` (odd p).
pub fn equal_degree(f: &ModPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<ModPoly> {
    if f.deg() == d {
        return vec![f.clone()];
    }
    let p = f.modulus();
    let e = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
    loop {
        let a = ModPoly::random_below(f.deg(), p, rng);
        if a.deg() == 0 {
            continue;
        }
        let g = a.gcd(f);
        let split = if g.deg() > 0 {
            g
        } else {
            a.pow_mod(&e, f).sub(&ModPoly::one(p)).gcd(f)
        };
        if split.deg() > 0 && split.deg() < f.deg() {
            let other = f.div_rem(&split).0;
            let mut out = equal_degree(&split, d, rng);
            out.extend(equal_degree(&other, d, rng));
            return out;
        }
    }
}

/// Monic irreducible factors of a squarefree polynomial over F_p (p odd),
/// sorted by degree then coefficients.
pub fn factor_squarefree(f: &ModPoly, rng: &mut ChaCha8Rng) -> Vec<ModPoly> {
    assert!(f.modulus() % 2 == 1, "odd characteristic only");
    if f.deg() == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (g, d) in distinct_degree(f) {
        out.extend(equal_degree(&g, d, rng));
    }
    out.sort_by(|a, b| a.deg().cmp(&b.deg()).then_with(|| a.c.cmp(&b.c)));
    out
}

/// Degrees of the irreducible factors of a squarefree polynomial over F_p,
/// without splitting equal-degree parts.
pub fn factor_degrees(f: &ModPoly) -> Vec<usize> {
    let mut out = Vec::new();
    for (g, d) in distinct_degree(f) {
        for _ in 0..g.deg() / d {
            out.push(d);
        }
    }
    out.sort();
    out
}

/// Roots in F_p of an arbitrary non-zero polynomial.
pub fn roots(f: &ModPoly) -> Vec<u64> {
    let p = f.modulus();
    if f.is_zero() {
        return (0..p).collect();
    }
    if p < 64 {
        return (0..p).filter(|&x| f.eval(x) == 0).collect();
    }
    // gcd with x^p - x isolates the product of linear factors
    let m = f.monic();
    let xp = ModPoly::x(p).pow_mod(&BigUint::from(p), &m);
    let lin = xp.sub(&ModPoly::x(p)).gcd(&m);
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(p);
    let mut out: Vec<u64> = equal_degree_or_empty(&lin, &mut rng)
        .into_iter()
        .map(|g| (p - g.c[0]) % p)
        .collect();
    out.sort();
    out
}

fn equal_degree_or_empty(f: &ModPoly, rng: &mut ChaCha8Rng) -> Vec<ModPoly> {
    if f.deg() == 0 {
        Vec::new()
    } else {
        equal_degree(f, 1, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn factors_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // (x + 1)(x + 4)(x^2 + 2) over F_5
        let f = ModPoly::new(5, vec![1, 1])
            .mul(&ModPoly::new(5, vec![4, 1]))
            .mul(&ModPoly::new(5, vec![2, 0, 1]));
        let fs = factor_squarefree(&f, &mut rng);
        assert_eq!(fs.len(), 3);
        let prod = fs.iter().fold(ModPoly::one(5), |a, g| a.mul(g));
        assert_eq!(prod, f.monic());
        assert_eq!(factor_degrees(&f), vec![1, 1, 2]);
    }

    #[test]
    fn roots_mod_large_prime() {
        let p = 1_000_003;
        let f = ModPoly::new(p, vec![p - 6, 1]).mul(&ModPoly::new(p, vec![p - 77, 1]));
        assert_eq!(roots(&f), vec![6, 77]);
        assert_eq!(roots(&ModPoly::new(p, vec![1, 0, 1])).len(), 2 * usize::from(p % 4 == 1));
    }

    #[test]
    fn extended_gcd_identity() {
        let a = ModPoly::new(7, vec![1, 2, 3]);
        let b = ModPoly::new(7, vec![5, 1]);
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
        assert_eq!(g, ModPoly::one(7));
    }
}
