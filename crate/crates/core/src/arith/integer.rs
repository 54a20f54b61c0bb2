//! Arbitrary-precision integer helpers: primality, factorization, square-free
//! parts and Legendre symbols.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

const TRIAL_LIMIT: u64 = 1 << 20;

/// Witness set that makes Miller–Rabin deterministic below 3.3 * 10^24.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn small_primes() -> &'static [u64] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        // sieve up to 2^10 is enough for trial division below 2^20
        let limit = 1usize << 10;
        let mut sieve = vec![true; limit + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= limit {
            if sieve[i] {
                let mut j = i * i;
                while j <= limit {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=limit).filter(|&k| sieve[k]).map(|k| k as u64).collect()
    })
}

/// Deterministic primality test for non-negative integers.
///
/// Numbers below 2^20 are decided by trial division; larger ones by
/// Miller–Rabin with the first thirteen prime bases.
pub fn is_prime(n: &BigInt) -> bool {
    if n.sign() != Sign::Plus {
        return false;
    }
    if let Some(small) = n.to_u64() {
        if small < TRIAL_LIMIT {
            if small < 2 {
                return false;
            }
            for &p in small_primes() {
                if p * p > small {
                    return true;
                }
                if small % p == 0 {
                    return small == p;
                }
            }
            return true;
        }
    }
    for &p in small_primes().iter().take(40) {
        if (n % p).is_zero() {
            return false;
        }
    }
    miller_rabin(n.magnitude())
}

fn miller_rabin(n: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'bases: for &a in MR_BASES.iter() {
        let a = BigUint::from(a);
        if &a >= n {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(&BigInt::from(k)) {
        k += 1;
    }
    k
}

/// Iterator over the primes 2, 3, 5, ...
pub fn primes() -> impl Iterator<Item = u64> {
    let mut current = 1u64;
    std::iter::from_fn(move || {
        current = next_prime(current);
        Some(current)
    })
}

/// Exponent of the prime `p` in the non-zero integer `n`.
pub fn int_valuation(n: &BigInt, p: &BigInt) -> u32 {
    debug_assert!(!n.is_zero());
    let mut n = n.abs();
    let mut count = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return count;
        }
        n = q;
        count += 1;
    }
}

/// Splits `n = p^v * u` with `p ∤ u`.
pub fn split_prime_power(n: &BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut u = n.clone();
    let mut count = 0;
    loop {
        let (q, r) = u.div_rem(p);
        if !r.is_zero() {
            return (count, u);
        }
        u = q;
        count += 1;
    }
}

fn pollard_rho(n: &BigInt) -> BigInt {
    // Brent's variant; n is odd composite here.
    let mut c = BigInt::one();
    loop {
        let f = |x: &BigInt| (x * x + &c) % n;
        let mut x = BigInt::from(2);
        let mut y = x.clone();
        let mut d = BigInt::one();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of |n| as sorted `(prime, exponent)` pairs.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    if n.is_zero() {
        return out;
    }
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if (&pb * &pb) > n {
            break;
        }
        let (e, rest) = split_prime_power(&n, &pb);
        if e > 0 {
            out.push((pb, e));
            n = rest;
        }
    }
    let mut stack = vec![n];
    let mut large: Vec<BigInt> = Vec::new();
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            large.push(m);
            continue;
        }
        // perfect squares confuse rho with c = 1 less often than this check helps
        let r = m.sqrt();
        if &r * &r == m {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let d = pollard_rho(&m);
        stack.push(&m / &d);
        stack.push(d);
    }
    large.sort();
    for p in large {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out.sort();
    out
}

/// Distinct prime divisors of |n| (empty for 0 and ±1).
pub fn prime_divisors(n: &BigInt) -> Vec<BigInt> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Square-free part of a non-zero integer, keeping the sign.
pub fn squarefree_part(n: &BigInt) -> BigInt {
    assert!(!n.is_zero(), "square-free part of zero");
    let mut out = if n.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    for (p, e) in factorize(n) {
        if e % 2 == 1 {
            out *= p;
        }
    }
    out
}

/// Whether the integer is a perfect square (negative numbers are not).
pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// Legendre symbol (a/p) for an odd prime p, as -1, 0 or 1.
pub fn legendre(a: &BigInt, p: &BigInt) -> i8 {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return 0;
    }
    let e = (p - 1u32) / 2u32;
    let r = a.modpow(&e, p);
    if r.is_one() {
        1
    } else {
        -1
    }
}

/// Symmetric residue of `a` modulo `m` in (-m/2, m/2].
pub fn symmetric_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let r = a.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn primality_small_and_large() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(&b(n))).map(|n| n as u64).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(&b(1_000_003)));
        assert!(!is_prime(&b(1_000_001)));
        // Mersenne prime 2^61 - 1 and a strong pseudoprime to several bases
        assert!(is_prime(&((BigInt::one() << 61u32) - 1)));
        assert!(!is_prime(&"3215031751".parse::<BigInt>().unwrap()));
        assert!(!is_prime(&b(-7)));
    }

    #[test]
    fn factorization_round_trip() {
        for n in [1i64, 2, 12, 97, 360, 1 << 20, 999_983 * 1_000_003, -128] {
            let f = factorize(&b(n));
            let prod: BigInt = f.iter().map(|(p, e)| p.pow(*e)).product();
            assert_eq!(prod, b(n).abs());
            assert!(f.iter().all(|(p, _)| is_prime(p)));
        }
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_part(&b(512)), b(2));
        assert_eq!(squarefree_part(&b(-128)), b(-2));
        assert_eq!(squarefree_part(&b(72)), b(2));
        assert_eq!(squarefree_part(&b(-1)), b(-1));
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre(&b(2), &b(7)), 1);
        assert_eq!(legendre(&b(2), &b(5)), -1);
        assert_eq!(legendre(&b(-1), &b(13)), 1);
        assert_eq!(legendre(&b(14), &b(7)), 0);
    }
}
