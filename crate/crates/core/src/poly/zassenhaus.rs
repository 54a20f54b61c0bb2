//! Zassenhaus factorization of squarefree primitive integer polynomials:
//! modular factorization at a small prime, quadratic Hensel lifting past the
//! Mignotte bound, and subset recombination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::modp::{factor_squarefree, ModPoly};
use super::RationalPoly;
use crate::arith::integer::{is_prime, mod_inverse};

/// Fixed seed for the randomized equal-degree splitting; factorizations are
/// deterministic.
const RNG_SEED: u64 = 0x5eed_f00d;

type IntPoly = Vec<BigInt>;

fn trim(mut a: IntPoly) -> IntPoly {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

fn reduce(a: &[BigInt], m: &BigInt) -> IntPoly {
    trim(a.iter().map(|c| c.mod_floor(m)).collect())
}

fn sym_reduce(a: &[BigInt], m: &BigInt) -> IntPoly {
    let half = m / 2;
    trim(
        a.iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

fn add(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

fn sub(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

fn mul(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn scale(a: &[BigInt], s: &BigInt) -> IntPoly {
    trim(a.iter().map(|c| c * s).collect())
}

/// Division by a monic polynomial modulo m.
fn div_rem_monic(a: &[BigInt], d: &[BigInt], m: &BigInt) -> (IntPoly, IntPoly) {
    let a = reduce(a, m);
    let dd = d.len() - 1;
    debug_assert!(d[dd].mod_floor(m).is_one());
    if a.len() <= dd {
        return (Vec::new(), a);
    }
    let mut rem = a.clone();
    let mut quot = vec![BigInt::zero(); a.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].mod_floor(m);
        if !c.is_zero() {
            for (j, dc) in d.iter().enumerate() {
                rem[i + j] = (&rem[i + j] - &c * dc).mod_floor(m);
            }
        }
        quot[i] = c;
    }
    rem.truncate(dd);
    (trim(quot), reduce(&rem, m))
}

/// One quadratic Hensel step: from `f ≡ g h (mod m)` with `s g + t h ≡ 1`
/// to the same relations modulo `m^2`. `h` is monic.
fn hensel_step(
    m: &BigInt,
    f: &[BigInt],
    g: &[BigInt],
    h: &[BigInt],
    s: &[BigInt],
    t: &[BigInt],
) -> (IntPoly, IntPoly, IntPoly, IntPoly) {
    let m2 = m * m;
    let e = reduce(&sub(f, &mul(g, h)), &m2);
    let (q, r) = div_rem_monic(&mul(s, &e), h, &m2);
    let g2 = reduce(&add(&add(g, &mul(t, &e)), &mul(&q, g)), &m2);
    let h2 = reduce(&add(h, &r), &m2);
    let b = reduce(&sub(&add(&mul(s, &g2), &mul(t, &h2)), &[BigInt::one()]), &m2);
    let (c, d) = div_rem_monic(&mul(s, &b), &h2, &m2);
    let s2 = reduce(&sub(s, &d), &m2);
    let t2 = reduce(&sub(&sub(t, &mul(t, &b)), &mul(&c, &g2)), &m2);
    (g2, h2, s2, t2)
}

/// Lifts `f ≡ g0 · h0 (mod p)` to a factorization modulo `big`, a power of p.
fn hensel_two(f: &[BigInt], g0: &ModPoly, h0: &ModPoly, p: u64, big: &BigInt) -> (IntPoly, IntPoly) {
    let (one, s0, t0) = g0.ext_gcd(h0);
    debug_assert_eq!(one.deg(), 0);
    let mut m = BigInt::from(p);
    let (mut g, mut h, mut s, mut t) = (g0.to_bigints(), h0.to_bigints(), s0.to_bigints(), t0.to_bigints());
    while &m < big {
        let (g2, h2, s2, t2) = hensel_step(&m, f, &g, &h, &s, &t);
        g = g2;
        h = h2;
        s = s2;
        t = t2;
        m = &m * &m;
    }
    (reduce(&g, big), reduce(&h, big))
}

/// Coefficient bound for `lc(f) · g` where g is any factor of f.
fn mignotte_bound(f: &[BigInt]) -> BigInt {
    let n = f.len() - 1;
    let norm2: BigInt = f.iter().map(|c| c * c).sum::<BigInt>().sqrt() + 1;
    (BigInt::one() << n) * norm2 * f[n].abs()
}

fn choose_prime(f: &[BigInt]) -> u64 {
    let lc = f.last().unwrap();
    let mut p = 3u64;
    loop {
        if is_prime(&BigInt::from(p)) && !(lc % p).is_zero() {
            let fp = ModPoly::from_bigints(f, p);
            if fp.deg() == f.len() - 1 && fp.is_squarefree() {
                return p;
            }
        }
        p += 2;
    }
}

fn primitive_positive(a: &[BigInt]) -> IntPoly {
    let g = a.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let g = if a.last().unwrap().is_negative() { -g } else { g };
    a.iter().map(|c| c / &g).collect()
}

fn exact_quotient(f: &[BigInt], g: &[BigInt]) -> Option<IntPoly> {
    // cheap constant-term divisibility screen before full division
    if !g[0].is_zero() && !(&f[0] % &g[0]).is_zero() {
        return None;
    }
    let (q, r) = RationalPoly::from_bigints(f).div_rem(&RationalPoly::from_bigints(g));
    if !r.is_zero() {
        return None;
    }
    q.integer_coeffs()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Irreducible factors over Z of a primitive, squarefree integer polynomial
/// with positive leading coefficient, each primitive with positive leading
/// coefficient, sorted by degree then coefficients.
pub fn factor_squarefree_integer(f: &[BigInt]) -> Vec<IntPoly> {
    let f = trim(f.to_vec());
    let n = f.len() - 1;
    if n <= 1 {
        return vec![f];
    }
    let p = choose_prime(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(RNG_SEED);
    let fp = ModPoly::from_bigints(&f, p);
    let modular = factor_squarefree(&fp, &mut rng);
    if modular.len() == 1 {
        return vec![f];
    }

    let bound = mignotte_bound(&f) * 2 + 1;
    let pb = BigInt::from(p);
    let mut big = pb.clone();
    while big <= bound {
        big *= &pb;
    }

    // sequential two-factor lifting: peel one monic modular factor at a time
    let lc = f[n].clone();
    let lc_p = (lc.mod_floor(&pb)).to_u64().unwrap();
    let mut lifted: Vec<IntPoly> = Vec::new();
    let mut current = f.clone();
    for i in 0..modular.len() - 1 {
        let h0 = &modular[i];
        let g0 = modular[i + 1..]
            .iter()
            .fold(ModPoly::new(p, vec![lc_p]), |acc, g| acc.mul(g));
        let (g, h) = hensel_two(&current, &g0, h0, p, &big);
        lifted.push(h);
        current = g;
    }
    let lc_inv = mod_inverse(&lc, &big).expect("p does not divide lc");
    lifted.push(reduce(&scale(&current, &lc_inv), &big));

    let mut result = Vec::new();
    let mut f_cur = f;
    let mut k = 1;
    while 2 * k <= lifted.len() {
        let mut found = None;
        for subset in combinations(lifted.len(), k) {
            let lc_cur = f_cur.last().unwrap().clone();
            let prod = subset
                .iter()
                .fold(vec![lc_cur], |acc, &i| reduce(&mul(&acc, &lifted[i]), &big));
            let cand = primitive_positive(&sym_reduce(&prod, &big));
            if cand.len() < 2 {
                continue;
            }
            if let Some(q) = exact_quotient(&f_cur, &cand) {
                found = Some((subset, cand, q));
                break;
            }
        }
        match found {
            Some((subset, cand, q)) => {
                result.push(cand);
                f_cur = q;
                for &i in subset.iter().rev() {
                    lifted.remove(i);
                }
            }
            None => k += 1,
        }
    }
    if f_cur.len() > 1 {
        result.push(primitive_positive(&f_cur));
    }
    result.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    result
}

/// Whether `f` (primitive squarefree integer polynomial) is irreducible over Q.
pub fn is_irreducible_integer(f: &[BigInt]) -> bool {
    factor_squarefree_integer(f).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> IntPoly {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn swinnerton_dyer_like_quartic_is_irreducible() {
        // x^4 - 10x^2 + 1 splits modulo every prime but is irreducible over Q
        let f = ints(&[1, 0, -10, 0, 1]);
        assert_eq!(factor_squarefree_integer(&f), vec![f]);
    }

    #[test]
    fn splits_constructed_product() {
        let a = ints(&[1, 0, 1]);
        let b = ints(&[-3, 2]);
        let c = ints(&[5, 1, 0, 7]);
        let f = mul(&mul(&a, &b), &c);
        let fs = factor_squarefree_integer(&f);
        assert_eq!(fs, vec![b, a, c]);
    }

    #[test]
    fn non_monic_factors() {
        // (2x^2 - 1)(3x^2 + 2)
        let f = mul(&ints(&[-1, 0, 2]), &ints(&[2, 0, 3]));
        assert_eq!(factor_squarefree_integer(&f).len(), 2);
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 1).len(), 3);
    }
}
