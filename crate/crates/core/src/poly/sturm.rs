//! Real root isolation with Sturm sequences over exact rationals.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use super::RationalPoly;
use crate::arith::Rational;

/// A real root of a squarefree polynomial: either an exact rational, or the
/// unique root inside the open interval `(lo, hi)` where the polynomial does
/// not vanish at either endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealRoot {
    Exact(Rational),
    Isolated { lo: Rational, hi: Rational },
}

impl RealRoot {
    pub fn lower(&self) -> &Rational {
        match self {
            RealRoot::Exact(r) => r,
            RealRoot::Isolated { lo, .. } => lo,
        }
    }

    pub fn upper(&self) -> &Rational {
        match self {
            RealRoot::Exact(r) => r,
            RealRoot::Isolated { hi, .. } => hi,
        }
    }

    /// A rational approximation (the exact value or the interval midpoint).
    pub fn approx(&self) -> Rational {
        (self.lower() + self.upper()) / Rational::from_integer(2.into())
    }
}

pub fn sturm_sequence(f: &RationalPoly) -> Vec<RationalPoly> {
    let mut seq = vec![f.clone(), f.derivative()];
    while !seq.last().unwrap().is_zero() {
        let n = seq.len();
        let r = seq[n - 2].rem(&seq[n - 1]);
        seq.push(-&r);
    }
    seq.pop();
    seq
}

fn sign(r: &Rational) -> i8 {
    match r.cmp(&Rational::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn variations_at(seq: &[RationalPoly], x: &Rational) -> usize {
    variations(seq.iter().map(|p| sign(&p.eval(x))))
}

fn variations_at_infinity(seq: &[RationalPoly], positive: bool) -> usize {
    variations(seq.iter().map(|p| {
        let s = sign(&p.leading());
        if !positive && p.deg() % 2 == 1 {
            -s
        } else {
            s
        }
    }))
}

/// Squarefree part `f / gcd(f, f')`, monic.
pub fn squarefree_part(f: &RationalPoly) -> RationalPoly {
    if f.is_constant() {
        return f.clone();
    }
    f.div_rem(&f.gcd(&f.derivative())).0.monic()
}

/// Number of distinct real roots.
pub fn count_real_roots(f: &RationalPoly) -> usize {
    if f.is_constant() {
        return 0;
    }
    let seq = sturm_sequence(&squarefree_part(f));
    variations_at_infinity(&seq, false) - variations_at_infinity(&seq, true)
}

/// Number of distinct roots in the half-open interval `(lo, hi]`.
pub fn count_roots_in(f: &RationalPoly, lo: &Rational, hi: &Rational) -> usize {
    if f.is_constant() {
        return 0;
    }
    let seq = sturm_sequence(&squarefree_part(f));
    variations_at(&seq, lo) - variations_at(&seq, hi)
}

pub fn has_real_root(f: &RationalPoly) -> bool {
    count_real_roots(f) > 0
}

fn cauchy_bound(f: &RationalPoly) -> Rational {
    let lead = f.leading().abs();
    let m = f.coeffs()[..f.deg()]
        .iter()
        .map(|c| c.abs() / &lead)
        .max()
        .unwrap_or_else(Rational::zero);
    // strictly beyond the Cauchy bound so that ±M are never roots
    m + Rational::from_integer(2.into())
}

/// Sorted isolating data for the distinct real roots of `f`.
pub fn isolate_real_roots(f: &RationalPoly) -> Vec<RealRoot> {
    if f.is_constant() {
        return Vec::new();
    }
    let g = squarefree_part(f);
    let seq = sturm_sequence(&g);
    let m = cauchy_bound(&g);
    let two = Rational::from_integer(2.into());
    let mut out = Vec::new();
    let lo0 = -m.clone();
    let mut stack = vec![(lo0.clone(), m.clone(), variations_at(&seq, &lo0), variations_at(&seq, &m))];
    while let Some((lo, hi, vlo, vhi)) = stack.pop() {
        let count = vlo - vhi;
        if count == 0 {
            continue;
        }
        if count == 1 {
            if g.eval(&hi).is_zero() {
                out.push(RealRoot::Exact(hi));
                continue;
            }
            if !g.eval(&lo).is_zero() {
                out.push(RealRoot::Isolated { lo, hi });
                continue;
            }
        }
        let mid = (&lo + &hi) / &two;
        let vmid = variations_at(&seq, &mid);
        stack.push((lo, mid.clone(), vlo, vmid));
        stack.push((mid, hi, vmid, vhi));
    }
    out.sort_by(|a, b| a.lower().cmp(b.lower()));
    out
}

/// Halves the isolating interval of a root of squarefree `g`.
pub fn refine(g: &RationalPoly, root: &RealRoot) -> RealRoot {
    match root {
        RealRoot::Exact(_) => root.clone(),
        RealRoot::Isolated { lo, hi } => {
            let mid = (lo + hi) / Rational::from_integer(2.into());
            let fm = g.eval(&mid);
            if fm.is_zero() {
                return RealRoot::Exact(mid);
            }
            if sign(&g.eval(lo)) != sign(&fm) {
                RealRoot::Isolated { lo: lo.clone(), hi: mid }
            } else {
                RealRoot::Isolated { lo: mid, hi: hi.clone() }
            }
        }
    }
}

/// Sign of `h` at a root of `f` described by `root` (as produced by
/// [`isolate_real_roots`] for `f`).
pub fn sign_at_root(h: &RationalPoly, f: &RationalPoly, root: &RealRoot) -> i8 {
    let g = squarefree_part(f);
    let mut root = root.clone();
    if let RealRoot::Exact(r) = &root {
        return sign(&h.eval(r));
    }
    if h.is_zero() {
        return 0;
    }
    let common = g.gcd(h);
    if !common.is_constant() {
        let (lo, hi) = (root.lower().clone(), root.upper().clone());
        if count_roots_in(&common, &lo, &hi) > 0 {
            return 0;
        }
    }
    let hs = squarefree_part(h);
    loop {
        match &root {
            RealRoot::Exact(r) => return sign(&h.eval(r)),
            RealRoot::Isolated { lo, hi } => {
                if hs.is_constant()
                    || (!hs.eval(lo).is_zero() && count_roots_in(&hs, lo, hi) == 0)
                {
                    return sign(&h.eval(lo));
                }
            }
        }
        root = refine(&g, &root);
    }
}

/// One rational sample point in each connected component of R minus the
/// real roots of `f`.
pub fn sample_points(f: &RationalPoly) -> Vec<Rational> {
    let g = squarefree_part(f);
    let mut roots = isolate_real_roots(&g);
    if roots.is_empty() {
        return vec![Rational::zero()];
    }
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let mut out = vec![roots[0].lower() - &one];
    for i in 0..roots.len() - 1 {
        while roots[i].upper() >= roots[i + 1].lower() {
            roots[i] = refine(&g, &roots[i]);
            roots[i + 1] = refine(&g, &roots[i + 1]);
        }
        out.push((roots[i].upper() + roots[i + 1].lower()) / &two);
    }
    out.push(roots.last().unwrap().upper() + &one);
    out
}

/// Whether `f` takes a strictly positive value somewhere on R.
pub fn takes_positive_value(f: &RationalPoly) -> bool {
    sample_points(f).iter().any(|x| f.eval(x).is_positive())
}

/// Whether `f` takes a strictly negative value somewhere on R.
pub fn takes_negative_value(f: &RationalPoly) -> bool {
    sample_points(f).iter().any(|x| f.eval(x).is_negative())
}
