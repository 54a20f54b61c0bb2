//! Local solubility of `q(x) = p(t)` over Z_p and R.
//!
//! A residue point `P mod p^k` with `F(P) ≡ 0 mod p^k` whose gradient has
//! minimal valuation `e'` lifts to a Z_p-point as soon as `k ≥ 2e' + 1`.
//! For primitive `x` the adjugate identity bounds the x-gradient valuation by
//! `e = v(2·det G)` (or `v(det 2G)` when `G` has half-integral entries), so
//! exhausting residues to depth `2e + 1` decides `U(Z_p) ≠ ∅` completely.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::integer::{int_valuation, mod_inverse, prime_divisors};
use crate::arith::{format_rational, Place, Prime, Rational};
use crate::error::{Error, Result};
use crate::poly::sturm::isolate_real_roots;
use crate::poly::{discriminant, factor_over_q, resultant, RationalPoly};
use crate::quadform::QuadraticForm;

/// Default number of residue nodes visited before giving up.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

/// Default number of non-primitive strata examined by [`decide_x_zp`].
pub const DEFAULT_DEPTH_BOUND: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolubilityMode {
    /// `(x, y, z)` primitive: points of U.
    Primitive,
    /// Any point of X.
    Any,
}

/// A residue point that Hensel-lifts to a Z_p-point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueWitness {
    /// `(x_1, ..., x_n, t)` modulo `p^precision`.
    pub residues: Vec<BigInt>,
    pub prime: BigInt,
    pub precision: u32,
    /// Minimal valuation of the partial derivatives at the witness.
    pub gradient_valuation: u32,
    /// `x = p^stratum · w` with `w` primitive.
    pub stratum: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Residue(ResidueWitness),
    /// A singular point `(0, ..., 0, t)` with `t` a p-adic root of `p`;
    /// `t` is given by a Hensel-certified residue.
    SingularRoot { t: BigInt, prime: BigInt, precision: u32 },
    /// A real parameter value at which `p(t)` has a sign represented by q.
    Real { t: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalAnswer {
    Yes(Witness),
    No { exhaustion_level: u32 },
    Undecided { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCertificate {
    pub place: Place,
    pub mode: SolubilityMode,
    pub answer: LocalAnswer,
    /// Completeness depth `2e + 1` used for primitive exhaustion.
    pub completeness_depth: Option<u32>,
    /// The unimodular fast path applied.
    pub good_reduction: bool,
}

impl LocalCertificate {
    pub fn is_yes(&self) -> bool {
        matches!(self.answer, LocalAnswer::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self.answer, LocalAnswer::No { .. })
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self.answer, LocalAnswer::Undecided { .. })
    }
}

impl Serialize for LocalCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("place", &self.place)?;
        m.serialize_entry("mode", &self.mode)?;
        match &self.answer {
            LocalAnswer::Yes(w) => {
                m.serialize_entry("answer", "yes")?;
                match w {
                    Witness::Residue(r) => {
                        let res: Vec<String> = r.residues.iter().map(|x| x.to_string()).collect();
                        m.serialize_entry("witness", &res)?;
                        m.serialize_entry("modulus", &(r.prime.to_string(), r.precision))?;
                        m.serialize_entry("gradient_valuation", &r.gradient_valuation)?;
                        m.serialize_entry("stratum", &r.stratum)?;
                    }
                    Witness::SingularRoot { t, prime, precision } => {
                        m.serialize_entry("singular_root_t", &t.to_string())?;
                        m.serialize_entry("modulus", &(prime.to_string(), *precision))?;
                    }
                    Witness::Real { t } => {
                        m.serialize_entry("real_t", &format_rational(t))?;
                    }
                }
            }
            LocalAnswer::No { exhaustion_level } => {
                m.serialize_entry("answer", "no")?;
                m.serialize_entry("exhaustion_level", exhaustion_level)?;
            }
            LocalAnswer::Undecided { reason } => {
                m.serialize_entry("answer", "undecided")?;
                m.serialize_entry("reason", reason)?;
            }
        }
        if let Some(d) = self.completeness_depth {
            m.serialize_entry("completeness_depth", &d)?;
        }
        m.serialize_entry("good_reduction", &self.good_reduction)?;
        m.end()
    }
}

fn small_prime(v: &Place) -> Result<(&Prime, u128)> {
    let p = v.as_prime().ok_or_else(|| Error::InvalidInput("finite place required".into()))?;
    let pu = p
        .to_u64()
        .filter(|&x| x < 1 << 31)
        .ok_or_else(|| Error::InvalidInput(format!("prime {} too large for residue enumeration", p.value())))?;
    Ok((p, pu as u128))
}

/// Reduction of a p-integral rational modulo `m`.
fn reduce_rational(r: &Rational, p: &BigInt, m: &BigInt) -> Result<BigInt> {
    if (r.denom() % p).is_zero() {
        return Err(Error::NonIntegral);
    }
    let inv = mod_inverse(r.denom(), m).expect("denominator prime to p");
    Ok((r.numer() * inv).mod_floor(m))
}

/// Valuation of the integral model data at p, or an error when some
/// coefficient has p in its denominator.
fn check_integral(q: &QuadraticForm, poly: &RationalPoly, p: &BigInt) -> Result<()> {
    let two = Rational::from_integer(2.into());
    let n = q.n();
    for i in 0..n {
        for j in 0..n {
            let c = if i == j { q.gram()[i][i].clone() } else { &q.gram()[i][j] * &two };
            if (c.denom() % p).is_zero() {
                return Err(Error::NonIntegral);
            }
        }
    }
    if poly.coeffs().iter().any(|c| (c.denom() % p).is_zero()) {
        return Err(Error::NonIntegral);
    }
    Ok(())
}

/// `e` in the completeness depth `2e + 1`.
pub fn gradient_bound(q: &QuadraticForm, p: &Prime) -> u32 {
    let integral_gram = q.gram().iter().flatten().all(|c| c.is_integer());
    let det = q.det();
    let scaled = if integral_gram {
        det * Rational::from_integer(2.into())
    } else {
        det * Rational::from_integer(BigInt::from(2).pow(q.n() as u32))
    };
    let v = int_valuation(scaled.numer(), p.value()) as i64 - int_valuation(scaled.denom(), p.value()) as i64;
    v.max(0) as u32
}

/// `F(x, t) = s·q(x) - p(t)` reduced modulo `p^depth`.
struct ResidueSystem {
    p: u128,
    depth: u32,
    modulus: u128,
    n: usize,
    /// Coefficient of `x_i x_j` (i ≤ j) in `s·q`.
    qcoef: Vec<Vec<u128>>,
    poly: Vec<u128>,
    dpoly: Vec<u128>,
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    a * b % m
}

impl ResidueSystem {
    fn new(q: &QuadraticForm, poly: &RationalPoly, p: &Prime, scale_exp: u32, depth: u32) -> Result<Self> {
        let pu = p.to_u64().unwrap() as u128;
        let pb = p.value();
        let mb = pb.pow(depth);
        if mb.bits() > 62 {
            return Err(Error::InvalidInput(format!("precision {}^{} exceeds residue arithmetic", pb, depth)));
        }
        let modulus = mb.to_u128().unwrap();
        let scale = Rational::from_integer(pb.pow(scale_exp));
        let n = q.n();
        let two = Rational::from_integer(2.into());
        let mut qcoef = vec![vec![0u128; n]; n];
        for i in 0..n {
            for j in i..n {
                let c = if i == j { q.gram()[i][i].clone() } else { &q.gram()[i][j] * &two };
                qcoef[i][j] = reduce_rational(&(c * &scale), pb, &mb)?.to_u128().unwrap();
            }
        }
        let mut red = Vec::new();
        for c in poly.coeffs() {
            red.push(reduce_rational(c, pb, &mb)?.to_u128().unwrap());
        }
        let dpoly = red
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mulmod(c, i as u128 % modulus, modulus))
            .collect();
        Ok(ResidueSystem { p: pu, depth, modulus, n, qcoef, poly: red, dpoly })
    }

    fn horner(coeffs: &[u128], t: u128, m: u128) -> u128 {
        coeffs.iter().rev().fold(0, |acc, &c| (mulmod(acc, t, m) + c) % m)
    }

    fn f(&self, x: &[u128], t: u128) -> u128 {
        let m = self.modulus;
        let mut acc = 0u128;
        for i in 0..self.n {
            if x[i] == 0 {
                continue;
            }
            for j in i..self.n {
                if self.qcoef[i][j] != 0 && x[j] != 0 {
                    acc = (acc + mulmod(mulmod(self.qcoef[i][j], x[i], m), x[j], m)) % m;
                }
            }
        }
        (acc + m - Self::horner(&self.poly, t, m)) % m
    }

    fn gradient(&self, x: &[u128], t: u128) -> Vec<u128> {
        let m = self.modulus;
        let mut g = vec![0u128; self.n + 1];
        for i in 0..self.n {
            for j in i..self.n {
                let c = self.qcoef[i][j];
                if c == 0 {
                    continue;
                }
                if i == j {
                    g[i] = (g[i] + mulmod(2 * c % m, x[i], m)) % m;
                } else {
                    g[i] = (g[i] + mulmod(c, x[j], m)) % m;
                    g[j] = (g[j] + mulmod(c, x[i], m)) % m;
                }
            }
        }
        g[self.n] = (m - Self::horner(&self.dpoly, t, m)) % m;
        g
    }

    /// Valuation of a residue known modulo `p^k`, capped at k.
    fn val(&self, r: u128, k: u32) -> u32 {
        let pk = self.p.pow(k);
        let mut r = r % pk;
        if r == 0 {
            return k;
        }
        let mut v = 0;
        while r % self.p == 0 {
            r /= self.p;
            v += 1;
        }
        v
    }
}

enum Search {
    Found(ResidueWitness),
    Exhausted,
    Budget,
}

/// Depth-first search for a Hensel-certified residue point of `F` with
/// primitive x, complete at `depth`.
fn certified_search(sys: &ResidueSystem, budget: &mut u64, stratum: u32, prime: &BigInt) -> Search {
    let p = sys.p;
    let n = sys.n;
    // node: residues mod p^k
    let mut stack: Vec<(Vec<u128>, u128, u32)> = Vec::new();
    let total = (p as usize).pow(n as u32 + 1);
    for idx in (0..total).rev() {
        let mut rest = idx;
        let mut coords = vec![0u128; n + 1];
        for c in coords.iter_mut() {
            *c = (rest % p as usize) as u128;
            rest /= p as usize;
        }
        let t = coords.pop().unwrap();
        if coords.iter().all(|&c| c == 0) {
            continue;
        }
        stack.push((coords, t, 1));
    }
    while let Some((x, t, k)) = stack.pop() {
        if *budget == 0 {
            return Search::Budget;
        }
        *budget -= 1;
        let pk = p.pow(k);
        if sys.f(&x, t) % pk != 0 {
            continue;
        }
        let grad = sys.gradient(&x, t);
        let e = grad.iter().map(|&g| sys.val(g, k)).min().unwrap();
        if e < k && k > 2 * e {
            return Search::Found(ResidueWitness {
                residues: x.iter().chain(std::iter::once(&t)).map(|&c| BigInt::from(c)).collect(),
                prime: prime.clone(),
                precision: k,
                gradient_valuation: e,
                stratum,
            });
        }
        if k >= sys.depth {
            continue;
        }
        // all partials vanish mod p here, so children agree with F mod p^(k+1)
        if e >= 1 && sys.f(&x, t) % (pk * p) != 0 {
            continue;
        }
        let total = (p as usize).pow(n as u32 + 1);
        for idx in (0..total).rev() {
            let mut rest = idx;
            let mut cx = x.clone();
            for c in cx.iter_mut() {
                *c += (rest % p as usize) as u128 * pk;
                rest /= p as usize;
            }
            let ct = t + (rest % p as usize) as u128 * pk;
            stack.push((cx, ct, k + 1));
        }
    }
    Search::Exhausted
}

/// What to do with a surviving node of the residue tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visit {
    /// The ball is fully described; do not refine.
    Stop,
    Refine,
    /// End the whole exploration.
    Abort,
}

/// A node `(x, t) mod p^k` with `F ≡ 0 mod p^k`.
pub struct TreeNode<'a> {
    pub x: &'a [u128],
    pub t: u128,
    pub level: u32,
    /// Some Z_p-point of the required kind is congruent to the node
    /// modulo `p^(level - gradient_valuation)`.
    pub certified: bool,
    pub gradient_valuation: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeOutcome {
    Completed,
    Aborted,
    DepthExceeded,
    Budget,
}

/// Walks all residue balls of `F = q - p` with `F ≡ 0` to increasing
/// precision, letting `visit` decide where to refine. In primitive mode x
/// is primitive; otherwise `x ≠ 0` is only enforced on certification.
pub fn explore_residue_tree(
    q: &QuadraticForm,
    p: &RationalPoly,
    v: &Place,
    mode: SolubilityMode,
    max_depth: u32,
    budget: u64,
    mut visit: impl FnMut(&TreeNode) -> Visit,
) -> Result<TreeOutcome> {
    let (prime, pu) = small_prime(v)?;
    check_integral(q, p, prime.value())?;
    let sys = ResidueSystem::new(q, p, prime, 0, max_depth)?;
    let n = sys.n;
    let fanout = (pu as usize).pow(n as u32 + 1);
    let mut stack: Vec<(Vec<u128>, u128, u32)> = vec![(vec![0; n], 0, 0)];
    let mut budget = budget;
    let mut depth_exceeded = false;
    while let Some((x, t, k)) = stack.pop() {
        if k > 0 {
            if budget == 0 {
                return Ok(TreeOutcome::Budget);
            }
            budget -= 1;
            let pk = pu.pow(k);
            if sys.f(&x, t) % pk != 0 {
                continue;
            }
            if mode == SolubilityMode::Primitive && x.iter().all(|c| c % pu == 0) {
                continue;
            }
            let grad = sys.gradient(&x, t);
            let e = grad.iter().map(|&g| sys.val(g, k)).min().unwrap();
            let certified = e < k && k > 2 * e && {
                let keep = pu.pow(k - e);
                x.iter().any(|c| c % keep != 0)
            };
            match visit(&TreeNode { x: &x, t, level: k, certified, gradient_valuation: e.min(k) }) {
                Visit::Stop => continue,
                Visit::Abort => return Ok(TreeOutcome::Aborted),
                Visit::Refine => {}
            }
            if k >= max_depth {
                depth_exceeded = true;
                continue;
            }
        }
        let pk = pu.pow(k);
        for idx in (0..fanout).rev() {
            let mut rest = idx;
            let mut cx = x.clone();
            for c in cx.iter_mut() {
                *c += (rest % pu as usize) as u128 * pk;
                rest /= pu as usize;
            }
            let ct = t + (rest % pu as usize) as u128 * pk;
            stack.push((cx, ct, k + 1));
        }
    }
    Ok(if depth_exceeded { TreeOutcome::DepthExceeded } else { TreeOutcome::Completed })
}

/// Largest precision usable by residue arithmetic at `p`.
pub fn max_residue_depth(p: &Prime) -> u32 {
    let mut k = 0;
    let mut m = BigInt::one();
    while (&m * p.value()).bits() <= 62 {
        m *= p.value();
        k += 1;
    }
    k
}

/// Primes where the model can have bad reduction: 2, primes of det(q) and
/// of the entries of q, of the leading coefficient and denominators of p,
/// and of the discriminant of the squarefree part of p.
pub fn bad_primes(q: &QuadraticForm, p: &RationalPoly) -> Vec<Prime> {
    let mut ps: Vec<BigInt> = vec![BigInt::from(2)];
    let mut push = |r: &Rational| {
        if !r.is_zero() {
            ps.extend(prime_divisors(r.numer()));
            ps.extend(prime_divisors(r.denom()));
        }
    };
    push(q.det());
    for row in q.gram() {
        for c in row {
            push(c);
        }
    }
    if !p.is_zero() {
        push(&p.leading());
        for c in p.coeffs() {
            if !c.denom().is_one() {
                push(&Rational::from_integer(c.denom().clone()));
            }
        }
        if !p.is_constant() {
            let rad = factor_over_q(p)
                .factors
                .iter()
                .fold(RationalPoly::one(), |acc, (f, _)| &acc * f);
            push(&discriminant(&rad));
        }
    }
    ps.sort();
    ps.dedup();
    ps.into_iter().map(|x| Prime::new(x).expect("prime divisor")).collect()
}

/// Complete decision of `U(Z_p) ≠ ∅` (points with primitive x).
pub fn decide_u_zp(q: &QuadraticForm, p: &RationalPoly, v: &Place) -> Result<LocalCertificate> {
    decide_u_zp_with_budget(q, p, v, DEFAULT_NODE_BUDGET)
}

pub fn decide_u_zp_with_budget(
    q: &QuadraticForm,
    p: &RationalPoly,
    v: &Place,
    budget: u64,
) -> Result<LocalCertificate> {
    let (prime, _) = small_prime(v)?;
    check_integral(q, p, prime.value())?;
    let e = gradient_bound(q, prime);
    let depth = 2 * e + 1;
    let good = !prime.is_two()
        && q.n() >= 3
        && e == 0
        && !(p.leading().numer() % prime.value()).is_zero();
    let mut budget = budget;
    let answer = match ResidueSystem::new(q, p, prime, 0, depth) {
        Err(err) => LocalAnswer::Undecided { reason: err.to_string() },
        Ok(sys) => match certified_search(&sys, &mut budget, 0, prime.value()) {
            Search::Found(w) => LocalAnswer::Yes(Witness::Residue(w)),
            Search::Exhausted => LocalAnswer::No { exhaustion_level: depth },
            Search::Budget => LocalAnswer::Undecided { reason: "node budget exhausted".into() },
        },
    };
    Ok(LocalCertificate {
        place: v.clone(),
        mode: SolubilityMode::Primitive,
        answer,
        completeness_depth: Some(depth),
        good_reduction: good,
    })
}

/// Integer primitive polynomial with the same roots as the radical of `p`.
fn radical_integer(p: &RationalPoly) -> Vec<BigInt> {
    let rad = factor_over_q(p)
        .factors
        .iter()
        .fold(RationalPoly::one(), |acc, (f, _)| &acc * f);
    rad.primitive_integer().1
}

fn eval_int(coeffs: &[BigInt], t: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * t + c)
}

fn deriv_int(coeffs: &[BigInt]) -> Vec<BigInt> {
    coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

fn big_val(n: &BigInt, p: &BigInt, cap: u32) -> u32 {
    if n.is_zero() {
        cap
    } else {
        int_valuation(n, p).min(cap)
    }
}

/// Outcome of the root search for a squarefree integer polynomial over Z_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PadicRoot {
    /// Hensel-certified root residue `t mod p^precision`.
    Root { t: BigInt, precision: u32 },
    None,
    Undecided,
}

/// Roots in Z_p of a squarefree integer polynomial; complete at depth
/// `2·v(Res(f, f')) + 1` because `min(v(f(t)), v(f'(t))) ≤ v(Res)`.
pub fn padic_integral_roots(f: &[BigInt], p: &Prime, max_roots: usize) -> (Vec<(BigInt, u32)>, bool) {
    let pb = p.value();
    let fr = RationalPoly::from_bigints(f);
    if fr.is_constant() {
        return (Vec::new(), true);
    }
    let res = resultant(&fr, &fr.derivative());
    let r = if res.is_zero() { 0 } else { int_valuation(res.numer(), pb) };
    let depth = 2 * r + 1;
    if depth > 400 {
        return (Vec::new(), false);
    }
    let df = deriv_int(f);
    let pu = p.to_u64();
    let Some(pu) = pu.filter(|&x| x < 1 << 20) else {
        return (Vec::new(), false);
    };
    let mut roots = Vec::new();
    let mut stack: Vec<(BigInt, u32)> = (0..pu).rev().map(|t| (BigInt::from(t), 1)).collect();
    let mut visited = 0u64;
    while let Some((t, k)) = stack.pop() {
        visited += 1;
        if visited > 5_000_000 {
            return (roots, false);
        }
        let pk = pb.pow(k);
        if !(eval_int(f, &t) % &pk).is_zero() {
            continue;
        }
        let e = big_val(&(eval_int(&df, &t) % &pk), pb, k);
        if e < k && k > 2 * e {
            roots.push((t, k));
            if roots.len() >= max_roots {
                return (roots, true);
            }
            continue;
        }
        if k >= depth {
            continue;
        }
        for s in (0..pu).rev() {
            stack.push((&t + BigInt::from(s) * &pk, k + 1));
        }
    }
    (roots, true)
}

/// Whether `p` has a root in Z_p.
pub fn has_padic_integral_root(p: &RationalPoly, prime: &Prime) -> PadicRoot {
    if p.is_constant() {
        return PadicRoot::None;
    }
    let f = radical_integer(p);
    let (roots, complete) = padic_integral_roots(&f, prime, 1);
    match roots.into_iter().next() {
        Some((t, precision)) => PadicRoot::Root { t, precision },
        None if complete => PadicRoot::None,
        None => PadicRoot::Undecided,
    }
}

/// `max_{t ∈ Z_p} v(p(t))` when `p` has no root in Z_p.
fn max_valuation_on_zp(p: &RationalPoly, prime: &Prime, cap: u32) -> Option<u32> {
    let (_, coeffs) = p.primitive_integer();
    let content_val = {
        let (c, _) = p.primitive_integer();
        int_valuation(c.numer(), prime.value()) as i64 - int_valuation(c.denom(), prime.value()) as i64
    };
    let pb = prime.value();
    let pu = prime.to_u64()?;
    if pu >= 1 << 20 {
        return None;
    }
    let mut best = 0u32;
    let mut stack: Vec<(BigInt, u32)> = (0..pu).map(|t| (BigInt::from(t), 0)).collect();
    let mut visited = 0u64;
    while let Some((t, k)) = stack.pop() {
        visited += 1;
        if visited > 5_000_000 || k > cap {
            return None;
        }
        // t is a residue mod p^(k+1); the value is determined modulo p^(k+1)
        let value = eval_int(&coeffs, &t);
        let pk1 = pb.pow(k + 1);
        if !(&value % &pk1).is_zero() {
            let v = big_val(&value, pb, k + 1);
            best = best.max(v);
            continue;
        }
        best = best.max(k + 1);
        for s in 0..pu {
            stack.push((&t + BigInt::from(s) * &pk1, k + 1));
        }
    }
    Some((best as i64 + content_val).max(0) as u32)
}

/// Decision of `X(Z_p) ≠ ∅`, allowing non-primitive x and singular points.
pub fn decide_x_zp(q: &QuadraticForm, p: &RationalPoly, v: &Place, depth_bound: u32) -> Result<LocalCertificate> {
    let (prime, _) = small_prime(v)?;
    check_integral(q, p, prime.value())?;
    let u = decide_u_zp(q, p, v)?;
    if u.is_yes() {
        return Ok(LocalCertificate { mode: SolubilityMode::Any, ..u });
    }
    let mk = |answer| LocalCertificate {
        place: v.clone(),
        mode: SolubilityMode::Any,
        answer,
        completeness_depth: u.completeness_depth,
        good_reduction: u.good_reduction,
    };
    match has_padic_integral_root(p, prime) {
        PadicRoot::Root { t, precision } => {
            return Ok(mk(LocalAnswer::Yes(Witness::SingularRoot {
                t,
                prime: prime.value().clone(),
                precision,
            })))
        }
        PadicRoot::Undecided => {
            return Ok(mk(LocalAnswer::Undecided { reason: "p-adic root search inconclusive".into() }))
        }
        PadicRoot::None => {}
    }
    let e = gradient_bound(q, prime);
    let max_val = max_valuation_on_zp(p, prime, 2 * depth_bound + 2);
    let strata = match max_val {
        Some(b) => b / 2,
        None => depth_bound + 1,
    };
    let mut deepest = u.completeness_depth.unwrap_or(0);
    for j in 1..=strata.min(depth_bound) {
        let depth = 2 * (2 * j + e) + 1;
        let sys = match ResidueSystem::new(q, p, prime, 2 * j, depth) {
            Ok(s) => s,
            Err(err) => return Ok(mk(LocalAnswer::Undecided { reason: err.to_string() })),
        };
        let mut budget = DEFAULT_NODE_BUDGET;
        match certified_search(&sys, &mut budget, j, prime.value()) {
            Search::Found(mut w) => {
                // report x = p^j·w
                let pj = prime.value().pow(j);
                let n = q.n();
                for c in w.residues.iter_mut().take(n) {
                    *c *= &pj;
                }
                return Ok(mk(LocalAnswer::Yes(Witness::Residue(w))));
            }
            Search::Budget => return Ok(mk(LocalAnswer::Undecided { reason: "node budget exhausted".into() })),
            Search::Exhausted => deepest = deepest.max(depth),
        }
    }
    if max_val.is_none() || strata > depth_bound {
        return Ok(mk(LocalAnswer::Undecided {
            reason: format!("non-primitive strata beyond depth bound {depth_bound}"),
        }));
    }
    Ok(mk(LocalAnswer::No { exhaustion_level: deepest }))
}

/// Existence of real points of U (primitive mode: x ≠ 0) or of X.
pub fn real_points(q: &QuadraticForm, p: &RationalPoly, mode: SolubilityMode) -> LocalCertificate {
    let yes = |t: Rational| LocalAnswer::Yes(Witness::Real { t });
    let mk = |answer| LocalCertificate {
        place: Place::Real,
        mode,
        answer,
        completeness_depth: None,
        good_reduction: false,
    };
    if !q.is_definite() {
        return mk(yes(Rational::zero()));
    }
    // p must take a value of the sign of q (zero allowed for X)
    let f = if q.is_positive_definite() { p.clone() } else { -p };
    if let Some(t) = crate::poly::sturm::sample_points(&f).into_iter().find(|t| f.eval(t).is_positive()) {
        return mk(yes(t));
    }
    if mode == SolubilityMode::Any && !f.is_zero() {
        if let Some(root) = isolate_real_roots(&f).first() {
            return mk(yes(root.approx()));
        }
    }
    if f.is_zero() && mode == SolubilityMode::Any {
        return mk(yes(Rational::zero()));
    }
    mk(LocalAnswer::No { exhaustion_level: 0 })
}

/// Direct re-verification of a residue witness against `F = q - p`.
pub fn verify_witness(q: &QuadraticForm, p: &RationalPoly, w: &ResidueWitness) -> bool {
    let n = q.n();
    let pm = w.prime.pow(w.precision);
    let x: Vec<Rational> = w.residues[..n].iter().cloned().map(Rational::from_integer).collect();
    let t = Rational::from_integer(w.residues[n].clone());
    let value = q.eval(&x) - p.eval(&t);
    let Ok(red) = reduce_rational(&value, &w.prime, &pm) else {
        return false;
    };
    if !red.is_zero() {
        return false;
    }
    // gradient of s·q(w) - p(t) with x = p^j w
    let s = Rational::from_integer(w.prime.pow(2 * w.stratum));
    let pj = Rational::from_integer(w.prime.pow(w.stratum));
    let wv: Vec<Rational> = x.iter().map(|c| c / &pj).collect();
    let mut grads = Vec::new();
    for i in 0..n {
        let mut acc = Rational::zero();
        for j in 0..n {
            acc += &q.gram()[i][j] * &wv[j];
        }
        grads.push(acc * Rational::from_integer(2.into()) * &s);
    }
    grads.push(-p.derivative().eval(&t));
    let e = grads
        .iter()
        .map(|g| match reduce_rational(g, &w.prime, &pm) {
            Ok(r) if r.is_zero() => w.precision,
            Ok(r) => int_valuation(&r, &w.prime).min(w.precision),
            Err(_) => 0,
        })
        .min()
        .unwrap();
    let primitive = wv.iter().any(|c| !(c.numer() % &w.prime).is_zero() && c.is_integer());
    e == w.gradient_valuation && w.precision > 2 * e && primitive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::quadform::parse_quadratic_form;

    fn ex1() -> (QuadraticForm, RationalPoly) {
        (parse_quadratic_form("-9,7,2;1,0,0").unwrap(), parse_poly("(2t^2-1)^2").unwrap())
    }

    fn ex2() -> (QuadraticForm, RationalPoly) {
        (QuadraticForm::diagonal_ints(&[1, -2, 64]).unwrap(), parse_poly("(2t^2+3)^2").unwrap())
    }

    #[test]
    fn bad_prime_sets() {
        let (q, p) = ex2();
        let bp: Vec<u64> = bad_primes(&q, &p).iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(bp, vec![2, 3]);
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        let bp: Vec<u64> = bad_primes(&q, &RationalPoly::t()).iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(bp, vec![2]);
        let (q, p) = ex1();
        assert!(bad_primes(&q, &p).contains(&Prime::small(2)));
    }

    #[test]
    fn first_example_local_points() {
        let (q, p) = ex1();
        let c = decide_u_zp(&q, &p, &Place::prime(3)).unwrap();
        assert!(c.is_yes());
        if let LocalAnswer::Yes(Witness::Residue(w)) = &c.answer {
            assert!(verify_witness(&q, &p, w));
        }
        assert!(decide_u_zp(&q, &p, &Place::prime(2)).unwrap().is_yes());
    }

    #[test]
    fn second_example_local_points() {
        let (q, p) = ex2();
        let c = decide_u_zp(&q, &p, &Place::prime(2)).unwrap();
        assert!(c.is_yes());
        let c = decide_x_zp(&q, &p, &Place::prime(3), DEFAULT_DEPTH_BOUND).unwrap();
        assert!(c.is_yes());
    }

    #[test]
    fn good_reduction_fast_path() {
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        let p = RationalPoly::from_ints(&[7, 49]);
        let c = decide_u_zp(&q, &p, &Place::prime(7)).unwrap();
        assert!(c.is_yes());
        assert_eq!(c.completeness_depth, Some(1));
    }

    #[test]
    fn non_integral_rejected() {
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        let p = parse_poly("t/3").unwrap();
        assert_eq!(decide_u_zp(&q, &p, &Place::prime(3)).unwrap_err(), Error::NonIntegral);
        assert!(decide_u_zp(&q, &p, &Place::prime(5)).is_ok());
    }

    #[test]
    fn real_point_examples() {
        let (q, p) = ex1();
        assert!(real_points(&q, &p, SolubilityMode::Primitive).is_yes());
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        assert!(real_points(&q, &parse_poly("-1-t^2").unwrap(), SolubilityMode::Any).is_no());
        assert!(real_points(&q, &parse_poly("(2t^2+3)^2").unwrap(), SolubilityMode::Primitive).is_yes());
        assert!(real_points(&q, &parse_poly("-t^2").unwrap(), SolubilityMode::Any).is_yes());
        assert!(real_points(&q, &parse_poly("-t^2").unwrap(), SolubilityMode::Primitive).is_no());
    }

    #[test]
    fn unsolvable_primitive_instance() {
        // x^2 + y^2 + z^2 = 7 + 8t has no 2-adic solutions at all
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        let p = RationalPoly::from_ints(&[7, 8]);
        let c = decide_u_zp(&q, &p, &Place::prime(2)).unwrap();
        assert_eq!(c.answer, LocalAnswer::No { exhaustion_level: 3 });
        let c = decide_x_zp(&q, &p, &Place::prime(2), DEFAULT_DEPTH_BOUND).unwrap();
        assert!(c.is_no(), "{c:?}");
    }

    #[test]
    fn padic_roots() {
        let f = parse_poly("t^2 - 17").unwrap();
        assert!(matches!(has_padic_integral_root(&f, &Prime::small(2)), PadicRoot::Root { .. }));
        let f = parse_poly("t^2 - 2").unwrap();
        assert_eq!(has_padic_integral_root(&f, &Prime::small(2)), PadicRoot::None);
        assert!(matches!(has_padic_integral_root(&f, &Prime::small(7)), PadicRoot::Root { .. }));
    }
}
