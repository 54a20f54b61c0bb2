//! Brauer classes on `q(x, y, z) = p(t)`: classification of Br(U)/Br(Q) and
//! Br(X̃)/Br(Q), explicit quaternion generators, local invariants, value
//! sets and strong approximation verdicts.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::integer::{primes, prime_divisors};
use crate::arith::{
    common_denominator, format_rational, hilbert_local, hilbert_symbol, is_square_local, valuation, BrInv,
    LocalClass, Place, Prime, Rational, SquareClass,
};
use crate::error::{Error, Result};
use crate::localsolve::{
    bad_primes, explore_residue_tree, max_residue_depth, real_points, SolubilityMode, TreeOutcome, Visit,
};
use crate::numfield::{is_square_in_residue_field, SquareTest};
use crate::poly::modp::{roots, ModPoly};
use crate::poly::sturm::{has_real_root, sample_points};
use crate::poly::{Factorization, RationalPoly};
use crate::quadform::QuadraticForm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    OddExponent,
    EvenDSquare,
    EvenSomeNonsquare,
    EvenAllSquare,
}

impl CaseLabel {
    pub fn label(self) -> &'static str {
        match self {
            CaseLabel::OddExponent => "(i)",
            CaseLabel::EvenDSquare => "(ii)",
            CaseLabel::EvenSomeNonsquare => "(iii)",
            CaseLabel::EvenAllSquare => "(iv)",
        }
    }
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Br(·)/Br(Q), which is 0 or Z/2 here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BrQuotient {
    Zero,
    Z2,
}

impl BrQuotient {
    pub fn is_nontrivial(self) -> bool {
        self == BrQuotient::Z2
    }
}

impl Serialize for BrQuotient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            BrQuotient::Zero => "0",
            BrQuotient::Z2 => "Z/2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorSquareness {
    pub factor: RationalPoly,
    pub multiplicity: u32,
    /// `d ∈ F_i^{×2}` for `F_i = Q[t]/(p_i)`.
    pub d_is_square: bool,
    pub test: SquareTest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub case: CaseLabel,
    pub squareness_table: Vec<FactorSquareness>,
    /// `d = -c·det(q)`.
    pub d: SquareClass,
    pub br_u: BrQuotient,
    pub br_xtilde: BrQuotient,
}

/// `d = -c·det(q)` with `c` the leading coefficient of `p`.
pub fn d_value(q: &QuadraticForm, c: &Rational) -> Rational {
    -(c * q.det())
}

fn require_ternary(q: &QuadraticForm) -> Result<()> {
    if q.n() != 3 {
        return Err(Error::InvalidInput(format!("ternary form required, got rank {}", q.n())));
    }
    Ok(())
}

pub fn classify(q: &QuadraticForm, p_fact: &Factorization) -> Result<Classification> {
    require_ternary(q)?;
    if p_fact.c.is_zero() {
        return Err(Error::ZeroInput("p"));
    }
    let d = SquareClass::new(d_value(q, &p_fact.c))?;
    let dn = d.normalized_rational();
    let mut table = Vec::new();
    for (f, e) in &p_fact.factors {
        let test = is_square_in_residue_field(&dn, f)?;
        table.push(FactorSquareness { factor: f.clone(), multiplicity: *e, d_is_square: test.is_square(), test });
    }
    let case = if !p_fact.all_exponents_even() {
        CaseLabel::OddExponent
    } else if d.is_square() {
        CaseLabel::EvenDSquare
    } else if table.iter().any(|f| !f.d_is_square) {
        CaseLabel::EvenSomeNonsquare
    } else {
        CaseLabel::EvenAllSquare
    };
    let (br_u, br_xtilde) = match case {
        CaseLabel::OddExponent | CaseLabel::EvenDSquare => (BrQuotient::Zero, BrQuotient::Zero),
        CaseLabel::EvenSomeNonsquare => (BrQuotient::Z2, BrQuotient::Zero),
        CaseLabel::EvenAllSquare => (BrQuotient::Z2, BrQuotient::Z2),
    };
    Ok(Classification { case, squareness_table: table, d, br_u, br_xtilde })
}

/// `p = c0·r(t)^2` with `r` primitive integral with positive leading
/// coefficient, when every exponent is even.
pub fn square_root_data(p_fact: &Factorization) -> Option<(Rational, RationalPoly)> {
    if !p_fact.all_exponents_even() {
        return None;
    }
    let monic = p_fact
        .factors
        .iter()
        .fold(RationalPoly::one(), |acc, (f, e)| &acc * &f.pow(e / 2));
    let (_, prim) = monic.primitive_integer();
    let r = RationalPoly::from_bigints(&prim);
    let lead = r.leading();
    Some((&p_fact.c / (&lead * &lead), r))
}

/// A representative `(L, d)` of a Brauer class with
/// `L = α·x + t_part(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Representative {
    pub linear: Vec<Rational>,
    pub t_part: RationalPoly,
}

impl Representative {
    pub fn eval(&self, x: &[Rational], t: &Rational) -> Rational {
        let lin: Rational = self.linear.iter().zip(x).map(|(a, b)| a * b).sum();
        lin + self.t_part.eval(t)
    }

    fn eval_residue(&self, x: &[u128], t: u128) -> BigInt {
        // coefficients are integral by normalization
        let mut acc = BigInt::zero();
        for (a, xi) in self.linear.iter().zip(x) {
            acc += a.numer() * BigInt::from(*xi);
        }
        let tb = BigInt::from(t);
        acc + self.t_part.coeffs().iter().rev().fold(BigInt::zero(), |s, c| s * &tb + c.numer())
    }
}

/// Quaternion class `(L0, d)` together with a conjugate representative:
/// `(L0, d) = (L1, d) + (κ, d)` wherever both sides are defined.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionClass {
    pub primary: Representative,
    pub conjugate: Option<Representative>,
    pub kappa: Rational,
    pub d: SquareClass,
    /// Primes where the integral decomposition behind the unit argument is
    /// not established.
    pub auxiliary_primes: Vec<BigInt>,
    /// `L1 = real_sign_factor·r(t)` at the point `(r(t)/u0)·P0`; present when
    /// the chosen point is affine.
    pub real_sign_factor: Option<Rational>,
    /// Projective point `(x0, y0, z0, u0)` the tangent plane was taken at.
    pub point: Option<Vec<Rational>>,
    /// `r(t)` with `p = c·r^2`.
    pub r: RationalPoly,
}

impl QuaternionClass {
    /// The constant class `(κ, d)`.
    pub fn constant(kappa: Rational, d: SquareClass, n: usize) -> Self {
        QuaternionClass {
            primary: Representative { linear: vec![Rational::zero(); n], t_part: RationalPoly::constant(kappa.clone()) },
            conjugate: None,
            kappa: Rational::one(),
            d,
            auxiliary_primes: Vec::new(),
            real_sign_factor: None,
            point: None,
            r: RationalPoly::one(),
        }
    }

    pub fn to_text(&self) -> String {
        let vars = ["x", "y", "z", "w"];
        let mut terms = Vec::new();
        for (i, a) in self.primary.linear.iter().enumerate() {
            if !a.is_zero() {
                terms.push(format!("{}*{}", format_rational(a), vars.get(i).copied().unwrap_or("v")));
            }
        }
        if !self.primary.t_part.is_zero() {
            terms.push(format!("({})", self.primary.t_part));
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        format!("({}, {})", terms.join(" + "), self.d.normalized())
    }
}

impl Serialize for QuaternionClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let strs = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("linear", &strs(&self.primary.linear))?;
        m.serialize_entry("t_poly", &self.primary.t_part)?;
        m.serialize_entry("d", &self.d.normalized().to_string())?;
        m.serialize_entry("text", &self.to_text())?;
        if let Some(c) = &self.conjugate {
            m.serialize_entry("conjugate_linear", &strs(&c.linear))?;
            m.serialize_entry("conjugate_t_poly", &c.t_part)?;
            m.serialize_entry("kappa", &format_rational(&self.kappa))?;
        }
        if let Some(pt) = &self.point {
            m.serialize_entry("tangent_point", &strs(pt))?;
        }
        m.end()
    }
}

fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Basis of `{w : rows·w = 0}`.
fn nullspace(rows: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(pr) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, pr);
        let pv = a[r][col].clone();
        for c in 0..n {
            a[r][c] = &a[r][c] / &pv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for c in 0..n {
                    let delta = &f * &a[r][c];
                    a[i][c] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    let mut out = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut w = vec![Rational::zero(); n];
        w[free] = Rational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            w[pc] = -a[i][free].clone();
        }
        out.push(w);
    }
    out
}

/// Scales `(α, δ)` to a primitive integer vector with `δ > 0`, or with the
/// last non-zero α positive when `δ = 0`. Returns the scaling factor.
fn normalize_linear(v: &[Rational]) -> (Vec<Rational>, Rational) {
    let den = common_denominator(v.iter());
    let ints: Vec<BigInt> = v.iter().map(|c| (c * Rational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    let mut lambda = Rational::new(den, g);
    let last = v.last().unwrap();
    let pivot = if !last.is_zero() { last } else { v.iter().rev().find(|c| !c.is_zero()).unwrap() };
    if (pivot * &lambda).is_negative() {
        lambda = -lambda;
    }
    (v.iter().map(|c| c * &lambda).collect(), lambda)
}

fn collect_primes(values: &[Rational], out: &mut BTreeSet<BigInt>) {
    for v in values {
        if !v.is_zero() {
            out.extend(prime_divisors(v.numer()));
            out.extend(prime_divisors(v.denom()));
        }
    }
}

/// Tangent-plane class at a given rational point `(x0, y0, z0, u0)` of
/// the projective quadric `q(x) - c·u^2 = 0`.
pub fn tangent_generator_at(
    q: &QuadraticForm,
    c: &Rational,
    r: &RationalPoly,
    point: &[Rational],
) -> Result<QuaternionClass> {
    require_ternary(q)?;
    let n = q.n();
    if point.len() != n + 1 || point.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidInput("tangent point must be a non-zero projective 4-vector".into()));
    }
    let phi = q.with_extra(&-c.clone())?;
    if !phi.eval(point).is_zero() {
        return Err(Error::InvalidInput("tangent point is not on the quadric".into()));
    }
    let m = phi.gram().clone();
    let d = SquareClass::new(d_value(q, c))?;
    let m0 = mat_vec(&m, point);
    let i = m0.iter().position(|x| !x.is_zero()).ok_or(Error::RankDeficient)?;
    let b = m0[i].clone();
    // isotropic partner of the point
    let mut p1: Vec<Rational> = vec![Rational::zero(); n + 1];
    p1[i] = Rational::one();
    let shift = &m[i][i] / (Rational::from_integer(2.into()) * &b);
    for k in 0..=n {
        p1[k] -= &shift * &point[k];
    }
    debug_assert!(phi.eval(&p1).is_zero());
    let m1 = mat_vec(&m, &p1);
    let w = nullspace(&[m0.clone(), m1.clone()], n + 1);
    let wgram: Vec<Vec<Rational>> =
        w.iter().map(|a| w.iter().map(|bb| dot(a, &mat_vec(&m, bb))).collect()).collect();
    let wform = QuadraticForm::from_gram(wgram)?;
    let a1 = wform.diag()[0].clone();
    let kappa_raw = -(&b * &a1) / Rational::from_integer(2.into());
    let (l0, lambda0) = normalize_linear(&m0);
    let (l1, lambda1) = normalize_linear(&m1);
    let kappa = SquareClass::new(&lambda0 * &lambda1 * &kappa_raw)?.normalized_rational();
    let rep = |v: &[Rational]| Representative { linear: v[..n].to_vec(), t_part: r.scale(&v[n]) };
    let mut aux = BTreeSet::new();
    let wdiag: Vec<Vec<Rational>> = {
        // diagonalizing basis of W in ambient coordinates
        let basis = wform.basis();
        (0..2)
            .map(|col| (0..=n).map(|k| &w[0][k] * &basis[0][col] + &w[1][k] * &basis[1][col]).collect())
            .collect()
    };
    let frame: Vec<Vec<Rational>> = vec![point.to_vec(), p1.clone(), wdiag[0].clone(), wdiag[1].clone()];
    for v in &frame {
        collect_primes(v, &mut aux);
    }
    let frame_det = crate::quadform::determinant(&frame);
    collect_primes(
        &[b.clone(), a1, wform.diag()[1].clone(), lambda0, lambda1.clone(), frame_det, c.clone(), r.leading()],
        &mut aux,
    );
    let real_sign_factor = if point[n].is_zero() { None } else { Some(&lambda1 * &b / &point[n]) };
    Ok(QuaternionClass {
        primary: rep(&l0),
        conjugate: Some(rep(&l1)),
        kappa,
        d,
        auxiliary_primes: aux.into_iter().collect(),
        real_sign_factor,
        point: Some(point.to_vec()),
        r: r.clone(),
    })
}

/// Projective point of `q(x) - c·u^2 = 0` of minimal height: x runs over
/// integer vectors by ascending max-norm, u is solved by a square test.
pub fn find_quadric_point(q: &QuadraticForm, c: &Rational, max_height: i64) -> Result<Option<Vec<Rational>>> {
    let n = q.n();
    let two = Rational::from_integer(2.into());
    // D·q has integer coefficients a_ii and 2·a_ij; u^2 = Q(x)/C
    let mut coefs = Vec::new();
    for i in 0..n {
        for j in i..n {
            coefs.push(if i == j { q.gram()[i][i].clone() } else { &q.gram()[i][j] * &two });
        }
    }
    let den = Rational::from_integer(common_denominator(coefs.iter().chain(std::iter::once(c))));
    let to_i128 = |r: Rational| {
        (r * &den).to_integer().to_i128().ok_or_else(|| Error::InvalidInput("coefficients too large".into()))
    };
    let ints: Vec<i128> = coefs.into_iter().map(to_i128).collect::<Result<_>>()?;
    let ci = to_i128(c.clone())?;
    let phi = q.with_extra(&-c.clone())?;
    let mut x = vec![0i64; n];
    for h in 1..=max_height {
        let side = (2 * h + 1) as u64;
        for idx in 0..side.pow(n as u32) {
            let mut rest = idx;
            for xi in x.iter_mut() {
                *xi = (rest % side) as i64 - h;
                rest /= side;
            }
            if x.iter().all(|c| c.abs() < h) {
                continue;
            }
            let mut val: i128 = 0;
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    val += ints[k] * x[i] as i128 * x[j] as i128;
                    k += 1;
                }
            }
            let Some(prod) = val.checked_mul(ci) else { continue };
            if prod < 0 {
                continue;
            }
            let rt = (prod as u128).sqrt();
            if rt * rt != prod as u128 {
                continue;
            }
            let mut pt: Vec<Rational> = x.iter().map(|&c| Rational::from_integer(c.into())).collect();
            pt.push(Rational::new(BigInt::from(rt), BigInt::from(ci.abs())));
            debug_assert!(phi.eval(&pt).is_zero());
            return Ok(Some(pt));
        }
    }
    Ok(None)
}

/// Height bound of the first point search; doubled until `MAX_POINT_HEIGHT`.
pub const INITIAL_POINT_HEIGHT: i64 = 16;
pub const MAX_POINT_HEIGHT: i64 = 128;

/// Generator `(α·x + δ·r(t), d)` from the tangent plane at a rational point
/// of `q(x) - c·u^2 = 0` found by ascending-height search.
pub fn tangent_generator(q: &QuadraticForm, c: &Rational, r: &RationalPoly) -> Result<QuaternionClass> {
    require_ternary(q)?;
    if c.is_zero() {
        return Err(Error::ZeroInput("c"));
    }
    let phi = q.with_extra(&-c.clone())?;
    if !phi.is_isotropic_global() {
        return Err(Error::NoTangentGenerator);
    }
    let mut h = INITIAL_POINT_HEIGHT;
    loop {
        if let Some(pt) = find_quadric_point(q, c, h)? {
            return tangent_generator_at(q, c, r, &pt);
        }
        if h >= MAX_POINT_HEIGHT {
            return Err(Error::SearchBound(h as u64));
        }
        h *= 2;
    }
}

/// `inv_v B(P)` for a point `P = (x, y, z, t)` over Q_v given by rationals.
pub fn evaluate_class(b: &QuaternionClass, point: &[Rational], v: &Place) -> Result<BrInv> {
    let n = b.primary.linear.len();
    if point.len() != n + 1 {
        return Err(Error::InvalidInput("point has wrong dimension".into()));
    }
    let dr = b.d.normalized_rational();
    if is_square_local(&dr, v)? {
        return Ok(BrInv::Zero);
    }
    let (x, t) = point.split_at(n);
    let l0 = b.primary.eval(x, &t[0]);
    if !l0.is_zero() {
        return hilbert_symbol(&l0, &dr, v);
    }
    if let Some(conj) = &b.conjugate {
        let l1 = conj.eval(x, &t[0]);
        if !l1.is_zero() {
            return Ok(hilbert_symbol(&l1, &dr, v)? + hilbert_symbol(&b.kappa, &dr, v)?);
        }
    }
    Err(Error::BranchLocus)
}

/// `inv_p B` on the residue ball of `(x, t) mod p^k`, when the precision
/// determines it.
pub fn evaluate_class_residue(b: &QuaternionClass, x: &[u128], t: u128, k: u32, p: &Prime) -> Option<BrInv> {
    let dr = b.d.normalized_rational();
    let dc = LocalClass::of_rational(&dr, p).ok()?;
    if dc.is_square(p) {
        return Some(BrInv::Zero);
    }
    if let Some(c0) = LocalClass::of_residue(&b.primary.eval_residue(x, t), k, p) {
        return Some(hilbert_local(&c0, &dc, p));
    }
    let conj = b.conjugate.as_ref()?;
    let c1 = LocalClass::of_residue(&conj.eval_residue(x, t), k, p)?;
    let kc = LocalClass::of_rational(&b.kappa, p).ok()?;
    Some(hilbert_local(&c1, &dc, p) + hilbert_local(&kc, &dc, p))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueSet {
    /// No local points of the requested kind.
    Empty,
    Constant(BrInv),
    Both,
    Undecided(String),
}

impl ValueSet {
    pub fn constant(&self) -> Option<BrInv> {
        match self {
            ValueSet::Constant(b) => Some(*b),
            _ => None,
        }
    }
}

impl Serialize for ValueSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ValueSet::Empty => s.serialize_str("empty"),
            ValueSet::Constant(b) => s.serialize_str(&b.to_string()),
            ValueSet::Both => s.serialize_str("both"),
            ValueSet::Undecided(_) => s.serialize_str("undecided"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueMethod {
    SquareD,
    ResidueTree,
    RealSign,
    UnitArgument,
}

/// Node budget of one value-set tree.
pub const VALUE_TREE_BUDGET: u64 = 4_000_000;

/// Values of `B` on `U(Z_v)` (primitive mode) or on the non-singular
/// integral points `X*(Z_v)` (any mode) at a finite place.
pub fn local_value_set_finite(
    q: &QuadraticForm,
    p: &RationalPoly,
    b: &QuaternionClass,
    v: &Place,
    mode: SolubilityMode,
) -> Result<ValueSet> {
    let prime = v.as_prime().ok_or_else(|| Error::InvalidInput("finite place required".into()))?.clone();
    let mut realized = BTreeSet::new();
    let outcome = explore_residue_tree(q, p, v, mode, max_residue_depth(&prime), VALUE_TREE_BUDGET, |node| {
        if node.certified {
            let k = node.level - node.gradient_valuation;
            if let Some(val) = evaluate_class_residue(b, node.x, node.t, k, &prime) {
                realized.insert(val);
                if realized.len() == 2 {
                    return Visit::Abort;
                }
            }
        }
        match evaluate_class_residue(b, node.x, node.t, node.level, &prime) {
            Some(val) if realized.contains(&val) => Visit::Stop,
            _ => Visit::Refine,
        }
    })?;
    Ok(match outcome {
        _ if realized.len() == 2 => ValueSet::Both,
        TreeOutcome::Completed | TreeOutcome::Aborted => match realized.iter().next() {
            None => ValueSet::Empty,
            Some(val) => ValueSet::Constant(*val),
        },
        TreeOutcome::DepthExceeded => ValueSet::Undecided("residue precision exhausted".into()),
        TreeOutcome::Budget => ValueSet::Undecided("node budget exhausted".into()),
    })
}

/// Values of `B` on the real points of U.
pub fn local_value_set_real(q: &QuadraticForm, p: &RationalPoly, b: &QuaternionClass) -> Result<ValueSet> {
    if !real_points(q, p, SolubilityMode::Primitive).is_yes() {
        return Ok(ValueSet::Empty);
    }
    let dr = b.d.normalized_rational();
    if dr.is_positive() {
        return Ok(ValueSet::Constant(BrInv::Zero));
    }
    if !q.is_definite() {
        return Ok(ValueSet::Both);
    }
    // definite q: each fibre is connected and meets the line through the
    // tangent point, where only the conjugate representative is defined
    let factor = b
        .real_sign_factor
        .as_ref()
        .ok_or_else(|| Error::NotApplicable("tangent point at infinity".into()))?;
    let r = &b.r;
    let kappa = hilbert_symbol(&b.kappa, &dr, &Place::Real)?;
    let mut values = BTreeSet::new();
    for t in sample_points(r) {
        let rv = r.eval(&t);
        let sign = Rational::from_integer(if q.is_positive_definite() { 1 } else { -1 }.into());
        if rv.is_zero() || (p.eval(&t) * sign).is_negative() {
            continue;
        }
        let sign_neg = (factor * &rv).is_negative();
        values.insert(BrInv::from_bit(sign_neg) + kappa);
    }
    Ok(match values.len() {
        0 => ValueSet::Empty,
        1 => ValueSet::Constant(*values.iter().next().unwrap()),
        _ => ValueSet::Both,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaceValue {
    pub place: Place,
    pub values: ValueSet,
    pub method: ValueMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionSummary {
    pub mode: SolubilityMode,
    pub places: Vec<PlaceValue>,
    /// Sum of the constant local invariants; `None` unless every listed
    /// place has a constant value.
    #[serde(serialize_with = "ser_opt_inv")]
    pub total: Option<BrInv>,
    /// The family of local integral points is orthogonal to B nowhere.
    pub obstructs: bool,
    pub note: String,
}

fn ser_opt_inv<S: serde::Serializer>(v: &Option<BrInv>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_str(&b.to_string()),
        None => s.serialize_none(),
    }
}

/// Places where `B` may be non-zero on integral points: the real place and
/// every prime outside which the unit argument applies.
pub fn obstruction_places(q: &QuadraticForm, p: &RationalPoly, b: &QuaternionClass) -> Vec<Place> {
    let mut ps: BTreeSet<BigInt> = bad_primes(q, p).into_iter().map(|x| x.value().clone()).collect();
    ps.extend(b.auxiliary_primes.iter().cloned());
    let mut out = vec![Place::Real];
    out.extend(ps.into_iter().map(|x| Place::Finite(Prime::new(x).unwrap())));
    out
}

/// Integral Brauer–Manin test of `B` against `∏_v U(Z_v)` (primitive mode)
/// or `∏_v X*(Z_v)` (any mode). At places outside
/// [`obstruction_places`] one of `L0`, `L1` is a v-adic unit, so `B`
/// vanishes there.
pub fn integral_obstruction(
    q: &QuadraticForm,
    p: &RationalPoly,
    b: &QuaternionClass,
    mode: SolubilityMode,
) -> Result<ObstructionSummary> {
    let dr = b.d.normalized_rational();
    let mut places = Vec::new();
    for v in obstruction_places(q, p, b) {
        let (values, method) = if v.is_real() {
            (local_value_set_real(q, p, b)?, if dr.is_positive() { ValueMethod::SquareD } else { ValueMethod::RealSign })
        } else {
            let m = if is_square_local(&dr, &v)? { ValueMethod::SquareD } else { ValueMethod::ResidueTree };
            (local_value_set_finite(q, p, b, &v, mode)?, m)
        };
        places.push(PlaceValue { place: v, values, method });
    }
    let all_constant = places.iter().all(|pv| pv.values.constant().is_some());
    let total = if all_constant { Some(places.iter().map(|pv| pv.values.constant().unwrap()).sum()) } else { None };
    let note = if let Some(pv) = places.iter().find(|pv| pv.values == ValueSet::Empty) {
        format!("no local points at {}", pv.place)
    } else if places.iter().any(|pv| matches!(pv.values, ValueSet::Undecided(_))) {
        "some local value sets undecided".to_string()
    } else if all_constant {
        "all other places contribute 0 (unit argument)".to_string()
    } else {
        "B takes both values at some place".to_string()
    };
    let empty = places.iter().any(|pv| pv.values == ValueSet::Empty);
    Ok(ObstructionSummary { mode, obstructs: !empty && total == Some(BrInv::Half), places, total, note })
}

/// Sum of `inv_v B(P_v)` over the given local points, after checking that
/// every place where `B` may be non-zero is covered.
pub fn adelic_obstruction_sum(
    q: &QuadraticForm,
    p: &RationalPoly,
    b: &QuaternionClass,
    points: &BTreeMap<Place, Vec<Rational>>,
    assumed_zero_elsewhere: &BTreeSet<Place>,
) -> Result<BrInv> {
    let constant = b.primary.linear.iter().all(|a| a.is_zero()) && b.primary.t_part.is_constant();
    if !constant {
        for v in obstruction_places(q, p, b) {
            if !points.contains_key(&v) && !assumed_zero_elsewhere.contains(&v) {
                return Err(Error::IncompleteAdelicData(v.to_string()));
            }
        }
    }
    let mut total = BrInv::Zero;
    for (v, pt) in points {
        total += evaluate_class(b, pt, v)?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberMode {
    /// Points with a unit coordinate over the valuation ring.
    Integral,
    /// All points over the completion.
    Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberValues {
    Constant,
    BothValues,
    ClassTrivial,
}

/// Whether the non-trivial class on `q(x) = a` takes one or two values.
pub fn value_set_fiber(q: &QuadraticForm, a: &Rational, v: &Place, mode: FiberMode) -> Result<FiberValues> {
    if a.is_zero() {
        return Err(Error::ZeroInput("a"));
    }
    let disc = d_value(q, a);
    if is_square_local(&disc, v)? {
        return Ok(FiberValues::ClassTrivial);
    }
    match (v, mode) {
        (Place::Real, _) => {
            if !q.with_extra(&-a.clone())?.is_isotropic_local(v) {
                return Err(Error::NotApplicable("fibre has no real points".into()));
            }
            Ok(if q.is_definite() { FiberValues::Constant } else { FiberValues::BothValues })
        }
        (Place::Finite(_), FiberMode::Rational) => Ok(FiberValues::BothValues),
        (Place::Finite(prime), FiberMode::Integral) => {
            let good = !prime.is_two()
                && q.gram().iter().flatten().all(|c| valuation_nonneg(c, prime))
                && valuation(q.det(), prime)? == 0;
            if !good || !valuation_nonneg(a, prime) {
                return Err(Error::NotApplicable("integral fibre values need odd good reduction".into()));
            }
            Ok(if valuation(a, prime)?.is_odd() { FiberValues::BothValues } else { FiberValues::Constant })
        }
    }
}

fn valuation_nonneg(c: &Rational, p: &Prime) -> bool {
    c.is_zero() || valuation(c, p).map(|v| v >= 0).unwrap_or(false)
}

/// Number of primes tried by [`find_odd_valuation_witness`].
pub const ODD_WITNESS_PRIME_BOUND: usize = 10_000;

/// A good odd prime `w` and an integer `t_w` with `w(p(t_w))` odd, so that
/// `-p(t_w)·det(q)` is not a square in Q_w.
pub fn find_odd_valuation_witness(
    q: &QuadraticForm,
    p_fact: &Factorization,
    exclude: &BTreeSet<Place>,
) -> Result<(Place, BigInt)> {
    let (f0, e0) = p_fact
        .odd_factors()
        .next()
        .cloned()
        .ok_or_else(|| Error::NotApplicable("all exponents even".into()))?;
    let p = p_fact.expand();
    let bad: BTreeSet<BigInt> = bad_primes(q, &p).into_iter().map(|x| x.value().clone()).collect();
    let (_, f0i) = f0.primitive_integer();
    let others: Vec<(Vec<BigInt>, u32)> = p_fact
        .factors
        .iter()
        .filter(|(f, _)| f != &f0)
        .map(|(f, e)| (f.primitive_integer().1, *e))
        .collect();
    let eval = |c: &[BigInt], t: &BigInt| c.iter().rev().fold(BigInt::zero(), |acc, x| acc * t + x);
    for w in primes().skip(1).take(ODD_WITNESS_PRIME_BOUND) {
        let wb = BigInt::from(w);
        let place = Place::prime(w);
        if bad.contains(&wb) || exclude.contains(&place) {
            continue;
        }
        let lead = f0i.last().unwrap();
        if (lead % &wb).is_zero() {
            continue;
        }
        let fm = ModPoly::from_bigints(&f0i, w);
        let dfm = fm.derivative();
        let wsq = &wb * &wb;
        for r0 in roots(&fm) {
            if dfm.eval(r0) == 0 {
                continue;
            }
            for k in 0..w {
                let t = BigInt::from(r0) + BigInt::from(k) * &wb;
                let val0 = eval(&f0i, &t);
                if (&val0 % &wsq).is_zero() {
                    continue;
                }
                if others.iter().any(|(g, _)| (eval(g, &t) % &wb).is_zero()) {
                    continue;
                }
                let value = p.eval(&Rational::from_integer(t.clone()));
                let prime = Prime::small(w);
                let vp = valuation(&value, &prime)?;
                let target = -&value * q.det();
                if vp == e0 as i64 && !is_square_local(&target, &place)? {
                    return Ok((place, t));
                }
            }
        }
    }
    Err(Error::SearchBound(ODD_WITNESS_PRIME_BOUND as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaStatus {
    Holds,
    Fails,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceCondition {
    pub place: Place,
    pub d_is_square: bool,
    /// The place imposes the squareness requirement.
    pub required: bool,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaVerdict {
    pub case: CaseLabel,
    pub br_u: BrQuotient,
    pub br_xtilde: BrQuotient,
    pub sa_u: SaStatus,
    pub sa_xtilde: SaStatus,
    /// Strong approximation with Brauer–Manin condition holds for both.
    pub with_brauer_manin: SaStatus,
    pub condition_b: bool,
    pub per_place: Vec<PlaceCondition>,
    pub isotropic_place: Place,
}

/// Condition (b): `d` is a square at every finite place of S and at every
/// real place of S where q is isotropic or `r` has a real root.
pub fn condition_b(q: &QuadraticForm, p_fact: &Factorization, s: &[Place]) -> Result<(bool, Vec<PlaceCondition>)> {
    let d = d_value(q, &p_fact.c);
    let radical = p_fact.factors.iter().fold(RationalPoly::one(), |acc, (f, _)| &acc * f);
    let mut rows = Vec::new();
    for v in s {
        let sq = is_square_local(&d, v)?;
        let required = match v {
            Place::Finite(_) => true,
            Place::Real => q.is_isotropic_local(v) || has_real_root(&radical),
        };
        rows.push(PlaceCondition { place: v.clone(), d_is_square: sq, required, satisfied: !required || sq });
    }
    Ok((rows.iter().all(|r| r.satisfied), rows))
}

pub fn sa_verdict(q: &QuadraticForm, p_fact: &Factorization, s: &[Place]) -> Result<SaVerdict> {
    require_ternary(q)?;
    let v0 = s
        .iter()
        .find(|v| q.is_isotropic_local(v))
        .cloned()
        .ok_or_else(|| Error::HypothesisUnmet("no place of S where q is isotropic".into()))?;
    let cls = classify(q, p_fact)?;
    let (b, rows) = condition_b(q, p_fact, s)?;
    let status = |quot: BrQuotient| if quot.is_nontrivial() && b { SaStatus::Fails } else { SaStatus::Holds };
    Ok(SaVerdict {
        case: cls.case,
        br_u: cls.br_u,
        br_xtilde: cls.br_xtilde,
        sa_u: status(cls.br_u),
        sa_xtilde: status(cls.br_xtilde),
        with_brauer_manin: SaStatus::Holds,
        condition_b: b,
        per_place: rows,
        isotropic_place: v0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SaVerdictN4 {
    pub sa_xtilde: SaStatus,
    pub isotropic_place: Place,
}

/// Rank at least four: strong approximation off S holds for X̃ once real
/// smooth points exist and q is isotropic at some place of S.
pub fn sa_verdict_n4(q: &QuadraticForm, p: &RationalPoly, s: &[Place]) -> Result<SaVerdictN4> {
    let mut unmet = Vec::new();
    if q.n() < 4 {
        unmet.push(format!("rank {} < 4", q.n()));
    }
    let v0 = s.iter().find(|v| q.is_isotropic_local(v)).cloned();
    if v0.is_none() {
        unmet.push("no place of S where q is isotropic".to_string());
    }
    if p.is_zero() || !real_points(q, p, SolubilityMode::Primitive).is_yes() {
        unmet.push("no real smooth points".to_string());
    }
    if !unmet.is_empty() {
        return Err(Error::HypothesisUnmet(unmet.join("; ")));
    }
    Ok(SaVerdictN4 { sa_xtilde: SaStatus::Holds, isotropic_place: v0.unwrap() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mod8Check {
    /// Residues `(x, t) mod 8` with `F ≡ 0 mod 8`.
    pub residue_solutions: usize,
    /// Residues mod 8 that are reductions of Z_2-points.
    pub liftable: usize,
    /// Liftable residues on which `B` takes both values.
    pub mixed: usize,
    /// Whether the refinement below the residues finished.
    pub complete: bool,
    pub values: BTreeSet<BrInv>,
}

/// Exhaustive 2-adic check: the values of the invariant on each residue class
/// mod 8 of `U(Z_2)` (primitive mode) or `X*(Z_2)` (any mode), refining each
/// class until the invariant is fixed on every ball.
pub fn mod8_value_check(
    q: &QuadraticForm,
    p: &RationalPoly,
    b: &QuaternionClass,
    mode: SolubilityMode,
) -> Result<Mod8Check> {
    let two = Prime::small(2);
    let key = |x: &[u128], t: u128| -> Vec<u128> { x.iter().map(|c| c % 8).chain(std::iter::once(t % 8)).collect() };
    let mut raw = BTreeSet::new();
    explore_residue_tree(q, p, &Place::prime(2), mode, 3, u64::MAX, |node| {
        if node.level == 3 {
            raw.insert(key(node.x, node.t));
            return Visit::Stop;
        }
        Visit::Refine
    })?;
    let mut classes: BTreeMap<Vec<u128>, BTreeSet<BrInv>> = BTreeMap::new();
    let outcome = explore_residue_tree(q, p, &Place::prime(2), mode, 40, VALUE_TREE_BUDGET, |node| {
        if node.level < 3 {
            return Visit::Refine;
        }
        let k = key(node.x, node.t);
        if node.certified {
            let prec = node.level - node.gradient_valuation;
            if let Some(val) = evaluate_class_residue(b, node.x, node.t, prec, &two) {
                classes.entry(k).or_default().insert(val);
                return Visit::Stop;
            }
            return Visit::Refine;
        }
        match evaluate_class_residue(b, node.x, node.t, node.level, &two) {
            Some(val) if classes.get(&k).is_some_and(|s| s.contains(&val)) => Visit::Stop,
            _ => Visit::Refine,
        }
    })?;
    Ok(Mod8Check {
        residue_solutions: raw.len(),
        liftable: classes.len(),
        mixed: classes.values().filter(|v| v.len() > 1).count(),
        complete: outcome == TreeOutcome::Completed,
        values: classes.values().flatten().copied().collect(),
    })
}
