//! Central points of `q(x) = p(t)` over a completion.
//!
//! A singular point `(0, …, 0, α)` lies in the closure of the smooth locus
//! unless `α` is a root of even order `r` of `p = (t − α)^r p₀` and the
//! auxiliary form `q ⊥ ⟨−p₀(α)⟩` is anisotropic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::hensel::{hensel_certificate, hensel_lift_multivariate, IntMultiPoly};
use crate::arith::{format_rational, is_square_local, BrInv, LocalClass, Place, Prime, Rational};
use crate::error::{Error, Result};
use crate::localsolve::padic_integral_roots;
use crate::poly::factor_over_q;
use crate::poly::sturm::{isolate_real_roots, sign_at_root, RealRoot};
use crate::poly::RationalPoly;
use crate::quadform::QuadraticForm;

/// Largest working precision used to pin down the square class of `p₀(α)`.
const MAX_CLASS_PRECISION: u32 = 512;

/// Largest `l` tried when instantiating the approximating sequence.
const MAX_APPROXIMATION_INDEX: u32 = 64;

/// Number of integer vectors tried when looking for a direction `θ`.
const DIRECTION_SEARCH_LIMIT: usize = 2_000_000;

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_opt_rat<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

fn ser_rats<S: serde::Serializer>(r: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(r.len()))?;
    for x in r {
        seq.serialize_element(&format_rational(x))?;
    }
    seq.end()
}

/// Where a root of `p` sits in the completion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootLocus {
    Rational {
        #[serde(serialize_with = "ser_rat")]
        value: Rational,
    },
    /// The unique real root of `factor` in `(lo, hi)`.
    Real {
        factor: RationalPoly,
        #[serde(serialize_with = "ser_rat")]
        lo: Rational,
        #[serde(serialize_with = "ser_rat")]
        hi: Rational,
    },
    /// A root of `factor` in Q_p congruent to `residue` modulo `p^precision`;
    /// `inverted` means the residue approximates `1/α`.
    Padic {
        factor: RationalPoly,
        residue: String,
        precision: u32,
        inverted: bool,
    },
}

impl RootLocus {
    pub fn rational(&self) -> Option<&Rational> {
        match self {
            RootLocus::Rational { value } => Some(value),
            _ => None,
        }
    }
}

/// Invariants of the auxiliary form `q ⊥ ⟨−p₀(α)⟩` over the completion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxiliaryForm {
    #[serde(serialize_with = "ser_rats")]
    pub diagonal: Vec<Rational>,
    pub rank: usize,
    pub det_is_square: bool,
    pub hasse_invariant: BrInv,
    pub anisotropic: bool,
}

impl AuxiliaryForm {
    fn new(q: &QuadraticForm, p0_class: &Rational, v: &Place) -> Result<Self> {
        let aux = q.with_extra(&-p0_class.clone())?;
        Ok(AuxiliaryForm {
            diagonal: aux.diag().to_vec(),
            rank: aux.n(),
            det_is_square: is_square_local(aux.det(), v)?,
            hasse_invariant: aux.hasse_invariant(v),
            anisotropic: !aux.is_isotropic_local(v),
        })
    }
}

/// One root of `p` of order at least 2 in the completion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralRoot {
    pub locus: RootLocus,
    pub order: u32,
    /// `p₀(α)` when `α` is rational.
    #[serde(serialize_with = "ser_opt_rat")]
    pub p0: Option<Rational>,
    /// A rational number in the square class of `p₀(α)` over the completion;
    /// present for roots of even order.
    #[serde(serialize_with = "ser_opt_rat")]
    pub p0_class: Option<Rational>,
    pub auxiliary: Option<AuxiliaryForm>,
    pub defect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralDefectReport {
    pub place: Place,
    pub roots: Vec<CentralRoot>,
    /// Whether `X(F_v) ≠ X(F_v)_cent` among the roots found.
    pub defect: bool,
    /// Whether every root of order at least 2 was found.
    pub complete: bool,
    pub notes: Vec<String>,
}

/// A root of order `order` of the factor `factors[index]`, with the square
/// class (or sign) of `p₀(α)` when computable.
struct LocalRoot {
    locus: RootLocus,
    p0_exact: Option<Rational>,
    p0_class: Option<Rational>,
}

/// `c · ∏_{j ≠ i, e_j odd} p_j`: its value at a root of `p_i` has the square
/// class of `p₀` there when `e_i` is even.
fn cofactor(c: &Rational, factors: &[(RationalPoly, u32)], i: usize) -> RationalPoly {
    factors
        .iter()
        .enumerate()
        .filter(|&(j, (_, e))| j != i && e % 2 == 1)
        .fold(RationalPoly::constant(c.clone()), |acc, (_, (f, _))| &acc * f)
}

/// `p / (t − α)^r` evaluated at `α`.
pub fn p0_at(p: &RationalPoly, alpha: &Rational, r: u32) -> Rational {
    let lin = RationalPoly::linear_root(alpha).pow(r);
    p.exact_div(&lin).expect("α is a root of order r").eval(alpha)
}

fn eval_int(coeffs: &[BigInt], t: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * t + c)
}

/// Square class over Q_p of `h(α)` for the root `α` of the primitive integer
/// polynomial `f` approximated by `(t, k)`. With `inverted`, the residue
/// approximates `β = 1/α` and `f` is the reversed polynomial.
fn padic_class_at_root(
    h: &RationalPoly,
    f: &[BigInt],
    root: &(BigInt, u32),
    inverted: bool,
    p: &Prime,
) -> Option<LocalClass> {
    let fm = IntMultiPoly::univariate(f);
    let e = hensel_certificate(&fm, std::slice::from_ref(&root.0), p, root.1)?;
    let (hs, hint) = if inverted {
        let deg = h.deg();
        let rev = RationalPoly::new((0..=deg).map(|k| h.coeff(deg - k)).collect());
        rev.primitive_integer()
    } else {
        h.primitive_integer()
    };
    let scale = LocalClass::of_rational(&hs, p).ok()?;
    let mut target = 16u32.max(root.1 + 1);
    while target <= MAX_CLASS_PRECISION {
        let lifted = hensel_lift_multivariate(&fm, std::slice::from_ref(&root.0), p, root.1, target).ok()?;
        let prec = target - e;
        let value = eval_int(&hint, &lifted[0]);
        if let Some(cls) = LocalClass::of_residue(&value, prec, p) {
            let mut cls = cls.mul(&scale, p);
            if inverted && h.deg() % 2 == 1 {
                match LocalClass::of_residue(&lifted[0], prec, p) {
                    Some(b) => cls = cls.mul(&b, p),
                    None => {
                        target *= 2;
                        continue;
                    }
                }
            }
            return Some(cls);
        }
        target *= 2;
    }
    None
}

fn real_roots_of(
    factors: &[(RationalPoly, u32)],
    c: &Rational,
    p: &RationalPoly,
    i: usize,
) -> Vec<LocalRoot> {
    let (pi, e) = &factors[i];
    if pi.deg() == 1 {
        let a = -pi.coeff(0);
        let p0 = p0_at(p, &a, *e);
        return vec![LocalRoot {
            locus: RootLocus::Rational { value: a },
            p0_class: Some(sign_rational(&p0)),
            p0_exact: Some(p0),
        }];
    }
    let h = cofactor(c, factors, i);
    isolate_real_roots(pi)
        .into_iter()
        .map(|root| match &root {
            RealRoot::Exact(a) => {
                let p0 = p0_at(p, a, *e);
                LocalRoot {
                    locus: RootLocus::Rational { value: a.clone() },
                    p0_class: Some(sign_rational(&p0)),
                    p0_exact: Some(p0),
                }
            }
            RealRoot::Isolated { lo, hi } => {
                let sign = sign_at_root(&h, pi, &root);
                LocalRoot {
                    locus: RootLocus::Real { factor: pi.clone(), lo: lo.clone(), hi: hi.clone() },
                    p0_exact: None,
                    p0_class: Some(Rational::from_integer(BigInt::from(sign))),
                }
            }
        })
        .collect()
}

fn sign_rational(a: &Rational) -> Rational {
    if a.is_negative() {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Roots of `p_i` in Q_p; the flag is false when the search was cut short.
fn padic_roots_of(
    factors: &[(RationalPoly, u32)],
    c: &Rational,
    p: &RationalPoly,
    i: usize,
    prime: &Prime,
) -> (Vec<LocalRoot>, bool) {
    let (pi, e) = &factors[i];
    if pi.deg() == 1 {
        let a = -pi.coeff(0);
        let p0 = p0_at(p, &a, *e);
        let class = LocalClass::of_rational(&p0, prime).expect("p₀(α) ≠ 0");
        let root = LocalRoot {
            locus: RootLocus::Rational { value: a },
            p0_class: Some(class.to_rational(prime)),
            p0_exact: Some(p0),
        };
        return (vec![root], true);
    }
    let h = cofactor(c, factors, i);
    let (_, f) = pi.primitive_integer();
    let rev: Vec<BigInt> = f.iter().rev().cloned().collect();
    let (direct, c1) = padic_integral_roots(&f, prime, usize::MAX);
    let (inverse, c2) = padic_integral_roots(&rev, prime, usize::MAX);
    let mut out = Vec::new();
    let mut complete = c1 && c2;
    let candidates = direct
        .into_iter()
        .map(|r| (r, false))
        .chain(inverse.into_iter().filter(|(t, _)| t.is_multiple_of(prime.value())).map(|r| (r, true)));
    for (root, inverted) in candidates {
        let poly = if inverted { &rev } else { &f };
        let class = padic_class_at_root(&h, poly, &root, inverted, prime);
        if class.is_none() {
            complete = false;
        }
        out.push(LocalRoot {
            locus: RootLocus::Padic {
                factor: pi.clone(),
                residue: root.0.to_string(),
                precision: root.1,
                inverted,
            },
            p0_exact: None,
            p0_class: class.map(|cl| cl.to_rational(prime)),
        });
    }
    (out, complete)
}

/// Decides `X(F_v) ≠ X(F_v)_cent` for `X: q(x) = p(t)`.
pub fn central_defect(q: &QuadraticForm, p: &RationalPoly, v: &Place) -> Result<CentralDefectReport> {
    if p.is_zero() {
        return Err(Error::ZeroInput("central_defect"));
    }
    let fact = factor_over_q(p);
    let mut roots = Vec::new();
    let mut complete = true;
    let mut notes = Vec::new();
    for i in 0..fact.factors.len() {
        let (pi, e) = &fact.factors[i];
        if *e < 2 {
            continue;
        }
        let found = match v {
            Place::Real => real_roots_of(&fact.factors, &fact.c, p, i),
            Place::Finite(prime) => {
                let (found, ok) = padic_roots_of(&fact.factors, &fact.c, p, i, prime);
                if !ok {
                    complete = false;
                    notes.push(format!("root search for {} over Q_{} incomplete", pi.to_string_in("t"), prime.value()));
                }
                found
            }
        };
        for lr in found {
            let even = e % 2 == 0;
            let auxiliary = match (&lr.p0_class, even) {
                (Some(cls), true) => Some(AuxiliaryForm::new(q, cls, v)?),
                _ => None,
            };
            let defect = auxiliary.as_ref().is_some_and(|a| a.anisotropic);
            roots.push(CentralRoot {
                locus: lr.locus,
                order: *e,
                p0: lr.p0_exact,
                p0_class: if even { lr.p0_class } else { None },
                auxiliary,
                defect,
            });
        }
    }
    if !v.is_real() && q.n() >= 4 {
        notes.push("auxiliary form of rank at least 5 is isotropic at every finite place".into());
    }
    let defect = roots.iter().any(|r| r.defect);
    Ok(CentralDefectReport { place: v.clone(), roots, defect, complete, notes })
}

/// A root of even order as seen by the real sign analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignedRoot {
    pub locus: RootLocus,
    pub order: u32,
    pub p0_sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealShortcut {
    /// `1` for positive definite, `-1` for negative definite.
    pub definite: Option<i8>,
    pub even_roots: Vec<SignedRoot>,
    pub defect: bool,
}

/// The real defect by sign analysis: `q` is ±-definite and some real root of
/// even order has `p₀(α)` of the opposite sign.
pub fn real_definiteness_shortcut(q: &QuadraticForm, p: &RationalPoly) -> Result<RealShortcut> {
    if p.is_zero() {
        return Err(Error::ZeroInput("real_definiteness_shortcut"));
    }
    let definite = if q.is_positive_definite() {
        Some(1)
    } else if q.is_negative_definite() {
        Some(-1)
    } else {
        None
    };
    let fact = factor_over_q(p);
    let mut even_roots = Vec::new();
    for i in 0..fact.factors.len() {
        let e = fact.factors[i].1;
        if e % 2 == 1 {
            continue;
        }
        for lr in real_roots_of(&fact.factors, &fact.c, p, i) {
            let sign = lr.p0_class.as_ref().map_or(0, |s| if s.is_negative() { -1 } else { 1 });
            even_roots.push(SignedRoot { locus: lr.locus, order: e, p0_sign: sign });
        }
    }
    let defect = definite.is_some_and(|s| even_roots.iter().any(|r| r.p0_sign == -s));
    Ok(RealShortcut { definite, even_roots, defect })
}

/// One smooth point `(s·θ, t)` of the approximating sequence, with `s` the
/// square root in F_v of `scale_squared`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationStep {
    pub l: u32,
    #[serde(serialize_with = "ser_rat")]
    pub t: Rational,
    #[serde(serialize_with = "ser_rats")]
    pub direction: Vec<Rational>,
    #[serde(serialize_with = "ser_rat")]
    pub scale_squared: Rational,
    /// `|t − α|_v`.
    #[serde(serialize_with = "ser_rat")]
    pub t_distance: Rational,
    /// `|s²|_v`, so the `x`-coordinates have size `√|s²|_v · |θ|_v`.
    #[serde(serialize_with = "ser_rat")]
    pub scale_size: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationWitness {
    pub place: Place,
    #[serde(serialize_with = "ser_rat")]
    pub alpha: Rational,
    pub order: u32,
    pub steps: Vec<ApproximationStep>,
}

fn abs_v(a: &Rational, v: &Place) -> Rational {
    match v {
        Place::Real => a.abs(),
        Place::Finite(prime) => {
            if a.is_zero() {
                return Rational::zero();
            }
            let pv = Rational::from_integer(prime.value().clone());
            let val = crate::arith::valuation(a, prime).expect("non-zero");
            pv.pow(-(val as i32))
        }
    }
}

fn uniformizer(v: &Place) -> Rational {
    match v {
        Place::Real => Rational::new(BigInt::one(), BigInt::from(2)),
        Place::Finite(prime) => Rational::from_integer(prime.value().clone()),
    }
}

/// Integer vector `θ` with `q(θ) ≠ 0` and `q(θ)/target` a square in F_v.
fn direction_in_class(q: &QuadraticForm, target: &Rational, v: &Place) -> Option<Vec<Rational>> {
    let n = q.n();
    let mut tried = 0usize;
    for h in 1i64.. {
        let side = (2 * h + 1) as usize;
        let total = side.checked_pow(n as u32)?;
        for idx in 0..total {
            let mut rest = idx;
            let mut vec = Vec::with_capacity(n);
            for _ in 0..n {
                vec.push((rest % side) as i64 - h);
                rest /= side;
            }
            if vec.iter().all(|c| c.abs() < h) {
                continue;
            }
            tried += 1;
            if tried > DIRECTION_SEARCH_LIMIT {
                return None;
            }
            let theta: Vec<Rational> = vec.iter().map(|&c| Rational::from_integer(c.into())).collect();
            let value = q.eval(&theta);
            if !value.is_zero() && is_square_local(&(value / target), v).ok()? {
                return Some(theta);
            }
        }
    }
    None
}

/// Three consecutive members of the smooth sequence converging to the
/// singular point `(0, …, 0, α)`, for a rational root `α` of order `r ≥ 2`
/// that is not a defect.
pub fn approximation_witness(
    q: &QuadraticForm,
    p: &RationalPoly,
    alpha: &Rational,
    v: &Place,
) -> Result<ApproximationWitness> {
    let lin = RationalPoly::linear_root(alpha);
    let mut r = 0u32;
    let mut rest = p.clone();
    while let Some(next) = rest.exact_div(&lin) {
        if !rest.eval(alpha).is_zero() {
            break;
        }
        rest = next;
        r += 1;
    }
    if r < 2 {
        return Err(Error::NotApplicable("α is not a multiple root of p".into()));
    }
    let p0 = rest.eval(alpha);
    let pi = uniformizer(v);
    // odd order: move t along p₀(α)·a₁·π^{2l} with θ the first diagonal vector
    let (direction, base) = if r % 2 == 1 {
        let b = q.basis();
        let theta: Vec<Rational> = (0..q.n()).map(|i| b[i][0].clone()).collect();
        let a1 = q.diag()[0].clone();
        (theta, &p0 * &a1)
    } else {
        let theta = direction_in_class(q, &p0, v)
            .ok_or_else(|| Error::NotApplicable("q does not represent the class of p₀(α)".into()))?;
        (theta, Rational::one())
    };
    let q_theta = q.eval(&direction);
    let mut steps: Vec<ApproximationStep> = Vec::new();
    for l in 1..=MAX_APPROXIMATION_INDEX {
        let delta = &base * pi.pow(2 * l as i32);
        let t = alpha + &delta;
        let value = p.eval(&t);
        let scale_squared = &value / &q_theta;
        let ok = !value.is_zero() && is_square_local(&scale_squared, v)?;
        let step = ApproximationStep {
            l,
            t,
            direction: direction.clone(),
            t_distance: abs_v(&delta, v),
            scale_size: abs_v(&scale_squared, v),
            scale_squared,
        };
        let extends = steps.last().is_some_and(|prev: &ApproximationStep| {
            step.t_distance < prev.t_distance && step.scale_size < prev.scale_size
        });
        if !ok {
            steps.clear();
        } else if extends || steps.is_empty() {
            steps.push(step);
        } else {
            steps = vec![step];
        }
        if steps.len() == 3 {
            return Ok(ApproximationWitness { place: v.clone(), alpha: alpha.clone(), order: r, steps });
        }
    }
    Err(Error::SearchBound(MAX_APPROXIMATION_INDEX as u64))
}

impl ApproximationWitness {
    /// Exact re-check: each step satisfies `s²·q(θ) = p(t)` with `s²` a square
    /// in F_v, and the steps approach `(0, …, 0, α)`.
    pub fn verify(&self, q: &QuadraticForm, p: &RationalPoly) -> bool {
        let on_surface = self.steps.iter().all(|s| {
            !s.scale_squared.is_zero()
                && &s.scale_squared * q.eval(&s.direction) == p.eval(&s.t)
                && is_square_local(&s.scale_squared, &self.place).unwrap_or(false)
                && abs_v(&(&s.t - &self.alpha), &self.place) == s.t_distance
                && abs_v(&s.scale_squared, &self.place) == s.scale_size
        });
        let shrinking = self
            .steps
            .windows(2)
            .all(|w| w[1].t_distance < w[0].t_distance && w[1].scale_size < w[0].scale_size);
        on_surface && shrinking && self.steps.len() == 3
    }
}
