use serde::Serialize;

use super::zassenhaus::factor_squarefree_integer;
use super::RationalPoly;
use crate::arith::{format_rational, Rational};

/// `p = c · ∏ p_i^{e_i}` with distinct monic irreducible `p_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub c: Rational,
    pub factors: Vec<(RationalPoly, u32)>,
}

impl Factorization {
    pub fn expand(&self) -> RationalPoly {
        self.factors
            .iter()
            .fold(RationalPoly::constant(self.c.clone()), |acc, (f, e)| &acc * &f.pow(*e))
    }

    pub fn all_exponents_even(&self) -> bool {
        self.factors.iter().all(|(_, e)| e % 2 == 0)
    }

    /// Factors with odd exponent.
    pub fn odd_factors(&self) -> impl Iterator<Item = &(RationalPoly, u32)> {
        self.factors.iter().filter(|(_, e)| e % 2 == 1)
    }

    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(f, e)| f.deg() * *e as usize)
            .sum()
    }
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", format_rational(&self.c))?;
        for (p, e) in &self.factors {
            if *e == 1 {
                write!(f, " * ({p})")?;
            } else {
                write!(f, " * ({p})^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct FactorJson {
    poly: RationalPoly,
    text: String,
    multiplicity: u32,
}

impl Serialize for Factorization {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let factors: Vec<FactorJson> = self
            .factors
            .iter()
            .map(|(p, e)| FactorJson {
                poly: p.clone(),
                text: p.to_string(),
                multiplicity: *e,
            })
            .collect();
        let mut st = s.serialize_struct("Factorization", 2)?;
        st.serialize_field("c", &format_rational(&self.c))?;
        st.serialize_field("factors", &factors)?;
        st.end()
    }
}

/// Yun's decomposition of a non-constant polynomial: monic, squarefree,
/// pairwise coprime `a_i` with `p / lc(p) = ∏ a_i^i`. Only non-trivial
/// `(a_i, i)` are returned.
pub fn squarefree_decomposition(p: &RationalPoly) -> Vec<(RationalPoly, u32)> {
    let f = p.monic();
    let mut out = Vec::new();
    if f.is_constant() {
        return out;
    }
    let fp = f.derivative();
    let c = f.gcd(&fp);
    let mut w = f.div_rem(&c).0;
    let mut y = fp.div_rem(&c).0;
    let mut z = &y - &w.derivative();
    let mut i = 1;
    while !w.is_constant() {
        let g = w.gcd(&z);
        if !g.is_constant() {
            out.push((g.clone(), i));
        }
        w = w.div_rem(&g).0;
        y = z.div_rem(&g).0;
        z = &y - &w.derivative();
        i += 1;
    }
    out
}

fn sort_factors(v: &mut [(RationalPoly, u32)]) {
    v.sort_by(|(a, ea), (b, eb)| {
        a.deg()
            .cmp(&b.deg())
            .then_with(|| a.coeffs().iter().rev().cmp(b.coeffs().iter().rev()))
            .then(ea.cmp(eb))
    });
}

/// Complete factorization over Q, re-verified by multiplication.
///
/// Panics on the zero polynomial.
pub fn factor_over_q(p: &RationalPoly) -> Factorization {
    assert!(!p.is_zero(), "factorization of the zero polynomial");
    let c = p.leading();
    let mut factors = Vec::new();
    for (a, e) in squarefree_decomposition(p) {
        let (_, prim) = a.primitive_integer();
        for g in factor_squarefree_integer(&prim) {
            factors.push((RationalPoly::from_bigints(&g).monic(), e));
        }
    }
    sort_factors(&mut factors);
    let out = Factorization { c, factors };
    assert_eq!(&out.expand(), p, "factorization failed to re-multiply");
    out
}

/// Exponent-parity data of a factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquarefreeData {
    pub all_even: bool,
    /// Monic `r` with `p = c · r^2`, present exactly when `all_even`.
    pub r: Option<RationalPoly>,
}

pub fn squarefree_part_data(f: &Factorization) -> SquarefreeData {
    if !f.all_exponents_even() {
        return SquarefreeData { all_even: false, r: None };
    }
    let r = f
        .factors
        .iter()
        .fold(RationalPoly::one(), |acc, (p, e)| &acc * &p.pow(e / 2));
    SquarefreeData { all_even: true, r: Some(r) }
}

/// Irreducible factors of multiplicity at least two; they cut out the
/// singular fibres `x = y = z = 0, t = θ` with θ a multiple root.
pub fn singular_locus(p: &RationalPoly) -> Vec<(RationalPoly, u32)> {
    if p.is_zero() {
        return Vec::new();
    }
    factor_over_q(p)
        .factors
        .into_iter()
        .filter(|(_, e)| *e >= 2)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};
    use crate::poly::parse_poly;

    #[test]
    fn worked_factorizations() {
        let f = factor_over_q(&parse_poly("4t^4 - 4t^2 + 1").unwrap());
        assert_eq!(f.c, rat(4));
        assert_eq!(f.factors, vec![(RationalPoly::new(vec![ratio(-1, 2), rat(0), rat(1)]), 2)]);

        let f = factor_over_q(&parse_poly("4t^4 + 12t^2 + 9").unwrap());
        assert_eq!(f.c, rat(4));
        assert_eq!(f.factors, vec![(RationalPoly::new(vec![ratio(3, 2), rat(0), rat(1)]), 2)]);

        let f = factor_over_q(&RationalPoly::t());
        assert_eq!(f.c, rat(1));
        assert_eq!(f.factors, vec![(RationalPoly::t(), 1)]);
    }

    #[test]
    fn constructed_product_round_trip() {
        let p = parse_poly("5(t^2+1)(t-2)^3").unwrap();
        let f = factor_over_q(&p);
        assert_eq!(f.c, rat(5));
        assert_eq!(
            f.factors,
            vec![(RationalPoly::from_ints(&[-2, 1]), 3), (RationalPoly::from_ints(&[1, 0, 1]), 1)]
        );
        assert_eq!(f.expand(), p);
    }

    #[test]
    fn constants_have_no_factors() {
        let f = factor_over_q(&RationalPoly::constant(ratio(-3, 7)));
        assert_eq!(f.c, ratio(-3, 7));
        assert!(f.factors.is_empty());
    }

    #[test]
    fn squarefree_data_examples() {
        let f = factor_over_q(&parse_poly("(2t^2-1)^2").unwrap());
        let d = squarefree_part_data(&f);
        assert!(d.all_even);
        assert_eq!(d.r.unwrap(), parse_poly("t^2 - 1/2").unwrap());
        assert!(!squarefree_part_data(&factor_over_q(&RationalPoly::t())).all_even);
        let d = squarefree_part_data(&factor_over_q(&parse_poly("(t^2+1)^4").unwrap()));
        assert_eq!(d.r.unwrap(), parse_poly("(t^2+1)^2").unwrap());
    }

    #[test]
    fn singular_locus_examples() {
        assert_eq!(
            singular_locus(&parse_poly("4t^4-4t^2+1").unwrap()),
            vec![(parse_poly("t^2-1/2").unwrap(), 2)]
        );
        assert!(singular_locus(&parse_poly("t^2-1").unwrap()).is_empty());
        assert_eq!(singular_locus(&parse_poly("t^3").unwrap()), vec![(RationalPoly::t(), 3)]);
    }
}
