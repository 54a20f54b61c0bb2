use bmquad::arith::rat;
use bmquad::poly::{factor_over_q, singular_locus};
use bmquad::{Rational, RationalPoly};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn poly_strategy(max_deg: usize, height: i64) -> impl Strategy<Value = RationalPoly> {
    (1..=max_deg)
        .prop_flat_map(move |d| (prop::collection::vec(-height..=height, d), (1..=height)))
        .prop_map(|(mut c, lead)| {
            c.push(lead);
            RationalPoly::from_ints(&c)
        })
}

fn divisors(n: &BigInt) -> Vec<i64> {
    let n = n.abs().to_i64().unwrap();
    (1..=n).filter(|d| n % d == 0).flat_map(|d| [d, -d]).collect()
}

fn eval_int(f: &[BigInt], x: &Rational) -> Rational {
    f.iter().rev().fold(Rational::zero(), |acc, c| acc * x + Rational::from_integer(c.clone()))
}

fn has_rational_root(f: &[BigInt]) -> bool {
    divisors(&f[0])
        .into_iter()
        .any(|a| divisors(f.last().unwrap()).into_iter().any(|b| eval_int(f, &Rational::new(a.into(), b.into())).is_zero()))
}

/// A quadratic integer factor of a quartic: `g2 | lead`, `g0 | f(0)`,
/// `g(1) | f(1)`, and `|g1|` within Mignotte's bound `2·‖f‖₂`.
fn has_quadratic_factor(f: &[BigInt]) -> bool {
    let fp = RationalPoly::from_bigints(f);
    let norm2: f64 = f.iter().map(|c| c.to_f64().unwrap().powi(2)).sum::<f64>().sqrt();
    let bound = (2.0 * norm2).ceil() as i64;
    let f1 = fp.eval(&rat(1)).to_integer();
    for g2 in divisors(f.last().unwrap()).into_iter().filter(|d| *d > 0) {
        for g0 in divisors(&f[0]) {
            for s in divisors(&f1) {
                let g1 = s - g2 - g0;
                if g1.abs() > bound {
                    continue;
                }
                let g = RationalPoly::from_ints(&[g0, g1, g2]);
                if fp.rem(&g).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn products_round_trip(parts in prop::collection::vec((poly_strategy(4, 20), 1u32..=2), 1..=3), c in 1i64..=30) {
        let product = parts.iter().fold(RationalPoly::constant(rat(c)), |acc, (f, e)| &acc * &f.pow(*e));
        let fact = factor_over_q(&product);
        prop_assert_eq!(fact.expand(), product);
        for (i, (f, _)) in fact.factors.iter().enumerate() {
            prop_assert!(f.gcd(&f.derivative()).is_constant());
            for (g, _) in &fact.factors[i + 1..] {
                prop_assert!(f.gcd(g).is_constant());
            }
            let (_, ints) = f.primitive_integer();
            if f.deg() >= 2 {
                // f(1) = 0 would already be a rational root
                prop_assert!(!has_rational_root(&ints), "{} has a rational root", f);
            }
            if f.deg() == 4 {
                prop_assert!(!has_quadratic_factor(&ints), "{} has a quadratic factor", f);
            }
        }
    }

    #[test]
    fn singular_locus_matches_derivative_gcd(p in poly_strategy(6, 9), sq in poly_strategy(2, 5), square in any::<bool>()) {
        let p = if square { &p * &sq.pow(2) } else { p };
        let empty = singular_locus(&p).is_empty();
        prop_assert_eq!(empty, p.gcd(&p.derivative()).is_constant());
    }
}
