use bmquad::arith::{hilbert_symbol, rat, ratio};
use bmquad::brauer::{classify, sa_verdict, square_root_data, tangent_generator, QuaternionClass, SaStatus};
use bmquad::poly::{factor_over_q, parse_poly};
use bmquad::quadform::parse_quadratic_form;
use bmquad::{BrInv, Place, QuadraticForm, Rational, RationalPoly};
use num_integer::Integer;
use proptest::prelude::*;

fn generator(q: &QuadraticForm, p: &RationalPoly) -> QuaternionClass {
    let (c, r) = square_root_data(&factor_over_q(p)).unwrap();
    tangent_generator(q, &c, &r).unwrap()
}

/// Rational points `(X/s², Y/s², Z/s², T/s)` of `q(x) = r(t)^2` with `q` of
/// the shape `Q(x, y) + k z^2`.
fn rational_points(q: &QuadraticForm, r: &RationalPoly, k: i64) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for s in 1i64..=4 {
        for t in -4i64..=4 {
            if t.gcd(&s) != 1 {
                continue;
            }
            let m = r.eval(&ratio(t, s)) * rat(s * s);
            for x in -12i64..=12 {
                for y in -12i64..=12 {
                    let qxy = q.eval(&[rat(x), rat(y), rat(0)]);
                    let z2 = (&m * &m - qxy) / rat(k);
                    if !z2.is_integer() || z2 < rat(0) {
                        continue;
                    }
                    let z2 = z2.to_integer();
                    let z = z2.sqrt();
                    if &z * &z == z2 {
                        let s2 = rat(s * s);
                        let pt = vec![rat(x) / &s2, rat(y) / &s2, Rational::from_integer(z) / &s2, ratio(t, s)];
                        assert_eq!(q.eval(&pt[..3]), r.eval(&pt[3]) * r.eval(&pt[3]));
                        out.push(pt);
                    }
                }
            }
        }
    }
    out
}

/// `(L0, d)` and `(L1, d) + (κ, d)` agree wherever both are defined.
fn representatives_agree(q: &str, p: &str, r: &str, k: i64, places: &[u64]) -> usize {
    let q = parse_quadratic_form(q).unwrap();
    let p = parse_poly(p).unwrap();
    let b = generator(&q, &p);
    let conj = b.conjugate.clone().expect("conjugate representative");
    let d = b.d.normalized_rational();
    let mut compared = 0;
    let places: Vec<Place> = std::iter::once(Place::Real).chain(places.iter().map(|p| Place::prime(*p))).collect();
    for pt in rational_points(&q, &parse_poly(r).unwrap(), k) {
        let (l0, l1) = (b.primary.eval(&pt[..3], &pt[3]), conj.eval(&pt[..3], &pt[3]));
        if l0 == rat(0) || l1 == rat(0) {
            continue;
        }
        for v in &places {
            let lhs = hilbert_symbol(&l0, &d, v).unwrap();
            let rhs = hilbert_symbol(&l1, &d, v).unwrap() + hilbert_symbol(&b.kappa, &d, v).unwrap();
            assert_eq!(lhs, rhs, "at {pt:?} over {v}");
            compared += 1;
        }
    }
    compared
}

#[test]
fn first_example_representatives_agree() {
    let n = representatives_agree("-9,7,2;1,0,0", "(2t^2-1)^2", "2t^2-1", 2, &[2, 3, 7, 41]);
    assert!(n > 200, "{n}");
}

#[test]
fn second_example_representatives_agree() {
    let n = representatives_agree("1,-2,64", "(2t^2+3)^2", "2t^2+3", 64, &[2, 3, 5]);
    assert!(n > 20, "{n}");
}

#[test]
fn second_example_mod8_values() {
    for t in 0i64..8 {
        for z in 0..8 {
            let u = (2 * t * t + 3 - 8 * z).rem_euclid(8);
            assert!(u == 3 || u == 5);
        }
    }
    for u in [3, 5, -3, -5, 11, 13] {
        assert_eq!(hilbert_symbol(&rat(u), &rat(2), &Place::prime(2)).unwrap(), BrInv::Half);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// A failing verdict comes from a non-trivial quotient for that model.
    #[test]
    fn verdicts_follow_quotients(
        a in prop::array::uniform3((-9i64..=9).prop_filter("non-zero", |a| *a != 0)),
        roots in prop::collection::vec(-5i64..=5, 1..=2),
        quad in -6i64..=6,
        c in (-12i64..=12).prop_filter("non-zero", |a| *a != 0),
        e in 1u32..=2,
        extra in prop::sample::subsequence(vec![2u64, 3, 5], 0..=3),
    ) {
        let q = QuadraticForm::diagonal_ints(&a).unwrap();
        let mut p = RationalPoly::constant(rat(c));
        for r in &roots {
            p = &p * &RationalPoly::from_ints(&[*r, 1]).pow(e * 2);
        }
        p = &p * &RationalPoly::from_ints(&[quad, 0, 1]).pow(2);
        let fact = factor_over_q(&p);
        let s: Vec<Place> = std::iter::once(Place::Real).chain(extra.into_iter().map(Place::prime)).collect();
        let Ok(v) = sa_verdict(&q, &fact, &s) else { return Ok(()) };
        let cls = classify(&q, &fact).unwrap();
        prop_assert_eq!((v.br_u, v.br_xtilde), (cls.br_u, cls.br_xtilde));
        if v.sa_u == SaStatus::Fails {
            prop_assert!(cls.br_u.is_nontrivial() && v.condition_b);
        }
        if v.sa_xtilde == SaStatus::Fails {
            prop_assert!(cls.br_xtilde.is_nontrivial() && v.condition_b);
        }
    }
}
