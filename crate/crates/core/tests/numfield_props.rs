use bmquad::arith::{is_rational_square, ratio};
use bmquad::numfield::{is_square_in_residue_field_with, trager_square_test, ScreenMode, SquareTest};
use bmquad::poly::factor_over_q;
use bmquad::RationalPoly;
use proptest::prelude::*;

fn irreducible(max_deg: usize) -> impl Strategy<Value = RationalPoly> {
    (1..=max_deg)
        .prop_flat_map(|d| prop::collection::vec(-9i64..=9, d))
        .prop_map(|mut c| {
            c.push(1);
            RationalPoly::from_ints(&c)
        })
        .prop_filter("irreducible", |m| {
            let f = factor_over_q(m);
            f.factors.len() == 1 && f.factors[0].1 == 1
        })
}

fn rational() -> impl Strategy<Value = bmquad::Rational> {
    ((-40i64..=40).prop_filter("non-zero", |a| *a != 0), 1i64..=6).prop_map(|(a, b)| ratio(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Fast screening, exhaustive mode and bare Trager give one answer, and a
    /// square answer carries a verified root.
    #[test]
    fn screen_agrees_with_trager(m in irreducible(4), d in rational()) {
        let fast = is_square_in_residue_field_with(&d, &m, ScreenMode::Fast).unwrap();
        let full = is_square_in_residue_field_with(&d, &m, ScreenMode::Exhaustive).unwrap();
        let trager = trager_square_test(&d, &m);
        prop_assert_eq!(fast.is_square(), trager.is_square());
        prop_assert_eq!(full.is_square(), trager.is_square());
        for t in [fast, full, trager] {
            if let SquareTest::Square { witness } = t {
                prop_assert!(witness.square().equals_constant(&d));
            }
        }
    }

    #[test]
    fn odd_degree_keeps_non_squares(m in irreducible(5), d in rational()) {
        prop_assume!(m.deg() % 2 == 1 && !is_rational_square(&d));
        prop_assert!(!is_square_in_residue_field_with(&d, &m, ScreenMode::Fast).unwrap().is_square());
    }

    /// `D·s^2` is a square in `Q[t]/(t^2 - D)` and in the quartic
    /// `Q[t]/(t^4 - D)` that contains it.
    #[test]
    fn constructed_squares(dd in prop::sample::select(vec![-7i64, -3, -2, -1, 2, 3, 5, 6, 7, 10]), s in 1i64..=9, u in 1i64..=4) {
        let d = ratio(dd * s * s, u * u);
        let quad = RationalPoly::from_ints(&[-dd, 0, 1]);
        prop_assert!(is_square_in_residue_field_with(&d, &quad, ScreenMode::Fast).unwrap().is_square());
        let quart = RationalPoly::from_ints(&[-dd, 0, 0, 0, 1]);
        if factor_over_q(&quart).factors.len() == 1 {
            prop_assert!(is_square_in_residue_field_with(&d, &quart, ScreenMode::Fast).unwrap().is_square());
        }
    }
}
