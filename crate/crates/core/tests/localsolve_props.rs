use bmquad::localsolve::{decide_u_zp, decide_x_zp, verify_witness, LocalAnswer, Witness, DEFAULT_DEPTH_BOUND};
use bmquad::{Place, QuadraticForm, RationalPoly};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (QuadraticForm, RationalPoly, Place)> {
    let entry = (-10i64..=10).prop_filter("non-zero", |a| *a != 0);
    (
        prop::array::uniform3(entry.clone()),
        prop::collection::vec(-10i64..=10, 1..=3),
        entry,
        prop::sample::select(vec![2u64, 3, 5]),
    )
        .prop_map(|(a, mut c, lead, p)| {
            c.push(lead);
            (QuadraticForm::diagonal_ints(&a).unwrap(), RationalPoly::from_ints(&c), Place::prime(p))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn certificates_reverify((q, p, v) in instance()) {
        let u = decide_u_zp(&q, &p, &v).unwrap();
        if let LocalAnswer::Yes(Witness::Residue(w)) = &u.answer {
            prop_assert!(verify_witness(&q, &p, w));
        }
        if u.good_reduction {
            prop_assert!(u.is_yes(), "fast path applies but the search found nothing");
        }
        let x = decide_x_zp(&q, &p, &v, DEFAULT_DEPTH_BOUND).unwrap();
        if u.is_yes() {
            prop_assert!(!x.is_no(), "U has points but X has none");
        }
        if let LocalAnswer::Yes(Witness::Residue(w)) = &x.answer {
            prop_assert!(verify_witness(&q, &p, w));
        }
    }
}
