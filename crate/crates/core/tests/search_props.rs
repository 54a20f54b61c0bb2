use bmquad::localsolve::SolubilityMode;
use bmquad::search::{search_integral_points, verify_point_i128};
use bmquad::{QuadraticForm, RationalPoly};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = i64> {
    (-5i64..=5).prop_filter("non-zero", |a| *a != 0)
}

fn instance() -> impl Strategy<Value = (QuadraticForm, RationalPoly)> {
    (prop::array::uniform3(entry()), prop::collection::vec(-6i64..=6, 1..=3), entry()).prop_map(|(a, mut c, lead)| {
        c.push(lead);
        (QuadraticForm::diagonal_ints(&a).unwrap(), RationalPoly::from_ints(&c))
    })
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn points_verify_and_modes_nest((q, p) in instance(), bound in 1u64..=12) {
        let any = search_integral_points(&q, &p, bound, SolubilityMode::Any).unwrap();
        let prim = search_integral_points(&q, &p, bound, SolubilityMode::Primitive).unwrap();
        for pt in &any.points {
            prop_assert!(verify_point_i128(&q, &p, pt), "{:?}", pt);
            prop_assert!(pt.iter().all(|c| c.unsigned_abs() <= bound as u128 || any.fibre_exhaustive));
        }
        for pt in &prim.points {
            prop_assert!(any.points.contains(pt));
        }
        prop_assert_eq!(&prim.points, &any.primitive_part().points);
    }

    #[test]
    fn deterministic_across_thread_counts((q, p) in instance(), bound in 1u64..=10) {
        let one = with_threads(1, || search_integral_points(&q, &p, bound, SolubilityMode::Any).unwrap());
        let four = with_threads(4, || search_integral_points(&q, &p, bound, SolubilityMode::Any).unwrap());
        let again = search_integral_points(&q, &p, bound, SolubilityMode::Any).unwrap();
        prop_assert_eq!(&one.points, &four.points);
        prop_assert_eq!(&one.points, &again.points);
        prop_assert_eq!(one.statement, again.statement);
    }
}
