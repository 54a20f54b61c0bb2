use bmquad::arith::rat;
use bmquad::quadform::Matrix;
use bmquad::{Place, QuadraticForm, SquareClass};
use proptest::prelude::*;

const PLACES: [u64; 5] = [2, 3, 5, 7, 11];

fn places() -> Vec<Place> {
    std::iter::once(Place::Real).chain(PLACES.iter().map(|p| Place::prime(*p))).collect()
}

/// Integer symmetric Gram matrices `[a, b, c; d, e, f]` with entries in `±m`.
fn ternary(m: i64) -> impl Strategy<Value = [i64; 6]> {
    prop::array::uniform6(-m..=m)
}

fn gram(e: &[i64; 6]) -> Matrix {
    let [a, b, c, d, f, g] = *e;
    vec![vec![rat(a), rat(d), rat(f)], vec![rat(d), rat(b), rat(g)], vec![rat(f), rat(g), rat(c)]]
}

fn form(e: &[i64; 6]) -> Option<QuadraticForm> {
    QuadraticForm::from_gram(gram(e)).ok()
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt() as i128;
    (r.saturating_sub(2)..=r + 2).find(|s| s * s == n)
}

/// A primitive zero of height at most `h`, solving for `z` exactly.
fn small_zero(e: &[i64; 6], h: i128) -> bool {
    let [a, b, c, d, f, g] = e.map(|x| x as i128);
    for x in -h..=h {
        for y in 0..=h {
            if y == 0 && x < 0 {
                continue;
            }
            // c z^2 + 2(f x + g y) z + (a x^2 + 2 d x y + b y^2) = 0
            let lin = f * x + g * y;
            let rest = a * x * x + 2 * d * x * y + b * y * y;
            if c == 0 {
                if lin == 0 {
                    if rest == 0 && (x, y) != (0, 0) {
                        return true;
                    }
                } else if rest % (2 * lin) == 0 && (rest / (2 * lin)).abs() <= h && (x, y, rest) != (0, 0, 0) {
                    return true;
                }
                continue;
            }
            let Some(s) = isqrt(lin * lin - c * rest) else { continue };
            for num in [-lin + s, -lin - s] {
                if num % c == 0 && (num / c).abs() <= h && (x, y, num / c) != (0, 0, 0) {
                    return true;
                }
            }
        }
    }
    false
}

fn unimodular(ops: &[(usize, usize, i64)]) -> Matrix {
    let mut u: Matrix = (0..3).map(|i| (0..3).map(|j| rat((i == j) as i64)).collect()).collect();
    for &(i, j, k) in ops {
        if i != j {
            for row in u.iter_mut() {
                let add = &row[j] * rat(k);
                row[i] += add;
            }
        }
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diagonalization_is_certified(e in ternary(20)) {
        let Some(q) = form(&e) else { return Ok(()) };
        prop_assert!(q.verify_diagonalization());
        let prod = q.diag().iter().fold(rat(1), |acc, x| acc * x);
        prop_assert_eq!(SquareClass::new(prod).unwrap(), SquareClass::new(q.det().clone()).unwrap());
    }

    /// Global isotropy implies local isotropy, and agrees with a search for
    /// primitive zeros of height at most 200 whenever the search succeeds.
    #[test]
    fn local_global_consistency(e in ternary(20)) {
        let Some(q) = form(&e) else { return Ok(()) };
        let global = q.is_isotropic_global();
        if global {
            for v in places() {
                prop_assert!(q.is_isotropic_local(&v), "isotropic over Q but not at {}", v);
            }
        }
        if small_zero(&e, 200) {
            prop_assert!(global);
        }
    }

    #[test]
    fn isotropy_scaling_invariance(e in ternary(12), s in 1i64..=7, ops in prop::collection::vec((0usize..3, 0usize..3, -3i64..=3), 0..5)) {
        let Some(q) = form(&e) else { return Ok(()) };
        let scaled = q.scaled(&rat(s * s)).unwrap();
        let moved = q.transformed(&unimodular(&ops)).unwrap();
        for v in places() {
            let want = q.is_isotropic_local(&v);
            prop_assert_eq!(scaled.is_isotropic_local(&v), want);
            prop_assert_eq!(moved.is_isotropic_local(&v), want);
            prop_assert_eq!(moved.hasse_invariant(&v), q.hasse_invariant(&v));
        }
        prop_assert_eq!(scaled.is_isotropic_global(), q.is_isotropic_global());
    }
}
