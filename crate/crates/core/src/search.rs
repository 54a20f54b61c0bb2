//! Bounded exact search for integral points on `q(x) = p(t)`.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::localsolve::SolubilityMode;
use crate::poly::RationalPoly;
use crate::quadform::QuadraticForm;
use crate::Rational;

/// Magnitude ceiling for intermediate values, leaving headroom in i128.
const VALUE_CEILING: i128 = 1 << 100;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub bound: u64,
    pub mode: SolubilityMode,
    /// Points `(x_1, …, x_n, t)`, sorted and duplicate-free.
    pub points: Vec<Vec<i128>>,
    /// Whether each fibre was searched completely (definite `q`) rather than
    /// inside the box.
    pub fibre_exhaustive: bool,
    pub statement: String,
}

impl SearchReport {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The primitive-mode report over the same region.
    pub fn primitive_part(&self) -> SearchReport {
        let points: Vec<Vec<i128>> =
            self.points.iter().filter(|x| is_primitive(&x[..x.len() - 1])).cloned().collect();
        let mode = SolubilityMode::Primitive;
        SearchReport {
            bound: self.bound,
            mode,
            statement: statement(points.len(), self.bound, mode, self.fibre_exhaustive),
            points,
            fibre_exhaustive: self.fibre_exhaustive,
        }
    }
}

fn statement(count: usize, bound: u64, mode: SolubilityMode, exhaustive: bool) -> String {
    let region = if exhaustive {
        format!("|t| <= {bound}")
    } else {
        format!("|t| <= {bound} and |x_i| <= {bound}")
    };
    let kind = match mode {
        SolubilityMode::Primitive => "primitive integral points",
        SolubilityMode::Any => "integral points",
    };
    if count == 0 {
        format!("no {kind} with {region}; this does not bound points outside the region")
    } else {
        format!("{count} {kind} with {region}")
    }
}

/// Integer coefficients of `q` as `Σ d_i x_i² + Σ_{i<j} c_ij x_i x_j`.
struct IntForm {
    diag: Vec<i128>,
    cross: Vec<Vec<i128>>,
}

impl IntForm {
    fn new(q: &QuadraticForm) -> Result<Self> {
        let (d, c) = q.integer_coefficients().ok_or(Error::NonIntegral)?;
        let conv = |b: &BigInt| b.to_i128().filter(|v| v.abs() < 1 << 40).ok_or_else(too_large);
        Ok(IntForm {
            diag: d.iter().map(conv).collect::<Result<_>>()?,
            cross: c.iter().map(|r| r.iter().map(conv).collect::<Result<_>>()).collect::<Result<_>>()?,
        })
    }

    fn eval(&self, x: &[i128]) -> i128 {
        let n = x.len();
        let mut acc = 0i128;
        for i in 0..n {
            acc += self.diag[i] * x[i] * x[i];
            for j in i + 1..n {
                acc += self.cross[i][j] * x[i] * x[j];
            }
        }
        acc
    }
}

fn too_large() -> Error {
    Error::InvalidInput("coefficients too large for the bounded search".into())
}

/// Integer `p(t)`, requiring the value to stay far inside i128.
fn eval_poly(coeffs: &[i128], t: i128) -> Option<i128> {
    let mut acc = 0i128;
    for c in coeffs.iter().rev() {
        acc = acc.checked_mul(t)?.checked_add(*c)?;
        if acc.abs() > VALUE_CEILING {
            return None;
        }
    }
    Some(acc)
}

/// `max{x_i² : q(x) = 1}` for positive definite `q`: the diagonal of `G⁻¹`.
fn inverse_gram_diagonal(q: &QuadraticForm) -> Vec<Rational> {
    let b = q.basis();
    let d = q.diag();
    (0..q.n())
        .map(|i| (0..q.n()).map(|k| &b[i][k] * &b[i][k] / &d[k]).sum())
        .collect()
}

/// Integer solutions of `a x² + b x + c = 0` (not all of `a, b, c` zero).
fn integer_roots(a: i128, b: i128, c: i128) -> Vec<i128> {
    if a == 0 {
        if b != 0 && c % b == 0 {
            return vec![-c / b];
        }
        return Vec::new();
    }
    let disc = b * b - 4 * a * c;
    let Some(s) = exact_sqrt(disc) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for num in [-b - s, -b + s] {
        if num % (2 * a) == 0 {
            out.push(num / (2 * a));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Quadratic residues modulo 64, 63 and 65 as bit masks.
const fn residue_mask(m: u32) -> u128 {
    let mut mask = 0u128;
    let mut i = 0;
    while i < m {
        mask |= 1 << ((i * i) % m);
        i += 1;
    }
    mask
}

const SQ64: u128 = residue_mask(64);
const SQ63: u128 = residue_mask(63);
const SQ65: u128 = residue_mask(65);

fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let u = n as u128;
    if SQ64 >> (u % 64) & 1 == 0 || SQ63 >> (u % 63) & 1 == 0 || SQ65 >> (u % 65) & 1 == 0 {
        return None;
    }
    let s = n.sqrt();
    (s * s == n).then_some(s)
}

fn is_primitive(x: &[i128]) -> bool {
    x.iter().fold(0i128, |g, &c| g.gcd(&c)) == 1
}

/// The box of free coordinates (all but `solve`) with the data the solved
/// coordinate depends on: `q(x) = a·s² + lin·s + rest` at `x_solve = s`.
struct FreeGrid {
    solve: usize,
    n: usize,
    coords: Vec<i128>,
    lin: Vec<i128>,
    rest: Vec<i128>,
}

impl FreeGrid {
    fn new(form: &IntForm, radii: &[i128], solve: usize) -> Self {
        let n = form.diag.len();
        let free: Vec<usize> = (0..n).filter(|&i| i != solve).collect();
        let mut grid = FreeGrid { solve, n, coords: Vec::new(), lin: Vec::new(), rest: Vec::new() };
        let mut x = vec![0i128; n];
        for &i in &free {
            x[i] = -radii[i];
        }
        loop {
            grid.lin.push(free.iter().map(|&j| form.cross[solve][j] * x[j]).sum());
            grid.rest.push(form.eval(&x));
            grid.coords.extend(free.iter().map(|&i| x[i]));
            // odometer over the free coordinates
            let mut k = 0;
            loop {
                if k == free.len() {
                    return grid;
                }
                let i = free[k];
                if x[i] < radii[i] {
                    x[i] += 1;
                    break;
                }
                x[i] = -radii[i];
                k += 1;
            }
        }
    }

    /// Points with `q(x) = m` and `|x_solve| ≤ solve_radius`.
    fn solve(&self, a: i128, m: i128, solve_radius: i128) -> Vec<Vec<i128>> {
        let k = self.n - 1;
        let mut out = Vec::new();
        for idx in 0..self.lin.len() {
            let (b, c) = (self.lin[idx], self.rest[idx] - m);
            let sols = if a == 0 && b == 0 {
                if c == 0 {
                    (-solve_radius..=solve_radius).collect()
                } else {
                    Vec::new()
                }
            } else {
                integer_roots(a, b, c)
            };
            for s in sols {
                if s.abs() <= solve_radius {
                    let free = &self.coords[idx * k..(idx + 1) * k];
                    let mut x = Vec::with_capacity(self.n + 1);
                    x.extend_from_slice(&free[..self.solve]);
                    x.push(s);
                    x.extend_from_slice(&free[self.solve..]);
                    out.push(x);
                }
            }
        }
        out
    }
}

/// All integral `(x, t)` with `|t| ≤ bound` on `q(x) = p(t)`. For definite
/// `q` each fibre is searched completely; otherwise `|x_i| ≤ bound`.
pub fn search_integral_points(
    q: &QuadraticForm,
    p: &RationalPoly,
    bound: u64,
    mode: SolubilityMode,
) -> Result<SearchReport> {
    if bound == 0 {
        return Err(Error::InvalidInput("search bound must be at least 1".into()));
    }
    let form = IntForm::new(q)?;
    let coeffs: Vec<i128> = p
        .integer_coeffs()
        .ok_or(Error::NonIntegral)?
        .iter()
        .map(|c| c.to_i128().filter(|v| v.abs() < VALUE_CEILING).ok_or_else(too_large))
        .collect::<Result<_>>()?;
    let n = q.n();
    let b = bound as i128;
    if b.checked_pow(2).is_none_or(|v| v > 1 << 40) {
        return Err(too_large());
    }
    let sign: i128 = if q.is_positive_definite() {
        1
    } else if q.is_negative_definite() {
        -1
    } else {
        0
    };
    let inv_diag = (sign != 0).then(|| inverse_gram_diagonal(q));
    let solve = (0..n).rev().find(|&i| form.diag[i] != 0).unwrap_or(n - 1);
    let a = form.diag[solve];
    let box_grid = inv_diag.is_none().then(|| FreeGrid::new(&form, &vec![b; n], solve));
    let per_t: Vec<Result<Vec<Vec<i128>>>> = (-b..=b)
        .into_par_iter()
        .map(|t| {
            let m = eval_poly(&coeffs, t).ok_or_else(too_large)?;
            let mut pts = match &inv_diag {
                Some(inv) => {
                    if m * sign < 0 {
                        return Ok(Vec::new());
                    }
                    let mr = Rational::from_integer(BigInt::from(m * sign));
                    let radii: Vec<i128> = inv
                        .iter()
                        .map(|g| {
                            let r2 = (&mr * g.abs()).floor().to_integer();
                            r2.sqrt().to_i128().unwrap_or(i128::MAX)
                        })
                        .collect();
                    if radii.iter().any(|&r| r > 1 << 24) {
                        return Err(too_large());
                    }
                    FreeGrid::new(&form, &radii, solve).solve(a, m, radii[solve])
                }
                None => box_grid.as_ref().expect("box grid").solve(a, m, b),
            };
            if mode == SolubilityMode::Primitive {
                pts.retain(|x| is_primitive(x));
            }
            for x in &mut pts {
                x.push(t);
            }
            Ok(pts)
        })
        .collect();
    let mut points = Vec::new();
    for r in per_t {
        points.extend(r?);
    }
    points.sort();
    points.dedup();
    let statement = statement(points.len(), bound, mode, sign != 0);
    Ok(SearchReport { bound, mode, points, fibre_exhaustive: sign != 0, statement })
}

/// Exact check of `q(x) = p(t)` for `point = (x_1, …, x_n, t)`.
pub fn verify_point(q: &QuadraticForm, p: &RationalPoly, point: &[BigInt]) -> bool {
    if point.len() != q.n() + 1 {
        return false;
    }
    let (x, t) = point.split_at(q.n());
    let t = Rational::from_integer(t[0].clone());
    q.eval_int(x) == p.eval(&t)
}

/// [`verify_point`] for machine-integer points.
pub fn verify_point_i128(q: &QuadraticForm, p: &RationalPoly, point: &[i128]) -> bool {
    let big: Vec<BigInt> = point.iter().map(|&c| BigInt::from(c)).collect();
    verify_point(q, p, &big)
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
        (parse_quadratic_form("1,-2,64").unwrap(), parse_poly("(2t^2+3)^2").unwrap())
    }

    #[test]
    fn second_example_has_a_non_primitive_point() {
        let (q, p) = ex2();
        let any = search_integral_points(&q, &p, 10, SolubilityMode::Any).unwrap();
        assert!(any.points.contains(&vec![3, 0, 0, 0]));
        assert!(any.points.iter().all(|x| verify_point_i128(&q, &p, x)));
        let prim = search_integral_points(&q, &p, 10, SolubilityMode::Primitive).unwrap();
        assert!(prim.is_empty());
    }

    #[test]
    fn first_example_is_empty_in_a_small_box() {
        let (q, p) = ex1();
        assert!(search_integral_points(&q, &p, 12, SolubilityMode::Any).unwrap().is_empty());
    }

    #[test]
    fn verify_point_examples() {
        let (q, p) = ex2();
        let pt = |v: &[i64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        assert!(verify_point(&q, &p, &pt(&[3, 0, 0, 0])));
        let (q1, p1) = ex1();
        assert!(!verify_point(&q1, &p1, &pt(&[0, 0, 0, 0])));
        let q3 = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        assert!(verify_point(&q3, &parse_poly("1").unwrap(), &pt(&[1, 0, 0, 0])));
    }

    #[test]
    fn definite_search_is_exhaustive_per_fibre() {
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        let rep = search_integral_points(&q, &parse_poly("3").unwrap(), 2, SolubilityMode::Any).unwrap();
        assert!(rep.fibre_exhaustive);
        // 8 sign patterns of (±1, ±1, ±1) for each of the 5 values of t
        assert_eq!(rep.points.len(), 40);
        let big = search_integral_points(&q, &parse_poly("t^2").unwrap(), 1, SolubilityMode::Any).unwrap();
        assert!(big.points.contains(&vec![0, 0, 1, 1]));
        assert!(big.points.contains(&vec![0, 0, 0, 0]));
    }

    #[test]
    fn hyperbolic_plane_without_diagonal() {
        let q = parse_quadratic_form("0,0;1").unwrap();
        let rep = search_integral_points(&q, &parse_poly("2*t").unwrap(), 3, SolubilityMode::Any).unwrap();
        assert!(rep.points.iter().all(|x| verify_point_i128(&q, &parse_poly("2*t").unwrap(), x)));
        assert!(rep.points.contains(&vec![1, 3, 3]));
        assert!(rep.points.contains(&vec![0, 2, 0]));
    }
}
