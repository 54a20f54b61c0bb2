//! Nondegenerate quadratic forms over Q and their local invariants.
//!
//! `q(v) = vᵀ G v`, so the off-diagonal Gram entry `G[i][j]` is half the
//! coefficient of `x_i x_j`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::integer::prime_divisors;
use crate::arith::{
    format_rational, hilbert_symbol, is_rational_square, is_square_local, BrInv, Place, Prime, Rational,
};
use crate::error::{Error, Result};
use crate::poly::parse_constant;

pub type Matrix = Vec<Vec<Rational>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    gram: Matrix,
    det: Rational,
    diag: Vec<Rational>,
    /// Columns of `basis` are the new variables: `basisᵀ · gram · basis = diag`.
    basis: Matrix,
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

fn transpose(m: &Matrix) -> Matrix {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect()
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Determinant by Gaussian elimination over Q.
pub fn determinant(m: &Matrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

/// Symmetric Gauss reduction: returns `(diag, B)` with `Bᵀ G B = diag(d)`.
fn diagonalize_gram(g: &Matrix) -> Result<(Vec<Rational>, Matrix)> {
    let n = g.len();
    let mut a = g.clone();
    let mut b = identity(n);
    // e_j ← e_j + f·e_i applied as a congruence
    let add_multiple = |a: &mut Matrix, b: &mut Matrix, j: usize, i: usize, f: &Rational| {
        for row in a.iter_mut() {
            let delta = f * &row[i];
            row[j] += delta;
        }
        for k in 0..n {
            let delta = f * &a[i][k];
            a[j][k] += delta;
        }
        for row in b.iter_mut() {
            let delta = f * &row[i];
            row[j] += delta;
        }
    };
    for i in 0..n {
        if a[i][i].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(i, j);
                for row in a.iter_mut() {
                    row.swap(i, j);
                }
                for row in b.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = (i + 1..n).find(|&j| !a[i][j].is_zero()) {
                add_multiple(&mut a, &mut b, i, j, &Rational::one());
            } else {
                return Err(Error::RankDeficient);
            }
        }
        let pivot = a[i][i].clone();
        for j in i + 1..n {
            if a[i][j].is_zero() {
                continue;
            }
            let f = -(&a[i][j] / &pivot);
            add_multiple(&mut a, &mut b, j, i, &f);
        }
    }
    let diag = (0..n).map(|i| a[i][i].clone()).collect();
    Ok((diag, b))
}

impl QuadraticForm {
    pub fn from_gram(gram: Matrix) -> Result<Self> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("Gram matrix must be square and non-empty".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidInput("Gram matrix must be symmetric".into()));
                }
            }
        }
        let det = determinant(&gram);
        if det.is_zero() {
            return Err(Error::RankDeficient);
        }
        let (diag, basis) = diagonalize_gram(&gram)?;
        let form = QuadraticForm { gram, det, diag, basis };
        debug_assert!(form.verify_diagonalization());
        Ok(form)
    }

    pub fn diagonal(entries: &[Rational]) -> Result<Self> {
        let n = entries.len();
        let mut g = vec![vec![Rational::zero(); n]; n];
        for (i, a) in entries.iter().enumerate() {
            g[i][i] = a.clone();
        }
        QuadraticForm::from_gram(g)
    }

    pub fn diagonal_ints(entries: &[i64]) -> Result<Self> {
        let v: Vec<Rational> = entries.iter().map(|&a| Rational::from_integer(a.into())).collect();
        QuadraticForm::diagonal(&v)
    }

    pub fn n(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn det(&self) -> &Rational {
        &self.det
    }

    pub fn diag(&self) -> &[Rational] {
        &self.diag
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Exact congruence check `Bᵀ G B = diag`.
    pub fn verify_diagonalization(&self) -> bool {
        let m = matmul(&matmul(&transpose(&self.basis), &self.gram), &self.basis);
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| if i == j { m[i][j] == self.diag[i] } else { m[i][j].is_zero() }))
    }

    pub fn bilinear(&self, u: &[Rational], v: &[Rational]) -> Rational {
        let n = self.n();
        let mut acc = Rational::zero();
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                acc += &u[i] * &self.gram[i][j] * &v[j];
            }
        }
        acc
    }

    pub fn eval(&self, v: &[Rational]) -> Rational {
        self.bilinear(v, v)
    }

    pub fn eval_int(&self, v: &[BigInt]) -> Rational {
        let r: Vec<Rational> = v.iter().cloned().map(Rational::from_integer).collect();
        self.eval(&r)
    }

    /// Whether `q` takes integer values on integer vectors.
    pub fn is_integral(&self) -> bool {
        let two = Rational::from_integer(2.into());
        let n = self.n();
        (0..n).all(|i| {
            (0..n).all(|j| {
                if i == j {
                    self.gram[i][i].is_integer()
                } else {
                    (&self.gram[i][j] * &two).is_integer()
                }
            })
        })
    }

    /// Integer coefficients of `q`: diagonal `a_ii` and cross `2 a_ij`.
    pub fn integer_coefficients(&self) -> Option<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
        if !self.is_integral() {
            return None;
        }
        let n = self.n();
        let two = Rational::from_integer(2.into());
        let diag = (0..n).map(|i| self.gram[i][i].to_integer()).collect();
        let cross = (0..n)
            .map(|i| (0..n).map(|j| (&self.gram[i][j] * &two).to_integer()).collect())
            .collect();
        Some((diag, cross))
    }

    pub fn scaled(&self, s: &Rational) -> Result<QuadraticForm> {
        QuadraticForm::from_gram(self.gram.iter().map(|r| r.iter().map(|c| c * s).collect()).collect())
    }

    /// `Uᵀ G U` for an invertible change of variables `U`.
    pub fn transformed(&self, u: &Matrix) -> Result<QuadraticForm> {
        QuadraticForm::from_gram(matmul(&matmul(&transpose(u), &self.gram), u))
    }

    pub fn orthogonal_sum(&self, other: &QuadraticForm) -> Result<QuadraticForm> {
        let (n, m) = (self.n(), other.n());
        let mut g = vec![vec![Rational::zero(); n + m]; n + m];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = self.gram[i][j].clone();
            }
        }
        for i in 0..m {
            for j in 0..m {
                g[n + i][n + j] = other.gram[i][j].clone();
            }
        }
        QuadraticForm::from_gram(g)
    }

    /// `q ⊥ ⟨a⟩`.
    pub fn with_extra(&self, a: &Rational) -> Result<QuadraticForm> {
        self.orthogonal_sum(&QuadraticForm::diagonal(std::slice::from_ref(a))?)
    }

    /// Numbers of positive and negative diagonal entries.
    pub fn signature(&self) -> (usize, usize) {
        let pos = self.diag.iter().filter(|a| a.is_positive()).count();
        (pos, self.n() - pos)
    }

    pub fn is_definite(&self) -> bool {
        let (pos, neg) = self.signature();
        pos == 0 || neg == 0
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature().1 == 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.signature().0 == 0
    }

    /// `∑_{i<j} (a_i, a_j)_v` over the diagonal entries.
    pub fn hasse_invariant(&self, v: &Place) -> BrInv {
        let mut acc = BrInv::Zero;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                acc += hilbert_symbol(&self.diag[i], &self.diag[j], v).expect("non-zero diagonal");
            }
        }
        acc
    }

    pub fn is_isotropic_local(&self, v: &Place) -> bool {
        let n = self.n();
        if v.is_real() {
            return !self.is_definite();
        }
        let neg_one = -Rational::one();
        match n {
            1 => false,
            2 => is_square_local(&(-(&self.diag[0] * &self.diag[1])), v).expect("non-zero"),
            3 => {
                let target = hilbert_symbol(&neg_one, &(-self.det.clone()), v).expect("non-zero");
                self.hasse_invariant(v) == target
            }
            4 => {
                let det_square = is_square_local(&self.det, v).expect("non-zero");
                let exceptional = hilbert_symbol(&neg_one, &neg_one, v).expect("non-zero");
                !(det_square && self.hasse_invariant(v) != exceptional)
            }
            _ => true,
        }
    }

    /// Finite primes where the diagonal form can fail to be unimodular.
    pub fn relevant_primes(&self) -> Vec<Prime> {
        let mut ps: Vec<BigInt> = vec![BigInt::from(2)];
        for a in self.diag.iter().chain(std::iter::once(&self.det)) {
            ps.extend(prime_divisors(a.numer()));
            ps.extend(prime_divisors(a.denom()));
        }
        for row in &self.gram {
            for a in row {
                if !a.is_zero() {
                    ps.extend(prime_divisors(a.numer()));
                    ps.extend(prime_divisors(a.denom()));
                }
            }
        }
        ps.sort();
        ps.dedup();
        ps.into_iter().map(|p| Prime::new(p).expect("prime divisor")).collect()
    }

    /// Hasse–Minkowski: finitely many local tests decide global isotropy.
    pub fn is_isotropic_global(&self) -> bool {
        match self.n() {
            1 => false,
            2 => is_rational_square(&(-(&self.diag[0] * &self.diag[1]))),
            _ => {
                self.is_isotropic_local(&Place::Real)
                    && self
                        .relevant_primes()
                        .into_iter()
                        .all(|p| self.is_isotropic_local(&Place::Finite(p)))
            }
        }
    }

    /// Whether `q(x) = a` is solvable over `Q_v`.
    pub fn represents_over_completion(&self, a: &Rational, v: &Place) -> Result<bool> {
        if a.is_zero() {
            return Err(Error::ZeroInput("representation test"));
        }
        Ok(self.with_extra(&(-a.clone()))?.is_isotropic_local(v))
    }

    /// Canonical text: diagonal list when the Gram matrix is diagonal,
    /// otherwise diagonal then cross entries.
    pub fn to_input_string(&self) -> String {
        let n = self.n();
        let diag: Vec<String> = (0..n).map(|i| format_rational(&self.gram[i][i])).collect();
        let cross: Vec<&Rational> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| &self.gram[i][j]).collect();
        if cross.iter().all(|c| c.is_zero()) {
            diag.join(",")
        } else {
            let c: Vec<String> = cross.into_iter().map(format_rational).collect();
            format!("{};{}", diag.join(","), c.join(","))
        }
    }
}

impl Serialize for QuadraticForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let g: Vec<Vec<String>> = self.gram.iter().map(|r| r.iter().map(format_rational).collect()).collect();
        g.serialize(s)
    }
}

/// Parses `"a,b,c"` (diagonal), `"a,b,c;d,e,f"` (diagonal plus Gram
/// entries `G[0][1], G[0][2], G[1][2]`, i.e. cross terms `2d·xy`, `2e·xz`,
/// `2f·yz`), or a full matrix `"[[a,b],[b,c]]"`.
pub fn parse_quadratic_form(s: &str) -> Result<QuadraticForm> {
    let s = s.trim();
    let entries = |part: &str| -> Result<Vec<Rational>> {
        part.split(',').map(|x| parse_constant(x.trim())).collect()
    };
    if s.starts_with('[') {
        let inner = s
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse("unbalanced brackets in matrix".into()))?;
        let mut rows = Vec::new();
        for row in inner.split(']') {
            let row = row.trim().trim_start_matches(',').trim();
            if row.is_empty() {
                continue;
            }
            let row = row
                .strip_prefix('[')
                .ok_or_else(|| Error::Parse(format!("malformed matrix row {row:?}")))?;
            rows.push(entries(row)?);
        }
        return QuadraticForm::from_gram(rows);
    }
    let (diag_part, cross_part) = match s.split_once(';') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let diag = entries(diag_part)?;
    let n = diag.len();
    let mut g = vec![vec![Rational::zero(); n]; n];
    for (i, a) in diag.into_iter().enumerate() {
        g[i][i] = a;
    }
    if let Some(cp) = cross_part {
        let cross = entries(cp)?;
        let expected = n * (n - 1) / 2;
        if cross.len() != expected {
            return Err(Error::Parse(format!(
                "expected {expected} cross entries after ';' for a form in {n} variables, got {}",
                cross.len()
            )));
        }
        let mut it = cross.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let c = it.next().unwrap();
                g[i][j] = c.clone();
                g[j][i] = c;
            }
        }
    }
    QuadraticForm::from_gram(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::SquareClass;

    fn first_form() -> QuadraticForm {
        parse_quadratic_form("-9,7,2;1,0,0").unwrap()
    }

    #[test]
    fn diagonalize_examples() {
        let q = QuadraticForm::diagonal_ints(&[1, -2, 64]).unwrap();
        assert_eq!(q.diag(), &[rat(1), rat(-2), rat(64)]);
        assert_eq!(q.basis(), &identity(3));

        let q = first_form();
        assert_eq!(q.det(), &rat(-128));
        let prod: Rational = q.diag().iter().product();
        assert_eq!(SquareClass::new(prod).unwrap(), SquareClass::new(rat(-2)).unwrap());
        assert!(q.verify_diagonalization());

        // xy: zero diagonal forces the x → x + y substitution
        let h = parse_quadratic_form("0,0;1/2").unwrap();
        let prod: Rational = h.diag().iter().product();
        assert_eq!(SquareClass::new(prod).unwrap(), SquareClass::new(rat(-1)).unwrap());
        assert!(h.verify_diagonalization());
    }

    #[test]
    fn degenerate_rejected() {
        assert_eq!(QuadraticForm::diagonal_ints(&[1, 0, 1]).unwrap_err(), Error::RankDeficient);
        assert_eq!(parse_quadratic_form("1,1;1").unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn hasse_examples() {
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        assert_eq!(q.hasse_invariant(&Place::prime(3)), BrInv::Zero);
        let q = QuadraticForm::diagonal_ints(&[-1, -1]).unwrap();
        assert_eq!(q.hasse_invariant(&Place::Real), BrInv::Half);
        let q = QuadraticForm::diagonal_ints(&[1, -2, 64]).unwrap();
        assert_eq!(q.hasse_invariant(&Place::prime(2)), BrInv::Zero);
    }

    #[test]
    fn isotropy_examples() {
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        assert!(!q.is_isotropic_local(&Place::Real));
        assert!(first_form().is_isotropic_local(&Place::Real));
        let q4 = QuadraticForm::diagonal_ints(&[1, 1, 1, 1]).unwrap();
        assert!(!q4.is_isotropic_local(&Place::prime(2)));
        assert!(q4.is_isotropic_local(&Place::prime(3)));
    }

    #[test]
    fn sum_of_four_squares_mod_16_oracle() {
        // a primitive zero over Z_2 would reduce to a primitive zero mod 16
        let found = (0..16u32).any(|a| {
            (0..16u32).any(|b| {
                (0..16u32).any(|c| {
                    (0..16u32).any(|d| {
                        (a | b | c | d) & 1 == 1 && (a * a + b * b + c * c + d * d) % 16 == 0
                    })
                })
            })
        });
        assert!(!found);
    }

    #[test]
    fn global_isotropy() {
        assert!(QuadraticForm::diagonal_ints(&[1, 1, -1]).unwrap().is_isotropic_global());
        assert!(!QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap().is_isotropic_global());
        let q = QuadraticForm::diagonal_ints(&[1, 1, -7]).unwrap();
        assert!(!q.is_isotropic_global());
        assert!(!q.is_isotropic_local(&Place::prime(7)));
    }

    #[test]
    fn representation() {
        let q = QuadraticForm::diagonal_ints(&[1, 1, 1]).unwrap();
        assert!(q.represents_over_completion(&rat(3), &Place::Real).unwrap());
        assert!(!q.represents_over_completion(&rat(-1), &Place::Real).unwrap());
        let q = QuadraticForm::diagonal_ints(&[1, -2, 64]).unwrap();
        assert!(q.represents_over_completion(&rat(9), &Place::prime(2)).unwrap());
    }

    #[test]
    fn input_grammar() {
        let q = first_form();
        assert_eq!(q.eval_int(&[1.into(), 1.into(), 0.into()]), rat(-9 + 2 + 7));
        assert_eq!(q.to_input_string(), "-9,7,2;1,0,0");
        assert_eq!(parse_quadratic_form("[[-9,1,0],[1,7,0],[0,0,2]]").unwrap(), q);
        assert!(parse_quadratic_form("-9,2,7;2").is_err());
        assert!(parse_quadratic_form("1,a,2").is_err());
    }
}
