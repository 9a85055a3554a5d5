//! Exact rational linear algebra and integer-lattice utilities.
//!
//! Everything here works over `BigRational` / `BigInt`; there is no floating
//! point anywhere in the crate's computational path.

mod lattice;
mod subspace;

pub use lattice::{
    determinant, hermite_normal_form, orthogonal_lattice_basis, primitive_kernel_generator,
    solve_integer_system,
};
pub use subspace::{sum_contains, Subspace};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type QVector = Vec<Rational>;
pub type IntPoint = Vec<BigInt>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qvec(xs: &[i64]) -> QVector {
    xs.iter().map(|&x| rat(x)).collect()
}

pub fn ipoint(xs: &[i64]) -> IntPoint {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn point_to_q(p: &[BigInt]) -> QVector {
    p.iter().cloned().map(Rational::from_integer).collect()
}

/// Converts an integer-valued rational vector to lattice coordinates.
pub fn q_to_point(v: &[Rational]) -> Option<IntPoint> {
    v.iter()
        .map(|x| x.is_integer().then(|| x.to_integer()))
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Pairing of a rational point with an integer (ray) vector.
pub fn pair(m: &[Rational], v: &[i64]) -> Rational {
    m.iter()
        .zip(v)
        .fold(Rational::zero(), |acc, (x, &y)| acc + x * BigInt::from(y))
}

pub fn pair_int(u: &[BigInt], v: &[i64]) -> BigInt {
    u.iter()
        .zip(v)
        .fold(BigInt::zero(), |acc, (x, &y)| acc + x * BigInt::from(y))
}

/// Parses `"p"`, `"-p"` or `"p/q"`; rejects a zero denominator.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational literal {s:?}"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("invalid rational literal {s:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"` in lowest terms, `"p"` for integers.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

pub fn format_qvector(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

pub fn format_point(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Reduced row-echelon form with zero rows dropped.
pub fn rref(rows: &[QVector], ncols: usize) -> Vec<QVector> {
    let mut m: Vec<QVector> = rows.to_vec();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row == m.len() {
            break;
        }
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for x in m[pivot_row].iter_mut() {
            *x *= &inv;
        }
        let pivot = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == pivot_row || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot) {
                *x -= &factor * p;
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m
}

pub fn rank(rows: &[QVector], ncols: usize) -> usize {
    rref(rows, ncols).len()
}

/// Basis of `{x : row . x = 0 for every row}`.
pub fn null_space(rows: &[QVector], ncols: usize) -> Vec<QVector> {
    let r = rref(rows, ncols);
    let pivots: Vec<usize> = r
        .iter()
        .map(|row| row.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[free] = Rational::one();
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        out.push(v);
    }
    out
}

/// Solves the square system `a x = b`; `None` if `a` is singular.
pub fn solve(a: &[QVector], b: &[Rational]) -> Option<QVector> {
    let n = a.len();
    let augmented: Vec<QVector> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let r = rref(&augmented, n + 1);
    if r.len() != n || (0..n).any(|i| !r[i][i].is_one()) {
        return None;
    }
    Some(r.into_iter().map(|row| row[n].clone()).collect())
}

/// Scales a nonzero rational vector to a primitive integer vector with the same direction.
pub fn primitive_integer_direction(v: &[Rational]) -> Result<IntPoint> {
    if v.iter().all(|x| x.is_zero()) {
        return Err(Error::ZeroVector);
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Ok(ints.into_iter().map(|x| x / &g).collect())
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}
