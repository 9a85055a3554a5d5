use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{null_space, primitive_integer_direction, q_to_point, qvec, solve, IntPoint, Rational};
use crate::error::{Error, Result};

/// Determinant of a square integer matrix (fraction-free Bareiss elimination).
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Returns the nonzero rows: pivots positive and strictly to the right
/// going down, entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(rows: &[IntPoint]) -> Vec<IntPoint> {
    let mut m: Vec<IntPoint> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        while let Some(p) = (r..m.len())
            .filter(|&i| !m[i][c].is_zero())
            .min_by(|&i, &j| m[i][c].abs().cmp(&m[j][c].abs()))
        {
            m.swap(r, p);
            let mut cleared = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !m[i][c].is_zero() {
                    cleared = false;
                }
            }
            if cleared {
                break;
            }
        }
        if m[r][c].is_zero() {
            continue;
        }
        if m[r][c].is_negative() {
            for x in m[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pivot_row = m[r].clone();
        for row in m.iter_mut().take(r) {
            let q = row[c].div_floor(&pivot_row[c]);
            if q.is_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &q * y;
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

fn check_primitive(v: &[i64]) -> Result<()> {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g != 1 {
        return Err(Error::NotPrimitive(v.to_vec()));
    }
    Ok(())
}

/// A basis of the lattice `{m in Z^d : <m, v> = 0}` for primitive `v`, in
/// Hermite normal form.
pub fn orthogonal_lattice_basis(v: &[i64]) -> Result<Vec<IntPoint>> {
    check_primitive(v)?;
    let d = v.len();
    let mut w: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
    // Columns of `u` track the unimodular column operations applied to `w`.
    let mut u: Vec<Vec<BigInt>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    loop {
        let nonzero: Vec<usize> = (0..d).filter(|&i| !w[i].is_zero()).collect();
        if nonzero.len() <= 1 {
            break;
        }
        let k = *nonzero
            .iter()
            .min_by(|&&i, &&j| w[i].abs().cmp(&w[j].abs()))
            .unwrap();
        for &j in nonzero.iter().filter(|&&j| j != k) {
            let q = w[j].div_floor(&w[k]);
            w[j] = &w[j] - &q * &w[k];
            for row in u.iter_mut() {
                let t = &q * &row[k];
                row[j] -= t;
            }
        }
    }
    let pivot = (0..d).find(|&i| !w[i].is_zero()).unwrap();
    let kernel: Vec<IntPoint> = (0..d)
        .filter(|&j| j != pivot)
        .map(|j| u.iter().map(|row| row[j].clone()).collect())
        .collect();
    Ok(hermite_normal_form(&kernel))
}

/// Primitive generator of the rank-one lattice `{m : <m, v> = 0 for v in rows}`.
pub fn primitive_kernel_generator(rows: &[Vec<i64>], d: usize) -> Result<IntPoint> {
    let qrows: Vec<_> = rows.iter().map(|r| qvec(r)).collect();
    let ns = null_space(&qrows, d);
    if ns.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: ns.len(),
        });
    }
    primitive_integer_direction(&ns[0])
}

/// The integer solution of `a u = b` for a unimodular `a`.
pub fn solve_integer_system(a: &[Vec<i64>], b: &[BigInt]) -> Result<IntPoint> {
    if a.len() != b.len() || a.iter().any(|r| r.len() != a.len()) {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let det = determinant(a);
    if det.abs() != BigInt::one() {
        return Err(Error::NotUnimodular(det));
    }
    let qa: Vec<_> = a.iter().map(|r| qvec(r)).collect();
    let qb: Vec<Rational> = b.iter().cloned().map(Rational::from_integer).collect();
    let x = solve(&qa, &qb).ok_or_else(|| Error::NotUnimodular(BigInt::zero()))?;
    Ok(q_to_point(&x).expect("unimodular systems have integer solutions"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::ipoint;

    fn dot_i(a: &[BigInt], b: &[i64]) -> BigInt {
        a.iter().zip(b).map(|(x, &y)| x * y).sum()
    }

    #[test]
    fn orthogonal_basis_examples() {
        assert_eq!(
            orthogonal_lattice_basis(&[1, 0]).unwrap(),
            vec![ipoint(&[0, 1])]
        );
        let b = orthogonal_lattice_basis(&[-1, -1]).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0] == ipoint(&[1, -1]) || b[0] == ipoint(&[-1, 1]));
        assert_eq!(
            orthogonal_lattice_basis(&[1, 1, 1]).unwrap(),
            vec![ipoint(&[1, 0, -1]), ipoint(&[0, 1, -1])]
        );
        assert!(orthogonal_lattice_basis(&[2, 4]).is_err());
        assert!(orthogonal_lattice_basis(&[0, 0]).is_err());
    }

    #[test]
    fn orthogonal_basis_extends_to_unimodular() {
        for v in [[3i64, 5, 7], [1, -2, 0], [6, 10, 15], [0, 0, 1]] {
            let basis = orthogonal_lattice_basis(&v).unwrap();
            assert_eq!(basis.len(), 2);
            for b in &basis {
                assert!(dot_i(b, &v).is_zero());
            }
            // The kernel plus any w with <w, v> = 1 is a lattice basis iff the
            // Gram-free determinant of [b1; b2; v] is +-1 (v primitive).
            let mut m: Vec<Vec<i64>> = basis
                .iter()
                .map(|b| b.iter().map(|x| i64::try_from(x).unwrap()).collect())
                .collect();
            m.push(v.to_vec());
            let det = determinant(&m);
            let norm: i64 = v.iter().map(|x| x * x).sum();
            assert_eq!(det.abs(), BigInt::from(norm));
        }
    }

    #[test]
    fn integer_systems() {
        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(
            solve_integer_system(&id, &ipoint(&[1, 0])).unwrap(),
            ipoint(&[1, 0])
        );
        let a = vec![vec![1, 0], vec![-1, -1]];
        assert_eq!(
            solve_integer_system(&a, &ipoint(&[1, 0])).unwrap(),
            ipoint(&[1, -1])
        );
        let a = vec![vec![-1, -1], vec![-1, 0]];
        assert_eq!(
            solve_integer_system(&a, &ipoint(&[4, 1])).unwrap(),
            ipoint(&[-1, -3])
        );
        let bad = vec![vec![1, 1], vec![1, -1]];
        assert!(matches!(
            solve_integer_system(&bad, &ipoint(&[0, 0])),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn determinants() {
        assert_eq!(determinant(&[vec![2, 1], vec![1, 1]]), BigInt::from(1));
        assert_eq!(
            determinant(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]),
            BigInt::from(-1)
        );
        assert_eq!(determinant(&[vec![1, 2], vec![2, 4]]), BigInt::zero());
    }

    #[test]
    fn hnf_is_canonical() {
        let a = hermite_normal_form(&[ipoint(&[2, 1, -3]), ipoint(&[1, 0, -1])]);
        let b = hermite_normal_form(&[ipoint(&[3, 1, -4]), ipoint(&[1, 0, -1])]);
        assert_eq!(a, b);
    }
}
