use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};

use super::{null_space, rref, QVector, Rational};
use crate::error::{Error, Result};

/// A linear subspace of `Q^r`, stored by its reduced row-echelon basis.
///
/// The echelon basis is canonical, so structural equality is subspace
/// equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<QVector>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                let mut v = vec![Rational::zero(); ambient];
                v[i] = Rational::one();
                v
            })
            .collect();
        Subspace { ambient, basis }
    }

    pub fn span(vectors: &[QVector], ambient: usize) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != ambient) {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                found: bad.len(),
            });
        }
        Ok(Subspace {
            ambient,
            basis: rref(vectors, ambient),
        })
    }

    pub fn line(v: &[Rational]) -> Self {
        Subspace {
            ambient: v.len(),
            basis: rref(&[v.to_vec()], v.len()),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient
    }

    pub fn basis(&self) -> &[QVector] {
        &self.basis
    }

    fn check_same(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: other.ambient,
            });
        }
        Ok(())
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        // Reduce v against the echelon basis; pivots are leading ones.
        let mut w = v.to_vec();
        for row in &self.basis {
            let pc = row.iter().position(|x| !x.is_zero()).unwrap();
            if w[pc].is_zero() {
                continue;
            }
            let f = w[pc].clone();
            for (x, r) in w.iter_mut().zip(row) {
                *x -= &f * r;
            }
        }
        w.iter().all(Zero::is_zero)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same(other)?;
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(&rows, self.ambient)
    }

    /// Adds one vector to the span.
    pub fn extended(&self, v: &[Rational]) -> Subspace {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        Subspace {
            ambient: self.ambient,
            basis: rref(&rows, self.ambient),
        }
    }

    /// The annihilator `{x : <x, w> = 0 for all w in self}`.
    pub fn annihilator(&self) -> Subspace {
        Subspace {
            ambient: self.ambient,
            basis: rref(&null_space(&self.basis, self.ambient), self.ambient),
        }
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same(other)?;
        if self.is_full() {
            return Ok(other.clone());
        }
        if other.is_full() {
            return Ok(self.clone());
        }
        let ann = self.annihilator().sum(&other.annihilator())?;
        Ok(ann.annihilator())
    }
}

/// Membership of `w` in `u + v`.
pub fn sum_contains(u: &Subspace, v: &Subspace, w: &[Rational]) -> Result<bool> {
    Ok(u.sum(v)?.contains(w))
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by ambient dimension, then dimension, then the echelon basis.
impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient
            .cmp(&other.ambient)
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| self.basis.cmp(&other.basis))
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.is_full() {
            return write!(f, "Q^{}", self.ambient);
        }
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| super::format_qvector(r))
            .collect();
        write!(f, "<{}>", rows.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::qvec;

    fn sp(rows: &[&[i64]], r: usize) -> Subspace {
        Subspace::span(&rows.iter().map(|x| qvec(x)).collect::<Vec<_>>(), r).unwrap()
    }

    #[test]
    fn span_examples() {
        assert_eq!(sp(&[&[1, 0], &[0, 1]], 2), Subspace::full(2));
        assert_eq!(sp(&[], 3).dim(), 0);
        let s = sp(&[&[1, 0, 0], &[1, 1, 0], &[0, 1, 0]], 3);
        assert_eq!(s.basis(), &[qvec(&[1, 0, 0]), qvec(&[0, 1, 0])]);
        assert!(Subspace::span(&[qvec(&[1, 0]), qvec(&[1])], 2).is_err());
    }

    #[test]
    fn intersect_examples() {
        assert!(sp(&[&[1, 0]], 2)
            .intersect(&sp(&[&[0, 1]], 2))
            .unwrap()
            .is_zero());
        let w = sp(&[&[1, 2, 3], &[0, 1, 1]], 3);
        assert_eq!(w.intersect(&w).unwrap(), w);
        let a = sp(&[&[1, 0, 0], &[0, 1, 0]], 3);
        let b = sp(&[&[0, 1, 0], &[0, 0, 1]], 3);
        assert_eq!(a.intersect(&b).unwrap(), sp(&[&[0, 1, 0]], 3));
        assert!(a.intersect(&Subspace::zero(2)).is_err());
    }

    #[test]
    fn sum_examples() {
        assert_eq!(
            sp(&[&[1, 0]], 2).sum(&sp(&[&[0, 1]], 2)).unwrap(),
            Subspace::full(2)
        );
        assert!(!sum_contains(&sp(&[&[1, 0]], 2), &Subspace::zero(2), &qvec(&[0, 1])).unwrap());
        assert_eq!(
            sp(&[&[1, 1]], 2).sum(&sp(&[&[1, -1]], 2)).unwrap(),
            Subspace::full(2)
        );
    }

    #[test]
    fn canonical_line() {
        assert_eq!(Subspace::line(&qvec(&[-2, 4])), sp(&[&[1, -2]], 2));
        assert!(Subspace::line(&qvec(&[-2, 4])).contains(&qvec(&[3, -6])));
    }
}
