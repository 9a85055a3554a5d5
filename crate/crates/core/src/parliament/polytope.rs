use std::collections::BTreeSet;
use std::sync::OnceLock;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactla::{pair, qvec, solve, IntPoint, QVector, Rational};

/// Lattice-point enumeration refuses bounding boxes larger than this.
pub const MAX_BOX_POINTS: u64 = 1 << 20;

/// `{ m : <m, v_i> <= c_i }` for integer normals `v_i` and rational bounds `c_i`.
#[derive(Clone, Debug)]
pub struct HPolytope {
    normals: Vec<Vec<i64>>,
    bounds: Vec<Rational>,
    vertices: OnceLock<Vec<QVector>>,
}

impl PartialEq for HPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.normals == other.normals && self.bounds == other.bounds
    }
}

impl Eq for HPolytope {}

impl HPolytope {
    pub fn new(normals: Vec<Vec<i64>>, bounds: Vec<Rational>) -> Result<Self> {
        if normals.len() != bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: normals.len(),
                found: bounds.len(),
            });
        }
        let d = normals.first().map_or(0, |v| v.len());
        if d == 0 {
            return Err(Error::Unsupported(
                "polytope needs at least one normal".into(),
            ));
        }
        if let Some(v) = normals.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        Ok(HPolytope {
            normals,
            bounds,
            vertices: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    pub fn normals(&self) -> &[Vec<i64>] {
        &self.normals
    }

    pub fn bounds(&self) -> &[Rational] {
        &self.bounds
    }

    pub fn contains(&self, m: &[Rational]) -> bool {
        self.normals
            .iter()
            .zip(&self.bounds)
            .all(|(v, c)| &pair(m, v) <= c)
    }

    pub fn contains_point(&self, u: &[BigInt]) -> bool {
        let q: QVector = u.iter().cloned().map(Rational::from_integer).collect();
        self.contains(&q)
    }

    /// Basic feasible solutions, deduplicated and sorted.
    pub fn vertices(&self) -> &[QVector] {
        self.vertices.get_or_init(|| {
            let d = self.dim();
            let mut out = BTreeSet::new();
            for rows in (0..self.normals.len()).combinations(d) {
                let a: Vec<QVector> = rows.iter().map(|&i| qvec(&self.normals[i])).collect();
                let b: Vec<Rational> = rows.iter().map(|&i| self.bounds[i].clone()).collect();
                if let Some(x) = solve(&a, &b) {
                    if self.contains(&x) {
                        out.insert(x);
                    }
                }
            }
            out.into_iter().collect()
        })
    }

    /// Empty iff there is no vertex (sound for bounded polyhedra).
    pub fn is_empty(&self) -> bool {
        self.vertices().is_empty()
    }

    fn box_range(&self, k: usize) -> (BigInt, BigInt) {
        let verts = self.vertices();
        let lo = verts
            .iter()
            .map(|v| v[k].ceil().to_integer())
            .min()
            .unwrap();
        let hi = verts
            .iter()
            .map(|v| v[k].floor().to_integer())
            .max()
            .unwrap();
        (lo, hi)
    }

    /// Number of integer points in the bounding box of the vertices.
    pub fn box_points(&self) -> BigInt {
        if self.is_empty() {
            return BigInt::zero();
        }
        (0..self.dim())
            .map(|k| {
                let (lo, hi) = self.box_range(k);
                (hi - lo + BigInt::one()).max(BigInt::zero())
            })
            .product()
    }

    /// Like [`HPolytope::lattice_points`], but refuses boxes above [`MAX_BOX_POINTS`].
    pub fn bounded_lattice_points(&self) -> Result<Vec<IntPoint>> {
        if self.box_points() > BigInt::from(MAX_BOX_POINTS) {
            return Err(Error::Unsupported(format!(
                "polytope bounding box holds more than {MAX_BOX_POINTS} lattice points"
            )));
        }
        Ok(self.lattice_points())
    }

    /// Integer points of the vertex bounding box that satisfy every inequality.
    /// The cost is the size of the box; see [`HPolytope::bounded_lattice_points`].
    pub fn lattice_points(&self) -> Vec<IntPoint> {
        if self.is_empty() {
            return Vec::new();
        }
        let d = self.dim();
        let ranges: Vec<Vec<BigInt>> = (0..d)
            .map(|k| {
                let (lo, hi) = self.box_range(k);
                let mut xs = Vec::new();
                let mut x = lo;
                while x <= hi {
                    xs.push(x.clone());
                    x += 1;
                }
                xs
            })
            .collect();
        if ranges.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        ranges
            .into_iter()
            .multi_cartesian_product()
            .filter(|p| self.contains_point(p))
            .collect()
    }

    /// `P + u`.
    pub fn translated(&self, u: &[Rational]) -> HPolytope {
        let bounds = self
            .normals
            .iter()
            .zip(&self.bounds)
            .map(|(v, c)| c + pair(u, v))
            .collect();
        HPolytope::new(self.normals.clone(), bounds).expect("same shape")
    }

    /// Least common multiple of all vertex denominators.
    pub fn denominator(&self) -> BigInt {
        self.vertices()
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// Largest value of `<u, v>` over the lattice points, if any.
    pub fn max_lattice_pairing(&self, v: &[i64]) -> Result<Option<BigInt>> {
        Ok(self
            .bounded_lattice_points()?
            .iter()
            .map(|u| u.iter().zip(v).map(|(a, &b)| a * b).sum::<BigInt>())
            .max())
    }
}

/// `(ray index, bound)` pairs for serialization.
pub fn bound_pairs(p: &HPolytope) -> Vec<(usize, Rational)> {
    p.bounds().iter().cloned().enumerate().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{ipoint, rat, ratio};

    #[test]
    fn bounded_enumeration() {
        let square = HPolytope::new(
            vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]],
            vec![rat(2); 4],
        )
        .unwrap();
        assert_eq!(square.box_points(), BigInt::from(25));
        assert_eq!(square.bounded_lattice_points().unwrap().len(), 25);
        assert_eq!(
            square.max_lattice_pairing(&[1, 1]).unwrap(),
            Some(BigInt::from(4))
        );
        let huge = HPolytope::new(square.normals().to_vec(), vec![rat(1 << 20); 4]).unwrap();
        assert!(huge.bounded_lattice_points().is_err());
        assert!(huge.max_lattice_pairing(&[1, 0]).is_err());
    }

    fn p2_normals() -> Vec<Vec<i64>> {
        vec![vec![-1, -1], vec![1, 0], vec![0, 1]]
    }

    #[test]
    fn triangle() {
        let p = HPolytope::new(p2_normals(), vec![rat(1), rat(0), rat(0)]).unwrap();
        assert_eq!(
            p.vertices(),
            &[qvec(&[-1, 0]), qvec(&[0, -1]), qvec(&[0, 0])]
        );
        assert_eq!(p.lattice_points().len(), 3);
        assert!(!p.is_empty());
    }

    #[test]
    fn empty_and_latticeless() {
        let p = HPolytope::new(p2_normals(), vec![rat(-1), rat(-1), rat(-1)]).unwrap();
        assert!(p.is_empty());
        assert!(p.lattice_points().is_empty());
        let q =
            HPolytope::new(p2_normals(), vec![ratio(2, 3), ratio(-1, 3), ratio(-1, 3)]).unwrap();
        assert!(!q.is_empty());
        assert_eq!(q.vertices(), &[vec![ratio(-1, 3), ratio(-1, 3)]]);
        let r =
            HPolytope::new(p2_normals(), vec![ratio(1, 2), ratio(-1, 3), ratio(-1, 3)]).unwrap();
        assert!(r.is_empty());
        let s = HPolytope::new(p2_normals(), vec![rat(1), ratio(-1, 3), ratio(-1, 3)]).unwrap();
        assert!(!s.is_empty());
        assert!(s.lattice_points().is_empty());
    }

    #[test]
    fn translation() {
        let p = HPolytope::new(p2_normals(), vec![rat(1), rat(0), rat(0)]).unwrap();
        let q = p.translated(&qvec(&[2, -1]));
        let moved: Vec<QVector> = p
            .vertices()
            .iter()
            .map(|v| vec![&v[0] + rat(2), &v[1] - rat(1)])
            .collect();
        assert_eq!(q.vertices(), moved.as_slice());
        assert_eq!(
            q.max_lattice_pairing(&[1, 0]).unwrap(),
            Some(BigInt::from(2))
        );
        assert!(q.contains_point(&ipoint(&[2, -1])));
    }
}
