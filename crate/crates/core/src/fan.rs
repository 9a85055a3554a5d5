//! Fans of smooth complete toric varieties: validation, walls, and the
//! lattice geometry of codimension-one cones.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{
    determinant, null_space, pair, primitive_kernel_generator, qvec, rank, IntPoint, Rational,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    /// Each cone's ray indices, sorted ascending; cone order is the input order.
    max_cones: Vec<Vec<usize>>,
}

/// Keeps pairings and sums of ray entries well inside `i64`.
pub const MAX_RAY_ENTRY: u64 = 1 << 24;

/// A codimension-one cone shared by two maximal cones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub tau_rays: Vec<usize>,
    pub sigma: usize,
    pub sigma_prime: usize,
    pub extra_ray_sigma: usize,
    pub extra_ray_sigma_prime: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub cone: usize,
    pub determinant: String,
    pub smooth: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallVerdict {
    pub tau_rays: Vec<usize>,
    pub cones: Vec<usize>,
    pub paired: bool,
}

/// Outcome of [`Fan::validate`].
///
/// Completeness is checked by a proxy: every wall lies in exactly two
/// maximal cones, the rays positively span `R^d`, and the dual graph of
/// maximal cones is connected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanReport {
    pub cones: Vec<ConeVerdict>,
    pub walls: Vec<WallVerdict>,
    pub positively_spanning: bool,
    pub connected: bool,
    pub pass: bool,
}

impl FanReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.cones.iter().filter(|c| !c.smooth) {
            out.push(format!(
                "cone {} is not smooth (det {})",
                c.cone, c.determinant
            ));
        }
        for w in self.walls.iter().filter(|w| !w.paired) {
            out.push(format!(
                "wall {:?} lies in {} maximal cone(s), expected 2",
                w.tau_rays,
                w.cones.len()
            ));
        }
        if !self.positively_spanning {
            out.push("rays do not positively span".into());
        }
        if !self.connected {
            out.push("maximal cones are not connected through walls".into());
        }
        out
    }
}

impl Fan {
    /// Structural checks only; see [`Fan::validate`] for smoothness and completeness.
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFan("dimension must be positive".into()));
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::InvalidFan(format!(
                    "ray {i} has length {}, expected {dim}",
                    r.len()
                )));
            }
            if r.iter().any(|x| x.unsigned_abs() > MAX_RAY_ENTRY) {
                return Err(Error::InvalidFan(format!(
                    "ray {i} has an entry larger than {MAX_RAY_ENTRY} in absolute value"
                )));
            }
            let g = r.iter().fold(0i64, |acc, &x| acc.gcd(&x));
            if g != 1 {
                return Err(Error::InvalidFan(format!("ray {i} {r:?} is not primitive")));
            }
        }
        for (i, j) in (0..rays.len()).tuple_combinations() {
            if rays[i] == rays[j] {
                return Err(Error::InvalidFan(format!("rays {i} and {j} coincide")));
            }
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        let mut seen = BTreeSet::new();
        for (c, cone) in max_cones.into_iter().enumerate() {
            let sorted: Vec<usize> = cone.iter().copied().sorted().dedup().collect();
            if sorted.len() != dim || cone.len() != dim {
                return Err(Error::InvalidFan(format!(
                    "cone {c} has {} distinct rays, expected {dim}",
                    sorted.len()
                )));
            }
            if let Some(&bad) = sorted.iter().find(|&&r| r >= rays.len()) {
                return Err(Error::InvalidFan(format!(
                    "cone {c} references missing ray {bad}"
                )));
            }
            if !seen.insert(sorted.clone()) {
                return Err(Error::InvalidFan(format!("cone {c} is listed twice")));
            }
            cones.push(sorted);
        }
        if cones.is_empty() {
            return Err(Error::InvalidFan("no maximal cones".into()));
        }
        Ok(Fan {
            dim,
            rays,
            max_cones: cones,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[i64] {
        &self.rays[i]
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn cone_matrix(&self, cone: usize) -> Vec<Vec<i64>> {
        self.max_cones[cone]
            .iter()
            .map(|&i| self.rays[i].clone())
            .collect()
    }

    fn wall_incidence(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (c, cone) in self.max_cones.iter().enumerate() {
            for tau in cone.iter().copied().combinations(self.dim - 1) {
                map.entry(tau).or_default().push(c);
            }
        }
        map
    }

    pub fn validate(&self) -> FanReport {
        let cones: Vec<ConeVerdict> = (0..self.max_cones.len())
            .map(|c| {
                let det = determinant(&self.cone_matrix(c));
                ConeVerdict {
                    cone: c,
                    smooth: det.abs() == BigInt::from(1),
                    determinant: det.to_string(),
                }
            })
            .collect();
        let incidence = self.wall_incidence();
        let walls: Vec<WallVerdict> = incidence
            .iter()
            .map(|(tau, cs)| WallVerdict {
                tau_rays: tau.clone(),
                cones: cs.clone(),
                paired: cs.len() == 2,
            })
            .collect();
        let positively_spanning = positively_spans(&self.rays, self.dim);
        let connected = {
            let n = self.max_cones.len();
            let mut adj = vec![Vec::new(); n];
            for cs in incidence.values().filter(|cs| cs.len() == 2) {
                adj[cs[0]].push(cs[1]);
                adj[cs[1]].push(cs[0]);
            }
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0]);
            seen[0] = true;
            while let Some(c) = queue.pop_front() {
                for &o in &adj[c] {
                    if !seen[o] {
                        seen[o] = true;
                        queue.push_back(o);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        let pass = cones.iter().all(|c| c.smooth)
            && walls.iter().all(|w| w.paired)
            && positively_spanning
            && connected;
        FanReport {
            cones,
            walls,
            positively_spanning,
            connected,
            pass,
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.pass {
            Ok(())
        } else {
            Err(Error::InvalidFan(report.failures().join("; ")))
        }
    }

    /// Walls sorted by their ray sets. `sigma` is the lower-indexed maximal cone.
    pub fn walls(&self) -> Result<Vec<Wall>> {
        let incidence = self.wall_incidence();
        let mut out = Vec::with_capacity(incidence.len());
        for (tau, cs) in incidence {
            if cs.len() != 2 {
                return Err(Error::InvalidFan(format!(
                    "wall {tau:?} lies in {} maximal cone(s); fan is not validated",
                    cs.len()
                )));
            }
            let extra = |c: usize| *self.max_cones[c].iter().find(|r| !tau.contains(r)).unwrap();
            out.push(Wall {
                extra_ray_sigma: extra(cs[0]),
                extra_ray_sigma_prime: extra(cs[1]),
                tau_rays: tau,
                sigma: cs[0],
                sigma_prime: cs[1],
            });
        }
        Ok(out)
    }

    /// Primitive generator `m` of `tau^perp`, signed so `<m, extra ray of sigma> > 0`.
    pub fn wall_normal(&self, wall: &Wall) -> Result<IntPoint> {
        let rows: Vec<Vec<i64>> = wall
            .tau_rays
            .iter()
            .map(|&i| self.rays[i].clone())
            .collect();
        let m = primitive_kernel_generator(&rows, self.dim)?;
        let s: BigInt = m
            .iter()
            .zip(&self.rays[wall.extra_ray_sigma])
            .map(|(a, &b)| a * b)
            .sum();
        if s.is_zero() {
            return Err(Error::InvalidFan(format!(
                "wall {:?} is not separated by its extra rays",
                wall.tau_rays
            )));
        }
        Ok(if s.is_negative() {
            m.into_iter().map(|x| -x).collect()
        } else {
            m
        })
    }

    /// Whether some pair of rays is opposite.
    pub fn has_opposite_rays(&self) -> bool {
        self.rays
            .iter()
            .tuple_combinations()
            .any(|(a, b)| a.iter().zip(b).all(|(x, y)| *x == -*y))
    }

    /// Checks that `sum_i t_i v_i` vanishes; returns the sum.
    pub fn weighted_ray_sum(&self, t: &[Rational]) -> Vec<Rational> {
        let mut acc = vec![Rational::zero(); self.dim];
        for (w, r) in t.iter().zip(&self.rays) {
            for (a, &x) in acc.iter_mut().zip(r) {
                *a += w * BigInt::from(x);
            }
        }
        acc
    }
}

/// Whether the given vectors positively span `R^d`.
///
/// True iff they span linearly and the cone `{y : <y, v> <= 0 for all v}`
/// is `{0}`; the latter is tested by looking for an extreme ray, which must
/// be cut out by `d - 1` independent tight rows.
pub fn positively_spans(vectors: &[Vec<i64>], d: usize) -> bool {
    let q: Vec<_> = vectors.iter().map(|v| qvec(v)).collect();
    if rank(&q, d) < d {
        return false;
    }
    if d == 1 {
        let pos = vectors.iter().any(|v| v[0] > 0);
        let neg = vectors.iter().any(|v| v[0] < 0);
        return pos && neg;
    }
    for subset in (0..vectors.len()).combinations(d - 1) {
        let rows: Vec<_> = subset.iter().map(|&i| q[i].clone()).collect();
        let ns = null_space(&rows, d);
        if ns.len() != 1 {
            continue;
        }
        for sign in [1i64, -1] {
            let y: Vec<Rational> = ns[0]
                .iter()
                .map(|x| x * Rational::from_integer(sign.into()))
                .collect();
            if vectors.iter().all(|v| pair(&y, v) <= Rational::zero()) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn p2() -> Fan {
        Fan::new(
            2,
            vec![vec![-1, -1], vec![1, 0], vec![0, 1]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap()
    }

    pub fn bl_p2() -> Fan {
        Fan::new(
            2,
            vec![vec![-1, -1], vec![1, 0], vec![0, 1], vec![-1, 0]],
            vec![vec![1, 2], vec![2, 3], vec![3, 0], vec![0, 1]],
        )
        .unwrap()
    }

    pub fn p3() -> Fan {
        Fan::new(
            3,
            vec![
                vec![-1, -1, -1],
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
            ],
            (0..4).combinations(3).collect(),
        )
        .unwrap()
    }

    #[test]
    fn examples_validate() {
        assert!(p2().validate().pass);
        assert!(bl_p2().validate().pass);
        assert!(p3().validate().pass);
    }

    #[test]
    fn missing_cone_fails() {
        let f = Fan::new(
            2,
            vec![vec![-1, -1], vec![1, 0], vec![0, 1]],
            vec![vec![0, 1], vec![1, 2]],
        )
        .unwrap();
        let report = f.validate();
        assert!(!report.pass);
        assert!(report.walls.iter().any(|w| !w.paired));
        assert!(f.walls().is_err());
    }

    #[test]
    fn structural_errors() {
        assert!(Fan::new(2, vec![vec![2, 0]], vec![]).is_err());
        assert!(Fan::new(2, vec![vec![1, 0], vec![1, 0]], vec![vec![0, 1]]).is_err());
        assert!(Fan::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![0]]).is_err());
        assert!(Fan::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn singular_cone_detected() {
        let f = Fan::new(
            2,
            vec![vec![1, 0], vec![1, 2], vec![-1, -1], vec![0, 1]],
            vec![vec![0, 1], vec![1, 3], vec![3, 2], vec![2, 0]],
        )
        .unwrap();
        let report = f.validate();
        assert!(!report.cones[0].smooth);
        assert!(!report.pass);
    }

    #[test]
    fn wall_counts() {
        assert_eq!(p2().walls().unwrap().len(), 3);
        assert_eq!(bl_p2().walls().unwrap().len(), 4);
        assert_eq!(p3().walls().unwrap().len(), 6);
        for f in [p2(), bl_p2(), p3()] {
            let n: usize = f.max_cones().len() * f.dim();
            assert_eq!(f.walls().unwrap().len(), n / 2);
        }
    }

    #[test]
    fn walls_rebuild_cones() {
        for f in [p2(), bl_p2(), p3()] {
            let mut rebuilt = BTreeSet::new();
            for w in f.walls().unwrap() {
                let mut a = w.tau_rays.clone();
                a.push(w.extra_ray_sigma);
                a.sort();
                let mut b = w.tau_rays.clone();
                b.push(w.extra_ray_sigma_prime);
                b.sort();
                assert_eq!(a, f.max_cones()[w.sigma]);
                assert_eq!(b, f.max_cones()[w.sigma_prime]);
                assert_ne!(w.extra_ray_sigma, w.extra_ray_sigma_prime);
                rebuilt.insert(a);
                rebuilt.insert(b);
            }
            let original: BTreeSet<_> = f.max_cones().iter().cloned().collect();
            assert_eq!(rebuilt, original);
        }
    }

    #[test]
    fn wall_normal_sign() {
        let f = bl_p2();
        let w = &f.walls().unwrap()[0];
        assert_eq!(w.tau_rays, vec![0]);
        assert_eq!(w.extra_ray_sigma, 3);
        assert_eq!(f.wall_normal(w).unwrap(), crate::exactla::ipoint(&[-1, 1]));
    }

    #[test]
    fn positive_spanning() {
        assert!(positively_spans(&[vec![1, 0], vec![0, 1], vec![-1, -1]], 2));
        assert!(!positively_spans(&[vec![1, 0], vec![0, 1], vec![-1, 0]], 2));
        assert!(!positively_spans(&[vec![1, 0], vec![0, 1]], 2));
    }

    #[test]
    fn opposite_rays() {
        assert!(!p2().has_opposite_rays());
        assert!(bl_p2().has_opposite_rays());
    }
}
