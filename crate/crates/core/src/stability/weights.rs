use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{
    format_qvector, orthogonal_lattice_basis, pair, point_to_q, rank, rat, solve, QVector, Rational,
};
use crate::fan::{positively_spans, Fan};
use crate::parliament::newton_polytope;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationSource {
    Weights,
    Divisor,
}

/// Weights `t_i` of a movable class, one per ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polarization {
    pub weights: Vec<Rational>,
    pub source: PolarizationSource,
    /// The divisor the weights were derived from, if any.
    pub divisor: Option<Vec<Rational>>,
}

impl Polarization {
    pub fn scaled(&self, lambda: &Rational) -> Polarization {
        Polarization {
            weights: self.weights.iter().map(|t| t * lambda).collect(),
            source: self.source.clone(),
            divisor: None,
        }
    }
}

/// Accepts nonnegative weights with `sum t_i v_i = 0` whose positive part spans positively.
pub fn validate_polarization(fan: &Fan, t: &[Rational]) -> Result<Polarization> {
    if t.len() != fan.num_rays() {
        return Err(Error::DimensionMismatch {
            expected: fan.num_rays(),
            found: t.len(),
        });
    }
    if let Some((i, w)) = t.iter().enumerate().find(|(_, w)| w.is_negative()) {
        return Err(Error::InvalidPolarization(format!(
            "weight {i} is negative ({w})"
        )));
    }
    let sum = fan.weighted_ray_sum(t);
    if sum.iter().any(|x| !x.is_zero()) {
        return Err(Error::InvalidPolarization(format!(
            "weights are not balanced: sum t_i v_i = {}",
            format_qvector(&sum)
        )));
    }
    let support: Vec<Vec<i64>> = fan
        .rays()
        .iter()
        .zip(t)
        .filter(|(_, w)| w.is_positive())
        .map(|(v, _)| v.clone())
        .collect();
    if !positively_spans(&support, fan.dim()) {
        return Err(Error::InvalidPolarization(
            "rays with positive weight do not span positively".into(),
        ));
    }
    Ok(Polarization {
        weights: t.to_vec(),
        source: PolarizationSource::Weights,
        divisor: None,
    })
}

fn affine_dim(points: &[QVector]) -> usize {
    let Some(p0) = points.first() else {
        return 0;
    };
    let diffs: Vec<QVector> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs, p0.len())
}

/// A triangulation of the face spanned by `face` (vertex indices into
/// `verts`), by pulling the smallest vertex. Subfaces are cut out by the
/// polytope's own inequalities, so `face` must be a face of the polytope.
fn pulling_triangulation(
    verts: &[QVector],
    normals: &[Vec<i64>],
    bounds: &[Rational],
    face: &[usize],
) -> Vec<Vec<usize>> {
    let pts: Vec<QVector> = face.iter().map(|&i| verts[i].clone()).collect();
    let k = affine_dim(&pts);
    if k == 0 {
        return vec![vec![face[0]]];
    }
    let apex = face[0];
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for (v, c) in normals.iter().zip(bounds) {
        let sub: Vec<usize> = face
            .iter()
            .copied()
            .filter(|&i| &pair(&verts[i], v) == c)
            .collect();
        if sub.is_empty() || sub.contains(&apex) || seen.contains(&sub) {
            continue;
        }
        let sub_pts: Vec<QVector> = sub.iter().map(|&i| verts[i].clone()).collect();
        if affine_dim(&sub_pts) + 1 != k {
            continue;
        }
        seen.push(sub.clone());
        for mut simplex in pulling_triangulation(verts, normals, bounds, &sub) {
            simplex.insert(0, apex);
            out.push(simplex);
        }
    }
    out
}

/// Coordinates of `x` (in `v^⊥`) in the lattice basis `basis`.
fn lattice_coordinates(basis: &[Vec<BigInt>], x: &[Rational]) -> QVector {
    let d = x.len();
    let k = basis.len();
    for rows in (0..d).combinations(k) {
        let a: Vec<QVector> = rows
            .iter()
            .map(|&r| {
                basis
                    .iter()
                    .map(|b| Rational::from_integer(b[r].clone()))
                    .collect()
            })
            .collect();
        let rhs: QVector = rows.iter().map(|&r| x[r].clone()).collect();
        if let Some(c) = solve(&a, &rhs) {
            return c;
        }
    }
    unreachable!("a lattice basis has full column rank")
}

fn abs_det(m: &[QVector]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = rat(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return rat(0);
        };
        a.swap(c, p);
        det *= &a[c][c];
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            let f = &row[c] / &pivot[c];
            for (x, y) in row.iter_mut().zip(&pivot) {
                *x -= &f * y;
            }
        }
    }
    det.abs()
}

/// Normalized lattice volume `(d-1)! vol` of each facet of the Newton polytope of `a`.
pub fn facet_volumes(fan: &Fan, a: &[Rational]) -> Result<Vec<Rational>> {
    let p = newton_polytope(fan, a)?;
    let d = fan.dim();
    let verts = p.vertices();
    if verts.is_empty() || affine_dim(verts) < d {
        return Err(Error::InvalidPolarization(
            "the divisor's polytope is not full-dimensional".into(),
        ));
    }
    let normals = p.normals();
    let bounds = p.bounds();
    normals
        .iter()
        .zip(bounds)
        .map(|(v, c)| {
            let facet: Vec<usize> = (0..verts.len())
                .filter(|&i| &pair(&verts[i], v) == c)
                .collect();
            let pts: Vec<QVector> = facet.iter().map(|&i| verts[i].clone()).collect();
            if facet.is_empty() || affine_dim(&pts) + 1 < d {
                return Ok(rat(0));
            }
            let basis = orthogonal_lattice_basis(v)?;
            let mut total = rat(0);
            for simplex in pulling_triangulation(verts, normals, bounds, &facet) {
                let base = &verts[simplex[0]];
                let rows: Vec<QVector> = simplex[1..]
                    .iter()
                    .map(|&i| {
                        let diff: QVector = verts[i].iter().zip(base).map(|(x, y)| x - y).collect();
                        lattice_coordinates(&basis, &diff)
                    })
                    .collect();
                total += abs_det(&rows);
            }
            Ok(total)
        })
        .collect()
}

/// Weights of the class of `D^{d-1}`: facet volumes of the Newton polytope.
pub fn weights_from_divisor(fan: &Fan, a: &[Rational]) -> Result<Polarization> {
    let t = facet_volumes(fan, a)?;
    let mut pol = validate_polarization(fan, &t)?;
    pol.source = PolarizationSource::Divisor;
    pol.divisor = Some(a.to_vec());
    Ok(pol)
}

/// Integer divisor convenience wrapper.
pub fn weights_from_integer_divisor(fan: &Fan, a: &[i64]) -> Result<Polarization> {
    let q: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
    weights_from_divisor(fan, &point_to_q(&q))
}
