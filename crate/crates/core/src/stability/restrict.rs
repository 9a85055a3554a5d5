use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactla::{solve, solve_integer_system, IntPoint, QVector, Rational, Subspace};
use crate::fan::Wall;
use crate::klyachko::{split_cone, Preference, ToricBundle};
use crate::matroid::ground_set;

/// One summand `O(degree)` of the restriction, with its characters at both fixed points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionPair {
    pub u: IntPoint,
    pub u_prime: IntPoint,
    pub degree: i64,
    /// Ground-set label of a fiber vector realizing the pair.
    pub label: String,
    /// `<u, v_t>` for the rays of the wall.
    pub tau_profile: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub wall: Wall,
    pub m_tau: IntPoint,
    pub pairs: Vec<RestrictionPair>,
    /// Splitting type, ascending.
    pub degrees: Vec<i64>,
    /// `c_1(E) · C`, computed from intersection numbers.
    pub c1_degree: i64,
    pub semistable: bool,
}

fn to_i64(x: &BigInt) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Unsupported(format!("{x} does not fit in 64 bits")))
}

/// Coefficients `c_t` with `v_x + v_y + sum c_t v_t = 0`, i.e. `D_t · C`.
fn curve_intersections(b: &ToricBundle, wall: &Wall) -> Result<Vec<i64>> {
    let fan = b.fan();
    let d = fan.dim();
    let mut cols: Vec<usize> = wall.tau_rays.clone();
    cols.push(wall.extra_ray_sigma);
    let a: Vec<QVector> = (0..d)
        .map(|k| {
            cols.iter()
                .map(|&c| Rational::from_integer(fan.ray(c)[k].into()))
                .collect()
        })
        .collect();
    let rhs: QVector = fan
        .ray(wall.extra_ray_sigma_prime)
        .iter()
        .map(|&x| Rational::from_integer(x.into()))
        .collect();
    let x = solve(&a, &rhs).ok_or_else(|| Error::Verification("wall cone is singular".into()))?;
    if x[d - 1] != Rational::from_integer((-1).into()) {
        return Err(Error::Verification(format!(
            "wall {:?} does not satisfy the smooth wall relation",
            wall.tau_rays
        )));
    }
    let mut out = vec![0i64; fan.num_rays()];
    out[wall.extra_ray_sigma] = 1;
    out[wall.extra_ray_sigma_prime] = 1;
    for (t, c) in wall.tau_rays.iter().zip(&x) {
        if !c.is_integer() {
            return Err(Error::Verification("non-integral wall relation".into()));
        }
        out[*t] = -to_i64(&c.to_integer())?;
    }
    Ok(out)
}

/// Position of each of `rays` inside the sorted ray list of `cone`.
fn positions(cone: &[usize], rays: &[usize]) -> Vec<usize> {
    rays.iter()
        .map(|r| cone.iter().position(|c| c == r).expect("ray of the cone"))
        .collect()
}

fn character(
    b: &ToricBundle,
    cone: usize,
    tau: &[usize],
    q: &[i64],
    extra: usize,
    level: i64,
) -> Result<IntPoint> {
    let rays = &b.fan().max_cones()[cone];
    let mut profile = vec![BigInt::zero(); rays.len()];
    for (p, &v) in positions(rays, tau).into_iter().zip(q) {
        profile[p] = v.into();
    }
    profile[positions(rays, &[extra])[0]] = level.into();
    solve_integer_system(&b.fan().cone_matrix(cone), &profile)
}

/// Splitting type of `E` on the invariant curve of `wall`.
///
/// The two fixed points are paired inside each class of equal `τ`-profile by
/// splitting the graded piece `W / D` for both extra rays at once.
pub fn restrict_to_curve(b: &ToricBundle, wall: &Wall, seed: u64) -> Result<Restriction> {
    let fan = b.fan();
    let r = b.rank();
    let tau = &wall.tau_rays;
    let (x, y) = (wall.extra_ray_sigma, wall.extra_ray_sigma_prime);
    let s = split_cone(b, wall.sigma, &Preference::default(), seed)?;
    let s_prime = split_cone(b, wall.sigma_prime, &Preference::default(), seed)?;

    // (tau profile, extra level) -> multiplicity, on each side
    let count = |split: &crate::klyachko::ConeSplitting, extra: usize| {
        let rays = &fan.max_cones()[split.cone];
        let pos = positions(rays, tau);
        let px = positions(rays, &[extra])[0];
        let mut m: BTreeMap<Vec<i64>, BTreeMap<i64, usize>> = BTreeMap::new();
        for l in &split.lines {
            let q: Vec<i64> = pos.iter().map(|&p| l.profile[p]).collect();
            *m.entry(q).or_default().entry(l.profile[px]).or_default() += 1;
        }
        m
    };
    let left = count(&s, x);
    let right = count(&s_prime, y);
    if left.keys().ne(right.keys()) {
        return Err(Error::Verification(format!(
            "wall {tau:?}: the two cones disagree on the wall's weights"
        )));
    }

    let m_tau = fan.wall_normal(wall)?;
    let g_set = ground_set(b)?;
    let mut pairs = Vec::with_capacity(r);
    for (q, lx) in &left {
        let ly = &right[q];
        let w_of = |q: &[i64]| -> Result<Subspace> {
            let mut acc = Subspace::full(r);
            for (&t, &j) in tau.iter().zip(q) {
                acc = acc.intersect(&b.value(t, j))?;
            }
            Ok(acc)
        };
        let w = w_of(q)?;
        let mut d = Subspace::zero(r);
        for k in 0..q.len() {
            let mut bumped = q.clone();
            bumped[k] += 1;
            d = d.sum(&w_of(&bumped)?)?;
        }
        let dd = d.dim();
        let fx = |i: i64| -> Result<Subspace> { w.intersect(&b.value(x, i))?.sum(&d) };
        let fy = |j: i64| -> Result<Subspace> { w.intersect(&b.value(y, j))?.sum(&d) };
        let g =
            |i: i64, j: i64| -> Result<i64> { Ok((fx(i)?.intersect(&fy(j)?)?.dim() - dd) as i64) };
        let xs = b.filtration(x).thresholds();
        let ys = b.filtration(y).thresholds();
        let mut nx: BTreeMap<i64, usize> = BTreeMap::new();
        let mut ny: BTreeMap<i64, usize> = BTreeMap::new();
        for (&i, &j) in xs.iter().cartesian_product(&ys) {
            let n = g(i, j)? - g(i + 1, j)? - g(i, j + 1)? + g(i + 1, j + 1)?;
            if n < 0 {
                return Err(Error::Verification(format!(
                    "wall {tau:?}: negative count at levels ({i}, {j})"
                )));
            }
            if n == 0 {
                continue;
            }
            *nx.entry(i).or_default() += n as usize;
            *ny.entry(j).or_default() += n as usize;
            let u = character(b, wall.sigma, tau, q, x, i)?;
            let u_prime = character(b, wall.sigma_prime, tau, q, y, j)?;
            let diff: IntPoint = u.iter().zip(&u_prime).map(|(a, c)| a - c).collect();
            let k = m_tau
                .iter()
                .position(|c| !c.is_zero())
                .expect("nonzero normal");
            let a = &diff[k] / &m_tau[k];
            if diff.iter().zip(&m_tau).any(|(e, m)| e != &(&a * m)) {
                return Err(Error::Verification(format!(
                    "wall {tau:?}: paired characters differ off the wall normal"
                )));
            }
            let degree = to_i64(&a)?;
            let here = fx(i)?.intersect(&fy(j)?)?;
            let deeper = fx(i + 1)?
                .intersect(&fy(j)?)?
                .sum(&fx(i)?.intersect(&fy(j + 1)?)?)?;
            // n representatives, independent modulo the deeper part
            let mut taken = deeper;
            let mut labels = Vec::with_capacity(n as usize);
            for v in g_set.vectors().iter().chain(here.basis()) {
                if labels.len() == n as usize {
                    break;
                }
                if here.contains(v) && !taken.contains(v) {
                    taken = taken.extended(v);
                    labels.push(b.label(v));
                }
            }
            labels.resize(n as usize, String::new());
            for label in labels {
                pairs.push(RestrictionPair {
                    u: u.clone(),
                    u_prime: u_prime.clone(),
                    degree,
                    label,
                    tau_profile: q.clone(),
                });
            }
        }
        if &nx != lx || &ny != ly {
            return Err(Error::Verification(format!(
                "wall {tau:?}: pairing marginals do not match the cone splittings"
            )));
        }
    }

    let degrees: Vec<i64> = pairs.iter().map(|p| p.degree).sorted().collect();
    let dc = curve_intersections(b, wall)?;
    let c1_degree: i64 = b
        .filtrations()
        .iter()
        .zip(&dc)
        .map(|(f, c)| f.jumps().iter().sum::<i64>() * c)
        .sum();
    if degrees.iter().sum::<i64>() != c1_degree {
        return Err(Error::Verification(format!(
            "wall {tau:?}: degrees sum to {} but c1 · C = {c1_degree}",
            degrees.iter().sum::<i64>()
        )));
    }
    let semistable = degrees.iter().all_equal();
    Ok(Restriction {
        wall: wall.clone(),
        m_tau,
        pairs,
        degrees,
        c1_degree,
        semistable,
    })
}

/// Restriction to the wall whose rays are `tau` (in any order).
pub fn restrict_with(b: &ToricBundle, tau: &[usize], seed: u64) -> Result<Restriction> {
    let want: Vec<usize> = tau.iter().copied().sorted().collect();
    let wall = b
        .fan()
        .walls()?
        .into_iter()
        .find(|w| w.tau_rays == want)
        .ok_or_else(|| Error::InvalidFan(format!("{tau:?} is not a wall of the fan")))?;
    restrict_to_curve(b, &wall, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::tests::{bl_p2, p2};
    use crate::klyachko::tests::{blp2_sum, rank3, split2, split3, tp2};
    use crate::klyachko::{line_bundle, tangent_bundle};

    fn swapped(w: &Wall) -> Wall {
        Wall {
            tau_rays: w.tau_rays.clone(),
            sigma: w.sigma_prime,
            sigma_prime: w.sigma,
            extra_ray_sigma: w.extra_ray_sigma_prime,
            extra_ray_sigma_prime: w.extra_ray_sigma,
        }
    }

    #[test]
    fn line_bundle_degrees() {
        // O(D0) on the plane has degree 1 on every invariant line
        let o = line_bundle(&p2(), &[1, 0, 0]).unwrap();
        for w in p2().walls().unwrap() {
            let r = restrict_to_curve(&o, &w, 0).unwrap();
            assert_eq!(r.degrees, vec![1]);
            assert!(r.semistable);
        }
        // on the blow-up, the exceptional curve has D3 · C = -1
        let e = line_bundle(&bl_p2(), &[0, 0, 0, 1]).unwrap();
        let r = restrict_with(&e, &[3], 0).unwrap();
        assert_eq!(r.degrees, vec![-1]);
    }

    #[test]
    fn tangent_plane() {
        let t = tp2();
        for w in t.fan().walls().unwrap() {
            let r = restrict_to_curve(&t, &w, 0).unwrap();
            assert_eq!(r.degrees, vec![1, 2]);
            assert_eq!(r.c1_degree, 3);
            assert!(!r.semistable);
            assert!(r.pairs.iter().all(|p| !p.label.is_empty()));
        }
    }

    #[test]
    fn blown_up_sum() {
        let b = blp2_sum();
        let r = restrict_with(&b, &[0], 0).unwrap();
        assert_eq!(r.degrees, vec![1, 2]);
        assert_eq!(r.c1_degree, 3);
        assert_eq!(r.m_tau.len(), 2);
        let labels: Vec<&str> = r.pairs.iter().map(|p| p.label.as_str()).sorted().collect();
        assert_eq!(labels, vec!["e1", "e2"]);
    }

    #[test]
    fn swapping_sides() {
        for b in [
            tp2(),
            split2(),
            split3(),
            blp2_sum(),
            rank3(),
            tangent_bundle(&bl_p2()).unwrap(),
        ] {
            for w in b.fan().walls().unwrap() {
                let r = restrict_to_curve(&b, &w, 0).unwrap();
                let s = restrict_to_curve(&b, &swapped(&w), 0).unwrap();
                assert_eq!(r.degrees, s.degrees);
                let neg: IntPoint = r.m_tau.iter().map(|x| -x).collect();
                assert_eq!(s.m_tau, neg);
            }
        }
    }

    #[test]
    fn trivial_bundle() {
        let o = line_bundle(&p2(), &[0, 0, 0]).unwrap();
        let b = crate::klyachko::direct_sum(&o, &o).unwrap();
        for w in p2().walls().unwrap() {
            let r = restrict_to_curve(&b, &w, 0).unwrap();
            assert_eq!(r.degrees, vec![0, 0]);
            assert!(r.semistable);
            let labels: Vec<&str> = r.pairs.iter().map(|p| p.label.as_str()).sorted().collect();
            assert_eq!(labels, vec!["e1", "e2"]);
        }
    }

    #[test]
    fn unknown_wall() {
        assert!(restrict_with(&tp2(), &[0, 1], 0).is_err());
    }
}
