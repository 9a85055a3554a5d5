//! Parliaments of polytopes: `P_e` for each ground-set vector, Newton and
//! average polytopes, global generation, and recovering filtrations.

mod polytope;
mod svg;

pub use polytope::{bound_pairs, HPolytope, MAX_BOX_POINTS};
pub use svg::{render_svg, SvgOptions};

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exactla::{rat, IntPoint, QVector, Rational, Subspace};
use crate::fan::Fan;
use crate::klyachko::{split_cone, Filtration, Preference, ToricBundle};
use crate::matroid::{enumerate_flats, ground_set, GroundSet};

/// `P_e = { m : <m, v_i> <= max { j : e ∈ E^i(j) } }`.
///
/// With `within = Some(F)` the filtrations are first intersected with `F`;
/// the bounds are the same, but `e` must lie in `F`.
pub fn polytope_of(
    b: &ToricBundle,
    e: &[Rational],
    within: Option<&Subspace>,
) -> Result<HPolytope> {
    if let Some(f) = within {
        if !f.contains(e) {
            return Err(Error::InvalidFiltration(
                "vector is not in the subspace".into(),
            ));
        }
    }
    let bounds = b
        .filtrations()
        .iter()
        .map(|f| f.max_level(e).map(rat))
        .collect::<Result<Vec<_>>>()?;
    HPolytope::new(b.fan().rays().to_vec(), bounds)
}

/// Newton polytope of `sum a_i D_i`: bound `a_i` on ray `i`.
pub fn newton_polytope(fan: &Fan, a: &[Rational]) -> Result<HPolytope> {
    if a.len() != fan.num_rays() {
        return Err(Error::DimensionMismatch {
            expected: fan.num_rays(),
            found: a.len(),
        });
    }
    HPolytope::new(fan.rays().to_vec(), a.to_vec())
}

/// Newton polytope of `c_1(F) / rank(F)`.
pub fn average_polytope(b: &ToricBundle, f: &Subspace) -> Result<HPolytope> {
    if f.is_zero() {
        return Err(Error::ZeroSubspace);
    }
    let k = rat(f.dim() as i64);
    let bounds = b
        .filtrations()
        .iter()
        .map(|filt| {
            let s: i64 = filt.jump_values(f)?.iter().sum();
            Ok(rat(s) / &k)
        })
        .collect::<Result<Vec<_>>>()?;
    HPolytope::new(b.fan().rays().to_vec(), bounds)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParliamentEntry {
    pub label: String,
    pub vector: QVector,
    pub polytope: HPolytope,
}

/// One associated character together with the line it belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub character: IntPoint,
    /// The matching ground-set entry, when the line is spanned by one.
    pub entry: Option<usize>,
    pub label: String,
    /// Set when no single ground-set vector spans the line; `label` then
    /// names the smallest flat whose span contains it.
    pub flagged: bool,
    pub line: QVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parliament {
    pub entries: Vec<ParliamentEntry>,
    /// Per maximal cone, in cone order.
    pub annotations: Vec<Vec<Annotation>>,
    pub globally_generated: bool,
}

fn minimal_flat_label(b: &ToricBundle, g: &GroundSet, line: &[Rational]) -> String {
    let flats = enumerate_flats(g);
    let best = flats
        .iter()
        .filter(|f| f.span.contains(line))
        .min_by_key(|f| (f.rank(), f.indices.clone()))
        .expect("the full flat spans the fiber");
    let names: Vec<String> = best.indices.iter().map(|&i| b.label(g.vector(i))).collect();
    format!("{{{}}}", names.join(", "))
}

/// Builds the parliament over `G(E)`; characters are attached to labels by
/// splitting every cone with preference for ground-set vectors.
pub fn parliament(b: &ToricBundle, seed: u64) -> Result<Parliament> {
    let g = ground_set(b)?;
    parliament_over(b, &g, seed)
}

pub fn parliament_over(b: &ToricBundle, g: &GroundSet, seed: u64) -> Result<Parliament> {
    let entries = g
        .vectors()
        .iter()
        .map(|v| {
            Ok(ParliamentEntry {
                label: b.label(v),
                vector: v.clone(),
                polytope: polytope_of(b, v, None)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pref = Preference {
        subspace: None,
        vectors: g.vectors().to_vec(),
    };
    let mut annotations = Vec::new();
    let mut globally_generated = true;
    for c in 0..b.fan().max_cones().len() {
        let split = split_cone(b, c, &pref, seed)?;
        let mut cone_notes = Vec::new();
        for line in &split.lines {
            let l = Subspace::line(&line.vector);
            let entry = (0..g.len()).find(|&i| l.contains(g.vector(i)));
            let (label, flagged) = match entry {
                Some(i) => (entries[i].label.clone(), false),
                None => (minimal_flat_label(b, g, &line.vector), true),
            };
            let own = match entry {
                Some(i) => entries[i].polytope.clone(),
                None => polytope_of(b, &line.vector, None)?,
            };
            if !own.contains_point(&line.character) {
                globally_generated = false;
            }
            cone_notes.push(Annotation {
                character: line.character.clone(),
                entry,
                label,
                flagged,
                line: line.vector.clone(),
            });
        }
        cone_notes.sort_by(|a, b| a.character.cmp(&b.character).then(a.entry.cmp(&b.entry)));
        annotations.push(cone_notes);
    }
    Ok(Parliament {
        entries,
        annotations,
        globally_generated,
    })
}

/// Every associated character lies in the polytope of its line.
pub fn is_globally_generated(b: &ToricBundle, seed: u64) -> Result<bool> {
    Ok(parliament(b, seed)?.globally_generated)
}

/// Recovers each ray's filtration from the parliament: `E_{i,j}` is spanned
/// by the vectors whose polytope has a lattice point `u` with `<u, v_i> >= j`.
pub fn reconstruct_filtrations(p: &Parliament, fan: &Fan, rank: usize) -> Result<Vec<Filtration>> {
    if !p.globally_generated {
        return Err(Error::NotGloballyGenerated(
            "reconstruction needs every character inside its polytope".into(),
        ));
    }
    (0..fan.num_rays())
        .map(|i| {
            let v = fan.ray(i);
            let heights: Vec<(i64, &QVector)> = p
                .entries
                .iter()
                .map(|e| {
                    let h = e.polytope.max_lattice_pairing(v)?.ok_or_else(|| {
                        Error::NotGloballyGenerated(format!("P_{} has no lattice point", e.label))
                    })?;
                    let h = h
                        .to_i64()
                        .ok_or_else(|| Error::Unsupported("level overflows i64".into()))?;
                    Ok((h, &e.vector))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut levels: Vec<i64> = heights.iter().map(|(h, _)| *h).collect();
            levels.sort_unstable();
            levels.dedup();
            let spaces: Vec<Subspace> = levels
                .iter()
                .map(|&j| {
                    let rows: Vec<QVector> = heights
                        .iter()
                        .filter(|(h, _)| *h >= j)
                        .map(|(_, e)| (*e).clone())
                        .collect();
                    Subspace::span(&rows, rank)
                })
                .collect::<Result<Vec<_>>>()?;
            let steps = levels
                .iter()
                .zip(&spaces)
                .enumerate()
                .filter(|(k, (_, s))| spaces.get(k + 1) != Some(*s))
                .map(|(_, (j, s))| (*j, s.clone()))
                .collect();
            Filtration::new(rank, steps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{ipoint, qvec, ratio};
    use crate::fan::tests::{bl_p2, p2};
    use crate::klyachko::tests::{blp2_sum, rank3, split2, split3, tp2};
    use crate::klyachko::{line_bundle, twist_by_character};
    use num_bigint::BigInt;

    fn entry<'a>(p: &'a Parliament, label: &str) -> &'a ParliamentEntry {
        p.entries.iter().find(|e| e.label == label).unwrap()
    }

    #[test]
    fn tangent_polytope() {
        let t = tp2();
        let p = polytope_of(&t, &qvec(&[1, 0]), None).unwrap();
        assert_eq!(p.bounds(), &[rat(0), rat(1), rat(0)]);
        assert_eq!(
            p.vertices(),
            &[qvec(&[0, 0]), qvec(&[1, -1]), qvec(&[1, 0])]
        );
        assert_eq!(
            p.lattice_points(),
            vec![ipoint(&[0, 0]), ipoint(&[1, -1]), ipoint(&[1, 0])]
        );
        assert!(polytope_of(&t, &qvec(&[0, 0]), None).is_err());
    }

    #[test]
    fn split_polytope() {
        let s = split2();
        let p = polytope_of(&s, &qvec(&[1, 0]), None).unwrap();
        assert_eq!(
            p.vertices(),
            &[qvec(&[-1, 1]), qvec(&[1, -1]), qvec(&[1, 1])]
        );
    }

    #[test]
    fn negative_line_bundle_is_empty() {
        let o = line_bundle(&p2(), &[-1, 0, 0]).unwrap();
        assert!(polytope_of(&o, &qvec(&[1]), None).unwrap().is_empty());
        assert!(!is_globally_generated(&o, 0).unwrap());
        let z = line_bundle(&p2(), &[0, 0, 0]).unwrap();
        assert!(is_globally_generated(&z, 0).unwrap());
    }

    #[test]
    fn newton_polytopes() {
        let n = newton_polytope(&p2(), &[rat(1), rat(0), rat(0)]).unwrap();
        assert_eq!(
            n.vertices(),
            &[qvec(&[-1, 0]), qvec(&[0, -1]), qvec(&[0, 0])]
        );
        let b = newton_polytope(&bl_p2(), &[rat(0), rat(2), rat(0), rat(-1)]).unwrap();
        assert_eq!(
            b.vertices(),
            &[qvec(&[1, -1]), qvec(&[1, 0]), qvec(&[2, -2]), qvec(&[2, 0])]
        );
        let z = newton_polytope(&p2(), &[rat(0), rat(0), rat(0)]).unwrap();
        assert_eq!(z.vertices(), &[qvec(&[0, 0])]);
    }

    #[test]
    fn average_polytopes() {
        let t = tp2();
        let a = average_polytope(&t, &Subspace::full(2)).unwrap();
        assert_eq!(a.bounds(), &[ratio(1, 2), ratio(1, 2), ratio(1, 2)]);
        assert_eq!(
            a.vertices(),
            &[
                vec![ratio(-1, 1), ratio(1, 2)],
                vec![ratio(1, 2), ratio(-1, 1)],
                vec![ratio(1, 2), ratio(1, 2)]
            ]
        );
        let f1 = average_polytope(&t, &Subspace::line(&qvec(&[1, 0]))).unwrap();
        assert_eq!(
            f1,
            newton_polytope(&p2(), &[rat(0), rat(1), rat(0)]).unwrap()
        );
        let s = split3();
        let a = average_polytope(&s, &Subspace::full(3)).unwrap();
        assert_eq!(a.bounds(), &[ratio(1, 3), ratio(1, 3), ratio(1, 3)]);
        assert!(average_polytope(&s, &Subspace::zero(3)).is_err());
    }

    #[test]
    fn tangent_parliament() {
        let t = tp2();
        let p = parliament(&t, 0).unwrap();
        assert_eq!(p.entries.len(), 3);
        assert!(p.globally_generated);
        let c = t
            .fan()
            .max_cones()
            .iter()
            .position(|c| c == &[1, 2])
            .unwrap();
        let notes: Vec<(IntPoint, String)> = p.annotations[c]
            .iter()
            .map(|a| (a.character.clone(), a.label.clone()))
            .collect();
        assert_eq!(
            notes,
            vec![
                (ipoint(&[0, 1]), "v2".into()),
                (ipoint(&[1, 0]), "v1".into())
            ]
        );
        assert!(p.annotations.iter().flatten().all(|a| !a.flagged));
    }

    #[test]
    fn blowup_parliament() {
        let b = blp2_sum();
        let p = parliament(&b, 0).unwrap();
        assert_eq!(
            entry(&p, "e1").polytope.vertices(),
            &[
                qvec(&[-1, -3]),
                qvec(&[-1, 0]),
                qvec(&[0, -4]),
                qvec(&[0, 0])
            ]
        );
        assert_eq!(
            entry(&p, "e2").polytope.vertices(),
            &[qvec(&[1, -1]), qvec(&[1, 0]), qvec(&[3, -3]), qvec(&[3, 0])]
        );
    }

    #[test]
    fn hyperplanes_used_once() {
        for b in [tp2(), split2(), rank3(), blp2_sum()] {
            let p = parliament(&b, 0).unwrap();
            for (c, notes) in p.annotations.iter().enumerate() {
                assert_eq!(notes.len(), b.rank());
                for &ray in &b.fan().max_cones()[c] {
                    let v = b.fan().ray(ray);
                    let mut used: Vec<i64> = notes
                        .iter()
                        .map(|a| {
                            a.character
                                .iter()
                                .zip(v)
                                .map(|(x, &y)| x * y)
                                .sum::<BigInt>()
                                .to_i64()
                                .unwrap()
                        })
                        .collect();
                    used.sort();
                    assert_eq!(used, b.filtration(ray).jumps());
                }
            }
        }
    }

    #[test]
    fn round_trips() {
        for b in [tp2(), split2(), line_bundle(&p2(), &[1, 0, 0]).unwrap()] {
            let p = parliament(&b, 0).unwrap();
            assert!(p.globally_generated);
            let back = reconstruct_filtrations(&p, b.fan(), b.rank()).unwrap();
            assert_eq!(back.as_slice(), b.filtrations());
        }
        let o = line_bundle(&p2(), &[-1, 0, 0]).unwrap();
        let p = parliament(&o, 0).unwrap();
        assert!(reconstruct_filtrations(&p, o.fan(), 1).is_err());
    }

    #[test]
    fn twist_translates_polytopes() {
        let t = tp2();
        let tw = twist_by_character(&t, &[1, -2]).unwrap();
        for v in [qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])] {
            let a = polytope_of(&t, &v, None).unwrap();
            let b = polytope_of(&tw, &v, None).unwrap();
            assert_eq!(a.translated(&qvec(&[1, -2])), b);
        }
    }
}
