use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ToricBundle;
use crate::error::{Error, Result};
use crate::exactla::{
    format_point, pair_int, rat, solve_integer_system, IntPoint, QVector, Subspace,
};

const SEED_ATTEMPTS: u64 = 16;
const RANDOM_DRAWS: usize = 64;

/// One line `L_u` of a compatible splitting on a maximal cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitLine {
    pub character: IntPoint,
    /// `<u, v_i>` for the cone's rays, in the cone's (sorted) ray order.
    pub profile: Vec<i64>,
    pub vector: QVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSplitting {
    pub cone: usize,
    pub lines: Vec<SplitLine>,
}

impl ConeSplitting {
    /// `u(σ)` as a sorted multiset.
    pub fn characters(&self) -> Vec<IntPoint> {
        self.lines
            .iter()
            .map(|l| l.character.clone())
            .sorted()
            .collect()
    }

    pub fn basis(&self) -> Vec<QVector> {
        self.lines.iter().map(|l| l.vector.clone()).collect()
    }
}

/// Compatible bases and associated characters for every maximal cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterSheet {
    pub cones: Vec<ConeSplitting>,
}

impl CharacterSheet {
    pub fn characters(&self, cone: usize) -> Vec<IntPoint> {
        self.cones[cone].characters()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncompatibilityReason {
    /// Inclusion–exclusion produced a negative line count for a profile.
    NegativeMultiplicity {
        profile: Vec<i64>,
        multiplicity: i64,
    },
    /// The line counts do not add up to the rank.
    WrongTotal { total: i64, rank: usize },
    /// No candidate basis passed verification.
    NoSplitting {
        attempts: u64,
        ray: Option<usize>,
        level: Option<i64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncompatibilityWitness {
    pub cone: usize,
    pub reason: IncompatibilityReason,
}

impl fmt::Display for IncompatibilityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cone {}: ", self.cone)?;
        match &self.reason {
            IncompatibilityReason::NegativeMultiplicity {
                profile,
                multiplicity,
            } => write!(f, "profile {profile:?} has multiplicity {multiplicity}"),
            IncompatibilityReason::WrongTotal { total, rank } => {
                write!(f, "profile multiplicities sum to {total}, rank is {rank}")
            }
            IncompatibilityReason::NoSplitting {
                attempts,
                ray,
                level,
            } => {
                write!(f, "no compatible basis found after {attempts} attempts")?;
                if let (Some(r), Some(j)) = (ray, level) {
                    write!(f, " (last failure: ray {r}, level {j})")?;
                }
                Ok(())
            }
        }
    }
}

/// Where to look first when choosing basis vectors.
#[derive(Clone, Debug, Default)]
pub struct Preference {
    pub subspace: Option<Subspace>,
    pub vectors: Vec<QVector>,
}

struct ConeData<'a> {
    bundle: &'a ToricBundle,
    rays: Vec<usize>,
    cache: HashMap<Vec<i64>, Subspace>,
}

impl ConeData<'_> {
    fn w(&mut self, p: &[i64]) -> Subspace {
        if let Some(s) = self.cache.get(p) {
            return s.clone();
        }
        let r = self.bundle.rank();
        let mut acc = Subspace::full(r);
        for (&ray, &j) in self.rays.iter().zip(p) {
            acc = acc
                .intersect(&self.bundle.value(ray, j))
                .expect("same ambient");
            if acc.is_zero() {
                break;
            }
        }
        self.cache.insert(p.to_vec(), acc.clone());
        acc
    }

    fn bumped(p: &[i64], k: usize) -> Vec<i64> {
        let mut q = p.to_vec();
        q[k] += 1;
        q
    }

    /// `sum_k W(p + e_k)`.
    fn deeper(&mut self, p: &[i64]) -> Subspace {
        let mut acc = Subspace::zero(self.bundle.rank());
        for k in 0..p.len() {
            let w = self.w(&Self::bumped(p, k));
            acc = acc.sum(&w).expect("same ambient");
        }
        acc
    }

    fn multiplicity(&mut self, p: &[i64]) -> i64 {
        let d = p.len();
        let mut m = 0i64;
        for mask in 0u32..(1 << d) {
            let q: Vec<i64> = p
                .iter()
                .enumerate()
                .map(|(k, &x)| x + i64::from((mask >> k) & 1))
                .collect();
            let dim = self.w(&q).dim() as i64;
            if mask.count_ones() % 2 == 0 {
                m += dim;
            } else {
                m -= dim;
            }
        }
        m
    }
}

fn random_combination(rng: &mut ChaCha8Rng, basis: &[QVector], r: usize) -> QVector {
    let mut v = vec![rat(0); r];
    for row in basis {
        let c = rat(rng.gen_range(-3..=3));
        for (x, y) in v.iter_mut().zip(row) {
            *x += &c * y;
        }
    }
    v
}

/// A compatible splitting of one maximal cone, or why none exists.
pub fn split_cone(
    bundle: &ToricBundle,
    cone: usize,
    pref: &Preference,
    seed: u64,
) -> std::result::Result<ConeSplitting, IncompatibilityWitness> {
    let fan = bundle.fan();
    let rays = fan.max_cones()[cone].clone();
    let r = bundle.rank();
    let mut data = ConeData {
        bundle,
        rays: rays.clone(),
        cache: HashMap::new(),
    };

    let grids: Vec<Vec<i64>> = rays
        .iter()
        .map(|&i| bundle.filtration(i).thresholds())
        .collect();
    let mut profiles: Vec<(Vec<i64>, usize)> = Vec::new();
    let mut total = 0i64;
    for p in grids.iter().multi_cartesian_product() {
        let p: Vec<i64> = p.into_iter().copied().collect();
        let m = data.multiplicity(&p);
        if m < 0 {
            return Err(IncompatibilityWitness {
                cone,
                reason: IncompatibilityReason::NegativeMultiplicity {
                    profile: p,
                    multiplicity: m,
                },
            });
        }
        total += m;
        if m > 0 {
            profiles.push((p, m as usize));
        }
    }
    if total != r as i64 {
        return Err(IncompatibilityWitness {
            cone,
            reason: IncompatibilityReason::WrongTotal { total, rank: r },
        });
    }
    profiles.sort_by(|(p, _), (q, _)| {
        let sp: i64 = p.iter().sum();
        let sq: i64 = q.iter().sum();
        sq.cmp(&sp).then_with(|| q.cmp(p))
    });

    let matrix = fan.cone_matrix(cone);
    let characters: Vec<IntPoint> = profiles
        .iter()
        .map(|(p, _)| {
            let b: Vec<BigInt> = p.iter().map(|&x| BigInt::from(x)).collect();
            solve_integer_system(&matrix, &b).expect("validated fans have unimodular cones")
        })
        .collect();

    let mut last_failure = (None, None);
    for attempt in 0..SEED_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((cone as u64) << 32) ^ attempt,
        );
        let mut chosen = Subspace::zero(r);
        let mut lines = Vec::with_capacity(r);
        let mut ok = true;
        for ((p, m), u) in profiles.iter().zip(&characters) {
            let w = data.w(p);
            let mut current = chosen.sum(&data.deeper(p)).expect("same ambient");
            let mut candidates: Vec<QVector> = Vec::new();
            if let Some(f) = &pref.subspace {
                candidates.extend(
                    w.intersect(f)
                        .expect("same ambient")
                        .basis()
                        .iter()
                        .cloned(),
                );
            }
            candidates.extend(pref.vectors.iter().filter(|v| w.contains(v)).cloned());
            if attempt == 0 {
                candidates.extend(w.basis().iter().cloned());
            }
            let mut picked = 0;
            let mut draws = 0;
            let mut idx = 0;
            while picked < *m {
                let c = if idx < candidates.len() {
                    idx += 1;
                    candidates[idx - 1].clone()
                } else if draws < RANDOM_DRAWS {
                    draws += 1;
                    random_combination(&mut rng, w.basis(), r)
                } else {
                    break;
                };
                if current.contains(&c) {
                    continue;
                }
                current = current.extended(&c);
                chosen = chosen.extended(&c);
                lines.push(SplitLine {
                    character: u.clone(),
                    profile: p.clone(),
                    vector: c,
                });
                picked += 1;
            }
            if picked < *m {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let splitting = ConeSplitting { cone, lines };
        match verify_splitting(bundle, &splitting) {
            None => return Ok(splitting),
            Some((ray, level)) => last_failure = (Some(ray), Some(level)),
        }
    }
    Err(IncompatibilityWitness {
        cone,
        reason: IncompatibilityReason::NoSplitting {
            attempts: SEED_ATTEMPTS,
            ray: last_failure.0,
            level: last_failure.1,
        },
    })
}

/// Checks `E^i(j) = sum { L_u : <u, v_i> >= j }` for every ray of the cone and
/// every level where the filtration can change; returns the first failure.
pub fn verify_splitting(bundle: &ToricBundle, s: &ConeSplitting) -> Option<(usize, i64)> {
    let r = bundle.rank();
    let fan = bundle.fan();
    if s.lines.len() != r {
        return Some((usize::MAX, 0));
    }
    let all: Vec<QVector> = s.basis();
    if !Subspace::span(&all, r)
        .map(|x| x.is_full())
        .unwrap_or(false)
    {
        return Some((usize::MAX, 0));
    }
    for &ray in &fan.max_cones()[s.cone] {
        let v = fan.ray(ray);
        let f = bundle.filtration(ray);
        let mut levels = f.thresholds();
        levels.push(levels.last().unwrap() + 1);
        for j in levels {
            let rows: Vec<QVector> = s
                .lines
                .iter()
                .filter(|l| pair_int(&l.character, v) >= BigInt::from(j))
                .map(|l| l.vector.clone())
                .collect();
            let span = Subspace::span(&rows, r).expect("fiber vectors");
            if span != f.value(j) {
                return Some((ray, j));
            }
        }
    }
    None
}

/// Splits every maximal cone, in cone order.
pub fn check_compatibility(bundle: &ToricBundle, seed: u64) -> Result<CharacterSheet> {
    check_compatibility_with(bundle, &Preference::default(), seed)
}

pub fn check_compatibility_with(
    bundle: &ToricBundle,
    pref: &Preference,
    seed: u64,
) -> Result<CharacterSheet> {
    let cones = (0..bundle.fan().max_cones().len())
        .map(|c| split_cone(bundle, c, pref, seed).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacterSheet { cones })
}

/// `u(σ)`, sorted.
pub fn associated_characters(
    bundle: &ToricBundle,
    cone: usize,
    seed: u64,
) -> Result<Vec<IntPoint>> {
    if cone >= bundle.fan().max_cones().len() {
        return Err(Error::InvalidFan(format!("no maximal cone {cone}")));
    }
    Ok(split_cone(bundle, cone, &Preference::default(), seed)?.characters())
}

impl fmt::Display for SplitLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "u={} vector={}",
            format_point(&self.character),
            crate::exactla::format_qvector(&self.vector)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{ipoint, qvec};
    use crate::fan::tests::p3;
    use crate::klyachko::tests::{blp2_sum, rank3, split2, tp2};
    use crate::klyachko::{line_bundle, twist_by_character, Filtration};

    fn cone_of(b: &ToricBundle, rays: &[usize]) -> usize {
        b.fan().max_cones().iter().position(|c| c == rays).unwrap()
    }

    #[test]
    fn tangent_plane_characters() {
        let t = tp2();
        let c = cone_of(&t, &[1, 2]);
        assert_eq!(
            associated_characters(&t, c, 0).unwrap(),
            vec![ipoint(&[0, 1]), ipoint(&[1, 0])]
        );
        let c = cone_of(&t, &[0, 2]);
        assert_eq!(
            associated_characters(&t, c, 0).unwrap(),
            vec![ipoint(&[-1, 0]), ipoint(&[-1, 1])]
        );
    }

    #[test]
    fn blowup_characters() {
        let b = blp2_sum();
        let c = cone_of(&b, &[0, 3]);
        assert_eq!(
            associated_characters(&b, c, 0).unwrap(),
            vec![ipoint(&[-1, -3]), ipoint(&[1, -1])]
        );
    }

    #[test]
    fn trivial_line_bundle() {
        let o = line_bundle(tp2().fan(), &[0, 0, 0]).unwrap();
        let sheet = check_compatibility(&o, 0).unwrap();
        for c in &sheet.cones {
            assert_eq!(c.characters(), vec![ipoint(&[0, 0])]);
        }
    }

    #[test]
    fn three_lines_on_one_cone_are_incompatible() {
        let f = p3();
        let full = Subspace::full(2);
        let lines = [qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])];
        let mut fs = vec![Filtration::trivial(2, 0)];
        for l in &lines {
            fs.push(Filtration::new(2, vec![(0, full.clone()), (1, Subspace::line(l))]).unwrap());
        }
        let b = ToricBundle::new(f, fs).unwrap();
        let c = cone_of(&b, &[1, 2, 3]);
        let err = split_cone(&b, c, &Preference::default(), 0).unwrap_err();
        assert_eq!(err.cone, c);
        assert!(matches!(
            err.reason,
            IncompatibilityReason::NegativeMultiplicity { .. }
        ));
        assert!(check_compatibility(&b, 0).is_err());
    }

    #[test]
    fn sheets_verify_and_marginals_match() {
        for b in [tp2(), split2(), rank3(), blp2_sum()] {
            let sheet = check_compatibility(&b, 3).unwrap();
            for s in &sheet.cones {
                assert_eq!(verify_splitting(&b, s), None);
                for &ray in &b.fan().max_cones()[s.cone] {
                    let v = b.fan().ray(ray);
                    let mut used: Vec<i64> = s
                        .lines
                        .iter()
                        .map(|l| i64::try_from(pair_int(&l.character, v)).unwrap())
                        .collect();
                    used.sort();
                    assert_eq!(used, b.filtration(ray).jumps());
                }
            }
        }
    }

    #[test]
    fn characters_do_not_depend_on_seed() {
        for b in [tp2(), rank3()] {
            let a = check_compatibility(&b, 0).unwrap();
            for seed in 1..5 {
                let s = check_compatibility(&b, seed).unwrap();
                for c in 0..a.cones.len() {
                    assert_eq!(a.characters(c), s.characters(c));
                }
            }
        }
    }

    #[test]
    fn twist_moves_characters() {
        let t = tp2();
        let tw = twist_by_character(&t, &[2, -1]).unwrap();
        for c in 0..3 {
            let before = associated_characters(&t, c, 0).unwrap();
            let mut shifted: Vec<IntPoint> =
                before.iter().map(|u| vec![&u[0] + 2, &u[1] - 1]).collect();
            shifted.sort();
            assert_eq!(associated_characters(&tw, c, 0).unwrap(), shifted);
        }
    }
}
