//! Slopes, the flat criterion for (semi)stability, and restrictions to
//! invariant curves.

mod restrict;
mod weights;

pub use restrict::{restrict_to_curve, restrict_with, Restriction, RestrictionPair};
pub use weights::{
    facet_volumes, validate_polarization, weights_from_divisor, weights_from_integer_divisor,
    Polarization, PolarizationSource,
};

use std::cmp::Ordering;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactla::{rat, QVector, Rational, Subspace};
use crate::fan::Fan;
use crate::klyachko::{check_compatibility, ToricBundle};
use crate::matroid::{build_lattice, enumerate_flats, ground_set, Flat, GroundSet};
use crate::parliament::HPolytope;

/// `c_1(F)`: on ray `i`, the sum of the jumps of `E^i(j) ∩ F`.
pub fn c1(b: &ToricBundle, f: &Subspace) -> Result<Vec<BigInt>> {
    if f.is_zero() {
        return Err(Error::ZeroSubspace);
    }
    b.filtrations()
        .iter()
        .map(|filt| Ok(filt.jump_values(f)?.into_iter().map(BigInt::from).sum()))
        .collect()
}

/// `(c_1(F) · t) / rank F`.
pub fn slope(b: &ToricBundle, f: &Subspace, pol: &Polarization) -> Result<Rational> {
    let c = c1(b, f)?;
    let total = c
        .into_iter()
        .zip(&pol.weights)
        .fold(rat(0), |acc, (a, t)| acc + Rational::from_integer(a) * t);
    Ok(total / rat(f.dim() as i64))
}

/// Compares `sum c_i t_i` of two polytopes on the same fan.
pub fn compare_average_polytopes(
    p1: &HPolytope,
    p2: &HPolytope,
    pol: &Polarization,
) -> Result<Ordering> {
    if p1.normals() != p2.normals() {
        return Err(Error::InvalidFan("polytopes live on different fans".into()));
    }
    if p1.bounds().len() != pol.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: p1.bounds().len(),
            found: pol.weights.len(),
        });
    }
    let value = |p: &HPolytope| {
        p.bounds()
            .iter()
            .zip(&pol.weights)
            .fold(rat(0), |acc, (c, t)| acc + c * t)
    };
    Ok(value(p1).cmp(&value(p2)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSlope {
    pub flat: Flat,
    pub labels: Vec<String>,
    pub slope: Rational,
    /// How the flat's slope compares with `μ(E)`.
    pub relation: Ordering,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub mu: Rational,
    pub stable: bool,
    pub semistable: bool,
    pub flat_slopes: Vec<FlatSlope>,
    /// Largest slope, then largest rank, then first in index order.
    pub witness: Option<FlatSlope>,
    pub ground_set: GroundSet,
}

impl StabilityReport {
    pub fn max_flat_slope(&self) -> Option<&Rational> {
        self.witness.as_ref().map(|w| &w.slope)
    }
}

/// Decides (semi)stability by comparing every proper nonzero flat with `μ(E)`.
pub fn check_stability(b: &ToricBundle, pol: &Polarization, seed: u64) -> Result<StabilityReport> {
    validate_polarization(b.fan(), &pol.weights)?;
    check_compatibility(b, seed)?;
    let g = ground_set(b)?;
    let full = Subspace::full(b.rank());
    let mu = slope(b, &full, pol)?;
    let mut flat_slopes = Vec::new();
    for flat in enumerate_flats(&g) {
        if !flat.is_proper(&g) {
            continue;
        }
        let s = slope(b, &flat.span, pol)?;
        flat_slopes.push(FlatSlope {
            labels: flat.indices.iter().map(|&i| b.label(g.vector(i))).collect(),
            relation: s.cmp(&mu),
            slope: s,
            flat,
        });
    }
    let stable = flat_slopes.iter().all(|f| f.relation == Ordering::Less);
    let semistable = flat_slopes.iter().all(|f| f.relation != Ordering::Greater);
    let witness = flat_slopes
        .iter()
        .max_by(|a, b| {
            a.slope
                .cmp(&b.slope)
                .then(a.flat.rank().cmp(&b.flat.rank()))
                .then_with(|| b.flat.indices.cmp(&a.flat.indices))
        })
        .cloned();
    Ok(StabilityReport {
        mu,
        stable,
        semistable,
        flat_slopes,
        witness,
        ground_set: g,
    })
}

/// `max t_i <= (sum t_i) / d` (strictly, when `strict`), for fans without opposite rays.
pub fn tangent_weight_condition(fan: &Fan, pol: &Polarization, strict: bool) -> Result<bool> {
    if fan.has_opposite_rays() {
        return Err(Error::Unsupported(
            "the fan has a pair of opposite rays".into(),
        ));
    }
    let total = pol.weights.iter().fold(rat(0), |a, t| a + t);
    let bound = total / rat(fan.dim() as i64);
    let max = pol.weights.iter().max().cloned().unwrap_or_else(|| rat(0));
    Ok(if strict { max < bound } else { max <= bound })
}

/// Largest slope over randomly drawn proper subspaces, `samples` per dimension.
///
/// Draws mix ground-set vectors, lattice-element basis rows and random small
/// integer vectors, so special subspaces are hit as well as generic ones.
/// `None` when nothing was sampled.
pub fn brute_force_max_slope(
    b: &ToricBundle,
    pol: &Polarization,
    samples: usize,
    seed: u64,
) -> Result<Option<Rational>> {
    let r = b.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ground_set(b)?;
    let lattice_rows: Vec<QVector> = build_lattice(b, None)?
        .elements()
        .iter()
        .flat_map(|s| s.basis().iter().cloned())
        .collect();
    let mut best: Option<Rational> = None;
    for k in 1..r {
        for _ in 0..samples {
            let mut rows = Vec::with_capacity(k);
            for _ in 0..k {
                let v: QVector = match rng.gen_range(0..3) {
                    0 => g.vectors().choose(&mut rng).unwrap().clone(),
                    1 => lattice_rows.choose(&mut rng).unwrap().clone(),
                    _ => (0..r).map(|_| rat(rng.gen_range(-4..=4))).collect(),
                };
                rows.push(v);
            }
            let f = Subspace::span(&rows, r)?;
            if f.is_zero() || f.is_full() {
                continue;
            }
            let s = slope(b, &f, pol)?;
            if best.as_ref().is_none_or(|x| &s > x) {
                best = Some(s);
            }
        }
    }
    Ok(best)
}

/// `μ(E)` alone.
pub fn bundle_slope(b: &ToricBundle, pol: &Polarization) -> Result<Rational> {
    slope(b, &Subspace::full(b.rank()), pol)
}
