//! Klyachko filtrations, toric bundles, and the compatibility condition.

mod compat;
mod filtration;

pub use compat::{
    associated_characters, check_compatibility, check_compatibility_with, split_cone,
    verify_splitting, CharacterSheet, ConeSplitting, IncompatibilityReason, IncompatibilityWitness,
    Preference, SplitLine,
};
pub use filtration::Filtration;

use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactla::{primitive_integer_direction, qvec, QVector, Rational, Subspace};
use crate::fan::Fan;

/// Where a block of basis vectors came from when a bundle is a direct sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub name: String,
    pub basis: Range<usize>,
}

/// An equivariant vector bundle given by one Klyachko filtration per ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricBundle {
    fan: Fan,
    rank: usize,
    filtrations: Vec<Filtration>,
    basis_names: Vec<String>,
    named_vectors: Vec<(String, QVector)>,
    summands: Vec<Summand>,
}

fn default_names(rank: usize) -> Vec<String> {
    (1..=rank).map(|i| format!("e{i}")).collect()
}

impl ToricBundle {
    /// The fan must pass [`Fan::validate`]; the compatibility condition is
    /// checked separately by [`check_compatibility`].
    pub fn new(fan: Fan, filtrations: Vec<Filtration>) -> Result<Self> {
        fan.ensure_valid()?;
        if filtrations.len() != fan.num_rays() {
            return Err(Error::InvalidFiltration(format!(
                "{} filtrations for {} rays",
                filtrations.len(),
                fan.num_rays()
            )));
        }
        let rank = filtrations[0].rank();
        if let Some((i, f)) = filtrations
            .iter()
            .enumerate()
            .find(|(_, f)| f.rank() != rank)
        {
            return Err(Error::InvalidFiltration(format!(
                "filtration {i} has rank {}, expected {rank}",
                f.rank()
            )));
        }
        Ok(ToricBundle {
            fan,
            rank,
            filtrations,
            basis_names: default_names(rank),
            named_vectors: Vec::new(),
            summands: Vec::new(),
        })
    }

    pub fn with_basis_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: names.len(),
            });
        }
        self.basis_names = names;
        Ok(self)
    }

    /// Names used for labelling any vector parallel to one of these.
    pub fn with_named_vectors(mut self, named: Vec<(String, QVector)>) -> Result<Self> {
        for (name, v) in &named {
            if v.len() != self.rank {
                return Err(Error::DimensionMismatch {
                    expected: self.rank,
                    found: v.len(),
                });
            }
            if v.iter().all(Zero::is_zero) {
                return Err(Error::InvalidFiltration(format!(
                    "named vector {name} is zero"
                )));
            }
        }
        self.named_vectors = named;
        Ok(self)
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn filtrations(&self) -> &[Filtration] {
        &self.filtrations
    }

    pub fn filtration(&self, ray: usize) -> &Filtration {
        &self.filtrations[ray]
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    pub fn named_vectors(&self) -> &[(String, QVector)] {
        &self.named_vectors
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    /// `E^i(j)`.
    pub fn value(&self, ray: usize, j: i64) -> Subspace {
        self.filtrations[ray].value(j)
    }

    /// A representative for the line through `v`: a named vector if one is
    /// parallel, otherwise the primitive integer vector with positive leading entry.
    pub fn representative(&self, v: &[Rational]) -> Result<QVector> {
        if let Some((_, w)) = self.named_vectors.iter().find(|(_, w)| parallel(w, v)) {
            return Ok(w.clone());
        }
        let p = primitive_integer_direction(v)?;
        let flip = p
            .iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.is_negative());
        Ok(p.into_iter()
            .map(|x| Rational::from_integer(if flip { -x } else { x }))
            .collect())
    }

    /// A human-readable name for the line through `v`, such as `v0` or `e1-e3`.
    pub fn label(&self, v: &[Rational]) -> String {
        if let Some((name, _)) = self.named_vectors.iter().find(|(_, w)| parallel(w, v)) {
            return name.clone();
        }
        let Ok(p) = primitive_integer_direction(v) else {
            return "0".into();
        };
        let flip = p
            .iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.is_negative());
        let mut out = String::new();
        for (c, name) in p.iter().zip(&self.basis_names) {
            let c = if flip { -c.clone() } else { c.clone() };
            if c.is_zero() {
                continue;
            }
            if c.is_negative() {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            let a = c.abs();
            if !a.is_one() {
                out.push_str(&a.to_string());
            }
            out.push_str(name);
        }
        out
    }

    /// The summand containing `v`, when the bundle was built by [`direct_sum`].
    pub fn summand_of(&self, v: &[Rational]) -> Option<&Summand> {
        self.summands.iter().find(|s| {
            v.iter()
                .enumerate()
                .all(|(i, x)| x.is_zero() || s.basis.contains(&i))
        })
    }
}

fn parallel(a: &[Rational], b: &[Rational]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(k) = a.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if b[k].is_zero() {
        return false;
    }
    let s = &b[k] / &a[k];
    a.iter().zip(b).all(|(x, y)| &(x * &s) == y)
}

/// `O(sum a_i D_i)`: rank one, threshold `a_i` on ray `i`.
pub fn line_bundle(fan: &Fan, a: &[i64]) -> Result<ToricBundle> {
    if a.len() != fan.num_rays() {
        return Err(Error::DimensionMismatch {
            expected: fan.num_rays(),
            found: a.len(),
        });
    }
    let filtrations = a.iter().map(|&x| Filtration::trivial(1, x)).collect();
    let name = divisor_name(a);
    let mut b = ToricBundle::new(fan.clone(), filtrations)?;
    b.summands = vec![Summand { name, basis: 0..1 }];
    Ok(b)
}

pub fn divisor_name(a: &[i64]) -> String {
    let mut out = String::new();
    for (i, &c) in a.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if c < 0 {
            out.push('-');
        } else if !out.is_empty() {
            out.push('+');
        }
        if c.abs() != 1 {
            out.push_str(&c.abs().to_string());
        }
        out.push_str(&format!("D{i}"));
    }
    if out.is_empty() {
        out.push('0');
    }
    format!("O({out})")
}

/// Block-diagonal direct sum; the fiber is `Q^{r1} + Q^{r2}`.
pub fn direct_sum(b1: &ToricBundle, b2: &ToricBundle) -> Result<ToricBundle> {
    if b1.fan != b2.fan {
        return Err(Error::InvalidFan(
            "direct sum of bundles on different fans".into(),
        ));
    }
    let filtrations = b1
        .filtrations
        .iter()
        .zip(&b2.filtrations)
        .map(|(f, g)| f.direct_sum(g))
        .collect();
    let (r1, r2) = (b1.rank, b2.rank);
    let mut b = ToricBundle::new(b1.fan.clone(), filtrations)?;
    let blocks = |bundle: &ToricBundle, offset: usize| -> Vec<Summand> {
        if bundle.summands.is_empty() {
            vec![Summand {
                name: format!("summand{}", offset),
                basis: offset..offset + bundle.rank,
            }]
        } else {
            bundle
                .summands
                .iter()
                .map(|s| Summand {
                    name: s.name.clone(),
                    basis: s.basis.start + offset..s.basis.end + offset,
                })
                .collect()
        }
    };
    b.summands = blocks(b1, 0);
    b.summands.extend(blocks(b2, r1));
    let embed = |v: &QVector, offset: usize| -> QVector {
        let mut w = vec![Rational::zero(); r1 + r2];
        for (i, x) in v.iter().enumerate() {
            w[offset + i] = x.clone();
        }
        w
    };
    b.named_vectors = b1
        .named_vectors
        .iter()
        .map(|(n, v)| (n.clone(), embed(v, 0)))
        .chain(
            b2.named_vectors
                .iter()
                .map(|(n, v)| (n.clone(), embed(v, r1))),
        )
        .collect();
    Ok(b)
}

/// The tangent bundle: on ray `i`, `Q^d` up to level 0 and `<v_i>` at level 1.
pub fn tangent_bundle(fan: &Fan) -> Result<ToricBundle> {
    let d = fan.dim();
    let filtrations = fan
        .rays()
        .iter()
        .map(|v| {
            Filtration::new(
                d,
                vec![(0, Subspace::full(d)), (1, Subspace::line(&qvec(v)))],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let named = fan
        .rays()
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("v{i}"), qvec(v)))
        .collect();
    ToricBundle::new(fan.clone(), filtrations)?.with_named_vectors(named)
}

fn shift_all(b: &ToricBundle, shifts: &[i64]) -> ToricBundle {
    let mut out = b.clone();
    out.filtrations = b
        .filtrations
        .iter()
        .zip(shifts)
        .map(|(f, &s)| f.shifted(s))
        .collect();
    out
}

/// Tensoring by the character `u`: thresholds on ray `i` shift by `<u, v_i>`.
pub fn twist_by_character(b: &ToricBundle, u: &[i64]) -> Result<ToricBundle> {
    if u.len() != b.fan.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.fan.dim(),
            found: u.len(),
        });
    }
    let shifts = b
        .fan
        .rays()
        .iter()
        .map(|v| {
            let s: BigInt = u.iter().zip(v).map(|(&a, &x)| BigInt::from(a) * x).sum();
            s.to_i64()
                .ok_or_else(|| Error::Unsupported("threshold shift overflows i64".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(shift_all(b, &shifts))
}

/// Tensoring by `O(sum a_i D_i)`: thresholds on ray `i` shift by `a_i`.
pub fn twist_by_divisor(b: &ToricBundle, a: &[i64]) -> Result<ToricBundle> {
    if a.len() != b.fan.num_rays() {
        return Err(Error::DimensionMismatch {
            expected: b.fan.num_rays(),
            found: a.len(),
        });
    }
    Ok(shift_all(b, a))
}
