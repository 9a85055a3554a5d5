//! The intersection lattice `L(E)`, the ground set `G(E)`, and its flats.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactla::{pair_int, primitive_integer_direction, rat, QVector, Rational, Subspace};
use crate::klyachko::{split_cone, ConeSplitting, Preference, ToricBundle};

/// Distinct intersections of filtration steps, sorted by dimension then echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceLattice {
    rank: usize,
    elements: Vec<Subspace>,
}

impl SubspaceLattice {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, s: &Subspace) -> Option<usize> {
        self.elements.binary_search(s).ok()
    }
}

/// `L(E)`, or `L_σ(E)` when `rays` is the ray set of a cone.
pub fn build_lattice(b: &ToricBundle, rays: Option<&[usize]>) -> Result<SubspaceLattice> {
    let all: Vec<usize> = (0..b.fan().num_rays()).collect();
    let rays = rays.unwrap_or(&all);
    if rays.is_empty() {
        return Err(Error::InvalidFiltration("empty ray subset".into()));
    }
    let r = b.rank();
    let mut current: BTreeSet<Subspace> = BTreeSet::from([Subspace::full(r)]);
    for &i in rays {
        let f = b
            .filtrations()
            .get(i)
            .ok_or_else(|| Error::InvalidFan(format!("no ray {i}")))?;
        let mut next = BTreeSet::new();
        for w in &current {
            next.insert(Subspace::zero(r));
            for (_, v) in f.steps() {
                next.insert(w.intersect(v)?);
            }
        }
        current = next;
    }
    Ok(SubspaceLattice {
        rank: r,
        elements: current.into_iter().collect(),
    })
}

/// Output of the ground-set construction: the vectors and, for each, the lattice element
/// whose step appended it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    rank: usize,
    vectors: Vec<QVector>,
    step_trace: Vec<Subspace>,
}

impl GroundSet {
    pub fn from_vectors(rank: usize, vectors: Vec<QVector>) -> Self {
        let step_trace = vectors.iter().map(|v| Subspace::line(v)).collect();
        GroundSet {
            rank,
            vectors,
            step_trace,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vectors(&self) -> &[QVector] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &QVector {
        &self.vectors[i]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn step_trace(&self) -> &[Subspace] {
        &self.step_trace
    }

    /// Indices of the vectors lying in `s`.
    pub fn inside(&self, s: &Subspace) -> Vec<usize> {
        (0..self.vectors.len())
            .filter(|&i| s.contains(&self.vectors[i]))
            .collect()
    }

    pub fn span_of(&self, indices: &[usize]) -> Subspace {
        let rows: Vec<QVector> = indices.iter().map(|&i| self.vectors[i].clone()).collect();
        Subspace::span(&rows, self.rank).expect("ground-set vectors share the fiber")
    }

    /// Replaces every vector by the bundle's preferred representative of its line.
    pub fn normalized_for(mut self, b: &ToricBundle) -> Self {
        for v in self.vectors.iter_mut() {
            *v = b.representative(v).expect("ground-set vectors are nonzero");
        }
        self
    }
}

/// Knobs for the ground-set construction. The defaults give the canonical run.
#[derive(Clone, Debug, Default)]
pub struct GroundSetOptions {
    /// Prefer complement vectors inside this subspace.
    pub preference: Option<Subspace>,
    /// Shuffle the traversal order inside each dimension with this seed.
    pub shuffle_seed: Option<u64>,
    /// Draw complement vectors as random combinations with this seed.
    pub random_complements: Option<u64>,
}

fn primitive(v: &[Rational]) -> QVector {
    let p = primitive_integer_direction(v).expect("nonzero complement vector");
    let flip = p
        .iter()
        .find(|x| !num_traits::Zero::is_zero(*x))
        .is_some_and(num_traits::Signed::is_negative);
    p.into_iter()
        .map(|x| Rational::from_integer(if flip { -x } else { x }))
        .collect()
}

/// The ground-set construction in its canonical form.
pub fn ground_set_of_lattice(lattice: &SubspaceLattice) -> GroundSet {
    ground_set_of_lattice_with(lattice, &GroundSetOptions::default())
}

pub fn ground_set_of_lattice_with(lattice: &SubspaceLattice, opts: &GroundSetOptions) -> GroundSet {
    let r = lattice.rank;
    let mut order: Vec<&Subspace> = lattice.elements.iter().filter(|v| !v.is_zero()).collect();
    if let Some(seed) = opts.shuffle_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        order.sort_by_key(|v| v.dim());
    }
    let mut rng = opts.random_complements.map(ChaCha8Rng::seed_from_u64);
    let mut vectors: Vec<QVector> = Vec::new();
    let mut trace = Vec::new();
    for v in order {
        let inside: Vec<QVector> = vectors.iter().filter(|g| v.contains(g)).cloned().collect();
        let mut span = Subspace::span(&inside, r).expect("fiber vectors");
        if span.dim() == v.dim() {
            continue;
        }
        let mut candidates: Vec<QVector> = Vec::new();
        if let Some(f) = &opts.preference {
            candidates.extend(
                v.intersect(f)
                    .expect("same ambient")
                    .basis()
                    .iter()
                    .cloned(),
            );
        }
        if rng.is_none() {
            candidates.extend(v.basis().iter().cloned());
        }
        let mut idx = 0;
        while span.dim() < v.dim() {
            let c = if idx < candidates.len() {
                idx += 1;
                candidates[idx - 1].clone()
            } else {
                let rng = rng.as_mut().expect("echelon rows span V");
                let mut c = vec![rat(0); r];
                for row in v.basis() {
                    let k = rat(rng.gen_range(-3..=3));
                    for (x, y) in c.iter_mut().zip(row) {
                        *x += &k * y;
                    }
                }
                c
            };
            if span.contains(&c) {
                continue;
            }
            span = span.extended(&c);
            vectors.push(primitive(&c));
            trace.push(v.clone());
        }
    }
    GroundSet {
        rank: r,
        vectors,
        step_trace: trace,
    }
}

/// `G(E)` with the bundle's preferred representatives.
pub fn ground_set(b: &ToricBundle) -> Result<GroundSet> {
    Ok(ground_set_of_lattice(&build_lattice(b, None)?).normalized_for(b))
}

/// A closure-closed subset of the ground set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flat {
    pub indices: Vec<usize>,
    pub span: Subspace,
}

impl Flat {
    pub fn rank(&self) -> usize {
        self.span.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self, g: &GroundSet) -> bool {
        self.indices.len() == g.len()
    }

    /// Nonempty and not the whole ground set.
    pub fn is_proper(&self, g: &GroundSet) -> bool {
        !self.is_empty() && !self.is_full(g)
    }
}

pub fn closure(g: &GroundSet, s: &[usize]) -> Result<Flat> {
    if let Some(&bad) = s.iter().find(|&&i| i >= g.len()) {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            found: bad,
        });
    }
    let span = g.span_of(s);
    Ok(Flat {
        indices: g.inside(&span),
        span,
    })
}

/// Every flat, sorted by rank then indices.
pub fn enumerate_flats(g: &GroundSet) -> Vec<Flat> {
    let bottom = closure(g, &[]).expect("no indices");
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::from([bottom.indices.clone()]);
    let mut flats = vec![bottom.clone()];
    let mut queue = VecDeque::from([bottom]);
    while let Some(f) = queue.pop_front() {
        for e in 0..g.len() {
            if f.indices.contains(&e) {
                continue;
            }
            let mut s = f.indices.clone();
            s.push(e);
            let c = closure(g, &s).expect("valid indices");
            if seen.insert(c.indices.clone()) {
                flats.push(c.clone());
                queue.push_back(c);
            }
        }
    }
    flats.sort_by(|a, b| {
        a.rank()
            .cmp(&b.rank())
            .then_with(|| a.indices.cmp(&b.indices))
    });
    flats
}

/// Sorted `(rank, size, #flats below, #flats above)`: equal for isomorphic flat lattices.
pub fn lattice_signature(flats: &[Flat]) -> Vec<(usize, usize, usize, usize)> {
    let subset = |a: &Flat, b: &Flat| a.indices.iter().all(|i| b.indices.contains(i));
    let mut sig: Vec<_> = flats
        .iter()
        .map(|f| {
            let below = flats.iter().filter(|g| subset(g, f)).count();
            let above = flats.iter().filter(|g| subset(f, g)).count();
            (f.rank(), f.indices.len(), below, above)
        })
        .collect();
    sig.sort();
    sig
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatCompatibility {
    pub compatible: bool,
    /// Compatible bases built with preference for the flat's span, one per cone.
    pub bases: Vec<ConeSplitting>,
    /// First cone whose basis meets the span in the wrong number of vectors.
    pub failing_cone: Option<usize>,
}

fn preferred_splittings(
    b: &ToricBundle,
    pref: &Preference,
    seed: u64,
) -> Result<Vec<ConeSplitting>> {
    (0..b.fan().max_cones().len())
        .map(|c| split_cone(b, c, pref, seed).map_err(Error::from))
        .collect()
}

/// Whether every cone has a compatible basis with exactly `rank(f)` vectors in `span(f)`.
pub fn is_compatible_flat(
    b: &ToricBundle,
    g: &GroundSet,
    f: &Flat,
    seed: u64,
) -> Result<FlatCompatibility> {
    let pref = Preference {
        subspace: Some(f.span.clone()),
        vectors: f.indices.iter().map(|&i| g.vector(i).clone()).collect(),
    };
    let bases = preferred_splittings(b, &pref, seed)?;
    let failing_cone = bases
        .iter()
        .find(|s| {
            s.lines
                .iter()
                .filter(|l| f.span.contains(&l.vector))
                .count()
                != f.rank()
        })
        .map(|s| s.cone);
    Ok(FlatCompatibility {
        compatible: failing_cone.is_none(),
        bases,
        failing_cone,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubbundleCheck {
    /// `span(G ∩ F) = F` for the `F`-preferring ground-set construction.
    pub ground_set_spans: bool,
    pub compatible_flat: bool,
    /// The basis vectors inside `F` split the filtrations `E^i(j) ∩ F`.
    pub restricted_split: bool,
    pub flat: Flat,
}

impl SubbundleCheck {
    pub fn holds(&self) -> bool {
        self.ground_set_spans && self.compatible_flat && self.restricted_split
    }
}

/// Whether `F` underlies an equivariant subbundle.
pub fn is_subbundle(b: &ToricBundle, f: &Subspace, seed: u64) -> Result<SubbundleCheck> {
    if f.is_zero() {
        return Err(Error::ZeroSubspace);
    }
    if f.ambient_dim() != b.rank() {
        return Err(Error::DimensionMismatch {
            expected: b.rank(),
            found: f.ambient_dim(),
        });
    }
    let lattice = build_lattice(b, None)?;
    let g = ground_set_of_lattice_with(
        &lattice,
        &GroundSetOptions {
            preference: Some(f.clone()),
            ..Default::default()
        },
    );
    let inside = g.inside(f);
    let ground_set_spans = g.span_of(&inside) == *f;
    let flat = closure(&g, &inside)?;
    let compat = is_compatible_flat(b, &g, &flat, seed)?;
    let restricted_split = compat.compatible
        && compat.bases.iter().all(|s| {
            let lines: Vec<_> = s.lines.iter().filter(|l| f.contains(&l.vector)).collect();
            b.fan().max_cones()[s.cone].iter().all(|&ray| {
                let v = b.fan().ray(ray);
                let filt = b.filtration(ray);
                let mut levels = filt.thresholds();
                levels.push(levels.last().unwrap() + 1);
                levels.into_iter().all(|j| {
                    let rows: Vec<QVector> = lines
                        .iter()
                        .filter(|l| pair_int(&l.character, v) >= j.into())
                        .map(|l| l.vector.clone())
                        .collect();
                    let span = Subspace::span(&rows, b.rank()).expect("fiber vectors");
                    Ok(span) == filt.value(j).intersect(f)
                })
            })
        });
    Ok(SubbundleCheck {
        ground_set_spans,
        compatible_flat: compat.compatible,
        restricted_split,
        flat,
    })
}
