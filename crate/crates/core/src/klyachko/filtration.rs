use crate::error::{Error, Result};
use crate::exactla::{Rational, Subspace};

/// Leaves headroom for shifts, character pairings and sums over a fiber.
pub const MAX_THRESHOLD: u64 = 1 << 40;

/// A decreasing `Z`-filtration of `Q^r` in threshold form.
///
/// `steps = [(A_1, V_1), ..., (A_s, V_s)]` with `V_1 = Q^r`, the spaces
/// strictly decreasing and nonzero, the thresholds strictly increasing.
/// `E(j) = V_k` for `A_{k-1} < j <= A_k` and `E(j) = 0` for `j > A_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    rank: usize,
    steps: Vec<(i64, Subspace)>,
}

impl Filtration {
    pub fn new(rank: usize, steps: Vec<(i64, Subspace)>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidFiltration("rank must be positive".into()));
        }
        let Some((_, first)) = steps.first() else {
            return Err(Error::InvalidFiltration("no steps".into()));
        };
        if let Some((_, v)) = steps.iter().find(|(_, v)| v.ambient_dim() != rank) {
            return Err(Error::DimensionMismatch {
                expected: rank,
                found: v.ambient_dim(),
            });
        }
        if let Some((a, _)) = steps.iter().find(|(a, _)| a.unsigned_abs() > MAX_THRESHOLD) {
            return Err(Error::InvalidFiltration(format!(
                "threshold {a} exceeds {MAX_THRESHOLD} in absolute value"
            )));
        }
        if !first.is_full() {
            return Err(Error::InvalidFiltration(
                "the first step must be the whole fiber".into(),
            ));
        }
        for (k, w) in steps.windows(2).enumerate() {
            let ((a, v), (b, u)) = (&w[0], &w[1]);
            if a >= b {
                return Err(Error::InvalidFiltration(format!(
                    "thresholds must increase strictly (step {k}: {a}, step {}: {b})",
                    k + 1
                )));
            }
            if !u.is_subspace_of(v) || u.dim() == v.dim() {
                return Err(Error::InvalidFiltration(format!(
                    "step {} is not a proper subspace of step {k}",
                    k + 1
                )));
            }
        }
        if steps.last().unwrap().1.is_zero() {
            return Err(Error::InvalidFiltration(
                "the last step must be nonzero".into(),
            ));
        }
        Ok(Filtration { rank, steps })
    }

    /// The one-step filtration `Q^r` up to `a`, zero above.
    pub fn trivial(rank: usize, a: i64) -> Self {
        Filtration {
            rank,
            steps: vec![(a, Subspace::full(rank))],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn steps(&self) -> &[(i64, Subspace)] {
        &self.steps
    }

    pub fn thresholds(&self) -> Vec<i64> {
        self.steps.iter().map(|(a, _)| *a).collect()
    }

    pub fn value(&self, j: i64) -> Subspace {
        self.steps
            .iter()
            .find(|(a, _)| j <= *a)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| Subspace::zero(self.rank))
    }

    /// Jump multiset, ascending: `A_k` repeated `dim V_k - dim V_{k+1}` times.
    pub fn jumps(&self) -> Vec<i64> {
        self.jump_values(&Subspace::full(self.rank))
            .expect("same ambient")
    }

    /// Jumps of `j -> E(j) ∩ F`; there are `dim F` of them.
    pub fn jump_values(&self, f: &Subspace) -> Result<Vec<i64>> {
        let dims = self
            .steps
            .iter()
            .map(|(_, v)| v.intersect(f).map(|w| w.dim()))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(f.dim());
        for (k, (a, _)) in self.steps.iter().enumerate() {
            let next = dims.get(k + 1).copied().unwrap_or(0);
            out.extend(std::iter::repeat_n(*a, dims[k] - next));
        }
        Ok(out)
    }

    /// The distinct nonzero spaces `E(j) ∩ F` with their largest thresholds.
    pub fn restricted_steps(&self, f: &Subspace) -> Result<Vec<(i64, Subspace)>> {
        let mut out: Vec<(i64, Subspace)> = Vec::new();
        for (a, v) in &self.steps {
            let w = v.intersect(f)?;
            if w.is_zero() {
                break;
            }
            match out.last_mut() {
                Some(last) if last.1 == w => last.0 = *a,
                _ => out.push((*a, w)),
            }
        }
        Ok(out)
    }

    /// `max { j : e ∈ E(j) }`.
    pub fn max_level(&self, e: &[Rational]) -> Result<i64> {
        if e.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: e.len(),
            });
        }
        if crate::exactla::is_zero_vector(e) {
            return Err(Error::ZeroVector);
        }
        Ok(self
            .steps
            .iter()
            .rev()
            .find(|(_, v)| v.contains(e))
            .map(|(a, _)| *a)
            .expect("the first step is the whole fiber"))
    }

    pub fn shifted(&self, delta: i64) -> Filtration {
        Filtration {
            rank: self.rank,
            steps: self
                .steps
                .iter()
                .map(|(a, v)| (a + delta, v.clone()))
                .collect(),
        }
    }

    /// `E(j) ⊕ E'(j)` on `Q^{r + r'}`.
    pub fn direct_sum(&self, other: &Filtration) -> Filtration {
        let r = self.rank + other.rank;
        let mut levels: Vec<i64> = self.thresholds();
        levels.extend(other.thresholds());
        levels.sort_unstable();
        levels.dedup();
        let pad = |v: &Subspace, offset: usize| -> Vec<Vec<Rational>> {
            v.basis()
                .iter()
                .map(|row| {
                    let mut w = vec![Rational::from_integer(0.into()); r];
                    for (i, x) in row.iter().enumerate() {
                        w[offset + i] = x.clone();
                    }
                    w
                })
                .collect()
        };
        let steps = levels
            .into_iter()
            .map(|j| {
                let mut rows = pad(&self.value(j), 0);
                rows.extend(pad(&other.value(j), self.rank));
                (j, Subspace::span(&rows, r).expect("padded rows"))
            })
            .collect();
        Filtration { rank: r, steps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::qvec;

    #[test]
    fn invalid_steps() {
        let full = Subspace::full(2);
        let line = Subspace::line(&qvec(&[1, 0]));
        assert!(Filtration::new(2, vec![]).is_err());
        assert!(Filtration::new(2, vec![(0, line.clone())]).is_err());
        assert!(Filtration::new(2, vec![(1, full.clone()), (1, line.clone())]).is_err());
        assert!(Filtration::new(2, vec![(2, full.clone()), (1, line.clone())]).is_err());
        assert!(Filtration::new(2, vec![(0, full.clone()), (1, full.clone())]).is_err());
        assert!(Filtration::new(2, vec![(0, full.clone()), (1, Subspace::zero(2))]).is_err());
        assert!(Filtration::new(2, vec![(0, full), (1, line)]).is_ok());
    }

    #[test]
    fn direct_sum_of_lines() {
        let s = Filtration::trivial(1, 1).direct_sum(&Filtration::trivial(1, 0));
        assert_eq!(s.thresholds(), vec![0, 1]);
        assert_eq!(s.value(1), Subspace::line(&qvec(&[1, 0])));
        assert_eq!(s.jumps(), vec![0, 1]);
        let same = Filtration::trivial(1, 2).direct_sum(&Filtration::trivial(1, 2));
        assert_eq!(same, Filtration::trivial(2, 2));
    }

    #[test]
    fn levels_and_restriction() {
        let f = Filtration::new(
            2,
            vec![(0, Subspace::full(2)), (3, Subspace::line(&qvec(&[1, 1])))],
        )
        .unwrap();
        assert_eq!(f.max_level(&qvec(&[2, 2])).unwrap(), 3);
        assert_eq!(f.max_level(&qvec(&[1, 0])).unwrap(), 0);
        assert!(f.max_level(&qvec(&[0, 0])).is_err());
        let g = Subspace::line(&qvec(&[1, 0]));
        assert_eq!(f.restricted_steps(&g).unwrap(), vec![(0, g.clone())]);
        let h = Subspace::line(&qvec(&[1, 1]));
        assert_eq!(f.restricted_steps(&h).unwrap(), vec![(3, h)]);
    }
}
