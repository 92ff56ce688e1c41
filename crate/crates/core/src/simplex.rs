//! Probability vectors on the simplex, majorization, and T-transform chains.
//!
//! `y` *majorizes* `x` (written `x ≺ y`) when every leading partial sum of the
//! decreasingly sorted `x` is at most the matching partial sum of the sorted
//! `y`. Equivalently, every tail sum of `x` is at least the matching tail sum of
//! `y`: `y` is more peaked.
//!
//! When `x ≺ y` and both are sorted, `x` is reachable from `y` by a finite
//! product of T-transforms, each of which mixes only two coordinates. The
//! constructive chain from [`ttransform_chain`] is what the deterministic stage
//! of the optimal conversion protocol is built from.

use crate::tolerance::{CLAMP, COMPARE};
use crate::{Error, Result};

/// A point of the probability simplex: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    /// Validates `entries` as a probability vector.
    ///
    /// Entries in `[-1e-12, 0)` are clamped to zero; anything more negative is
    /// rejected, as is a total that misses one by more than `1e-9`.
    pub fn new(mut entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        for (index, e) in entries.iter_mut().enumerate() {
            if !e.is_finite() || *e < -CLAMP {
                return Err(Error::NegativeEntry { index, value: *e });
            }
            if *e < 0.0 {
                *e = 0.0;
            }
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > COMPARE {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self { entries })
    }

    /// Divides nonnegative weights by their total.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::NotNormalized { total });
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// The uniform vector `(1/d, …, 1/d)`.
    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            entries: vec![1.0 / d as f64; d],
        })
    }

    /// The vertex with all mass on coordinate `index` (0-based).
    pub fn vertex(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(Error::Index { index: index + 1, len: d });
        }
        let mut entries = vec![0.0; d];
        entries[index] = 1.0;
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    /// Entries in non-increasing order. The sort is stable, so tied entries
    /// keep their original relative order.
    pub fn sorted_desc(&self) -> ProbVector {
        let mut entries = self.entries.clone();
        sort_desc(&mut entries);
        ProbVector { entries }
    }

    /// `Σ_{i=l}^{d} x_i^↓` for a 1-based rank `l ∈ [1, d]`.
    pub fn tail_sum(&self, l: usize) -> Result<f64> {
        let d = self.dim();
        if l == 0 || l > d {
            return Err(Error::Index { index: l, len: d });
        }
        let sorted = self.sorted_desc();
        Ok(sorted.entries[l - 1..].iter().sum())
    }

    /// All tail sums `[tail_sum(1), …, tail_sum(d)]` of the sorted vector.
    pub fn tail_sums(&self) -> Vec<f64> {
        tail_sums_of_sorted(&self.sorted_desc().entries)
    }

    /// Whether `self` majorizes `other` (`other ≺ self`) with `1e-9` slack.
    pub fn majorizes(&self, other: &ProbVector) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let y = self.sorted_desc();
        let x = other.sorted_desc();
        let mut sx = 0.0;
        let mut sy = 0.0;
        for (a, b) in x.entries.iter().zip(&y.entries) {
            sx += a;
            sy += b;
            if sx > sy + COMPARE {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Applies the permutation `perm`: entry `k` of the result is `self[perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<ProbVector> {
        if perm.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: perm.len(),
            });
        }
        let entries = perm
            .iter()
            .map(|&p| {
                self.entries
                    .get(p)
                    .copied()
                    .ok_or(Error::Index { index: p + 1, len: perm.len() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbVector { entries })
    }

    /// The convex combination `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &ProbVector, lambda: f64) -> Result<ProbVector> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Parameter(format!("mixing weight {lambda} outside [0, 1]")));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Ok(ProbVector { entries })
    }

    /// Pads with zero entries up to dimension `d`.
    pub fn padded(&self, d: usize) -> ProbVector {
        let mut entries = self.entries.clone();
        if d > entries.len() {
            entries.resize(d, 0.0);
        }
        ProbVector { entries }
    }
}

pub(crate) fn sort_desc(v: &mut [f64]) {
    v.sort_by(|a, b| b.total_cmp(a));
}

pub(crate) fn tail_sums_of_sorted(sorted: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; sorted.len()];
    let mut acc = 0.0;
    for i in (0..sorted.len()).rev() {
        acc += sorted[i];
        tails[i] = acc;
    }
    tails
}

/// A two-coordinate doubly stochastic map.
///
/// Replaces `(v_i, v_j)` with `(t·v_i + (1−t)·v_j, (1−t)·v_i + t·v_j)`.
/// Coordinates are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTransform {
    pub i: usize,
    pub j: usize,
    pub t: f64,
}

impl TTransform {
    pub fn new(i: usize, j: usize, t: f64) -> Result<Self> {
        if i == j {
            return Err(Error::Parameter(format!("T-transform needs distinct indices, got {i} twice")));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!("T-transform weight {t} outside [0, 1]")));
        }
        Ok(Self { i, j, t })
    }

    /// Applies the transform in place. Panics if an index is out of bounds.
    pub fn apply(&self, v: &mut [f64]) {
        let (a, b) = (v[self.i], v[self.j]);
        v[self.i] = self.t * a + (1.0 - self.t) * b;
        v[self.j] = (1.0 - self.t) * a + self.t * b;
    }
}

/// Applies a chain in product order: `T_1 T_2 ⋯ T_k v`, so the last element
/// acts first.
pub fn apply_chain(chain: &[TTransform], v: &mut [f64]) {
    for t in chain.iter().rev() {
        t.apply(v);
    }
}

/// Decomposes `x ≺ y` into T-transforms with `x = T_1 T_2 ⋯ T_k y`.
///
/// Both vectors must be sorted non-increasingly. At most `d − 1` transforms
/// are produced; each one equalizes at least one further coordinate with `x`.
///
/// The chain is built from `y` towards `x`. Each step takes the largest index
/// `j` where the running vector exceeds `x` and the first index `k > j` where
/// it falls short, then moves `min(excess, deficit)` from `j` to `k`. This
/// keeps the running vector sorted and majorizing `x`.
pub fn ttransform_chain(x: &ProbVector, y: &ProbVector) -> Result<Vec<TTransform>> {
    let d = x.dim();
    if y.dim() != d {
        return Err(Error::Dimension { expected: d, found: y.dim() });
    }
    for (name, v) in [("x", x), ("y", y)] {
        if v.entries.windows(2).any(|w| w[1] > w[0] + COMPARE) {
            return Err(Error::Precondition(format!("{name} is not sorted non-increasingly")));
        }
    }
    if !y.majorizes(x)? {
        return Err(Error::Precondition("y does not majorize x".into()));
    }

    let target = x.entries();
    let mut v = y.entries.clone();
    let mut generated = Vec::new();
    while let Some(j) = (0..d).rev().find(|&j| v[j] > target[j] + COMPARE) {
        let k = (j + 1..d)
            .find(|&k| v[k] < target[k] - COMPARE)
            .or_else(|| {
                (j + 1..d)
                    .filter(|&k| v[k] < target[k])
                    .max_by(|&a, &b| (target[a] - v[a]).total_cmp(&(target[b] - v[b])))
            })
            .ok_or_else(|| Error::Precondition("no deficit coordinate after excess".into()))?;
        let delta = (v[j] - target[j]).min(target[k] - v[k]);
        let gap = v[j] - v[k];
        let t = (1.0 - delta / gap).clamp(0.0, 1.0);
        let step = TTransform::new(j, k, t)?;
        step.apply(&mut v);
        generated.push(step);
        if generated.len() > d {
            return Err(Error::Precondition("T-transform chain failed to converge".into()));
        }
    }
    generated.reverse();
    Ok(generated)
}
