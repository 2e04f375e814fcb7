//! Outcome tuples of `N` detectors, integer coincidence counts and exact
//! probability tables over those tuples.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Largest supported number of detectors.
pub const MAX_DETECTORS: usize = 8;
/// Largest supported number of outcome tuples.
pub const MAX_TUPLES: usize = 1 << 20;

/// Tuples `(k_1, ..., k_N)` with `k_i` in `0..outcomes`, enumerated with
/// `k_1` as the most significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSpace {
    outcomes: usize,
    detectors: usize,
}

impl OutcomeSpace {
    pub fn new(outcomes: usize, detectors: usize) -> Result<Self> {
        if outcomes < 2 {
            return Err(Error::InvalidArgument("need at least two outcomes".into()));
        }
        if !(1..=MAX_DETECTORS).contains(&detectors) {
            return Err(Error::InvalidArgument(format!(
                "detector count {detectors} outside 1..={MAX_DETECTORS}"
            )));
        }
        let tuples = (0..detectors).try_fold(1usize, |acc, _| acc.checked_mul(outcomes));
        match tuples {
            Some(t) if t <= MAX_TUPLES => Ok(Self {
                outcomes,
                detectors,
            }),
            _ => Err(Error::Intractable {
                tuples: tuples.unwrap_or(usize::MAX),
                detectors,
            }),
        }
    }

    /// Number of outcomes per detector, `K + 1`.
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn max_outcome(&self) -> usize {
        self.outcomes - 1
    }

    pub fn detectors(&self) -> usize {
        self.detectors
    }

    pub fn len(&self) -> usize {
        self.outcomes.pow(self.detectors as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.detectors {
            return Err(Error::DimensionMismatch {
                expected: self.detectors,
                got: tuple.len(),
            });
        }
        let mut idx = 0;
        for &k in tuple {
            if k >= self.outcomes {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    max: self.outcomes - 1,
                });
            }
            idx = idx * self.outcomes + k;
        }
        Ok(idx)
    }

    pub fn tuple(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.detectors];
        for slot in out.iter_mut().rev() {
            *slot = index % self.outcomes;
            index /= self.outcomes;
        }
        out
    }

    /// All tuples in index order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(|i| self.tuple(i))
    }

    /// Histogram `(N_0, ..., N_K)` of a tuple.
    pub fn histogram(&self, tuple: &[usize]) -> Vec<usize> {
        let mut h = vec![0; self.outcomes];
        for &k in tuple {
            h[k] += 1;
        }
        h
    }

    /// Index of the tuple with two detector labels exchanged.
    pub fn swapped(&self, index: usize, a: usize, b: usize) -> usize {
        let mut t = self.tuple(index);
        t.swap(a, b);
        self.index(&t).expect("permuted tuple stays in range")
    }
}

/// Integer event counts `E(k_1, ..., k_N)`; serialized sparsely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SparseCounts", try_from = "SparseCounts")]
pub struct CoincidenceCounts {
    space: OutcomeSpace,
    counts: Vec<u64>,
}

impl CoincidenceCounts {
    pub fn zeros(space: OutcomeSpace) -> Self {
        Self {
            space,
            counts: vec![0; space.len()],
        }
    }

    pub fn from_dense(space: OutcomeSpace, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: counts.len(),
            });
        }
        Ok(Self { space, counts })
    }

    /// Counts from `(tuple, count)` entries; repeated tuples accumulate.
    pub fn from_entries(space: OutcomeSpace, entries: &[(Vec<usize>, u64)]) -> Result<Self> {
        let mut out = Self::zeros(space);
        for (tuple, c) in entries {
            out.add(tuple, *c)?;
        }
        Ok(out)
    }

    pub fn add(&mut self, tuple: &[usize], count: u64) -> Result<()> {
        let i = self.space.index(tuple)?;
        self.counts[i] += count;
        Ok(())
    }

    pub fn space(&self) -> OutcomeSpace {
        self.space
    }

    pub fn get(&self, tuple: &[usize]) -> Result<u64> {
        Ok(self.counts[self.space.index(tuple)?])
    }

    pub fn dense(&self) -> &[u64] {
        &self.counts
    }

    /// Total number of events `E`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Nonzero entries in index order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (self.space.tuple(i), c))
    }
}

#[derive(Serialize, Deserialize)]
struct SparseCounts {
    outcomes: usize,
    detectors: usize,
    total: u64,
    entries: Vec<(Vec<usize>, u64)>,
}

impl From<CoincidenceCounts> for SparseCounts {
    fn from(c: CoincidenceCounts) -> Self {
        SparseCounts {
            outcomes: c.space.outcomes,
            detectors: c.space.detectors,
            total: c.total(),
            entries: c.entries().collect(),
        }
    }
}

impl TryFrom<SparseCounts> for CoincidenceCounts {
    type Error = Error;

    fn try_from(s: SparseCounts) -> Result<Self> {
        let space = OutcomeSpace::new(s.outcomes, s.detectors)?;
        let counts = CoincidenceCounts::from_entries(space, &s.entries)?;
        if counts.total() != s.total {
            return Err(Error::InvalidArgument(format!(
                "declared total {} differs from the sum of entries {}",
                s.total,
                counts.total()
            )));
        }
        Ok(counts)
    }
}

/// Exact probabilities over outcome tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable<T> {
    space: OutcomeSpace,
    probs: Vec<T>,
}

impl<T: Real> ProbabilityTable<T> {
    /// Table from dense probabilities; entries must be nonnegative and sum to
    /// one within `1e-10`.
    pub fn new(space: OutcomeSpace, probs: Vec<T>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: probs.len(),
            });
        }
        if probs.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::InvalidArgument(
                "probabilities must be nonnegative".into(),
            ));
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { space, probs })
    }

    pub fn space(&self) -> OutcomeSpace {
        self.space
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, tuple: &[usize]) -> Result<T> {
        Ok(self.probs[self.space.index(tuple)?])
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }

    /// Multiplexed statistics `c_{N_0, ..., N_K}` keyed by histogram.
    pub fn histogram(&self) -> BTreeMap<Vec<usize>, T> {
        let mut out = BTreeMap::new();
        for (i, &p) in self.probs.iter().enumerate() {
            let h = self.space.histogram(&self.space.tuple(i));
            *out.entry(h).or_insert_with(T::zero) += p;
        }
        out
    }

    /// Largest violation of invariance under exchanging two detector labels.
    pub fn exchange_asymmetry(&self) -> T {
        let n = self.space.detectors();
        let mut worst = T::zero();
        for a in 0..n {
            for b in a + 1..n {
                for i in 0..self.probs.len() {
                    let j = self.space.swapped(i, a, b);
                    worst = worst.max((self.probs[i] - self.probs[j]).abs());
                }
            }
        }
        worst
    }
}

/// SplitMix64 finalizer used to derive independent stream seeds.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Multinomial draw of `trials` events with cell probabilities `probs`,
/// realized as a chain of conditional binomials in tuple order.
pub fn multinomial_counts<R: Rng>(
    space: OutcomeSpace,
    probs: &[f64],
    trials: u64,
    rng: &mut R,
) -> Result<CoincidenceCounts> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if probs.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: probs.len(),
        });
    }
    let mut mass: f64 = probs.iter().sum();
    let mut left = trials;
    let mut counts = vec![0u64; probs.len()];
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i == last {
            counts[i] = left;
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, q).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let c = draw.sample(rng);
        counts[i] = c;
        left -= c;
        mass -= p;
    }
    CoincidenceCounts::from_dense(space, counts)
}
