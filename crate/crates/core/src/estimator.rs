//! Estimators on coincidence data: sampling-formula means with random and
//! systematic errors, generating functions, `G_z`, the minimal eigenvalue of
//! the coincidence matrix, the sub-multinomial matrix `M` and the
//! detector-independent LO intensity.
//!
//! Nothing here reads a detector model: every quantity is computed from
//! outcome-tuple counts or probabilities alone.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coincidence::{
    derive_seed, multinomial_counts, CoincidenceCounts, OutcomeSpace, ProbabilityTable,
};
use crate::error::{Error, Result};
use crate::fockcore::symmetric_eigen_min;
use crate::matrix::Matrix;
use crate::num::Real;

/// Default number of bootstrap resamples.
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_STREAM: u64 = 3;

/// Mean with random error `sigma`, systematic error `eps` and combined
/// `delta = sqrt(sigma^2 + eps^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError<T> {
    pub mean: T,
    pub sigma: T,
    pub eps: T,
    pub delta: T,
    /// Events behind the estimate; `None` for exact tables.
    pub events: Option<u64>,
}

impl<T: Real> EstimateWithError<T> {
    pub fn new(mean: T, sigma: T, eps: T, events: Option<u64>) -> Self {
        let delta = (sigma * sigma + eps * eps).sqrt();
        Self {
            mean,
            sigma,
            eps,
            delta,
            events,
        }
    }

    pub fn exact(mean: T) -> Self {
        Self::new(mean, T::zero(), T::zero(), None)
    }

    /// `-mean / delta`: how many combined standard errors the value lies
    /// below zero. Infinite for a negative value without error.
    pub fn significance_below_zero(&self) -> T {
        if self.delta > T::zero() {
            -self.mean / self.delta
        } else if self.mean < T::zero() {
            T::infinity()
        } else if self.mean > T::zero() {
            T::neg_infinity()
        } else {
            T::zero()
        }
    }
}

/// Tuple weights of one LO setting: event counts, or probabilities of an
/// exact table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceData<T> {
    space: OutcomeSpace,
    weights: Vec<T>,
    total: T,
    events: Option<u64>,
}

impl<T: Real> CoincidenceData<T> {
    pub fn from_counts(counts: &CoincidenceCounts) -> Result<Self> {
        let events = counts.total();
        if events == 0 {
            return Err(Error::InsufficientEvents {
                required: 1,
                got: 0,
            });
        }
        let weights: Vec<T> = counts.dense().iter().map(|&c| T::lit(c as f64)).collect();
        let total = weights.iter().copied().sum();
        Ok(Self {
            space: counts.space(),
            weights,
            total,
            events: Some(events),
        })
    }

    /// Exact probabilities; random errors are zero.
    pub fn from_exact(table: &ProbabilityTable<T>) -> Self {
        Self {
            space: table.space(),
            weights: table.probs().to_vec(),
            total: table.total(),
            events: None,
        }
    }

    /// Exact probabilities treated as the frequencies of `events` trials, so
    /// that random errors are those expected at that sample size.
    pub fn from_exact_with_events(table: &ProbabilityTable<T>, events: u64) -> Self {
        Self {
            events: Some(events),
            ..Self::from_exact(table)
        }
    }

    pub fn space(&self) -> OutcomeSpace {
        self.space
    }

    pub fn events(&self) -> Option<u64> {
        self.events
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Relative frequency of tuple `index`.
    pub fn frequency(&self, index: usize) -> T {
        self.weights[index] / self.total
    }
}

/// Exchange-symmetric and antisymmetric parts of tuple weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSplit<T> {
    pub symmetric: Vec<T>,
    pub asymmetric: Vec<T>,
}

/// Averages counts over all permutations of detector labels; for `N = 2`
/// the symmetric part is `(E(k1,k2) + E(k2,k1))/2`, the asymmetric part the
/// half-difference. Their sum reconstructs the input.
pub fn symmetrize<T: Real>(counts: &CoincidenceCounts) -> SymmetricSplit<T> {
    let w: Vec<T> = counts.dense().iter().map(|&c| T::lit(c as f64)).collect();
    split_weights(counts.space(), &w)
}

fn split_weights<T: Real>(space: OutcomeSpace, w: &[T]) -> SymmetricSplit<T> {
    let mut classes: HashMap<Vec<usize>, (T, usize)> = HashMap::new();
    let keys: Vec<Vec<usize>> = space.tuples().map(|t| space.histogram(&t)).collect();
    for (key, &v) in keys.iter().zip(w) {
        let e = classes.entry(key.clone()).or_insert((T::zero(), 0));
        e.0 += v;
        e.1 += 1;
    }
    let symmetric: Vec<T> = keys
        .iter()
        .map(|k| {
            let (s, n) = classes[k];
            s / T::from_count(n)
        })
        .collect();
    let asymmetric = w.iter().zip(&symmetric).map(|(&a, &s)| a - s).collect();
    SymmetricSplit {
        symmetric,
        asymmetric,
    }
}

/// Sampling formula `mean = sum f E / E` with random error
/// `sqrt((mean(f^2) - mean(f)^2) / (E - 1))` and systematic error
/// `eps^2 = sum |f|^2 |E_asym / E|^2`.
pub fn estimate<T: Real>(
    f: impl Fn(&[usize]) -> T,
    data: &CoincidenceData<T>,
) -> Result<EstimateWithError<T>> {
    let values: Vec<T> = data.space.tuples().map(|t| f(&t)).collect();
    estimate_values(&values, data)
}

fn estimate_values<T: Real>(
    values: &[T],
    data: &CoincidenceData<T>,
) -> Result<EstimateWithError<T>> {
    let mean = values
        .iter()
        .zip(&data.weights)
        .map(|(&f, &w)| f * w)
        .sum::<T>()
        / data.total;
    let sigma = match data.events {
        Some(e) if e < 2 => {
            return Err(Error::InsufficientEvents {
                required: 2,
                got: e,
            })
        }
        Some(e) => {
            let var = values
                .iter()
                .zip(&data.weights)
                .map(|(&f, &w)| w * (f - mean) * (f - mean))
                .sum::<T>()
                / data.total;
            (var / T::lit((e - 1) as f64)).sqrt()
        }
        None => T::zero(),
    };
    let split = split_weights(data.space, &data.weights);
    let eps2: T = values
        .iter()
        .zip(&split.asymmetric)
        .map(|(&f, &a)| {
            let r = a / data.total;
            f * f * r * r
        })
        .sum();
    Ok(EstimateWithError::new(
        mean,
        sigma,
        eps2.sqrt(),
        data.events,
    ))
}

/// Generating function `g_Z = sum_tuples prod_i z_{k_i} E / E`.
pub fn generating_function<T: Real>(
    data: &CoincidenceData<T>,
    z: &[T],
) -> Result<EstimateWithError<T>> {
    if z.len() != data.space.outcomes() {
        return Err(Error::DimensionMismatch {
            expected: data.space.outcomes(),
            got: z.len(),
        });
    }
    estimate(|t| t.iter().fold(T::one(), |acc, &k| acc * z[k]), data)
}

/// `G_z = g_{1, z, z^2, ..., z^K}`.
pub fn daps_gz<T: Real>(data: &CoincidenceData<T>, z: T) -> Result<EstimateWithError<T>> {
    let powers: Vec<T> = (0..data.space.outcomes())
        .map(|k| z.powi(k as i32))
        .collect();
    generating_function(data, &powers)
}

/// Minimal eigenvalue of the normalized symmetrized coincidence matrix of
/// one setting, with its eigenvector `Z*` and error bars from evaluating the
/// quadratic form with `Z*` held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceEigen<T> {
    pub lambda_min: EstimateWithError<T>,
    pub z: Vec<T>,
}

fn require_pairs(space: OutcomeSpace) -> Result<()> {
    if space.detectors() == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "the quadratic-form reduction needs N = 2 detectors, got {}",
            space.detectors()
        )))
    }
}

/// Symmetrized `E(k1, k2) / E` as a `(K+1) x (K+1)` matrix.
pub fn coincidence_matrix<T: Real>(data: &CoincidenceData<T>) -> Result<Matrix<T>> {
    require_pairs(data.space)?;
    let n = data.space.outcomes();
    let split = split_weights(data.space, &data.weights);
    Ok(Matrix::from_fn(n, n, |i, j| {
        split.symmetric[i * n + j] / data.total
    }))
}

pub fn coincidence_eigen<T: Real>(data: &CoincidenceData<T>) -> Result<CoincidenceEigen<T>> {
    let a = coincidence_matrix(data)?;
    let (lambda, z) = symmetric_eigen_min(&a)?;
    let est = estimate(|t| z[t[0]] * z[t[1]], data)?;
    Ok(CoincidenceEigen {
        lambda_min: EstimateWithError {
            mean: lambda,
            ..est
        },
        z,
    })
}

/// Result of minimizing the generating function over a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMinScan<T> {
    pub per_setting: Vec<CoincidenceEigen<T>>,
    /// Setting with the smallest eigenvalue.
    pub argmin: usize,
    pub g_min: EstimateWithError<T>,
    pub z_star: Vec<T>,
}

/// Minimal eigenvalue per setting and its minimum over the scan.
pub fn g_min_scan<T: Real>(settings: &[CoincidenceData<T>]) -> Result<GMinScan<T>> {
    if settings.is_empty() {
        return Err(Error::EmptyScan);
    }
    let per_setting: Vec<CoincidenceEigen<T>> = settings
        .par_iter()
        .map(coincidence_eigen)
        .collect::<Result<_>>()?;
    let argmin = (0..per_setting.len())
        .min_by(|&a, &b| {
            per_setting[a]
                .lambda_min
                .mean
                .partial_cmp(&per_setting[b].lambda_min.mean)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("nonempty scan");
    let best = &per_setting[argmin];
    Ok(GMinScan {
        g_min: best.lambda_min,
        z_star: best.z.clone(),
        argmin,
        per_setting,
    })
}

/// Standard deviation of the minimal eigenvalue over multinomial resamples
/// of the observed counts.
pub fn bootstrap_lambda_min(
    counts: &CoincidenceCounts,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    require_pairs(counts.space())?;
    let events = counts.total();
    if events < 2 || resamples < 2 {
        return Err(Error::InsufficientEvents {
            required: 2,
            got: events.min(resamples as u64),
        });
    }
    let probs: Vec<f64> = counts
        .dense()
        .iter()
        .map(|&c| c as f64 / events as f64)
        .collect();
    let values: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, BOOTSTRAP_STREAM, i as u64));
            let resampled = multinomial_counts(counts.space(), &probs, events, &mut rng)?;
            let a = coincidence_matrix(&CoincidenceData::<f64>::from_counts(&resampled)?)?;
            Ok(symmetric_eigen_min(&a)?.0)
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok((values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Sub-multinomial matrix `M_ij = N F_ij - (N-1) Nbar_i Nbar_j` with
/// `Nbar_i = avg(N_i)` and `F_ij = avg(N_i N_j - delta_ij N_i)`, its minimal
/// eigenvalue and the error of that eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialMatrix<T> {
    pub m: Matrix<T>,
    pub mu_min: EstimateWithError<T>,
    pub eigenvector: Vec<T>,
}

pub fn multinomial_test<T: Real>(data: &CoincidenceData<T>) -> Result<MultinomialMatrix<T>> {
    let space = data.space;
    let n_out = space.outcomes();
    let n_det = T::from_count(space.detectors());
    let mut nbar = vec![T::zero(); n_out];
    let mut f = Matrix::zeros(n_out, n_out);
    for (idx, tuple) in space.tuples().enumerate() {
        let w = data.frequency(idx);
        if w == T::zero() {
            continue;
        }
        let h = space.histogram(&tuple);
        for i in 0..n_out {
            if h[i] == 0 {
                continue;
            }
            nbar[i] += T::from_count(h[i]) * w;
            for j in 0..n_out {
                let pairs = if i == j {
                    h[i] * (h[i] - 1)
                } else {
                    h[i] * h[j]
                };
                if pairs > 0 {
                    f[(i, j)] += T::from_count(pairs) * w;
                }
            }
        }
    }
    let nm1 = n_det - T::one();
    let m = Matrix::from_fn(n_out, n_out, |i, j| {
        n_det * f[(i, j)] - nm1 * nbar[i] * nbar[j]
    });
    let (mu, v) = symmetric_eigen_min(&m)?;
    let v_nbar: T = v.iter().zip(&nbar).map(|(&a, &b)| a * b).sum();
    let two = T::lit(2.0);
    // Linearized influence of one event on v^T M v with v held fixed.
    let est = estimate(
        |t| {
            let s: T = t.iter().map(|&k| v[k]).sum();
            let s2: T = t.iter().map(|&k| v[k] * v[k]).sum();
            n_det * (s * s - s2) - two * nm1 * v_nbar * s
        },
        data,
    )?;
    Ok(MultinomialMatrix {
        m,
        mu_min: EstimateWithError { mean: mu, ..est },
        eigenvector: v,
    })
}

/// Detector-independent LO intensity `|beta_DI|^2 = sum_i i Nbar_i`, to be
/// evaluated on the signal-blocked scan.
pub fn di_intensity<T: Real>(data: &CoincidenceData<T>) -> Result<EstimateWithError<T>> {
    estimate(|t| T::from_count(t.iter().sum()), data)
}

/// `|beta_DI| = sqrt(sum_i i Nbar_i)`.
pub fn di_amplitude<T: Real>(data: &CoincidenceData<T>) -> Result<T> {
    Ok(di_intensity(data)?.mean.max(T::zero()).sqrt())
}
