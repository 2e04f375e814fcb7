//! Exact and sampled multiplexed click statistics, LO scans with paired
//! vacuum scans, heralded PDC signal states and a P-function Monte Carlo
//! oracle for classical states.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::coincidence::derive_seed;
use crate::coincidence::{multinomial_counts, CoincidenceCounts, OutcomeSpace, ProbabilityTable};
use crate::detectors::{CoherentResponse, DetectorModel, ResponseMatrix};
use crate::error::{Error, Result};
use crate::fockcore::{
    frontend_distribution, FockDistribution, FrontendConfig, StateSpec, DEFAULT_TAIL_BOUND,
};
use crate::num::Real;
use crate::special::binomial_rows;

/// Largest multiplexing depth, `N = 2^S <= 8`.
pub const MAX_DEPTH: u32 = 3;
/// Version tag written into every [`ScanDataset`].
pub const SCAN_SCHEMA_VERSION: u32 = 1;

/// Deliberate deviations from the balanced network.
#[derive(Debug, Clone, PartialEq)]
pub struct Imbalance<T> {
    /// Fraction of the light reaching each detector.
    pub split_weights: Vec<T>,
    /// Per-detector responses replacing the common one.
    pub detectors: Option<Vec<ResponseMatrix<T>>>,
}

/// Multiplexing network of depth `S` behind the signal/LO beam splitter.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplexConfig<T> {
    depth: u32,
    frontend: FrontendConfig<T>,
    detector: ResponseMatrix<T>,
    imbalance: Option<Imbalance<T>>,
}

impl<T: Real> MultiplexConfig<T> {
    pub fn new(
        depth: u32,
        frontend: FrontendConfig<T>,
        detector: ResponseMatrix<T>,
    ) -> Result<Self> {
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(Error::InvalidArgument(format!(
                "multiplexing depth {depth} outside 1..={MAX_DEPTH}"
            )));
        }
        if detector.n_max() < frontend.n_max {
            return Err(Error::DimensionMismatch {
                expected: frontend.n_max + 1,
                got: detector.n_max() + 1,
            });
        }
        Ok(Self {
            depth,
            frontend,
            detector,
            imbalance: None,
        })
    }

    pub fn with_imbalance(mut self, imbalance: Imbalance<T>) -> Result<Self> {
        let n = self.detectors();
        let w = &imbalance.split_weights;
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.len(),
            });
        }
        let total: T = w.iter().copied().sum();
        if w.iter().any(|&x| !(x > T::zero())) || (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidArgument(
                "split weights must be positive and sum to 1".into(),
            ));
        }
        if let Some(ds) = &imbalance.detectors {
            if ds.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: ds.len(),
                });
            }
            for d in ds {
                if d.outcomes() != self.detector.outcomes() || d.n_max() < self.frontend.n_max {
                    return Err(Error::InvalidArgument(
                        "per-detector responses must share K and cover n_max".into(),
                    ));
                }
            }
        }
        self.imbalance = Some(imbalance);
        Ok(self)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of detectors `N = 2^S`.
    pub fn detectors(&self) -> usize {
        1 << self.depth
    }

    pub fn frontend(&self) -> &FrontendConfig<T> {
        &self.frontend
    }

    pub fn detector(&self) -> &ResponseMatrix<T> {
        &self.detector
    }

    pub fn imbalance(&self) -> Option<&Imbalance<T>> {
        self.imbalance.as_ref()
    }

    pub fn space(&self) -> Result<OutcomeSpace> {
        OutcomeSpace::new(self.detector.outcomes(), self.detectors())
    }

    /// Exact outcome table for `state` at LO amplitude `beta`.
    pub fn statistics(&self, state: &StateSpec, beta: Complex<T>) -> Result<ProbabilityTable<T>> {
        let dist = frontend_distribution(state, &self.frontend, beta)?;
        self.statistics_of(&dist)
    }

    /// Exact outcome table for a given photon-number distribution.
    pub fn statistics_of(&self, dist: &FockDistribution<T>) -> Result<ProbabilityTable<T>> {
        let n = self.detectors();
        match &self.imbalance {
            None => click_statistics_exact(dist, &self.detector, n),
            Some(imb) => {
                let ds: Vec<&ResponseMatrix<T>> = match &imb.detectors {
                    Some(ds) => ds.iter().collect(),
                    None => vec![&self.detector; n],
                };
                click_statistics_imbalanced(dist, &ds, &imb.split_weights)
            }
        }
    }
}

/// Outcome-tuple probabilities for `n` identical detectors behind a balanced
/// `1:n` splitter:
/// `Pr(k) = sum_n P_n sum_{n_1+...+n_N=n} n!/prod(n_i!) N^{-n} prod P(k_i|n_i)`.
pub fn click_statistics_exact<T: Real>(
    dist: &FockDistribution<T>,
    detector: &ResponseMatrix<T>,
    n: usize,
) -> Result<ProbabilityTable<T>> {
    let weights = vec![T::one() / T::from_count(n); n];
    click_statistics_imbalanced(dist, &vec![detector; n], &weights)
}

/// As [`click_statistics_exact`] with per-detector splitting weights and
/// responses. Photons are routed one detector at a time: detector `i` takes a
/// binomial share with probability `w_i / sum_{l >= i} w_l` of those left.
pub fn click_statistics_imbalanced<T: Real>(
    dist: &FockDistribution<T>,
    detectors: &[&ResponseMatrix<T>],
    weights: &[T],
) -> Result<ProbabilityTable<T>> {
    let n = detectors.len();
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    let outcomes = detectors
        .first()
        .ok_or(Error::InvalidArgument("no detectors".into()))?
        .outcomes();
    let space = OutcomeSpace::new(outcomes, n)?;
    let n_max = dist.n_max();
    for d in detectors {
        if d.outcomes() != outcomes {
            return Err(Error::DimensionMismatch {
                expected: outcomes,
                got: d.outcomes(),
            });
        }
        if d.n_max() < n_max {
            return Err(Error::DimensionMismatch {
                expected: n_max + 1,
                got: d.n_max() + 1,
            });
        }
    }
    let mut remaining: T = weights.iter().copied().sum();
    let mut splits = Vec::with_capacity(n);
    for &w in weights {
        let q = if remaining > T::zero() {
            (w / remaining).min(T::one())
        } else {
            T::one()
        };
        splits.push(binomial_rows(q, n_max));
        remaining -= w;
    }
    let mut probs = vec![T::zero(); space.len()];
    let ctx = Router {
        detectors,
        splits: &splits,
        outcomes,
    };
    ctx.route(0, dist.probs(), 0, &mut probs);
    let total: T = probs.iter().copied().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    ProbabilityTable::new(space, probs)
}

struct Router<'a, T> {
    detectors: &'a [&'a ResponseMatrix<T>],
    splits: &'a [Vec<Vec<T>>],
    outcomes: usize,
}

impl<T: Real> Router<'_, T> {
    /// `rem[r]`: probability that `r` photons are left for detectors
    /// `level..` jointly with the outcomes chosen so far.
    fn route(&self, level: usize, rem: &[T], prefix: usize, out: &mut [T]) {
        let det = self.detectors[level];
        let last = level + 1 == self.detectors.len();
        if last {
            for k in 0..self.outcomes {
                let p: T = rem
                    .iter()
                    .enumerate()
                    .map(|(r, &w)| w * det.get(k, r))
                    .sum();
                out[prefix * self.outcomes + k] = p;
            }
            return;
        }
        let split = &self.splits[level];
        let top = rem
            .iter()
            .rposition(|&w| w > T::zero())
            .map_or(0, |i| i + 1);
        for k in 0..self.outcomes {
            let mut next = vec![T::zero(); top];
            let mut any = false;
            for (r, &w) in rem.iter().enumerate().take(top) {
                if w == T::zero() {
                    continue;
                }
                for j in 0..=r {
                    let p = det.get(k, j);
                    if p == T::zero() {
                        continue;
                    }
                    let v = w * split[r][j] * p;
                    if v != T::zero() {
                        next[r - j] += v;
                        any = true;
                    }
                }
            }
            if any {
                self.route(level + 1, &next, prefix * self.outcomes + k, out);
            }
        }
    }
}

/// Multinomial draw of `trials` events over the tuples of `table`.
pub fn sample_events<T: Real>(
    table: &ProbabilityTable<T>,
    trials: u64,
    seed: u64,
) -> Result<CoincidenceCounts> {
    let probs: Vec<f64> = table.probs().iter().map(|p| p.as_f64()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    multinomial_counts(table.space(), &probs, trials, &mut rng)
}

/// Signal state of a two-mode squeezed vacuum heralded on outcome `k_h` of a
/// detector behind a herald channel of transmittance `tau_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedState<T> {
    /// Normalized signal photon-number weights.
    pub weights: Vec<T>,
    /// Probability of the heralding outcome per trial.
    pub probability: T,
}

impl<T: Real> HeraldedState<T> {
    pub fn state(&self) -> StateSpec {
        StateSpec::FockMixture {
            weights: self.weights.iter().map(|w| w.as_f64()).collect(),
        }
    }
}

/// `w_n ∝ (1-lambda^2) lambda^{2n} sum_j P_h(k_h|j) Binom(j; n, tau_h)`.
pub fn heralded_pdc_state<T: Real>(
    lambda: T,
    tau_h: T,
    herald: &ResponseMatrix<T>,
    k_h: usize,
    n_max: usize,
) -> Result<HeraldedState<T>> {
    if !(lambda >= T::zero() && lambda < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "squeezing parameter must lie in [0, 1), got {lambda}"
        )));
    }
    if !(tau_h >= T::zero() && tau_h <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "herald transmittance must lie in [0, 1], got {tau_h}"
        )));
    }
    if k_h > herald.max_outcome() {
        return Err(Error::IndexOutOfRange {
            index: k_h,
            max: herald.max_outcome(),
        });
    }
    if herald.n_max() < n_max {
        return Err(Error::DimensionMismatch {
            expected: n_max + 1,
            got: herald.n_max() + 1,
        });
    }
    let l2 = lambda * lambda;
    let rows = binomial_rows(tau_h, n_max);
    let mut weights = Vec::with_capacity(n_max + 1);
    let mut pair = T::one() - l2;
    for (n, row) in rows.iter().enumerate() {
        let click: T = row
            .iter()
            .enumerate()
            .map(|(j, &b)| b * herald.get(k_h, j))
            .sum();
        weights.push(pair * click);
        if n < n_max {
            pair *= l2;
        }
    }
    let probability: T = weights.iter().copied().sum();
    if !(probability > T::zero()) {
        return Err(Error::ZeroHeraldingProbability(k_h));
    }
    let tail = l2.powi(n_max as i32 + 1) / probability;
    if tail > T::lit(DEFAULT_TAIL_BOUND) {
        return Err(Error::Truncation {
            tail: tail.as_f64(),
            bound: DEFAULT_TAIL_BOUND,
            n_max,
        });
    }
    for w in weights.iter_mut() {
        *w /= probability;
    }
    Ok(HeraldedState {
        weights,
        probability,
    })
}

/// One LO setting of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSetting {
    pub index: usize,
    /// LO amplitude `|beta|`; the LO phase is fixed at zero.
    pub beta: f64,
    pub exact: Option<ProbabilityTable<f64>>,
    pub events: Option<CoincidenceCounts>,
}

/// Provenance of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub state: StateSpec,
    pub depth: u32,
    pub t: Complex<f64>,
    pub r: Complex<f64>,
    pub n_max: usize,
    pub trials: Option<u64>,
    pub seed: u64,
    #[serde(default)]
    pub detector: Option<DetectorModel>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub heralding_outcome: Option<usize>,
    #[serde(default)]
    pub heralding_probability: Option<f64>,
}

/// Signal scan plus the paired scan with the signal blocked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDataset {
    pub schema_version: u32,
    pub metadata: ScanMetadata,
    pub settings: Vec<ScanSetting>,
    pub vacuum: Vec<ScanSetting>,
}

impl ScanDataset {
    pub fn betas(&self) -> Vec<f64> {
        self.settings.iter().map(|s| s.beta).collect()
    }
}

const SIGNAL_STREAM: u64 = 0;
const VACUUM_STREAM: u64 = 1;
const ORACLE_STREAM: u64 = 2;

/// Exact tables, and optionally `trials` sampled events, for every LO
/// amplitude of `lo_grid`, for `state` and for the blocked signal.
///
/// Setting `i` of stream `s` is sampled with seed `derive_seed(seed, s, i)`,
/// so the output does not depend on how settings are scheduled.
pub fn scan_experiment(
    state: &StateSpec,
    cfg: &MultiplexConfig<f64>,
    lo_grid: &[f64],
    trials: Option<u64>,
    seed: u64,
) -> Result<ScanDataset> {
    if lo_grid.is_empty() {
        return Err(Error::EmptyScan);
    }
    if let Some(b) = lo_grid.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "LO amplitude {b} must be finite and nonnegative"
        )));
    }
    let jobs: Vec<(u64, usize)> = [SIGNAL_STREAM, VACUUM_STREAM]
        .iter()
        .flat_map(|&s| (0..lo_grid.len()).map(move |i| (s, i)))
        .collect();
    let vacuum = StateSpec::Vacuum;
    let results: Vec<Result<ScanSetting>> = jobs
        .par_iter()
        .map(|&(stream, i)| {
            let st = if stream == SIGNAL_STREAM {
                state
            } else {
                &vacuum
            };
            let beta = lo_grid[i];
            let table = cfg.statistics(st, Complex::new(beta, 0.0))?;
            let events = match trials {
                Some(n) => Some(sample_events(
                    &table,
                    n,
                    derive_seed(seed, stream, i as u64),
                )?),
                None => None,
            };
            Ok(ScanSetting {
                index: i,
                beta,
                exact: Some(table),
                events,
            })
        })
        .collect();
    let mut all = results.into_iter().collect::<Result<Vec<_>>>()?;
    let vacuum_settings = all.split_off(lo_grid.len());
    let fe = cfg.frontend();
    Ok(ScanDataset {
        schema_version: SCAN_SCHEMA_VERSION,
        metadata: ScanMetadata {
            state: state.clone(),
            depth: cfg.depth(),
            t: fe.t,
            r: fe.r,
            n_max: fe.n_max,
            trials,
            seed,
            detector: None,
            label: None,
            heralding_outcome: None,
            heralding_probability: None,
        },
        settings: all,
        vacuum: vacuum_settings,
    })
}

/// Monte Carlo estimate of an outcome table with per-tuple standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloTable {
    pub space: OutcomeSpace,
    pub probs: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub samples: u64,
}

const ORACLE_CHUNK: u64 = 1 << 14;
const ORACLE_COLUMNS: usize = 200;

/// Direct Monte Carlo of the P-function integral
/// `Pr(k) = ∫ d²α P(α) prod_i p_{k_i}(|tα - rβ|² / N)` for classical states.
pub fn pfunction_mc_oracle(
    state: &StateSpec,
    frontend: &FrontendConfig<f64>,
    response: &CoherentResponse<f64>,
    detectors: usize,
    beta: Complex<f64>,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloTable> {
    state.validate()?;
    if !state.is_classical() {
        return Err(Error::NonClassical(format!(
            "{state:?} has no nonnegative P function"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let space = OutcomeSpace::new(response.max_outcome() + 1, detectors)?;
    let response = response.tabulated(ORACLE_COLUMNS);
    let chunks = samples.div_ceil(ORACLE_CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, ORACLE_STREAM, c));
            let len = ORACLE_CHUNK.min(samples - c * ORACLE_CHUNK);
            let mut sum = vec![0.0; space.len()];
            let mut sq = vec![0.0; space.len()];
            for _ in 0..len {
                let alpha = sample_p(state, &mut rng);
                let mu = (frontend.t * alpha - frontend.r * beta).norm_sqr() / detectors as f64;
                let p = response.probabilities(mu);
                for (i, (s, q)) in sum.iter_mut().zip(sq.iter_mut()).enumerate() {
                    let v: f64 = space.tuple(i).iter().map(|&k| p[k]).product();
                    *s += v;
                    *q += v * v;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; space.len()];
    let mut sq = vec![0.0; space.len()];
    for (s, q) in &partial {
        for i in 0..space.len() {
            sum[i] += s[i];
            sq[i] += q[i];
        }
    }
    let n = samples as f64;
    let probs: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_errors = probs
        .iter()
        .zip(&sq)
        .map(|(m, q)| ((q / n - m * m).max(0.0) / (n - 1.0)).sqrt())
        .collect();
    Ok(MonteCarloTable {
        space,
        probs,
        std_errors,
        samples,
    })
}

fn sample_p<R: Rng>(state: &StateSpec, rng: &mut R) -> Complex<f64> {
    match state {
        StateSpec::Vacuum | StateSpec::Fock { .. } => Complex::new(0.0, 0.0),
        StateSpec::Coherent {
            re,
            im,
            phase_randomized,
        } => {
            let a = Complex::new(*re, *im);
            if *phase_randomized {
                let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                Complex::from_polar(a.norm(), phi)
            } else {
                a
            }
        }
        StateSpec::Thermal { mean_photons } => {
            let s = (mean_photons / 2.0).sqrt();
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Complex::new(s * x, s * y)
        }
        StateSpec::FockMixture { .. } => Complex::new(0.0, 0.0),
        StateSpec::Mixture { components } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for c in components {
                acc += c.weight;
                if u < acc {
                    return sample_p(&c.state, rng);
                }
            }
            sample_p(&components.last().expect("validated mixture").state, rng)
        }
    }
}
