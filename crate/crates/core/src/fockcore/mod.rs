//! Fock-space numerics for the optical front end: photon-number
//! distributions after the signal/LO beam splitter, displacement matrix
//! elements, loss, and small symmetric eigenproblems.
//!
//! Multiplexed click statistics of phase-insensitive detectors depend only on
//! the photon-number diagonal of the displaced state, so everything here
//! works with diagonals.

mod displacement;
mod eigen;
mod state;

pub use displacement::{displaced_fock_overlap, displacement_probabilities, MAX_FOCK_INDEX};
pub use eigen::{symmetric_eigen, symmetric_eigen_min, SymmetricEigen};
pub use state::{MixtureComponent, StateSpec};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::special::{binomial_rows, poisson_pmf};

/// Default bound on the probability mass lost to Fock-space truncation.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-10;

/// Photon-number distribution `P_n`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockDistribution<T> {
    probs: Vec<T>,
    /// Mass removed by truncation before renormalization.
    truncation_loss: T,
}

impl<T: Real> FockDistribution<T> {
    /// Builds a distribution from weights whose deficit from unit sum is
    /// truncation loss; the loss must not exceed `max_loss`.
    pub fn from_weights(weights: Vec<T>, max_loss: T) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument(
                "empty photon-number distribution".into(),
            ));
        }
        if let Some(w) = weights
            .iter()
            .find(|w| !(w.is_finite() && **w >= T::zero()))
        {
            return Err(Error::InvalidArgument(format!(
                "negative or non-finite weight {w}"
            )));
        }
        let sum: T = weights.iter().copied().sum();
        let loss = T::one() - sum;
        let n_max = weights.len() - 1;
        if loss > max_loss {
            return Err(Error::Truncation {
                tail: loss.as_f64(),
                bound: max_loss.as_f64(),
                n_max,
            });
        }
        if -loss > T::tol(1e-12) {
            return Err(Error::InvalidArgument(format!("weights sum to {sum} > 1")));
        }
        let probs = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self {
            probs,
            truncation_loss: loss.max(T::zero()),
        })
    }

    pub fn delta(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidArgument(format!(
                "photon number {n} above n_max {n_max}"
            )));
        }
        let mut probs = vec![T::zero(); n_max + 1];
        probs[n] = T::one();
        Ok(Self {
            probs,
            truncation_loss: T::zero(),
        })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn truncation_loss(&self) -> T {
        self.truncation_loss
    }

    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| T::from_count(n) * p)
            .sum()
    }

    /// Zero-pads to a larger truncation.
    pub fn padded(&self, n_max: usize) -> Self {
        let mut probs = self.probs.clone();
        if probs.len() < n_max + 1 {
            probs.resize(n_max + 1, T::zero());
        }
        Self {
            probs,
            truncation_loss: self.truncation_loss,
        }
    }
}

/// Binomial photon survival through a channel of transmittance `tau`.
pub fn loss_diagonal<T: Real>(m: usize, tau: T) -> Result<FockDistribution<T>> {
    check_unit_interval(tau, "transmittance")?;
    let rows = binomial_rows(tau, m);
    Ok(FockDistribution {
        probs: rows[m].clone(),
        truncation_loss: T::zero(),
    })
}

/// Signal/LO beam splitter: the signal is transmitted with amplitude `t`, the
/// LO reflected with amplitude `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontendConfig<T> {
    pub t: Complex<T>,
    pub r: Complex<T>,
    pub n_max: usize,
    pub tail_bound: T,
}

impl<T: Real> FrontendConfig<T> {
    pub fn new(t: Complex<T>, r: Complex<T>, n_max: usize) -> Result<Self> {
        let total = t.norm_sqr() + r.norm_sqr();
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidArgument(format!(
                "|t|^2 + |r|^2 = {total}, expected 1"
            )));
        }
        Ok(Self {
            t,
            r,
            n_max,
            tail_bound: T::tol(DEFAULT_TAIL_BOUND),
        })
    }

    /// Real, positive `t = sqrt(tau)` and `r = sqrt(1 - tau)`.
    pub fn from_transmittance(tau: T, n_max: usize) -> Result<Self> {
        check_unit_interval(tau, "transmittance")?;
        let zero = T::zero();
        Self::new(
            Complex::new(tau.sqrt(), zero),
            Complex::new((T::one() - tau).sqrt(), zero),
            n_max,
        )
    }

    pub fn with_tail_bound(mut self, bound: T) -> Self {
        self.tail_bound = bound;
        self
    }

    pub fn transmittance(&self) -> T {
        self.t.norm_sqr()
    }

    pub fn reflectance(&self) -> T {
        self.r.norm_sqr()
    }
}

/// Photon-number distribution of the state leaving the signal/LO beam
/// splitter for LO amplitude `beta`.
pub fn frontend_distribution<T: Real>(
    state: &StateSpec,
    cfg: &FrontendConfig<T>,
    beta: Complex<T>,
) -> Result<FockDistribution<T>> {
    state.validate()?;
    let weights = frontend_weights(state, cfg, beta)?;
    FockDistribution::from_weights(weights, cfg.tail_bound)
}

/// Unnormalized truncated weights; their deficit from one is the tail mass.
fn frontend_weights<T: Real>(
    state: &StateSpec,
    cfg: &FrontendConfig<T>,
    beta: Complex<T>,
) -> Result<Vec<T>> {
    let n_max = cfg.n_max;
    let displacement = -cfg.r * beta;
    match state {
        StateSpec::Coherent {
            re,
            im,
            phase_randomized: false,
        } => {
            let alpha = Complex::new(T::lit(*re), T::lit(*im));
            Ok(poisson_pmf(
                (cfg.t * alpha + displacement).norm_sqr(),
                n_max,
            ))
        }
        StateSpec::Coherent {
            re,
            im,
            phase_randomized: true,
        } => {
            let amplitude = T::lit(re.hypot(*im));
            Ok(phase_averaged_poisson(
                cfg.t * amplitude,
                displacement,
                n_max,
            ))
        }
        StateSpec::Mixture { components } => {
            let mut acc = vec![T::zero(); n_max + 1];
            for c in components {
                if c.weight == 0.0 {
                    continue;
                }
                let w = T::lit(c.weight);
                for (a, v) in acc.iter_mut().zip(frontend_weights(&c.state, cfg, beta)?) {
                    *a += w * v;
                }
            }
            Ok(acc)
        }
        _ => {
            let input = diagonal_weights(state, n_max)?;
            let attenuated = attenuate(&input, cfg.transmittance());
            displace_diagonal(&attenuated, displacement.norm_sqr(), n_max)
        }
    }
}

/// Photon-number weights of a Fock-diagonal state truncated at `n_max`.
fn diagonal_weights<T: Real>(state: &StateSpec, n_max: usize) -> Result<Vec<T>> {
    let mut w = vec![T::zero(); n_max + 1];
    match state {
        StateSpec::Vacuum => w[0] = T::one(),
        StateSpec::Fock { photons } => {
            if *photons > n_max {
                return Err(Error::Truncation {
                    tail: 1.0,
                    bound: 0.0,
                    n_max,
                });
            }
            w[*photons] = T::one();
        }
        StateSpec::Thermal { mean_photons } => {
            let nbar = T::lit(*mean_photons);
            let ratio = nbar / (T::one() + nbar);
            let mut p = T::one() / (T::one() + nbar);
            for slot in w.iter_mut() {
                *slot = p;
                p *= ratio;
            }
        }
        StateSpec::FockMixture { weights } => {
            for (n, &p) in weights.iter().enumerate() {
                if n <= n_max {
                    w[n] = T::lit(p);
                } else if p > 0.0 {
                    // Mass above the cutoff is reported as truncation tail.
                    continue;
                }
            }
        }
        StateSpec::Coherent { .. } | StateSpec::Mixture { .. } => {
            return Err(Error::InvalidArgument("state is not Fock diagonal".into()));
        }
    }
    Ok(w)
}

fn attenuate<T: Real>(input: &[T], tau: T) -> Vec<T> {
    let n_max = input.len() - 1;
    let rows = binomial_rows(tau, n_max);
    let mut out = vec![T::zero(); n_max + 1];
    for (m, &p) in input.iter().enumerate() {
        if p == T::zero() {
            continue;
        }
        for (j, &b) in rows[m].iter().enumerate() {
            out[j] += p * b;
        }
    }
    out
}

/// Diagonal of `D rho D^dag` for diagonal `rho`, `x = |gamma|^2`.
fn displace_diagonal<T: Real>(input: &[T], x: T, n_max: usize) -> Result<Vec<T>> {
    let j_max = input.iter().rposition(|&p| p > T::zero()).unwrap_or(0);
    let probs = displacement_probabilities(j_max, n_max, x)?;
    let mut out = vec![T::zero(); n_max + 1];
    for (j, row) in probs.iter().enumerate() {
        let p = input[j];
        if p == T::zero() {
            continue;
        }
        for (o, &d) in out.iter_mut().zip(row) {
            *o += p * d;
        }
    }
    Ok(out)
}

/// Average of `Poisson(|a e^{i phi} + d|^2)` over a uniform phase, by the
/// periodic trapezoid rule with doubling until converged.
fn phase_averaged_poisson<T: Real>(a: Complex<T>, d: Complex<T>, n_max: usize) -> Vec<T> {
    let eval = |points: usize| {
        let mut acc = vec![T::zero(); n_max + 1];
        let w = T::one() / T::from_count(points);
        for i in 0..points {
            let phi = T::TAU() * T::from_count(i) / T::from_count(points);
            let mean = (a * Complex::new(phi.cos(), phi.sin()) + d).norm_sqr();
            for (s, p) in acc.iter_mut().zip(poisson_pmf(mean, n_max)) {
                *s += w * p;
            }
        }
        acc
    };
    if a.norm_sqr() == T::zero() || d.norm_sqr() == T::zero() {
        return poisson_pmf((a.norm() + d.norm()).powi(2), n_max);
    }
    let mut points = 32;
    let mut prev = eval(points);
    while points < 1 << 14 {
        points *= 2;
        let next = eval(points);
        let diff = prev
            .iter()
            .zip(&next)
            .fold(T::zero(), |m, (u, v)| m.max((*u - *v).abs()));
        prev = next;
        if diff <= T::tol(1e-15) {
            break;
        }
    }
    prev
}

fn check_unit_interval<T: Real>(x: T, what: &str) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{what} must lie in [0, 1], got {x}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(tau: f64, n_max: usize) -> FrontendConfig<f64> {
        FrontendConfig::from_transmittance(tau, n_max).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (n, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).abs() <= tol, "entry {n}: {x} vs {y}");
        }
    }

    #[test]
    fn loss_examples() {
        assert_eq!(
            loss_diagonal(3, 1.0).unwrap().probs(),
            &[0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(loss_diagonal(2, 0.0).unwrap().probs(), &[1.0, 0.0, 0.0]);
        assert_close(
            loss_diagonal(2, 0.5).unwrap().probs(),
            &[0.25, 0.5, 0.25],
            1e-16,
        );
        assert!(loss_diagonal(2, 1.5).is_err());
        for m in 0..20 {
            let d = loss_diagonal(m, 0.37).unwrap();
            assert!((d.mean() - 0.37 * m as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn frontend_config_checks_unitarity() {
        let bad = FrontendConfig::new(Complex::new(0.9, 0.0), Complex::new(0.1, 0.0), 10);
        assert!(bad.is_err());
        assert!(FrontendConfig::from_transmittance(0.9, 10).is_ok());
    }

    #[test]
    fn vacuum_is_poisson_in_lo_intensity() {
        let c = cfg(0.9, 40);
        let beta = Complex::new(2.0, 1.0);
        let d = frontend_distribution(&StateSpec::Vacuum, &c, beta).unwrap();
        let expect = poisson_pmf(0.1 * beta.norm_sqr(), 40);
        assert_close(d.probs(), &expect, 1e-14);
    }

    #[test]
    fn fock_without_lo_coupling() {
        let c = cfg(1.0, 10);
        let d = frontend_distribution(&StateSpec::Fock { photons: 1 }, &c, Complex::new(3.0, 0.0))
            .unwrap();
        assert_close(
            d.probs(),
            &FockDistribution::delta(1, 10).unwrap().probs,
            1e-15,
        );
    }

    #[test]
    fn coherent_is_poisson_in_displaced_amplitude() {
        let c = cfg(0.9, 50);
        let alpha = Complex::new(1.0, 0.5);
        let beta = Complex::new(1.7, 0.0);
        let d = frontend_distribution(&StateSpec::coherent(1.0, 0.5), &c, beta).unwrap();
        let mean = (c.t * alpha - c.r * beta).norm_sqr();
        assert_close(d.probs(), &poisson_pmf(mean, 50), 1e-14);
    }

    #[test]
    fn thermal_matches_closed_form_photon_statistics() {
        // Displaced thermal state: diagonal is a Laguerre-weighted geometric law;
        // check mean and normalization against closed forms instead.
        let c = cfg(0.9, 80);
        let beta = Complex::new(2.0, 0.0);
        let nbar = 1.5;
        let d =
            frontend_distribution(&StateSpec::Thermal { mean_photons: nbar }, &c, beta).unwrap();
        let expect_mean = 0.9 * nbar + 0.1 * 4.0;
        assert!((d.mean() - expect_mean).abs() < 1e-9, "{}", d.mean());
        let s: f64 = d.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_is_reported() {
        let c = cfg(0.9, 10);
        let err =
            frontend_distribution(&StateSpec::Vacuum, &c, Complex::new(10.0, 0.0)).unwrap_err();
        match err {
            Error::Truncation { tail, .. } => assert!(tail > 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rotation_invariant_states_ignore_lo_phase() {
        let c = cfg(0.9, 60);
        let states = [
            StateSpec::Fock { photons: 2 },
            StateSpec::Thermal { mean_photons: 0.7 },
            StateSpec::phase_randomized_coherent(1.2),
        ];
        for s in &states {
            let a = frontend_distribution(s, &c, Complex::new(2.0, 0.0)).unwrap();
            let b = frontend_distribution(s, &c, Complex::from_polar(2.0, 1.1)).unwrap();
            assert_close(a.probs(), b.probs(), 1e-13);
        }
    }

    #[test]
    fn phase_randomized_coherent_at_zero_lo_is_poisson() {
        let c = cfg(0.9, 40);
        let d = frontend_distribution(
            &StateSpec::phase_randomized_coherent(1.5),
            &c,
            Complex::new(0.0, 0.0),
        )
        .unwrap();
        assert_close(d.probs(), &poisson_pmf(0.9 * 2.25, 40), 1e-14);
    }

    #[test]
    fn displaced_fock_unitarity() {
        // Sum over a range wide enough to hold the displaced distribution:
        // mean m + x, variance x (2m + 1).
        for m in [0usize, 1, 3, 10, 25] {
            for x in [0.0, 0.5, 4.0, 15.0] {
                let spread = (x * (2.0 * m as f64 + 1.0)).sqrt();
                let upper = (m as f64 + x + 12.0 * spread + 30.0) as usize;
                let p = displacement_probabilities(m, upper, x).unwrap();
                let s: f64 = p[m].iter().sum();
                assert!((s - 1.0).abs() < 1e-10, "m={m} x={x} sum={s}");
            }
        }
    }

    #[test]
    fn outputs_normalized() {
        let c = cfg(0.9, 90);
        for s in [
            StateSpec::Vacuum,
            StateSpec::Fock { photons: 3 },
            StateSpec::Thermal { mean_photons: 2.0 },
            StateSpec::coherent(0.3, -1.0),
            StateSpec::FockMixture {
                weights: vec![0.2, 0.5, 0.3],
            },
        ] {
            for b in [0.0, 1.0, 3.0] {
                let d = frontend_distribution(&s, &c, Complex::new(b, 0.0)).unwrap();
                let sum: f64 = d.probs().iter().sum();
                assert!((sum - 1.0).abs() < 1e-10);
                assert!(d.truncation_loss() < 1e-10);
            }
        }
    }
}
