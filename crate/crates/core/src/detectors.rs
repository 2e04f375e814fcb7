//! Phase-insensitive detector models, as Fock-diagonal response matrices
//! `P(k|n)` and as coherent-state response functions `p_k(mu)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::num::Real;
use crate::special::{binomial_rows, poisson_pmf};

/// Upper bound on the second-order response coefficient.
pub const MAX_NONLINEARITY: f64 = 0.05;
/// Largest negative entry a normal-ordered series may produce before it is
/// treated as an invalid POVM rather than round-off.
pub const CLAMP_LIMIT: f64 = 1e-9;

/// Conditional outcome probabilities `P(k|n)`: rows are outcomes
/// `k = 0..=K`, columns photon numbers `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMatrix<T> {
    probs: Matrix<T>,
    /// Set when outcomes above `K` were folded into the last bin.
    folded: bool,
}

impl<T: Real> ResponseMatrix<T> {
    /// Entries within round-off of `[0, 1]` are clamped into it.
    pub fn new(mut probs: Matrix<T>, folded: bool) -> Result<Self> {
        if probs.rows() < 2 || probs.cols() < 1 {
            return Err(Error::InvalidResponse("need at least two outcomes".into()));
        }
        let tol = T::tol(1e-10);
        for n in 0..probs.cols() {
            let mut sum = T::zero();
            for k in 0..probs.rows() {
                let p = probs[(k, n)];
                if !(p >= -tol && p <= T::one() + tol) {
                    return Err(Error::InvalidResponse(format!(
                        "P({k}|{n}) = {p} outside [0, 1]"
                    )));
                }
                let p = p.max(T::zero()).min(T::one());
                probs[(k, n)] = p;
                sum += p;
            }
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidResponse(format!(
                    "column n = {n} sums to {sum}"
                )));
            }
        }
        Ok(Self { probs, folded })
    }

    /// Largest outcome `K`.
    pub fn max_outcome(&self) -> usize {
        self.probs.rows() - 1
    }

    pub fn outcomes(&self) -> usize {
        self.probs.rows()
    }

    pub fn n_max(&self) -> usize {
        self.probs.cols() - 1
    }

    pub fn folded(&self) -> bool {
        self.folded
    }

    #[inline]
    pub fn get(&self, k: usize, n: usize) -> T {
        self.probs[(k, n)]
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.probs
    }

    pub fn column(&self, n: usize) -> Vec<T> {
        self.probs.column(n)
    }
}

/// Photoelectric counting `P(k|n) = C(n,k) eta^k (1-eta)^{n-k}`; counts above
/// `K` are folded into `k = K` when `K < n_max`.
pub fn photoelectric_response<T: Real>(
    eta: T,
    max_outcome: usize,
    n_max: usize,
) -> Result<ResponseMatrix<T>> {
    check_efficiency(eta)?;
    check_outcomes(max_outcome)?;
    let rows = binomial_rows(eta, n_max);
    let p = fold_columns(&rows, max_outcome);
    ResponseMatrix::new(p, max_outcome < n_max)
}

/// Click/no-click detector: `P(0|n) = (1-eta)^n`.
pub fn onoff_response<T: Real>(eta: T, n_max: usize) -> Result<ResponseMatrix<T>> {
    check_efficiency(eta)?;
    let p = Matrix::from_fn(2, n_max + 1, |k, n| {
        let off = (T::one() - eta).powi(n as i32);
        if k == 0 {
            off
        } else {
            T::one() - off
        }
    });
    ResponseMatrix::new(p, false)
}

/// TES-like POVM `:e^{-G(n)} G(n)^k / k!:` with `G(mu) = eta mu + eta2 mu^2`
/// for `k < K` and the complement in `k = K`.
///
/// The diagonal is the binomial transform of the power series of
/// `p_k(mu) = e^{-eta mu} q_k(mu)`:
/// `P(k|n) = sum_i C(n,i) (1-eta)^{n-i} i! [mu^i] q_k`, which is exact for
/// `eta2 = 0` and keeps cancellation small for small `eta2`. For larger
/// `eta2` the quadratic normal-ordered model is not a positive POVM; such
/// parameters are rejected once the negativity exceeds [`CLAMP_LIMIT`].
pub fn tes_response<T: Real>(
    eta: T,
    eta2: T,
    max_outcome: usize,
    n_max: usize,
) -> Result<ResponseMatrix<T>> {
    check_efficiency(eta)?;
    check_nonlinearity(eta2)?;
    check_outcomes(max_outcome)?;
    let clamp = T::lit(CLAMP_LIMIT);
    let one_minus = T::one() - eta;
    let mut p = Matrix::zeros(max_outcome + 1, n_max + 1);
    let series: Vec<Vec<T>> = (0..max_outcome)
        .map(|k| residual_series(eta, eta2, k, n_max))
        .collect();

    for n in 0..=n_max {
        let mut total = T::zero();
        for (k, q) in series.iter().enumerate() {
            let mut value = T::zero();
            let mut magnitude = T::zero();
            let mut falling = T::one();
            for (i, &qi) in q.iter().enumerate().take(n + 1) {
                if i > 0 {
                    falling *= T::from_count(n + 1 - i);
                }
                let term = qi * falling * one_minus.powi((n - i) as i32);
                value += term;
                magnitude += term.abs();
            }
            let roundoff = magnitude * T::epsilon() * T::from_count(n + 16);
            if roundoff > clamp {
                return Err(Error::Series(format!(
                    "normal-ordered series for P({k}|{n}) loses precision (cancellation {:e})",
                    roundoff.as_f64()
                )));
            }
            if value < -clamp {
                return Err(Error::Series(format!(
                    "P({k}|{n}) = {:e} is negative: eta2 = {eta2} gives no valid POVM at n_max = {n_max}",
                    value.as_f64()
                )));
            }
            let value = value.max(T::zero());
            p[(k, n)] = value;
            total += value;
        }
        let last = T::one() - total;
        if last < -clamp {
            return Err(Error::Series(format!(
                "overflow bin P({max_outcome}|{n}) = {:e} is negative",
                last.as_f64()
            )));
        }
        if last < T::zero() {
            for k in 0..max_outcome {
                p[(k, n)] /= total;
            }
            p[(max_outcome, n)] = T::zero();
        } else {
            p[(max_outcome, n)] = last;
        }
    }
    ResponseMatrix::new(p, true)
}

/// Power series of `e^{-eta2 mu^2} G(mu)^k / k!` to order `order`.
fn residual_series<T: Real>(eta: T, eta2: T, k: usize, order: usize) -> Vec<T> {
    let mut gauss = vec![T::zero(); order + 1];
    let mut coeff = T::one();
    for a in 0..=order / 2 {
        if a > 0 {
            coeff = coeff * (-eta2) / T::from_count(a);
        }
        gauss[2 * a] = coeff;
    }
    // G^k / k! = mu^k sum_l C(k,l) eta^{k-l} eta2^l mu^l / k!
    let mut power = vec![T::zero(); order + 1];
    let mut inv_k_fact = T::one();
    for i in 1..=k {
        inv_k_fact /= T::from_count(i);
    }
    for l in 0..=k {
        if k + l > order {
            break;
        }
        power[k + l] = crate::special::binomial::<T>(k, l)
            * eta.powi((k - l) as i32)
            * eta2.powi(l as i32)
            * inv_k_fact;
    }
    let mut out = vec![T::zero(); order + 1];
    for (a, &g) in gauss.iter().enumerate() {
        if g == T::zero() {
            continue;
        }
        for (b, &w) in power.iter().enumerate().take(order + 1 - a) {
            out[a + b] += g * w;
        }
    }
    out
}

/// Positive TES-like model on the Fock side: binomial detection with a
/// photon-number dependent efficiency `min(1, eta + eta2 n)`, so the mean
/// response is `eta n + eta2 n^2`, with outcomes above `K` folded into `K`.
pub fn tes_fock_response<T: Real>(
    eta: T,
    eta2: T,
    max_outcome: usize,
    n_max: usize,
) -> Result<ResponseMatrix<T>> {
    check_efficiency(eta)?;
    check_nonlinearity(eta2)?;
    check_outcomes(max_outcome)?;
    let mut p = Matrix::zeros(max_outcome + 1, n_max + 1);
    for n in 0..=n_max {
        let col = tes_fock_column(eta, eta2, max_outcome, n);
        for (k, v) in col.into_iter().enumerate() {
            p[(k, n)] = v;
        }
    }
    ResponseMatrix::new(p, true)
}

fn tes_fock_column<T: Real>(eta: T, eta2: T, max_outcome: usize, n: usize) -> Vec<T> {
    let q = (eta + eta2 * T::from_count(n)).min(T::one());
    let row = binomial_rows(q, n).pop().unwrap();
    fold_row(&row, max_outcome)
}

fn fold_row<T: Real>(row: &[T], max_outcome: usize) -> Vec<T> {
    let mut col = vec![T::zero(); max_outcome + 1];
    for (k, &v) in row.iter().enumerate() {
        col[k.min(max_outcome)] += v;
    }
    col
}

fn fold_columns<T: Real>(rows: &[Vec<T>], max_outcome: usize) -> Matrix<T> {
    let mut p = Matrix::zeros(max_outcome + 1, rows.len());
    for (n, row) in rows.iter().enumerate() {
        for (k, v) in fold_row(row, max_outcome).into_iter().enumerate() {
            p[(k, n)] = v;
        }
    }
    p
}

fn check_efficiency<T: Real>(eta: T) -> Result<()> {
    if eta >= T::zero() && eta <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "efficiency must lie in [0, 1], got {eta}"
        )))
    }
}

fn check_nonlinearity<T: Real>(eta2: T) -> Result<()> {
    if eta2 >= T::zero() && eta2 <= T::lit(MAX_NONLINEARITY) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "nonlinearity must lie in [0, {MAX_NONLINEARITY}], got {eta2}"
        )))
    }
}

fn check_outcomes(max_outcome: usize) -> Result<()> {
    if max_outcome >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "detector needs at least two outcomes".into(),
        ))
    }
}

/// Which Fock-diagonal realization a TES-like model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TesForm {
    /// Normal-ordered `:e^{-G} G^k/k!:`; valid only for very small `eta2`.
    NormalOrdered,
    /// Binomial detection with efficiency `eta + eta2 n`.
    #[default]
    FockNonlinear,
}

/// Detector description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DetectorModel {
    Photoelectric {
        efficiency: f64,
        max_outcome: usize,
    },
    OnOff {
        efficiency: f64,
    },
    Tes {
        efficiency: f64,
        nonlinearity: f64,
        max_outcome: usize,
        #[serde(default)]
        form: TesForm,
    },
}

impl Default for DetectorModel {
    /// TES-like bins `0..=4` at 90% efficiency with weak nonlinearity. These
    /// numbers are configuration defaults, not calibrated values.
    fn default() -> Self {
        DetectorModel::Tes {
            efficiency: 0.9,
            nonlinearity: 0.01,
            max_outcome: 4,
            form: TesForm::default(),
        }
    }
}

impl DetectorModel {
    pub fn max_outcome(&self) -> usize {
        match self {
            DetectorModel::Photoelectric { max_outcome, .. }
            | DetectorModel::Tes { max_outcome, .. } => *max_outcome,
            DetectorModel::OnOff { .. } => 1,
        }
    }

    pub fn efficiency(&self) -> f64 {
        match self {
            DetectorModel::Photoelectric { efficiency, .. }
            | DetectorModel::OnOff { efficiency }
            | DetectorModel::Tes { efficiency, .. } => *efficiency,
        }
    }

    /// Same model with the efficiency multiplied by `scale`.
    pub fn with_efficiency_scale(&self, scale: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            DetectorModel::Photoelectric { efficiency, .. }
            | DetectorModel::OnOff { efficiency }
            | DetectorModel::Tes { efficiency, .. } => *efficiency *= scale,
        }
        out
    }

    pub fn response_matrix<T: Real>(&self, n_max: usize) -> Result<ResponseMatrix<T>> {
        match *self {
            DetectorModel::Photoelectric {
                efficiency,
                max_outcome,
            } => photoelectric_response(T::lit(efficiency), max_outcome, n_max),
            DetectorModel::OnOff { efficiency } => onoff_response(T::lit(efficiency), n_max),
            DetectorModel::Tes {
                efficiency,
                nonlinearity,
                max_outcome,
                form,
            } => match form {
                TesForm::NormalOrdered => {
                    tes_response(T::lit(efficiency), T::lit(nonlinearity), max_outcome, n_max)
                }
                TesForm::FockNonlinear => {
                    tes_fock_response(T::lit(efficiency), T::lit(nonlinearity), max_outcome, n_max)
                }
            },
        }
    }
}

/// Response `p_k(mu) = <gamma| pi_k |gamma>` to a coherent state of
/// intensity `mu = |gamma|^2`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoherentResponse<T> {
    Photoelectric { eta: T, max_outcome: usize },
    OnOff { eta: T },
    TesNormalOrdered { eta: T, eta2: T, max_outcome: usize },
    TesFockNonlinear { eta: T, eta2: T, max_outcome: usize },
}

/// Coherent-state response function for a detector model.
pub fn coherent_response_of<T: Real>(model: &DetectorModel) -> Result<CoherentResponse<T>> {
    Ok(match *model {
        DetectorModel::Photoelectric {
            efficiency,
            max_outcome,
        } => {
            check_efficiency(efficiency)?;
            check_outcomes(max_outcome)?;
            CoherentResponse::Photoelectric {
                eta: T::lit(efficiency),
                max_outcome,
            }
        }
        DetectorModel::OnOff { efficiency } => {
            check_efficiency(efficiency)?;
            CoherentResponse::OnOff {
                eta: T::lit(efficiency),
            }
        }
        DetectorModel::Tes {
            efficiency,
            nonlinearity,
            max_outcome,
            form,
        } => {
            check_efficiency(efficiency)?;
            check_nonlinearity(nonlinearity)?;
            check_outcomes(max_outcome)?;
            let (eta, eta2) = (T::lit(efficiency), T::lit(nonlinearity));
            match form {
                TesForm::NormalOrdered => CoherentResponse::TesNormalOrdered {
                    eta,
                    eta2,
                    max_outcome,
                },
                TesForm::FockNonlinear => CoherentResponse::TesFockNonlinear {
                    eta,
                    eta2,
                    max_outcome,
                },
            }
        }
    })
}

impl<T: Real> CoherentResponse<T> {
    pub fn max_outcome(&self) -> usize {
        match self {
            CoherentResponse::OnOff { .. } => 1,
            CoherentResponse::Photoelectric { max_outcome, .. }
            | CoherentResponse::TesNormalOrdered { max_outcome, .. }
            | CoherentResponse::TesFockNonlinear { max_outcome, .. } => *max_outcome,
        }
    }

    /// Outcome probabilities `(p_0(mu), ..., p_K(mu))`.
    pub fn probabilities(&self, mu: T) -> Vec<T> {
        match *self {
            CoherentResponse::Photoelectric { eta, max_outcome } => {
                poisson_bins(eta * mu, max_outcome)
            }
            CoherentResponse::OnOff { eta } => {
                let off = (-eta * mu).exp();
                vec![off, T::one() - off]
            }
            CoherentResponse::TesNormalOrdered {
                eta,
                eta2,
                max_outcome,
            } => poisson_bins(eta * mu + eta2 * mu * mu, max_outcome),
            CoherentResponse::TesFockNonlinear {
                eta,
                eta2,
                max_outcome,
            } => {
                let n_max = poisson_cutoff(mu);
                let columns: Vec<Vec<T>> = (0..=n_max)
                    .map(|n| tes_fock_column(eta, eta2, max_outcome, n))
                    .collect();
                poisson_mixture(mu, &columns, max_outcome)
            }
        }
    }

    /// Evaluator that tabulates the Fock columns of the nonlinear TES model
    /// up to `n_cap` photons.
    pub fn tabulated(&self, n_cap: usize) -> TabulatedResponse<T> {
        let columns = match *self {
            CoherentResponse::TesFockNonlinear {
                eta,
                eta2,
                max_outcome,
            } => (0..=n_cap)
                .map(|n| tes_fock_column(eta, eta2, max_outcome, n))
                .collect(),
            _ => Vec::new(),
        };
        TabulatedResponse {
            response: self.clone(),
            columns,
        }
    }
}

/// [`CoherentResponse`] with precomputed Fock columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedResponse<T> {
    response: CoherentResponse<T>,
    columns: Vec<Vec<T>>,
}

impl<T: Real> TabulatedResponse<T> {
    pub fn max_outcome(&self) -> usize {
        self.response.max_outcome()
    }

    /// Same values as [`CoherentResponse::probabilities`].
    pub fn probabilities(&self, mu: T) -> Vec<T> {
        match self.response {
            CoherentResponse::TesFockNonlinear { max_outcome, .. }
                if poisson_cutoff(mu) < self.columns.len() =>
            {
                poisson_mixture(mu, &self.columns[..=poisson_cutoff(mu)], max_outcome)
            }
            _ => self.response.probabilities(mu),
        }
    }
}

fn poisson_cutoff<T: Real>(mu: T) -> usize {
    let spread = mu.max(T::zero()).sqrt();
    (mu + T::lit(15.0) * spread + T::lit(40.0))
        .to_usize()
        .unwrap_or(40)
}

fn poisson_mixture<T: Real>(mu: T, columns: &[Vec<T>], max_outcome: usize) -> Vec<T> {
    let weights = poisson_pmf(mu, columns.len() - 1);
    let mut out = vec![T::zero(); max_outcome + 1];
    for (&w, col) in weights.iter().zip(columns) {
        if w == T::zero() {
            continue;
        }
        for (o, &v) in out.iter_mut().zip(col) {
            *o += w * v;
        }
    }
    out
}

/// Poisson law of mean `g` in bins `0..K-1`, complement in `K`.
fn poisson_bins<T: Real>(g: T, max_outcome: usize) -> Vec<T> {
    let mut out = poisson_pmf(g, max_outcome);
    let head: T = out[..max_outcome].iter().copied().sum();
    out[max_outcome] = (T::one() - head).max(T::zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::poisson_pmf;

    fn column(r: &ResponseMatrix<f64>, n: usize) -> Vec<f64> {
        r.column(n)
    }

    #[test]
    fn photoelectric_examples() {
        let perfect = photoelectric_response(1.0, 6, 6).unwrap();
        for n in 0..=6 {
            for k in 0..=6 {
                assert_eq!(perfect.get(k, n), if k == n { 1.0 } else { 0.0 });
            }
        }
        let blind = photoelectric_response(0.0, 4, 6).unwrap();
        assert!((0..=6).all(|n| blind.get(0, n) == 1.0));
        let half = photoelectric_response(0.5, 4, 4).unwrap();
        assert_eq!(&column(&half, 2)[..3], &[0.25, 0.5, 0.25]);
        assert!(!half.folded());
        assert!(photoelectric_response(0.5, 2, 6).unwrap().folded());
        assert!(photoelectric_response(1.2, 2, 6).is_err());
    }

    #[test]
    fn photoelectric_column_means() {
        let r = photoelectric_response(0.73, 30, 30).unwrap();
        for n in 0..=30 {
            let mean: f64 = (0..=30).map(|k| k as f64 * r.get(k, n)).sum();
            assert!((mean - 0.73 * n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn onoff_examples() {
        let r = onoff_response(0.5, 4).unwrap();
        assert_eq!(column(&r, 0), vec![1.0, 0.0]);
        assert_eq!(column(&r, 2), vec![0.25, 0.75]);
        let r = onoff_response(1.0, 4).unwrap();
        assert!((1..=4).all(|n| column(&r, n) == vec![0.0, 1.0]));
        assert!(onoff_response(-0.1, 4).is_err());
    }

    #[test]
    fn tes_without_nonlinearity_is_photoelectric() {
        for eta in [0.0_f64, 0.35, 0.9, 1.0] {
            let a: ResponseMatrix<f64> = tes_response(eta, 0.0, 30, 30).unwrap();
            let b = photoelectric_response(eta, 30, 30).unwrap();
            for n in 0..=30 {
                for k in 0..=30 {
                    assert!(
                        (a.get(k, n) - b.get(k, n)).abs() < 1e-13,
                        "eta={eta} k={k} n={n}"
                    );
                }
            }
            let a = tes_fock_response(eta, 0.0, 4, 30).unwrap();
            let b = photoelectric_response(eta, 4, 30).unwrap();
            assert_eq!(a.matrix(), b.matrix());
        }
        let dark = tes_response(0.0, 0.0, 4, 10).unwrap();
        assert!((0..=10).all(|n| dark.get(0, n) == 1.0));
    }

    #[test]
    fn tes_normal_ordered_rejects_invalid_povm() {
        // The quadratic normal-ordered model turns negative already at n = 4.
        let err = tes_response(0.9, 0.01, 4, 10).unwrap_err();
        assert!(matches!(err, Error::Series(_)), "{err:?}");
        // Very weak nonlinearity stays a valid POVM.
        let ok = tes_response(0.9, 1e-4, 4, 30).unwrap();
        for n in 0..=30 {
            let s: f64 = ok.column(n).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn overflow_bin_is_monotone() {
        let r = tes_fock_response(0.9, 0.01, 4, 60).unwrap();
        for n in 1..=60 {
            assert!(r.get(4, n) >= r.get(4, n - 1) - 1e-15);
        }
        let r = tes_response(0.9, 1e-4, 4, 30).unwrap();
        for n in 1..=30 {
            assert!(r.get(4, n) >= r.get(4, n - 1) - 1e-12);
        }
    }

    #[test]
    fn coherent_response_examples() {
        let pe = coherent_response_of::<f64>(&DetectorModel::Photoelectric {
            efficiency: 0.8,
            max_outcome: 4,
        })
        .unwrap();
        assert_eq!(pe.probabilities(0.0), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let oo = coherent_response_of::<f64>(&DetectorModel::OnOff { efficiency: 1.0 }).unwrap();
        let p = oo.probabilities(std::f64::consts::LN_2);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let tes = coherent_response_of::<f64>(&DetectorModel::Tes {
            efficiency: 0.8,
            nonlinearity: 0.0,
            max_outcome: 4,
            form: TesForm::NormalOrdered,
        })
        .unwrap();
        for i in 0..50 {
            let mu = 0.2 * i as f64;
            for (a, b) in tes.probabilities(mu).iter().zip(pe.probabilities(mu)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    /// Coherent states tie the two representations together:
    /// `sum_n Poisson(n; mu) P(k|n) = p_k(mu)`.
    #[test]
    fn fock_and_coherent_representations_agree() {
        let n_max = 60;
        let models = [
            DetectorModel::Photoelectric {
                efficiency: 0.8,
                max_outcome: 4,
            },
            DetectorModel::Photoelectric {
                efficiency: 0.6,
                max_outcome: 60,
            },
            DetectorModel::OnOff { efficiency: 0.7 },
            DetectorModel::Tes {
                efficiency: 0.9,
                nonlinearity: 1e-4,
                max_outcome: 4,
                form: TesForm::NormalOrdered,
            },
            DetectorModel::Tes {
                efficiency: 0.9,
                nonlinearity: 0.01,
                max_outcome: 4,
                form: TesForm::FockNonlinear,
            },
        ];
        for model in &models {
            let matrix: ResponseMatrix<f64> = model.response_matrix(n_max).unwrap();
            let coherent = coherent_response_of::<f64>(model).unwrap();
            for i in 0..=30 {
                let mu = i as f64 * 0.5;
                let weights = poisson_pmf(mu, n_max);
                let direct = coherent.probabilities(mu);
                for (k, &pk) in direct.iter().enumerate() {
                    let mixed: f64 = weights
                        .iter()
                        .enumerate()
                        .map(|(n, w)| w * matrix.get(k, n))
                        .sum();
                    assert!(
                        (mixed - pk).abs() < 1e-8,
                        "{model:?} mu={mu} k={k}: {mixed} vs {pk}"
                    );
                }
            }
        }
    }

    #[test]
    fn default_model_builds() {
        let r: ResponseMatrix<f64> = DetectorModel::default().response_matrix(40).unwrap();
        assert_eq!(r.max_outcome(), 4);
        let scaled = DetectorModel::default().with_efficiency_scale(0.5);
        assert!((scaled.efficiency() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn tabulated_response_matches_direct() {
        let model = DetectorModel::default();
        let direct = coherent_response_of::<f64>(&model).unwrap();
        let table = direct.tabulated(60);
        for mu in [0.0, 0.3, 2.0, 9.0, 40.0] {
            assert_eq!(table.probabilities(mu), direct.probabilities(mu));
        }
        assert_eq!(table.max_outcome(), 4);
    }
}
