//! Vacuum-anchored modelling of radial DAPS curves: Gaussian-polynomial fits,
//! Fock-state predictions from the vacuum model, convolution predictions for
//! rotationally symmetric states, optimal `z` search and state
//! discrimination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{daps_gz, di_intensity, CoincidenceData, EstimateWithError};
use crate::fockcore::StateSpec;
use crate::matrix::{solve, Matrix};
use crate::num::Real;
use crate::special::{binomial, gauss_legendre, laguerre, laguerre_coefficients, normal_cdf};

/// Abscissa of a radial curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// `|beta|^2` of the LO setting.
    RawIntensity,
    /// `|beta_DI|^2` measured on the signal-blocked scan.
    DetectorIndependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<T> {
    pub setting: usize,
    pub x: T,
    pub y: EstimateWithError<T>,
}

/// Estimates against a nonnegative, strictly increasing abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCurve<T> {
    variable: Variable,
    points: Vec<CurvePoint<T>>,
}

impl<T: Real> RadialCurve<T> {
    pub fn new(variable: Variable, points: Vec<CurvePoint<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyScan);
        }
        if points.iter().any(|p| !(p.x >= T::zero())) {
            return Err(Error::InvalidArgument(
                "curve abscissae must be nonnegative".into(),
            ));
        }
        if points.windows(2).any(|w| !(w[1].x > w[0].x)) {
            return Err(Error::InvalidArgument(
                "curve abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { variable, points })
    }

    pub fn variable(&self) -> Variable {
        self.variable
    }

    pub fn points(&self) -> &[CurvePoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<T> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn means(&self) -> Vec<T> {
        self.points.iter().map(|p| p.y.mean).collect()
    }

    /// First sign change of the mean, located by linear interpolation.
    pub fn zero_crossing(&self) -> Option<T> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            if a.y.mean == T::zero() {
                Some(a.x)
            } else if (a.y.mean < T::zero()) != (b.y.mean < T::zero()) {
                Some(a.x + (b.x - a.x) * a.y.mean / (a.y.mean - b.y.mean))
            } else {
                None
            }
        })
    }
}

/// `G_z` of each setting against `|beta|^2` or against the detector-independent
/// intensity of the paired vacuum setting.
pub fn gz_curve<T: Real>(
    signal: &[CoincidenceData<T>],
    vacuum: &[CoincidenceData<T>],
    betas: &[T],
    z: T,
    variable: Variable,
) -> Result<RadialCurve<T>> {
    if signal.len() != betas.len() {
        return Err(Error::DimensionMismatch {
            expected: betas.len(),
            got: signal.len(),
        });
    }
    if variable == Variable::DetectorIndependent && vacuum.len() != signal.len() {
        return Err(Error::GridMismatch(format!(
            "{} signal settings but {} vacuum settings",
            signal.len(),
            vacuum.len()
        )));
    }
    let mut points = Vec::with_capacity(signal.len());
    for (i, data) in signal.iter().enumerate() {
        let x = match variable {
            Variable::RawIntensity => betas[i] * betas[i],
            Variable::DetectorIndependent => di_intensity(&vacuum[i])?.mean.max(T::zero()),
        };
        points.push(CurvePoint {
            setting: i,
            x,
            y: daps_gz(data, z)?,
        });
    }
    RadialCurve::new(variable, points)
}

/// Least-squares line `y = slope x + intercept` with its RMS residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub rms_residual: T,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Fit("a line needs at least two points".into()));
    }
    let n = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx == T::zero() {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
    })
}

/// `G(x) = sum_j f_j x^j e^{-b x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussPolyModel<T> {
    pub b: T,
    pub f: Vec<T>,
    pub variable: Variable,
}

impl<T: Real> GaussPolyModel<T> {
    pub fn degree(&self) -> usize {
        self.f.len() - 1
    }

    pub fn eval(&self, x: T) -> T {
        let poly = self.f.iter().rev().fold(T::zero(), |acc, &c| acc * x + c);
        poly * (-self.b * x).exp()
    }

    /// The same function expressed in `x' = scale * x`.
    pub fn rescaled(&self, scale: T, variable: Variable) -> Self {
        let mut power = T::one();
        let f = self
            .f
            .iter()
            .map(|&c| {
                let v = c / power;
                power *= scale;
                v
            })
            .collect();
        Self {
            b: self.b / scale,
            f,
            variable,
        }
    }

    /// Model values as an error-free curve at the given settings.
    pub fn curve(&self, settings: &[(usize, T)]) -> Result<RadialCurve<T>> {
        let points = settings
            .iter()
            .map(|&(setting, x)| CurvePoint {
                setting,
                x,
                y: EstimateWithError::exact(self.eval(x)),
            })
            .collect();
        RadialCurve::new(self.variable, points)
    }
}

/// Fitted model with its weighted residual sum of squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub model: GaussPolyModel<T>,
    pub chi_squared: T,
    pub iterations: usize,
}

/// Whether the decay rate is fitted or held at a given value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode<T> {
    FreeDecay,
    FixedDecay(T),
}

const MAX_ITERATIONS: usize = 100;
const STEP_TOLERANCE: f64 = 1e-10;

/// `f_0 e^{-b x}` by weighted Gauss-Newton, started from a log-linear fit.
pub fn fit_vacuum<T: Real>(curve: &RadialCurve<T>) -> Result<FitResult<T>> {
    if curve.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points, got {}",
            curve.len()
        )));
    }
    let weights = fit_weights(curve);
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let mut used = 0;
    for (p, &w) in curve.points.iter().zip(&weights) {
        if p.y.mean > T::zero() {
            // ln y has standard error delta / y.
            let w = w * p.y.mean * p.y.mean;
            let ly = p.y.mean.ln();
            sw += w;
            sx += w * p.x;
            sy += w * ly;
            sxx += w * p.x * p.x;
            sxy += w * p.x * ly;
            used += 1;
        }
    }
    if used < 2 {
        return Err(Error::Fit(
            "fewer than two positive values for the log-linear start".into(),
        ));
    }
    let det = sw * sxx - sx * sx;
    let (lnf0, b) = if det > T::zero() {
        ((sy * sxx - sx * sxy) / det, -(sw * sxy - sx * sy) / det)
    } else {
        (sy / sw, T::zero())
    };
    gauss_newton(curve, &weights, vec![lnf0.exp()], FitMode::FreeDecay, b)
}

/// `sum_{j <= k_h} f_j x^j e^{-b x}` by weighted Gauss-Newton. The decay is
/// started from (or fixed at, for [`FitMode::FixedDecay`]) `b_init`,
/// typically the vacuum fit; the polynomial is started from the linear
/// least-squares solution at that decay.
pub fn fit_heralded<T: Real>(
    curve: &RadialCurve<T>,
    k_h: usize,
    b_init: T,
    mode: FitMode<T>,
) -> Result<FitResult<T>> {
    if k_h == 0 && mode == FitMode::FreeDecay {
        return fit_vacuum(curve);
    }
    if curve.len() < k_h + 3 {
        return Err(Error::Fit(format!(
            "need at least {} points, got {}",
            k_h + 3,
            curve.len()
        )));
    }
    let weights = fit_weights(curve);
    let b0 = match mode {
        FitMode::FixedDecay(b) => b,
        FitMode::FreeDecay => b_init,
    };
    let start = linear_coefficients(curve, &weights, k_h, b0)?;
    gauss_newton(curve, &weights, start, mode, b0)
}

/// Weights `1 / delta^2`; zero errors are floored at the smallest positive
/// error, and unit weights are used when every error vanishes.
fn fit_weights<T: Real>(curve: &RadialCurve<T>) -> Vec<T> {
    let floor = curve
        .points
        .iter()
        .map(|p| p.y.delta)
        .filter(|&d| d > T::zero())
        .fold(T::infinity(), T::min);
    if !floor.is_finite() {
        return vec![T::one(); curve.len()];
    }
    curve
        .points
        .iter()
        .map(|p| {
            let d = p.y.delta.max(floor);
            T::one() / (d * d)
        })
        .collect()
}

fn linear_coefficients<T: Real>(
    curve: &RadialCurve<T>,
    weights: &[T],
    degree: usize,
    b: T,
) -> Result<Vec<T>> {
    let m = degree + 1;
    let mut a = Matrix::zeros(m, m);
    let mut rhs = vec![T::zero(); m];
    for (p, &w) in curve.points.iter().zip(weights) {
        let e = (-b * p.x).exp();
        let basis: Vec<T> = (0..m).map(|j| p.x.powi(j as i32) * e).collect();
        for i in 0..m {
            rhs[i] += w * basis[i] * p.y.mean;
            for j in 0..m {
                a[(i, j)] += w * basis[i] * basis[j];
            }
        }
    }
    solve(&a, &rhs)
}

fn chi_squared<T: Real>(curve: &RadialCurve<T>, weights: &[T], model: &GaussPolyModel<T>) -> T {
    curve
        .points
        .iter()
        .zip(weights)
        .map(|(p, &w)| {
            let r = p.y.mean - model.eval(p.x);
            w * r * r
        })
        .sum()
}

fn gauss_newton<T: Real>(
    curve: &RadialCurve<T>,
    weights: &[T],
    f: Vec<T>,
    mode: FitMode<T>,
    b: T,
) -> Result<FitResult<T>> {
    let free_b = mode == FitMode::FreeDecay;
    let m = f.len();
    let n_par = m + usize::from(free_b);
    let mut model = GaussPolyModel {
        b,
        f,
        variable: curve.variable,
    };
    let mut chi2 = chi_squared(curve, weights, &model);
    let tol = T::tol(STEP_TOLERANCE);
    let mut last_step = T::infinity();
    for iteration in 1..=MAX_ITERATIONS {
        let mut a = Matrix::zeros(n_par, n_par);
        let mut g = vec![T::zero(); n_par];
        for (p, &w) in curve.points.iter().zip(weights) {
            let e = (-model.b * p.x).exp();
            let mut jac: Vec<T> = (0..m).map(|j| p.x.powi(j as i32) * e).collect();
            if free_b {
                jac.push(-p.x * model.eval(p.x));
            }
            let r = p.y.mean - model.eval(p.x);
            for i in 0..n_par {
                g[i] += w * jac[i] * r;
                for j in 0..n_par {
                    a[(i, j)] += w * jac[i] * jac[j];
                }
            }
        }
        let step =
            solve(&a, &g).map_err(|e| Error::Fit(format!("singular normal equations: {e}")))?;
        let mut scale = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial = model.clone();
            for j in 0..m {
                trial.f[j] += scale * step[j];
            }
            if free_b {
                trial.b += scale * step[m];
            }
            let c = chi_squared(curve, weights, &trial);
            if c <= chi2 {
                accepted = Some((trial, c));
                break;
            }
            scale *= T::lit(0.5);
        }
        let relative = |model: &GaussPolyModel<T>| {
            let mut worst = T::zero();
            for j in 0..m {
                worst = worst.max((scale * step[j]).abs() / model.f[j].abs().max(T::one()));
            }
            if free_b {
                worst = worst.max((scale * step[m]).abs() / model.b.abs().max(T::one()));
            }
            worst
        };
        match accepted {
            Some((trial, c)) => {
                last_step = relative(&trial);
                model = trial;
                chi2 = c;
                if last_step < tol {
                    return Ok(FitResult {
                        model,
                        chi_squared: chi2,
                        iterations: iteration,
                    });
                }
            }
            // No descent along the Gauss-Newton direction: at a minimum up
            // to round-off.
            None => {
                return Ok(FitResult {
                    model,
                    chi_squared: chi2,
                    iterations: iteration,
                })
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        last_step: last_step.as_f64(),
    })
}

/// `d^j/dbeta^j d^j/dbeta*^j e^{-c|beta|^2} = j! (-c)^j L_j(c|beta|^2) e^{-c|beta|^2}`.
pub fn gaussian_mixed_derivative<T: Real>(j: usize, c: T, x: T) -> T {
    let mut fact = T::one();
    for i in 1..=j {
        fact *= T::from_count(i);
    }
    fact * (-c).powi(j as i32) * laguerre(j, T::zero(), c * x) * (-c * x).exp()
}

/// Fock-state prediction from a Gaussian vacuum model,
/// `G^(m) = sum_j C(m,j) (1/j!) (|t|^2/|r|^2)^j d^j d*^j G^(0)`, as a model
/// of degree `m`.
///
/// A model in the detector-independent variable needs `di_scale`, the slope
/// of `|beta_DI|^2` against `|beta|^2`; the result is returned in the
/// variable of the input.
pub fn predict_fock<T: Real>(
    m: usize,
    vacuum: &GaussPolyModel<T>,
    transmittance: T,
    reflectance: T,
    di_scale: Option<T>,
) -> Result<GaussPolyModel<T>> {
    if vacuum.degree() != 0 {
        return Err(Error::InvalidArgument(format!(
            "vacuum model must be Gaussian, got degree {}",
            vacuum.degree()
        )));
    }
    if !(reflectance > T::zero()) {
        return Err(Error::InvalidArgument(
            "reflectance must be positive".into(),
        ));
    }
    let raw = match (vacuum.variable, di_scale) {
        (Variable::RawIntensity, _) => vacuum.clone(),
        (Variable::DetectorIndependent, Some(k)) => {
            vacuum.rescaled(T::one() / k, Variable::RawIntensity)
        }
        (Variable::DetectorIndependent, None) => {
            return Err(Error::InvalidArgument(
                "detector-independent model needs the intensity scale".into(),
            ))
        }
    };
    let c = raw.b;
    let a = c * transmittance / reflectance;
    let mut f = vec![T::zero(); m + 1];
    for j in 0..=m {
        let weight = binomial::<T>(m, j) * (-a).powi(j as i32);
        for (i, &l) in laguerre_coefficients::<T>(j).iter().enumerate() {
            f[i] += weight * l * c.powi(i as i32);
        }
    }
    for v in f.iter_mut() {
        *v *= raw.f[0];
    }
    let predicted = GaussPolyModel {
        b: c,
        f,
        variable: Variable::RawIntensity,
    };
    Ok(match (vacuum.variable, di_scale) {
        (Variable::DetectorIndependent, Some(k)) => {
            predicted.rescaled(k, Variable::DetectorIndependent)
        }
        _ => predicted,
    })
}

/// Quadrature settings for [`predict_convolution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionOptions {
    pub radial_order: usize,
    pub angular_order: usize,
    /// Largest accepted change when both orders are doubled.
    pub tolerance: f64,
}

impl Default for ConvolutionOptions {
    fn default() -> Self {
        Self {
            radial_order: 64,
            angular_order: 64,
            tolerance: 1e-6,
        }
    }
}

/// Tail cut of the thermal radial integral, in units of `n_bar`.
const THERMAL_CUTOFF: f64 = 40.0;

/// `G(beta) = ∫ d²α P(α) G_vac(beta - (t/r) α)` for a rotationally symmetric
/// state against a radial vacuum model in `|beta|^2`; Fock components go
/// through [`predict_fock`].
pub fn predict_convolution<T: Real>(
    state: &StateSpec,
    vacuum: &GaussPolyModel<T>,
    transmittance: T,
    reflectance: T,
    xs: &[T],
    options: ConvolutionOptions,
) -> Result<Vec<T>> {
    if vacuum.variable != Variable::RawIntensity {
        return Err(Error::InvalidArgument(
            "convolution works in |beta|^2".into(),
        ));
    }
    if !state.is_rotation_invariant() {
        return Err(Error::InvalidArgument(format!(
            "{state:?} is not rotationally symmetric"
        )));
    }
    state.validate()?;
    let coarse = convolve(
        state,
        vacuum,
        transmittance,
        reflectance,
        xs,
        options.radial_order,
        options.angular_order,
    )?;
    let fine = convolve(
        state,
        vacuum,
        transmittance,
        reflectance,
        xs,
        2 * options.radial_order,
        2 * options.angular_order,
    )?;
    let difference = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (*a - *b).abs())
        .fold(T::zero(), T::max);
    if difference > T::lit(options.tolerance) {
        return Err(Error::Quadrature {
            difference: difference.as_f64(),
            tolerance: options.tolerance,
        });
    }
    Ok(fine)
}

fn convolve<T: Real>(
    state: &StateSpec,
    vacuum: &GaussPolyModel<T>,
    tau: T,
    rho: T,
    xs: &[T],
    radial: usize,
    angular: usize,
) -> Result<Vec<T>> {
    let s = (tau / rho).sqrt();
    match state {
        StateSpec::Vacuum => Ok(xs.iter().map(|&x| vacuum.eval(x)).collect()),
        StateSpec::Fock { photons } => {
            let model = predict_fock(*photons, vacuum, tau, rho, None)?;
            Ok(xs.iter().map(|&x| model.eval(x)).collect())
        }
        StateSpec::FockMixture { weights } => {
            let mut out = vec![T::zero(); xs.len()];
            for (m, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let model = predict_fock(m, vacuum, tau, rho, None)?;
                for (o, &x) in out.iter_mut().zip(xs) {
                    *o += T::lit(w) * model.eval(x);
                }
            }
            Ok(out)
        }
        StateSpec::Coherent { re, im, .. } => {
            let ring = s * T::lit(re.hypot(*im));
            let (nodes, w) = angular_rule::<T>(angular);
            Ok(xs
                .iter()
                .map(|&x| ring_average(vacuum, x, ring, &nodes, &w))
                .collect())
        }
        StateSpec::Thermal { mean_photons } => {
            let nbar = T::lit(*mean_photons);
            if nbar == T::zero() {
                return Ok(xs.iter().map(|&x| vacuum.eval(x)).collect());
            }
            let (an, aw) = angular_rule::<T>(angular);
            let (rn, rw) = gauss_legendre::<T>(radial);
            let radius = (nbar * T::lit(THERMAL_CUTOFF)).sqrt();
            let half = radius * T::lit(0.5);
            Ok(xs
                .iter()
                .map(|&x| {
                    let mut acc = T::zero();
                    for (&u, &wu) in rn.iter().zip(&rw) {
                        let rr = half * (u + T::one());
                        let density = T::lit(2.0) * rr / nbar * (-rr * rr / nbar).exp();
                        acc += wu * half * density * ring_average(vacuum, x, s * rr, &an, &aw);
                    }
                    acc
                })
                .collect())
        }
        StateSpec::Mixture { components } => {
            let mut out = vec![T::zero(); xs.len()];
            for c in components {
                let part = convolve(&c.state, vacuum, tau, rho, xs, radial, angular)?;
                for (o, v) in out.iter_mut().zip(part) {
                    *o += T::lit(c.weight) * v;
                }
            }
            Ok(out)
        }
    }
}

/// Gauss-Legendre nodes on `[0, 2 pi]` with weights normalized to one.
fn angular_rule<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let (n, w) = gauss_legendre::<T>(order);
    let nodes = n.iter().map(|&u| T::PI() * (u + T::one())).collect();
    let weights = w.iter().map(|&v| v * T::lit(0.5)).collect();
    (nodes, weights)
}

/// Average of the vacuum model over a circle of radius `ring` centred on a
/// point at distance `sqrt(x)` from the origin.
fn ring_average<T: Real>(
    vacuum: &GaussPolyModel<T>,
    x: T,
    ring: T,
    nodes: &[T],
    weights: &[T],
) -> T {
    let cross = T::lit(2.0) * x.sqrt() * ring;
    nodes
        .iter()
        .zip(weights)
        .map(|(&phi, &w)| w * vacuum.eval((x + ring * ring - cross * phi.cos()).max(T::zero())))
        .sum()
}

/// Default grid for the optimal-`z` search: `-10, -9.95, ..., 0`.
pub fn default_z_grid<T: Real>() -> Vec<T> {
    (0..=200)
        .map(|i| T::lit((i as f64 - 200.0) / 20.0))
        .collect()
}

/// Outcome of the optimal-`z` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalZ<T> {
    pub z: T,
    pub estimate: EstimateWithError<T>,
    /// `-G_z / delta G_z` at the optimum.
    pub significance: T,
    /// Set when no grid point gives a negative value.
    pub nonnegative: bool,
}

/// Maximizes `-G_z(0) / delta G_z(0)` over a `z` grid.
pub fn optimal_z<T: Real>(origin: &CoincidenceData<T>, grid: &[T]) -> Result<OptimalZ<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty z grid".into()));
    }
    let mut best: Option<OptimalZ<T>> = None;
    let mut any_negative = false;
    for &z in grid {
        let estimate = daps_gz(origin, z)?;
        any_negative |= estimate.mean < T::zero();
        let significance = estimate.significance_below_zero();
        if best.is_none_or(|b| significance > b.significance) {
            best = Some(OptimalZ {
                z,
                estimate,
                significance,
                nonnegative: false,
            });
        }
    }
    let mut best = best.expect("nonempty grid");
    best.nonnegative = !any_negative;
    Ok(best)
}

/// `1 - prod_n (Phi(d_n + 3) - Phi(d_n - 3))` with
/// `d_n = |mu_n - mu'_n| / sqrt(delta_n^2 + delta'_n^2)`.
pub fn discrimination_probability<T: Real>(a: &RadialCurve<T>, b: &RadialCurve<T>) -> Result<T> {
    if a.len() != b.len()
        || a.points
            .iter()
            .zip(&b.points)
            .any(|(p, q)| p.setting != q.setting)
    {
        return Err(Error::GridMismatch(
            "curves do not share their settings".into(),
        ));
    }
    let three = T::lit(3.0);
    let mut keep = T::one();
    for (p, q) in a.points.iter().zip(&b.points) {
        let gap = (p.y.mean - q.y.mean).abs();
        let spread = (p.y.delta * p.y.delta + q.y.delta * q.y.delta).sqrt();
        let d = if gap == T::zero() {
            T::zero()
        } else if spread == T::zero() {
            T::infinity()
        } else {
            gap / spread
        };
        keep *= normal_cdf(d + three) - normal_cdf(d - three);
    }
    Ok(T::one() - keep)
}

/// Symmetric matrix of pairwise discrimination probabilities.
pub fn discrimination_matrix<T: Real>(curves: &[RadialCurve<T>]) -> Result<Matrix<T>> {
    let n = curves.len();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let p = discrimination_probability(&curves[i], &curves[j])?;
            out[(i, j)] = p;
            out[(j, i)] = p;
        }
    }
    Ok(out)
}
