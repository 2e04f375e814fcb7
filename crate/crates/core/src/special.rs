//! Special functions: factorials, Poisson and binomial weights, Laguerre
//! polynomials, Gauss-Legendre nodes and the standard normal CDF.

use crate::num::Real;

/// Table of `ln(n!)` for `n = 0..=n_max`, accumulated term by term.
#[derive(Debug, Clone)]
pub struct LnFactorial<T> {
    table: Vec<T>,
}

impl<T: Real> LnFactorial<T> {
    pub fn new(n_max: usize) -> Self {
        let mut table = Vec::with_capacity(n_max + 1);
        let mut acc = T::zero();
        table.push(acc);
        for i in 1..=n_max {
            acc += T::from_count(i).ln();
            table.push(acc);
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, n: usize) -> T {
        self.table[n]
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

pub fn ln_factorial<T: Real>(n: usize) -> T {
    (2..=n).map(|i| T::from_count(i).ln()).sum()
}

/// Binomial coefficient as a float.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_count(n - i) / T::from_count(i + 1);
    }
    acc
}

/// Poisson weights `e^{-mean} mean^n / n!` for `n = 0..=n_max`.
pub fn poisson_pmf<T: Real>(mean: T, n_max: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n_max + 1];
    if mean <= T::zero() {
        out[0] = T::one();
        return out;
    }
    let ln_mean = mean.ln();
    let mut ln_fact = T::zero();
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            ln_fact += T::from_count(n).ln();
        }
        *slot = (T::from_count(n) * ln_mean - mean - ln_fact).exp();
    }
    out
}

/// Rows `B[r][j] = C(r, j) q^j (1-q)^{r-j}` for `r = 0..=n_max`, built with
/// the Pascal recurrence so every entry is a convex combination.
pub fn binomial_rows<T: Real>(q: T, n_max: usize) -> Vec<Vec<T>> {
    let p = T::one() - q;
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n_max + 1);
    rows.push(vec![T::one()]);
    for r in 1..=n_max {
        let prev = &rows[r - 1];
        let mut row = vec![T::zero(); r + 1];
        for j in 0..=r {
            let stay = if j < r { prev[j] * p } else { T::zero() };
            let take = if j > 0 { prev[j - 1] * q } else { T::zero() };
            row[j] = stay + take;
        }
        rows.push(row);
    }
    rows
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by the three-term
/// recurrence in the degree.
pub fn laguerre<T: Real>(n: usize, alpha: T, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() + alpha - x;
    for k in 1..n {
        let kf = T::from_count(k);
        let next = ((T::lit(2.0) * kf + T::one() + alpha - x) * cur - (kf + alpha) * prev)
            / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients of the ordinary Laguerre polynomial:
/// `L_j(u) = sum_i C(j,i) (-u)^i / i!`.
pub fn laguerre_coefficients<T: Real>(j: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(j + 1);
    let mut inv_fact = T::one();
    for i in 0..=j {
        if i > 0 {
            inv_fact /= T::from_count(i);
        }
        let sign = if i % 2 == 0 { T::one() } else { -T::one() };
        out.push(sign * binomial::<T>(j, i) * inv_fact);
    }
    out
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 1, "quadrature order must be positive");
    let mut nodes = vec![T::zero(); order];
    let mut weights = vec![T::zero(); order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, refined by Newton in f64.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[order - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[order - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Standard normal cumulative distribution `int_{-inf}^x e^{-u^2/2} du / sqrt(2 pi)`.
pub fn normal_cdf<T: Real>(x: T) -> T {
    let v = 0.5 * libm::erfc(-x.as_f64() / std::f64::consts::SQRT_2);
    T::lit(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_sums_to_one() {
        let p = poisson_pmf(3.5_f64, 60);
        let s: f64 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert_eq!(poisson_pmf(0.0_f64, 3), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn binomial_rows_match_closed_form() {
        let rows = binomial_rows(0.3_f64, 10);
        for (r, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let expect =
                    binomial::<f64>(r, j) * 0.3_f64.powi(j as i32) * 0.7_f64.powi((r - j) as i32);
                assert!((v - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7_f64;
        assert!((laguerre(1, 0.0, x) - (1.0 - x)).abs() < 1e-15);
        assert!((laguerre(2, 0.0, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-15);
        assert!((laguerre(2, 1.0, x) - (x * x - 6.0 * x + 6.0) / 2.0).abs() < 1e-15);
        let c = laguerre_coefficients::<f64>(3);
        let horner: f64 = c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        assert!((horner - laguerre(3, 0.0, x)).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre::<f64>(8);
        let s: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let (x, w) = gauss_legendre::<f64>(7);
        let s: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn normal_cdf_reference_values() {
        // Reference values from the series expansion of erf.
        assert!((normal_cdf(0.0_f64) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(3.0_f64) - 0.998_650_101_968_369_9).abs() < 1e-13);
        assert!((normal_cdf(-3.0_f64) - 0.001_349_898_031_630_094_6).abs() < 1e-13);
        assert!((normal_cdf(1.0_f64) - 0.841_344_746_068_542_9).abs() < 1e-13);
    }
}
