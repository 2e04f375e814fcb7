use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::special::{laguerre, LnFactorial};

/// Largest photon number accepted by the displacement routines.
pub const MAX_FOCK_INDEX: usize = 1000;

/// Matrix element `<n| D(gamma) |m>` of the displacement operator.
///
/// Uses `sqrt(m!/n!) gamma^{n-m} e^{-|gamma|^2/2} L_m^{(n-m)}(|gamma|^2)` for
/// `n >= m` and the conjugate-symmetric form otherwise, with the factorial
/// ratio accumulated in log space.
pub fn displaced_fock_overlap<T: Real>(
    n: usize,
    m: usize,
    gamma: Complex<T>,
) -> Result<Complex<T>> {
    check_index(n.max(m))?;
    if !(gamma.re.is_finite() && gamma.im.is_finite()) {
        return Err(Error::InvalidArgument(
            "displacement amplitude must be finite".into(),
        ));
    }
    let x = gamma.norm_sqr();
    if x == T::zero() {
        return Ok(if n == m {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        });
    }
    let lf = LnFactorial::new(n.max(m));
    let magnitude = overlap_magnitude(&lf, n, m, x);
    let d = n.abs_diff(m) as i32;
    let unit = gamma / gamma.norm();
    let phase = if n >= m {
        unit.powi(d)
    } else {
        (-unit.conj()).powi(d)
    };
    Ok(phase * magnitude)
}

/// Real signed factor `sqrt(lo!/hi!) |gamma|^{hi-lo} e^{-x/2} L_lo^{(hi-lo)}(x)`.
fn overlap_magnitude<T: Real>(lf: &LnFactorial<T>, n: usize, m: usize, x: T) -> T {
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    let d = T::from_count(hi - lo);
    let lag = laguerre(lo, d, x);
    let half = T::lit(0.5);
    let ln_pref = half * (lf.get(lo) - lf.get(hi)) + half * d * x.ln() - half * x;
    ln_pref.exp() * lag
}

/// `p[j][n] = |<n| D(gamma) |j>|^2` for `j <= j_max`, `n <= n_max`, where
/// `x = |gamma|^2`.
pub fn displacement_probabilities<T: Real>(
    j_max: usize,
    n_max: usize,
    x: T,
) -> Result<Vec<Vec<T>>> {
    check_index(j_max.max(n_max))?;
    let mut out = vec![vec![T::zero(); n_max + 1]; j_max + 1];
    if x == T::zero() {
        for (j, row) in out.iter_mut().enumerate() {
            if j <= n_max {
                row[j] = T::one();
            }
        }
        return Ok(out);
    }
    let lf = LnFactorial::new(j_max.max(n_max));
    for (j, row) in out.iter_mut().enumerate() {
        for (n, slot) in row.iter_mut().enumerate() {
            let a = overlap_magnitude(&lf, n, j, x);
            *slot = a * a;
        }
    }
    Ok(out)
}

fn check_index(index: usize) -> Result<()> {
    if index > MAX_FOCK_INDEX {
        Err(Error::IndexOutOfRange {
            index,
            max: MAX_FOCK_INDEX,
        })
    } else {
        Ok(())
    }
}
