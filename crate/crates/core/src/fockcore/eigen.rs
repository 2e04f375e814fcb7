use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::num::Real;

/// Full eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Unit eigenvectors stored as columns, in the order of `values`.
    pub vectors: Matrix<T>,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal mass is at round-off level.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<SymmetricEigen<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.cols(),
        });
    }
    let scale = a.max_abs().max(T::one());
    let asym = a.asymmetry();
    if asym > T::tol(1e-12) * scale {
        return Err(Error::NotSymmetric(asym.as_f64()));
    }
    let half = T::lit(0.5);
    let mut m = Matrix::from_fn(n, n, |i, j| half * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let frob: T = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)] * m[(i, j)])
        .sum::<T>()
        .sqrt();
    let target = T::epsilon() * frob;

    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<T>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let sign = if theta < T::zero() {
                    -T::one()
                } else {
                    T::one()
                };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .partial_cmp(&m[(j, j)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    for c in 0..n {
        orient(&mut vectors, c);
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Flips the column so its first non-negligible entry is positive.
fn orient<T: Real>(v: &mut Matrix<T>, c: usize) {
    let tiny = T::tol(1e-12);
    let first = (0..v.rows()).map(|r| v[(r, c)]).find(|x| x.abs() > tiny);
    if matches!(first, Some(x) if x < T::zero()) {
        for r in 0..v.rows() {
            v[(r, c)] = -v[(r, c)];
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix with a unit eigenvector.
pub fn symmetric_eigen_min<T: Real>(a: &Matrix<T>) -> Result<(T, Vec<T>)> {
    if a.rows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let eig = symmetric_eigen(a)?;
    Ok((eig.values[0], eig.vectors.column(0)))
}
