//! Small dense linear algebra helpers shared by the numeric modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type Vecf = DVector<f64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn cmax_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// The 2×2 matrix E with E₁₂ = −E₂₁ = 1.
pub fn e2() -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// Standard symplectic matrix J = [[0, I], [−I, 0]] of size 2d.
pub fn j_matrix(d: usize) -> Mat {
    let mut j = Mat::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, d + i)] = 1.0;
        j[(d + i, i)] = -1.0;
    }
    j
}

pub fn antisymmetry_residual(m: &Mat) -> f64 {
    max_abs(&(m + m.transpose()))
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let lu = m.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(m.nrows() as i32) {
        return Err(Error::SingularMatrix);
    }
    lu.try_inverse().ok_or(Error::SingularMatrix)
}

pub fn cinverse(m: &CMat) -> Result<CMat> {
    m.clone().try_inverse().ok_or(Error::SingularMatrix)
}

/// Positive-definiteness via symmetric elimination with pivot threshold 1e−12·trace.
pub fn is_positive_definite(m: &Mat) -> bool {
    let n = m.nrows();
    let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
    if !(trace > 0.0) {
        return n == 0;
    }
    let thresh = 1e-12 * trace;
    let mut a = m.clone();
    for k in 0..n {
        let piv = a[(k, k)];
        if !(piv > thresh) {
            return false;
        }
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    true
}

/// Pivots of an unpivoted LDLᵀ factorization of a complex symmetric matrix.
/// For matrices with positive definite real part every pivot has positive real part.
pub fn complex_ldlt_pivots(m: &CMat) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut piv = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[(k, k)];
        if p.norm() == 0.0 || !p.is_finite() {
            return Err(Error::SingularMatrix);
        }
        piv.push(p);
        for i in k + 1..n {
            let f = a[(i, k)] / p;
            for j in k + 1..n {
                let akj = a[(k, j)];
                a[(i, j)] -= f * akj;
            }
        }
    }
    Ok(piv)
}

/// Principal-branch log of √det for a complex symmetric matrix with Re part PD.
pub fn log_sqrt_det(m: &CMat) -> Result<Complex64> {
    Ok(complex_ldlt_pivots(m)?.iter().map(|p| p.sqrt().ln()).sum())
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in ascending order with matching eigenvector columns.
pub fn sym_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = Mat::identity(n, n);
    let scale = a.iter().map(|x| x * x).sum::<f64>();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, ascending. Uses the real embedding
/// [[Re, −Im], [Im, Re]] whose spectrum is that of `m` with each value doubled.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let emb = Mat::from_fn(2 * n, 2 * n, |r, c| {
        let (i, j) = (r % n, c % n);
        let z = m[(i, j)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let (vals, _) = sym_eigen(&emb);
    vals.into_iter().step_by(2).collect()
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(m: &Mat) -> Mat {
    let n = m.nrows();
    let norm = m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = m / 2f64.powi(s);
    let mut term = Mat::identity(n, n);
    let mut sum = Mat::identity(n, n);
    for k in 1..30 {
        term = &term * &x / k as f64;
        sum += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Residual ‖m − mᴴ‖_max.
pub fn hermitian_residual(m: &CMat) -> f64 {
    cmax_abs(&(m - m.adjoint()))
}
