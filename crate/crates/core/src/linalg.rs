//! Dense real-matrix routines: symmetric spectra, pseudoinverses and the
//! matrix exponential and principal logarithm used by the generator code.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Pseudoinverse of a real symmetric positive semidefinite matrix; eigenvalues
/// at or below `cutoff` are treated as zero. Returns the inverse and the rank.
pub fn symmetric_pinv(m: &DMatrix<f64>, cutoff: f64) -> (DMatrix<f64>, usize) {
    let n = m.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), 0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut out = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lambda;
        }
    }
    (out, rank)
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Ratio of extreme singular values; infinite for rank-deficient input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Moore–Penrose pseudoinverse with singular values at or below `cutoff` dropped.
pub fn pinv(m: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut out = DMatrix::zeros(c, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            out += (vt.row(k).transpose() * u.column(k).transpose()) / s;
        }
    }
    out
}

pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = one_norm(a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let b = a * scale;
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &b / k as f64;
        result += &term;
        if one_norm(&term) <= f64::EPSILON * one_norm(&result) * 1e-2 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn try_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or(Error::Numerical("singular matrix in square-root iteration"))
}

// Denman–Beavers iteration; converges to the principal square root when no
// eigenvalue lies on the closed negative real axis.
fn sqrtm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..100 {
        let y_inv = try_inverse(&y)?;
        let z_inv = try_inverse(&z)?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let change = one_norm(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if change <= 1e-15 * one_norm(&y).max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::Numerical("square-root iteration did not converge"))
}

/// Principal matrix logarithm by inverse scaling and squaring.
pub fn logm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    for lambda in a.clone().complex_eigenvalues().iter() {
        let modulus = libm::hypot(lambda.re, lambda.im);
        let on_axis = lambda.im.abs() <= 1e-12 * modulus.max(1.0) && lambda.re <= 0.0;
        if on_axis || modulus <= 1e-14 {
            return Err(Error::NoPrincipalLogarithm {
                re: lambda.re,
                im: lambda.im,
            });
        }
    }
    let identity = DMatrix::<f64>::identity(n, n);
    let mut b = a.clone();
    let mut roots = 0u32;
    while one_norm(&(&b - &identity)) > 0.25 {
        if roots >= 60 {
            return Err(Error::Numerical("logarithm scaling did not converge"));
        }
        b = sqrtm(&b)?;
        roots += 1;
    }
    // log(B) = 2 artanh(Z) with Z = (B - I)(B + I)^{-1}
    let z = (&b - &identity) * try_inverse(&(&b + &identity))?;
    let z2 = &z * &z;
    let mut power = z.clone();
    let mut sum = z.clone();
    for m in 1..200 {
        power = &power * &z2;
        let term = &power / (2 * m + 1) as f64;
        sum += &term;
        if one_norm(&term) <= 1e-18 * one_norm(&sum).max(1e-300) {
            break;
        }
    }
    Ok(sum * (2.0 * libm::pow(2.0, roots as f64)))
}
