//! Hermitian matrices as elements of a special Jordan algebra.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

pub type C64 = Complex<f64>;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// An n×n complex Hermitian matrix.
///
/// The Hermitian invariant is checked on construction and afterwards
/// maintained by symmetrizing every computed result.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    m: DMatrix<C64>,
}

impl Element {
    /// Validates that `m` is square and Hermitian within `tol.eq`.
    pub fn new(m: DMatrix<C64>, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let deviation = (&m - m.adjoint()).norm();
        if deviation > tol.eq {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::hermitian_part(m))
    }

    /// (M + M†)/2, which is exact for matrices that are Hermitian up to rounding.
    pub(crate) fn hermitian_part(m: DMatrix<C64>) -> Self {
        let adj = m.adjoint();
        Self {
            m: (m + adj).map(|z| z * 0.5),
        }
    }

    /// Row-major real entries.
    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        let m = DMatrix::from_row_slice(n, n, data).map(|x| c(x, 0.0));
        Self::new(m, &Tolerances::default())
    }

    /// Row-major complex entries.
    pub fn from_complex(n: usize, data: &[C64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, data), &Tolerances::default())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn scalar(n: usize, a: f64) -> Self {
        Self::identity(n).scale(a)
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c(v, 0.0);
        }
        Self { m }
    }

    /// Rank-one projection onto the span of `v` (normalized internally).
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj() / norm2;
            }
        }
        Self::hermitian_part(m)
    }

    pub fn sigma_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("hermitian")
    }

    pub fn sigma_y() -> Self {
        Self::from_complex(2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .expect("hermitian")
    }

    pub fn sigma_z() -> Self {
        Self::diag(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Real part of trace(self · other); the trace inner product on Hermitian matrices.
    pub fn pair(&self, other: &Element) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn distance(&self, other: &Element) -> f64 {
        (&self.m - &other.m).norm()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut v: Vec<f64> = self.m.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn operator_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }

    /// Eigenvalues in ascending order with the matching unit eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        let n = self.dim();
        let eig = self.m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        (values, vectors)
    }

    /// Functional calculus f(X) computed from an eigendecomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Element {
        let (values, vectors) = self.eigh();
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (k, &lambda) in values.iter().enumerate() {
            let v = vectors.column(k);
            m += (v * v.adjoint()).map(|z| z * f(lambda));
        }
        Self::hermitian_part(m)
    }

    /// The unitary exp(itX).
    pub fn unitary_exp(&self, t: f64) -> DMatrix<C64> {
        let (values, vectors) = self.eigh();
        let n = self.dim();
        let mut u = DMatrix::zeros(n, n);
        for (k, &lambda) in values.iter().enumerate() {
            let v = vectors.column(k);
            let phase = c(libm::cos(t * lambda), libm::sin(t * lambda));
            u += (v * v.adjoint()).map(|z| z * phase);
        }
        u
    }

    /// Jordan product (XY + YX)/2. Panics on a dimension mismatch; see
    /// [`crate::algebra::jordan_product`] for the checked form.
    pub fn jordan(&self, other: &Element) -> Element {
        assert_eq!(self.dim(), other.dim(), "Jordan product of mismatched dimensions");
        let xy = &self.m * &other.m;
        Self::hermitian_part(xy)
    }

    pub fn square(&self) -> Element {
        Self::hermitian_part(&self.m * &self.m)
    }

    /// Frobenius norm of the ordinary commutator XY − YX.
    pub fn commutator_norm(&self, other: &Element) -> f64 {
        let xy = &self.m * &other.m;
        let yx = &other.m * &self.m;
        (xy - yx).norm()
    }

    /// i(HX − XH), Hermitian whenever H and X are.
    pub fn i_commutator(&self, x: &Element) -> Element {
        let hx = &self.m * &x.m;
        let xh = &x.m * &self.m;
        Self::hermitian_part((hx - xh).map(|z| z * c(0.0, 1.0)))
    }

    /// U X U† for a square matrix U of matching size.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Element {
        Self::hermitian_part(u * &self.m * u.adjoint())
    }

    pub fn scale(&self, a: f64) -> Element {
        Self {
            m: self.m.map(|z| z * a),
        }
    }

    pub fn is_idempotent(&self, tol: &Tolerances) -> bool {
        self.square().distance(self) <= tol.eq
    }

    /// 0 ≤ X ≤ 𝟙 up to the eigenvalue floor.
    pub fn in_unit_interval(&self, tol: &Tolerances) -> bool {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) => lo >= -tol.psd && hi <= 1.0 + tol.psd,
            _ => true,
        }
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        Element { m: &self.m + &rhs.m }
    }
}

impl Add for Element {
    type Output = Element;
    fn add(self, rhs: Element) -> Element {
        Element { m: self.m + rhs.m }
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        Element { m: &self.m - &rhs.m }
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        Element { m: self.m - rhs.m }
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Element {
    type Output = Element;
    fn mul(self, rhs: f64) -> Element {
        self.scale(rhs)
    }
}

impl Mul<f64> for Element {
    type Output = Element;
    fn mul(self, rhs: f64) -> Element {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_non_hermitian() {
        let err = Element::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
        assert!(matches!(
            Element::from_real(2, &[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pair_is_trace_of_product() {
        let x = Element::sigma_y();
        let y = Element::sigma_y();
        assert_relative_eq!(x.pair(&y), 2.0);
        assert_relative_eq!(Element::sigma_x().pair(&Element::sigma_z()), 0.0);
    }

    #[test]
    fn complex_eigendecomposition_reconstructs() {
        let h = Element::from_complex(
            3,
            &[
                c(1.0, 0.0), c(0.3, 0.4), c(0.0, -0.2),
                c(0.3, -0.4), c(-0.5, 0.0), c(0.7, 0.1),
                c(0.0, 0.2), c(0.7, -0.1), c(2.0, 0.0),
            ],
        )
        .unwrap();
        let rebuilt = h.map_spectrum(|x| x);
        assert!(rebuilt.distance(&h) < 1e-13);
        let (values, vectors) = h.eigh();
        for (k, &lambda) in values.iter().enumerate() {
            let v = vectors.column(k);
            let residual = (h.matrix() * v - v.map(|z| z * lambda)).norm();
            assert!(residual < 1e-12);
        }
    }

    #[test]
    fn i_commutator_of_pauli() {
        // i[σz/2, σx] = −σy
        let h = Element::sigma_z().scale(0.5);
        let got = h.i_commutator(&Element::sigma_x());
        assert!(got.distance(&-Element::sigma_y()) < 1e-15);
    }
}
