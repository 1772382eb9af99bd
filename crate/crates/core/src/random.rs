//! Seeded generators for random test inputs. Everything here is
//! deterministic in its seed.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::{c, Element, C64};
use crate::linalg::sqrt;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex matrix with real and imaginary parts uniform in [−1, 1].
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Element {
    Element::hermitian_part(complex_matrix(rng, n))
}

/// Real symmetric matrix with entries uniform in [−1, 1].
pub fn real_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Element {
    let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..=1.0), 0.0));
    Element::hermitian_part(m)
}

/// Unitary from Gram–Schmidt on the columns of a random complex matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    loop {
        let g = complex_matrix(rng, n);
        let mut cols: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(n);
        let mut ok = true;
        for k in 0..n {
            let mut v = g.column(k).into_owned();
            for _ in 0..2 {
                for u in &cols {
                    let coef = u.dotc(&v);
                    v -= u.map(|z| z * coef);
                }
            }
            let norm = v.norm();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            cols.push(v.map(|z| z / norm));
        }
        if ok {
            return DMatrix::from_columns(&cols);
        }
    }
}

/// Orthogonal projection onto a random `rank`-dimensional subspace.
pub fn projection<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Element {
    let u = unitary(rng, n);
    let mut d = alloc::vec![0.0; n];
    for x in d.iter_mut().take(rank) {
        *x = 1.0;
    }
    Element::diag(&d).conjugate_by(&u)
}

/// Random orthogonal partition of 𝟙 into `ranks.len()` projections.
pub fn partition<R: Rng + ?Sized>(rng: &mut R, ranks: &[usize]) -> Vec<Element> {
    let n: usize = ranks.iter().sum();
    let u = unitary(rng, n);
    let mut start = 0;
    ranks
        .iter()
        .map(|&r| {
            let mut d = alloc::vec![0.0; n];
            for x in &mut d[start..start + r] {
                *x = 1.0;
            }
            start += r;
            Element::diag(&d).conjugate_by(&u)
        })
        .collect()
}

/// Probability vector with entries bounded away from zero.
pub fn distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// A unit vector uniform on the real sphere in n dimensions (rejection from the cube).
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = sqrt(v.iter().map(|x| x * x).sum());
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
