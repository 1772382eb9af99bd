//! Ready-made processes: classical chains embedded in path space and
//! unitary (Heisenberg-picture) evolutions.
//!
//! A classical process with n states over T + 1 times lives in the diagonal
//! algebra of dimension n^(T+1), one coordinate per path (x_0, …, x_T) with
//! x_0 the most significant digit. R_t sends the i-th diagonal projection of
//! the n-state algebra to the cylinder event {x_t = i}, and the state is the
//! diagonal density of the path measure.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::algebra::JordanAlgebra;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::maps::{make_observable, Observable};
use crate::markov::{MarkovProcess, TimeGrid};
use crate::states::{diagonal_state, State};
use crate::tol::Tolerances;

fn digit(path: usize, t: usize, n: usize, steps: usize) -> usize {
    path / n.pow((steps - t) as u32) % n
}

/// The process of coordinates x_0, …, x_T under a path measure given as
/// probabilities indexed by path (length n^(T+1), all positive).
pub fn path_measure_process(n: usize, steps: usize, path_probabilities: &[f64], tol: &Tolerances) -> Result<MarkovProcess> {
    if n < 1 || steps < 1 {
        return Err(Error::Precondition("need at least one state and one step"));
    }
    let size = n.pow((steps + 1) as u32);
    if path_probabilities.len() != size {
        return Err(Error::DimensionMismatch {
            left: size,
            right: path_probabilities.len(),
        });
    }
    let state = diagonal_state(path_probabilities, tol)?;
    let source = JordanAlgebra::diagonal(n);
    let target = JordanAlgebra::diagonal(size);
    let observables = (0..=steps)
        .map(|t| {
            let images: Vec<Element> = (0..n)
                .map(|i| {
                    let d: Vec<f64> = (0..size)
                        .map(|path| if digit(path, t, n, steps) == i { 1.0 } else { 0.0 })
                        .collect();
                    Element::diag(&d)
                })
                .collect();
            make_observable(&source, &target, &images, tol)
        })
        .collect::<Result<Vec<Observable>>>()?;
    let times = TimeGrid::new((0..=steps).map(|t| t as f64).collect())?;
    MarkovProcess::new(times, observables, state, tol)
}

/// A Markov chain with one row-stochastic matrix per step.
pub fn classical_chain(initial: &[f64], transitions: &[DMatrix<f64>], tol: &Tolerances) -> Result<MarkovProcess> {
    let n = initial.len();
    let steps = transitions.len();
    for p in transitions {
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: p.nrows().max(p.ncols()),
            });
        }
        if p.iter().any(|&x| x < 0.0) || p.row_iter().any(|r| (r.sum() - 1.0).abs() > tol.eq) {
            return Err(Error::Precondition("transition matrix is not row-stochastic"));
        }
    }
    let size = n.pow((steps + 1) as u32);
    let probs: Vec<f64> = (0..size)
        .map(|path| {
            let mut prob = initial[digit(path, 0, n, steps)];
            for (t, p) in transitions.iter().enumerate() {
                prob *= p[(digit(path, t, n, steps), digit(path, t + 1, n, steps))];
            }
            prob
        })
        .collect();
    path_measure_process(n, steps, &probs, tol)
}

/// A time-homogeneous chain with `steps` steps of the same matrix.
pub fn homogeneous_chain(initial: &[f64], p: &DMatrix<f64>, steps: usize, tol: &Tolerances) -> Result<MarkovProcess> {
    classical_chain(initial, &vec![p.clone(); steps], tol)
}

/// A binary process over three times that is not Markov: x_0 is uniform,
/// x_1 is an independent fair coin, and x_2 repeats x_0 with probability
/// `stay`. Given x_1, the law of x_2 still depends on x_0.
pub fn memory_chain(stay: f64, tol: &Tolerances) -> Result<MarkovProcess> {
    if !(stay > 0.0 && stay < 1.0) {
        return Err(Error::Precondition("stay probability must lie in (0, 1)"));
    }
    let probs: Vec<f64> = (0..8)
        .map(|path| {
            let (x0, x2) = (digit(path, 0, 2, 2), digit(path, 2, 2, 2));
            0.25 * if x0 == x2 { stay } else { 1.0 - stay }
        })
        .collect();
    path_measure_process(2, 2, &probs, tol)
}

/// R_t(X) = e^{itH} X e^{−itH} on the full Hermitian algebra.
pub fn unitary_process(h: &Element, times: TimeGrid, state: State, tol: &Tolerances) -> Result<MarkovProcess> {
    let full = JordanAlgebra::full(h.dim());
    let observables = times
        .points()
        .iter()
        .map(|&t| Observable::conjugation(&full, &h.unitary_exp(t), tol))
        .collect::<Result<Vec<_>>>()?;
    MarkovProcess::new(times, observables, state, tol)
}
