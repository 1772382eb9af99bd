//! Instance generators and independent oracles shared by the integration
//! tests. Oracles work on raw matrices and never call the library routine
//! they check.

#![allow(dead_code)]

use jmarkov::random;
use jmarkov::states::random_faithful_state_from;
use jmarkov::{Element, JordanAlgebra, Pairing, State, Tolerances, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    random::rng(seed)
}

/// Re trace(ρA).
pub fn expect(rho: &DMatrix<C64>, a: &DMatrix<C64>) -> f64 {
    (rho * a).trace().re
}

pub fn herm(m: DMatrix<C64>, tol: &Tolerances) -> Element {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Element::new(h, tol).expect("hermitian")
}

/// Logistic functional calculus: maps any Hermitian X strictly into (0, 𝟙)
/// while staying in every Jordan algebra that contains X.
pub fn squash(x: &Element) -> Element {
    x.map_spectrum(|l| 1.0 / (1.0 + (-2.0 * l).exp()))
}

/// Random composition of n into k positive parts.
pub fn ranks<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut r = vec![1; k];
    for _ in 0..(n - k) {
        let i = rng.gen_range(0..k);
        r[i] += 1;
    }
    r
}

/// A random orthogonal partition of 𝟙 in dim n with k blocks, and the
/// associative algebra it spans.
pub fn partition_algebra<R: Rng>(rng: &mut R, n: usize, k: usize, tol: &Tolerances) -> (Vec<Element>, JordanAlgebra) {
    let r = ranks(rng, n, k);
    let parts = random::partition(rng, &r);
    let a = JordanAlgebra::from_spanning_set(n, &parts, tol).expect("partition algebra");
    (parts, a)
}

/// Σ P_k W P_k: commutes with every block projection.
pub fn block_diagonal(parts: &[Element], w: &Element) -> Element {
    let n = w.dim();
    parts.iter().fold(Element::zero(n), |acc, p| {
        let m = p.matrix() * w.matrix() * p.matrix();
        &acc + &Element::new(m, &Tolerances::default()).unwrap()
    })
}

/// A faithful state whose density commutes with every block projection.
pub fn block_state<R: Rng>(rng: &mut R, parts: &[Element], tol: &Tolerances) -> State {
    let n = parts[0].dim();
    let g = random::complex_matrix(rng, n);
    let gg = herm(&g * g.adjoint(), tol);
    let b = &block_diagonal(parts, &gg) + &Element::scalar(n, 0.05);
    let t = b.trace();
    State::new(b.scale(1.0 / t), tol).unwrap()
}

pub fn faithful<R: Rng>(rng: &mut R, n: usize) -> State {
    random_faithful_state_from(rng, n)
}

/// Sum of the selected parts.
pub fn subset(parts: &[Element], mask: usize) -> DMatrix<C64> {
    let n = parts[0].dim();
    let mut e = DMatrix::zeros(n, n);
    for (i, p) in parts.iter().enumerate() {
        if mask >> i & 1 == 1 {
            e += p.matrix();
        }
    }
    e
}

/// Largest |μ(EXE) − μ((EX + XE)/2)| over all 2^k events of a partition.
pub fn brute_force_gap(rho: &DMatrix<C64>, parts: &[Element], x: &DMatrix<C64>) -> f64 {
    let half = C64::new(0.5, 0.0);
    (0..(1usize << parts.len()))
        .map(|mask| {
            let e = subset(parts, mask);
            let lhs = expect(rho, &(&e * x * &e));
            let rhs = expect(rho, &((&e * x + x * &e) * half));
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Existence of a conditional expectation under the algebra of a partition,
/// from the definition alone: the singleton events force Y = Σ y_i P_i with
/// y_i = μ(P_i X P_i)/μ(P_i); Y exists iff that candidate satisfies the
/// defining equation on all 2^k events. Returns the candidate and the worst
/// violation.
pub fn definition_oracle(rho: &DMatrix<C64>, parts: &[Element], x: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
    let n = parts[0].dim();
    let ys: Vec<f64> = parts
        .iter()
        .map(|p| expect(rho, &(p.matrix() * x * p.matrix())) / expect(rho, p.matrix()))
        .collect();
    let mut y = DMatrix::zeros(n, n);
    for (p, &c) in parts.iter().zip(&ys) {
        y += p.matrix() * C64::new(c, 0.0);
    }
    let mut worst: f64 = 0.0;
    for mask in 0..(1usize << parts.len()) {
        let e = subset(parts, mask);
        let lhs = expect(rho, &(&e * x * &e));
        let rhs = expect(rho, &((&y * &e + &e * &y) * C64::new(0.5, 0.0)));
        worst = worst.max((lhs - rhs).abs());
    }
    (y, worst)
}

/// Orthogonal projection onto span(elements) in the trace inner product,
/// by least squares on real-vectorized matrices.
pub fn span_projection(elements: &[Element], x: &Element) -> DMatrix<C64> {
    let n = x.dim();
    let vec = |m: &DMatrix<C64>| -> DVector<f64> {
        DVector::from_iterator(2 * n * n, m.iter().flat_map(|z| [z.re, z.im]))
    };
    let cols: Vec<DVector<f64>> = elements.iter().map(|e| vec(e.matrix())).collect();
    let a = DMatrix::from_columns(&cols);
    let b = vec(x.matrix());
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-12).expect("svd solve");
    let mut out = DMatrix::zeros(n, n);
    for (e, &w) in elements.iter().zip(c.iter()) {
        out += e.matrix() * C64::new(w, 0.0);
    }
    out
}

/// Kinds of random unital subalgebras used across suites.
pub fn random_subalgebra<R: Rng>(rng: &mut R, n: usize, kind: usize, tol: &Tolerances) -> JordanAlgebra {
    match kind % 5 {
        0 => JordanAlgebra::full(n),
        1 => {
            // generated by one random Hermitian element: associative
            let h = random::hermitian(rng, n);
            JordanAlgebra::generated_by(n, &[h], tol).unwrap()
        }
        2 => {
            // real symmetric matrices in a random unitary frame
            let u = random::unitary(rng, n);
            let gens: Vec<Element> = (0..2).map(|_| random::real_symmetric(rng, n).conjugate_by(&u)).collect();
            JordanAlgebra::generated_by(n, &gens, tol).unwrap()
        }
        3 => {
            let k = rng.gen_range(1..=n);
            partition_algebra(rng, n, k, tol).1
        }
        _ => {
            // block-diagonal full algebra: Herm(r) ⊕ Herm(n − r) in a random frame
            let r = rng.gen_range(1..n.max(2)).min(n - 1).max(1);
            let parts = random::partition(rng, &[r, n - r]);
            let mut gens = parts.clone();
            for p in &parts {
                let w = random::hermitian(rng, n);
                gens.push(block_diagonal(std::slice::from_ref(p), &w));
            }
            JordanAlgebra::generated_by(n, &gens, tol).unwrap()
        }
    }
}

/// A state ρ commuting with Y: block-diagonal in Y's spectral projections.
pub fn state_commuting_with<R: Rng>(rng: &mut R, y: &Element, tol: &Tolerances) -> State {
    let spec = jmarkov::algebra::spectral_decompose(y, tol.group);
    block_state(rng, &spec.projections, tol)
}

/// i(HX − XH) on raw matrices.
pub fn i_commutator(h: &DMatrix<C64>, x: &DMatrix<C64>) -> DMatrix<C64> {
    (h * x - x * h) * C64::new(0.0, 1.0)
}

pub fn density(mu: &State) -> DMatrix<C64> {
    mu.density().matrix().clone()
}
