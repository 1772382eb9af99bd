//! Normal states and functionals represented by density matrices under the
//! trace pairing X ↦ trace(ρX).

use nalgebra::DMatrix;
use rand::Rng;

use crate::algebra::{sandwich, Event, JordanAlgebra};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linalg::min_symmetric_eigenvalue;
use crate::random;
use crate::tol::Tolerances;

/// Anything that acts on algebra elements through a density matrix.
pub trait Pairing {
    fn density(&self) -> &Element;

    /// trace(ρX); fails on a dimension mismatch.
    fn evaluate(&self, x: &Element) -> Result<f64> {
        if self.density().dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                left: self.density().dim(),
                right: x.dim(),
            });
        }
        Ok(self.density().pair(x))
    }
}

/// A positive, normalized density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    density: Element,
}

/// A Hermitian density with no positivity or normalization requirement.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    density: Element,
}

impl Pairing for State {
    fn density(&self) -> &Element {
        &self.density
    }
}

impl Pairing for Functional {
    fn density(&self) -> &Element {
        &self.density
    }
}

impl State {
    pub fn new(density: Element, tol: &Tolerances) -> Result<Self> {
        let min = density.min_eigenvalue();
        if min < -tol.psd {
            return Err(Error::InvalidState {
                reason: "negative eigenvalue",
                value: min,
            });
        }
        let trace = density.trace();
        if (trace - 1.0).abs() > tol.eq {
            return Err(Error::InvalidState {
                reason: "trace differs from one",
                value: trace,
            });
        }
        Ok(Self { density })
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    /// Evaluation without the dimension check, for internal call sites that
    /// have already validated shapes.
    pub(crate) fn mu(&self, x: &Element) -> f64 {
        debug_assert_eq!(self.dim(), x.dim());
        self.density.pair(x)
    }

    pub fn as_functional(&self) -> Functional {
        Functional {
            density: self.density.clone(),
        }
    }
}

impl Functional {
    pub fn new(density: Element) -> Self {
        Self { density }
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub(crate) fn nu(&self, x: &Element) -> f64 {
        self.density.pair(x)
    }

    /// Z ↦ μ(Y∘Z), the functional whose Radon–Nikodym element is Y.
    pub fn from_state_and_element(mu: &State, y: &Element) -> Self {
        Self {
            density: mu.density().jordan(y),
        }
    }
}

/// trace(ρX).
pub fn evaluate<P: Pairing>(mu: &P, x: &Element) -> Result<f64> {
    mu.evaluate(x)
}

/// Gram matrix G_ij = μ(B_i∘B_j) on the basis of `a`.
pub(crate) fn gram_matrix(mu: &State, a: &JordanAlgebra) -> DMatrix<f64> {
    let d = a.dim();
    let basis = a.basis();
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = mu.mu(&basis[i].jordan(&basis[j]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// μ(Z²) > 0 for every nonzero Z in `a`, decided by the smallest Gram eigenvalue.
pub fn is_faithful_on(mu: &State, a: &JordanAlgebra, tol: &Tolerances) -> bool {
    mu.dim() == a.ambient_dim() && min_symmetric_eigenvalue(&gram_matrix(mu, a)) > tol.psd
}

/// Projection onto the range of ρ: the smallest event D with μ(D) = 1.
pub fn support(mu: &State, tol: &Tolerances) -> Element {
    mu.density().map_spectrum(|x| if x > tol.psd { 1.0 } else { 0.0 })
}

/// The normalized trace 𝟙/n.
pub fn trace_state(n: usize) -> State {
    State {
        density: Element::scalar(n, 1.0 / n as f64),
    }
}

/// μ(F|E) = μ({E, F, E}) / μ(E).
pub fn conditional_probability(mu: &State, f: &Event, e: &Event, tol: &Tolerances) -> Result<f64> {
    let pe = mu.evaluate(e.element())?;
    if pe <= tol.eq {
        return Err(Error::NullConditioning { probability: pe });
    }
    let num = mu.evaluate(&sandwich(e.element(), f.element()))?;
    Ok(num / pe)
}

/// State-independent conditional probability under an atom E: since
/// {E, F, E} = trace(EF)·E, every state with μ(E) > 0 gives trace(EF).
pub fn atom_conditional_probability(f: &Event, e: &Event, tol: &Tolerances) -> Result<f64> {
    let trace = e.rank();
    if (trace - 1.0).abs() > tol.eq {
        return Err(Error::NotAtom { trace });
    }
    if f.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: f.dim(),
        });
    }
    Ok(e.element().pair(f.element()))
}

const FAITHFUL_FLOOR: f64 = 1e-3;

/// ρ = (GG†/trace(GG†) + δ𝟙)/(1 + nδ) with G seeded and δ = 10⁻³, so the
/// smallest eigenvalue is at least δ/(1 + nδ).
pub fn random_faithful_state(n: usize, seed: u64) -> State {
    let mut rng = random::rng(seed);
    random_faithful_state_from(&mut rng, n)
}

pub fn random_faithful_state_from<R: Rng + ?Sized>(rng: &mut R, n: usize) -> State {
    let g = random::complex_matrix(rng, n);
    let gg = Element::hermitian_part(&g * g.adjoint());
    let t = gg.trace();
    let rho = (&gg.scale(1.0 / t) + &Element::scalar(n, FAITHFUL_FLOOR)).scale(1.0 / (1.0 + n as f64 * FAITHFUL_FLOOR));
    State { density: rho }
}

/// Diagonal state with the given probabilities.
pub fn diagonal_state(probabilities: &[f64], tol: &Tolerances) -> Result<State> {
    State::new(Element::diag(probabilities), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn plus() -> Element {
        Element::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let mu = random_faithful_state(3, 7);
        assert_relative_eq!(evaluate(&mu, &Element::identity(3)).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            evaluate(&trace_state(2), &Element::diag(&[1.0, 0.0])).unwrap(),
            0.5
        );
        let rho = diagonal_state(&[0.75, 0.25], &tol()).unwrap();
        assert_relative_eq!(evaluate(&rho, &Element::diag(&[1.0, 0.0])).unwrap(), 0.75);
        assert!(evaluate(&rho, &Element::identity(3)).is_err());
    }

    #[test]
    fn state_validation() {
        assert!(State::new(Element::diag(&[0.5, 0.6]), &tol()).is_err());
        assert!(State::new(Element::diag(&[1.5, -0.5]), &tol()).is_err());
    }

    #[test]
    fn faithfulness_examples() {
        let t = tol();
        assert!(is_faithful_on(&trace_state(2), &JordanAlgebra::full(2), &t));
        let pure = diagonal_state(&[1.0, 0.0], &t).unwrap();
        assert!(!is_faithful_on(&pure, &JordanAlgebra::full(2), &t));
        assert!(is_faithful_on(&pure, &JordanAlgebra::scalars(2), &t));
    }

    #[test]
    fn support_examples() {
        let t = tol();
        assert!(support(&random_faithful_state(3, 1), &t).distance(&Element::identity(3)) < 1e-12);
        let pure = diagonal_state(&[1.0, 0.0], &t).unwrap();
        assert!(support(&pure, &t).distance(&Element::diag(&[1.0, 0.0])) < 1e-14);
        let half = diagonal_state(&[0.5, 0.5, 0.0], &t).unwrap();
        let d = support(&half, &t);
        assert!(d.distance(&Element::diag(&[1.0, 1.0, 0.0])) < 1e-14);
        assert_relative_eq!(half.evaluate(&d).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_state_examples() {
        assert!(trace_state(2).density().distance(&Element::diag(&[0.5, 0.5])) < 1e-15);
        assert!(trace_state(3).density().distance(&Element::scalar(3, 1.0 / 3.0)) < 1e-15);
        assert_relative_eq!(trace_state(2).evaluate(&Element::sigma_x()).unwrap(), 0.0);
    }

    #[test]
    fn conditional_probability_examples() {
        let t = tol();
        let mu = random_faithful_state(2, 3);
        let e = Event::in_full(Element::diag(&[1.0, 0.0]), &t).unwrap();
        assert_relative_eq!(conditional_probability(&mu, &e, &e, &t).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            conditional_probability(&mu, &e.negation(), &e, &t).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        let f = Event::in_full(plus(), &t).unwrap();
        assert_relative_eq!(
            conditional_probability(&trace_state(2), &f, &e, &t).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        let pure = diagonal_state(&[0.0, 1.0], &t).unwrap();
        assert!(matches!(
            conditional_probability(&pure, &f, &e, &t),
            Err(Error::NullConditioning { .. })
        ));
    }

    #[test]
    fn atom_conditional_probability_examples() {
        let t = tol();
        let e = Event::in_full(Element::diag(&[1.0, 0.0]), &t).unwrap();
        let f = Event::in_full(plus(), &t).unwrap();
        assert_relative_eq!(atom_conditional_probability(&e, &e, &t).unwrap(), 1.0);
        assert_relative_eq!(atom_conditional_probability(&e.negation(), &e, &t).unwrap(), 0.0);
        assert_relative_eq!(atom_conditional_probability(&f, &e, &t).unwrap(), 0.5, epsilon = 1e-15);
        let big = Event::in_full(Element::identity(2), &t).unwrap();
        assert!(matches!(atom_conditional_probability(&f, &big, &t), Err(Error::NotAtom { .. })));
    }

    #[test]
    fn random_faithful_state_properties() {
        let a = random_faithful_state(4, 11);
        let b = random_faithful_state(4, 11);
        assert_eq!(a, b);
        assert!(is_faithful_on(&a, &JordanAlgebra::full(4), &tol()));
        assert_relative_eq!(a.density().trace(), 1.0, epsilon = 1e-14);
        assert!(a.density().min_eigenvalue() > 0.0);
    }
}
