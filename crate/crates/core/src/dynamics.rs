//! Generators of dynamical semigroups V_t = exp(tL) on a Jordan algebra,
//! and their classification as derivations or dissipations.
//!
//! With the defect D(Y, Z) = L(Y∘Z) − Y∘L(Z) − Z∘L(Y), L is a derivation
//! when D vanishes and a dissipation when D(Y, Y) = L(Y²) − 2Y∘L(Y) ≥ 0 for
//! every Y.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::algebra::JordanAlgebra;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linalg::{expm, logm};
use crate::maps::LinearMap;
use crate::random;
use crate::tol::{Sampling, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Derivation,
    DissipationSampled,
    Neither,
    Unclassified,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Derivation => "derivation",
            Classification::DissipationSampled => "dissipation_sampled",
            Classification::Neither => "neither",
            Classification::Unclassified => "unclassified",
        }
    }
}

/// A linear map L: ℳ → ℳ on basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMap {
    algebra: JordanAlgebra,
    matrix: DMatrix<f64>,
    classification: Classification,
    /// Built from (V_Δ − I)/Δ rather than a logarithm.
    first_order: bool,
}

impl GeneratorMap {
    pub fn new(algebra: JordanAlgebra, matrix: DMatrix<f64>) -> Result<Self> {
        let d = algebra.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            algebra,
            matrix,
            classification: Classification::Unclassified,
            first_order: false,
        })
    }

    /// The map X ↦ f(X), sampled on the basis.
    pub fn from_fn(algebra: JordanAlgebra, f: impl Fn(&Element) -> Element, tol: &Tolerances) -> Result<Self> {
        let map = LinearMap::from_fn(algebra.clone(), algebra.clone(), f, tol)?;
        Self::new(algebra, map.matrix().clone())
    }

    pub fn algebra(&self) -> &JordanAlgebra {
        &self.algebra
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn is_first_order(&self) -> bool {
        self.first_order
    }

    pub fn with_classification(mut self, c: Classification) -> Self {
        self.classification = c;
        self
    }

    pub fn as_linear_map(&self) -> LinearMap {
        LinearMap::new(self.algebra.clone(), self.algebra.clone(), self.matrix.clone())
            .expect("generator matrix is square on its algebra")
    }

    /// L(X) for X in ℳ.
    pub fn apply(&self, x: &Element, tol: &Tolerances) -> Result<Element> {
        let coords = self.algebra.checked_coordinates(x, tol)?;
        Ok(self.algebra.element(&(&self.matrix * coords)))
    }

    /// ‖L(𝟙)‖, zero for generators of unital semigroups.
    pub fn unit_defect(&self) -> f64 {
        let one = self.algebra.coordinates(&self.algebra.identity());
        self.algebra.element(&(&self.matrix * one)).norm()
    }
}

// V_Δ's matrix expressed in source coordinates on both sides.
fn square_matrix(v: &LinearMap, tol: &Tolerances) -> Result<DMatrix<f64>> {
    if !v.source().same_span(v.target(), tol) {
        return Err(Error::TargetMismatch);
    }
    let change = DMatrix::from_fn(v.source().dim(), v.target().dim(), |i, j| {
        v.source().basis()[i].pair(&v.target().basis()[j])
    });
    Ok(change * v.matrix())
}

/// L = log(V_Δ)/Δ with the principal logarithm, checked by the round trip
/// ‖exp(ΔL) − V_Δ‖ ≤ `tol.solve`.
pub fn generator_from_kernel(v: &LinearMap, delta: f64, tol: &Tolerances) -> Result<GeneratorMap> {
    if !(delta > 0.0) {
        return Err(Error::Precondition("time step must be positive"));
    }
    let m = square_matrix(v, tol)?;
    let log = logm(&m)?;
    let residual = (expm(&log) - &m).norm();
    if residual > tol.solve {
        return Err(Error::Inconsistent { residual });
    }
    GeneratorMap::new(v.source().clone(), log / delta)
}

/// [`generator_from_kernel`], falling back to the first-order difference
/// (V_Δ − I)/Δ when V_Δ has no principal logarithm.
pub fn generator_from_kernel_or_difference(v: &LinearMap, delta: f64, tol: &Tolerances) -> Result<GeneratorMap> {
    match generator_from_kernel(v, delta, tol) {
        Err(Error::NoPrincipalLogarithm { .. }) => {
            let m = square_matrix(v, tol)?;
            let d = m.nrows();
            let mut g = GeneratorMap::new(v.source().clone(), (m - DMatrix::identity(d, d)) / delta)?;
            g.first_order = true;
            Ok(g)
        }
        other => other,
    }
}

/// V_t = exp(tL).
pub fn exponentiate(l: &GeneratorMap, t: f64) -> LinearMap {
    LinearMap::new(l.algebra.clone(), l.algebra.clone(), expm(&(&l.matrix * t)))
        .expect("exponential of a square generator is square")
}

/// D(Y, Z) = L(Y∘Z) − Y∘L(Z) − Z∘L(Y).
pub fn polarized_defect(l: &GeneratorMap, y: &Element, z: &Element, tol: &Tolerances) -> Result<Element> {
    let lyz = l.apply(&y.jordan(z), tol)?;
    let lz = l.apply(z, tol)?;
    let ly = l.apply(y, tol)?;
    Ok(&(&lyz - &y.jordan(&lz)) - &z.jordan(&ly))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub classification: Classification,
    /// Largest ‖D(B_i, B_j)‖ over basis pairs, with the pair.
    pub derivation_defect: f64,
    pub basis_pair: (usize, usize),
    /// Smallest eigenvalue of D(Y, Y) over the samples; not computed for
    /// derivations.
    pub min_eigenvalue: Option<f64>,
    /// The sample with the most negative D(Y, Y), when it goes below −psd.
    pub witness: Option<Element>,
    pub sampling: Sampling,
}

/// Derivation if D vanishes on every basis pair (exact, D is bilinear);
/// otherwise a sampled dissipation if D(Y, Y) ≥ −`tol.psd` for seeded
/// random Y ∈ ℳ; otherwise neither, with the worst sample as witness.
pub fn classify(l: &GeneratorMap, sampling: Sampling, tol: &Tolerances) -> Result<ClassificationReport> {
    let basis = l.algebra.basis();
    let mut derivation_defect: f64 = 0.0;
    let mut basis_pair = (0, 0);
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let d = polarized_defect(l, &basis[i], &basis[j], tol)?.norm();
            if d > derivation_defect {
                derivation_defect = d;
                basis_pair = (i, j);
            }
        }
    }
    if derivation_defect <= tol.eq {
        return Ok(ClassificationReport {
            classification: Classification::Derivation,
            derivation_defect,
            basis_pair,
            min_eigenvalue: None,
            witness: None,
            sampling,
        });
    }
    let mut rng = random::rng(sampling.seed);
    let mut min_eigenvalue = f64::INFINITY;
    let mut worst: Option<Element> = None;
    let mut candidates: Vec<Element> = basis.to_vec();
    candidates.extend((0..sampling.samples).map(|_| l.algebra.random_element(&mut rng)));
    for y in candidates {
        let e = polarized_defect(l, &y, &y, tol)?.min_eigenvalue();
        if e < min_eigenvalue {
            min_eigenvalue = e;
            worst = Some(y);
        }
    }
    let dissipative = min_eigenvalue >= -tol.psd;
    Ok(ClassificationReport {
        classification: if dissipative {
            Classification::DissipationSampled
        } else {
            Classification::Neither
        },
        derivation_defect,
        basis_pair,
        min_eigenvalue: Some(min_eigenvalue),
        witness: if dissipative { None } else { worst },
        sampling,
    })
}

/// L(X) = i[H, X] on ℳ, classified as a derivation. Fails when ℳ is not
/// closed under X ↦ i[H, X].
pub fn commutator_derivation(h: &Element, algebra: &JordanAlgebra, tol: &Tolerances) -> Result<GeneratorMap> {
    if h.dim() != algebra.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: algebra.ambient_dim(),
            right: h.dim(),
        });
    }
    let d = algebra.dim();
    let mut matrix = DMatrix::zeros(d, d);
    for (j, b) in algebra.basis().iter().enumerate() {
        let img = h.i_commutator(b);
        let residual = algebra.residual(&img);
        if residual > tol.rank * img.norm().max(1.0) {
            return Err(Error::NotCommutatorClosed { residual });
        }
        matrix.set_column(j, &algebra.coordinates(&img));
    }
    Ok(GeneratorMap::new(algebra.clone(), matrix)?.with_classification(Classification::Derivation))
}

/// V_t(X) = e^{itH} X e^{−itH}.
pub fn schrodinger_flow(h: &Element, t: f64, x: &Element) -> Result<Element> {
    if h.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: x.dim(),
        });
    }
    Ok(x.conjugate_by(&h.unitary_exp(t)))
}

/// L(X) = trace(X)/n·𝟙 − X on Herm(n).
pub fn depolarizing_generator(n: usize, tol: &Tolerances) -> Result<GeneratorMap> {
    GeneratorMap::from_fn(
        JordanAlgebra::full(n),
        |x| &Element::scalar(n, x.trace() / n as f64) - x,
        tol,
    )
}
