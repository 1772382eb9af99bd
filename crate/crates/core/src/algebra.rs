//! Finite-dimensional special Jordan algebras realized as real subspaces of
//! Hermitian matrices closed under X∘Y = (XY + YX)/2.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::element::{c, Element};
use crate::error::{Error, Result};
use crate::linalg::sqrt;
use crate::tol::Tolerances;

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

/// X∘Y = (XY + YX)/2.
pub fn jordan_product(x: &Element, y: &Element) -> Result<Element> {
    check_dims(x.dim(), y.dim())?;
    Ok(x.jordan(y))
}

/// {X, Y, Z} = X∘(Y∘Z) − Y∘(Z∘X) + Z∘(X∘Y), which equals (XYZ + ZYX)/2.
pub fn triple_product(x: &Element, y: &Element, z: &Element) -> Result<Element> {
    check_dims(x.dim(), y.dim())?;
    check_dims(x.dim(), z.dim())?;
    let t = &(&x.jordan(&y.jordan(z)) - &y.jordan(&z.jordan(x))) + &z.jordan(&x.jordan(y));
    debug_assert!({
        let direct = Element::hermitian_part(
            x.matrix() * y.matrix() * z.matrix() + z.matrix() * y.matrix() * x.matrix(),
        )
        .scale(0.5);
        let scale = x.norm() * y.norm() * z.norm();
        direct.distance(&t) <= 1e-10 * scale.max(1.0)
    });
    Ok(t)
}

/// {E, X, E} computed directly as E X E; equal to the Jordan triple product.
pub(crate) fn sandwich(e: &Element, x: &Element) -> Element {
    Element::hermitian_part(e.matrix() * x.matrix() * e.matrix())
}

/// X ≤ Y in the order of the positive cone.
pub fn leq(x: &Element, y: &Element, tol: &Tolerances) -> Result<bool> {
    check_dims(x.dim(), y.dim())?;
    Ok((y - x).min_eigenvalue() >= -tol.psd)
}

/// Spectral resolution X = Σ λ_i P_i with distinct, ascending λ_i.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projections: Vec<Element>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> Element {
        self.apply(|x| x)
    }

    /// f(X) = Σ f(λ_i) P_i.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Element {
        let n = self.projections.first().map_or(0, Element::dim);
        self.eigenvalues
            .iter()
            .zip(&self.projections)
            .fold(Element::zero(n), |acc, (&l, p)| &acc + &p.scale(f(l)))
    }

    /// Cumulative sums P_1, P_1 + P_2, …, i.e. the spectral family E_λ.
    pub fn cumulative(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.projections.len());
        let mut acc: Option<Element> = None;
        for p in &self.projections {
            let next = match acc {
                Some(a) => &a + p,
                None => p.clone(),
            };
            out.push(next.clone());
            acc = Some(next);
        }
        out
    }
}

/// Groups eigenvalues that lie within `group_tol` of their neighbour and
/// returns one projection per group, ordered by ascending eigenvalue.
pub fn spectral_decompose(x: &Element, group_tol: f64) -> SpectralDecomposition {
    let n = x.dim();
    let (values, vectors) = x.eigh();
    let mut eigenvalues = Vec::new();
    let mut projections = Vec::new();
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && values[end] - values[end - 1] <= group_tol {
            end += 1;
        }
        let mut p = DMatrix::zeros(n, n);
        for idx in k..end {
            let v = vectors.column(idx);
            p += v * v.adjoint();
        }
        let mean = values[k..end].iter().sum::<f64>() / (end - k) as f64;
        eigenvalues.push(mean);
        projections.push(Element::hermitian_part(p));
        k = end;
    }
    SpectralDecomposition {
        eigenvalues,
        projections,
    }
}

/// A Jordan-closed, unital real subspace of Herm(n) with a trace-orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanAlgebra {
    ambient_dim: usize,
    basis: Vec<Element>,
}

// Incremental Gram–Schmidt in the trace inner product, with one
// reorthogonalization pass per candidate.
struct Orthonormalizer {
    n: usize,
    basis: Vec<Element>,
}

impl Orthonormalizer {
    fn new(n: usize) -> Self {
        Self { n, basis: Vec::new() }
    }

    fn project_out(&self, x: &Element) -> Element {
        let mut r = x.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let coef = b.pair(&r);
                r = &r - &b.scale(coef);
            }
        }
        r
    }

    fn try_add(&mut self, x: &Element, tol: &Tolerances) -> bool {
        if self.basis.len() >= self.n * self.n {
            return false;
        }
        let r = self.project_out(x);
        let norm = r.norm();
        if norm > tol.rank * x.norm().max(1.0) {
            self.basis.push(r.scale(1.0 / norm));
            true
        } else {
            false
        }
    }
}

impl JordanAlgebra {
    /// Orthonormalizes `spanning_set` and verifies Jordan closure and unitality.
    pub fn from_spanning_set(
        ambient_dim: usize,
        spanning_set: &[Element],
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut ortho = Orthonormalizer::new(ambient_dim);
        for x in spanning_set {
            check_dims(ambient_dim, x.dim())?;
            ortho.try_add(x, tol);
        }
        let algebra = Self {
            ambient_dim,
            basis: ortho.basis,
        };
        let unit_residual = algebra.residual(&Element::identity(ambient_dim));
        if unit_residual > tol.rank * sqrt(ambient_dim as f64).max(1.0) {
            return Err(Error::MissingIdentity {
                residual: unit_residual,
            });
        }
        for i in 0..algebra.dim() {
            for j in i..algebra.dim() {
                let p = algebra.basis[i].jordan(&algebra.basis[j]);
                let residual = algebra.residual(&p);
                if residual > tol.rank * p.norm().max(1.0) {
                    return Err(Error::NotJordanClosed { i, j, residual });
                }
            }
        }
        Ok(algebra)
    }

    /// The smallest unital Jordan subalgebra containing `generators`.
    pub fn generated_by(
        ambient_dim: usize,
        generators: &[Element],
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut ortho = Orthonormalizer::new(ambient_dim);
        ortho.try_add(&Element::identity(ambient_dim), tol);
        for g in generators {
            check_dims(ambient_dim, g.dim())?;
            ortho.try_add(g, tol);
        }
        // Each round multiplies every pair with at least one member new since
        // the previous round; the span only grows and is bounded by n².
        let mut fresh_from = 0;
        loop {
            let before = ortho.basis.len();
            for i in 0..before {
                for j in i.max(fresh_from)..before {
                    let p = ortho.basis[i].jordan(&ortho.basis[j]);
                    ortho.try_add(&p, tol);
                }
            }
            if ortho.basis.len() == before {
                break;
            }
            fresh_from = before;
        }
        Ok(Self {
            ambient_dim,
            basis: ortho.basis,
        })
    }

    /// All Hermitian n×n matrices, with the basis
    /// E_ii, (E_ij + E_ji)/√2, i(E_ji − E_ij)/√2 for i < j.
    pub fn full(n: usize) -> Self {
        let s = 1.0 / sqrt(2.0);
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            basis.push(Element::diag(&d));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut re = DMatrix::zeros(n, n);
                re[(i, j)] = c(s, 0.0);
                re[(j, i)] = c(s, 0.0);
                basis.push(Element::hermitian_part(re));
                let mut im = DMatrix::zeros(n, n);
                im[(i, j)] = c(0.0, -s);
                im[(j, i)] = c(0.0, s);
                basis.push(Element::hermitian_part(im));
            }
        }
        Self {
            ambient_dim: n,
            basis,
        }
    }

    /// Diagonal matrices, basis E_00, E_11, … in order.
    pub fn diagonal(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut d = vec![0.0; n];
                d[i] = 1.0;
                Element::diag(&d)
            })
            .collect();
        Self {
            ambient_dim: n,
            basis,
        }
    }

    /// span{𝟙}.
    pub fn scalars(n: usize) -> Self {
        Self {
            ambient_dim: n,
            basis: vec![Element::scalar(n, 1.0 / sqrt(n as f64))],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Real dimension d of the subspace.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Element] {
        &self.basis
    }

    pub fn identity(&self) -> Element {
        Element::identity(self.ambient_dim)
    }

    /// Coordinates ⟨B_i, X⟩ = trace(B_i X) of the orthogonal projection of X.
    pub fn coordinates(&self, x: &Element) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.basis.iter().map(|b| b.pair(x)))
    }

    pub fn element(&self, coords: &DVector<f64>) -> Element {
        debug_assert_eq!(coords.len(), self.dim());
        self.basis
            .iter()
            .zip(coords.iter())
            .fold(Element::zero(self.ambient_dim), |acc, (b, &w)| &acc + &b.scale(w))
    }

    pub fn project(&self, x: &Element) -> Element {
        self.element(&self.coordinates(x))
    }

    /// Frobenius distance from X to the span.
    pub fn residual(&self, x: &Element) -> f64 {
        self.project(x).distance(x)
    }

    /// Membership within `tol.rank` (relative to ‖X‖ when ‖X‖ > 1).
    pub fn contains(&self, x: &Element, tol: &Tolerances) -> Result<bool> {
        check_dims(self.ambient_dim, x.dim())?;
        Ok(self.residual(x) <= tol.rank * x.norm().max(1.0))
    }

    /// Coordinates of X, failing when X is not in the algebra.
    pub fn checked_coordinates(&self, x: &Element, tol: &Tolerances) -> Result<DVector<f64>> {
        check_dims(self.ambient_dim, x.dim())?;
        let coords = self.coordinates(x);
        let residual = self.element(&coords).distance(x);
        if residual > tol.rank * x.norm().max(1.0) {
            return Err(Error::NotMember { residual });
        }
        Ok(coords)
    }

    /// True when every basis element of `other` lies in this algebra.
    pub fn contains_algebra(&self, other: &JordanAlgebra, tol: &Tolerances) -> bool {
        other.ambient_dim == self.ambient_dim
            && other
                .basis
                .iter()
                .all(|b| self.contains(b, tol).unwrap_or(false))
    }

    /// Same subspace (mutual containment).
    pub fn same_span(&self, other: &JordanAlgebra, tol: &Tolerances) -> bool {
        self.dim() == other.dim() && self.contains_algebra(other, tol) && other.contains_algebra(self, tol)
    }

    /// All basis commutators vanish; for a special Jordan algebra this is
    /// equivalent to associativity of ∘ on the subspace.
    pub fn is_associative(&self, tol: &Tolerances) -> bool {
        (0..self.dim()).all(|i| {
            ((i + 1)..self.dim()).all(|j| self.basis[i].commutator_norm(&self.basis[j]) <= tol.eq)
        })
    }

    /// Minimal idempotents P_1, …, P_d of an associative algebra: the joint
    /// spectral projections of its basis. They are pairwise orthogonal, sum to
    /// 𝟙, and span the algebra.
    pub fn minimal_idempotents(&self, tol: &Tolerances) -> Result<Vec<Element>> {
        if !self.is_associative(tol) {
            return Err(Error::NotAssociative);
        }
        let mut parts = vec![self.identity()];
        for b in &self.basis {
            let spec = spectral_decompose(b, tol.group);
            let mut refined = Vec::with_capacity(parts.len() * spec.projections.len());
            for p in &parts {
                for q in &spec.projections {
                    let r = Element::hermitian_part(p.matrix() * q.matrix());
                    if r.trace() > 0.5 {
                        refined.push(r);
                    }
                }
            }
            parts = refined;
        }
        if parts.len() != self.dim() {
            return Err(Error::Numerical(
                "joint spectral projections do not match the algebra dimension",
            ));
        }
        Ok(parts)
    }

    /// A random element Σ c_i B_i with coefficients uniform in [−1, 1].
    pub fn random_element<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Element {
        let coords = DVector::from_iterator(self.dim(), (0..self.dim()).map(|_| rng.gen_range(-1.0..=1.0)));
        self.element(&coords)
    }
}

/// [`JordanAlgebra::from_spanning_set`].
pub fn make_algebra(ambient_dim: usize, spanning_set: &[Element], tol: &Tolerances) -> Result<JordanAlgebra> {
    JordanAlgebra::from_spanning_set(ambient_dim, spanning_set, tol)
}

/// [`JordanAlgebra::generated_by`].
pub fn generate_subalgebra(ambient_dim: usize, generators: &[Element], tol: &Tolerances) -> Result<JordanAlgebra> {
    JordanAlgebra::generated_by(ambient_dim, generators, tol)
}

pub fn contains(a: &JordanAlgebra, x: &Element, tol: &Tolerances) -> Result<bool> {
    a.contains(x, tol)
}

pub fn is_associative(a: &JordanAlgebra, tol: &Tolerances) -> bool {
    a.is_associative(tol)
}

/// Idempotent and a member of `a`.
pub fn is_event(x: &Element, a: &JordanAlgebra, tol: &Tolerances) -> bool {
    x.dim() == a.ambient_dim() && x.is_idempotent(tol) && a.contains(x, tol).unwrap_or(false)
}

/// An idempotent element (projection) of some algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    element: Element,
}

impl Event {
    /// Validates idempotency and membership in `parent`.
    pub fn new(element: Element, parent: &JordanAlgebra, tol: &Tolerances) -> Result<Self> {
        check_dims(parent.ambient_dim(), element.dim())?;
        let deviation = element.square().distance(&element);
        if deviation > tol.eq {
            return Err(Error::NotIdempotent { deviation });
        }
        let residual = parent.residual(&element);
        if residual > tol.rank * element.norm().max(1.0) {
            return Err(Error::NotMember { residual });
        }
        Ok(Self { element })
    }

    /// An event of the full algebra Herm(n); only idempotency is checked.
    pub fn in_full(element: Element, tol: &Tolerances) -> Result<Self> {
        let deviation = element.square().distance(&element);
        if deviation > tol.eq {
            return Err(Error::NotIdempotent { deviation });
        }
        Ok(Self { element })
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    pub fn dim(&self) -> usize {
        self.element.dim()
    }

    /// E′ = 𝟙 − E.
    pub fn negation(&self) -> Event {
        Self {
            element: &Element::identity(self.dim()) - &self.element,
        }
    }

    /// trace(E), the rank of the projection.
    pub fn rank(&self) -> f64 {
        self.element.trace()
    }
}

/// Vanishing ordinary commutator [E, F].
pub fn operator_commute(e: &Event, f: &Event, tol: &Tolerances) -> bool {
    e.dim() == f.dim() && e.element().commutator_norm(f.element()) <= tol.eq
}
