//! The directed compatibility relation E →μ X, Radon–Nikodym elements, and
//! conditional expectations under Jordan subalgebras.
//!
//! A conditional expectation of X under 𝒜₀ in the state μ is an element
//! Y ∈ 𝒜₀ with μ({E, X, E}) = μ(Y∘E) for every event E of 𝒜₀. It exists
//! exactly when μ({E, X, E}) = μ(E∘X) for all those events, and it is unique
//! when μ is faithful on 𝒜₀. Existence is decided exactly for associative
//! 𝒜₀ and by sampling otherwise.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{sandwich, spectral_decompose, Event, JordanAlgebra};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linalg::symmetric_pinv;
use crate::maps::LinearMap;
use crate::random;
use crate::states::{gram_matrix, is_faithful_on, trace_state, Functional, Pairing, State};
use crate::tol::{Config, Sampling, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    HoldsSampled,
    Fails,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fails
    }

    fn rank(self) -> u8 {
        match self {
            Verdict::Holds => 0,
            Verdict::HoldsSampled => 1,
            Verdict::Fails => 2,
        }
    }

    /// The less certain of two verdicts.
    pub fn weakest(self, other: Verdict) -> Verdict {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    EventPair,
    AssociativeExact,
    Sampled,
    ConstructAndVerify,
}

/// An event with the two sides of μ({E, X, E}) = μ(E∘X).
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub event: Element,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub verdict: Verdict,
    /// Present when the verdict fails: the worst event found.
    pub witness: Option<Witness>,
    pub method: Method,
    pub events_checked: usize,
    /// Set for sampled verdicts.
    pub sampling: Option<Sampling>,
}

impl CompatibilityReport {
    /// True unless the verdict is `Fails`.
    pub fn holds(&self) -> bool {
        !self.verdict.is_fail()
    }

    /// Conjunction of two reports.
    pub fn merge(self, other: CompatibilityReport) -> CompatibilityReport {
        let witness = match (self.witness, other.witness) {
            (Some(a), Some(b)) => Some(if b.gap() > a.gap() { b } else { a }),
            (a, b) => a.or(b),
        };
        let method = if self.method == other.method {
            self.method
        } else if self.method == Method::Sampled || other.method == Method::Sampled {
            Method::Sampled
        } else {
            self.method
        };
        CompatibilityReport {
            verdict: self.verdict.weakest(other.verdict),
            witness,
            method,
            events_checked: self.events_checked + other.events_checked,
            sampling: self.sampling.or(other.sampling),
        }
    }

    fn exact_holds(method: Method, events_checked: usize) -> Self {
        Self {
            verdict: Verdict::Holds,
            witness: None,
            method,
            events_checked,
            sampling: None,
        }
    }
}

/// (μ({E, X, E}), μ(E∘X)).
fn event_sides(mu: &State, e: &Element, x: &Element) -> (f64, f64) {
    (mu.mu(&sandwich(e, x)), mu.mu(&e.jordan(x)))
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

/// E →μ X: μ({E, X, E}) = μ(E∘X) within `tol.eq`.
pub fn is_compatible_event(mu: &State, e: &Event, x: &Element, tol: &Tolerances) -> Result<CompatibilityReport> {
    check_dims(mu.dim(), e.dim())?;
    check_dims(mu.dim(), x.dim())?;
    let (lhs, rhs) = event_sides(mu, e.element(), x);
    let fails = (lhs - rhs).abs() > tol.eq;
    Ok(CompatibilityReport {
        verdict: if fails { Verdict::Fails } else { Verdict::Holds },
        witness: fails.then(|| Witness {
            event: e.element().clone(),
            lhs,
            rhs,
        }),
        method: Method::EventPair,
        events_checked: 1,
        sampling: None,
    })
}

// Spectral projections and the spectral family of `x`; all are events of any
// Jordan algebra containing `x`.
fn push_spectral_events(x: &Element, tol: &Tolerances, out: &mut Vec<Element>) {
    let spec = spectral_decompose(x, tol.group);
    let k = spec.projections.len();
    if k < 2 {
        return;
    }
    let cumulative = spec.cumulative();
    out.extend(spec.projections);
    // The last cumulative sum is 𝟙, which never violates compatibility.
    out.extend(cumulative.into_iter().take(k - 1).skip(1));
}

/// Events used for sampled checks on a (typically non-associative) algebra:
/// spectral projections and families of every basis element and of
/// `sampling.samples` seeded random elements.
pub fn sampled_events(a0: &JordanAlgebra, sampling: Sampling, tol: &Tolerances) -> Vec<Element> {
    let mut events = Vec::new();
    for b in a0.basis() {
        push_spectral_events(b, tol, &mut events);
    }
    let mut rng = random::rng(sampling.seed);
    for _ in 0..sampling.samples {
        let x = a0.random_element(&mut rng);
        push_spectral_events(&x, tol, &mut events);
    }
    events
}

fn subset_sum(parts: &[Element], mask: u64) -> Element {
    let n = parts[0].dim();
    parts
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .fold(Element::zero(n), |acc, (_, p)| &acc + p)
}

/// Pre-resolved event structure of a subalgebra.
#[derive(Clone, Debug)]
enum EventModel {
    /// Minimal idempotents of an associative algebra.
    Atomic(Vec<Element>),
    Sampled(Vec<Element>),
}

impl EventModel {
    fn new(a0: &JordanAlgebra, cfg: &Config) -> Self {
        if a0.is_associative(&cfg.tol) {
            if let Ok(parts) = a0.minimal_idempotents(&cfg.tol) {
                return EventModel::Atomic(parts);
            }
        }
        EventModel::Sampled(sampled_events(a0, cfg.sampling, &cfg.tol))
    }

    /// Events over which the defining equations are measured.
    fn residual_events(&self, cfg: &Config) -> Vec<Element> {
        match self {
            EventModel::Atomic(parts) => {
                let k = parts.len();
                if k <= cfg.max_enumerated_atoms && k < 64 {
                    (1..(1u64 << k)).map(|mask| subset_sum(parts, mask)).collect()
                } else {
                    let mut out = parts.clone();
                    for i in 0..k {
                        for j in (i + 1)..k {
                            out.push(&parts[i] + &parts[j]);
                        }
                    }
                    out
                }
            }
            EventModel::Sampled(events) => events.clone(),
        }
    }

    fn compatibility(&self, mu: &State, x: &Element, cfg: &Config) -> CompatibilityReport {
        match self {
            EventModel::Atomic(parts) => exact_compatibility(mu, parts, x, &cfg.tol),
            EventModel::Sampled(events) => {
                let mut worst: Option<Witness> = None;
                for e in events {
                    let (lhs, rhs) = event_sides(mu, e, x);
                    if (lhs - rhs).abs() > cfg.tol.eq && worst.as_ref().is_none_or(|w| (lhs - rhs).abs() > w.gap()) {
                        worst = Some(Witness {
                            event: e.clone(),
                            lhs,
                            rhs,
                        });
                    }
                }
                CompatibilityReport {
                    verdict: if worst.is_some() {
                        Verdict::Fails
                    } else {
                        Verdict::HoldsSampled
                    },
                    witness: worst,
                    method: Method::Sampled,
                    events_checked: events.len(),
                    sampling: Some(cfg.sampling),
                }
            }
        }
    }
}

/// Off-diagonal couplings T_ij = (μ(P_i X P_j) + μ(P_j X P_i))/2 between
/// minimal idempotents. For the event E_S = Σ_{i∈S} P_i one has
/// μ(E_S∘X) − μ({E_S, X, E_S}) = Σ_{i∈S, j∉S} T_ij, so the relation holds for
/// every event iff T_ij = 0 for all i ≠ j.
pub fn coupling_matrix(mu: &State, parts: &[Element], x: &Element) -> DMatrix<f64> {
    let k = parts.len();
    let rho = mu.density().matrix();
    let xm = x.matrix();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        let left = parts[i].matrix() * xm;
        for j in i..k {
            // Re trace(ρ P_i X P_j)
            let m = &left * parts[j].matrix();
            let v: f64 = rho.iter().zip(m.transpose().iter()).map(|(a, b)| (a * b).re).sum();
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
    }
    t
}

fn exact_compatibility(mu: &State, parts: &[Element], x: &Element, tol: &Tolerances) -> CompatibilityReport {
    let k = parts.len();
    let t = coupling_matrix(mu, parts, x);
    let violated = (0..k).any(|i| ((i + 1)..k).any(|j| t[(i, j)].abs() > tol.eq));
    if !violated {
        return CompatibilityReport::exact_holds(Method::AssociativeExact, k * (k - 1) / 2);
    }
    // Some singleton or pair of minimal idempotents exhibits a gap at least
    // as large as the largest |T_ij|.
    let mut candidates: Vec<Element> = parts.to_vec();
    for i in 0..k {
        for j in (i + 1)..k {
            candidates.push(&parts[i] + &parts[j]);
        }
    }
    let witness = candidates
        .into_iter()
        .map(|e| {
            let (lhs, rhs) = event_sides(mu, &e, x);
            Witness { event: e, lhs, rhs }
        })
        .max_by(|a, b| a.gap().total_cmp(&b.gap()));
    CompatibilityReport {
        verdict: Verdict::Fails,
        witness,
        method: Method::AssociativeExact,
        events_checked: k * (k - 1) / 2,
        sampling: None,
    }
}

/// 𝒜₀ →μ X. Exact via the coupling criterion when 𝒜₀ is associative,
/// otherwise sampled over spectral projections (verdict `HoldsSampled`).
pub fn is_compatible_subalgebra(mu: &State, a0: &JordanAlgebra, x: &Element, cfg: &Config) -> Result<CompatibilityReport> {
    check_dims(mu.dim(), a0.ambient_dim())?;
    check_dims(mu.dim(), x.dim())?;
    Ok(EventModel::new(a0, cfg).compatibility(mu, x, cfg))
}

/// 𝒜₁ →μ 𝒜₂, the conjunction of 𝒜₁ →μ B over a basis of 𝒜₂ (the relation
/// is linear in its second argument).
pub fn is_compatible_pair(mu: &State, a1: &JordanAlgebra, a2: &JordanAlgebra, cfg: &Config) -> Result<CompatibilityReport> {
    check_dims(mu.dim(), a1.ambient_dim())?;
    check_dims(mu.dim(), a2.ambient_dim())?;
    let model = EventModel::new(a1, cfg);
    let mut report: Option<CompatibilityReport> = None;
    for b in a2.basis() {
        let r = model.compatibility(mu, b, cfg);
        report = Some(match report {
            Some(acc) => acc.merge(r),
            None => r,
        });
    }
    Ok(report.unwrap_or_else(|| CompatibilityReport::exact_holds(Method::AssociativeExact, 0)))
}

/// Solves μ(Y∘B_i) = v_i over the basis of a subalgebra through the
/// eigendecomposition pseudoinverse of the Gram matrix G_ij = μ(B_i∘B_j).
#[derive(Clone, Debug)]
struct GramSolver {
    gram: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl GramSolver {
    fn new(mu: &State, a: &JordanAlgebra, tol: &Tolerances) -> Self {
        let gram = gram_matrix(mu, a);
        let (pinv, _) = symmetric_pinv(&gram, tol.rank);
        Self { gram, pinv }
    }

    /// Coefficients and the max-norm residual ‖Gc − v‖∞.
    fn solve(&self, v: &DVector<f64>) -> (DVector<f64>, f64) {
        let coords = &self.pinv * v;
        let residual = (&self.gram * &coords - v).amax();
        (coords, residual)
    }
}

fn targets_of(a: &JordanAlgebra, f: impl Fn(&Element) -> f64) -> DVector<f64> {
    DVector::from_iterator(a.dim(), a.basis().iter().map(f))
}

/// Spectral truncation of a candidate to [0, 𝟙]: drop the negative part,
/// then the part above one (the negative part of 𝟙 − Y). Both removed parts
/// must carry no state mass, and the equations μ(Y∘B_i) = v_i must survive.
fn clip_to_unit_interval(
    z: &Element,
    mu: &State,
    a0: &JordanAlgebra,
    targets: &DVector<f64>,
    tol: &Tolerances,
) -> Result<Element> {
    if z.in_unit_interval(tol) {
        return Ok(z.clone());
    }
    let spec = spectral_decompose(z, tol.group);
    let mut below = 0.0;
    let mut above = 0.0;
    for (&l, p) in spec.eigenvalues.iter().zip(&spec.projections) {
        let mass = mu.mu(p);
        if l < 0.0 {
            below += -l * mass;
        } else if l > 1.0 {
            above += (l - 1.0) * mass;
        }
    }
    if below > tol.solve {
        return Err(Error::NegativePartNotNull { mass: below });
    }
    if above > tol.solve {
        return Err(Error::NegativePartNotNull { mass: above });
    }
    let y = spec.apply(|l| l.clamp(0.0, 1.0));
    let residual = a0
        .basis()
        .iter()
        .zip(targets.iter())
        .map(|(b, &v)| (mu.mu(&y.jordan(b)) - v).abs())
        .fold(0.0, f64::max);
    if residual > tol.solve {
        return Err(Error::Inconsistent { residual });
    }
    Ok(y)
}

/// Truncates a candidate conditional expectation Z of X under 𝒜₀ into the
/// order interval [0, 𝟙], checking that the removed negative parts are
/// μ-null and that the defining equations still hold.
pub fn sanitize_interval(z: &Element, mu: &State, a0: &JordanAlgebra, x: &Element, tol: &Tolerances) -> Result<Element> {
    check_dims(mu.dim(), z.dim())?;
    check_dims(mu.dim(), x.dim())?;
    let targets = targets_of(a0, |b| mu.mu(&x.jordan(b)));
    clip_to_unit_interval(z, mu, a0, &targets, tol)
}

/// Y ∈ 𝒜 with 0 ≤ Y ≤ 𝟙 and ν(Z) = μ(Y∘Z) for all Z ∈ 𝒜, for ν ≤ μ.
///
/// Domination is spot-checked on spectral projections of the basis; the
/// full order relation remains the caller's contract.
pub fn radon_nikodym(nu: &Functional, mu: &State, a: &JordanAlgebra, tol: &Tolerances) -> Result<Element> {
    check_dims(mu.dim(), nu.dim())?;
    check_dims(mu.dim(), a.ambient_dim())?;
    let mut violation: f64 = 0.0;
    for b in a.basis() {
        for p in spectral_decompose(b, tol.group).projections {
            let (n, m) = (nu.nu(&p), mu.mu(&p));
            violation = violation.max(-n).max(n - m);
        }
    }
    if violation > tol.solve {
        return Err(Error::NotDominated { violation });
    }
    let targets = targets_of(a, |b| nu.nu(b));
    let solver = GramSolver::new(mu, a, tol);
    let (coords, residual) = solver.solve(&targets);
    if residual > tol.solve {
        return Err(Error::NoRepresentingElement { residual });
    }
    clip_to_unit_interval(&a.element(&coords), mu, a, &targets, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondExpResult {
    pub value: Element,
    /// Largest |μ({E, X, E}) − μ(Y∘E)| over the test events.
    pub residual: f64,
    /// μ is faithful on 𝒜₀, so the value is the only conditional expectation.
    pub unique: bool,
    /// The [0, 𝟙] truncation ran (X itself lay in [0, 𝟙]).
    pub sanitized: bool,
    pub compatibility: CompatibilityReport,
}

/// Conditional expectation X ↦ μ(X|𝒜₀) for a fixed state and subalgebra,
/// with the Gram system factored once.
#[derive(Clone, Debug)]
pub struct ConditionalExpectation {
    mu: State,
    a0: JordanAlgebra,
    cfg: Config,
    solver: GramSolver,
    events: EventModel,
    residual_events: Vec<Element>,
    faithful: bool,
}

impl ConditionalExpectation {
    pub fn new(mu: &State, a0: &JordanAlgebra, cfg: &Config) -> Result<Self> {
        check_dims(mu.dim(), a0.ambient_dim())?;
        let events = EventModel::new(a0, cfg);
        let residual_events = events.residual_events(cfg);
        Ok(Self {
            mu: mu.clone(),
            a0: a0.clone(),
            cfg: *cfg,
            solver: GramSolver::new(mu, a0, &cfg.tol),
            events,
            residual_events,
            faithful: is_faithful_on(mu, a0, &cfg.tol),
        })
    }

    pub fn subalgebra(&self) -> &JordanAlgebra {
        &self.a0
    }

    pub fn state(&self) -> &State {
        &self.mu
    }

    pub fn is_unique(&self) -> bool {
        self.faithful
    }

    pub fn compatibility(&self, x: &Element) -> Result<CompatibilityReport> {
        check_dims(self.mu.dim(), x.dim())?;
        Ok(self.events.compatibility(&self.mu, x, &self.cfg))
    }

    /// Minimum-norm solution of μ(Y∘B_i) = μ(X∘B_i) with no compatibility
    /// check and no truncation: the linear extension of X ↦ μ(X|𝒜₀).
    pub fn solve_linear(&self, x: &Element) -> Result<Element> {
        check_dims(self.mu.dim(), x.dim())?;
        let targets = targets_of(&self.a0, |b| self.mu.mu(&x.jordan(b)));
        let (coords, residual) = self.solver.solve(&targets);
        if residual > self.cfg.tol.solve {
            return Err(Error::NoRepresentingElement { residual });
        }
        Ok(self.a0.element(&coords))
    }

    /// max over test events of |μ({E, X, E}) − μ(Y∘E)|.
    pub fn residual(&self, x: &Element, y: &Element) -> f64 {
        self.residual_events
            .iter()
            .map(|e| (self.mu.mu(&sandwich(e, x)) - self.mu.mu(&y.jordan(e))).abs())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &Element) -> Result<CondExpResult> {
        let compatibility = self.compatibility(x)?;
        if let Some(w) = compatibility.witness.as_ref().filter(|_| compatibility.verdict.is_fail()) {
            return Err(Error::NoConditionalExpectation { lhs: w.lhs, rhs: w.rhs });
        }
        let mut value = self.solve_linear(x)?;
        let sanitized = x.in_unit_interval(&self.cfg.tol);
        if sanitized {
            let targets = targets_of(&self.a0, |b| self.mu.mu(&x.jordan(b)));
            value = clip_to_unit_interval(&value, &self.mu, &self.a0, &targets, &self.cfg.tol)?;
        }
        let residual = self.residual(x, &value);
        if residual > self.cfg.tol.solve {
            return Err(Error::Inconsistent { residual });
        }
        Ok(CondExpResult {
            value,
            residual,
            unique: self.faithful,
            sanitized,
            compatibility,
        })
    }
}

/// μ(X|𝒜₀). Fails when 𝒜₀ →μ X fails; arbitrary Hermitian X is handled by
/// the linear extension, with the [0, 𝟙] truncation applied only when
/// 0 ≤ X ≤ 𝟙.
pub fn conditional_expectation(mu: &State, x: &Element, a0: &JordanAlgebra, cfg: &Config) -> Result<CondExpResult> {
    ConditionalExpectation::new(mu, a0, cfg)?.apply(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IeMethod {
    /// Σ IP(X|E_n) E_n over atoms E_n; exact and state-independent.
    AtomFormula,
    /// Agreement across sampled faithful compatible states. An approximation
    /// of the universally quantified definition.
    SampledAgreement { agreeing: usize, sampled: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IeResult {
    pub result: CondExpResult,
    pub method: IeMethod,
}

/// State-independent conditional expectation IE(X|𝒜₀), if one is found.
pub fn ie_conditional_expectation(
    x: &Element,
    a0: &JordanAlgebra,
    n_states: usize,
    seed: u64,
    cfg: &Config,
) -> Result<Option<IeResult>> {
    check_dims(a0.ambient_dim(), x.dim())?;
    let n = a0.ambient_dim();
    let tol = &cfg.tol;
    if a0.is_associative(tol) {
        if let Ok(parts) = a0.minimal_idempotents(tol) {
            if parts.iter().all(|p| (p.trace() - 1.0).abs() <= tol.eq) {
                let value = parts
                    .iter()
                    .fold(Element::zero(n), |acc, p| &acc + &p.scale(p.pair(x)));
                let mu = trace_state(n);
                let op = ConditionalExpectation::new(&mu, a0, cfg)?;
                let compatibility = op.compatibility(x)?;
                let residual = op.residual(x, &value);
                return Ok(Some(IeResult {
                    result: CondExpResult {
                        value,
                        residual,
                        unique: true,
                        sanitized: false,
                        compatibility,
                    },
                    method: IeMethod::AtomFormula,
                }));
            }
        }
    }
    let mut rng = random::rng(seed);
    let mut found: Vec<CondExpResult> = Vec::new();
    for _ in 0..n_states {
        let mu = crate::states::random_faithful_state_from(&mut rng, n);
        let _ = rng.gen::<u32>();
        if let Ok(r) = conditional_expectation(&mu, x, a0, cfg) {
            found.push(r);
        }
    }
    if found.len() < 2 {
        return Ok(None);
    }
    let first = &found[0].value;
    if found.iter().any(|r| r.value.distance(first) > tol.eq) {
        return Ok(None);
    }
    let agreeing = found.len();
    Ok(Some(IeResult {
        result: found.swap_remove(0),
        method: IeMethod::SampledAgreement {
            agreeing,
            sampled: n_states,
        },
    }))
}

/// The trace-state conditional expectation π: 𝒜 → 𝒜 onto 𝒜₀ ⊆ 𝒜 as a
/// matrix on 𝒜's basis coordinates. Under the trace state every event pair
/// is compatible, so π is defined on all of 𝒜 and is the trace-orthogonal
/// projection onto 𝒜₀.
pub fn trace_projection(a: &JordanAlgebra, a0: &JordanAlgebra, cfg: &Config) -> Result<LinearMap> {
    check_dims(a.ambient_dim(), a0.ambient_dim())?;
    if !a.contains_algebra(a0, &cfg.tol) {
        return Err(Error::Precondition("subalgebra is not contained in the algebra"));
    }
    let op = ConditionalExpectation::new(&trace_state(a.ambient_dim()), a0, cfg)?;
    let d = a.dim();
    let mut matrix = DMatrix::zeros(d, d);
    for (j, b) in a.basis().iter().enumerate() {
        let y = op.solve_linear(b)?;
        matrix.set_column(j, &a.coordinates(&y));
    }
    LinearMap::new(a.clone(), a.clone(), matrix)
}
