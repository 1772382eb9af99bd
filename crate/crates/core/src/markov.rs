//! Normal Markov processes on a finite time grid: the compatibility
//! condition, the Markov property, transition kernels V_{s,s′} and the
//! properties they inherit (Chapman–Kolmogorov, distribution transfer,
//! stationarity, reversibility).
//!
//! Times are addressed by their index in the grid.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::algebra::JordanAlgebra;
use crate::condexp::{is_compatible_pair, CompatibilityReport, ConditionalExpectation, Verdict};
use crate::error::{Error, Result};
use crate::maps::{is_multiplicative, is_positive_unital, pushforward_distribution, LinearMap, Observable, ObservableExpectation, PositivityReport};
use crate::states::{is_faithful_on, Pairing, State};
use crate::tol::{Config, Sampling, Tolerances};

/// Strictly increasing time points, at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidTimeGrid("fewer than two points"));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTimeGrid("non-finite time"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTimeGrid("times are not strictly increasing"));
        }
        Ok(Self { points })
    }

    /// 0, step, 2·step, … with `len` points.
    pub fn uniform(step: f64, len: usize) -> Result<Self> {
        Self::new((0..len).map(|k| k as f64 * step).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn time(&self, index: usize) -> Result<f64> {
        self.points.get(index).copied().ok_or(Error::TimeIndex(index))
    }
}

/// Observables R_s: ℳ_s → 𝒜, one per grid point, and a faithful state on 𝒜.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovProcess {
    times: TimeGrid,
    observables: Vec<Observable>,
    state: State,
}

impl MarkovProcess {
    pub fn new(times: TimeGrid, observables: Vec<Observable>, state: State, tol: &Tolerances) -> Result<Self> {
        if observables.len() != times.len() {
            return Err(Error::ImageCount {
                expected: times.len(),
                found: observables.len(),
            });
        }
        let target = observables[0].target();
        if observables.iter().any(|r| !r.target().same_span(target, tol)) {
            return Err(Error::TargetMismatch);
        }
        if state.dim() != target.ambient_dim() {
            return Err(Error::DimensionMismatch {
                left: target.ambient_dim(),
                right: state.dim(),
            });
        }
        if !is_faithful_on(&state, target, tol) {
            return Err(Error::NotFaithful);
        }
        Ok(Self {
            times,
            observables,
            state,
        })
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn observable(&self, s: usize) -> Result<&Observable> {
        self.observables.get(s).ok_or(Error::TimeIndex(s))
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// The common target algebra 𝒜.
    pub fn target(&self) -> &JordanAlgebra {
        self.observables[0].target()
    }

    /// R_s(ℳ_s).
    pub fn image_algebra(&self, s: usize, tol: &Tolerances) -> Result<JordanAlgebra> {
        self.observable(s)?.image_algebra(tol)
    }
}

/// 𝒜_{≤s}: the subalgebra generated by R_{s′}(ℳ_{s′}) for all s′ ≤ s.
pub fn history_algebra(p: &MarkovProcess, s: usize, tol: &Tolerances) -> Result<JordanAlgebra> {
    p.observable(s)?;
    let generators: Vec<_> = p.observables[..=s].iter().flat_map(|r| r.images()).collect();
    JordanAlgebra::generated_by(p.target().ambient_dim(), &generators, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairCompatibility {
    pub s: usize,
    pub t: usize,
    pub report: CompatibilityReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionIReport {
    pub pairs: Vec<PairCompatibility>,
    /// The weakest per-pair verdict.
    pub verdict: Verdict,
}

impl ConditionIReport {
    pub fn holds(&self) -> bool {
        !self.verdict.is_fail()
    }

    /// The failing pair with the largest gap.
    pub fn worst(&self) -> Option<&PairCompatibility> {
        self.pairs
            .iter()
            .filter(|p| p.report.verdict.is_fail())
            .max_by(|a, b| {
                let gap = |p: &PairCompatibility| p.report.witness.as_ref().map_or(0.0, |w| w.gap());
                gap(a).total_cmp(&gap(b))
            })
    }
}

/// Condition (i): 𝒜_{≤s} →μ R_{s′}(ℳ_{s′}) for every s < s′.
pub fn check_condition_i(p: &MarkovProcess, cfg: &Config) -> Result<ConditionIReport> {
    let n = p.len();
    let mut pairs = Vec::new();
    let mut verdict = Verdict::Holds;
    let images: Vec<JordanAlgebra> = (0..n).map(|t| p.image_algebra(t, &cfg.tol)).collect::<Result<_>>()?;
    for s in 0..n {
        let history = history_algebra(p, s, &cfg.tol)?;
        for (t, image) in images.iter().enumerate().skip(s + 1) {
            let report = is_compatible_pair(&p.state, &history, image, cfg)?;
            verdict = verdict.weakest(report.verdict);
            pairs.push(PairCompatibility { s, t, report });
        }
    }
    Ok(ConditionIReport { pairs, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairDeviation {
    pub s: usize,
    pub t: usize,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovPropertyReport {
    pub pairs: Vec<PairDeviation>,
    pub max_deviation: f64,
    pub passes: bool,
}

/// Condition (ii): μ(X|𝒜_{≤s}) = μ(X|R_s(ℳ_s)) for X in a basis of
/// R_{s′}(ℳ_{s′}), s < s′. Passes when the largest deviation is at most
/// `tol.solve`.
pub fn check_markov_property(p: &MarkovProcess, cfg: &Config) -> Result<MarkovPropertyReport> {
    let n = p.len();
    let mut pairs = Vec::new();
    let images: Vec<JordanAlgebra> = (0..n).map(|t| p.image_algebra(t, &cfg.tol)).collect::<Result<_>>()?;
    for s in 0..n.saturating_sub(1) {
        let on_history = ConditionalExpectation::new(&p.state, &history_algebra(p, s, &cfg.tol)?, cfg)?;
        let on_present = ConditionalExpectation::new(&p.state, &images[s], cfg)?;
        for (t, image) in images.iter().enumerate().skip(s + 1) {
            let mut deviation: f64 = 0.0;
            for x in image.basis() {
                let a = on_history.apply(x)?.value;
                let b = on_present.apply(x)?.value;
                deviation = deviation.max(a.distance(&b));
            }
            pairs.push(PairDeviation { s, t, deviation });
        }
    }
    let max_deviation = pairs.iter().map(|d| d.deviation).fold(0.0, f64::max);
    Ok(MarkovPropertyReport {
        pairs,
        max_deviation,
        passes: max_deviation <= cfg.tol.solve,
    })
}

/// V_{s,s′} = V_{R_s,μ}R_{s′}: ℳ_{s′} → ℳ_s; the identity when s = s′.
/// Unitality is asserted and positivity checked by sampling.
pub fn extract_kernel(p: &MarkovProcess, s: usize, t: usize, cfg: &Config) -> Result<LinearMap> {
    let rs = p.observable(s)?;
    let rt = p.observable(t)?;
    if s == t {
        return Ok(LinearMap::identity(rs.source()));
    }
    if s > t {
        return Err(Error::Precondition("kernels run forward in time"));
    }
    let pullback = ObservableExpectation::new(rs, &p.state, cfg)?;
    kernel_from(&pullback, rt, s, t, cfg)
}

fn kernel_from(pullback: &ObservableExpectation, rt: &Observable, s: usize, t: usize, cfg: &Config) -> Result<LinearMap> {
    let ms = pullback.observable().source();
    let columns = rt
        .images()
        .iter()
        .map(|x| pullback.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let kernel = LinearMap::from_images(rt.source().clone(), ms.clone(), &columns, &cfg.tol)?;
    let deviation = kernel.unit_deviation();
    if deviation > cfg.tol.eq {
        return Err(Error::NotUnital { deviation });
    }
    let positivity = is_positive_unital(&kernel, cfg.sampling, &cfg.tol);
    if !positivity.holds() {
        return Err(Error::KernelNotPositive {
            s,
            t,
            min_eigenvalue: positivity.min_eigenvalue,
        });
    }
    Ok(kernel)
}

/// Kernels V_{s,s′} for all s ≤ s′ of a grid, keyed by time indices.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelFamily {
    len: usize,
    kernels: BTreeMap<(usize, usize), LinearMap>,
}

impl KernelFamily {
    /// Assembles a family from explicit kernels; identities on the diagonal
    /// are filled in from the source of V_{s,s+1} or target of V_{s−1,s}.
    pub fn from_kernels(len: usize, kernels: BTreeMap<(usize, usize), LinearMap>) -> Result<Self> {
        let mut kernels = kernels;
        for s in 0..len {
            if kernels.contains_key(&(s, s)) {
                continue;
            }
            let algebra = kernels
                .iter()
                .find_map(|(&(a, b), k)| {
                    if a == s {
                        Some(k.target().clone())
                    } else if b == s {
                        Some(k.source().clone())
                    } else {
                        None
                    }
                })
                .ok_or(Error::Precondition("no kernel touches a time point"))?;
            kernels.insert((s, s), LinearMap::identity(&algebra));
        }
        if kernels.keys().any(|&(s, t)| s > t || t >= len) {
            return Err(Error::Precondition("kernel keys must satisfy s ≤ t < len"));
        }
        Ok(Self { len, kernels })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, s: usize, t: usize) -> Option<&LinearMap> {
        self.kernels.get(&(s, t))
    }

    pub fn kernel(&self, s: usize, t: usize) -> Result<&LinearMap> {
        self.get(s, t).ok_or(Error::TimeIndex(if s < self.len { t } else { s }))
    }

    /// Every stored (s, s′) with its kernel, in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &LinearMap)> {
        self.kernels.iter()
    }
}

/// Kernels for every pair s ≤ s′, with V_{R_s,μ} prepared once per s.
pub fn extract_kernels(p: &MarkovProcess, cfg: &Config) -> Result<KernelFamily> {
    let n = p.len();
    let mut kernels = BTreeMap::new();
    for s in 0..n {
        let rs = &p.observables[s];
        kernels.insert((s, s), LinearMap::identity(rs.source()));
        if s + 1 == n {
            break;
        }
        let pullback = ObservableExpectation::new(rs, &p.state, cfg)?;
        for t in (s + 1)..n {
            kernels.insert((s, t), kernel_from(&pullback, &p.observables[t], s, t, cfg)?);
        }
    }
    Ok(KernelFamily { len: n, kernels })
}

/// Largest ‖V_{s,s′}V_{s′,s″} − V_{s,s″}‖ over s < s′ < s″; zero for a
/// two-point grid.
pub fn check_chapman_kolmogorov(k: &KernelFamily, tol: &Tolerances) -> Result<f64> {
    let n = k.len;
    let mut worst: f64 = 0.0;
    for s in 0..n {
        for m in (s + 1)..n {
            for t in (m + 1)..n {
                let composed = k.kernel(s, m)?.compose(k.kernel(m, t)?, tol)?;
                let direct = k.kernel(s, t)?;
                worst = worst.max((composed.matrix() - direct.matrix()).norm());
            }
        }
    }
    Ok(worst)
}

/// Largest |μ^{R_s}(V_{s,s′}(Y)) − μ^{R_{s′}}(Y)| over pairs and basis Y.
pub fn check_distribution_transfer(p: &MarkovProcess, k: &KernelFamily, tol: &Tolerances) -> Result<f64> {
    let n = p.len();
    let dists: Vec<State> = p
        .observables
        .iter()
        .map(|r| pushforward_distribution(&p.state, r, tol))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for s in 0..n {
        for t in (s + 1)..n {
            let v = k.kernel(s, t)?;
            for (j, y) in v.source().basis().iter().enumerate() {
                let lhs = dists[s].density().pair(&v.image_of_basis(j));
                let rhs = dists[t].density().pair(y);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityReport {
    pub stationary: bool,
    /// Largest disagreement between kernels with equal time gaps.
    pub max_deviation: f64,
    /// (gap, kernel) for each distinct gap, starting with (0, identity).
    /// Filled only when the process is stationary.
    pub family: Vec<(f64, LinearMap)>,
}

/// V_{s,s′} depends only on s′ − s. Gaps are matched up to `tol.group`
/// relative to the grid span.
pub fn check_stationarity(p: &MarkovProcess, k: &KernelFamily, tol: &Tolerances) -> Result<StationarityReport> {
    let first = p.observables[0].source();
    for r in &p.observables {
        let b = r.source();
        if b.dim() != first.dim() || b.basis().iter().zip(first.basis()).any(|(x, y)| x.distance(y) > tol.eq) {
            return Err(Error::SourceMismatch);
        }
    }
    let pts = p.times.points();
    let scale = (pts[pts.len() - 1] - pts[0]).abs().max(1.0);
    // representative kernel per distinct gap
    let mut groups: Vec<(f64, &LinearMap)> = Vec::new();
    let mut max_deviation: f64 = 0.0;
    let n = p.len();
    for s in 0..n {
        for t in (s + 1)..n {
            let gap = pts[t] - pts[s];
            let v = k.kernel(s, t)?;
            match groups.iter().find(|(g, _)| (g - gap).abs() <= tol.group * scale) {
                Some((_, rep)) => {
                    max_deviation = max_deviation.max((rep.matrix() - v.matrix()).norm());
                }
                None => groups.push((gap, v)),
            }
        }
    }
    let stationary = max_deviation <= tol.solve;
    let mut family = Vec::new();
    if stationary {
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        family.push((0.0, LinearMap::identity(first)));
        family.extend(groups.into_iter().map(|(g, v)| (g, v.clone())));
    }
    Ok(StationarityReport {
        stationary,
        max_deviation,
        family,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReversibilityReport {
    pub s: usize,
    pub t: usize,
    pub reversible: bool,
    pub condition: f64,
    /// Sampled positivity of the inverse, when the inverse exists.
    pub inverse_positivity: Option<PositivityReport>,
    pub multiplicative: bool,
}

/// A kernel is reversible when it has an inverse (condition number below
/// 1/`tol.rank`) that is positive on samples. Reversible kernels must also
/// be multiplicative.
pub fn kernel_reversibility(v: &LinearMap, sampling: Sampling, tol: &Tolerances) -> (bool, f64, Option<PositivityReport>, bool) {
    let multiplicative = is_multiplicative(v, tol);
    match v.inverse(tol) {
        Ok(inv) => {
            let condition = crate::linalg::condition_number(v.matrix());
            let report = is_positive_unital(&inv, sampling, tol);
            (report.holds(), condition, Some(report), multiplicative)
        }
        Err(Error::Singular { condition }) => (false, condition, None, multiplicative),
        Err(_) => (false, f64::INFINITY, None, multiplicative),
    }
}

/// Reversibility of every kernel V_{s,s′} with s < s′.
pub fn check_reversibility(k: &KernelFamily, sampling: Sampling, tol: &Tolerances) -> Vec<ReversibilityReport> {
    k.iter()
        .filter(|(&(s, t), _)| s < t)
        .map(|(&(s, t), v)| {
            let (reversible, condition, inverse_positivity, multiplicative) = kernel_reversibility(v, sampling, tol);
            ReversibilityReport {
                s,
                t,
                reversible,
                condition,
                inverse_positivity,
                multiplicative,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Element;
    use crate::processes;
    use crate::states::{diagonal_state, trace_state};
    use nalgebra::dmatrix;

    fn cfg() -> Config {
        Config::default()
    }

    fn chain() -> MarkovProcess {
        processes::homogeneous_chain(&[0.5, 0.5], &dmatrix![0.9, 0.1; 0.2, 0.8], 2, &cfg().tol).unwrap()
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![1.0, 0.5]).is_err());
        assert_eq!(TimeGrid::uniform(0.5, 3).unwrap().points(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn process_rejects_non_faithful_state() {
        let t = Tolerances::default();
        let diag = JordanAlgebra::diagonal(2);
        let r = Observable::embedding(&diag, &diag, &t).unwrap();
        let mu = diagonal_state(&[1.0, 0.0], &t).unwrap();
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        assert_eq!(
            MarkovProcess::new(grid, vec![r.clone(), r], mu, &t),
            Err(Error::NotFaithful)
        );
    }

    #[test]
    fn history_algebra_examples() {
        let c = cfg();
        let p = chain();
        let h0 = history_algebra(&p, 0, &c.tol).unwrap();
        assert!(h0.same_span(&p.image_algebra(0, &c.tol).unwrap(), &c.tol));
        assert_eq!(history_algebra(&p, 1, &c.tol).unwrap().dim(), 4);
        assert_eq!(history_algebra(&p, 2, &c.tol).unwrap().dim(), 8);
    }

    #[test]
    fn classical_chain_checks() {
        let c = cfg();
        let p = chain();
        assert_eq!(check_condition_i(&p, &c).unwrap().verdict, Verdict::Holds);
        let m = check_markov_property(&p, &c).unwrap();
        assert!(m.passes, "{}", m.max_deviation);
        let k = extract_kernels(&p, &c).unwrap();
        let v01 = k.kernel(0, 1).unwrap();
        assert!((v01.matrix() - dmatrix![0.9, 0.1; 0.2, 0.8]).amax() < 1e-12);
        let v02 = k.kernel(0, 2).unwrap();
        let p2 = dmatrix![0.9, 0.1; 0.2, 0.8] * dmatrix![0.9, 0.1; 0.2, 0.8];
        assert!((v02.matrix() - p2).amax() < 1e-12);
        assert!(check_chapman_kolmogorov(&k, &c.tol).unwrap() < 1e-12);
        assert!(check_distribution_transfer(&p, &k, &c.tol).unwrap() < 1e-12);
        assert!(check_stationarity(&p, &k, &c.tol).unwrap().stationary);
        let rev = check_reversibility(&k, c.sampling, &c.tol);
        assert!(rev.iter().all(|r| !r.reversible));
    }

    #[test]
    fn non_markov_chain_fails_markov_property() {
        let c = cfg();
        let p = processes::memory_chain(0.9, &c.tol).unwrap();
        assert!(check_condition_i(&p, &c).unwrap().holds());
        let m = check_markov_property(&p, &c).unwrap();
        assert!(m.max_deviation > 10.0 * c.tol.solve);
        assert!(!m.passes);
    }

    #[test]
    fn time_varying_chain_is_not_stationary() {
        let c = cfg();
        let p = processes::classical_chain(
            &[0.5, 0.5],
            &[dmatrix![0.9, 0.1; 0.2, 0.8], dmatrix![0.6, 0.4; 0.3, 0.7]],
            &c.tol,
        )
        .unwrap();
        let k = extract_kernels(&p, &c).unwrap();
        assert!(!check_stationarity(&p, &k, &c.tol).unwrap().stationary);
        assert!(check_chapman_kolmogorov(&k, &c.tol).unwrap() < 1e-12);
    }

    #[test]
    fn unitary_process_checks() {
        let c = cfg();
        let h = Element::sigma_z().scale(0.5);
        let p = processes::unitary_process(&h, TimeGrid::uniform(0.1, 5).unwrap(), trace_state(2), &c.tol).unwrap();
        assert!(check_condition_i(&p, &c).unwrap().holds());
        assert!(check_markov_property(&p, &c).unwrap().passes);
        let k = extract_kernels(&p, &c).unwrap();
        assert!(check_chapman_kolmogorov(&k, &c.tol).unwrap() < 1e-10);
        assert!(check_distribution_transfer(&p, &k, &c.tol).unwrap() < 1e-12);
        let st = check_stationarity(&p, &k, &c.tol).unwrap();
        assert!(st.stationary);
        assert_eq!(st.family.len(), 5);
        let rev = check_reversibility(&k, c.sampling, &c.tol);
        assert!(rev.iter().all(|r| r.reversible && r.multiplicative));
        // V_{0,1} is conjugation by exp(iΔH)
        let u = h.unitary_exp(0.1);
        let x = Element::sigma_x();
        let got = k.kernel(0, 1).unwrap().apply(&x, &c.tol).unwrap();
        assert!(got.distance(&x.conjugate_by(&u)) < 1e-10);
    }

    #[test]
    fn incompatible_state_fails_condition_i() {
        let c = cfg();
        let t = &c.tol;
        let full = JordanAlgebra::full(2);
        let diag = JordanAlgebra::diagonal(2);
        let r1 = Observable::embedding(&diag, &full, t).unwrap();
        // R_0 reads the ±-basis
        let plus = Element::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let minus = &Element::identity(2) - &plus;
        let r0 = crate::maps::make_observable(&diag, &full, &[plus, minus], t).unwrap();
        let mu = diagonal_state(&[0.75, 0.25], t).unwrap();
        let p = MarkovProcess::new(TimeGrid::uniform(1.0, 2).unwrap(), vec![r0, r1], mu, t).unwrap();
        let report = check_condition_i(&p, &c).unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        assert!(report.worst().is_some());
    }

    #[test]
    fn identity_kernel_is_reversible() {
        let t = Tolerances::default();
        let v = LinearMap::identity(&JordanAlgebra::full(2));
        let (rev, cond, _, mult) = kernel_reversibility(&v, Sampling::default(), &t);
        assert!(rev && mult);
        assert!((cond - 1.0).abs() < 1e-12);
    }
}
