//! Scenario files: the versioned JSON schema, parsing with field
//! diagnostics, and validation into library objects.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use jmarkov::dynamics::GeneratorMap;
use jmarkov::maps::LinearMap;
use jmarkov::{Config, Element, JordanAlgebra, Observable, State, TimeGrid, Tolerances, C64};
use nalgebra::{DMatrix, DVector};
use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::json;

pub const SCHEMA: u32 = 1;

/// A complex scalar, written `[re, im]`. Plain numbers are accepted on input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex(pub f64, pub f64);

impl Serialize for Complex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Complex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Complex;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or an [re, im] pair")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Complex, E> {
                Ok(Complex(v, 0.0))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Complex, E> {
                Ok(Complex(v as f64, 0.0))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Complex, E> {
                Ok(Complex(v as f64, 0.0))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Complex, A::Error> {
                let malformed = || de::Error::custom("malformed complex entry: expected [re, im]");
                let re: f64 = seq.next_element()?.ok_or_else(malformed)?;
                let im: f64 = seq.next_element()?.ok_or_else(malformed)?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(malformed());
                }
                Ok(Complex(re, im))
            }
        }
        d.deserialize_any(V)
    }
}

/// Row-major nested rows.
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub ambient_dim: usize,
    pub algebras: BTreeMap<String, AlgebraSpec>,
    pub state: Matrix,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, ObservableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    pub checks: Vec<CheckName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

/// `dim` is the matrix size the algebra lives in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgebraSpec {
    Full { dim: usize },
    Diagonal { dim: usize },
    Span { dim: usize, basis: Vec<Matrix> },
    Generated { dim: usize, generators: Vec<Matrix> },
}

/// `images` lists R(D_k) for the declared basis D of the source. Without
/// images the observable is the inclusion of the source into the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<Matrix>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub times: Vec<f64>,
    pub observables: Vec<String>,
}

/// L(D_k) for the declared basis D of `algebra`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub algebra: String,
    pub images: Vec<Matrix>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Faithful,
    EventPairs,
    ConditionI,
    MarkovProperty,
    Kernels,
    ChapmanKolmogorov,
    DistributionTransfer,
    Stationarity,
    Reversibility,
    Generator,
    ClassifyGenerator,
}

impl CheckName {
    pub const ALL: [CheckName; 11] = [
        CheckName::Faithful,
        CheckName::EventPairs,
        CheckName::ConditionI,
        CheckName::MarkovProperty,
        CheckName::Kernels,
        CheckName::ChapmanKolmogorov,
        CheckName::DistributionTransfer,
        CheckName::Stationarity,
        CheckName::Reversibility,
        CheckName::Generator,
        CheckName::ClassifyGenerator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Faithful => "faithful",
            CheckName::EventPairs => "event_pairs",
            CheckName::ConditionI => "condition_i",
            CheckName::MarkovProperty => "markov_property",
            CheckName::Kernels => "kernels",
            CheckName::ChapmanKolmogorov => "chapman_kolmogorov",
            CheckName::DistributionTransfer => "distribution_transfer",
            CheckName::Stationarity => "stationarity",
            CheckName::Reversibility => "reversibility",
            CheckName::Generator => "generator",
            CheckName::ClassifyGenerator => "classify_generator",
        }
    }

    /// Checks that read the process.
    pub fn needs_process(self) -> bool {
        !matches!(self, CheckName::Faithful | CheckName::EventPairs | CheckName::Generator | CheckName::ClassifyGenerator)
    }
}

/// A schema or validation failure, located by line/column or field path.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct InputError {
    pub location: String,
    pub message: String,
}

impl InputError {
    pub fn at(location: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

pub fn parse_str(text: &str) -> Result<Scenario, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let path = e.path().to_string();
        let location = if path == "." || path == "?" {
            format!("line {} column {}", inner.line(), inner.column())
        } else {
            format!("{path} (line {} column {})", inner.line(), inner.column())
        };
        InputError::at(location, strip_position(&inner.to_string()))
    })?;
    if scenario.schema != SCHEMA {
        return Err(InputError::at("schema", format!("unsupported schema version {}, expected {SCHEMA}", scenario.schema)));
    }
    Ok(scenario)
}

// serde_json appends " at line L column C"; the location already says so.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::at(path.display().to_string(), e))?;
    parse_str(&text)
}

/// Canonical JSON text; `parse_str(&emit(s))` reproduces `s` exactly.
pub fn emit(s: &Scenario) -> String {
    json::canonical(&serde_json::to_value(s).expect("scenario serializes"))
}

/// Command-line and environment settings layered over the scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Replaces the built-in eq and psd defaults; scenario values still win.
    pub default_tol: Option<f64>,
    /// Replaces eq and psd unconditionally.
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub const TOL_ENV: &str = "JMARKOV_TOL";

impl Overrides {
    /// Reads the default tolerance from `JMARKOV_TOL`.
    pub fn from_env() -> Result<Self, InputError> {
        let default_tol = match std::env::var(TOL_ENV) {
            Ok(v) => Some(parse_positive(&v).map_err(|m| InputError::at(TOL_ENV, m))?),
            Err(_) => None,
        };
        Ok(Self {
            default_tol,
            ..Self::default()
        })
    }
}

pub fn parse_positive(v: &str) -> Result<f64, String> {
    match v.trim().parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got '{v}'")),
    }
}

pub fn resolve_config(s: &Scenario, o: &Overrides) -> Config {
    let mut tol = Tolerances::default();
    if let Some(t) = o.default_tol {
        tol.eq = t;
        tol.psd = t;
    }
    if let Some(spec) = &s.tolerances {
        tol.eq = spec.eq.unwrap_or(tol.eq);
        tol.psd = spec.psd.unwrap_or(tol.psd);
        tol.rank = spec.rank.unwrap_or(tol.rank);
        tol.group = spec.group.unwrap_or(tol.group);
        tol.solve = spec.solve.unwrap_or(tol.solve);
    }
    if let Some(t) = o.tol {
        tol.eq = t;
        tol.psd = t;
    }
    let mut cfg = Config {
        tol,
        ..Config::default()
    };
    if let Some(seed) = o.seed.or(s.seed) {
        cfg.sampling.seed = seed;
    }
    if let Some(n) = s.samples {
        cfg.sampling.samples = n;
    }
    cfg
}

/// A validated scenario: every reference resolved and every matrix checked.
#[derive(Clone, Debug)]
pub struct Model {
    pub scenario: Scenario,
    pub config: Config,
    pub algebras: BTreeMap<String, JordanAlgebra>,
    /// The basis that observable and generator images refer to. `None` for
    /// generated algebras.
    pub declared: BTreeMap<String, Option<Vec<Element>>>,
    pub state: State,
    pub observables: BTreeMap<String, Observable>,
    pub generator: Option<GeneratorMap>,
    pub times: Option<TimeGrid>,
}

pub fn to_dmatrix(m: &Matrix, dim: usize, at: &str) -> Result<DMatrix<C64>, InputError> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(InputError::at(at, format!("expected a {dim}x{dim} matrix")));
    }
    if m.iter().flatten().any(|z| !z.0.is_finite() || !z.1.is_finite()) {
        return Err(InputError::at(at, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| C64::new(m[i][j].0, m[i][j].1)))
}

pub fn to_element(m: &Matrix, dim: usize, at: &str, tol: &Tolerances) -> Result<Element, InputError> {
    Element::new(to_dmatrix(m, dim, at)?, tol).map_err(|e| InputError::at(at, e))
}

pub fn from_element(x: &Element) -> Matrix {
    let m = x.matrix();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Complex(m[(i, j)].re, m[(i, j)].im)).collect())
        .collect()
}

/// Coordinates of `x` in a linearly independent list, by the Gram system.
fn declared_coordinates(basis: &[Element], x: &Element) -> DVector<f64> {
    let n = basis.len();
    let g = DMatrix::from_fn(n, n, |i, j| basis[i].pair(&basis[j]));
    let b = DVector::from_fn(n, |i, _| basis[i].pair(x));
    g.lu().solve(&b).unwrap_or_else(|| DVector::zeros(n))
}

/// The linear map sending the declared basis D_k to `images[k]`, as a map
/// between the algebras' own orthonormal bases.
fn map_from_declared(
    source: &JordanAlgebra,
    declared: &[Element],
    target: &JordanAlgebra,
    images: &[Element],
    tol: &Tolerances,
) -> jmarkov::Result<LinearMap> {
    LinearMap::from_fn(
        source.clone(),
        target.clone(),
        |b| {
            let a = declared_coordinates(declared, b);
            images
                .iter()
                .zip(a.iter())
                .fold(Element::zero(target.ambient_dim()), |acc, (y, &c)| &acc + &y.scale(c))
        },
        tol,
    )
}

fn build_algebra(name: &str, spec: &AlgebraSpec, tol: &Tolerances) -> Result<(JordanAlgebra, Option<Vec<Element>>), InputError> {
    let at = format!("algebras.{name}");
    match spec {
        AlgebraSpec::Full { dim } | AlgebraSpec::Diagonal { dim } if *dim == 0 => Err(InputError::at(format!("{at}.dim"), "must be positive")),
        AlgebraSpec::Full { dim } => {
            let a = JordanAlgebra::full(*dim);
            let b = a.basis().to_vec();
            Ok((a, Some(b)))
        }
        AlgebraSpec::Diagonal { dim } => {
            let a = JordanAlgebra::diagonal(*dim);
            let b = a.basis().to_vec();
            Ok((a, Some(b)))
        }
        AlgebraSpec::Span { dim, basis } => {
            let elems = basis
                .iter()
                .enumerate()
                .map(|(k, m)| to_element(m, *dim, &format!("{at}.basis[{k}]"), tol))
                .collect::<Result<Vec<_>, _>>()?;
            let a = JordanAlgebra::from_spanning_set(*dim, &elems, tol).map_err(|e| InputError::at(&at, e))?;
            if a.dim() != elems.len() {
                return Err(InputError::at(format!("{at}.basis"), "basis elements are linearly dependent"));
            }
            Ok((a, Some(elems)))
        }
        AlgebraSpec::Generated { dim, generators } => {
            let elems = generators
                .iter()
                .enumerate()
                .map(|(k, m)| to_element(m, *dim, &format!("{at}.generators[{k}]"), tol))
                .collect::<Result<Vec<_>, _>>()?;
            let a = JordanAlgebra::generated_by(*dim, &elems, tol).map_err(|e| InputError::at(&at, e))?;
            Ok((a, None))
        }
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, name: &str, kind: &str, at: &str) -> Result<&'a T, InputError> {
    map.get(name).ok_or_else(|| InputError::at(at, format!("unknown {kind} '{name}'")))
}

fn declared_images(
    at: &str,
    declared: &Option<Vec<Element>>,
    source_name: &str,
    images: &[Matrix],
    dim: usize,
    tol: &Tolerances,
) -> Result<(Vec<Element>, Vec<Element>), InputError> {
    let Some(basis) = declared else {
        return Err(InputError::at(
            at,
            format!("algebra '{source_name}' is generated and has no declared basis; images need a span, diagonal or full algebra"),
        ));
    };
    if images.len() != basis.len() {
        return Err(InputError::at(at, format!("expected {} images, got {}", basis.len(), images.len())));
    }
    let ys = images
        .iter()
        .enumerate()
        .map(|(k, m)| to_element(m, dim, &format!("{at}[{k}]"), tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((basis.clone(), ys))
}

impl Model {
    pub fn new(scenario: Scenario, overrides: &Overrides) -> Result<Self, InputError> {
        let config = resolve_config(&scenario, overrides);
        let tol = config.tol;
        let s = &scenario;
        if s.ambient_dim == 0 {
            return Err(InputError::at("ambient_dim", "must be positive"));
        }
        if s.checks.is_empty() {
            return Err(InputError::at("checks", "no checks requested"));
        }
        let mut algebras = BTreeMap::new();
        let mut declared = BTreeMap::new();
        for (name, spec) in &s.algebras {
            let (a, d) = build_algebra(name, spec, &tol)?;
            algebras.insert(name.clone(), a);
            declared.insert(name.clone(), d);
        }
        let rho = to_element(&s.state, s.ambient_dim, "state", &tol)?;
        let state = State::new(rho, &tol).map_err(|e| InputError::at("state", e))?;

        let mut observables = BTreeMap::new();
        for (name, spec) in &s.observables {
            let at = format!("observables.{name}");
            let source = lookup(&algebras, &spec.source, "algebra", &format!("{at}.source"))?;
            let target = lookup(&algebras, &spec.target, "algebra", &format!("{at}.target"))?;
            if target.ambient_dim() != s.ambient_dim {
                return Err(InputError::at(
                    format!("{at}.target"),
                    format!("algebra '{}' lives in dimension {}, expected ambient_dim {}", spec.target, target.ambient_dim(), s.ambient_dim),
                ));
            }
            let r = match &spec.images {
                None => {
                    if source.ambient_dim() != target.ambient_dim() || !target.contains_algebra(source, &tol) {
                        return Err(InputError::at(at, format!("'{}' is not a subalgebra of '{}'; give images", spec.source, spec.target)));
                    }
                    Observable::embedding(source, target, &tol)
                }
                Some(images) => {
                    let img_at = format!("{at}.images");
                    let (basis, ys) = declared_images(&img_at, &declared[&spec.source], &spec.source, images, s.ambient_dim, &tol)?;
                    map_from_declared(source, &basis, target, &ys, &tol).and_then(|m| Observable::from_map(m, &tol))
                }
            }
            .map_err(|e| InputError::at(format!("observables.{name}"), e))?;
            observables.insert(name.clone(), r);
        }

        let times = match &s.process {
            None => None,
            Some(p) => {
                for (k, name) in p.observables.iter().enumerate() {
                    lookup(&observables, name, "observable", &format!("process.observables[{k}]"))?;
                }
                if p.times.len() != p.observables.len() {
                    return Err(InputError::at(
                        "process",
                        format!("{} times but {} observables", p.times.len(), p.observables.len()),
                    ));
                }
                Some(TimeGrid::new(p.times.clone()).map_err(|e| InputError::at("process.times", e))?)
            }
        };

        let generator = match &s.generator {
            None => None,
            Some(g) => {
                let alg = lookup(&algebras, &g.algebra, "algebra", "generator.algebra")?;
                let (basis, ys) = declared_images("generator.images", &declared[&g.algebra], &g.algebra, &g.images, alg.ambient_dim(), &tol)?;
                let m = map_from_declared(alg, &basis, alg, &ys, &tol).map_err(|e| InputError::at("generator.images", e))?;
                Some(GeneratorMap::new(alg.clone(), m.matrix().clone()).map_err(|e| InputError::at("generator", e))?)
            }
        };

        for (k, c) in s.checks.iter().enumerate() {
            let at = format!("checks[{k}]");
            if c.needs_process() && times.is_none() {
                return Err(InputError::at(at, format!("'{}' needs a process", c.as_str())));
            }
            if matches!(c, CheckName::Generator | CheckName::ClassifyGenerator) && generator.is_none() && times.is_none() {
                return Err(InputError::at(at, format!("'{}' needs a generator or a process", c.as_str())));
            }
        }

        Ok(Self {
            config,
            algebras,
            declared,
            state,
            observables,
            generator,
            times,
            scenario,
        })
    }

    /// Observables of the process in time order.
    pub fn process_observables(&self) -> Vec<(&str, &Observable)> {
        self.scenario
            .process
            .iter()
            .flat_map(|p| p.observables.iter())
            .map(|n| (n.as_str(), &self.observables[n]))
            .collect()
    }

    /// The declared basis of the source of the process observable at `t`.
    pub fn declared_source_basis(&self, t: usize) -> Option<&[Element]> {
        let p = self.scenario.process.as_ref()?;
        let src = &self.scenario.observables[&p.observables[t]].source;
        self.declared[src].as_deref()
    }
}
