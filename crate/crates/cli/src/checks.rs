//! Runs the requested checks of a scenario in dependency order:
//! faithfulness, then condition (i), the Markov property, kernel extraction,
//! the kernel checks, and finally the generator. Checks that share no data
//! run on scoped threads; the report is assembled on the calling thread.

use std::collections::BTreeMap;
use std::time::Instant;

use jmarkov::condexp::{is_compatible_pair, CompatibilityReport, Method};
use jmarkov::dynamics::{classify, exponentiate, generator_from_kernel};
use jmarkov::maps::is_positive_unital;
use jmarkov::markov::{
    check_chapman_kolmogorov, check_condition_i, check_distribution_transfer, check_markov_property, check_reversibility,
    check_stationarity, extract_kernels, StationarityReport,
};
use jmarkov::states::is_faithful_on;
use jmarkov::{Classification, Element, GeneratorMap, JordanAlgebra, KernelFamily, LinearMap, MarkovProcess, Pairing, Verdict};
use serde_json::{json, Value};

use crate::report::{CheckRecord, Outcome, Report};
use crate::scenario::{from_element, CheckName, Model};

fn method_name(m: Method) -> &'static str {
    match m {
        Method::EventPair => "event_pair",
        Method::AssociativeExact => "associative_exact",
        Method::Sampled => "sampled",
        Method::ConstructAndVerify => "construct_and_verify",
    }
}

fn matrix_value(m: &nalgebra::DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn element_value(x: &Element) -> Value {
    serde_json::to_value(from_element(x)).expect("matrix serializes")
}

fn timed(f: impl FnOnce() -> CheckRecord) -> CheckRecord {
    let start = Instant::now();
    let mut r = f();
    r.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    r
}

/// Verdict, method and witnesses for a list of compatibility reports.
fn compatibility_record(name: CheckName, reports: &[(Value, &CompatibilityReport)]) -> CheckRecord {
    let mut verdict = Verdict::Holds;
    let mut methods: Vec<&str> = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut sampling = None;
    let mut pairs = Vec::new();
    let mut witnesses = Vec::new();
    for (label, r) in reports {
        verdict = verdict.weakest(r.verdict);
        let m = method_name(r.method);
        if !methods.contains(&m) {
            methods.push(m);
        }
        if r.sampling.is_some() {
            sampling = r.sampling;
        }
        pairs.push(json!({"pair": label, "verdict": Outcome::from(r.verdict), "method": m, "events_checked": r.events_checked}));
        if let Some(w) = &r.witness {
            max_gap = max_gap.max(w.gap());
            witnesses.push(json!({"pair": label, "event": element_value(&w.event), "lhs": w.lhs, "rhs": w.rhs}));
        }
    }
    methods.sort_unstable();
    let mut rec = CheckRecord::new(name, verdict.into(), &methods.join("+"))
        .deviation("max_gap", max_gap)
        .datum("pairs", json!(pairs));
    rec.witnesses = witnesses;
    if let Some(s) = sampling {
        rec = rec.sampled(s);
    }
    rec
}

fn faithful(m: &Model) -> CheckRecord {
    let tol = &m.config.tol;
    let target = m
        .process_observables()
        .first()
        .map(|(_, r)| r.target().clone())
        .unwrap_or_else(|| JordanAlgebra::full(m.scenario.ambient_dim));
    let ok = is_faithful_on(&m.state, &target, tol);
    CheckRecord::new(CheckName::Faithful, if ok { Outcome::Pass } else { Outcome::Fail }, "gram_eigenvalue")
        .deviation("min_density_eigenvalue", m.state.density().min_eigenvalue())
}

fn event_pairs(m: &Model) -> CheckRecord {
    let tol = &m.config.tol;
    let images: Vec<(&String, JordanAlgebra)> = match m
        .observables
        .iter()
        .map(|(n, r)| r.image_algebra(tol).map(|a| (n, a)))
        .collect::<jmarkov::Result<Vec<_>>>()
    {
        Ok(v) => v,
        Err(e) => return CheckRecord::error(CheckName::EventPairs, e),
    };
    let mut reports = Vec::new();
    for (a, ia) in &images {
        for (b, ib) in &images {
            if a == b || ia.ambient_dim() != m.state.dim() {
                continue;
            }
            match is_compatible_pair(&m.state, ia, ib, &m.config) {
                Ok(r) => reports.push((json!([a, b]), r)),
                Err(e) => return CheckRecord::error(CheckName::EventPairs, format!("{a} -> {b}: {e}")),
            }
        }
    }
    let refs: Vec<(Value, &CompatibilityReport)> = reports.iter().map(|(l, r)| (l.clone(), r)).collect();
    let mut rec = compatibility_record(CheckName::EventPairs, &refs);
    if reports.is_empty() {
        rec.message = Some("fewer than two observables; nothing to compare".into());
    }
    rec
}

fn condition_i(m: &Model, p: &MarkovProcess) -> CheckRecord {
    match check_condition_i(p, &m.config) {
        Ok(r) => {
            let refs: Vec<(Value, &CompatibilityReport)> = r.pairs.iter().map(|c| (json!([c.s, c.t]), &c.report)).collect();
            compatibility_record(CheckName::ConditionI, &refs)
        }
        Err(e) => CheckRecord::error(CheckName::ConditionI, e),
    }
}

fn markov_property(m: &Model, p: &MarkovProcess) -> CheckRecord {
    let r = match check_markov_property(p, &m.config) {
        Ok(r) => r,
        Err(e) => return CheckRecord::error(CheckName::MarkovProperty, e),
    };
    let times = p.times().points();
    let pairs: Vec<Value> = r.pairs.iter().map(|d| json!({"s": d.s, "t": d.t, "deviation": d.deviation})).collect();
    let mut rec = CheckRecord::new(
        CheckName::MarkovProperty,
        if r.passes { Outcome::Pass } else { Outcome::Fail },
        "conditional_expectation",
    )
    .deviation("max_deviation", r.max_deviation)
    .datum("pairs", json!(pairs));
    if !r.passes {
        if let Some(w) = r.pairs.iter().max_by(|a, b| a.deviation.total_cmp(&b.deviation)) {
            rec.witnesses.push(json!({
                "s": w.s, "t": w.t, "time_s": times[w.s], "time_t": times[w.t], "deviation": w.deviation,
            }));
        }
    }
    rec
}

fn kernels(m: &Model, p: &MarkovProcess) -> (CheckRecord, Option<KernelFamily>) {
    let k = match extract_kernels(p, &m.config) {
        Ok(k) => k,
        Err(e @ jmarkov::Error::KernelNotPositive { s, t, min_eigenvalue }) => {
            let mut rec = CheckRecord::new(CheckName::Kernels, Outcome::Fail, "conditional_expectation+sampled_positivity")
                .deviation("min_eigenvalue", min_eigenvalue)
                .sampled(m.config.sampling);
            rec.message = Some(e.to_string());
            rec.witnesses.push(json!({"s": s, "t": t}));
            return (rec, None);
        }
        Err(e) => return (CheckRecord::error(CheckName::Kernels, e), None),
    };
    let mut unit: f64 = 0.0;
    let mut mats = serde_json::Map::new();
    for (&(s, t), v) in k.iter().filter(|((s, t), _)| s < t) {
        unit = unit.max(v.unit_deviation());
        mats.insert(format!("V_{{{s},{t}}}"), matrix_value(v.matrix()));
    }
    let rec = CheckRecord::new(CheckName::Kernels, Outcome::PassSampled, "conditional_expectation+sampled_positivity")
        .deviation("max_unit_deviation", unit)
        .datum("matrices", Value::Object(mats))
        .sampled(m.config.sampling);
    (rec, Some(k))
}

fn threshold(name: CheckName, deviation: f64, bound: f64, method: &str) -> CheckRecord {
    CheckRecord::new(name, if deviation <= bound { Outcome::Pass } else { Outcome::Fail }, method).deviation("max_deviation", deviation)
}

fn chapman_kolmogorov(m: &Model, k: &KernelFamily) -> CheckRecord {
    match check_chapman_kolmogorov(k, &m.config.tol) {
        Ok(d) => threshold(CheckName::ChapmanKolmogorov, d, m.config.tol.solve, "composition"),
        Err(e) => CheckRecord::error(CheckName::ChapmanKolmogorov, e),
    }
}

fn distribution_transfer(m: &Model, p: &MarkovProcess, k: &KernelFamily) -> CheckRecord {
    match check_distribution_transfer(p, k, &m.config.tol) {
        Ok(d) => threshold(CheckName::DistributionTransfer, d, m.config.tol.solve, "pushforward"),
        Err(e) => CheckRecord::error(CheckName::DistributionTransfer, e),
    }
}

fn stationarity(m: &Model, p: &MarkovProcess, k: &KernelFamily) -> (CheckRecord, Option<StationarityReport>) {
    match check_stationarity(p, k, &m.config.tol) {
        Ok(r) => {
            let gaps: Vec<f64> = r.family.iter().map(|(g, _)| *g).collect();
            let rec = CheckRecord::new(
                CheckName::Stationarity,
                if r.stationary { Outcome::Pass } else { Outcome::Fail },
                "gap_grouping",
            )
            .deviation("max_deviation", r.max_deviation)
            .datum("gaps", json!(gaps));
            (rec, Some(r))
        }
        Err(e) => (CheckRecord::error(CheckName::Stationarity, e), None),
    }
}

fn reversibility(m: &Model, k: &KernelFamily) -> CheckRecord {
    let reports = check_reversibility(k, m.config.sampling, &m.config.tol);
    // reversible kernels must be multiplicative
    let ok = reports.iter().all(|r| !r.reversible || r.multiplicative);
    let any_sampled = reports.iter().any(|r| r.inverse_positivity.is_some());
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "s": r.s, "t": r.t, "reversible": r.reversible,
                "multiplicative": r.multiplicative, "condition": r.condition,
            })
        })
        .collect();
    let verdict = match (ok, any_sampled) {
        (false, _) => Outcome::Fail,
        (true, true) => Outcome::PassSampled,
        (true, false) => Outcome::Pass,
    };
    let mut rec = CheckRecord::new(CheckName::Reversibility, verdict, "inverse+sampled_positivity").datum("kernels", json!(rows));
    for r in reports.iter().filter(|r| r.reversible && !r.multiplicative) {
        rec.witnesses.push(json!({"s": r.s, "t": r.t}));
    }
    if any_sampled {
        rec = rec.sampled(m.config.sampling);
    }
    rec
}

/// L = log(V_Δ)/Δ for the smallest positive gap Δ of a stationary family.
pub fn derived_generator(m: &Model, st: &StationarityReport) -> Result<(f64, GeneratorMap), String> {
    let (delta, v) = st.family.get(1).ok_or("no positive time gap")?;
    generator_from_kernel(v, *delta, &m.config.tol)
        .map(|l| (*delta, l))
        .map_err(|e| e.to_string())
}

/// A kernel of a stationary family at gap `delta`, matched within the group tolerance.
pub fn kernel_at_gap<'a>(m: &Model, st: &'a StationarityReport, delta: f64) -> Option<&'a LinearMap> {
    let span = m.times.as_ref().map_or(1.0, |t| {
        let p = t.points();
        (p[p.len() - 1] - p[0]).abs().max(1.0)
    });
    st.family
        .iter()
        .find(|(g, _)| (g - delta).abs() <= m.config.tol.group * span)
        .map(|(_, v)| v)
}

fn generator_record(m: &Model, l: &GeneratorMap, delta: Option<f64>) -> CheckRecord {
    let tol = &m.config.tol;
    let defect = l.unit_defect();
    let mut rec = match delta {
        Some(d) => CheckRecord::new(
            CheckName::Generator,
            if defect <= tol.solve { Outcome::Pass } else { Outcome::Fail },
            "principal_log",
        )
        .datum("delta", json!(d)),
        None => {
            // an explicit generator: L(𝟙) = 0 and exp(L) positive on samples
            let pos = is_positive_unital(&exponentiate(l, 1.0), m.config.sampling, tol);
            let verdict = if defect <= tol.eq && pos.holds() {
                Outcome::PassSampled
            } else {
                Outcome::Fail
            };
            let mut r = CheckRecord::new(CheckName::Generator, verdict, "explicit+sampled_positivity")
                .deviation("exp_min_eigenvalue", pos.min_eigenvalue)
                .sampled(m.config.sampling);
            if let Some(w) = &pos.witness {
                r.witnesses.push(json!({"element": element_value(w)}));
            }
            r
        }
    };
    rec = rec.deviation("unit_defect", defect).datum("matrix", matrix_value(l.matrix()));
    rec
}

fn classify_record(m: &Model, l: &GeneratorMap) -> CheckRecord {
    let r = match classify(l, m.config.sampling, &m.config.tol) {
        Ok(r) => r,
        Err(e) => return CheckRecord::error(CheckName::ClassifyGenerator, e),
    };
    let (verdict, method) = match r.classification {
        Classification::Derivation => (Outcome::Pass, "basis_pairs"),
        Classification::DissipationSampled => (Outcome::PassSampled, "basis_pairs+sampled_dissipation"),
        _ => (Outcome::Fail, "basis_pairs+sampled_dissipation"),
    };
    let mut rec = CheckRecord::new(CheckName::ClassifyGenerator, verdict, method)
        .deviation("derivation_defect", r.derivation_defect)
        .datum("classification", json!(r.classification.as_str()))
        .datum("basis_pair", json!([r.basis_pair.0, r.basis_pair.1]));
    if let Some(e) = r.min_eigenvalue {
        rec = rec.deviation("min_dissipation_eigenvalue", e).sampled(r.sampling);
    }
    if let Some(w) = &r.witness {
        rec.witnesses.push(json!({"element": element_value(w)}));
    }
    rec
}

/// Builds the process of a model. Requires a faithful state.
pub fn build_process(m: &Model) -> Result<MarkovProcess, String> {
    let times = m.times.clone().ok_or("scenario has no process")?;
    let obs = m.process_observables().into_iter().map(|(_, r)| r.clone()).collect();
    MarkovProcess::new(times, obs, m.state.clone(), &m.config.tol).map_err(|e| e.to_string())
}

struct Chain<'a> {
    m: &'a Model,
    want: &'a dyn Fn(CheckName) -> bool,
    out: BTreeMap<CheckName, CheckRecord>,
}

impl Chain<'_> {
    fn put(&mut self, r: CheckRecord) -> bool {
        let ok = r.verdict.passed();
        self.out.insert(r.name, r);
        ok
    }

    fn skip_all(&mut self, names: &[CheckName], reason: &str) {
        for &n in names {
            if (self.want)(n) {
                self.out.insert(n, CheckRecord::skipped(n, reason));
            }
        }
    }

    // Everything downstream of the state: process checks and, without an
    // explicit generator, the derived generator.
    fn run(&mut self, derive_generator: bool) {
        use CheckName::*;
        let m = self.m;
        let downstream: Vec<CheckName> = [
            ConditionI,
            MarkovProperty,
            Kernels,
            ChapmanKolmogorov,
            DistributionTransfer,
            Stationarity,
            Reversibility,
        ]
        .into_iter()
        .chain(derive_generator.then_some([Generator, ClassifyGenerator]).into_iter().flatten())
        .collect();
        let faithful_ok = self.put(timed(|| faithful(m)));
        let need_process = downstream.iter().any(|&c| (self.want)(c));
        if !need_process || m.times.is_none() {
            return;
        }
        if !faithful_ok {
            return self.skip_all(&downstream, "dependency faithful did not pass");
        }
        let p = match build_process(m) {
            Ok(p) => p,
            Err(e) => {
                for &n in &downstream {
                    if (self.want)(n) {
                        self.out.insert(n, CheckRecord::error(n, format!("process: {e}")));
                    }
                }
                return;
            }
        };
        if !self.put(timed(|| condition_i(m, &p))) {
            return self.skip_all(&downstream[1..], "dependency condition_i did not pass");
        }
        if !self.put(timed(|| markov_property(m, &p))) {
            return self.skip_all(&downstream[2..], "dependency markov_property did not pass");
        }
        let start = Instant::now();
        let (mut rec, k) = kernels(m, &p);
        rec.timing_ms = start.elapsed().as_secs_f64() * 1e3;
        self.put(rec);
        let Some(k) = k else {
            return self.skip_all(&downstream[3..], "dependency kernels did not pass");
        };
        let want_st = (self.want)(Stationarity) || derive_generator && ((self.want)(Generator) || (self.want)(ClassifyGenerator));
        let (ck, tr, rv, st) = std::thread::scope(|sc| {
            let ck = (self.want)(ChapmanKolmogorov).then(|| sc.spawn(|| timed(|| chapman_kolmogorov(m, &k))));
            let tr = (self.want)(DistributionTransfer).then(|| sc.spawn(|| timed(|| distribution_transfer(m, &p, &k))));
            let rv = (self.want)(Reversibility).then(|| sc.spawn(|| timed(|| reversibility(m, &k))));
            let st = want_st.then(|| {
                sc.spawn(|| {
                    let start = Instant::now();
                    let (mut rec, r) = stationarity(m, &p, &k);
                    rec.timing_ms = start.elapsed().as_secs_f64() * 1e3;
                    (rec, r)
                })
            });
            let join = |h: std::thread::ScopedJoinHandle<'_, CheckRecord>| h.join().expect("check thread");
            (ck.map(join), tr.map(join), rv.map(join), st.map(|h| h.join().expect("check thread")))
        });
        for r in [ck, tr, rv].into_iter().flatten() {
            self.put(r);
        }
        if !derive_generator {
            if let Some((rec, _)) = st {
                self.put(rec);
            }
            return;
        }
        let Some((rec, st)) = st else { return };
        let passed = self.put(rec);
        let st = match (passed, st) {
            (true, Some(st)) => st,
            _ => return self.skip_all(&[Generator, ClassifyGenerator], "dependency stationarity did not pass"),
        };
        let start = Instant::now();
        match derived_generator(m, &st) {
            Ok((delta, l)) => {
                let mut rec = generator_record(m, &l, Some(delta));
                rec.timing_ms = start.elapsed().as_secs_f64() * 1e3;
                if self.put(rec) || !(self.want)(Generator) {
                    if (self.want)(ClassifyGenerator) {
                        self.put(timed(|| classify_record(m, &l)));
                    }
                } else {
                    self.skip_all(&[ClassifyGenerator], "dependency generator did not pass");
                }
            }
            Err(e) => {
                let mut rec = CheckRecord::new(Generator, Outcome::Fail, "principal_log");
                rec.message = Some(e);
                rec.timing_ms = start.elapsed().as_secs_f64() * 1e3;
                self.put(rec);
                self.skip_all(&[ClassifyGenerator], "dependency generator did not pass");
            }
        }
    }
}

/// Runs every requested check and assembles the report in request order.
pub fn run_checks(m: &Model) -> Report {
    let requested: Vec<CheckName> = {
        let mut seen = Vec::new();
        for &c in &m.scenario.checks {
            if !seen.contains(&c) {
                seen.push(c);
            }
        }
        seen
    };
    let want = |c: CheckName| requested.contains(&c);
    let mut results: BTreeMap<CheckName, CheckRecord> = BTreeMap::new();
    std::thread::scope(|sc| {
        let pairs = want(CheckName::EventPairs).then(|| sc.spawn(|| timed(|| event_pairs(m))));
        let explicit = m
            .generator
            .as_ref()
            .filter(|_| want(CheckName::Generator) || want(CheckName::ClassifyGenerator))
            .map(|l| {
                sc.spawn(move || {
                    let mut out = Vec::new();
                    let g = timed(|| generator_record(m, l, None));
                    let ok = g.verdict.passed();
                    out.push(g);
                    if want(CheckName::ClassifyGenerator) {
                        out.push(if ok || !want(CheckName::Generator) {
                            timed(|| classify_record(m, l))
                        } else {
                            CheckRecord::skipped(CheckName::ClassifyGenerator, "dependency generator did not pass")
                        });
                    }
                    out
                })
            });
        let mut chain = Chain {
            m,
            want: &want,
            out: BTreeMap::new(),
        };
        chain.run(m.generator.is_none());
        results.append(&mut chain.out);
        if let Some(h) = pairs {
            let r = h.join().expect("check thread");
            results.insert(r.name, r);
        }
        if let Some(h) = explicit {
            for r in h.join().expect("check thread") {
                results.insert(r.name, r);
            }
        }
    });
    let checks = requested
        .iter()
        .map(|&c| results.remove(&c).unwrap_or_else(|| CheckRecord::error(c, "not evaluated")))
        .collect();
    Report::new(&m.scenario, checks)
}
