//! Built-in scenarios.

use std::collections::BTreeMap;

use jmarkov::{Element, JordanAlgebra};

use crate::scenario::{
    from_element, AlgebraSpec, CheckName, Complex, GeneratorSpec, InputError, Matrix, ObservableSpec, ProcessSpec, Scenario, SCHEMA,
};

pub const NAMES: [&str; 5] = ["classical-chain", "qubit-unitary", "trace-compat", "non-markov", "depolarizing-generator"];

pub fn describe(name: &str) -> &'static str {
    match name {
        "classical-chain" => "two-state Markov chain P = [[0.9, 0.1], [0.2, 0.8]] from its stationary law, embedded diagonally",
        "qubit-unitary" => "qubit under R_t(X) = e^{itH} X e^{-itH}, H = σz/2 + σx/4",
        "trace-compat" => "three subalgebras of Herm(3) under the trace state, one of them non-associative",
        "non-markov" => "binary process where x2 repeats x0 with probability 0.9",
        "depolarizing-generator" => "L(X) = tr(X)/2 𝟙 - X on Herm(2)",
        _ => "",
    }
}

pub fn demo(name: &str) -> Result<Scenario, InputError> {
    match name {
        "classical-chain" => Ok(classical_chain()),
        "qubit-unitary" => Ok(qubit_unitary()),
        "trace-compat" => Ok(trace_compat()),
        "non-markov" => Ok(non_markov()),
        "depolarizing-generator" => Ok(depolarizing_generator()),
        _ => Err(InputError::at("demo", format!("unknown demo '{name}'; available: {}", NAMES.join(", ")))),
    }
}

fn diag(d: &[f64]) -> Matrix {
    from_element(&Element::diag(d))
}

fn real(rows: &[&[f64]]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|&x| Complex(x, 0.0)).collect()).collect()
}

fn base(ambient_dim: usize, state: Matrix, checks: &[CheckName]) -> Scenario {
    Scenario {
        schema: SCHEMA,
        ambient_dim,
        algebras: BTreeMap::new(),
        state,
        observables: BTreeMap::new(),
        process: None,
        generator: None,
        checks: checks.to_vec(),
        tolerances: None,
        seed: None,
        samples: None,
    }
}

/// Coordinate processes x_0..x_T of a path measure on {0..n-1}^(T+1);
/// x_0 is the most significant digit of the path index.
fn path_process(n: usize, steps: usize, probs: &[f64], checks: &[CheckName]) -> Scenario {
    let size = n.pow(steps as u32 + 1);
    let digit = |path: usize, t: usize| path / n.pow((steps - t) as u32) % n;
    let mut s = base(size, diag(probs), checks);
    s.algebras.insert("M".into(), AlgebraSpec::Diagonal { dim: n });
    s.algebras.insert("A".into(), AlgebraSpec::Diagonal { dim: size });
    let mut names = Vec::new();
    for t in 0..=steps {
        let images = (0..n)
            .map(|i| diag(&(0..size).map(|p| if digit(p, t) == i { 1.0 } else { 0.0 }).collect::<Vec<_>>()))
            .collect();
        let name = format!("R{t}");
        s.observables.insert(
            name.clone(),
            ObservableSpec {
                source: "M".into(),
                target: "A".into(),
                images: Some(images),
            },
        );
        names.push(name);
    }
    s.process = Some(ProcessSpec {
        times: (0..=steps).map(|t| t as f64).collect(),
        observables: names,
    });
    s
}

const PROCESS_CHECKS: [CheckName; 10] = [
    CheckName::Faithful,
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

fn classical_chain() -> Scenario {
    let p = [[0.9, 0.1], [0.2, 0.8]];
    let init = [2.0 / 3.0, 1.0 / 3.0];
    let probs: Vec<f64> = (0..8)
        .map(|path: usize| {
            let x = [path >> 2 & 1, path >> 1 & 1, path & 1];
            init[x[0]] * p[x[0]][x[1]] * p[x[1]][x[2]]
        })
        .collect();
    path_process(2, 2, &probs, &PROCESS_CHECKS)
}

fn non_markov() -> Scenario {
    let stay = 0.9;
    let probs: Vec<f64> = (0..8)
        .map(|path: usize| 0.25 * if path >> 2 & 1 == path & 1 { stay } else { 1.0 - stay })
        .collect();
    path_process(
        2,
        2,
        &probs,
        &[CheckName::Faithful, CheckName::ConditionI, CheckName::MarkovProperty, CheckName::Kernels],
    )
}

fn qubit_unitary() -> Scenario {
    let h = &Element::sigma_z().scale(0.5) + &Element::sigma_x().scale(0.25);
    let times = [0.0, 0.25, 0.5];
    // with full image algebras, condition (i) forces the trace state
    let mut s = base(2, diag(&[0.5, 0.5]), &PROCESS_CHECKS);
    s.algebras.insert("H".into(), AlgebraSpec::Full { dim: 2 });
    let full = JordanAlgebra::full(2);
    let mut names = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let u = h.unitary_exp(t);
        let images = full.basis().iter().map(|b| from_element(&b.conjugate_by(&u))).collect();
        let name = format!("R{k}");
        s.observables.insert(
            name.clone(),
            ObservableSpec {
                source: "H".into(),
                target: "H".into(),
                images: Some(images),
            },
        );
        names.push(name);
    }
    s.process = Some(ProcessSpec {
        times: times.to_vec(),
        observables: names,
    });
    s
}

fn trace_compat() -> Scenario {
    let third = 1.0 / 3.0;
    let mut s = base(3, diag(&[third, third, third]), &[CheckName::Faithful, CheckName::EventPairs]);
    s.algebras.insert("T".into(), AlgebraSpec::Full { dim: 3 });
    s.algebras.insert("D".into(), AlgebraSpec::Diagonal { dim: 3 });
    s.algebras.insert(
        "X".into(),
        AlgebraSpec::Generated {
            dim: 3,
            generators: vec![real(&[&[2.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 0.0]])],
        },
    );
    // Herm_R(2) ⊕ R: a spin factor, not associative
    s.algebras.insert(
        "S".into(),
        AlgebraSpec::Span {
            dim: 3,
            basis: vec![
                diag(&[1.0, 1.0, 0.0]),
                diag(&[0.0, 0.0, 1.0]),
                real(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]),
                diag(&[1.0, -1.0, 0.0]),
            ],
        },
    );
    for name in ["D", "X", "S"] {
        s.observables.insert(
            format!("R{name}"),
            ObservableSpec {
                source: name.into(),
                target: "T".into(),
                images: None,
            },
        );
    }
    s
}

fn depolarizing_generator() -> Scenario {
    let mut s = base(2, diag(&[0.5, 0.5]), &[CheckName::Faithful, CheckName::Generator, CheckName::ClassifyGenerator]);
    s.algebras.insert("H".into(), AlgebraSpec::Full { dim: 2 });
    let images = JordanAlgebra::full(2)
        .basis()
        .iter()
        .map(|b| from_element(&(&Element::scalar(2, b.trace() / 2.0) - b)))
        .collect();
    s.generator = Some(GeneratorSpec {
        algebra: "H".into(),
        images,
    });
    s
}
