//! The `kernels` and `generator` commands.

use jmarkov::dynamics::{classify, generator_from_kernel};
use jmarkov::markov::{check_stationarity, extract_kernels};
use serde_json::{json, Value};

use crate::checks::{build_process, kernel_at_gap};
use crate::json;
use crate::report::digest;
use crate::scenario::{from_element, InputError, Model};

/// Exit code 2 for input errors, 1 for failed computations.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("input error: {0}")]
    Input(#[from] InputError),
    #[error("{0}")]
    Failed(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Input(_) => 2,
            CommandError::Failed(_) => 1,
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CommandError {
    CommandError::Failed(e.to_string())
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn require_process(m: &Model) -> Result<(), CommandError> {
    if m.times.is_none() {
        return Err(InputError::at("process", "this command needs a process").into());
    }
    Ok(())
}

/// Every kernel V_{s,t}, s < t, as a coordinate matrix and, when the source
/// of R_t has a declared basis, as the images of that basis.
pub fn kernels_json(m: &Model) -> Result<String, CommandError> {
    require_process(m)?;
    let p = build_process(m).map_err(failed)?;
    let k = extract_kernels(&p, &m.config).map_err(failed)?;
    let times = p.times().points();
    let mut out = Vec::new();
    for (&(s, t), v) in k.iter().filter(|((s, t), _)| s < t) {
        let mut entry = json!({
            "s": s, "t": t, "time_s": times[s], "time_t": times[t],
            "matrix": rows(v.matrix()),
        });
        if let Some(basis) = m.declared_source_basis(t) {
            let images = basis
                .iter()
                .map(|b| v.apply(b, &m.config.tol).map(|y| from_element(&y)))
                .collect::<jmarkov::Result<Vec<_>>>()
                .map_err(failed)?;
            entry["images"] = serde_json::to_value(images).expect("matrix serializes");
        }
        out.push(entry);
    }
    let doc = json!({"schema": 1, "input_digest": digest(&m.scenario), "kernels": out});
    Ok(json::canonical(&doc))
}

/// L = log(V_Δ)/Δ from the kernel of a stationary process at gap Δ, with
/// its classification.
pub fn generator_json(m: &Model, delta: f64) -> Result<Value, CommandError> {
    require_process(m)?;
    let p = build_process(m).map_err(failed)?;
    let k = extract_kernels(&p, &m.config).map_err(failed)?;
    let st = check_stationarity(&p, &k, &m.config.tol).map_err(failed)?;
    if !st.stationary {
        return Err(failed(format!("process is not stationary (deviation {:.3e})", st.max_deviation)));
    }
    let v = kernel_at_gap(m, &st, delta).ok_or_else(|| failed(format!("no kernel at time gap {delta}")))?;
    let l = generator_from_kernel(v, delta, &m.config.tol).map_err(failed)?;
    let c = classify(&l, m.config.sampling, &m.config.tol).map_err(failed)?;
    Ok(json!({
        "schema": 1,
        "input_digest": digest(&m.scenario),
        "delta": delta,
        "matrix": rows(l.matrix()),
        "unit_defect": l.unit_defect(),
        "classification": c.classification.as_str(),
        "derivation_defect": c.derivation_defect,
        "min_dissipation_eigenvalue": c.min_eigenvalue,
        "seed": m.config.sampling.seed,
        "samples": m.config.sampling.samples,
    }))
}

pub fn generator_text(v: &Value) -> String {
    let mut out = format!("delta = {}\nclassification: {}\n", v["delta"], v["classification"].as_str().unwrap_or("?"));
    out.push_str(&format!("unit_defect = {:.3e}\n", v["unit_defect"].as_f64().unwrap_or(f64::NAN)));
    out.push_str(&format!("derivation_defect = {:.3e}\n", v["derivation_defect"].as_f64().unwrap_or(f64::NAN)));
    if let Some(e) = v["min_dissipation_eigenvalue"].as_f64() {
        out.push_str(&format!("min_dissipation_eigenvalue = {e:.3e}\n"));
    }
    out.push_str("L =\n");
    for row in v["matrix"].as_array().into_iter().flatten() {
        let cells: Vec<String> = row.as_array().into_iter().flatten().map(|x| format!("{:>12.6}", x.as_f64().unwrap_or(f64::NAN))).collect();
        out.push_str(&format!("  {}\n", cells.join(" ")));
    }
    out
}
