//! Browser bindings: the arithmetic criterion, the obstruction witness and a
//! small-budget cohomology report, each returning JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use coverwreath::cert::CertificateFile;
use coverwreath::embed::{
    arithmetic_decide, cohomology_report, obstruction_witness, ProblemInstance,
};

/// Enumeration budget for the in-browser cohomology report.
pub const WEB_BUDGET: usize = 10_000;

#[derive(Serialize)]
struct Decision {
    instance: ProblemInstance,
    d: u64,
    index: u64,
    embeds: bool,
    simple_regime: bool,
}

fn instance(n: u32, q: u32, r: u32) -> Result<ProblemInstance, String> {
    ProblemInstance::new(n as usize, q as u64, r as u64).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializes")
}

pub fn decide_json(n: u32, q: u32, r: u32) -> Result<String, String> {
    let inst = instance(n, q, r)?;
    Ok(to_json(&Decision {
        instance: inst,
        d: inst.d(),
        index: inst.index(),
        embeds: arithmetic_decide(&inst),
        simple_regime: inst.simple_regime(),
    }))
}

/// The obstruction certificate, or `null` when `r ∤ (q-1)/d`.
pub fn witness_json(n: u32, q: u32, r: u32) -> Result<String, String> {
    let inst = instance(n, q, r)?;
    match obstruction_witness(&inst).map_err(|e| e.to_string())? {
        Some(w) => Ok(CertificateFile::from_obstruction(&w)
            .map_err(|e| e.to_string())?
            .to_json()),
        None => Ok("null".into()),
    }
}

pub fn cohomology_json(n: u32, q: u32, r: u32) -> Result<String, String> {
    let inst = instance(n, q, r)?;
    let rep = cohomology_report(&inst, WEB_BUDGET).map_err(|e| e.to_string())?;
    Ok(to_json(&rep))
}

#[wasm_bindgen]
pub fn decide(n: u32, q: u32, r: u32) -> Result<String, JsError> {
    decide_json(n, q, r).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn witness(n: u32, q: u32, r: u32) -> Result<String, JsError> {
    witness_json(n, q, r).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cohomology(n: u32, q: u32, r: u32) -> Result<String, JsError> {
    cohomology_json(n, q, r).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decide_values() {
        let v: serde_json::Value = serde_json::from_str(&decide_json(3, 4, 3).unwrap()).unwrap();
        assert_eq!(v["embeds"], true);
        assert_eq!(v["index"], 1);
        assert!(decide_json(2, 7, 3)
            .unwrap_err()
            .contains("does not divide"));
    }

    #[test]
    fn witness_values() {
        let v: serde_json::Value = serde_json::from_str(&witness_json(2, 5, 2).unwrap()).unwrap();
        assert_eq!(v["witness"]["order_s"], 4);
        assert_eq!(witness_json(2, 7, 2).unwrap(), "null");
    }

    #[test]
    fn cohomology_within_budget() {
        let v: serde_json::Value =
            serde_json::from_str(&cohomology_json(2, 7, 2).unwrap()).unwrap();
        assert_eq!(v["ker_phi_dim"], 1);
        assert!(cohomology_json(3, 4, 3).unwrap_err().contains("budget"));
    }
}
