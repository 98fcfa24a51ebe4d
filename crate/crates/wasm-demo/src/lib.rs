//! Browser bindings for a few interactive cpdual computations.
//!
//! Every export takes plain strings and numbers and returns a JSON document.
//! The `*_json` functions hold the logic so they can be tested natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use cpdual::covering::exponent_report;
use cpdual::distortion::{check_duality, DistortionMatrix};
use cpdual::oracle::blahut_arimoto;
use cpdual::packing::{achievable_rate_estimate, packing_bound};
use cpdual::prob::ArithPolicy;
use cpdual::rng::StreamKey;
use cpdual::types::{enumerate_types, format_rational, parse_rational, RationalPmf};
use cpdual::{codebook_size, Limits, Rational};

const LIMITS: Limits = Limits::DEFAULT;
const BA_TOL: f64 = 1e-9;
/// Longest block length the exponent curve will try.
const MAX_CURVE_BLOCKLENGTH: usize = 2048;

fn parse_pmf(text: &str) -> Result<RationalPmf, String> {
    let entries: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    RationalPmf::parse(&entries).map_err(|e| e.to_string())
}

fn parse_level(text: &str) -> Result<Rational, String> {
    parse_rational(text.trim()).map_err(|e| e.to_string())
}

fn hamming(pmf: &RationalPmf) -> DistortionMatrix {
    DistortionMatrix::hamming(pmf.len(), pmf.len())
}

/// Checks the duality identity for every output type at block length `n`
/// under Hamming distortion.
pub fn duality_json(
    pmf: &str,
    n: usize,
    level: &str,
    probes: usize,
    seed: u64,
) -> Result<String, String> {
    let pmf = parse_pmf(pmf)?;
    let level = parse_level(level)?;
    let p = pmf.type_at(n).map_err(|e| e.to_string())?;
    let d = hamming(&pmf);
    let key = StreamKey::new(seed, "wasm-duality", &[]);
    let qs = enumerate_types(pmf.len(), n, LIMITS.enumeration_budget).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(qs.len());
    for q in &qs {
        let r =
            check_duality(&p, q, level, &d, probes, &key, &LIMITS).map_err(|e| e.to_string())?;
        rows.push(json!({
            "q": q.compact(),
            "fixed_y": r.lhs.iter().map(|v| v.to_ratio_string()).collect::<Vec<_>>(),
            "fixed_u": r.rhs.iter().map(|v| v.to_ratio_string()).collect::<Vec<_>>(),
            "both_random": r.both_random.to_ratio_string(),
            "value": r.both_random.to_f64(),
            "equal": r.equal,
        }));
    }
    let all_equal = rows.iter().all(|r| r["equal"] == Value::Bool(true));
    Ok(json!({
        "n": n,
        "p": p.compact(),
        "level": format_rational(&level),
        "all_equal": all_equal,
        "rows": rows,
    })
    .to_string())
}

/// Rate exponent against block length on the lattice of `pmf`, with the
/// rate-distortion reference from Blahut-Arimoto.
pub fn exponent_curve_json(pmf: &str, level: &str, max_n: usize) -> Result<String, String> {
    let pmf = parse_pmf(pmf)?;
    let level = parse_level(level)?;
    let d = hamming(&pmf);
    let n0 = pmf.n0() as usize;
    let max_n = max_n.min(MAX_CURVE_BLOCKLENGTH);
    let mut points = Vec::new();
    let mut n = n0;
    while n <= max_n {
        let p = pmf.type_at(n).map_err(|e| e.to_string())?;
        let report =
            exponent_report(&p, level, &d, ArithPolicy::Log, &LIMITS).map_err(|e| e.to_string())?;
        let exponent = report.exponent.as_f64();
        points.push(json!({
            "n": n,
            "exponent": exponent.is_finite().then_some(exponent),
        }));
        n = if n < 16 * n0 { n + n0 } else { n * 2 };
    }
    let level_f64 = *level.numer() as f64 / *level.denom() as f64;
    let reference = blahut_arimoto(&pmf.to_f64(), &d.to_f64(), level_f64, BA_TOL)
        .ok()
        .map(|pt| pt.rate);
    Ok(json!({
        "level": format_rational(&level),
        "points": points,
        "reference": reference,
    })
    .to_string())
}

/// The finite-length bound `A^(M-1) - omega` across rates at block length `n`.
pub fn packing_bound_json(pmf: &str, n: usize, level: &str, omega: f64) -> Result<String, String> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(format!("omega must lie in [0, 1], got {omega}"));
    }
    let pmf = parse_pmf(pmf)?;
    let level = parse_level(level)?;
    let p = pmf.type_at(n).map_err(|e| e.to_string())?;
    let d = hamming(&pmf);
    let best = cpdual::covering::best_q(&p, level, &d, ArithPolicy::Auto, &LIMITS)
        .map_err(|e| e.to_string())?;
    let a = best.a();
    let max_rate = (pmf.len() as f64).log2();
    let steps = (max_rate / 0.01).round() as usize;
    let points = (0..=steps)
        .map(|i| {
            let rate = i as f64 * 0.01;
            let size = codebook_size(n, rate).map_err(|e| e.to_string())?;
            Ok(json!({ "rate": rate, "codebook_size": size.to_string(), "bound": packing_bound(a, omega, size) }))
        })
        .collect::<Result<Vec<Value>, String>>()?;
    let achievable = achievable_rate_estimate(&p, level, &d, ArithPolicy::Auto, &LIMITS)
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "best_q": best.q.compact(),
        "a": a.to_f64(),
        "achievable_rate": achievable,
        "points": points,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn duality(
    pmf: &str,
    n: usize,
    level: &str,
    probes: usize,
    seed: u64,
) -> Result<String, JsValue> {
    duality_json(pmf, n, level, probes, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn exponent_curve(pmf: &str, level: &str, max_n: usize) -> Result<String, JsValue> {
    exponent_curve_json(pmf, level, max_n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn packing_curve(pmf: &str, n: usize, level: &str, omega: f64) -> Result<String, JsValue> {
    packing_bound_json(pmf, n, level, omega).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn duality_holds_for_every_q() {
        let v = parse(&duality_json("1/2, 1/2", 6, "1/3", 2, 7).unwrap());
        assert_eq!(v["all_equal"], true);
        assert_eq!(v["rows"].as_array().unwrap().len(), 7);
        assert_eq!(v["rows"][0]["fixed_y"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn off_lattice_blocklength_is_an_error() {
        assert!(duality_json("1/3,2/3", 4, "1/4", 1, 0).is_err());
        assert!(duality_json("1/2,1/2", 4, "half", 1, 0).is_err());
    }

    #[test]
    fn exponent_curve_approaches_reference() {
        let v = parse(&exponent_curve_json("1/2,1/2", "11/100", 512).unwrap());
        let reference = v["reference"].as_f64().unwrap();
        assert!((reference - 0.500084).abs() < 1e-5);
        let last = v["points"].as_array().unwrap().last().unwrap().clone();
        assert_eq!(last["n"], 512);
        assert!((last["exponent"].as_f64().unwrap() - reference).abs() < 0.02);
    }

    #[test]
    fn packing_curve_decreases_with_rate() {
        let v = parse(&packing_bound_json("1/2,1/2", 16, "1/4", 0.01).unwrap());
        let bounds: Vec<f64> = v["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["bound"].as_f64().unwrap())
            .collect();
        assert_eq!(bounds.len(), 101);
        assert!((bounds[0] - 0.99).abs() < 1e-12);
        assert!(bounds.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(packing_bound_json("1/2,1/2", 16, "1/4", 1.5).is_err());
    }
}
