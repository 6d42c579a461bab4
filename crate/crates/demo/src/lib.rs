//! Browser bindings: each export takes plain numbers or words and returns a
//! JSON string for the page to render.

use serde_json::json;
use wasm_bindgen::prelude::*;

use shiftopt::experiments::{run_gurvits, run_tech_strictly, GurvitsConfig};
use shiftopt::{dbar_lp_lower, dbar_periodic_exact, MeasureSpec, Scalar, Word};

fn word(s: &str) -> Result<Word, String> {
    s.trim().parse().map_err(|e: shiftopt::Error| e.to_string())
}

pub fn gurvits_json(alpha: f64, max_word_len: usize, n: usize) -> Result<String, String> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err("alpha must lie in (0, 1)".into());
    }
    if !(1..=12).contains(&max_word_len) || !(16..=20_000).contains(&n) {
        return Err("word length must be 1..=12 and n 16..=20000".into());
    }
    let cfg = GurvitsConfig {
        alpha,
        max_word_len,
        n,
        min_product_len: n,
        k_window: 512,
        ..Default::default()
    };
    let r = run_gurvits(&cfg).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

pub fn dbar_json(u: &str, v: &str) -> Result<String, String> {
    let (u, v) = (word(u)?, word(v)?);
    if u.len() > 16 || v.len() > 16 {
        return Err("periods above 16 are not offered here".into());
    }
    let exact = dbar_periodic_exact(&u, &v);
    let (mu, nu) = (MeasureSpec::periodic(u.clone()), MeasureSpec::periodic(v.clone()));
    let mut lp = Vec::new();
    for l in 1..=u.len().max(v.len()).min(6) {
        let r = dbar_lp_lower(&mu, &nu, l).map_err(|e| e.to_string())?;
        lp.push(json!({ "l": l, "value": r.value }));
    }
    Ok(json!({ "u": u, "v": v, "exact": Scalar::Exact(exact), "lp": lp }).to_string())
}

pub fn tech_strictly_json(z: &str, test_periods: usize) -> Result<String, String> {
    if !(1..=8).contains(&test_periods) {
        return Err("test periods must be 1..=8".into());
    }
    let r = run_tech_strictly(&word(z)?, test_periods).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn gurvits(alpha: f64, max_word_len: usize, n: usize) -> Result<String, JsError> {
    gurvits_json(alpha, max_word_len, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dbar(u: &str, v: &str) -> Result<String, JsError> {
    dbar_json(u, v).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn tech_strictly(z: &str, test_periods: usize) -> Result<String, JsError> {
    tech_strictly_json(z, test_periods).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbar_reports_exact_and_lp() {
        let v: serde_json::Value = serde_json::from_str(&dbar_json("001", "01").unwrap()).unwrap();
        // either phase of 01 disagrees with 001 at three of six places
        assert_eq!(v["exact"], "1/2");
        assert_eq!(v["lp"].as_array().unwrap().len(), 3);
        assert!(dbar_json("0a", "1").is_err());
    }

    #[test]
    fn tech_strictly_table() {
        let v: serde_json::Value = serde_json::from_str(&tech_strictly_json("011", 3).unwrap()).unwrap();
        assert_eq!(v["identity_holds"], true);
        assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn gurvits_small() {
        let v: serde_json::Value = serde_json::from_str(&gurvits_json(0.5, 4, 400).unwrap()).unwrap();
        assert!(v["best_word_rate"].as_f64().unwrap() < 0.0);
        assert!(gurvits_json(1.5, 4, 400).is_err());
    }
}
