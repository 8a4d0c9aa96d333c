//! Browser bindings. Each export takes plain values and returns a JSON
//! string; errors come back as a string rejection.

use martonkit::channel::{parse_channel_json, BroadcastChannel};
use martonkit::mappings::{mapping_census, MappingTable};
use martonkit::probkit::ProbVector;
use martonkit::sumrate::{
    binary_inequality_check, claim1_value_a, claim1_value_b, marton_sum_rate, t_lambda, SumRateOptions,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest table count the page will enumerate.
pub const WEB_TABLE_CAP: u64 = 20_000;

fn channel_from(text: &str) -> Result<BroadcastChannel, String> {
    match text.trim() {
        "claim1" => Ok(BroadcastChannel::claim1()),
        "noiseless2" => Ok(BroadcastChannel::noiseless(2)),
        "noiseless3" => Ok(BroadcastChannel::noiseless(3)),
        t if t.starts_with('{') => parse_channel_json(t).map_err(|e| e.to_string()),
        other => Err(format!("unknown channel {other:?}; paste channel JSON or use claim1")),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    lambdas: Vec<f64>,
    values: Vec<f64>,
    sum_rate: f64,
    lambda_star: f64,
    smoothing_delta: f64,
}

/// `T_lambda` on `points` evenly spaced values plus the minimizing search.
pub fn curve(channel: &str, points: u32, seed: u64) -> Result<String, String> {
    let ch = channel_from(channel)?;
    if !(2..=41).contains(&points) {
        return Err("points must lie between 2 and 41".into());
    }
    let opts = SumRateOptions { seed, starts: 6, ..SumRateOptions::default() };
    let lambdas: Vec<f64> = (0..points).map(|k| f64::from(k) / f64::from(points - 1)).collect();
    let values = lambdas
        .iter()
        .map(|&l| t_lambda(&ch, l, &opts).map(|w| w.value))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let sum = marton_sum_rate(&ch, &opts).map_err(|e| e.to_string())?;
    to_json(&Curve {
        lambdas,
        values,
        sum_rate: sum.value,
        lambda_star: sum.lambda_star,
        smoothing_delta: sum.witness.smoothing_delta,
    })
}

#[derive(Serialize)]
struct Census {
    total: usize,
    admissible: usize,
    tables: Vec<(String, Vec<u32>, bool)>,
}

/// Every `u x v -> x` table with its profile and admissibility.
pub fn census(u: u32, v: u32, x: u32) -> Result<String, String> {
    let count = u64::from(x).checked_pow(u * v).unwrap_or(u64::MAX);
    if u == 0 || v == 0 || x == 0 || count > WEB_TABLE_CAP {
        return Err(format!("{x}^({u}*{v}) tables is outside the page limit of {WEB_TABLE_CAP}"));
    }
    let rows = mapping_census(u as usize, v as usize, x as usize).map_err(|e| e.to_string())?;
    let admissible = rows.iter().filter(|r| r.2).count();
    let tables = rows.into_iter().map(|(t, p, ok)| (t.to_string(), p.counts().to_vec(), ok)).collect();
    to_json(&Census { total: count as usize, admissible, tables })
}

#[derive(Serialize)]
struct Inequality {
    inner_t: f64,
    i_xy: f64,
    i_xz: f64,
    slack: f64,
    passed: bool,
    mapping: String,
}

/// Unrestricted `T(p_x)` against `max(I(X;Y), I(X;Z))` at `p_x = (1-q, q)`.
pub fn inequality(channel: &str, q: f64, seed: u64) -> Result<String, String> {
    let ch = channel_from(channel)?;
    if !(0.0..=1.0).contains(&q) {
        return Err("q must lie in [0, 1]".into());
    }
    let px = ProbVector::new(vec![1.0 - q, q]).map_err(|e| e.to_string())?;
    let opts = SumRateOptions { seed, ..SumRateOptions::default() };
    let rep = binary_inequality_check(&ch, &px, &opts).map_err(|e| e.to_string())?;
    let best = martonkit::sumrate::inner_t(&px, &ch, &SumRateOptions { widen: true, ..opts })
        .map(|t| t.mapping)
        .unwrap_or_else(|_| MappingTable::constant(1, 1, ch.x_size(), 0));
    to_json(&Inequality {
        inner_t: rep.inner_t,
        i_xy: rep.i_xy,
        i_xz: rep.i_xz,
        slack: rep.slack,
        passed: rep.passed,
        mapping: best.to_string(),
    })
}

#[derive(Serialize)]
struct Counterexample {
    value_a: f64,
    value_b: f64,
    structure: String,
}

pub fn counterexample() -> Result<String, String> {
    let ch = BroadcastChannel::claim1();
    let a = claim1_value_a(&ch).map_err(|e| e.to_string())?;
    let b = claim1_value_b(&ch, &SumRateOptions::default()).map_err(|e| e.to_string())?;
    to_json(&Counterexample { value_a: a, value_b: b.value, structure: b.structure })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn t_lambda_curve(channel: &str, points: u32, seed: u32) -> Result<String, JsValue> {
    js(curve(channel, points, u64::from(seed)))
}

#[wasm_bindgen]
pub fn mapping_admissibility(u: u32, v: u32, x: u32) -> Result<String, JsValue> {
    js(census(u, v, x))
}

#[wasm_bindgen]
pub fn binary_inequality(channel: &str, q: f64, seed: u32) -> Result<String, JsValue> {
    js(inequality(channel, q, u64::from(seed)))
}

#[wasm_bindgen]
pub fn claim1_values() -> Result<String, JsValue> {
    js(counterexample())
}
