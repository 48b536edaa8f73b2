//! WebAssembly bindings for the browser demo.
//!
//! Every export takes plain numbers or a JSON string and returns a JSON
//! string; errors surface as thrown strings. The `*_json` functions hold the
//! logic and also run natively, which is how the tests exercise them.

use fdl_core::engine::{ExecConfig, MatrixSystem};
use fdl_core::matrix::Matrix;
use fdl_core::measure::{chaos_game, dq_estimate, mesh_moments, AffineIfs};
use fdl_core::pressure::{self, perturbed_pair, r_bracket, theorem1_pair, ProbabilityVector, SolverOptions};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Words enumerated per pressure evaluation are capped so the page stays responsive.
pub const MAX_CURVE_DEPTH: usize = 14;
pub const MAX_POINTS: u64 = 200_000;

#[derive(Debug, Deserialize)]
pub struct AttractorRequest {
    pub matrices: Vec<Vec<Vec<f64>>>,
    pub translations: Vec<Vec<f64>>,
    #[serde(default)]
    pub p: Vec<f64>,
    pub count: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Attractor {
    /// Interleaved `x, y` coordinates.
    pub points: Vec<f64>,
    pub bounds: [f64; 4],
    /// Estimated correlation dimension, when enough points were drawn.
    pub d2: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub s: f64,
    pub lower: f64,
    pub upper: f64,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(err)
}

/// `k = 0` selects the commuting pair `(diag(λ, δ), λI)`.
fn pair(lambda: f64, delta: f64, k: u32) -> Result<MatrixSystem, String> {
    if k == 0 { theorem1_pair(lambda, delta) } else { perturbed_pair(lambda, delta, k) }.map_err(err)
}

pub fn sample_attractor_json(request: &str) -> Result<String, String> {
    let req: AttractorRequest = serde_json::from_str(request).map_err(err)?;
    if req.count > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} points"));
    }
    let maps = req.matrices.iter().map(|rows| Matrix::from_rows(rows)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let system = MatrixSystem::new(maps).map_err(err)?;
    if system.dim() != 2 {
        return Err("the demo draws planar systems only".into());
    }
    let probs = if req.p.is_empty() { ProbabilityVector::uniform(system.len()) } else { ProbabilityVector::new(req.p) }
        .map_err(err)?;
    let ifs = AffineIfs::new(system, req.translations).map_err(err)?;
    let samples = chaos_game(&ifs, &probs, req.count, req.seed, 1000).map_err(err)?;

    let mut bounds = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for x in samples.points() {
        bounds[0] = bounds[0].min(x[0]);
        bounds[1] = bounds[1].min(x[1]);
        bounds[2] = bounds[2].max(x[0]);
        bounds[3] = bounds[3].max(x[1]);
    }
    let d2 = if req.count >= 20_000 {
        let radii: Vec<f64> = (3..=7).map(|j| 0.5f64.powi(j)).collect();
        mesh_moments(&samples, 2.0, &radii).and_then(|m| dq_estimate(&m)).ok().map(|e| e.slope)
    } else {
        None
    };
    to_json(&Attractor { points: samples.data, bounds, d2 })
}

/// Certified bracket on the q-pressure of the pair at `steps + 1` evenly spaced
/// values of `s` in `[s_min, s_max]`, each from one enumeration at `depth`.
#[allow(clippy::too_many_arguments)]
pub fn pressure_curve_json(
    lambda: f64,
    delta: f64,
    k: u32,
    p: f64,
    q: f64,
    s_min: f64,
    s_max: f64,
    steps: u32,
    depth: usize,
) -> Result<String, String> {
    if depth == 0 || depth > MAX_CURVE_DEPTH {
        return Err(format!("depth must lie in 1..={MAX_CURVE_DEPTH}"));
    }
    if steps == 0 || !(s_min > 0.0 && s_min < s_max) {
        return Err("need 0 < s_min < s_max and at least one step".into());
    }
    let system = pair(lambda, delta, k)?;
    let probs = ProbabilityVector::pair(p).map_err(err)?;
    let cfg = ExecConfig::default();
    let curve = (0..=steps)
        .map(|i| {
            let s = s_min + (s_max - s_min) * f64::from(i) / f64::from(steps);
            let b = r_bracket(&system, &probs, q, s, depth, &cfg).map_err(err)?;
            Ok(CurvePoint { s, lower: b.lower, upper: b.upper })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&curve)
}

/// `ks` is a JSON array of positive integers.
pub fn discontinuity_scan_json(lambda: f64, delta: f64, p: f64, q: f64, ks: &str, tol: f64) -> Result<String, String> {
    let ks: Vec<u32> = serde_json::from_str(ks).map_err(err)?;
    let opts = SolverOptions { tol, max_depth: Some(MAX_CURVE_DEPTH), ..SolverOptions::default() };
    let mut scan = pressure::discontinuity_scan(lambda, delta, p, q, &ks, &opts).map_err(err)?;
    scan.diagonal.trace.clear();
    to_json(&scan)
}

#[wasm_bindgen]
pub fn sample_attractor(request: &str) -> Result<String, JsValue> {
    sample_attractor_json(request).map_err(|e| JsValue::from_str(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn pressure_curve(
    lambda: f64,
    delta: f64,
    k: u32,
    p: f64,
    q: f64,
    s_min: f64,
    s_max: f64,
    steps: u32,
    depth: usize,
) -> Result<String, JsValue> {
    pressure_curve_json(lambda, delta, k, p, q, s_min, s_max, steps, depth).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn discontinuity_scan(lambda: f64, delta: f64, p: f64, q: f64, ks: &str, tol: f64) -> Result<String, JsValue> {
    discontinuity_scan_json(lambda, delta, p, q, ks, tol).map_err(|e| JsValue::from_str(&e))
}
