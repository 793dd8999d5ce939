//! Browser demo bindings. Every function returns a flat `Float64Array`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: finehull::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Exact harmonic measure of an arc of the unit disk on an `n × n` grid over `[−1, 1]²`.
#[wasm_bindgen]
pub fn hm_field(arc_mid: f64, arc_sweep: f64, n: usize) -> Result<Vec<f64>, JsError> {
    demo::hm_field(arc_mid, arc_sweep, n).map_err(js)
}

/// `[estimate, std_error, unslit exact]` for the slit unit disk.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn wos_slit(
    ax: f64,
    ay: f64,
    bx: f64,
    by: f64,
    arc_mid: f64,
    arc_sweep: f64,
    zx: f64,
    zy: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    demo::wos_slit(ax, ay, bx, by, arc_mid, arc_sweep, zx, zy, samples, seed).map_err(js)
}

#[wasm_bindgen]
pub fn sheet_segments() -> Vec<f64> {
    demo::sheet_segments()
}

#[wasm_bindgen]
pub fn sheet_phase(mask: u32, n: usize, extent: f64) -> Result<Vec<f64>, JsError> {
    demo::sheet_phase(mask, n, extent).map_err(js)
}
