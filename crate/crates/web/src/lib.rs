//! Browser bindings for the demo page. The plain functions return JSON or
//! SVG strings and are what the native tests exercise; the `#[wasm_bindgen]`
//! wrappers only turn errors into JS exceptions.

use moran_core::cli::{level_gaps, IfsSpecFile};
use moran_core::furstenberg::{convergence_table, doubled, example_maps, furstenberg_sequence, window};
use moran_core::geoset::{attractor_levels, GeoSet};
use moran_core::pressure::{level_sums, pressure_zero};
use moran_core::render;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Cells are enumerated exactly, so keep the page responsive.
const MAX_LEVEL: usize = 14;
const MAX_RENDER_DEPTH_2D: usize = 9;
const MAX_DEMO_DEPTH: usize = 11;

fn construction(spec_json: &str) -> Result<moran_core::MoranConstruction, String> {
    let file = IfsSpecFile::from_json(spec_json).map_err(|e| e.to_string())?;
    file.construction().map_err(|e| e.to_string())
}

/// `P_n(t)` on `steps + 1` equally spaced exponents in `[0, t_max]` and the
/// zero `t*`, as JSON `{t, p, t_star, method}`.
pub fn pressure_curve(spec_json: &str, n: usize, steps: usize, t_max: f64) -> Result<String, String> {
    if n == 0 || n > MAX_LEVEL {
        return Err(format!("level must lie in 1..={MAX_LEVEL}"));
    }
    if steps == 0 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err("need at least one step and a positive t_max".into());
    }
    let mc = construction(spec_json)?;
    let ts: Vec<f64> = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
    let ps = level_sums(&mc, &ts, n).map_err(|e| e.to_string())?;
    let root = pressure_zero(&mc, 1e-10).map_err(|e| e.to_string())?;
    Ok(json!({ "t": ts, "p": ps, "t_star": root.t_star, "method": root.method.name() }).to_string())
}

/// SVG of the construction levels up to `depth`; level-one gaps are
/// highlighted on the line when `gaps` is set.
pub fn render_attractor(spec_json: &str, depth: usize, gaps: bool) -> Result<String, String> {
    let mc = construction(spec_json)?;
    match mc.dimension() {
        1 => {
            if depth > MAX_LEVEL {
                return Err(format!("depth must be at most {MAX_LEVEL}"));
            }
            let highlighted = if gaps { level_gaps(&mc, 1).map_err(|e| e.to_string())? } else { Vec::new() };
            render::render_1d(&mc, depth, &highlighted).map_err(|e| e.to_string())
        }
        _ => {
            if depth > MAX_RENDER_DEPTH_2D {
                return Err(format!("depth must be at most {MAX_RENDER_DEPTH_2D} in the plane"));
            }
            render::render_2d(&mc, depth).map_err(|e| e.to_string())
        }
    }
}

/// Magnifications `A_j` of `E_depth` for `j ≤ j_max` next to `K`, as JSON
/// `{svg, rows: [{j, m, n, distance}]}`.
pub fn furstenberg_strip(depth: usize, j_max: u32) -> Result<String, String> {
    if depth == 0 || depth > MAX_DEMO_DEPTH {
        return Err(format!("depth must lie in 1..={MAX_DEMO_DEPTH}"));
    }
    if j_max == 0 || j_max > 6 {
        return Err("j_max must lie in 1..=6".into());
    }
    let err = |e: moran_core::Error| e.to_string();
    let levels = attractor_levels(&example_maps(), &GeoSet::unit(), depth).map_err(err)?;
    let e = &levels[depth];
    let k = doubled(e).map_err(err)?;
    let mut sets = Vec::new();
    for j in 1..=j_max {
        let (m, _) = furstenberg_sequence(j).map_err(err)?;
        let (u, v) = window(m).map_err(err)?;
        sets.push((format!("A_{j}"), e.magnify(&u, &v).map_err(err)?));
    }
    let labelled: Vec<(String, &GeoSet)> = sets.iter().map(|(l, s)| (l.clone(), s)).collect();
    let svg = render::render_magnifications(&labelled, &k);
    let rows: Vec<_> = convergence_table(e, j_max)
        .map_err(err)?
        .into_iter()
        .map(|r| json!({ "j": r.j, "m": r.m, "n": r.n, "distance": r.distance, "distance_approx": r.distance_approx }))
        .collect();
    Ok(json!({ "svg": svg, "rows": rows }).to_string())
}

#[wasm_bindgen(js_name = pressureCurve)]
pub fn pressure_curve_js(spec_json: &str, n: usize, steps: usize, t_max: f64) -> Result<String, JsError> {
    pressure_curve(spec_json, n, steps, t_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = renderAttractor)]
pub fn render_attractor_js(spec_json: &str, depth: usize, gaps: bool) -> Result<String, JsError> {
    render_attractor(spec_json, depth, gaps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = furstenbergStrip)]
pub fn furstenberg_strip_js(depth: usize, j_max: u32) -> Result<String, JsError> {
    furstenberg_strip(depth, j_max).map_err(|e| JsError::new(&e))
}
