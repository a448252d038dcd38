//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a JSON string; the `*_json` functions
//! behind them are plain Rust and are tested natively.

use serde::Serialize;
use symtypes::hypotest::{self, EpsilonChoice, ExponentReport, NullSet, TestSpec};
use symtypes::quantum::{Basis, DensityMatrix};
use symtypes::schur_weyl::{self, Decomposition};
use symtypes::tableaux;
use wasm_bindgen::prelude::*;

pub const MAX_DEMO_N: usize = 10;
pub const MAX_TABLE_N: usize = 12;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn check_n(n: usize, max: usize) -> Result<(), String> {
    if n == 0 || n > max {
        return Err(format!("n must be between 1 and {max}"));
    }
    Ok(())
}

/// Sanov test rows for `n = 1..=n_max`, null state and alternative given as
/// Bloch vectors.
pub fn sanov_curve_json(
    rho: [f64; 3],
    sigma: [f64; 3],
    eps: f64,
    n_max: usize,
) -> Result<String, String> {
    check_n(n_max, MAX_DEMO_N)?;
    let rho = DensityMatrix::from_bloch(rho).map_err(err)?;
    let sigma = DensityMatrix::from_bloch(sigma).map_err(err)?;
    let spec = TestSpec::new(sigma, NullSet::Points(vec![rho]), eps, 1).map_err(err)?;
    let ns: Vec<usize> = (1..=n_max).collect();
    let rows: Vec<ExponentReport> =
        hypotest::run_sanov(&spec, &ns, EpsilonChoice::Fixed(eps)).map_err(err)?;
    serde_json::to_string(&rows).map_err(err)
}

#[derive(Debug, Serialize)]
struct KostkaRow {
    f: Vec<usize>,
    lambda: Vec<usize>,
    kostka: u64,
    dim: u128,
    type_class_size: u128,
}

/// Every `(f, λ)` with `K_{f,λ}`, `dim F_λ` and `|T_f|`.
pub fn kostka_table_json(d: usize, n: usize) -> Result<String, String> {
    check_n(n, MAX_TABLE_N)?;
    if !(1..=4).contains(&d) {
        return Err("d must be between 1 and 4".into());
    }
    let frames = tableaux::enumerate_frames(d, n);
    let rows: Vec<KostkaRow> = tableaux::enumerate_frequencies(d, n)
        .iter()
        .flat_map(|f| {
            frames.iter().map(move |l| KostkaRow {
                f: f.counts().to_vec(),
                lambda: l.parts().to_vec(),
                kostka: tableaux::kostka(f, l),
                dim: tableaux::hook_dimension(l),
                type_class_size: tableaux::type_class_size(f),
            })
        })
        .collect();
    serde_json::to_string(&rows).map_err(err)
}

#[derive(Debug, Serialize)]
struct LabelWeight {
    f: Vec<usize>,
    lambda: Vec<usize>,
    /// `f̄₁ − f̄₂`: the measured `x₃`.
    z: f64,
    /// `λ̄₁ − λ̄₂`: the measured Bloch radius.
    r: f64,
    weight: f64,
}

#[derive(Debug, Serialize)]
struct LabelReport {
    n: usize,
    x3: f64,
    radius: f64,
    labels: Vec<LabelWeight>,
}

/// Outcome distribution of the `{P_{f,λ}}` measurement on `ξ^{⊗n}` for a
/// qubit state `ξ`, with types taken in the eigenbasis of `σ = ½(𝟙 + ½σ₃)`.
pub fn label_distribution_json(xi: [f64; 3], n: usize) -> Result<String, String> {
    check_n(n, MAX_DEMO_N)?;
    let state = DensityMatrix::from_bloch(xi).map_err(err)?;
    let sigma = DensityMatrix::from_bloch([0.0, 0.0, 0.5]).map_err(err)?;
    let (basis, _) = Basis::eigenbasis(&sigma);
    let dec = Decomposition::shared(2, n).map_err(err)?;
    let w = schur_weyl::label_weights(&dec, &basis, &vec![state; n]).map_err(err)?;
    let mut labels = Vec::new();
    for (s, ws) in dec.sectors().iter().zip(&w) {
        let fb = s.freq.normalize();
        for (l, &weight) in dec.frames().iter().zip(ws) {
            if tableaux::kostka(&s.freq, l) == 0 {
                continue;
            }
            let lb = l.normalize();
            let lw = lb.weights();
            labels.push(LabelWeight {
                f: s.freq.counts().to_vec(),
                lambda: l.parts().to_vec(),
                z: fb.weights()[0] - fb.weights()[1],
                r: lw[0] - lw.get(1).copied().unwrap_or(0.0),
                weight: weight.clamp(0.0, 1.0),
            });
        }
    }
    let radius = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    serde_json::to_string(&LabelReport {
        n,
        x3: xi[2],
        radius,
        labels,
    })
    .map_err(err)
}

#[wasm_bindgen]
pub fn sanov_curve(
    rho_x: f64,
    rho_z: f64,
    sigma_z: f64,
    eps: f64,
    n_max: usize,
) -> Result<String, JsError> {
    sanov_curve_json([rho_x, 0.0, rho_z], [0.0, 0.0, sigma_z], eps, n_max)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn kostka_table(d: usize, n: usize) -> Result<String, JsError> {
    kostka_table_json(d, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn label_distribution(x1: f64, x2: f64, x3: f64, n: usize) -> Result<String, JsError> {
    label_distribution_json([x1, x2, x3], n).map_err(|e| JsError::new(&e))
}
