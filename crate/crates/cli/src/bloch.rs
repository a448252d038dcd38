//! The qubit example: `σ = ½(𝟙 + ½σ₃)` against the region `𝔖 = {x₃ ≤ c}`
//! of the Bloch ball.
//!
//! For `d = 2` the pinching of a state with Bloch vector `x` to the
//! eigenbasis of `σ` is `((1+x₃)/2, (1−x₃)/2)` and its sorted spectrum is
//! `((1+|x|)/2, (1−|x|)/2)`, so both label conditions reduce to intervals in
//! `(x₃, |x|)`. The label set is computed from those intervals exactly;
//! sampled states come from a grid over `(x₃, |x|)` plus seeded interior
//! points.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use symtypes::hypotest;
use symtypes::quantum::{self, Basis, DensityMatrix};
use symtypes::schur_weyl::{self, Decomposition};
use symtypes::tableaux::ALPHA;

use crate::{CliError, Config};

const LABEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Separation {
    pub xi: [f64; 3],
    pub xi_prime: [f64; 3],
    pub p_e_xi: f64,
    pub p_e_xi_prime: f64,
    pub total_variation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Indistinguishable {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub max_abs_difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlochReport {
    pub n: usize,
    pub eps: f64,
    pub region_x3_max: f64,
    pub labels_accepted: usize,
    pub labels_total: usize,
    pub theta: f64,
    /// `min_{ρ∈𝔖} D(ρ‖σ)`.
    pub min_d_rho_sigma: f64,
    /// `min_{ρ∈𝔖} D(σ‖ρ)`.
    pub min_d_sigma_rho: f64,
    /// `(2n)^8 2^{−n ln(2) ε²}`.
    pub type1_bound_ln2: f64,
    /// `(2n)^8 2^{−n α ε²}`.
    pub type1_bound_alpha: f64,
    pub type1_vacuous_ln2: bool,
    pub type1_vacuous_alpha: bool,
    /// `1 − 2^{−n(min D(ρ‖σ) − Θ)}`.
    pub sigma_bound: f64,
    /// `1 − 2^{−n(min D(σ‖ρ) − Θ)}`.
    pub sigma_bound_swapped: f64,
    pub sigma_vacuous: bool,
    pub sigma_vacuous_swapped: bool,
    pub p_e_sigma: f64,
    pub region_samples: usize,
    pub region_worst_type1: f64,
    /// Smallest `P(ξ ∈ B(f,λ) | outcome (f,λ))` over sampled `ξ ∈ 𝔖`.
    pub region_min_localization: f64,
    /// Smallest `P(ξ = σ | e)` under a uniform prior on `{σ, ξ}`.
    pub min_posterior_sigma: f64,
    pub sigma_holds: bool,
    pub type1_holds_ln2: bool,
    pub type1_holds_alpha: bool,
    pub localization_holds_ln2: bool,
    pub localization_holds_alpha: bool,
    pub separation: Separation,
    pub indistinguishable: Indistinguishable,
}

impl BlochReport {
    /// Assertions the run must satisfy.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.indistinguishable.max_abs_difference > 1e-9 {
            out.push(format!(
                "equal-spectrum states separated by {:e}",
                self.indistinguishable.max_abs_difference
            ));
        }
        for (ok, what) in [
            (self.sigma_holds, "σ outcome bound"),
            (
                self.type1_holds_ln2 && self.type1_holds_alpha,
                "type-I bound",
            ),
            (
                self.localization_holds_ln2 && self.localization_holds_alpha,
                "localization bound",
            ),
        ] {
            if !ok {
                out.push(format!("{what} violated"));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let v = serde_json::to_value(self).expect("plain data");
        let mut out = String::from("key,value\n");
        flatten("", &v, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut String) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        serde_json::Value::Array(a) => {
            let joined: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{prefix},{}", joined.join(" ")).expect("write to String");
        }
        other => writeln!(out, "{prefix},{other}").expect("write to String"),
    }
}

/// Whether some `(x₃, R)` with `−1 ≤ x₃ ≤ c` and `|x₃| ≤ R ≤ 1` lies within
/// `ε` of `(z_f, z_λ)` in each coordinate.
pub fn region_label_accepted(z_f: f64, z_lambda: f64, c: f64, eps: f64) -> bool {
    let (x_lo, x_hi) = ((z_f - eps).max(-1.0), (z_f + eps).min(c));
    let (r_lo, r_hi) = ((z_lambda - eps).max(0.0), (z_lambda + eps).min(1.0));
    if x_lo > x_hi + LABEL_TOL || r_lo > r_hi + LABEL_TOL {
        return false;
    }
    let nearest = if x_lo <= 0.0 && x_hi >= 0.0 {
        0.0
    } else {
        x_lo.abs().min(x_hi.abs())
    };
    nearest <= r_hi + LABEL_TOL
}

/// Bloch vectors `(√(R²−x₃²), 0, x₃)` on a grid of pitch `h` over the
/// region, boundary included.
pub fn region_grid(c: f64, h: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    let steps = ((c + 1.0) / h).round() as usize;
    for i in 0..=steps {
        let x3 = (-1.0 + i as f64 * h).min(c);
        let r_steps = ((1.0 - x3.abs()) / h).ceil().max(0.0) as usize;
        for j in 0..=r_steps {
            let r = (x3.abs() + j as f64 * h).min(1.0);
            out.push([(r * r - x3 * x3).max(0.0).sqrt(), 0.0, x3]);
        }
    }
    out
}

struct Machine {
    dec: Arc<Decomposition>,
    basis: Basis,
    n: usize,
    /// `[sector][frame]` membership in `Λ_ε`.
    accepted: Vec<Vec<bool>>,
    /// `(z_f, z_λ)` per label.
    coords: Vec<Vec<(f64, f64)>>,
}

impl Machine {
    fn weights(&self, xi: &DensityMatrix) -> Result<Vec<Vec<f64>>, CliError> {
        Ok(schur_weyl::label_weights(
            &self.dec,
            &self.basis,
            &vec![xi.clone(); self.n],
        )?)
    }

    fn p_e(&self, w: &[Vec<f64>]) -> f64 {
        let acc: f64 = w
            .iter()
            .zip(&self.accepted)
            .flat_map(|(ws, a)| ws.iter().zip(a).filter(|(_, &ok)| ok).map(|(x, _)| *x))
            .sum();
        (1.0 - acc).clamp(0.0, 1.0)
    }

    /// Outcome distribution `(e, then accepted labels in order)`.
    fn outcomes(&self, w: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![self.p_e(w)];
        for (ws, a) in w.iter().zip(&self.accepted) {
            out.extend(ws.iter().zip(a).filter(|(_, &ok)| ok).map(|(x, _)| *x));
        }
        out
    }

    /// `P(ξ ∈ B(outcome) | outcome ≠ e)`.
    fn localization(&self, w: &[Vec<f64>], x3: f64, r: f64, eps: f64) -> f64 {
        let (mut hit, mut total) = (0.0, 0.0);
        for ((ws, a), cs) in w.iter().zip(&self.accepted).zip(&self.coords) {
            for ((&x, &ok), &(zf, zl)) in ws.iter().zip(a).zip(cs) {
                if !ok {
                    continue;
                }
                total += x;
                if (zf - x3).abs() <= eps + LABEL_TOL && (zl - r).abs() <= eps + LABEL_TOL {
                    hit += x;
                }
            }
        }
        if total > 0.0 {
            hit / total
        } else {
            1.0
        }
    }
}

fn norm3(x: &[f64; 3]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn example_bloch(cfg: &Config, seed: u64) -> Result<BlochReport, CliError> {
    if cfg.d.is_some_and(|d| d != 2) {
        return Err(CliError::Parse("example-bloch is fixed to d = 2".into()));
    }
    let n = cfg.n.or(cfg.n_range.map(|r| r[1])).unwrap_or(10);
    let eps = cfg.epsilon.unwrap_or(0.2);
    let c = cfg.region_x3_max.unwrap_or(0.25);
    if !(eps > 0.0 && eps.is_finite()) || !(-1.0..=1.0).contains(&c) || n == 0 {
        return Err(CliError::Parse(format!(
            "need n ≥ 1, ε > 0 and −1 ≤ c ≤ 1 (got n={n}, ε={eps}, c={c})"
        )));
    }
    let sigma = DensityMatrix::from_bloch([0.0, 0.0, 0.5])?;
    let (basis, t) = Basis::eigenbasis(&sigma);
    let dec = Decomposition::shared(2, n)?;
    let nf = n as f64;

    // Basis index 0 is the σ eigenvector with x₃ = +1.
    let mut accepted = Vec::new();
    let mut coords = Vec::new();
    for s in dec.sectors() {
        let fb = s.freq.normalize();
        let zf = fb.weights()[0] - fb.weights()[1];
        let (mut a, mut cs) = (Vec::new(), Vec::new());
        for l in dec.frames() {
            let lb = l.normalize().weights().to_vec();
            let zl = lb[0] - lb.get(1).copied().unwrap_or(0.0);
            a.push(region_label_accepted(zf, zl, c, eps));
            cs.push((zf, zl));
        }
        accepted.push(a);
        coords.push(cs);
    }
    let labels_accepted = accepted.iter().flatten().filter(|&&x| x).count();
    let labels_total = accepted.iter().map(Vec::len).sum();
    let m = Machine {
        dec,
        basis,
        n,
        accepted,
        coords,
    };

    let fine: Vec<DensityMatrix> = region_grid(c, 0.005)
        .into_iter()
        .map(DensityMatrix::from_bloch)
        .collect::<Result<_, _>>()?;
    let min_d_rho_sigma = fine
        .iter()
        .map(|r| quantum::qrel_entropy(r, &sigma))
        .fold(f64::INFINITY, f64::min);
    let min_d_sigma_rho = fine
        .iter()
        .map(|r| quantum::qrel_entropy(&sigma, r))
        .fold(f64::INFINITY, f64::min);

    let theta = hypotest::theta(n, eps, 2, &t);
    let poly = (2.0 * nf).powi(8);
    let type1_bound_ln2 = poly * (-nf * std::f64::consts::LN_2 * eps * eps).exp2();
    let type1_bound_alpha = poly * (-nf * ALPHA * eps * eps).exp2();
    let sigma_bound = 1.0 - (-nf * (min_d_rho_sigma - theta)).exp2();
    let sigma_bound_swapped = 1.0 - (-nf * (min_d_sigma_rho - theta)).exp2();

    let wsig = m.weights(&sigma)?;
    let p_e_sigma = m.p_e(&wsig);

    let mut samples = region_grid(c, 0.125);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.samples.unwrap_or(16) {
        let x3: f64 = rng.random_range(-1.0..=c);
        let r: f64 = rng.random_range(x3.abs()..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let rho = (r * r - x3 * x3).max(0.0).sqrt();
        samples.push([rho * phi.cos(), rho * phi.sin(), x3]);
    }
    let mut worst_type1 = 0.0f64;
    let mut min_loc = 1.0f64;
    let mut min_post = 1.0f64;
    for x in &samples {
        let xi = DensityMatrix::from_bloch(*x)?;
        let w = m.weights(&xi)?;
        let pe = m.p_e(&w);
        worst_type1 = worst_type1.max(pe);
        min_loc = min_loc.min(m.localization(&w, x[2], norm3(x), eps));
        if p_e_sigma + pe > 0.0 {
            min_post = min_post.min(p_e_sigma / (p_e_sigma + pe));
        }
    }

    let xi = [0.0, 0.0, 0.75];
    let xi_prime = [0.0, 0.0, 0.0];
    let oa = m.outcomes(&m.weights(&DensityMatrix::from_bloch(xi)?)?);
    let ob = m.outcomes(&m.weights(&DensityMatrix::from_bloch(xi_prime)?)?);
    let separation = Separation {
        xi,
        xi_prime,
        p_e_xi: oa[0],
        p_e_xi_prime: ob[0],
        total_variation: 0.5 * oa.iter().zip(&ob).map(|(a, b)| (a - b).abs()).sum::<f64>(),
    };

    let a = [0.3, 0.0, 0.2];
    let b = [0.0, 0.3, 0.2];
    let wa = m.weights(&DensityMatrix::from_bloch(a)?)?;
    let wb = m.weights(&DensityMatrix::from_bloch(b)?)?;
    let diff = wa
        .iter()
        .flatten()
        .zip(wb.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let nonvacuous = |bound: f64| bound < 1.0;
    Ok(BlochReport {
        n,
        eps,
        region_x3_max: c,
        labels_accepted,
        labels_total,
        theta,
        min_d_rho_sigma,
        min_d_sigma_rho,
        type1_bound_ln2,
        type1_bound_alpha,
        type1_vacuous_ln2: !nonvacuous(type1_bound_ln2),
        type1_vacuous_alpha: !nonvacuous(type1_bound_alpha),
        sigma_bound,
        sigma_bound_swapped,
        sigma_vacuous: sigma_bound <= 0.0,
        sigma_vacuous_swapped: sigma_bound_swapped <= 0.0,
        p_e_sigma,
        region_samples: samples.len(),
        region_worst_type1: worst_type1,
        region_min_localization: min_loc,
        min_posterior_sigma: min_post,
        sigma_holds: sigma_bound <= 0.0 || p_e_sigma >= sigma_bound - 1e-12,
        type1_holds_ln2: !nonvacuous(type1_bound_ln2) || worst_type1 <= type1_bound_ln2,
        type1_holds_alpha: !nonvacuous(type1_bound_alpha) || worst_type1 <= type1_bound_alpha,
        localization_holds_ln2: !nonvacuous(type1_bound_ln2) || min_loc >= 1.0 - type1_bound_ln2,
        localization_holds_alpha: !nonvacuous(type1_bound_alpha)
            || min_loc >= 1.0 - type1_bound_alpha,
        separation,
        indistinguishable: Indistinguishable {
            a,
            b,
            max_abs_difference: diff,
        },
    })
}
