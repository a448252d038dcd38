//! Arbitrarily varying sources: product states over words, the
//! robustification and spectral-estimation inequalities, δ-nets, and
//! depolarizing-smoothed tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::hypotest::{self, NullSet, TestSpec};
use crate::quantum::{self, CMatrix, DensityMatrix, DepolarizingChannel};
use crate::schur_weyl::{self, BlockOperator, DENSE_LIMIT};
use crate::tableaux::{self, ProbVec, YoungFrame, ALPHA};
use crate::{tensor_dim, Error, Result};

/// Seeded permutations used to confirm a test is permutation invariant.
const INVARIANCE_SAMPLES: usize = 8;
const INVARIANCE_TOL: f64 = 1e-9;

/// A word `s^n` over a state alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SourceWord {
    pub letters: Vec<usize>,
}

impl SourceWord {
    pub fn new(letters: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::Invalid(format!(
                "letter {bad} outside an alphabet of size {alphabet_size}"
            )));
        }
        Ok(Self { letters })
    }

    pub fn constant(letter: usize, n: usize) -> Self {
        Self {
            letters: vec![letter; n],
        }
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    /// `N(s|s^n)` for every letter.
    pub fn counts(&self, alphabet_size: usize) -> Vec<usize> {
        let mut c = vec![0; alphabet_size];
        for &s in &self.letters {
            c[s] += 1;
        }
        c
    }

    pub fn states(&self, alphabet: &[DensityMatrix]) -> Vec<DensityMatrix> {
        self.letters.iter().map(|&s| alphabet[s].clone()).collect()
    }

    /// `ρ̄ = Σ_s N(s|s^n)/n · ρ_s`.
    pub fn average_state(&self, alphabet: &[DensityMatrix]) -> Result<DensityMatrix> {
        let n = self.n() as f64;
        let w: Vec<f64> = self
            .counts(alphabet.len())
            .iter()
            .map(|&c| c as f64 / n)
            .collect();
        DensityMatrix::mixture(alphabet, &w)
    }
}

/// Every word of length `n` over `k` letters, in lexicographic order.
pub fn all_words(k: usize, n: usize) -> Vec<SourceWord> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut letters = vec![0; n];
            for i in (0..n).rev() {
                letters[i] = code % k;
                code /= k;
            }
            SourceWord { letters }
        })
        .collect()
}

/// `ρ_{s^n} = ⊗ᵢ ρ_{sᵢ}` as a dense matrix.
pub fn product_state(word: &SourceWord, alphabet: &[DensityMatrix]) -> Result<CMatrix> {
    let d = alphabet
        .first()
        .map(DensityMatrix::dim)
        .ok_or_else(|| Error::Invalid("empty alphabet".into()))?;
    let dim = tensor_dim(d, word.n())?;
    if dim > DENSE_LIMIT {
        return Err(Error::Guard {
            what: "dense product state",
            needed: dim as u128,
            limit: DENSE_LIMIT as u128,
        });
    }
    let factors: Vec<CMatrix> = word
        .letters
        .iter()
        .map(|&s| alphabet[s].matrix().clone())
        .collect();
    quantum::tensor_product(&factors)
}

#[derive(Debug, Clone)]
pub struct AvqsSpec {
    pub generators: Vec<DensityMatrix>,
    pub sigma: DensityMatrix,
    pub epsilon: f64,
    pub n: usize,
    /// Depolarizing parameter of the smoothed test; 0 means no smoothing.
    pub delta: f64,
    /// Type-I level at which `Γ` is evaluated.
    pub nu: f64,
}

impl AvqsSpec {
    pub fn new(
        generators: Vec<DensityMatrix>,
        sigma: DensityMatrix,
        epsilon: f64,
        n: usize,
    ) -> Self {
        Self {
            generators,
            sigma,
            epsilon,
            n,
            delta: 0.0,
            nu: 0.1,
        }
    }

    pub fn test_spec(&self) -> Result<TestSpec> {
        TestSpec::new(
            self.sigma.clone(),
            NullSet::Hull(self.generators.clone()),
            self.epsilon,
            self.n,
        )
    }
}

/// The Sanov test for `conv(𝔖′)`.
pub fn avqs_test(spec: &AvqsSpec) -> Result<BlockOperator> {
    hypotest::build_test(&spec.test_spec()?)
}

/// `tr{P ρ_{s^n}}` when the test is smoothed by `𝒩_δ^{†⊗n}`, via
/// `tr{𝒩_δ^{†⊗n}(P) ρ_{s^n}} = tr{P 𝒩_δ^{⊗n}(ρ_{s^n})}`.
pub fn smoothed_acceptance(p: &BlockOperator, states: &[DensityMatrix], delta: f64) -> Result<f64> {
    let ch = DepolarizingChannel::new(delta, p.d())?;
    let smoothed: Vec<DensityMatrix> = states.iter().map(|s| ch.apply_state(s)).collect();
    p.expectation(&smoothed)
}

fn check_invariant(p: &BlockOperator) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7e);
    let defect = p.invariance_defect(INVARIANCE_SAMPLES, &mut rng);
    if defect > INVARIANCE_TOL {
        return Err(Error::NotInvariant(defect));
    }
    Ok(())
}

/// `(tr{(𝟙−P)ρ_{s^n}}, (2n)^{|S|}·tr{(𝟙−P)ρ̄^{⊗n}})` with `ρ̄` the
/// letter-frequency average of the word.
pub fn robustification_check(
    p: &BlockOperator,
    word: &SourceWord,
    alphabet: &[DensityMatrix],
) -> Result<(f64, f64)> {
    check_invariant(p)?;
    let n = word.n();
    let lhs = 1.0 - p.expectation(&word.states(alphabet))?;
    let avg = word.average_state(alphabet)?;
    let rhs = (2.0 * n as f64).powi(alphabet.len() as i32) * (1.0 - p.expectation_iid(&avg)?);
    Ok((lhs.max(0.0), rhs.max(0.0)))
}

/// `(tr{P_λ ρ_{s^n}}, (2n)^{|S|+d²} 2^{−nD(λ̄‖spec ρ̄)})`.
pub fn spectral_estimation_check(
    lambda: &YoungFrame,
    word: &SourceWord,
    alphabet: &[DensityMatrix],
) -> Result<(f64, f64)> {
    let n = word.n();
    let d = alphabet
        .first()
        .map(DensityMatrix::dim)
        .ok_or_else(|| Error::Invalid("empty alphabet".into()))?;
    let lhs = schur_weyl::isotypic_weight(lambda, &word.states(alphabet))?;
    let avg = word.average_state(alphabet)?;
    let div = tableaux::relative_entropy(&lambda.normalize(), &quantum::spectrum(&avg));
    let rhs =
        (2.0 * n as f64).powi((alphabet.len() + d * d) as i32) * tableaux::exp2_neg(n as f64, div);
    Ok((lhs, rhs))
}

/// Worst type-I error `max_{s^n} tr{(𝟙−P)ρ_{s^n}}` over all words, and a
/// maximizing word. A permutation-invariant test takes the same value on all
/// words with the same letter counts, so one word per count vector is
/// evaluated.
pub fn worst_word_type_one(
    p: &BlockOperator,
    alphabet: &[DensityMatrix],
    delta: f64,
) -> Result<(f64, SourceWord)> {
    check_invariant(p)?;
    let n = p.n();
    let comps = compositions(alphabet.len(), n);
    let vals: Vec<(f64, SourceWord)> = comps
        .par_iter()
        .map(|c| {
            let letters: Vec<usize> = c
                .iter()
                .enumerate()
                .flat_map(|(s, &k)| std::iter::repeat_n(s, k))
                .collect();
            let word = SourceWord { letters };
            let acc = if delta > 0.0 {
                smoothed_acceptance(p, &word.states(alphabet), delta)?
            } else {
                p.expectation(&word.states(alphabet))?
            };
            Ok(((1.0 - acc).clamp(0.0, 1.0), word))
        })
        .collect::<Result<_>>()?;
    Ok(vals
        .into_iter()
        .fold((f64::NEG_INFINITY, SourceWord::constant(0, n)), |a, b| {
            if b.0 > a.0 {
                b
            } else {
                a
            }
        }))
}

/// Count vectors of `n` items in `k` boxes.
fn compositions(k: usize, n: usize) -> Vec<Vec<usize>> {
    hypotest::weight_grid(k, n)
        .into_iter()
        .map(|w| w.iter().map(|x| (x * n as f64).round() as usize).collect())
        .collect()
}

/// `2^{−nαε² + (2d²+|S|)log(2n)}`.
pub fn avqs_type_one_bound(n: usize, eps: f64, d: usize, alphabet_size: usize) -> f64 {
    let nf = n as f64;
    (-nf * ALPHA * eps * eps + (2.0 * (d * d) as f64 + alphabet_size as f64) * (2.0 * nf).log2())
        .exp2()
}

/// `2^{−n(minD − Θ − (|S|/n)log 2n)}`.
pub fn avqs_type_two_bound(n: usize, min_divergence: f64, theta: f64, alphabet_size: usize) -> f64 {
    let nf = n as f64;
    (-nf * (min_divergence - theta - alphabet_size as f64 / nf * (2.0 * nf).log2())).exp2()
}

fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn hull_divergence(gens: &[DensityMatrix], sigma: &DensityMatrix, w: &[f64]) -> Result<f64> {
    Ok(quantum::qrel_entropy(
        &DensityMatrix::mixture(gens, w)?,
        sigma,
    ))
}

/// `min_{ρ ∈ conv(gens)} D(ρ‖σ)` and the minimizing weights, by projected
/// gradient descent from the vertices, the barycenter and 20 seeded random
/// starts.
pub fn min_divergence_over_hull(
    gens: &[DensityMatrix],
    sigma: &DensityMatrix,
) -> Result<(f64, Vec<f64>)> {
    let k = gens.len();
    if k == 0 {
        return Err(Error::Invalid("no generators".into()));
    }
    let log_sigma = quantum::log2m(sigma.matrix());
    let mut starts: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    starts.push(vec![1.0 / k as f64; k]);
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1f);
    for _ in 0..20 {
        starts.push(quantum::random_probvec(k, &mut rng).weights().to_vec());
    }
    let mut best = (f64::INFINITY, starts[0].clone());
    for start in starts {
        let mut w = start;
        let mut fw = hull_divergence(gens, sigma, &w)?;
        for _ in 0..500 {
            let mix = DensityMatrix::mixture(gens, &w)?;
            let grad_op = quantum::log2m(mix.matrix()) - &log_sigma;
            let g: Vec<f64> = gens
                .iter()
                .map(|r| (r.matrix() * &grad_op).trace().re)
                .collect();
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-12 {
                let cand: Vec<f64> = project_to_simplex(
                    &w.iter()
                        .zip(&g)
                        .map(|(x, gi)| x - step * gi)
                        .collect::<Vec<_>>(),
                );
                let fc = hull_divergence(gens, sigma, &cand)?;
                if fc < fw - 1e-15 {
                    w = cand;
                    fw = fc;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if fw < best.0 {
            best = (fw, w);
        }
    }
    Ok(best)
}

/// `min D(ρ‖σ)` over the mixtures on a weight grid with pitch `1/m`.
pub fn min_divergence_grid(
    gens: &[DensityMatrix],
    sigma: &DensityMatrix,
    m: usize,
) -> Result<(f64, Vec<f64>)> {
    hypotest::weight_grid(gens.len(), m)
        .into_iter()
        .map(|w| Ok((hull_divergence(gens, sigma, &w)?, w)))
        .try_fold(
            (f64::INFINITY, Vec::new()),
            |best: (f64, Vec<f64>), item: Result<(f64, Vec<f64>)>| {
                let item = item?;
                Ok(if item.0 < best.0 { item } else { best })
            },
        )
}

/// A finite set of states covering the state space within trace distance
/// `radius`.
#[derive(Debug, Clone)]
pub struct Net {
    pub points: Vec<DensityMatrix>,
    pub radius: f64,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nearest_distance(&self, rho: &DensityMatrix) -> f64 {
        self.points
            .iter()
            .map(|p| quantum::trace_norm(&(p.matrix() - rho.matrix())))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Largest candidate pool scanned by [`delta_net`].
pub const MAX_NET_CANDIDATES: usize = 400_000;

/// `(12/δ)^{2d²}`.
pub fn net_cardinality_bound(delta: f64, d: usize) -> f64 {
    (12.0 / delta).powf(2.0 * (d * d) as f64)
}

/// Greedy farthest-point δ-net of `𝒮(ℂ^d)` in trace norm.
///
/// For `d = 2` the candidates are a cubic grid of pitch `δ/4` inside the
/// Bloch ball plus a matching grid on the sphere, and the greedy radius is
/// `3δ/4`, so every state is within `δ` of the net. For `d ≥ 3` the
/// candidates are seeded random mixed and pure states and the covering is
/// checked empirically.
pub fn delta_net(d: usize, delta: f64, seed: u64) -> Result<Net> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("δ = {delta} must be positive")));
    }
    let candidates = if d == 2 {
        bloch_candidates(delta)?
    } else {
        random_candidates(d, delta, seed)?
    };
    let greedy_radius = 0.75 * delta;
    let dist =
        |a: &DensityMatrix, b: &DensityMatrix| quantum::trace_norm(&(a.matrix() - b.matrix()));
    let mut points = vec![DensityMatrix::maximally_mixed(d)];
    let mut nearest: Vec<f64> = candidates.par_iter().map(|c| dist(c, &points[0])).collect();
    loop {
        let (far, worst) = nearest
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |a, (i, &x)| if x > a.1 { (i, x) } else { a },
            );
        if worst <= greedy_radius {
            break;
        }
        let p = candidates[far].clone();
        nearest
            .par_iter_mut()
            .zip(candidates.par_iter())
            .for_each(|(m, c)| *m = m.min(dist(c, &p)));
        points.push(p);
    }
    Ok(Net {
        points,
        radius: delta,
    })
}

fn bloch_candidates(delta: f64) -> Result<Vec<DensityMatrix>> {
    let h = delta / 4.0;
    let k = (1.0 / h).ceil() as i64;
    let per_axis = (2 * k + 1) as usize;
    let needed = per_axis.pow(3);
    if needed > MAX_NET_CANDIDATES {
        return Err(Error::Guard {
            what: "δ-net candidates",
            needed: needed as u128,
            limit: MAX_NET_CANDIDATES as u128,
        });
    }
    let mut out = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            for l in -k..=k {
                let r = [i as f64 * h, j as f64 * h, l as f64 * h];
                let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                if norm <= 1.0 {
                    out.push(DensityMatrix::from_bloch(r)?);
                }
            }
        }
    }
    // Fibonacci lattice on the sphere with spacing about h.
    let m = ((4.0 * std::f64::consts::PI / (h * h)).ceil() as usize).max(12);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for i in 0..m {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
        let rad = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        out.push(DensityMatrix::from_bloch([
            rad * phi.cos(),
            rad * phi.sin(),
            z,
        ])?);
    }
    Ok(out)
}

fn random_candidates(d: usize, delta: f64, seed: u64) -> Result<Vec<DensityMatrix>> {
    let count = ((40.0 / delta).powi(2) as usize).clamp(2_000, 40_000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|i| {
            if i % 2 == 0 {
                quantum::random_state(d, &mut rng)
            } else {
                quantum::random_pure_state(d, &mut rng)
            }
        })
        .collect())
}

/// `𝒩_δ^{†⊗n}(P)` as a dense matrix in the standard frame.
pub fn smoothed_test(p: &BlockOperator, delta: f64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("δ = {delta} must lie in [0, 1]")));
    }
    let (d, n) = (p.d(), p.n());
    let mut m = p.to_dense()?;
    // Depolarize in the test's own basis.
    for k in 0..n {
        m = depolarize_factor(&m, d, n, k, delta);
    }
    let mc = m.map(|x| Complex64::new(x, 0.0));
    Ok(schur_weyl::change_frame(&mc, p.basis(), n))
}

/// `(1−δ)M + (δ/d)·tr_k(M) ⊗ 𝟙_k` on tensor factor `k`.
fn depolarize_factor(m: &DMatrix<f64>, d: usize, n: usize, k: usize, delta: f64) -> DMatrix<f64> {
    let dim = m.nrows();
    let stride = d.pow((n - 1 - k) as u32);
    let digit = |w: usize| (w / stride) % d;
    let mut out = m * (1.0 - delta);
    for r in 0..dim {
        let r0 = r - digit(r) * stride;
        for c in 0..dim {
            if digit(r) != digit(c) {
                continue;
            }
            let c0 = c - digit(c) * stride;
            let partial: f64 = (0..d).map(|a| m[(r0 + a * stride, c0 + a * stride)]).sum();
            out[(r, c)] += delta / d as f64 * partial;
        }
    }
    out
}

/// `(D(ρ‖𝒩_δ(σ)), D(ρ‖σ) + d·log(1−δ))`.
///
/// The second value is not a lower bound in general: a state concentrated
/// on a small eigenvalue of `σ` loses more than `d·|log(1−δ)|` because
/// mixing lifts that eigenvalue by `δ/d`. See the unit tests.
pub fn smoothing_divergence_check(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    delta: f64,
) -> Result<(f64, f64)> {
    let smoothed = quantum::depolarize(sigma, delta)?;
    let lhs = quantum::qrel_entropy(rho, &smoothed);
    let rhs = quantum::qrel_entropy(rho, sigma) + rho.dim() as f64 * (1.0 - delta).log2();
    Ok((lhs, rhs))
}

/// Which printed form of `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GammaForm {
    /// `Θ(n,n^{−1/4},d,σ) + Γ′ + (8d⁶/n)log 2n`, `Γ′` with `2|S|` and `(2n)^{−8d²}`.
    Statement,
    /// `Θ(n,n^{−1/8},d,σ) − Γ′ + (2d⁶/n)log 2n`, `Γ′` with `4|S|` and `(2n)^{−2d²}`.
    Proof,
}

/// `Γ′(n,ν,d)` in the chosen form; NaN when the logarithm's argument is not
/// positive.
pub fn gamma_prime(form: GammaForm, n: usize, nu: f64, d: usize, alphabet_size: usize) -> f64 {
    let nf = n as f64;
    let s = alphabet_size as f64;
    let dd = (d * d) as f64;
    let (c, pow) = match form {
        GammaForm::Statement => (2.0, 8.0),
        GammaForm::Proof => (4.0, 2.0),
    };
    let inner = ALPHA * (nf.powf(-0.25) - c * s / nf) - (s - 2.0 * dd) / nf * (2.0 * nf).log2();
    let arg = 1.0 - nu - (-nf * inner).exp2();
    (arg.log2() - pow * dd * (2.0 * nf).log2()) / nf
}

pub fn gamma(
    form: GammaForm,
    n: usize,
    nu: f64,
    d: usize,
    sigma_eigenvalues: &[f64],
    alphabet_size: usize,
) -> f64 {
    let nf = n as f64;
    let d6 = (d as f64).powi(6);
    let gp = gamma_prime(form, n, nu, d, alphabet_size);
    match form {
        GammaForm::Statement => {
            hypotest::theta(n, nf.powf(-0.25), d, sigma_eigenvalues)
                + gp
                + 8.0 * d6 / nf * (2.0 * nf).log2()
        }
        GammaForm::Proof => {
            hypotest::theta(n, nf.powf(-0.125), d, sigma_eigenvalues) - gp
                + 2.0 * d6 / nf * (2.0 * nf).log2()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AvqsReport {
    pub n: usize,
    pub alphabet_size: usize,
    pub eps: f64,
    pub delta: f64,
    pub worst_type1: f64,
    pub type2: f64,
    pub empirical_exponent: f64,
    #[serde(rename = "min_D_conv")]
    pub min_d_conv: f64,
    pub gamma: f64,
    pub type1_bound: f64,
    pub type2_bound: f64,
    pub bounds_hold: bool,
}

impl AvqsReport {
    pub const CSV_HEADER: &'static str =
        "n,|S|,eps,delta,worst_type1,type2,empirical_exponent,min_D_conv,gamma";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.alphabet_size,
            self.eps,
            self.delta,
            self.worst_type1,
            self.type2,
            self.empirical_exponent,
            self.min_d_conv,
            self.gamma
        )
    }
}

/// Builds the test for each `n`, measures the worst word and the type-II
/// error, and compares them with the guaranteed bounds.
pub fn run_avqs(template: &AvqsSpec, ns: &[usize]) -> Result<Vec<AvqsReport>> {
    let (min_d, _) = min_divergence_over_hull(&template.generators, &template.sigma)?;
    ns.par_iter()
        .map(|&n| {
            let spec = AvqsSpec {
                n,
                ..template.clone()
            };
            let ts = spec.test_spec()?;
            let p = hypotest::build_test(&ts)?;
            let d = spec.sigma.dim();
            let k = spec.generators.len();
            let (worst, _) = worst_word_type_one(&p, &spec.generators, spec.delta)?;
            let type2 = if spec.delta > 0.0 {
                smoothed_acceptance(&p, &vec![spec.sigma.clone(); n], spec.delta)?
            } else {
                p.expectation_iid(&spec.sigma)?
            }
            .clamp(0.0, 1.0);
            let t = ts.sigma_eigenvalues();
            let theta = hypotest::theta(n, spec.epsilon, d, t);
            let type1_bound = avqs_type_one_bound(n, spec.epsilon, d, k);
            let smoothing_penalty = if spec.delta > 0.0 {
                d as f64 * (1.0 - spec.delta).log2()
            } else {
                0.0
            };
            let type2_bound = avqs_type_two_bound(n, min_d + smoothing_penalty, theta, k);
            Ok(AvqsReport {
                n,
                alphabet_size: k,
                eps: spec.epsilon,
                delta: spec.delta,
                worst_type1: worst,
                type2,
                empirical_exponent: -type2.log2() / n as f64,
                min_d_conv: min_d,
                gamma: gamma(GammaForm::Statement, n, spec.nu, d, t, k),
                type1_bound,
                type2_bound,
                bounds_hold: (type1_bound > 1.0 || worst <= type1_bound)
                    && type2 <= type2_bound * (1.0 + 1e-9),
            })
        })
        .collect()
}

/// Convenience for states given by a probability vector on the diagonal.
pub fn diagonal_alphabet(rows: &[Vec<f64>]) -> Result<Vec<DensityMatrix>> {
    rows.iter()
        .map(|r| DensityMatrix::from_diagonal(ProbVec::new(r.clone())?.weights()))
        .collect()
}

/// Seeded random words of length `n`.
pub fn random_words<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    count: usize,
    rng: &mut R,
) -> Vec<SourceWord> {
    (0..count)
        .map(|_| SourceWord {
            letters: (0..n).map(|_| rng.random_range(0..k)).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::enumerate_frames;

    fn alphabet() -> Vec<DensityMatrix> {
        vec![
            DensityMatrix::from_diagonal(&[0.8, 0.2]).unwrap(),
            DensityMatrix::from_bloch([0.3, 0.0, 0.0]).unwrap(),
        ]
    }

    fn sigma() -> DensityMatrix {
        DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap()
    }

    #[test]
    fn product_states() {
        let a = alphabet();
        let w = SourceWord::constant(1, 3);
        let p = product_state(&w, &a).unwrap();
        let direct = quantum::tensor_product(&vec![a[1].matrix().clone(); 3]).unwrap();
        assert!((p - direct).camax() < 1e-15);
        let single = product_state(&SourceWord::constant(0, 1), &a).unwrap();
        assert!((&single - a[0].matrix()).camax() < 1e-15);
        for w in all_words(2, 4) {
            assert!((product_state(&w, &a).unwrap().trace().re - 1.0).abs() < 1e-12);
        }
        assert!(SourceWord::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn singleton_alphabet_gives_the_iid_test() {
        let spec = AvqsSpec::new(vec![alphabet()[1].clone()], sigma(), 0.3, 5);
        let hull = avqs_test(&spec).unwrap();
        let iid = hypotest::build_test(
            &TestSpec::new(
                sigma(),
                NullSet::Points(vec![alphabet()[1].clone()]),
                0.3,
                5,
            )
            .unwrap(),
        )
        .unwrap();
        for (a, b) in hull.blocks().iter().zip(iid.blocks()) {
            assert!((a - b).amax() < 1e-15);
        }
    }

    #[test]
    fn avqs_projector_property() {
        let p = avqs_test(&AvqsSpec::new(alphabet(), sigma(), 0.3, 6)).unwrap();
        assert!(p.projector_defect() < 1e-9);
    }

    #[test]
    fn worst_word_matches_exhaustive_sweep() {
        let a = alphabet();
        let p = avqs_test(&AvqsSpec::new(a.clone(), sigma(), 0.3, 6)).unwrap();
        let (worst, _) = worst_word_type_one(&p, &a, 0.0).unwrap();
        let brute = all_words(2, 6)
            .iter()
            .map(|w| 1.0 - p.expectation(&w.states(&a)).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((worst - brute).abs() < 1e-12);
    }

    #[test]
    fn robustification_on_all_words() {
        let a = alphabet();
        let p = avqs_test(&AvqsSpec::new(a.clone(), sigma(), 0.3, 6)).unwrap();
        for w in all_words(2, 6) {
            let (lhs, rhs) = robustification_check(&p, &w, &a).unwrap();
            assert!(lhs <= rhs + 1e-12, "{:?}: {lhs} > {rhs}", w.letters);
        }
        let (lhs, rhs) = robustification_check(&p, &SourceWord::constant(0, 6), &a).unwrap();
        assert!((lhs * 12f64.powi(2) - rhs).abs() < 1e-9);
    }

    #[test]
    fn robustification_rejects_non_invariant_operator() {
        let dec = schur_weyl::Decomposition::shared(2, 3).unwrap();
        let mut op = BlockOperator::identity(dec, quantum::Basis::computational(2));
        let blocks: Vec<DMatrix<f64>> = op
            .blocks()
            .iter()
            .map(|b| {
                let mut b = b.clone();
                if b.nrows() > 1 {
                    b[(0, 0)] = 0.0;
                }
                b
            })
            .collect();
        op = op.with_blocks(blocks).unwrap();
        let r = robustification_check(&op, &SourceWord::constant(0, 3), &alphabet());
        assert!(matches!(r, Err(Error::NotInvariant(_))));
    }

    #[test]
    fn spectral_estimation_sweep() {
        let a = alphabet();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for w in random_words(2, 8, 10, &mut rng) {
            for l in enumerate_frames(2, 8) {
                let (lhs, rhs) = spectral_estimation_check(&l, &w, &a).unwrap();
                assert!(lhs <= rhs, "{l}");
            }
        }
        let pure = vec![
            DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap(),
            DensityMatrix::from_bloch([1.0, 0.0, 0.0]).unwrap(),
        ];
        let anti = YoungFrame::new(vec![3, 3], 2).unwrap();
        let (lhs, _) =
            spectral_estimation_check(&anti, &SourceWord::constant(0, 6), &pure).unwrap();
        assert!(lhs < 1e-12);
    }

    #[test]
    fn hull_minimum_agrees_with_grid() {
        let a = alphabet();
        let (pg, w) = min_divergence_over_hull(&a, &sigma()).unwrap();
        let (grid, _) = min_divergence_grid(&a, &sigma(), 2000).unwrap();
        assert!(pg <= grid + 1e-9);
        assert!(grid - pg < 1e-5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let three: Vec<DensityMatrix> =
            (0..3).map(|_| quantum::random_state(2, &mut rng)).collect();
        let s = quantum::random_state(2, &mut rng);
        let (pg, _) = min_divergence_over_hull(&three, &s).unwrap();
        let (grid, _) = min_divergence_grid(&three, &s, 120).unwrap();
        assert!(pg <= grid + 1e-9 && grid - pg < 1e-3);
    }

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.5, 0.9, -0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
    }

    #[test]
    fn nets_cover_the_state_space() {
        let big = delta_net(2, 2.0, 1).unwrap();
        assert_eq!(big.len(), 1);
        let net = delta_net(2, 0.5, 1).unwrap();
        assert!((net.len() as f64) <= net_cardinality_bound(0.5, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for i in 0..1000 {
            let t = if i % 2 == 0 {
                quantum::random_state(2, &mut rng)
            } else {
                quantum::random_pure_state(2, &mut rng)
            };
            assert!(
                net.nearest_distance(&t) <= 0.5,
                "{}",
                net.nearest_distance(&t)
            );
        }
        assert_eq!(delta_net(3, 2.0, 1).unwrap().len(), 1);
        let q = delta_net(3, 1.0, 3).unwrap();
        for _ in 0..200 {
            assert!(q.nearest_distance(&quantum::random_state(3, &mut rng)) <= 1.0);
        }
        assert!(delta_net(2, 0.0, 1).is_err());
    }

    #[test]
    fn smoothed_test_duality_and_bounds() {
        let a = alphabet();
        let p = avqs_test(&AvqsSpec::new(a.clone(), sigma(), 0.3, 5)).unwrap();
        let s0 = smoothed_test(&p, 0.0).unwrap();
        assert!((&s0 - p.to_standard().unwrap()).camax() < 1e-12);
        let delta = 0.2;
        let s = smoothed_test(&p, delta).unwrap();
        let (vals, _) = quantum::eigh(&s);
        assert!(vals[0] <= 1.0 + 1e-9 && *vals.last().unwrap() >= -1e-9);
        for w in all_words(2, 5).iter().step_by(3) {
            let rho = product_state(w, &a).unwrap();
            let direct = (&s * rho).trace().re;
            let dual = smoothed_acceptance(&p, &w.states(&a), delta).unwrap();
            assert!((direct - dual).abs() < 1e-9);
        }
    }

    #[test]
    fn smoothed_type_two_penalty() {
        let a = alphabet();
        let n = 6;
        let delta = 0.2;
        let spec = AvqsSpec::new(a.clone(), sigma(), 0.3, n);
        let p = avqs_test(&spec).unwrap();
        let type2 = smoothed_acceptance(&p, &vec![sigma(); n], delta).unwrap();
        let (min_d, _) = min_divergence_over_hull(&a, &sigma()).unwrap();
        let smoothed_sigma = quantum::depolarize(&sigma(), delta).unwrap();
        let (_, t) = quantum::Basis::eigenbasis(&smoothed_sigma);
        let theta = hypotest::theta(n, 0.3, 2, &t);
        let bound = (-(n as f64) * (min_d + 2.0 * (1.0 - delta).log2() - theta)).exp2();
        assert!(type2 <= bound);
    }

    #[test]
    fn smoothing_divergence_relation() {
        // The reverse relation always holds: 𝒩_δ(σ) ≥ (1−δ)σ.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let rho = quantum::random_state(2, &mut rng);
            let s = quantum::random_state(2, &mut rng);
            let delta = 0.3 * rng.random::<f64>();
            let (lhs, _) = smoothing_divergence_check(&rho, &s, delta).unwrap();
            assert!(lhs <= quantum::qrel_entropy(&rho, &s) - (1.0 - delta).log2() + 1e-9);
        }
        // A state on the small eigenvector of σ violates D(ρ‖𝒩_δσ) ≥ D(ρ‖σ) + d·log(1−δ)
        // even for δ below the smallest eigenvalue.
        let s = DensityMatrix::from_diagonal(&[0.99, 0.01]).unwrap();
        let rho = DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        let (lhs, rhs) = smoothing_divergence_check(&rho, &s, 0.009).unwrap();
        assert!((lhs + (0.991f64 * 0.01 + 0.0045).log2()).abs() < 1e-9);
        assert!(lhs < rhs);
    }

    #[test]
    fn gamma_forms() {
        let t = [0.75, 0.25];
        for form in [GammaForm::Statement, GammaForm::Proof] {
            assert!(gamma(form, 6, 0.1, 2, &t, 2).is_finite());
            assert!(gamma_prime(form, 6, 1.0 - 1e-7, 2, 2).is_nan());
            let big = gamma_prime(form, 100_000_000, 0.1, 2, 2);
            assert!(big.is_finite() && big.abs() < 0.01);
        }
        assert!(avqs_type_one_bound(6, 0.3, 2, 2) > 1.0);
    }

    #[test]
    fn run_avqs_report() {
        let spec = AvqsSpec::new(alphabet(), sigma(), 0.3, 4);
        let reps = run_avqs(&spec, &[4, 5]).unwrap();
        assert_eq!(reps.len(), 2);
        for r in &reps {
            assert!(r.bounds_hold);
            assert_eq!(
                r.csv_row().split(',').count(),
                AvqsReport::CSV_HEADER.split(',').count()
            );
        }
    }
}
