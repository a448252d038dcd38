//! The Sanov test `P_n`, its two error probabilities, the slack functions
//! `Θ`, `Θ′`, and the Neyman-Pearson optimum it is compared against.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::quantum::{self, Basis, CMatrix, DensityMatrix};
use crate::schur_weyl::{apply_product, isotypic_reduction, BlockOperator, Decomposition};
use crate::tableaux::{binomial, hook_dimension, Frequency, ProbVec, YoungFrame, ALPHA};
use crate::{Error, Result};

/// Slack added to `ε` in label comparisons.
const LABEL_TOL: f64 = 1e-12;
/// Largest number of mixture points used to represent a convex hull.
pub const MAX_HULL_POINTS: u128 = 200_000;

/// The null hypothesis: finitely many states, or their convex hull.
#[derive(Debug, Clone)]
pub enum NullSet {
    Points(Vec<DensityMatrix>),
    Hull(Vec<DensityMatrix>),
}

impl NullSet {
    pub fn generators(&self) -> &[DensityMatrix] {
        match self {
            NullSet::Points(v) | NullSet::Hull(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestSpec {
    pub sigma: DensityMatrix,
    pub null_set: NullSet,
    pub epsilon: f64,
    pub n: usize,
    basis: Basis,
    t: Vec<f64>,
}

impl TestSpec {
    pub fn new(sigma: DensityMatrix, null_set: NullSet, epsilon: f64, n: usize) -> Result<Self> {
        let (basis, t) = Basis::eigenbasis(&sigma);
        if t.iter().any(|&x| x <= 1e-9) {
            return Err(Error::Domain(format!(
                "σ must be nonsingular, eigenvalues {t:?}"
            )));
        }
        let gens = null_set.generators();
        if gens.is_empty() {
            return Err(Error::Invalid("empty null set".into()));
        }
        if gens.iter().any(|g| g.dim() != sigma.dim()) {
            return Err(Error::Invalid(
                "null-set states and σ differ in dimension".into(),
            ));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Domain(format!(
                "ε = {epsilon} must be finite and ≥ 0"
            )));
        }
        if matches!(null_set, NullSet::Hull(_)) && epsilon <= 0.0 {
            return Err(Error::Domain("a convex null set needs ε > 0".into()));
        }
        if n == 0 {
            return Err(Error::Domain("n must be ≥ 1".into()));
        }
        Ok(Self {
            sigma,
            null_set,
            epsilon,
            n,
            basis,
            t,
        })
    }

    pub fn d(&self) -> usize {
        self.sigma.dim()
    }

    /// The eigenbasis of σ (eigenvalues decreasing) defining the types.
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn sigma_eigenvalues(&self) -> &[f64] {
        &self.t
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// States representing the null set: the generators, plus for a hull
    /// every mixture on a weight grid of pitch at most `ε/4` (coarsened if
    /// the grid would exceed [`MAX_HULL_POINTS`]).
    pub fn representatives(&self) -> Result<Vec<DensityMatrix>> {
        match &self.null_set {
            NullSet::Points(v) => Ok(v.clone()),
            NullSet::Hull(v) => {
                let steps = hull_grid_steps(v.len(), self.epsilon);
                mixture_grid(v, steps)
            }
        }
    }

    /// `(r̃_s, r_s)` for every representative: pinching in the σ eigenbasis
    /// and sorted spectrum.
    pub fn targets(&self) -> Result<Vec<(ProbVec, ProbVec)>> {
        Ok(self
            .representatives()?
            .iter()
            .map(|r| (quantum::pinch(r, &self.basis), quantum::spectrum(r)))
            .collect())
    }
}

/// Grid resolution `m` (weights are multiples of `1/m`) for a hull of `k`
/// generators at accuracy `ε`.
pub fn hull_grid_steps(k: usize, epsilon: f64) -> usize {
    let mut m = (4.0 / epsilon).ceil().max(1.0) as usize;
    while m > 1 && binomial(m + k - 1, k - 1) > MAX_HULL_POINTS {
        m -= 1;
    }
    m
}

/// All weight vectors with entries in `{0, 1/m, …, 1}` summing to one.
pub fn weight_grid(k: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == k {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / m as f64).collect());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(k, left - c, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(k, m, m, &mut Vec::new(), &mut out);
    }
    out
}

pub fn mixture_grid(states: &[DensityMatrix], m: usize) -> Result<Vec<DensityMatrix>> {
    weight_grid(states.len(), m)
        .iter()
        .map(|w| DensityMatrix::mixture(states, w))
        .collect()
}

/// `Λ_ε` as `(f, λ)` label pairs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LambdaSet {
    pub pairs: Vec<(Frequency, YoungFrame)>,
}

impl LambdaSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, f: &Frequency, lambda: &YoungFrame) -> bool {
        self.pairs
            .iter()
            .any(|(g, l)| g == f && l.parts() == lambda.parts())
    }
}

/// Whether `(f, λ)` lies within `ε` of some target `(r̃, r)`.
pub fn label_accepted(
    f: &Frequency,
    lambda: &YoungFrame,
    targets: &[(ProbVec, ProbVec)],
    epsilon: f64,
) -> bool {
    let fb = f.normalize();
    let lb = lambda.normalize();
    targets.iter().any(|(rt, r)| {
        fb.l1_distance(rt) <= epsilon + LABEL_TOL && lb.l1_distance(r) <= epsilon + LABEL_TOL
    })
}

pub fn lambda_set(spec: &TestSpec) -> Result<LambdaSet> {
    let dec = Decomposition::shared(spec.d(), spec.n)?;
    let targets = spec.targets()?;
    let mut pairs = Vec::new();
    for s in dec.sectors() {
        for lambda in dec.frames() {
            if label_accepted(&s.freq, lambda, &targets, spec.epsilon) {
                pairs.push((s.freq.clone(), lambda.clone()));
            }
        }
    }
    Ok(LambdaSet { pairs })
}

/// `P_n = Σ_{(f,λ) ∈ Λ_ε} P_{f,λ}` in the σ eigenbasis.
pub fn build_test(spec: &TestSpec) -> Result<BlockOperator> {
    let labels = lambda_set(spec)?;
    projector_for(spec, &labels)
}

pub fn projector_for(spec: &TestSpec, labels: &LambdaSet) -> Result<BlockOperator> {
    let dec = Decomposition::shared(spec.d(), spec.n)?;
    let idx: Vec<(usize, usize)> = labels
        .pairs
        .iter()
        .map(|(f, l)| {
            let s = dec
                .sector_index(f)
                .ok_or_else(|| Error::Invalid(format!("unknown frequency {f}")))?;
            let k = dec
                .frame_index(l)
                .ok_or_else(|| Error::Invalid(format!("unknown frame {l}")))?;
            Ok((s, k))
        })
        .collect::<Result<_>>()?;
    Ok(BlockOperator::from_labels(dec, spec.basis.clone(), &idx))
}

/// `1 − tr{P ρ^{⊗n}}`.
pub fn type_one(p: &BlockOperator, rho: &DensityMatrix) -> Result<f64> {
    Ok((1.0 - p.expectation_iid(rho)?).clamp(0.0, 1.0))
}

/// `tr{P σ^{⊗n}}`.
pub fn type_two(p: &BlockOperator, sigma: &DensityMatrix) -> Result<f64> {
    Ok(p.expectation_iid(sigma)?.clamp(0.0, 1.0))
}

fn xlog_ratio(eps: f64, d: f64) -> f64 {
    if eps == 0.0 {
        0.0
    } else {
        eps * (eps / d).log2().abs()
    }
}

/// `Θ(n,ε,d,σ) = (d²/n)log(2n) + ε|log(ε/d)| + dε·maxᵢ|log tᵢ|`.
pub fn theta(n: usize, eps: f64, d: usize, sigma_eigenvalues: &[f64]) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    let max_log = sigma_eigenvalues
        .iter()
        .map(|t| t.log2().abs())
        .fold(0.0, f64::max);
    df * df / nf * (2.0 * nf).log2() + xlog_ratio(eps, df) + df * eps * max_log
}

/// `Θ′(n,ν,d) = Θ(n,n^{−1/4},d,σ) − (2d⁶/n)log(2n) + (1/n)log((1−ν−2^{−α√n})/(2n)^{2d²})`.
///
/// The logarithm's argument is negative for small `n`; the result is then
/// NaN and is returned as such.
pub fn theta_prime(n: usize, nu: f64, d: usize, sigma_eigenvalues: &[f64]) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    let arg = 1.0 - nu - (-ALPHA * nf.sqrt()).exp2();
    theta(n, nf.powf(-0.25), d, sigma_eigenvalues) - 2.0 * df.powi(6) / nf * (2.0 * nf).log2()
        + (arg.log2() - 2.0 * df * df * (2.0 * nf).log2()) / nf
}

/// `ε_n = √((1/α)((1/n)log(1/ν) + ((d² + extra)/n)log(2n)))`; `extra` is
/// `|S|` for a varying source and 0 otherwise.
pub fn eps_schedule(n: usize, nu: f64, d: usize, extra: f64) -> f64 {
    let nf = n as f64;
    let df = d as f64;
    (((1.0 / nu).log2() / nf + (df * df + extra) / nf * (2.0 * nf).log2()) / ALPHA).sqrt()
}

/// `2^{−n(αε² − (2d²/n)log 2n)}`, the guaranteed type-I error.
pub fn type_one_bound(n: usize, eps: f64, d: usize) -> f64 {
    let nf = n as f64;
    let df = d as f64;
    (-(nf * ALPHA * eps * eps - 2.0 * df * df * (2.0 * nf).log2())).exp2()
}

/// `2^{−n(D − Θ)}`, the guaranteed type-II error.
pub fn type_two_bound(n: usize, divergence: f64, theta: f64) -> f64 {
    (-(n as f64) * (divergence - theta)).exp2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EpsilonChoice {
    Fixed(f64),
    /// `ε_n` from [`eps_schedule`] at the given `ν`.
    Schedule {
        nu: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub n: usize,
    pub eps: f64,
    pub type1_max: f64,
    pub type2: f64,
    pub empirical_exponent: f64,
    #[serde(rename = "reference_D")]
    pub reference_d: f64,
    pub theta: f64,
    pub np_beta: f64,
    pub type1_bound: f64,
    pub type2_bound: f64,
    pub bound_holds: bool,
}

impl ExponentReport {
    pub const CSV_HEADER: &'static str =
        "n,eps,type1_max,type2,empirical_exponent,reference_D,theta,np_beta";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.eps,
            self.type1_max,
            self.type2,
            self.empirical_exponent,
            self.reference_d,
            self.theta,
            self.np_beta
        )
    }
}

/// Runs the Sanov test for every `n` in `ns`.
///
/// `np_beta` is the largest Neyman-Pearson optimum `β(ρ_s, σ, n, ν_s)` over
/// generators, with `ν_s` the type-I error `P_n` achieves on `ρ_s`, so
/// `np_beta ≤ type2` always.
pub fn run_sanov(
    template: &TestSpec,
    ns: &[usize],
    eps: EpsilonChoice,
) -> Result<Vec<ExponentReport>> {
    ns.par_iter()
        .map(|&n| {
            let d = template.d();
            let e = match eps {
                EpsilonChoice::Fixed(e) => e,
                EpsilonChoice::Schedule { nu } => eps_schedule(n, nu, d, 0.0),
            };
            let spec = template.with_n(n).with_epsilon(e);
            let p = build_test(&spec)?;
            let gens = spec.null_set.generators();
            let type1: Vec<f64> = gens
                .iter()
                .map(|r| type_one(&p, r))
                .collect::<Result<_>>()?;
            let type1_max = match &spec.null_set {
                NullSet::Points(_) => type1.iter().copied().fold(0.0, f64::max),
                NullSet::Hull(_) => spec
                    .representatives()?
                    .iter()
                    .map(|r| type_one(&p, r))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max),
            };
            let type2 = type_two(&p, &spec.sigma)?;
            let reference_d = match &spec.null_set {
                NullSet::Points(v) => v
                    .iter()
                    .map(|r| quantum::qrel_entropy(r, &spec.sigma))
                    .fold(f64::INFINITY, f64::min),
                NullSet::Hull(v) => crate::avqs::min_divergence_over_hull(v, &spec.sigma)?.0,
            };
            let th = theta(n, e, d, spec.sigma_eigenvalues());
            let mut np_beta: f64 = 0.0;
            for (r, &nu) in gens.iter().zip(&type1) {
                np_beta = np_beta.max(neyman_pearson(
                    r,
                    &spec.sigma,
                    n,
                    nu.clamp(1e-12, 1.0 - 1e-12),
                )?);
            }
            let type2_bound = type_two_bound(n, reference_d, th);
            Ok(ExponentReport {
                n,
                eps: e,
                type1_max,
                type2,
                empirical_exponent: -type2.log2() / n as f64,
                reference_d,
                theta: th,
                np_beta,
                type1_bound: type_one_bound(n, e, d),
                type2_bound,
                bound_holds: type2 <= type2_bound * (1.0 + 1e-9),
            })
        })
        .collect()
}

/// Orthonormal bases `B_λ` of one `U(d)` copy per frame, cached by `(d, n)`.
fn reductions(d: usize, n: usize) -> Result<Arc<Vec<DMatrix<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<DMatrix<f64>>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("cache poisoned").get(&(d, n)) {
        return Ok(Arc::clone(r));
    }
    let dec = Decomposition::shared(d, n)?;
    let red: Vec<DMatrix<f64>> = (0..dec.frames().len())
        .into_par_iter()
        .map(|l| isotypic_reduction(&dec, l))
        .collect();
    let red = Arc::new(red);
    cache
        .lock()
        .expect("cache poisoned")
        .insert((d, n), Arc::clone(&red));
    Ok(red)
}

/// `Bᵀ X^{⊗n} B` for real orthonormal columns `B`.
fn reduce(b: &DMatrix<f64>, x: &CMatrix, n: usize) -> CMatrix {
    let factors = vec![x.clone(); n];
    let bc = b.map(|v| Complex64::new(v, 0.0));
    let mut img = CMatrix::zeros(b.nrows(), b.ncols());
    for c in 0..b.ncols() {
        let col: Vec<Complex64> = bc.column(c).iter().copied().collect();
        img.set_column(
            c,
            &nalgebra::DVector::from_vec(apply_product(&factors, &col)),
        );
    }
    quantum::hermitize(&(bc.adjoint() * img))
}

/// The isotypic pieces of `ρ^{⊗n}` and `σ^{⊗n}` with their multiplicities.
struct ReducedPair {
    blocks: Vec<(f64, CMatrix, CMatrix)>,
}

impl ReducedPair {
    fn new(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<Self> {
        let d = rho.dim();
        let dec = Decomposition::shared(d, n)?;
        let red = reductions(d, n)?;
        let blocks = dec
            .frames()
            .par_iter()
            .zip(red.par_iter())
            .filter(|(_, b)| b.ncols() > 0)
            .map(|(l, b)| {
                (
                    hook_dimension(l) as f64,
                    reduce(b, rho.matrix(), n),
                    reduce(b, sigma.matrix(), n),
                )
            })
            .collect();
        Ok(Self { blocks })
    }

    /// `(tr{Π₊ρ^{⊗n}}, tr{Π₊σ^{⊗n}})` for `Π₊` the positive part of
    /// `ρ^{⊗n} − tσ^{⊗n}`.
    fn positive_part(&self, t: f64) -> (f64, f64) {
        let mut mass = (0.0, 0.0);
        for (mult, a, s) in &self.blocks {
            let x = a - s * Complex64::new(t, 0.0);
            let (vals, vecs) = quantum::eigh(&x);
            for (i, &v) in vals.iter().enumerate() {
                if v <= 0.0 {
                    break;
                }
                let col = vecs.column(i);
                mass.0 += mult * (col.adjoint() * a * col)[(0, 0)].re;
                mass.1 += mult * (col.adjoint() * s * col)[(0, 0)].re;
            }
        }
        mass
    }
}

/// `β = min{tr{Aσ^{⊗n}} : 0 ≤ A ≤ 𝟙, tr{Aρ^{⊗n}} ≥ 1 − ν}`.
///
/// Both tensor powers commute with permutations, so `ρ^{⊗n} − tσ^{⊗n}` is
/// diagonalized inside each isotypic component on one `U(d)` copy. The
/// threshold `t` is found by bisection on `ln t`; at the threshold the
/// optimal test adds eigenvectors with `ρ`-mass `= t·σ`-mass until the
/// constraint is tight.
pub fn neyman_pearson(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    nu: f64,
) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain(format!("ν = {nu} must lie in (0, 1)")));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::Invalid("ρ and σ differ in dimension".into()));
    }
    let pair = ReducedPair::new(rho, sigma, n)?;
    let target = 1.0 - nu;
    let (mut lo, mut hi) = (-745.0f64, 745.0f64);
    if pair.positive_part(hi.exp()).0 >= target {
        return Ok(pair.positive_part(hi.exp()).1);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if pair.positive_part(mid.exp()).0 >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let t = hi.exp();
    let (ra, sa) = pair.positive_part(t);
    Ok((sa + (target - ra).max(0.0) / t).clamp(0.0, 1.0))
}
