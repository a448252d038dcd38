//! Ingredients of the no-go bound for permutation-invariant detectors: the
//! unitary twirl on invariant operators, the dimension-ratio estimate, and
//! the final bound `A ≥ (1 − ε(2dn)^{4d²})𝟙`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::quantum::{self, CMatrix, DensityMatrix};
use crate::schur_weyl::{
    isotypical_projector, perm_action, PermOperator, Permutation, DENSE_LIMIT,
};
use crate::tableaux::{enumerate_frames, factorial, hook_dimension, type_class_size, YoungFrame};
use crate::{tensor_dim, Error, Result};

const INVARIANCE_TOL: f64 = 1e-9;
const BOUNDS_TOL: f64 = 1e-9;
/// Largest `n` for which [`random_invariant_operator`] averages over `S_n`.
pub const MAX_SYMMETRIZE_N: usize = 7;

/// An operator `0 ≤ A ≤ 𝟙` on `(ℂ^d)^{⊗n}` commuting with every `U_π`.
#[derive(Debug, Clone)]
pub struct InvariantOperator {
    d: usize,
    n: usize,
    a: CMatrix,
}

fn adjacent_transpositions(d: usize, n: usize) -> Result<Vec<PermOperator>> {
    (0..n.saturating_sub(1))
        .map(|i| perm_action(&Permutation::transposition(n, i, i + 1), d, n))
        .collect()
}

impl InvariantOperator {
    /// Checks invariance under the adjacent transpositions (which generate
    /// `S_n`) and the operator bounds.
    pub fn new(a: CMatrix, d: usize, n: usize) -> Result<Self> {
        let dim = tensor_dim(d, n)?;
        if dim > DENSE_LIMIT {
            return Err(Error::Guard {
                what: "dense invariant operator",
                needed: dim as u128,
                limit: DENSE_LIMIT as u128,
            });
        }
        if a.nrows() != dim || a.ncols() != dim {
            return Err(Error::Invalid(format!(
                "operator is {}×{}, expected {dim}×{dim}",
                a.nrows(),
                a.ncols()
            )));
        }
        if (&a - a.adjoint()).camax() > INVARIANCE_TOL {
            return Err(Error::Invalid("operator is not Hermitian".into()));
        }
        let defect = adjacent_transpositions(d, n)?
            .iter()
            .map(|u| (u.conjugate(&a) - &a).camax())
            .fold(0.0, f64::max);
        if defect > INVARIANCE_TOL {
            return Err(Error::NotInvariant(defect));
        }
        let (vals, _) = quantum::eigh(&a);
        let (hi, lo) = (vals[0], vals[vals.len() - 1]);
        if lo < -BOUNDS_TOL || hi > 1.0 + BOUNDS_TOL {
            return Err(Error::Domain(format!(
                "eigenvalues in [{lo}, {hi}] are outside [0, 1]"
            )));
        }
        Ok(Self { d, n, a })
    }

    pub fn identity(d: usize, n: usize) -> Result<Self> {
        let dim = tensor_dim(d, n)?;
        Self::new(CMatrix::identity(dim, dim), d, n)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = quantum::eigh(&self.a);
        vals[vals.len() - 1]
    }

    /// `tr{A (ρ₁ ⊗ … ⊗ ρ_n)}`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        let big = quantum::tensor_product(&vec![rho.matrix().clone(); self.n])?;
        Ok((&self.a * big).trace().re)
    }
}

/// `Σ_λ (tr{A P_λ}/tr{P_λ}) P_λ`, the Haar average of `V^{⊗n} A V^{⊗n}†`.
pub fn unitary_twirl_invariant(a: &InvariantOperator) -> Result<CMatrix> {
    let dim = a.a.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for lambda in enumerate_frames(a.d, a.n) {
        let p = isotypical_projector(&lambda, a.d, a.n)?.map(|x| Complex64::new(x, 0.0));
        let weight = (&a.a * &p).trace().re / p.trace().re;
        out += p * Complex64::new(weight, 0.0);
    }
    Ok(out)
}

/// One Haar-random conjugate `V^{⊗n} A V^{⊗n}†` per sample; sample `i` draws
/// from stream `i` of a generator seeded with `seed`.
pub fn haar_twirl_samples(a: &InvariantOperator, samples: usize, seed: u64) -> Vec<CMatrix> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let v = quantum::haar_unitary(a.d, &mut rng);
            let big = quantum::tensor_product(&vec![v; a.n]).expect("size checked at construction");
            &big * &a.a * big.adjoint()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TwirlCheck {
    pub samples: usize,
    /// `‖mean − exact‖_F`.
    pub frobenius_error: f64,
    /// `√(Σ_{ij} se_{ij}²)`, the expected size of that error.
    pub frobenius_se: f64,
    /// `(mean − exact)/se` of `tr{· ω^{⊗n}}` for a fixed probe state `ω`.
    pub probe_z: f64,
    pub within_3_sigma: bool,
}

/// Probe state for the scalar comparison: eigenvalues `∝ d, d−1, …, 1` in a
/// fixed rotated basis.
fn probe_state(d: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e0be);
    let u = quantum::haar_unitary(d, &mut rng);
    let total = (d * (d + 1) / 2) as f64;
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new((d - i) as f64 / total, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DensityMatrix::new(&u * diag * u.adjoint()).expect("valid by construction")
}

/// Compares the exact twirl with a Monte-Carlo Haar average.
pub fn haar_twirl_monte_carlo(
    a: &InvariantOperator,
    samples: usize,
    seed: u64,
) -> Result<TwirlCheck> {
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let exact = unitary_twirl_invariant(a)?;
    let draws = haar_twirl_samples(a, samples, seed);
    let m = samples as f64;
    let dim = exact.nrows();
    let mean = draws
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, x| acc + x)
        / Complex64::new(m, 0.0);
    let mut var_sum = 0.0;
    for x in &draws {
        var_sum += (x - &mean).iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let frobenius_se = (var_sum / (m - 1.0) / m).sqrt();
    let frobenius_error = (&mean - &exact).norm();

    let probe = quantum::tensor_product(&vec![probe_state(a.d).into_matrix(); a.n])?;
    let vals: Vec<f64> = draws.iter().map(|x| (x * &probe).trace().re).collect();
    let mu = vals.iter().sum::<f64>() / m;
    let sd = (vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let target = (&exact * &probe).trace().re;
    let se = sd / m.sqrt();
    let probe_z = if se > 0.0 {
        (mu - target) / se
    } else if (mu - target).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(TwirlCheck {
        samples,
        frobenius_error,
        frobenius_se,
        probe_z,
        within_3_sigma: probe_z.abs() <= 3.0 && frobenius_error <= 3.0 * frobenius_se + 1e-12,
    })
}

/// `(dim F_λ / |T_λ|, (n+d+1)^{−d²})`.
pub fn dim_ratio_bound(lambda: &YoungFrame, d: usize, n: usize) -> Result<(f64, f64)> {
    if lambda.n() != n || lambda.rows() > d {
        return Err(Error::Invalid(format!(
            "{lambda} is not a frame in Y_{{{d},{n}}}"
        )));
    }
    let framed = YoungFrame::new(lambda.parts().to_vec(), d)?;
    let ratio = hook_dimension(&framed) as f64 / type_class_size(&framed.as_frequency()) as f64;
    Ok((ratio, (n as f64 + d as f64 + 1.0).powf(-((d * d) as f64))))
}

/// `1 − ε(2dn)^{4d²}`.
pub fn nogo_bound(eps: f64, d: usize, n: usize) -> f64 {
    1.0 - eps * (2.0 * (d * n) as f64).powf(4.0 * (d * d) as f64)
}

/// `ε* = (2dn)^{−4d²}`, above which [`nogo_bound`] is not positive.
pub fn vacuity_threshold(d: usize, n: usize) -> f64 {
    (2.0 * (d * n) as f64).powf(-4.0 * (d * d) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct NogoReport {
    pub eps_hat: f64,
    pub min_eig: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub holds: bool,
}

/// Probe states: the maximally mixed state, the computational and Fourier
/// basis vectors, a Bloch grid for `d = 2`, and `sample_states` seeded
/// random states (alternately mixed and pure).
pub fn probe_states(d: usize, sample_states: usize, seed: u64) -> Result<Vec<DensityMatrix>> {
    let mut out = vec![DensityMatrix::maximally_mixed(d)];
    for k in 0..d {
        let e: Vec<Complex64> = (0..d)
            .map(|i| Complex64::new(f64::from(u8::from(i == k)), 0.0))
            .collect();
        out.push(DensityMatrix::pure(&e)?);
        let f: Vec<Complex64> = (0..d)
            .map(|i| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (i * k) as f64 / d as f64)
            })
            .collect();
        out.push(DensityMatrix::pure(&f)?);
    }
    if d == 2 {
        let steps = 6;
        for i in 0..=steps {
            let theta = std::f64::consts::PI * i as f64 / steps as f64;
            for j in 0..2 * steps {
                let phi = std::f64::consts::PI * j as f64 / steps as f64;
                for r in [0.5, 1.0] {
                    out.push(DensityMatrix::from_bloch([
                        r * theta.sin() * phi.cos(),
                        r * theta.sin() * phi.sin(),
                        r * theta.cos(),
                    ])?);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..sample_states {
        out.push(if i % 2 == 0 {
            quantum::random_state(d, &mut rng)
        } else {
            quantum::random_pure_state(d, &mut rng)
        });
    }
    Ok(out)
}

/// Estimates `ε̂ = max_ρ tr{(𝟙−A)ρ^{⊗n}}` over [`probe_states`] and checks
/// `λ_min(A) ≥ 1 − ε̂(2dn)^{4d²}` when that bound is positive.
pub fn verify_nogo_instance(
    a: &InvariantOperator,
    sample_states: usize,
    seed: u64,
) -> Result<NogoReport> {
    let dim = a.a.nrows();
    let complement = CMatrix::identity(dim, dim) - &a.a;
    let probes = probe_states(a.d, sample_states, seed)?;
    let eps_hat = probes
        .par_iter()
        .map(|rho| {
            let big = quantum::tensor_product(&vec![rho.matrix().clone(); a.n])
                .expect("size checked at construction");
            (&complement * big).trace().re
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    let min_eig = a.min_eigenvalue();
    let bound = nogo_bound(eps_hat, a.d, a.n);
    let vacuous = bound <= 0.0;
    Ok(NogoReport {
        eps_hat,
        min_eig,
        bound,
        vacuous,
        holds: vacuous || min_eig >= bound - BOUNDS_TOL,
    })
}

/// A random Hermitian matrix averaged over `S_n` and affinely rescaled so
/// its spectrum spans `[0, 1]`.
pub fn random_invariant_operator<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<InvariantOperator> {
    if n > MAX_SYMMETRIZE_N {
        return Err(Error::Guard {
            what: "S_n average",
            needed: factorial(n),
            limit: factorial(MAX_SYMMETRIZE_N),
        });
    }
    let dim = tensor_dim(d, n)?;
    if dim > DENSE_LIMIT {
        return Err(Error::Guard {
            what: "dense invariant operator",
            needed: dim as u128,
            limit: DENSE_LIMIT as u128,
        });
    }
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(rand_distr::StandardNormal),
            rng.sample::<f64, _>(rand_distr::StandardNormal),
        )
    });
    let h = quantum::hermitize(&g);
    let mut sym = CMatrix::zeros(dim, dim);
    let mut count = 0.0;
    for_each_perm(n, |images| {
        let u = perm_action(&Permutation::new(images.to_vec()).expect("valid"), d, n)
            .expect("size checked");
        sym += u.conjugate(&h);
        count += 1.0;
    });
    sym = quantum::hermitize(&(sym / Complex64::new(count, 0.0)));
    let (vals, _) = quantum::eigh(&sym);
    let (hi, lo) = (vals[0], vals[vals.len() - 1]);
    let scaled = (sym - CMatrix::identity(dim, dim) * Complex64::new(lo, 0.0))
        / Complex64::new(hi - lo, 0.0);
    InvariantOperator::new(quantum::hermitize(&scaled), d, n)
}

fn for_each_perm(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(k: usize, a: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if k == a.len() {
            f(a);
            return;
        }
        for i in k..a.len() {
            a.swap(k, i);
            rec(k + 1, a, f);
            a.swap(k, i);
        }
    }
    rec(0, &mut (0..n).collect(), &mut f);
}
