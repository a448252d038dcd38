//! Density-matrix algebra on `C^d`.
//!
//! Everything here works with small dense complex matrices (`d ≤ 4` in
//! practice). Logarithms are base 2.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::tableaux::{self, ProbVec};
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Hermiticity, positivity and trace tolerance for [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues below this are clipped before taking logarithms.
pub const LOG_CLIP: f64 = 1e-12;
/// Eigenvalues of `ρ` above this count as support.
pub const SUPPORT_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A `d×d` Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Invalid(
                "density matrix must be square and nonempty".into(),
            ));
        }
        let herm_dev = (&m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_dev > STATE_TOL {
            return Err(Error::Invalid(format!(
                "matrix is not Hermitian (deviation {herm_dev:.2e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Invalid(format!("trace is {tr}, not 1")));
        }
        let m = hermitize(&m);
        let (evals, _) = eigh(&m);
        if let Some(&min) = evals.last() {
            if min < -STATE_TOL {
                return Err(Error::Invalid(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(Self { m })
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| Complex64::new(x, 0.0)),
        )))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0),
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::Invalid("zero state vector".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self {
            m: &v * v.adjoint(),
        })
    }

    /// Qubit state `½(𝟙 + x·σ₁ + y·σ₂ + z·σ₃)`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        let len2 = x * x + y * y + z * z;
        if len2 > 1.0 + STATE_TOL {
            return Err(Error::Invalid(format!(
                "Bloch vector {r:?} lies outside the unit ball"
            )));
        }
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5 * (1.0 + z), 0.0),
                Complex64::new(0.5 * x, -0.5 * y),
                Complex64::new(0.5 * x, 0.5 * y),
                Complex64::new(0.5 * (1.0 - z), 0.0),
            ],
        );
        Self::new(m)
    }

    /// Bloch vector of a qubit state.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let m = &self.m;
        Some([
            2.0 * m[(1, 0)].re,
            2.0 * m[(1, 0)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Convex combination `Σ w_i ρ_i`.
    pub fn mixture(states: &[DensityMatrix], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::Invalid("mixture needs one weight per state".into()));
        }
        let d = states[0].dim();
        let mut m = CMatrix::zeros(d, d);
        for (s, &w) in states.iter().zip(weights) {
            if s.dim() != d {
                return Err(Error::Invalid(
                    "mixture of states with different dimensions".into(),
                ));
            }
            m += s.matrix() * Complex64::new(w, 0.0);
        }
        Self::new(m)
    }

    /// `B† ρ B`: the same state written in the coordinates of `basis`.
    pub fn in_basis(&self, basis: &Basis) -> CMatrix {
        basis.matrix().adjoint() * &self.m * basis.matrix()
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_pairs(&self.m).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(de)?;
        let m = matrix_from_pairs(&rows).map_err(serde::de::Error::custom)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Rows of `[re, im]` pairs.
pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Invalid("ragged or empty matrix".into()));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// An orthonormal basis of `C^d`, stored as the columns of a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    u: CMatrix,
}

impl Basis {
    pub fn new(u: CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::Invalid("basis matrix must be square".into()));
        }
        let d = u.nrows();
        let dev = (u.adjoint() * &u - CMatrix::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > STATE_TOL {
            return Err(Error::Invalid(format!(
                "basis is not orthonormal (deviation {dev:.2e})"
            )));
        }
        Ok(Self { u })
    }

    pub fn computational(d: usize) -> Self {
        Self {
            u: CMatrix::identity(d, d),
        }
    }

    /// An eigenbasis of `sigma` ordered by decreasing eigenvalue, together
    /// with the eigenvalues. Diagonal inputs keep the computational vectors
    /// (stably reordered), so degenerate spectra get a reproducible basis.
    pub fn eigenbasis(sigma: &DensityMatrix) -> (Self, Vec<f64>) {
        let m = sigma.matrix();
        let d = m.nrows();
        let off = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm())
            .fold(0.0, f64::max);
        if off < 1e-14 {
            let mut idx: Vec<usize> = (0..d).collect();
            idx.sort_by(|&a, &b| m[(b, b)].re.total_cmp(&m[(a, a)].re));
            let u = CMatrix::from_fn(d, d, |i, j| if i == idx[j] { ONE } else { ZERO });
            let t = idx.iter().map(|&i| m[(i, i)].re.max(0.0)).collect();
            return (Self { u }, t);
        }
        let (vals, vecs) = eigh(m);
        (
            Self { u: vecs },
            vals.into_iter().map(|x| x.max(0.0)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted decreasingly and
/// eigenvectors in the matching columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

/// Real symmetric eigendecomposition, eigenvalues decreasing.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigenvalues in decreasing order, negatives clipped and renormalized.
pub fn spectrum(rho: &DensityMatrix) -> ProbVec {
    let (vals, _) = eigh(rho.matrix());
    ProbVec::renormalized(vals).expect("a state has positive trace")
}

/// `r̃(i) = ⟨b_i, ρ b_i⟩` for the basis vectors `b_i`.
pub fn pinch(rho: &DensityMatrix, basis: &Basis) -> ProbVec {
    let m = rho.in_basis(basis);
    ProbVec::renormalized((0..m.nrows()).map(|i| m[(i, i)].re).collect())
        .expect("a state has positive trace")
}

/// `f(A)` for Hermitian `A` via its eigendecomposition.
pub fn hermitian_fn(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(a);
    let fd = DVector::from_iterator(vals.len(), vals.iter().map(|&x| Complex64::new(f(x), 0.0)));
    &vecs * CMatrix::from_diagonal(&fd) * vecs.adjoint()
}

/// Base-2 matrix logarithm with eigenvalues clipped at [`LOG_CLIP`].
pub fn log2m(a: &CMatrix) -> CMatrix {
    hermitian_fn(a, |x| x.max(LOG_CLIP).log2())
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    tableaux::entropy(&spectrum(rho))
}

/// Whether `supp ρ ⊆ supp σ`, tested on the eigenvectors of `ρ`.
pub fn support_contained(rho: &DensityMatrix, sigma: &DensityMatrix) -> bool {
    let (vals, vecs) = eigh(rho.matrix());
    vals.iter()
        .enumerate()
        .filter(|(_, &v)| v > SUPPORT_TOL)
        .all(|(i, _)| {
            let u = vecs.column(i);
            (u.adjoint() * sigma.matrix() * u)[(0, 0)].re > LOG_CLIP
        })
}

/// Quantum relative entropy `tr ρ(log ρ − log σ)` in bits, `+∞` when the
/// support of `ρ` is not contained in that of `σ`.
pub fn qrel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    if !support_contained(rho, sigma) {
        return f64::INFINITY;
    }
    let (rv, _) = eigh(rho.matrix());
    let neg_entropy: f64 = rv.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum();
    let cross = (rho.matrix() * log2m(sigma.matrix())).trace().re;
    neg_entropy - cross
}

/// `|D(ρ‖σ) − (−H(spec ρ) − Σ r̃_ρ(i) log t_i)|` with `r̃` the pinching of
/// `ρ` to an eigenbasis of `σ`.
pub fn entropy_identity_check(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let (basis, t) = Basis::eigenbasis(sigma);
    if t.iter().any(|&x| x <= LOG_CLIP) {
        return Err(Error::Domain("sigma must be nonsingular".into()));
    }
    let r = pinch(rho, &basis);
    let rhs = -von_neumann_entropy(rho)
        - r.weights()
            .iter()
            .zip(&t)
            .map(|(p, ti)| p * ti.log2())
            .sum::<f64>();
    Ok((qrel_entropy(rho, sigma) - rhs).abs())
}

/// `‖A‖₁` for Hermitian `A`: the sum of absolute eigenvalues.
pub fn trace_norm(a: &CMatrix) -> f64 {
    eigh(a).0.iter().map(|x| x.abs()).sum()
}

/// `𝒩_δ(a) = (1 − δ)a + δ·tr(a)·𝟙/d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingChannel {
    delta: f64,
    d: usize,
}

impl DepolarizingChannel {
    pub fn new(delta: f64, d: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Domain(format!("delta = {delta} must lie in [0, 1]")));
        }
        Ok(Self { delta, d })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn apply(&self, a: &CMatrix) -> CMatrix {
        let tr = a.trace();
        a * Complex64::new(1.0 - self.delta, 0.0)
            + CMatrix::identity(self.d, self.d) * (tr * (self.delta / self.d as f64))
    }

    /// The Heisenberg-picture map; for the depolarizing channel it has the
    /// same form as the channel itself.
    pub fn adjoint(&self, a: &CMatrix) -> CMatrix {
        self.apply(a)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            m: self.apply(rho.matrix()),
        }
    }
}

pub fn depolarize(rho: &DensityMatrix, delta: f64) -> Result<DensityMatrix> {
    Ok(DepolarizingChannel::new(delta, rho.dim())?.apply_state(rho))
}

pub fn depolarize_adjoint(op: &CMatrix, delta: f64) -> Result<CMatrix> {
    Ok(DepolarizingChannel::new(delta, op.nrows())?.adjoint(op))
}

/// Binary entropy `h(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    tableaux::entropy(&ProbVec::renormalized(vec![x, 1.0 - x]).expect("x in [0,1]"))
}

/// `c(τ) = τ log d + h(τ) + τ log(1/t_min)`.
pub fn fannes_audenaert_bound(tau: f64, d: usize, t_min: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} must lie in [0, 1]")));
    }
    if !(t_min > 0.0) {
        return Err(Error::Domain("t_min must be positive".into()));
    }
    Ok(tau * (d as f64).log2() + binary_entropy(tau) + tau * (1.0 / t_min).log2())
}

/// A state whose spectrum is `spec` and whose diagonal in the computational
/// basis is `diag`.
///
/// Built by the Chan-Li recursion: one plane rotation fixes the largest
/// target diagonal entry, after which the complementary block is diagonal
/// with a spectrum that still majorizes the remaining targets. The result is
/// real symmetric.
pub fn state_with_spectrum_and_diagonal(spec: &ProbVec, diag: &ProbVec) -> Result<DensityMatrix> {
    let d = spec.len();
    if diag.len() != d {
        return Err(Error::Invalid(
            "spectrum and diagonal have different lengths".into(),
        ));
    }
    if !tableaux::majorized_by(diag.weights(), spec.weights(), 1e-12) {
        return Err(Error::Majorization);
    }
    let lam = spec.sorted_desc().weights().to_vec();
    // Target diagonal in decreasing order, remembering where each entry goes.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| diag.weights()[b].total_cmp(&diag.weights()[a]));
    let a: Vec<f64> = order.iter().map(|&i| diag.weights()[i]).collect();

    let q = schur_horn_rotation(&lam, &a);
    let sorted = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&lam)) * q.transpose();
    let mut out = DMatrix::zeros(d, d);
    for (si, &ti) in order.iter().enumerate() {
        for (sj, &tj) in order.iter().enumerate() {
            out[(ti, tj)] = sorted[(si, sj)];
        }
    }
    DensityMatrix::from_real(&out)
}

/// Orthogonal `Q` with `diag(Q·diag(lam)·Qᵀ) = a`, both inputs decreasing and
/// `a ≺ lam`.
fn schur_horn_rotation(lam: &[f64], a: &[f64]) -> DMatrix<f64> {
    let d = lam.len();
    if d == 1 {
        return DMatrix::identity(1, 1);
    }
    let target = a[0];
    // lam[j] ≥ target ≥ lam[j+1]
    let j = (0..d - 1).find(|&j| lam[j + 1] <= target).unwrap_or(d - 2);
    let gap = lam[j] - lam[j + 1];
    let c2 = if gap > 0.0 {
        ((target - lam[j + 1]) / gap).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let (c, s) = (c2.sqrt(), (1.0 - c2).sqrt());

    // Remaining spectrum: the untouched eigenvalues plus the complementary
    // rotated diagonal entry.
    let residual = lam[j] + lam[j + 1] - target;
    let mut rest: Vec<(f64, Option<usize>)> = (0..d)
        .filter(|&i| i != j && i != j + 1)
        .map(|i| (lam[i], Some(i)))
        .collect();
    rest.push((residual, None));
    rest.sort_by(|x, y| y.0.total_cmp(&x.0));
    let rest_vals: Vec<f64> = rest.iter().map(|r| r.0).collect();
    let w = schur_horn_rotation(&rest_vals, &a[1..]);

    // Rows of Bᵀ: the new coordinates expressed in the eigen coordinates.
    let mut bt = DMatrix::zeros(d, d);
    bt[(0, j)] = c;
    bt[(0, j + 1)] = s;
    for (k, (_, src)) in rest.iter().enumerate() {
        match src {
            Some(i) => bt[(k + 1, *i)] = 1.0,
            None => {
                bt[(k + 1, j)] = -s;
                bt[(k + 1, j + 1)] = c;
            }
        }
    }
    let mut v = DMatrix::identity(d, d);
    v.view_mut((1, 1), (d - 1, d - 1)).copy_from(&w);
    v * bt
}

/// `A ⊗ B` (first factor most significant).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `F₁ ⊗ … ⊗ F_n` as a dense matrix.
pub fn tensor_product(factors: &[CMatrix]) -> Result<CMatrix> {
    let dim: usize = factors.iter().map(|f| f.nrows()).product();
    if dim > crate::MAX_TENSOR_DIM {
        return Err(Error::Guard {
            what: "dense tensor product",
            needed: dim as u128,
            limit: crate::MAX_TENSOR_DIM as u128,
        });
    }
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = kron(&out, f);
    }
    Ok(out)
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Hilbert-Schmidt random mixed state `G G† / tr(G G†)`.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix {
        m: hermitize(&(m / tr)),
    }
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let psi: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    DensityMatrix::pure(&psi).expect("a Gaussian vector is nonzero almost surely")
}

/// Uniformly random point of the probability simplex.
pub fn random_probvec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProbVec {
    let w: Vec<f64> = (0..d)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    ProbVec::renormalized(w).expect("positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(DensityMatrix::from_diagonal(&[0.6, 0.6]).is_err());
        assert!(DensityMatrix::from_diagonal(&[1.2, -0.2]).is_err());
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::from_bloch([0.8, 0.8, 0.0]).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let rho = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let s = spectrum(&rho);
        assert!((s.weights()[0] - 0.7).abs() < 1e-14 && (s.weights()[1] - 0.3).abs() < 1e-14);
        let s = spectrum(&DensityMatrix::maximally_mixed(3));
        assert!(s.weights().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn spectrum_matches_closed_form_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rho = random_state(2, &mut rng);
            let m = rho.matrix();
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let b = m[(0, 1)].norm();
            let disc = (((a - d) / 2.0).powi(2) + b * b).sqrt();
            let s = spectrum(&rho);
            assert!((s.weights()[0] - ((a + d) / 2.0 + disc)).abs() < 1e-12);
            assert!((s.weights()[1] - ((a + d) / 2.0 - disc)).abs() < 1e-12);
        }
    }

    #[test]
    fn pinch_examples() {
        let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let p = pinch(&plus, &Basis::computational(2));
        assert!((p.weights()[0] - 0.5).abs() < 1e-15 && (p.weights()[1] - 0.5).abs() < 1e-15);
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.5, 0.3]).unwrap();
        assert_eq!(
            pinch(&rho, &Basis::computational(3)).weights(),
            &[0.2, 0.5, 0.3]
        );
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = DensityMatrix::from_bloch([0.3, -0.2, 0.4]).unwrap();
        assert!(qrel_entropy(&rho, &rho).abs() < 1e-12);
        let p = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let q = DensityMatrix::from_diagonal(&[0.4, 0.6]).unwrap();
        let classical = tableaux::relative_entropy(
            &ProbVec::new(vec![0.7, 0.3]).unwrap(),
            &ProbVec::new(vec![0.4, 0.6]).unwrap(),
        );
        assert!((qrel_entropy(&p, &q) - classical).abs() < 1e-12);
        let zero = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let one = DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!(qrel_entropy(&zero, &one).is_infinite());
        assert!(qrel_entropy(&zero, &q).is_finite());
    }

    #[test]
    fn identity_check() {
        let half = DensityMatrix::maximally_mixed(2);
        assert!(entropy_identity_check(&half, &half).unwrap() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let rho = random_state(2, &mut rng);
            let sigma = random_state(2, &mut rng);
            assert!(entropy_identity_check(&rho, &sigma).unwrap() < 1e-8);
        }
        let diag = DensityMatrix::from_diagonal(&[0.1, 0.9]).unwrap();
        let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!(entropy_identity_check(&diag, &sigma).unwrap() < 1e-12);
        let singular = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(entropy_identity_check(&diag, &singular).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        let rho = DensityMatrix::from_bloch([0.1, 0.2, 0.3]).unwrap();
        assert!(trace_norm(&(rho.matrix() - rho.matrix())) < 1e-15);
        let a = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!((trace_norm(&(a.matrix() - b.matrix())) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_is_twice_best_test() {
        // Oracle: the positive eigenprojector of ρ − σ maximizes tr P(ρ − σ).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let diff =
                random_state(2, &mut rng).into_matrix() - random_state(2, &mut rng).into_matrix();
            let (vals, vecs) = eigh(&diff);
            let mut best = 0.0f64;
            for mask in 0..4u32 {
                let mut p = CMatrix::zeros(2, 2);
                for k in 0..2 {
                    if mask & (1 << k) != 0 {
                        let v = vecs.column(k);
                        p += v * v.adjoint();
                    }
                }
                best = best.max((&p * &diff).trace().re);
            }
            assert!(vals.len() == 2);
            assert!((trace_norm(&diff) - 2.0 * best).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing() {
        let rho = DensityMatrix::from_bloch([0.5, 0.1, -0.3]).unwrap();
        assert_eq!(depolarize(&rho, 0.0).unwrap(), rho);
        let full = depolarize(&rho, 1.0).unwrap();
        assert!((full.matrix() - DensityMatrix::maximally_mixed(2).matrix()).norm() < 1e-15);
        let delta = 0.3;
        let out = spectrum(&depolarize(&rho, delta).unwrap());
        let inp = spectrum(&rho);
        for (o, i) in out.weights().iter().zip(inp.weights()) {
            assert!((o - ((1.0 - delta) * i + delta / 2.0)).abs() < 1e-12);
        }
        assert!(DepolarizingChannel::new(1.5, 2).is_err());
    }

    #[test]
    fn depolarizing_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let rho = random_state(3, &mut rng);
            let a = CMatrix::from_fn(3, 3, |_, _| gaussian(&mut rng));
            let delta = rng.random::<f64>();
            let lhs = (depolarize_adjoint(&a, delta).unwrap() * rho.matrix()).trace();
            let rhs = (&a * depolarize(&rho, delta).unwrap().matrix()).trace();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn fannes_audenaert_values() {
        assert_eq!(fannes_audenaert_bound(0.0, 2, 0.25).unwrap(), 0.0);
        assert!((fannes_audenaert_bound(0.5, 2, 0.25).unwrap() - 2.5).abs() < 1e-14);
        assert!(fannes_audenaert_bound(0.5, 2, 0.0).is_err());
    }

    #[test]
    fn fannes_audenaert_sweep() {
        let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let rho = random_state(2, &mut rng);
            let rho2 = random_state(2, &mut rng);
            let tau = 0.5 * trace_norm(&(rho.matrix() - rho2.matrix()));
            let bound = fannes_audenaert_bound(tau, 2, 0.25).unwrap();
            let gap = (qrel_entropy(&rho, &sigma) - qrel_entropy(&rho2, &sigma)).abs();
            assert!(gap <= bound + 1e-12, "{gap} > {bound}");
        }
    }

    #[test]
    fn schur_horn_examples() {
        let spec = ProbVec::new(vec![0.6, 0.4]).unwrap();
        let rho = state_with_spectrum_and_diagonal(&spec, &spec).unwrap();
        assert!(
            (rho.matrix() - DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap().matrix()).norm()
                < 1e-14
        );

        let pure = ProbVec::new(vec![1.0, 0.0]).unwrap();
        let flat = ProbVec::new(vec![0.5, 0.5]).unwrap();
        let rho = state_with_spectrum_and_diagonal(&pure, &flat).unwrap();
        assert!(spectrum(&rho).l1_distance(&pure) < 1e-8);
        assert!(pinch(&rho, &Basis::computational(2)).l1_distance(&flat) < 1e-8);

        assert_eq!(
            state_with_spectrum_and_diagonal(&flat, &pure),
            Err(Error::Majorization)
        );
    }

    #[test]
    fn schur_horn_unsorted_targets() {
        let spec = ProbVec::new(vec![0.1, 0.6, 0.3]).unwrap();
        let diag = ProbVec::new(vec![0.3, 0.25, 0.45]).unwrap();
        let rho = state_with_spectrum_and_diagonal(&spec, &diag).unwrap();
        assert!(spectrum(&rho).l1_distance(&spec.sorted_desc()) < 1e-10);
        assert!(pinch(&rho, &Basis::computational(3)).l1_distance(&diag) < 1e-10);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(3, &mut rng);
        assert!((u.adjoint() * &u - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn eigenbasis_of_diagonal_is_sorted() {
        let sigma = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        let (b, t) = Basis::eigenbasis(&sigma);
        assert_eq!(t, vec![0.75, 0.25]);
        assert_eq!(b.matrix()[(1, 0)], ONE);
        let (b, t) = Basis::eigenbasis(&DensityMatrix::maximally_mixed(2));
        assert_eq!(t, vec![0.5, 0.5]);
        assert_eq!(b, Basis::computational(2));
    }

    #[test]
    fn bloch_round_trip() {
        let r = [0.3, -0.1, 0.5];
        let rho = DensityMatrix::from_bloch(r).unwrap();
        let back = rho.bloch().unwrap();
        for k in 0..3 {
            assert!((back[k] - r[k]).abs() < 1e-15);
        }
    }
}
