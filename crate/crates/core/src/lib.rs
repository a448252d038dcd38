//! Permutation-invariant hypothesis tests on `(C^d)^{⊗n}`.
//!
//! The crate builds the projectors `P_{f,λ}` onto the intersection of a
//! frequency-typical subspace (letter counts `f` in a fixed basis) with an
//! isotypical subspace of the symmetric group (Young frame `λ`), and uses
//! them to construct Sanov-type tests, arbitrarily-varying-source tests and
//! the numerical checks that accompany them.
//!
//! Module map:
//!
//! * [`tableaux`]: exact combinatorics (frames, frequencies, Kostka numbers,
//!   hook dimensions) and classical entropies.
//! * [`quantum`]: density matrices, spectra, pinching, relative entropy,
//!   depolarizing channel, Schur-Horn state construction.
//! * [`schur_weyl`]: permutation action, characters, the projector family.
//! * [`hypotest`]: the Sanov test, error probabilities, exponent slacks and
//!   the Neyman-Pearson baseline.
//! * [`avqs`]: arbitrarily varying sources, robustification, nets and
//!   depolarizing smoothing.
//! * [`nogo`]: unitary twirl, dimension-ratio bound and the no-go bound.

pub mod avqs;
pub mod error;
pub mod hypotest;
pub mod nogo;
pub mod quantum;
pub mod schur_weyl;
pub mod tableaux;

pub use error::{Error, Result};

/// Largest tensor-space dimension `d^n` any dense construction will accept.
pub const MAX_TENSOR_DIM: usize = 60_000;

/// `d^n` with the size guard applied.
pub fn tensor_dim(d: usize, n: usize) -> Result<usize> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(d as u128);
    }
    if total > MAX_TENSOR_DIM as u128 {
        return Err(Error::Guard {
            what: "tensor space dimension d^n",
            needed: total,
            limit: MAX_TENSOR_DIM as u128,
        });
    }
    Ok(total as usize)
}
