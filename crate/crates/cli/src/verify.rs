use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use symtypes::hypotest::{self, NullSet, TestSpec};
use symtypes::nogo;
use symtypes::quantum::{self, Basis, DensityMatrix};
use symtypes::schur_weyl::{self, BlockOperator, CharacterTable, Decomposition};
use symtypes::tableaux::{self, ProbVec};

use crate::{CliError, Config};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub suite: &'static str,
    pub d: usize,
    pub n: usize,
    pub cases: usize,
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl SuiteRow {
    pub const CSV_HEADER: &'static str = "suite,d,n,cases,max_defect,tolerance,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:e},{:e},{}",
            self.suite, self.d, self.n, self.cases, self.max_defect, self.tolerance, self.pass
        )
    }

    pub fn label(&self) -> String {
        format!(
            "{} d={} n={}: defect {:e} > {:e}",
            self.suite, self.d, self.n, self.max_defect, self.tolerance
        )
    }
}

fn row(
    suite: &'static str,
    d: usize,
    n: usize,
    cases: usize,
    max_defect: f64,
    tolerance: f64,
) -> SuiteRow {
    SuiteRow {
        suite,
        d,
        n,
        cases,
        max_defect,
        tolerance,
        pass: max_defect <= tolerance,
    }
}

/// Stream `(suite, n)` of the seeded generator.
fn rng_for(seed: u64, suite: u64, n: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite << 16 | n as u64);
    rng
}

/// Runs every property suite for `d` and each `n` in the configured range.
pub fn run_suites(cfg: &Config, seed: u64) -> Result<Vec<SuiteRow>, CliError> {
    let d = cfg.d.unwrap_or(2);
    if d < 2 {
        return Err(CliError::Parse("verify needs d ≥ 2".into()));
    }
    let ns = cfg.ns(1, 6)?;
    let samples = cfg.samples.unwrap_or(10);
    let mut rows = Vec::new();
    for n in ns {
        symtypes::tensor_dim(d, n)?;
        let dec = Decomposition::shared(d, n)?;
        rows.push(kostka_sum(d, n));
        rows.push(kostka_dominance(d, n));
        rows.push(characters(d, n));
        rows.push(row(
            "completeness",
            d,
            n,
            dec.sectors().len(),
            schur_weyl::completeness_check(d, n, &Basis::computational(d))?,
            1e-9,
        ));
        rows.extend(projector_algebra(&dec)?);
        rows.push(block_weights(&dec, samples, &mut rng_for(seed, 1, n))?);
        rows.push(spectral_estimate(d, n, samples, &mut rng_for(seed, 2, n))?);
        rows.push(schur_horn(d, n, samples, &mut rng_for(seed, 3, n))?);
        rows.extend(sanov_bounds(d, n)?);
        rows.push(dim_ratio(d, n)?);
        rows.push(dimension_sandwich(d, n));
    }
    Ok(rows)
}

fn kostka_sum(d: usize, n: usize) -> SuiteRow {
    let frames = tableaux::enumerate_frames(d, n);
    let freqs = tableaux::enumerate_frequencies(d, n);
    let worst = freqs
        .iter()
        .map(|f| {
            let total: u128 = frames
                .iter()
                .map(|l| tableaux::kostka(f, l) as u128 * tableaux::hook_dimension(l))
                .sum();
            total.abs_diff(tableaux::type_class_size(f)) as f64
        })
        .fold(0.0, f64::max);
    row("kostka_sum", d, n, freqs.len(), worst, 0.0)
}

fn kostka_dominance(d: usize, n: usize) -> SuiteRow {
    let frames = tableaux::enumerate_frames(d, n);
    let freqs = tableaux::enumerate_frequencies(d, n);
    let mismatches = freqs
        .iter()
        .flat_map(|f| {
            frames
                .iter()
                .map(move |l| (tableaux::kostka(f, l) > 0) != tableaux::dominance(f, l))
        })
        .filter(|&bad| bad)
        .count();
    row(
        "kostka_dominance",
        d,
        n,
        freqs.len() * frames.len(),
        mismatches as f64,
        0.0,
    )
}

fn characters(d: usize, n: usize) -> SuiteRow {
    let table = CharacterTable::new(n);
    let m = table.orthogonality_matrix();
    let nf = tableaux::factorial(n) as i128;
    let mut worst = 0i128;
    for (i, r) in m.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            worst = worst.max((v - if i == j { nf } else { 0 }).abs());
        }
    }
    row("character_orthogonality", d, n, m.len(), worst as f64, 0.0)
}

fn projector_algebra(dec: &std::sync::Arc<Decomposition>) -> Result<Vec<SuiteRow>, CliError> {
    let (d, n) = (dec.d(), dec.n());
    let mut defect = 0.0f64;
    let mut trace_err = 0.0f64;
    let mut cases = 0;
    for (si, s) in dec.sectors().iter().enumerate() {
        for (li, l) in dec.frames().iter().enumerate() {
            let p = BlockOperator::from_labels(dec.clone(), Basis::computational(d), &[(si, li)]);
            defect = defect.max(p.projector_defect());
            let expected = tableaux::kostka(&s.freq, l) as f64 * tableaux::hook_dimension(l) as f64;
            trace_err = trace_err.max((p.trace() - expected).abs());
            cases += 1;
        }
    }
    Ok(vec![
        row("projector_idempotent", d, n, cases, defect, 1e-9),
        row("projector_trace", d, n, cases, trace_err, 1e-6),
    ])
}

/// `Σ_{f,λ} tr{P_{f,λ} ρ₁⊗…⊗ρ_n} = 1` with every term in `[0, 1]`, for
/// random product states in a random basis.
fn block_weights(
    dec: &std::sync::Arc<Decomposition>,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteRow, CliError> {
    let (d, n) = (dec.d(), dec.n());
    let basis = Basis::new(quantum::haar_unitary(d, rng))?;
    let mut worst = 0.0f64;
    for _ in 0..samples.min(4) {
        let states: Vec<DensityMatrix> = (0..n).map(|_| quantum::random_state(d, rng)).collect();
        let mut total = 0.0;
        for s in dec.sectors() {
            for l in dec.frames() {
                let w = schur_weyl::block_weight(&s.freq, l, &states, &basis)?;
                worst = worst.max(-w).max(w - 1.0);
                total += w;
            }
        }
        worst = worst.max((total - 1.0).abs());
    }
    Ok(row("block_weights", d, n, samples.min(4), worst, 1e-9))
}

fn spectral_estimate(
    d: usize,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteRow, CliError> {
    let frames = tableaux::enumerate_frames(d, n);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let rho = quantum::random_state(d, rng);
        for l in &frames {
            let (lhs, rhs) = schur_weyl::spectral_estimate_check(l, &rho, n)?;
            worst = worst.max(lhs - rhs);
        }
    }
    Ok(row(
        "spectral_estimate",
        d,
        n,
        samples * frames.len(),
        worst.max(0.0),
        1e-12,
    ))
}

/// Spectrum and computational-basis diagonal of the constructed state.
fn schur_horn(
    d: usize,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteRow, CliError> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let spec = quantum::random_probvec(d, rng);
        let u = quantum::haar_unitary(d, rng);
        let diag_m = diag_matrix(&spec);
        let mixed = &u * diag_m * u.adjoint();
        let diag = ProbVec::renormalized((0..d).map(|i| mixed[(i, i)].re.max(0.0)).collect())?;
        let rho = quantum::state_with_spectrum_and_diagonal(&spec, &diag)?;
        let got = quantum::spectrum(&rho);
        worst = worst.max(got.l1_distance(&spec.sorted_desc()));
        let pinched = quantum::pinch(&rho, &Basis::computational(d));
        worst = worst.max(pinched.l1_distance(&diag));
    }
    Ok(row("schur_horn", d, n, samples, worst, 1e-8))
}

fn diag_matrix(p: &ProbVec) -> quantum::CMatrix {
    let d = p.len();
    quantum::CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            p.weights()[i].into()
        } else {
            0.0.into()
        }
    })
}

/// Type-II error against `2^{−n(D−Θ)}` and the Neyman-Pearson ordering, for
/// `ρ = diag(d, d−1, …, 1)/Σ` against the maximally mixed state.
fn sanov_bounds(d: usize, n: usize) -> Result<Vec<SuiteRow>, CliError> {
    let total = (d * (d + 1) / 2) as f64;
    let rho =
        DensityMatrix::from_diagonal(&(0..d).map(|i| (d - i) as f64 / total).collect::<Vec<_>>())?;
    let sigma = DensityMatrix::maximally_mixed(d);
    let spec = TestSpec::new(sigma, NullSet::Points(vec![rho]), 0.25, n)?;
    let report = hypotest::run_sanov(&spec, &[n], hypotest::EpsilonChoice::Fixed(0.25))?.remove(0);
    let excess = (report.type2 - report.type2_bound).max(0.0);
    let np_excess = (report.np_beta - report.type2).max(0.0);
    Ok(vec![
        row("sanov_type_two", d, n, 1, excess, 1e-12),
        row("np_ordering", d, n, 1, np_excess, 1e-9),
    ])
}

fn dim_ratio(d: usize, n: usize) -> Result<SuiteRow, CliError> {
    let frames = tableaux::enumerate_frames(d, n);
    let mut worst = 0.0f64;
    for l in &frames {
        let (ratio, bound) = nogo::dim_ratio_bound(l, d, n)?;
        worst = worst.max(bound - ratio);
    }
    Ok(row("dim_ratio", d, n, frames.len(), worst.max(0.0), 0.0))
}

fn dimension_sandwich(d: usize, n: usize) -> SuiteRow {
    let frames = tableaux::enumerate_frames(d, n);
    let mut worst = 0.0f64;
    for l in &frames {
        let dim = tableaux::hook_dimension(l) as f64;
        let (lo, hi) = tableaux::dimension_bounds(l);
        worst = worst.max((lo - dim) / dim).max((dim - hi) / dim);
    }
    row(
        "dimension_sandwich",
        d,
        n,
        frames.len(),
        worst.max(0.0),
        1e-12,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let cfg = Config {
            n_range: Some([2, 4]),
            samples: Some(3),
            ..Config::default()
        };
        let rows = run_suites(&cfg, 7).unwrap();
        assert!(
            rows.iter().all(|r| r.pass),
            "{:?}",
            rows.iter().filter(|r| !r.pass).collect::<Vec<_>>()
        );
    }

    #[test]
    fn d1_rejected() {
        let cfg = Config {
            d: Some(1),
            ..Config::default()
        };
        assert!(run_suites(&cfg, 0).is_err());
    }
}
