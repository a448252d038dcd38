//! Young frames, frequencies, Kostka numbers and classical entropies.
//!
//! All counting is done in exact integer arithmetic (`u128`), entropies in
//! `f64` with base-2 logarithms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pinsker constant `1/(2 ln 2)`: `D(p‖q) ≥ ALPHA · ‖p − q‖₁²` in bits.
pub const ALPHA: f64 = 1.0 / (2.0 * std::f64::consts::LN_2);

/// Tolerance used when validating probability vectors.
pub const PROB_TOL: f64 = 1e-12;

/// A weakly decreasing partition of `n` with at most `d` rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct YoungFrame {
    parts: Vec<usize>,
    d: usize,
}

impl YoungFrame {
    pub fn new(parts: Vec<usize>, d: usize) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Invalid(
                "a Young frame needs at least one box".into(),
            ));
        }
        if parts.contains(&0) {
            return Err(Error::Invalid("Young frame parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid(format!(
                "parts {parts:?} are not weakly decreasing"
            )));
        }
        if parts.len() > d {
            return Err(Error::Invalid(format!(
                "frame {parts:?} has more than d = {d} rows"
            )));
        }
        Ok(Self { parts, d })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Row cap `d` this frame was created with.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    /// Row lengths padded with zeros to length `d`.
    pub fn padded(&self) -> Vec<usize> {
        let mut v = self.parts.clone();
        v.resize(self.d, 0);
        v
    }

    /// `λ̄(i) = λ_i / n`, padded to length `d`.
    pub fn normalize(&self) -> ProbVec {
        normalize_counts(&self.padded())
    }

    /// The frame read as a frequency (row `i` ↦ letter `i`).
    pub fn as_frequency(&self) -> Frequency {
        Frequency {
            counts: self.padded(),
        }
    }
}

impl fmt::Display for YoungFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.parts)
    }
}

/// Letter counts `f: [d] → ℕ` with `Σ f(i) = n`, tied to a basis order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Frequency {
    counts: Vec<usize>,
}

impl Frequency {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Invalid("a frequency needs d ≥ 1 entries".into()));
        }
        if counts.iter().sum::<usize>() == 0 {
            return Err(Error::Invalid("a frequency needs n ≥ 1".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.counts.len()
    }

    pub fn normalize(&self) -> ProbVec {
        normalize_counts(&self.counts)
    }

    /// Counts sorted in decreasing order (basis order forgotten).
    pub fn sorted_desc(&self) -> Vec<usize> {
        let mut v = self.counts.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.counts)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, xs: &[usize]) -> fmt::Result {
    write!(f, "(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

fn normalize_counts(counts: &[usize]) -> ProbVec {
    let n: usize = counts.iter().sum();
    ProbVec(counts.iter().map(|&c| c as f64 / n as f64).collect())
}

/// A probability vector on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVec(Vec<f64>);

impl ProbVec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Invalid("empty probability vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Invalid(format!(
                "weights {weights:?} must be finite and ≥ 0"
            )));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > PROB_TOL {
            return Err(Error::Invalid(format!("weights sum to {s}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Clips negatives to zero and rescales to unit sum.
    pub fn renormalized(weights: Vec<f64>) -> Result<Self> {
        let clipped: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
        let s: f64 = clipped.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Invalid("cannot normalize a zero vector".into()));
        }
        Ok(Self(clipped.into_iter().map(|w| w / s).collect()))
    }

    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0 / d as f64; d])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖p − q‖₁`; a shorter vector is padded with zeros.
    pub fn l1_distance(&self, other: &ProbVec) -> f64 {
        let m = self.len().max(other.len());
        (0..m)
            .map(|i| {
                let a = self.0.get(i).copied().unwrap_or(0.0);
                let b = other.0.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .sum()
    }

    pub fn sorted_desc(&self) -> ProbVec {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        ProbVec(v)
    }
}

/// All partitions of `n` into at most `d` parts, in decreasing lexicographic
/// order (so `(n)` comes first).
pub fn enumerate_frames(d: usize, n: usize) -> Vec<YoungFrame> {
    let mut out = Vec::new();
    if d == 0 || n == 0 {
        return out;
    }
    let mut current = Vec::with_capacity(d);
    frames_rec(n, n, d, &mut current, &mut out);
    out
}

fn frames_rec(
    remaining: usize,
    max_part: usize,
    d: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<YoungFrame>,
) {
    if remaining == 0 {
        out.push(YoungFrame {
            parts: cur.clone(),
            d,
        });
        return;
    }
    if cur.len() == d {
        return;
    }
    for p in (1..=max_part.min(remaining)).rev() {
        cur.push(p);
        frames_rec(remaining - p, p, d, cur, out);
        cur.pop();
    }
}

/// All frequencies of length `d` summing to `n`, in decreasing lexicographic
/// order.
pub fn enumerate_frequencies(d: usize, n: usize) -> Vec<Frequency> {
    let mut out = Vec::new();
    if d == 0 || n == 0 {
        return out;
    }
    let mut cur = vec![0usize; d];
    freq_rec(0, n, &mut cur, &mut out);
    out
}

fn freq_rec(pos: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Frequency>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(Frequency {
            counts: cur.clone(),
        });
        return;
    }
    for c in (0..=remaining).rev() {
        cur[pos] = c;
        freq_rec(pos + 1, remaining - c, cur, out);
    }
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Dimension of the irreducible `S_n` representation `F_λ`, by the hook-length
/// formula `n! / ∏ h(i,j)`.
pub fn hook_dimension(lambda: &YoungFrame) -> u128 {
    let parts = lambda.parts();
    let mut hooks: u128 = 1;
    for (i, &row) in parts.iter().enumerate() {
        for j in 0..row {
            let arm = row - j - 1;
            let leg = parts[i + 1..].iter().filter(|&&r| r > j).count();
            hooks *= (arm + leg + 1) as u128;
        }
    }
    factorial(lambda.n()) / hooks
}

/// `(2^{n(H(λ̄) − (2d⁶/n)·log 2n)}, 2^{nH(λ̄)})`, the sandwich around `dim F_λ`.
pub fn dimension_bounds(lambda: &YoungFrame) -> (f64, f64) {
    let n = lambda.n() as f64;
    let d = lambda.d() as f64;
    let h = entropy(&lambda.normalize());
    let upper = (n * h).exp2();
    let lower = (n * h - 2.0 * d.powi(6) * (2.0 * n).log2()).exp2();
    (lower, upper)
}

/// `|T_f| = n! / ∏ f(i)!`.
pub fn type_class_size(f: &Frequency) -> u128 {
    let mut total: u128 = 1;
    let mut placed = 0usize;
    for &c in f.counts() {
        placed += c;
        total *= binomial(placed, c);
    }
    total
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i as u128 + 1);
    }
    acc
}

/// `((n+1)^{−d}·2^{nH(f̄)}, 2^{nH(f̄)})`, the sandwich around `|T_f|`.
pub fn type_class_bounds(f: &Frequency) -> (f64, f64) {
    let n = f.n() as f64;
    let d = f.d() as i32;
    let upper = (n * entropy(&f.normalize())).exp2();
    (upper / (n + 1.0).powi(d), upper)
}

/// `true` iff `x ≺ y`: equal totals and every partial sum of `y` (sorted
/// decreasingly) dominates the matching partial sum of `x`.
pub fn majorized_by(x: &[f64], y: &[f64], tol: f64) -> bool {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    ys.sort_by(|a, b| b.total_cmp(a));
    let m = xs.len().max(ys.len());
    xs.resize(m, 0.0);
    ys.resize(m, 0.0);
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..m {
        sx += xs[i];
        sy += ys[i];
        if sx > sy + tol {
            return false;
        }
    }
    (sx - sy).abs() <= tol
}

/// Dominance `f ≺ λ` with `f` sorted decreasingly first.
pub fn dominance(f: &Frequency, lambda: &YoungFrame) -> bool {
    if f.n() != lambda.n() {
        return false;
    }
    let fs = f.sorted_desc();
    let mut sf = 0usize;
    let mut sl = 0usize;
    for i in 0..fs.len().max(lambda.rows()) {
        sf += fs.get(i).copied().unwrap_or(0);
        sl += lambda.parts().get(i).copied().unwrap_or(0);
        if sf > sl {
            return false;
        }
    }
    true
}

/// Number of semistandard Young tableaux of shape `λ` and content `f`.
///
/// Letters are placed one at a time; the cells holding letter `k` form a
/// horizontal strip, so a tableau is a chain of shapes `∅ ⊂ μ¹ ⊂ … ⊂ λ` whose
/// successive differences are horizontal strips of sizes `f(1), f(2), …`.
pub fn kostka(f: &Frequency, lambda: &YoungFrame) -> u64 {
    if f.n() != lambda.n() {
        return 0;
    }
    let shape = lambda.parts();
    let mut mu = vec![0usize; shape.len()];
    strips(f.counts(), 0, shape, &mut mu)
}

fn strips(content: &[usize], letter: usize, shape: &[usize], mu: &mut [usize]) -> u64 {
    if letter == content.len() {
        return u64::from(mu == shape);
    }
    let prev = mu.to_vec();
    place_strip(content, letter, shape, &prev, mu, 0, content[letter])
}

fn place_strip(
    content: &[usize],
    letter: usize,
    shape: &[usize],
    prev: &[usize],
    mu: &mut [usize],
    row: usize,
    left: usize,
) -> u64 {
    if row == shape.len() {
        return if left == 0 {
            strips(content, letter + 1, shape, mu)
        } else {
            0
        };
    }
    // Horizontal strip: new row length lies between the old length and the
    // old length of the row above (and never exceeds the target shape).
    let cap = if row == 0 {
        shape[0]
    } else {
        prev[row - 1].min(shape[row])
    };
    let lo = prev[row];
    if cap < lo {
        return 0;
    }
    let mut total = 0;
    for add in 0..=(cap - lo).min(left) {
        mu[row] = lo + add;
        total += place_strip(content, letter, shape, prev, mu, row + 1, left - add);
    }
    mu[row] = lo;
    total
}

/// Shannon entropy in bits, with `0·log 0 = 0`.
pub fn entropy(p: &ProbVec) -> f64 {
    -p.weights()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// `D(p‖q)` in bits; `+∞` when `q` does not dominate `p`.
pub fn relative_entropy(p: &ProbVec, q: &ProbVec) -> f64 {
    let mut acc = 0.0;
    for i in 0..p.len().max(q.len()) {
        let a = p.weights().get(i).copied().unwrap_or(0.0);
        let b = q.weights().get(i).copied().unwrap_or(0.0);
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        acc += a * (a / b).log2();
    }
    acc.max(0.0)
}

/// `2^{−a·x}` with the convention `2^{−a·∞} = 0` for `a > 0`.
pub fn exp2_neg(a: f64, x: f64) -> f64 {
    if x.is_infinite() && a > 0.0 {
        return 0.0;
    }
    (-a * x).exp2()
}

/// `−θ·log(θ/|A|)`, the entropy continuity modulus for `‖p − q‖₁ ≤ θ ≤ ½`.
pub fn entropy_continuity_bound(theta: f64, alphabet_size: usize) -> Result<f64> {
    if !(0.0..=0.5).contains(&theta) {
        return Err(Error::Domain(format!(
            "theta = {theta} must lie in [0, 1/2]"
        )));
    }
    if alphabet_size == 0 {
        return Err(Error::Domain("alphabet must be nonempty".into()));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    Ok(-theta * (theta / alphabet_size as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(p: &[usize], d: usize) -> YoungFrame {
        YoungFrame::new(p.to_vec(), d).unwrap()
    }

    fn freq(c: &[usize]) -> Frequency {
        Frequency::new(c.to_vec()).unwrap()
    }

    #[test]
    fn frame_enumeration() {
        let parts = |d, n| -> Vec<Vec<usize>> {
            enumerate_frames(d, n)
                .into_iter()
                .map(|l| l.parts().to_vec())
                .collect()
        };
        assert_eq!(parts(1, 5), vec![vec![5]]);
        assert_eq!(parts(2, 3), vec![vec![3], vec![2, 1]]);
        assert_eq!(
            parts(3, 4),
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1]]
        );
    }

    #[test]
    fn frame_rejects_bad_input() {
        assert!(YoungFrame::new(vec![1, 2], 3).is_err());
        assert!(YoungFrame::new(vec![2, 0], 3).is_err());
        assert!(YoungFrame::new(vec![1, 1, 1], 2).is_err());
        assert!(Frequency::new(vec![0, 0]).is_err());
    }

    #[test]
    fn normalization() {
        assert_eq!(frame(&[3], 1).normalize().weights(), &[1.0]);
        let p = frame(&[2, 1], 2).normalize();
        assert!((p.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(freq(&[0, 4]).normalize().weights(), &[0.0, 1.0]);
    }

    #[test]
    fn hook_dimensions() {
        assert_eq!(hook_dimension(&frame(&[7], 1)), 1);
        assert_eq!(hook_dimension(&frame(&[2, 1], 2)), 2);
        assert_eq!(hook_dimension(&frame(&[2, 2], 2)), 2);
        assert_eq!(hook_dimension(&frame(&[3, 2], 2)), 5);
        assert_eq!(hook_dimension(&frame(&[1, 1, 1], 3)), 1);
    }

    #[test]
    fn dimension_bound_examples() {
        let (_, upper) = dimension_bounds(&frame(&[5], 2));
        assert_eq!(upper, 1.0);
        let (lower, upper) = dimension_bounds(&frame(&[2, 1], 2));
        assert!((upper - 6.75).abs() < 1e-12);
        assert!(lower <= 2.0 && 2.0 <= upper);
    }

    #[test]
    fn type_classes() {
        assert_eq!(type_class_size(&freq(&[5, 0])), 1);
        assert_eq!(type_class_size(&freq(&[2, 1])), 3);
        let f = freq(&[2, 2]);
        assert_eq!(type_class_size(&f), 6);
        let (lo, hi) = type_class_bounds(&f);
        assert!((hi - 16.0).abs() < 1e-12);
        assert!((lo - 16.0 / 25.0).abs() < 1e-12);
    }

    #[test]
    fn dominance_examples() {
        assert!(dominance(&freq(&[2, 1]), &frame(&[2, 1], 2)));
        assert!(dominance(&freq(&[1, 1, 1]), &frame(&[2, 1], 3)));
        assert!(!dominance(&freq(&[0, 3]), &frame(&[2, 1], 2)));
    }

    #[test]
    fn kostka_examples() {
        assert_eq!(kostka(&freq(&[2, 1]), &frame(&[2, 1], 2)), 1);
        assert_eq!(kostka(&freq(&[1, 1, 1]), &frame(&[2, 1], 3)), 2);
        assert_eq!(kostka(&freq(&[2, 0]), &frame(&[1, 1], 2)), 0);
        // K_{(1^n), λ} = dim F_λ
        assert_eq!(kostka(&freq(&[1, 1, 1, 1]), &frame(&[2, 2], 4)), 2);
    }

    /// Independent oracle: fill every cell with every letter and check the
    /// semistandard conditions directly.
    fn kostka_brute(f: &Frequency, lambda: &YoungFrame) -> u64 {
        let cells: Vec<(usize, usize)> = lambda
            .parts()
            .iter()
            .enumerate()
            .flat_map(|(i, &r)| (0..r).map(move |j| (i, j)))
            .collect();
        let d = f.d();
        let mut count = 0;
        let total = (d as u64).pow(cells.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut fill = vec![vec![0usize; lambda.parts()[0]]; lambda.rows()];
            let mut content = vec![0usize; d];
            for &(i, j) in &cells {
                let letter = (c % d as u64) as usize;
                c /= d as u64;
                fill[i][j] = letter;
                content[letter] += 1;
            }
            if content != f.counts() {
                continue;
            }
            let ok = cells.iter().all(|&(i, j)| {
                (j == 0 || fill[i][j - 1] <= fill[i][j]) && (i == 0 || fill[i - 1][j] < fill[i][j])
            });
            count += u64::from(ok);
        }
        count
    }

    #[test]
    fn kostka_matches_brute_force() {
        for d in 1..=3 {
            for n in 1..=6 {
                for lambda in enumerate_frames(d, n) {
                    for f in enumerate_frequencies(d, n) {
                        assert_eq!(
                            kostka(&f, &lambda),
                            kostka_brute(&f, &lambda),
                            "{f} {lambda}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn entropies() {
        assert!((entropy(&ProbVec::uniform(4)) - 2.0).abs() < 1e-15);
        let half = ProbVec::new(vec![0.5, 0.5]).unwrap();
        assert!((entropy(&half) - 1.0).abs() < 1e-15);
        assert_eq!(relative_entropy(&half, &half), 0.0);
        let point = ProbVec::new(vec![1.0, 0.0]).unwrap();
        assert!((relative_entropy(&point, &half) - 1.0).abs() < 1e-15);
        assert!(relative_entropy(&half, &point).is_infinite());
        assert_eq!(exp2_neg(2.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn continuity_bound_domain() {
        assert_eq!(entropy_continuity_bound(0.0, 4).unwrap(), 0.0);
        assert!(entropy_continuity_bound(0.6, 4).is_err());
        assert!(entropy_continuity_bound(0.25, 4).unwrap() > 0.0);
    }

    #[test]
    fn probvec_validation() {
        assert!(ProbVec::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVec::new(vec![-0.1, 1.1]).is_err());
        let p = ProbVec::renormalized(vec![2.0, -1e-13, 2.0]).unwrap();
        assert_eq!(p.weights(), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn majorization() {
        assert!(majorized_by(&[0.5, 0.5], &[1.0, 0.0], 1e-12));
        assert!(!majorized_by(&[1.0, 0.0], &[0.5, 0.5], 1e-12));
        assert!(majorized_by(&[0.2, 0.5, 0.3], &[0.6, 0.3, 0.1], 1e-12));
    }
}
