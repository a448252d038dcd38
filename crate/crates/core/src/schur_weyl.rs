//! The permutation action of `S_n` on `(C^d)^{⊗n}` and the projector family
//! `P_{f,λ} = P_f · P_λ`.
//!
//! Basis words `(i₁,…,i_n)` are encoded as integers `Σ i_k d^{n−1−k}`, so
//! the first tensor factor is the most significant digit (Kronecker order).
//!
//! `P_f` is diagonal in any product basis `b_{i₁}⊗…⊗b_{i_n}`, and `P_λ`
//! commutes with `V^{⊗n}` for every unitary `V`. The matrix elements of
//! `P_{f,λ}` between product basis words therefore do not depend on the
//! chosen single-site basis, which lets one real [`Decomposition`] serve every
//! basis.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::quantum::{self, Basis, CMatrix, DensityMatrix};
use crate::tableaux::{
    self, enumerate_frames, enumerate_frequencies, factorial, Frequency, YoungFrame,
};
use crate::{tensor_dim, Error, Result};

/// Largest `n` for which the `n!` class sums are formed.
pub const MAX_N: usize = 10;
/// Largest `n` accepted once `d ≥ 3`.
pub const MAX_N_QUTRIT: usize = 8;
/// Largest `d^n` for which dense `d^n × d^n` matrices are materialized.
pub const DENSE_LIMIT: usize = 4096;

/// A permutation of `{0, …, n−1}`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Invalid(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// The transposition of positions `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(i, j);
        Self(v)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Permutation(inv)
    }

    /// Cycle lengths in decreasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i];
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }
}

/// Digits of a word code, first tensor factor first.
pub fn word_digits(mut code: usize, d: usize, n: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    for k in (0..n).rev() {
        out[k] = (code % d) as u8;
        code /= d;
    }
    out
}

pub fn word_code(digits: &[u8], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x as usize)
}

/// `U_π` acting on basis words: `U_π e_{i₁}⊗…⊗e_{i_n} = e_{j₁}⊗…⊗e_{j_n}`
/// with `j_{π(k)} = i_k`, so that `U_π U_τ = U_{π∘τ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermOperator {
    d: usize,
    perm: Permutation,
    map: Vec<usize>,
}

pub fn perm_action(pi: &Permutation, d: usize, n: usize) -> Result<PermOperator> {
    if pi.len() != n {
        return Err(Error::Invalid(format!(
            "permutation acts on {} points, expected {n}",
            pi.len()
        )));
    }
    let dim = tensor_dim(d, n)?;
    let pows = digit_weights(d, n);
    let map = (0..dim)
        .map(|code| {
            let w = word_digits(code, d, n);
            (0..n).map(|k| w[k] as usize * pows[pi.apply(k)]).sum()
        })
        .collect();
    Ok(PermOperator {
        d,
        perm: pi.clone(),
        map,
    })
}

fn digit_weights(d: usize, n: usize) -> Vec<usize> {
    (0..n).map(|p| d.pow((n - 1 - p) as u32)).collect()
}

impl PermOperator {
    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    /// Index of `U_π e_w`.
    pub fn apply_index(&self, w: usize) -> usize {
        self.map[w]
    }

    /// `U_π v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (w, &x) in v.iter().enumerate() {
            out[self.map[w]] = x;
        }
        out
    }

    /// `U_π A U_π†`.
    pub fn conjugate(&self, a: &CMatrix) -> CMatrix {
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                out[(self.map[r], self.map[c])] = a[(r, c)];
            }
        }
        out
    }

    /// Composition as index maps: `(self ∘ other)` acting on words.
    pub fn compose(&self, other: &PermOperator) -> PermOperator {
        PermOperator {
            d: self.d,
            perm: self.perm.compose(&other.perm),
            map: other.map.iter().map(|&w| self.map[w]).collect(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (w, &img) in self.map.iter().enumerate() {
            m[(img, w)] = 1.0;
        }
        m
    }
}

/// All partitions of `n` (every cycle type of `S_n`), decreasing lex order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    enumerate_frames(n.max(1), n)
        .into_iter()
        .map(|l| l.parts().to_vec())
        .collect()
}

/// Size of the conjugacy class with cycle type `mu`: `n! / ∏ k^{m_k} m_k!`.
pub fn class_size(mu: &[usize]) -> u128 {
    let n: usize = mu.iter().sum();
    let mut denom: u128 = 1;
    let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in mu {
        *mult.entry(k).or_default() += 1;
    }
    for (k, m) in mult {
        denom *= (k as u128).pow(m as u32) * factorial(m);
    }
    factorial(n) / denom
}

/// `χ_λ(μ)` by the Murnaghan-Nakayama rule, removing rim hooks of length
/// `μ₁, μ₂, …` in turn.
pub fn character(lambda: &[usize], mu: &[usize]) -> i64 {
    let mut memo = HashMap::new();
    mn_rec(lambda.to_vec(), mu, &mut memo)
}

fn mn_rec(lambda: Vec<usize>, mu: &[usize], memo: &mut HashMap<(Vec<usize>, usize), i64>) -> i64 {
    let Some((&r, rest)) = mu.split_first() else {
        return i64::from(lambda.is_empty());
    };
    let key = (lambda.clone(), mu.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    // Beta numbers: removing a rim hook of length r moves one bead down by r.
    let len = lambda.len();
    let beta: Vec<usize> = lambda
        .iter()
        .enumerate()
        .map(|(i, &p)| p + len - 1 - i)
        .collect();
    let mut total = 0;
    for (i, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let crossed = beta.iter().filter(|&&x| x > b - r && x < b).count();
        let mut nb = beta.clone();
        nb[i] = b - r;
        nb.sort_unstable_by(|a, b| b.cmp(a));
        let shape: Vec<usize> = nb
            .iter()
            .enumerate()
            .map(|(j, &x)| x - (len - 1 - j))
            .filter(|&p| p > 0)
            .collect();
        let sign = if crossed % 2 == 0 { 1 } else { -1 };
        total += sign * mn_rec(shape, rest, memo);
    }
    memo.insert(key, total);
    total
}

/// Full character table of `S_n`: rows are irreducibles, columns cycle types,
/// both in decreasing lex order.
#[derive(Debug, Clone, Serialize)]
pub struct CharacterTable {
    pub n: usize,
    pub irreps: Vec<Vec<usize>>,
    pub classes: Vec<Vec<usize>>,
    pub values: Vec<Vec<i64>>,
}

impl CharacterTable {
    pub fn new(n: usize) -> Self {
        let parts = partitions(n);
        let values = parts
            .par_iter()
            .map(|l| parts.iter().map(|m| character(l, m)).collect())
            .collect();
        Self {
            n,
            irreps: parts.clone(),
            classes: parts,
            values,
        }
    }

    pub fn class_index(&self, mu: &[usize]) -> Option<usize> {
        self.classes.iter().position(|c| c == mu)
    }

    pub fn irrep_index(&self, lambda: &[usize]) -> Option<usize> {
        self.irreps.iter().position(|c| c == lambda)
    }

    /// `Σ_μ |C_μ| χ_λ(μ) χ_λ'(μ)` for every pair, which should be `n!·δ`.
    pub fn orthogonality_matrix(&self) -> Vec<Vec<i128>> {
        let sizes: Vec<i128> = self.classes.iter().map(|c| class_size(c) as i128).collect();
        self.values
            .iter()
            .map(|a| {
                self.values
                    .iter()
                    .map(|b| {
                        (0..sizes.len())
                            .map(|k| sizes[k] * a[k] as i128 * b[k] as i128)
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Pack a cycle type into a sortable key (multiplicity of length `k` in
/// bits `4(k−1)..4k`). Valid for `n ≤ 15`.
fn cycle_key(perm: &[usize], seen: &mut [bool]) -> u64 {
    seen.iter_mut().for_each(|s| *s = false);
    let mut key = 0u64;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        key += 1u64 << (4 * (len - 1));
    }
    key
}

fn partition_key(mu: &[usize]) -> u64 {
    mu.iter().map(|&k| 1u64 << (4 * (k - 1))).sum()
}

/// The words of one type class `T_f` with the blocks `P_{f,λ}` restricted to
/// `span{e_w : w ∈ T_f}`.
#[derive(Debug, Clone)]
pub struct FrequencySector {
    pub freq: Frequency,
    /// Word codes in increasing order.
    pub words: Vec<usize>,
    /// Digits of `words`, row-major `|T_f| × n`.
    digits: Vec<u8>,
    /// One block per Young frame, indexed like [`Decomposition::frames`].
    pub blocks: Vec<DMatrix<f64>>,
}

impl FrequencySector {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, local: usize, n: usize) -> &[u8] {
        &self.digits[local * n..(local + 1) * n]
    }
}

/// All projectors `P_{f,λ}` for one `(d, n)`, as real blocks on the type
/// classes.
#[derive(Debug)]
pub struct Decomposition {
    d: usize,
    n: usize,
    frames: Vec<YoungFrame>,
    sectors: Vec<FrequencySector>,
    /// `(sector, local index)` of every word code.
    locate: Vec<(u32, u32)>,
}

fn check_construction_size(d: usize, n: usize) -> Result<usize> {
    if d == 0 || n == 0 {
        return Err(Error::Domain("need d ≥ 1 and n ≥ 1".into()));
    }
    let cap = if d >= 3 { MAX_N_QUTRIT } else { MAX_N };
    if n > cap {
        return Err(Error::Guard {
            what: "tensor power n for projector construction",
            needed: n as u128,
            limit: cap as u128,
        });
    }
    tensor_dim(d, n)
}

static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Decomposition>>>> = OnceLock::new();

impl Decomposition {
    /// Cached construction shared across threads.
    pub fn shared(d: usize, n: usize) -> Result<Arc<Self>> {
        check_construction_size(d, n)?;
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(dec) = cache.lock().expect("cache poisoned").get(&(d, n)) {
            return Ok(Arc::clone(dec));
        }
        let dec = Arc::new(Self::new(d, n)?);
        let mut guard = cache.lock().expect("cache poisoned");
        Ok(Arc::clone(guard.entry((d, n)).or_insert(dec)))
    }

    /// Builds every `P_{f,λ}` from the central idempotents
    /// `P_λ = (dim F_λ / n!) Σ_π χ_λ(π) U_π`.
    ///
    /// For each type class one sweep over `S_n` records, per image word and
    /// cycle type, how many `π` carry the sorted reference word `w₀` there.
    /// Any other column `w = σ w₀` follows from
    /// `⟨w'|P_λ|σw₀⟩ = ⟨σ⁻¹w'|P_λ|w₀⟩`, since characters are class functions.
    pub fn new(d: usize, n: usize) -> Result<Self> {
        let dim = check_construction_size(d, n)?;
        let frames = enumerate_frames(d, n);
        let freqs = enumerate_frequencies(d, n);
        let pows = digit_weights(d, n);

        let mut locate = vec![(u32::MAX, u32::MAX); dim];
        let mut sector_words: Vec<Vec<usize>> = vec![Vec::new(); freqs.len()];
        let sector_of: HashMap<Vec<usize>, usize> = freqs
            .iter()
            .enumerate()
            .map(|(i, f)| (f.counts().to_vec(), i))
            .collect();
        for code in 0..dim {
            let w = word_digits(code, d, n);
            let mut counts = vec![0usize; d];
            for &x in &w {
                counts[x as usize] += 1;
            }
            let s = sector_of[&counts];
            locate[code] = (s as u32, sector_words[s].len() as u32);
            sector_words[s].push(code);
        }

        let classes = partitions(n);
        let class_keys: Vec<u64> = classes.iter().map(|c| partition_key(c)).collect();
        let mut key_order: Vec<usize> = (0..classes.len()).collect();
        key_order.sort_by_key(|&i| class_keys[i]);
        let sorted_keys: Vec<u64> = key_order.iter().map(|&i| class_keys[i]).collect();
        let nclass = classes.len();

        // Nonzero letters of each reference word: (position, letter).
        let refs: Vec<Vec<(usize, usize)>> = freqs
            .iter()
            .map(|f| {
                let mut out = Vec::new();
                let mut pos = 0;
                for (letter, &c) in f.counts().iter().enumerate() {
                    for _ in 0..c {
                        if letter > 0 {
                            out.push((pos, letter));
                        }
                        pos += 1;
                    }
                }
                out
            })
            .collect();

        let zero_counts = || -> Vec<Vec<u32>> {
            sector_words
                .iter()
                .map(|w| vec![0u32; w.len() * nclass])
                .collect()
        };
        let counts = (0..n)
            .into_par_iter()
            .map(|first| {
                let mut acc = zero_counts();
                let mut seen = vec![false; n];
                let rest: Vec<usize> = (0..n).filter(|&x| x != first).collect();
                for_each_permutation(&rest, |tail| {
                    let mut perm = Vec::with_capacity(n);
                    perm.push(first);
                    perm.extend_from_slice(tail);
                    let key = cycle_key(&perm, &mut seen);
                    let cls = key_order[sorted_keys
                        .binary_search(&key)
                        .expect("cycle type is a partition")];
                    for (s, r) in refs.iter().enumerate() {
                        let code: usize = r.iter().map(|&(j, letter)| letter * pows[perm[j]]).sum();
                        let local = locate[code].1 as usize;
                        acc[s][local * nclass + cls] += 1;
                    }
                });
                acc
            })
            .reduce(zero_counts, |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for (u, v) in x.iter_mut().zip(y) {
                        *u += v;
                    }
                }
                a
            });

        let nfact = factorial(n) as f64;
        let chars: Vec<Vec<f64>> = frames
            .iter()
            .map(|l| {
                classes
                    .iter()
                    .map(|m| character(l.parts(), m) as f64)
                    .collect()
            })
            .collect();
        let dims: Vec<f64> = frames
            .iter()
            .map(|l| tableaux::hook_dimension(l) as f64)
            .collect();

        let sectors = freqs
            .into_par_iter()
            .zip(sector_words.into_par_iter())
            .zip(counts.into_par_iter())
            .map(|((freq, words), cnt)| {
                let m = words.len();
                let digits: Vec<u8> = words.iter().flat_map(|&c| word_digits(c, d, n)).collect();
                // First-column values ⟨w'|P_λ|w₀⟩ for every λ.
                let coef: Vec<Vec<f64>> = (0..frames.len())
                    .map(|l| {
                        (0..m)
                            .map(|a| {
                                let row = &cnt[a * nclass..(a + 1) * nclass];
                                let s: f64 =
                                    row.iter().zip(&chars[l]).map(|(&c, &x)| c as f64 * x).sum();
                                dims[l] * s / nfact
                            })
                            .collect()
                    })
                    .collect();
                let mut blocks = vec![DMatrix::zeros(m, m); frames.len()];
                // Start offsets of each letter inside the sorted reference word.
                let mut starts = vec![0usize; d];
                for letter in 1..d {
                    starts[letter] = starts[letter - 1] + freq.counts()[letter - 1];
                }
                let mut sigma = vec![0usize; n];
                let mut fill = vec![0usize; d];
                let mut x = vec![0u8; n];
                for b in 0..m {
                    let w = &digits[b * n..(b + 1) * n];
                    fill.iter_mut().for_each(|f| *f = 0);
                    // σ maps the t-th slot of letter a in w₀ to the t-th
                    // occurrence of a in w.
                    for (pos, &letter) in w.iter().enumerate() {
                        let l = letter as usize;
                        sigma[starts[l] + fill[l]] = pos;
                        fill[l] += 1;
                    }
                    for a in 0..m {
                        let wp = &digits[a * n..(a + 1) * n];
                        for j in 0..n {
                            x[j] = wp[sigma[j]];
                        }
                        let idx = locate[word_code(&x, d)].1 as usize;
                        for (l, block) in blocks.iter_mut().enumerate() {
                            block[(a, b)] = coef[l][idx];
                        }
                    }
                }
                FrequencySector {
                    freq,
                    words,
                    digits,
                    blocks,
                }
            })
            .collect();

        Ok(Self {
            d,
            n,
            frames,
            sectors,
            locate,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.locate.len()
    }

    pub fn frames(&self) -> &[YoungFrame] {
        &self.frames
    }

    pub fn sectors(&self) -> &[FrequencySector] {
        &self.sectors
    }

    pub fn frame_index(&self, lambda: &YoungFrame) -> Option<usize> {
        self.frames.iter().position(|l| l.parts() == lambda.parts())
    }

    pub fn sector_index(&self, f: &Frequency) -> Option<usize> {
        self.sectors
            .iter()
            .position(|s| s.freq.counts() == f.counts())
    }

    /// `(sector, local index)` of a word code.
    pub fn locate(&self, code: usize) -> (usize, usize) {
        let (s, l) = self.locate[code];
        (s as usize, l as usize)
    }

    pub fn block(&self, sector: usize, frame: usize) -> &DMatrix<f64> {
        &self.sectors[sector].blocks[frame]
    }

    /// `P_λ v` for a vector in product-basis coordinates.
    pub fn apply_isotypic(&self, frame: usize, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for s in &self.sectors {
            let block = &s.blocks[frame];
            for (a, &wa) in s.words.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (b, &wb) in s.words.iter().enumerate() {
                    acc += v[wb] * block[(a, b)];
                }
                out[wa] = acc;
            }
        }
        out
    }

    fn resolve(&self, f: &Frequency, lambda: &YoungFrame) -> Result<(usize, usize)> {
        if f.d() != self.d || f.n() != self.n || lambda.n() != self.n {
            return Err(Error::Invalid(format!(
                "labels {f}, {lambda} do not match d = {}, n = {}",
                self.d, self.n
            )));
        }
        let s = self
            .sector_index(f)
            .ok_or_else(|| Error::Invalid(format!("unknown frequency {f}")))?;
        let l = self.frame_index(lambda).ok_or_else(|| {
            Error::Invalid(format!("frame {lambda} has more than d = {} rows", self.d))
        })?;
        Ok((s, l))
    }
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
fn for_each_permutation(items: &[usize], mut f: impl FnMut(&[usize])) {
    let mut a = items.to_vec();
    let k = a.len();
    let mut c = vec![0usize; k];
    f(&a);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `tr{B · (F₁ ⊗ … ⊗ F_n)}` restricted to one sector, with the factors given
/// in the same product basis as the block.
fn sector_expectation(
    sector: &FrequencySector,
    block: &DMatrix<f64>,
    factors: &[CMatrix],
) -> Complex64 {
    let n = factors.len();
    let m = sector.len();
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..m {
        let wa = sector.word(a, n);
        for b in 0..m {
            let p = block[(a, b)];
            if p == 0.0 {
                continue;
            }
            let wb = sector.word(b, n);
            // (⊗F)_{b,a} = ∏_k F_k[w_b(k), w_a(k)]
            let mut x = Complex64::new(1.0, 0.0);
            for k in 0..n {
                x *= factors[k][(wb[k] as usize, wa[k] as usize)];
            }
            total += x * p;
        }
    }
    total
}

/// An operator that is block diagonal over the type classes of a product
/// basis, with real blocks: `P_n`, `P_λ`, `P_f` and their sums.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    dec: Arc<Decomposition>,
    basis: Basis,
    blocks: Vec<DMatrix<f64>>,
}

impl BlockOperator {
    pub fn zeros(dec: Arc<Decomposition>, basis: Basis) -> Self {
        let blocks = dec
            .sectors()
            .iter()
            .map(|s| DMatrix::zeros(s.len(), s.len()))
            .collect();
        Self { dec, basis, blocks }
    }

    pub fn identity(dec: Arc<Decomposition>, basis: Basis) -> Self {
        let blocks = dec
            .sectors()
            .iter()
            .map(|s| DMatrix::identity(s.len(), s.len()))
            .collect();
        Self { dec, basis, blocks }
    }

    /// `Σ P_{f,λ}` over the given `(sector, frame)` index pairs.
    pub fn from_labels(dec: Arc<Decomposition>, basis: Basis, labels: &[(usize, usize)]) -> Self {
        let mut op = Self::zeros(dec, basis);
        for &(s, l) in labels {
            op.blocks[s] += op.dec.block(s, l);
        }
        op
    }

    /// Replaces the sector blocks; shapes must match the type classes.
    pub fn with_blocks(self, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let ok = blocks.len() == self.blocks.len()
            && blocks
                .iter()
                .zip(&self.blocks)
                .all(|(a, b)| a.shape() == b.shape());
        if !ok {
            return Err(Error::Invalid(
                "block shapes do not match the type classes".into(),
            ));
        }
        Ok(Self { blocks, ..self })
    }

    pub fn decomposition(&self) -> &Arc<Decomposition> {
        &self.dec
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.dec.n()
    }

    pub fn d(&self) -> usize {
        self.dec.d()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// `tr{A (F₁ ⊗ … ⊗ F_n)}` with factors already in this operator's basis.
    pub fn expectation_in_basis(&self, factors: &[CMatrix]) -> Result<f64> {
        if factors.len() != self.n()
            || factors
                .iter()
                .any(|f| f.nrows() != self.d() || f.ncols() != self.d())
        {
            return Err(Error::Invalid(format!(
                "need {} factors of size {}",
                self.n(),
                self.d()
            )));
        }
        let parts: Vec<Complex64> = self
            .dec
            .sectors()
            .par_iter()
            .zip(self.blocks.par_iter())
            .map(|(s, b)| sector_expectation(s, b, factors))
            .collect();
        let total: Complex64 = parts.iter().sum();
        Ok(total.re)
    }

    /// `tr{A (ρ₁ ⊗ … ⊗ ρ_n)}` for states given in the standard frame.
    pub fn expectation(&self, states: &[DensityMatrix]) -> Result<f64> {
        let factors: Vec<CMatrix> = states.iter().map(|s| s.in_basis(&self.basis)).collect();
        self.expectation_in_basis(&factors)
    }

    /// `tr{A ρ^{⊗n}}`.
    pub fn expectation_iid(&self, rho: &DensityMatrix) -> Result<f64> {
        let r = rho.in_basis(&self.basis);
        self.expectation_in_basis(&vec![r; self.n()])
    }

    /// `max ‖A² − A‖` and `max ‖A − Aᵀ‖` over blocks, entrywise.
    pub fn projector_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let idem = (b * b - b).amax();
                let sym = (b - b.transpose()).amax();
                idem.max(sym)
            })
            .fold(0.0, f64::max)
    }

    /// Smallest and largest eigenvalue over all blocks.
    pub fn eigen_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for b in &self.blocks {
            if b.nrows() == 0 {
                continue;
            }
            let (vals, _) = quantum::eigh_real(b);
            hi = hi.max(vals[0]);
            lo = lo.min(*vals.last().expect("nonempty"));
        }
        (lo, hi)
    }

    /// Dense matrix in the coordinates of [`Self::basis`].
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.dec.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::Guard {
                what: "dense operator",
                needed: dim as u128,
                limit: DENSE_LIMIT as u128,
            });
        }
        let mut out = DMatrix::zeros(dim, dim);
        for (s, b) in self.dec.sectors().iter().zip(&self.blocks) {
            for (a, &wa) in s.words.iter().enumerate() {
                for (c, &wc) in s.words.iter().enumerate() {
                    out[(wa, wc)] = b[(a, c)];
                }
            }
        }
        Ok(out)
    }

    /// Dense matrix in the standard frame: `B^{⊗n} A B^{⊗n}†`.
    pub fn to_standard(&self) -> Result<CMatrix> {
        let dense = self.to_dense()?.map(|x| Complex64::new(x, 0.0));
        Ok(change_frame(&dense, &self.basis, self.n()))
    }

    /// Whether `U_π A U_π† = A` on sampled permutations (exact check on the
    /// sector blocks, no dense matrix needed).
    pub fn invariance_defect<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> f64 {
        let n = self.n();
        let d = self.d();
        let pows = digit_weights(d, n);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let pi = Permutation::random(n, rng);
            for (s, b) in self.dec.sectors().iter().zip(&self.blocks) {
                let image: Vec<usize> = (0..s.len())
                    .map(|a| {
                        let w = s.word(a, n);
                        let code: usize = (0..n).map(|k| w[k] as usize * pows[pi.apply(k)]).sum();
                        self.dec.locate(code).1
                    })
                    .collect();
                for a in 0..s.len() {
                    for c in 0..s.len() {
                        worst = worst.max((b[(image[a], image[c])] - b[(a, c)]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `B^{⊗n} A B^{⊗n}†` for a dense operator in basis coordinates.
pub fn change_frame(a: &CMatrix, basis: &Basis, n: usize) -> CMatrix {
    let big =
        quantum::tensor_product(&vec![basis.matrix().clone(); n]).expect("caller checked the size");
    &big * a * big.adjoint()
}

/// `(F₁ ⊗ … ⊗ F_n) v`, applied one tensor factor at a time.
pub fn apply_product(factors: &[CMatrix], v: &[Complex64]) -> Vec<Complex64> {
    let n = factors.len();
    let d = factors.first().map_or(1, |f| f.nrows());
    let mut cur = v.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); v.len()];
    for (k, f) in factors.iter().enumerate() {
        let stride = d.pow((n - 1 - k) as u32);
        let block = stride * d;
        for base in (0..v.len()).step_by(block) {
            for off in 0..stride {
                for i in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..d {
                        acc += f[(i, j)] * cur[base + j * stride + off];
                    }
                    next[base + i * stride + off] = acc;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `P_{f,λ}` with its labels.
#[derive(Debug, Clone)]
pub struct ProjectorBlock {
    pub f: Frequency,
    pub lambda: YoungFrame,
    pub basis: Basis,
    /// Word codes spanning `V_f`.
    pub words: Vec<usize>,
    /// The block on `span{b_w : w ∈ T_f}`; zero elsewhere.
    pub matrix: DMatrix<f64>,
    pub trace: f64,
}

#[derive(Debug, Serialize)]
pub struct ProjectorDump {
    pub d: usize,
    pub n: usize,
    pub f: Vec<usize>,
    pub lambda: Vec<usize>,
    pub trace: f64,
    pub matrix: Vec<[f64; 2]>,
}

impl ProjectorBlock {
    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn d(&self) -> usize {
        self.f.d()
    }

    /// Dense `d^n × d^n` matrix in basis coordinates.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = tensor_dim(self.d(), self.n())?;
        if dim > DENSE_LIMIT {
            return Err(Error::Guard {
                what: "dense projector",
                needed: dim as u128,
                limit: DENSE_LIMIT as u128,
            });
        }
        let mut out = DMatrix::zeros(dim, dim);
        for (a, &wa) in self.words.iter().enumerate() {
            for (b, &wb) in self.words.iter().enumerate() {
                out[(wa, wb)] = self.matrix[(a, b)];
            }
        }
        Ok(out)
    }

    /// Dense matrix in the standard frame.
    pub fn to_standard(&self) -> Result<CMatrix> {
        let dense = self.to_dense()?.map(|x| Complex64::new(x, 0.0));
        Ok(change_frame(&dense, &self.basis, self.n()))
    }

    /// JSON dump `{d, n, f, lambda, trace, matrix}` with the standard-frame
    /// matrix as row-major `[re, im]` pairs.
    pub fn dump(&self) -> Result<ProjectorDump> {
        let m = self.to_standard()?;
        let dim = m.nrows();
        let mut matrix = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                matrix.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        Ok(ProjectorDump {
            d: self.d(),
            n: self.n(),
            f: self.f.counts().to_vec(),
            lambda: self.lambda.parts().to_vec(),
            trace: self.trace,
            matrix,
        })
    }
}

/// `P_f` in the standard frame: the projector onto
/// `span{b_{i₁}⊗…⊗b_{i_n} : (i₁…i_n) ∈ T_f}`.
pub fn frequency_projector(f: &Frequency, basis: &Basis) -> Result<CMatrix> {
    let (d, n) = (f.d(), f.n());
    if basis.dim() != d {
        return Err(Error::Invalid(
            "basis dimension does not match the frequency".into(),
        ));
    }
    let dim = tensor_dim(d, n)?;
    if dim > DENSE_LIMIT {
        return Err(Error::Guard {
            what: "dense projector",
            needed: dim as u128,
            limit: DENSE_LIMIT as u128,
        });
    }
    let diag = CMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            return Complex64::new(0.0, 0.0);
        }
        let mut counts = vec![0usize; d];
        for x in word_digits(r, d, n) {
            counts[x as usize] += 1;
        }
        Complex64::new(if counts == f.counts() { 1.0 } else { 0.0 }, 0.0)
    });
    Ok(change_frame(&diag, basis, n))
}

/// `P_λ` as a dense real matrix; it is the same in every product basis.
pub fn isotypical_projector(lambda: &YoungFrame, d: usize, n: usize) -> Result<DMatrix<f64>> {
    let dec = Decomposition::shared(d, n)?;
    let l = dec
        .frame_index(lambda)
        .filter(|_| lambda.n() == n)
        .ok_or_else(|| Error::Invalid(format!("{lambda} is not a frame in Y_{{{d},{n}}}")))?;
    let labels: Vec<(usize, usize)> = (0..dec.sectors().len()).map(|s| (s, l)).collect();
    BlockOperator::from_labels(dec, Basis::computational(d), &labels).to_dense()
}

/// `P_{f,λ} = P_f P_λ` for the product basis built from `basis`.
pub fn block_projector(
    f: &Frequency,
    lambda: &YoungFrame,
    basis: &Basis,
) -> Result<ProjectorBlock> {
    let dec = Decomposition::shared(f.d(), f.n())?;
    if basis.dim() != f.d() {
        return Err(Error::Invalid(
            "basis dimension does not match the frequency".into(),
        ));
    }
    let (s, l) = dec.resolve(f, lambda)?;
    let matrix = dec.block(s, l).clone();
    Ok(ProjectorBlock {
        f: f.clone(),
        lambda: lambda.clone(),
        basis: basis.clone(),
        words: dec.sectors()[s].words.clone(),
        trace: matrix.trace(),
        matrix,
    })
}

/// `max |(Σ_{f,λ} P_{f,λ} − 𝟙)_{ij}|`, measured in the coordinates of the
/// product basis (operators with different `f` have disjoint supports there).
pub fn completeness_check(d: usize, n: usize, basis: &Basis) -> Result<f64> {
    if basis.dim() != d {
        return Err(Error::Invalid("basis dimension does not match d".into()));
    }
    let dec = Decomposition::shared(d, n)?;
    Ok(dec
        .sectors()
        .iter()
        .map(|s| {
            let mut sum = DMatrix::<f64>::zeros(s.len(), s.len());
            for b in &s.blocks {
                sum += b;
            }
            (sum - DMatrix::identity(s.len(), s.len())).amax()
        })
        .fold(0.0, f64::max))
}

/// `tr{P_{f,λ} (ρ₁ ⊗ … ⊗ ρ_n)}` with `P_f` defined through `basis`.
pub fn block_weight(
    f: &Frequency,
    lambda: &YoungFrame,
    states: &[DensityMatrix],
    basis: &Basis,
) -> Result<f64> {
    if states.len() != f.n() {
        return Err(Error::Invalid(format!(
            "need {} states, got {}",
            f.n(),
            states.len()
        )));
    }
    let dec = Decomposition::shared(f.d(), f.n())?;
    let (s, l) = dec.resolve(f, lambda)?;
    let factors: Vec<CMatrix> = states.iter().map(|r| r.in_basis(basis)).collect();
    Ok(sector_expectation(&dec.sectors()[s], dec.block(s, l), &factors).re)
}

/// `tr{P_{f,λ} (ρ₁ ⊗ … ⊗ ρ_n)}` for every label at once, indexed
/// `[sector][frame]` as in `dec`.
pub fn label_weights(
    dec: &Decomposition,
    basis: &Basis,
    states: &[DensityMatrix],
) -> Result<Vec<Vec<f64>>> {
    let n = dec.n();
    if states.len() != n || basis.dim() != dec.d() || states.iter().any(|s| s.dim() != dec.d()) {
        return Err(Error::Invalid(format!(
            "need {n} states of dimension {}",
            dec.d()
        )));
    }
    let factors: Vec<CMatrix> = states.iter().map(|r| r.in_basis(basis)).collect();
    Ok(dec
        .sectors()
        .par_iter()
        .map(|s| {
            let m = s.len();
            let gram = DMatrix::<f64>::from_fn(m, m, |a, b| {
                let (wa, wb) = (s.word(a, n), s.word(b, n));
                let mut x = Complex64::new(1.0, 0.0);
                for k in 0..n {
                    x *= factors[k][(wb[k] as usize, wa[k] as usize)];
                }
                x.re
            });
            s.blocks
                .iter()
                .map(|p| p.component_mul(&gram).sum())
                .collect()
        })
        .collect())
}

/// `tr{P_λ (ρ₁ ⊗ … ⊗ ρ_n)}`.
pub fn isotypic_weight(lambda: &YoungFrame, states: &[DensityMatrix]) -> Result<f64> {
    let n = states.len();
    let d = states
        .first()
        .map(DensityMatrix::dim)
        .ok_or_else(|| Error::Invalid("no states".into()))?;
    let dec = Decomposition::shared(d, n)?;
    let l = dec
        .frame_index(lambda)
        .filter(|_| lambda.n() == n)
        .ok_or_else(|| Error::Invalid(format!("bad frame {lambda}")))?;
    let factors: Vec<CMatrix> = states.iter().map(|r| r.matrix().clone()).collect();
    Ok(dec
        .sectors()
        .iter()
        .map(|s| sector_expectation(s, &s.blocks[l], &factors).re)
        .sum())
}

/// `(tr{P_λ ρ^{⊗n}}, (2n)^{d²} 2^{−n D(λ̄‖spec ρ)})`.
pub fn spectral_estimate_check(
    lambda: &YoungFrame,
    rho: &DensityMatrix,
    n: usize,
) -> Result<(f64, f64)> {
    let d = rho.dim() as f64;
    let lhs = isotypic_weight(lambda, &vec![rho.clone(); n])?;
    let div = tableaux::relative_entropy(&lambda.normalize(), &quantum::spectrum(rho));
    let rhs = (2.0 * n as f64).powf(d * d) * tableaux::exp2_neg(n as f64, div);
    Ok((lhs, rhs))
}

/// Orthonormal columns spanning one copy of the `U(d)` irrep paired with
/// `F_λ`: the image of `P_λ R_λ`, where `R_λ` symmetrizes over the row group
/// of `λ` (consecutive position blocks of sizes `λ₁, λ₂, …`).
///
/// Any operator `X` commuting with all `U_π` acts on `P_λ` as `𝟙_{F_λ} ⊗ X_λ`,
/// and `Bᵀ X B` is unitarily equivalent to `X_λ`.
pub fn isotypic_reduction(dec: &Decomposition, frame: usize) -> DMatrix<f64> {
    let (d, n) = (dec.d(), dec.n());
    let dim = dec.dim();
    let rows = dec.frames()[frame].parts().to_vec();
    let mut orbits: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for code in 0..dim {
        let w = word_digits(code, d, n);
        let mut key = Vec::with_capacity(n);
        let mut start = 0;
        for &r in &rows {
            let mut seg = w[start..start + r].to_vec();
            seg.sort_unstable();
            key.extend(seg);
            start += r;
        }
        orbits.entry(key).or_default().push(code);
    }
    let cols: Vec<Vec<f64>> = orbits
        .values()
        .map(|codes| {
            let norm = (codes.len() as f64).sqrt();
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            for &c in codes {
                v[c] = Complex64::new(1.0 / norm, 0.0);
            }
            dec.apply_isotypic(frame, &v)
                .into_iter()
                .map(|z| z.re)
                .collect()
        })
        .collect();
    let w = DMatrix::from_fn(dim, cols.len(), |r, c| cols[c][r]);
    let gram = w.transpose() * &w;
    let (vals, vecs) = quantum::eigh_real(&gram);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-9).collect();
    let mut out = DMatrix::zeros(dim, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        let col = &w * vecs.column(i) / vals[i].sqrt();
        out.set_column(k, &col);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::{hook_dimension, kostka, type_class_size};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frame(p: &[usize], d: usize) -> YoungFrame {
        YoungFrame::new(p.to_vec(), d).unwrap()
    }

    #[test]
    fn permutation_basics() {
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(3));
        assert_eq!(p.cycle_type(), vec![3]);
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn perm_action_examples() {
        let id = perm_action(&Permutation::identity(3), 2, 3).unwrap();
        assert_eq!(id.to_matrix(), DMatrix::identity(8, 8));
        let swap = perm_action(&Permutation::transposition(2, 0, 1), 2, 2).unwrap();
        // e0⊗e1 = code 1 ↦ e1⊗e0 = code 2
        assert_eq!(swap.apply_index(1), 2);
        assert_eq!(swap.apply_index(2), 1);
    }

    #[test]
    fn perm_action_is_a_representation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(1..=5);
            let d = rng.random_range(2..=3);
            let p = Permutation::random(n, &mut rng);
            let t = Permutation::random(n, &mut rng);
            let up = perm_action(&p, d, n).unwrap();
            let ut = perm_action(&t, d, n).unwrap();
            let upt = perm_action(&p.compose(&t), d, n).unwrap();
            assert_eq!(up.compose(&ut).map, upt.map);
            assert_eq!(up.to_matrix() * ut.to_matrix(), upt.to_matrix());
        }
    }

    #[test]
    fn character_examples() {
        for n in 1..=7 {
            for mu in partitions(n) {
                assert_eq!(character(&[n], &mu), 1);
                let sign = if (n - mu.len()) % 2 == 0 { 1 } else { -1 };
                assert_eq!(character(&vec![1; n], &mu), sign, "{mu:?}");
            }
            for l in partitions(n) {
                let lf = YoungFrame::new(l.clone(), n).unwrap();
                assert_eq!(character(&l, &vec![1; n]) as u128, hook_dimension(&lf));
            }
        }
        // χ_{(2,1)} on a 3-cycle is −1, on a transposition 0.
        assert_eq!(character(&[2, 1], &[3]), -1);
        assert_eq!(character(&[2, 1], &[2, 1]), 0);
    }

    #[test]
    fn class_sizes_sum_to_factorial() {
        for n in 1..=10 {
            let total: u128 = partitions(n).iter().map(|m| class_size(m)).sum();
            assert_eq!(total, factorial(n));
        }
    }

    #[test]
    fn qubit_pair_blocks() {
        let dec = Decomposition::new(2, 2).unwrap();
        let s = dec
            .sector_index(&Frequency::new(vec![1, 1]).unwrap())
            .unwrap();
        let sym = dec.block(s, 0);
        let anti = dec.block(s, 1);
        assert!((sym - DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5])).amax() < 1e-15);
        assert!((anti - DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5])).amax() < 1e-15);
        assert!((sym.trace() - 1.0).abs() < 1e-15 && (anti.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isotypical_qubit_pair_matches_swap_oracle() {
        let swap = perm_action(&Permutation::transposition(2, 0, 1), 2, 2)
            .unwrap()
            .to_matrix();
        let id = DMatrix::<f64>::identity(4, 4);
        let sym = isotypical_projector(&frame(&[2], 2), 2, 2).unwrap();
        let anti = isotypical_projector(&frame(&[1, 1], 2), 2, 2).unwrap();
        assert!((&sym - (&id + &swap) * 0.5).amax() < 1e-14);
        assert!((&anti - (&id - &swap) * 0.5).amax() < 1e-14);
        assert!((sym.trace() - 3.0).abs() < 1e-14 && (anti.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn block_traces_match_kostka_times_dimension() {
        for (d, nmax) in [(2, 6), (3, 6)] {
            for n in 1..=nmax {
                let dec = Decomposition::shared(d, n).unwrap();
                for s in dec.sectors() {
                    for (l, lambda) in dec.frames().iter().enumerate() {
                        let expect =
                            (kostka(&s.freq, lambda) as u128 * hook_dimension(lambda)) as f64;
                        assert!(
                            (s.blocks[l].trace() - expect).abs() < 1e-6,
                            "{} {}",
                            s.freq,
                            lambda
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn frequency_projectors_partition_identity() {
        let basis =
            Basis::new(quantum::haar_unitary(2, &mut ChaCha8Rng::seed_from_u64(2))).unwrap();
        let n = 4;
        let freqs = enumerate_frequencies(2, n);
        let projs: Vec<CMatrix> = freqs
            .iter()
            .map(|f| frequency_projector(f, &basis).unwrap())
            .collect();
        let total = projs.iter().fold(CMatrix::zeros(16, 16), |acc, p| acc + p);
        assert!((total - CMatrix::identity(16, 16)).camax() < 1e-12);
        for (i, p) in projs.iter().enumerate() {
            assert!((p.trace().re - type_class_size(&freqs[i]) as f64).abs() < 1e-12);
            for q in projs.iter().skip(i + 1) {
                assert!((p * q).camax() < 1e-12);
            }
        }
        for n in 1..=8 {
            for f in enumerate_frequencies(2, n) {
                let p = frequency_projector(&f, &Basis::computational(2)).unwrap();
                assert!((p.trace().re - type_class_size(&f) as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn isotypical_commutes_with_unitaries_and_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (d, n) = (2, 4);
        let v = quantum::haar_unitary(d, &mut rng);
        let big = quantum::tensor_product(&vec![v; n]).unwrap();
        for lambda in enumerate_frames(d, n) {
            let p = isotypical_projector(&lambda, d, n)
                .unwrap()
                .map(|x| Complex64::new(x, 0.0));
            assert!((&big * &p - &p * &big).camax() < 1e-10);
            let u = perm_action(&Permutation::random(n, &mut rng), d, n).unwrap();
            assert!((u.conjugate(&p) - &p).camax() < 1e-10);
            assert!((&p * &p - &p).camax() < 1e-10);
        }
        let total: f64 = enumerate_frames(d, n)
            .iter()
            .map(|l| isotypical_projector(l, d, n).unwrap().trace())
            .sum();
        assert!((total - 16.0).abs() < 1e-10);
    }

    #[test]
    fn block_projector_in_rotated_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let basis = Basis::new(quantum::haar_unitary(2, &mut rng)).unwrap();
        let f = Frequency::new(vec![2, 1]).unwrap();
        let lambda = frame(&[2, 1], 2);
        let blk = block_projector(&f, &lambda, &basis).unwrap();
        let p = blk.to_standard().unwrap();
        let pf = frequency_projector(&f, &basis).unwrap();
        let pl = isotypical_projector(&lambda, 2, 3)
            .unwrap()
            .map(|x| Complex64::new(x, 0.0));
        assert!((&p - &pf * &pl).camax() < 1e-12);
        assert!((&p - &pl * &pf).camax() < 1e-12);
        assert!((blk.trace - 2.0).abs() < 1e-12);
    }

    #[test]
    fn completeness_small_cases() {
        assert!(completeness_check(2, 2, &Basis::computational(2)).unwrap() <= 1e-12);
        assert!(completeness_check(2, 6, &Basis::computational(2)).unwrap() <= 1e-9);
        assert!(completeness_check(3, 4, &Basis::computational(3)).unwrap() <= 1e-9);
        assert!(matches!(
            completeness_check(2, 17, &Basis::computational(2)),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn block_weights() {
        let (d, n) = (2, 4);
        let basis = Basis::computational(d);
        let mixed = vec![DensityMatrix::maximally_mixed(d); n];
        let rho = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let iid = vec![rho.clone(); n];
        let mut total = 0.0;
        for f in enumerate_frequencies(d, n) {
            let mut per_f = 0.0;
            for lambda in enumerate_frames(d, n) {
                let blk = block_projector(&f, &lambda, &basis).unwrap();
                let w = block_weight(&f, &lambda, &mixed, &basis).unwrap();
                assert!((w - blk.trace / 16.0).abs() < 1e-12);
                let wr = block_weight(&f, &lambda, &iid, &basis).unwrap();
                per_f += wr;
                total += wr;
            }
            let c = f.counts();
            let multinomial =
                type_class_size(&f) as f64 * 0.7f64.powi(c[0] as i32) * 0.3f64.powi(c[1] as i32);
            assert!((per_f - multinomial).abs() < 1e-12);
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_estimate_examples() {
        let rho = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let (lhs, rhs) = spectral_estimate_check(&frame(&[8], 2), &rho, 8).unwrap();
        assert!(lhs <= rhs);
        let oracle: f64 = (0..=8).map(|k| 0.7f64.powi(8 - k) * 0.3f64.powi(k)).sum();
        assert!((lhs - oracle).abs() < 1e-12);
        let spec_match = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let (lhs, rhs) = spectral_estimate_check(&frame(&[6, 2], 2), &spec_match, 8).unwrap();
        assert!(rhs >= 1.0 && lhs <= 1.0);
    }

    #[test]
    fn apply_product_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let factors: Vec<CMatrix> = (0..3)
            .map(|_| quantum::random_state(2, &mut rng).into_matrix())
            .collect();
        let big = quantum::tensor_product(&factors).unwrap();
        let v: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new(i as f64, 1.0 - i as f64))
            .collect();
        let direct = &big * nalgebra::DVector::from_column_slice(&v);
        let fast = apply_product(&factors, &v);
        for i in 0..8 {
            assert!((direct[i] - fast[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn reduction_rank_is_sum_of_kostka_numbers() {
        for (d, n) in [(2, 5), (3, 4)] {
            let dec = Decomposition::shared(d, n).unwrap();
            for (l, lambda) in dec.frames().iter().enumerate() {
                let b = isotypic_reduction(&dec, l);
                let expect: u64 = enumerate_frequencies(d, n)
                    .iter()
                    .map(|f| kostka(f, lambda))
                    .sum();
                assert_eq!(b.ncols() as u64, expect);
                assert!(
                    (b.transpose() * &b - DMatrix::identity(b.ncols(), b.ncols())).amax() < 1e-10
                );
            }
        }
    }

    #[test]
    fn label_weights_match_block_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let dec = Decomposition::shared(2, 5).unwrap();
        let basis = Basis::new(quantum::haar_unitary(2, &mut rng)).unwrap();
        let states: Vec<DensityMatrix> =
            (0..5).map(|_| quantum::random_state(2, &mut rng)).collect();
        let w = label_weights(&dec, &basis, &states).unwrap();
        let mut total = 0.0;
        for (si, s) in dec.sectors().iter().enumerate() {
            for (li, l) in dec.frames().iter().enumerate() {
                let direct = block_weight(&s.freq, l, &states, &basis).unwrap();
                assert!((w[si][li] - direct).abs() < 1e-12);
                total += w[si][li];
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert!(label_weights(&dec, &basis, &states[..4]).is_err());
    }

    #[test]
    fn construction_guards() {
        assert!(matches!(
            Decomposition::shared(2, 11),
            Err(Error::Guard { .. })
        ));
        assert!(matches!(
            Decomposition::shared(3, 9),
            Err(Error::Guard { .. })
        ));
        assert!(Decomposition::shared(0, 3).is_err());
    }
}
