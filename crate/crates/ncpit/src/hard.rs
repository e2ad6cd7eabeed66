//! Hard polynomials (palindromes, moving palindromes, tree colourings) and
//! the coefficient-matrix ranks that witness their separations at small size.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::circuit::{Circuit, CircuitBuilder};
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::linalg::Matrix;
use crate::ncpoly::{NcPolynomial, Word};
use crate::perm::Perm;

/// Largest number of monomials a brute-force constructor will produce.
const MAX_TERMS: usize = 1 << 20;
/// Largest degree for which a sweep over all shufflings is run.
pub const MAX_SWEEP_DEGREE: usize = 7;

fn check_terms(count: u128, what: &str) -> Result<()> {
    if count > MAX_TERMS as u128 {
        return Err(Error::ScaleGuard(format!("{what} has {count} monomials")));
    }
    Ok(())
}

/// `Pal_d = Σ_{|w| = d/2} w·w^R` and a UPT circuit for it, built from
/// `Pal_d = Σ_i x_i · Pal_{d-2} · x_i`.
pub fn palindrome(n: usize, d: usize) -> Result<(NcPolynomial, Circuit)> {
    if n == 0 || d == 0 || !d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("palindrome needs n > 0 and a positive even degree, got n={n}, d={d}")));
    }
    check_terms((n as u128).saturating_pow((d / 2) as u32), "Pal")?;
    let poly = NcPolynomial::homogeneous(
        n,
        d,
        Word::all(n, d / 2).into_iter().map(|w| (w.concat(&w.reversed()), Fp::ONE)),
    )?;
    let mut b = CircuitBuilder::new(n);
    let vars: Vec<usize> = (1..=n).map(|i| b.var(i)).collect();
    let sq: Vec<usize> = vars.iter().map(|&x| b.times(x, x)).collect();
    let mut cur = b.plus(&sq);
    for _ in 1..d / 2 {
        let terms: Vec<usize> = vars
            .iter()
            .map(|&x| {
                let l = b.times(x, cur);
                b.times(l, x)
            })
            .collect();
        cur = b.plus(&terms);
    }
    Ok((poly, b.finish(cur)?))
}

/// The permutation pairing position `k` of a degree-`d` palindrome with its
/// mirror `d + 1 - k`: the shuffled word is `w_1 w_d w_2 w_{d-1} …`.
pub fn palindrome_interleave(d: usize) -> Result<Perm> {
    if !d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("interleave needs an even degree, got {d}")));
    }
    let images: Vec<usize> = (1..=d / 2).flat_map(|k| [k, d + 1 - k]).collect();
    Perm::from_images(&images)
}

/// `(x_1x_1 + … + x_nx_n)^k`.
pub fn square_sum_power(n: usize, k: usize) -> Result<NcPolynomial> {
    let sq = NcPolynomial::homogeneous(n, 2, (1..=n as u16).map(|i| (Word::new(vec![i, i]), Fp::ONE)))?;
    let mut out = NcPolynomial::one(n);
    for _ in 0..k {
        out = out.mul(&sq);
    }
    Ok(out)
}

/// `Pal^mov_D = Σ_{ℓ=0..D/2} z^ℓ · Pal_{D/2} · z^{D/2-ℓ}` over `x_1..x_n`
/// and `z = x_{n+1}`.
pub fn moving_palindrome(n: usize, big_d: usize) -> Result<NcPolynomial> {
    if n == 0 || big_d == 0 || !big_d.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!("moving palindrome needs n > 0 and D a positive multiple of 4, got n={n}, D={big_d}")));
    }
    let half = big_d / 2;
    check_terms((n as u128).saturating_pow((half / 2) as u32) * (half as u128 + 1), "Pal^mov")?;
    let z = (n + 1) as u16;
    let mut terms = Vec::new();
    for w in Word::all(n, half / 2) {
        let pal = w.concat(&w.reversed());
        for l in 0..=half {
            let mut v = vec![z; l];
            v.extend_from_slice(pal.letters());
            v.extend(std::iter::repeat_n(z, half - l));
            terms.push((Word::new(v), Fp::ONE));
        }
    }
    NcPolynomial::homogeneous(n + 1, big_d, terms)
}

/// A circuit for `Pal^mov_D`: the palindrome circuit shared by `D/2 + 1`
/// products, one per shift. It has `D/2 + 1` parse-tree shapes.
pub fn moving_palindrome_circuit(n: usize, big_d: usize) -> Result<Circuit> {
    if n == 0 || big_d == 0 || !big_d.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!("moving palindrome needs n > 0 and D a positive multiple of 4, got n={n}, D={big_d}")));
    }
    let half = big_d / 2;
    let mut b = CircuitBuilder::new(n + 1);
    let z = b.var(n + 1);
    let vars: Vec<usize> = (1..=n).map(|i| b.var(i)).collect();
    let sq: Vec<usize> = vars.iter().map(|&x| b.times(x, x)).collect();
    let mut pal = b.plus(&sq);
    for _ in 1..half / 2 {
        let terms: Vec<usize> = vars
            .iter()
            .map(|&x| {
                let l = b.times(x, pal);
                b.times(l, x)
            })
            .collect();
        pal = b.plus(&terms);
    }
    let shifts: Vec<usize> = (0..=half)
        .map(|l| {
            let mut acc = pal;
            for _ in 0..l {
                acc = b.times(z, acc);
            }
            for _ in l..half {
                acc = b.times(acc, z);
            }
            acc
        })
        .collect();
    let root = b.plus(&shifts);
    b.finish(root)
}

/// Number of nodes `2^{d+1} - 1` of the complete binary tree of depth `d`.
pub fn tree_size(d: usize) -> usize {
    (1usize << (d + 1)) - 1
}

/// UPT circuit for the tree-colouring polynomial `P_d(x_1..x_m)`, colour `c`
/// read as `x_{c+1}`, from
/// `P_{d,γ} = Σ_{α+β ≡ γ} P_{d-1,α} · x_γ · P_{d-1,β}`.
pub fn tree_coloring_circuit(m: usize, d: usize) -> Result<Circuit> {
    if m == 0 || m > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!("tree colouring needs 1 ≤ m ≤ {}, got {m}", u16::MAX)));
    }
    if d > 20 {
        return Err(Error::ScaleGuard(format!("tree of depth {d} has {} nodes", tree_size(d.min(60)))));
    }
    let mut b = CircuitBuilder::new(m);
    let vars: Vec<usize> = (1..=m).map(|i| b.var(i)).collect();
    let mut level = vars.clone();
    for _ in 0..d {
        let next: Vec<usize> = (0..m)
            .map(|gamma| {
                let terms: Vec<usize> = (0..m)
                    .map(|alpha| {
                        let beta = (gamma + m - alpha) % m;
                        let l = b.times(level[alpha], vars[gamma]);
                        b.times(l, level[beta])
                    })
                    .collect();
                b.plus(&terms)
            })
            .collect();
        level = next;
    }
    let root = b.plus(&level);
    b.finish(root)
}

/// `P_d` by enumerating legal colourings: leaves are free, every inner node
/// gets the sum of its children mod `m`, and the word lists the nodes in order.
pub fn tree_coloring_brute(m: usize, d: usize) -> Result<NcPolynomial> {
    if m == 0 || m > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!("tree colouring needs 1 ≤ m ≤ {}, got {m}", u16::MAX)));
    }
    if d > 20 {
        return Err(Error::ScaleGuard(format!("tree of depth {d} is too deep to enumerate")));
    }
    let leaves = 1usize << d;
    check_terms((m as u128).saturating_pow(leaves as u32), "P_d")?;
    let size = tree_size(d);
    let mut terms = Vec::new();
    let mut colours = vec![0usize; leaves];
    loop {
        // in-order position of the k-th leaf is 2k; a node covering leaves
        // [lo, hi) sits at position lo + hi - 1
        let mut word = vec![0u16; size];
        let mut layer: Vec<usize> = colours.clone();
        for (k, &c) in layer.iter().enumerate() {
            word[2 * k] = c as u16 + 1;
        }
        let mut span = 1;
        while layer.len() > 1 {
            let up: Vec<usize> = layer.chunks(2).map(|p| (p[0] + p[1]) % m).collect();
            span *= 2;
            for (k, &c) in up.iter().enumerate() {
                let (lo, hi) = (k * span, (k + 1) * span);
                word[lo + hi - 1] = c as u16 + 1;
            }
            layer = up;
        }
        terms.push((Word::new(word), Fp::ONE));
        // next leaf colouring
        let mut i = 0;
        while i < leaves {
            colours[i] += 1;
            if colours[i] < m {
                break;
            }
            colours[i] = 0;
            i += 1;
        }
        if i == leaves {
            break;
        }
    }
    NcPolynomial::homogeneous(m, size, terms)
}

/// `(circuit, brute-force polynomial)` for `P_d`.
pub fn tree_coloring_poly(m: usize, d: usize) -> Result<(Circuit, NcPolynomial)> {
    Ok((tree_coloring_circuit(m, d)?, tree_coloring_brute(m, d)?))
}

/// A coefficient matrix: rows and columns are partial words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    /// Nominal dimensions `n^{|V_0|}` × `n^{|V_1|}`.
    pub rows: u128,
    pub cols: u128,
    /// Rows and columns that hold a nonzero entry.
    pub nonzero_rows: usize,
    pub nonzero_cols: usize,
    pub rank: usize,
    /// Entries alone in both their row and their column: a diagonal
    /// submatrix of this size.
    pub identity_size: Option<usize>,
}

/// The matrix whose `(u, v)` entry is the coefficient of the word that
/// reads `u` at positions `v0` (1-based, any order taken sorted) and `v` at
/// the other positions.
pub fn partition_matrix(f: &NcPolynomial, v0: &[usize]) -> Result<RankReport> {
    let d = f.degree_or_err()?.unwrap_or(0);
    let mut inside = vec![false; d];
    for &p in v0 {
        if p == 0 || p > d || inside[p - 1] {
            return Err(Error::OutOfRange(format!("position set {v0:?} for degree {d}")));
        }
        inside[p - 1] = true;
    }
    let k = v0.len();
    let n = f.n() as u128;
    let rows = n.saturating_pow(k as u32);
    let cols = n.saturating_pow((d - k) as u32);
    let mut row_ids: BTreeMap<Vec<u16>, usize> = BTreeMap::new();
    let mut col_ids: BTreeMap<Vec<u16>, usize> = BTreeMap::new();
    let mut entries = Vec::with_capacity(f.len());
    for (w, &c) in f.terms() {
        let (mut u, mut v) = (Vec::with_capacity(k), Vec::with_capacity(d - k));
        for (i, &x) in w.letters().iter().enumerate() {
            if inside[i] { u.push(x) } else { v.push(x) }
        }
        let nr = row_ids.len();
        let r = *row_ids.entry(u).or_insert(nr);
        let nc = col_ids.len();
        let s = *col_ids.entry(v).or_insert(nc);
        entries.push((r, s, c));
    }
    let (nr, nc) = (row_ids.len(), col_ids.len());
    let mut row_count = vec![0usize; nr];
    let mut col_count = vec![0usize; nc];
    for &(r, s, _) in &entries {
        row_count[r] += 1;
        col_count[s] += 1;
    }
    let identity_size = entries.iter().filter(|&&(r, s, _)| row_count[r] == 1 && col_count[s] == 1).count();
    let rank = if identity_size == entries.len() {
        identity_size
    } else {
        let mut m = Matrix::zeros(nr, nc);
        for &(r, s, c) in &entries {
            m[(r, s)] = c;
        }
        m.rank()
    };
    Ok(RankReport { rows, cols, nonzero_rows: nr, nonzero_cols: nc, rank, identity_size: Some(identity_size) })
}

/// `M_k`: rows are the first `k` letters, columns the rest.
pub fn partial_derivative_matrix(f: &NcPolynomial, k: usize) -> Result<RankReport> {
    let d = f.degree_or_err()?.unwrap_or(0);
    if k > d {
        return Err(Error::OutOfRange(format!("k = {k} above the degree {d}")));
    }
    partition_matrix(f, &(1..=k).collect::<Vec<_>>())
}

/// `M_{(i,p)}`: the `(w, w')` entry is the coefficient of `w ×_p w'` with
/// `|w| = i`, i.e. rows read positions `p+1..p+i`.
pub fn nc_partial_matrix(f: &NcPolynomial, i: usize, p: usize) -> Result<RankReport> {
    let d = f.degree_or_err()?.unwrap_or(0);
    if i > d || p > d - i {
        return Err(Error::OutOfRange(format!("type ({i}, {p}) for degree {d}")));
    }
    partition_matrix(f, &(p + 1..=p + i).collect::<Vec<_>>())
}

/// The `k ≤ D` whose binary expansion alternates `1010…` with as many
/// digits as `D`.
pub fn alternating_k(big_d: usize) -> usize {
    let bits = usize::BITS - big_d.leading_zeros();
    (0..bits).fold(0, |k, i| (k << 1) | ((i + 1) % 2) as usize)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepReport {
    pub permutations: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    /// A shuffling attaining the minimum.
    pub argmin: Perm,
}

/// `rank M_k(Δ_σ f)` for every `σ ∈ S_D`, in parallel.
pub fn shuffled_rank_sweep(f: &NcPolynomial, k: usize) -> Result<SweepReport> {
    let d = f.degree_or_err()?.unwrap_or(0);
    if d > MAX_SWEEP_DEGREE {
        return Err(Error::ScaleGuard(format!("sweeping all {d}! shufflings")));
    }
    let ranks: Vec<(usize, Perm)> = Perm::all(d)
        .into_par_iter()
        .map(|s| Ok((partial_derivative_matrix(&f.shuffle(&s)?, k)?.rank, s)))
        .collect::<Result<_>>()?;
    let max_rank = ranks.iter().map(|r| r.0).max().unwrap_or(0);
    let (min_rank, argmin) = ranks.iter().min_by_key(|r| r.0).cloned().unwrap_or((0, Perm::identity(d)));
    Ok(SweepReport { permutations: ranks.len(), min_rank, max_rank, argmin })
}

/// All `k`-subsets of `{1..d}` in lexicographic order.
pub fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > d {
        return out;
    }
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < d - k + i + 1) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Smallest partition-matrix rank over all position sets of size `i`,
/// with a set attaining it. Every shuffling of `f` with a gate of degree
/// `i` induces one of these partitions.
pub fn min_partition_rank(f: &NcPolynomial, i: usize) -> Result<(usize, Vec<usize>)> {
    let d = f.degree_or_err()?.unwrap_or(0);
    let sets = subsets(d, i);
    if sets.len() > MAX_TERMS {
        return Err(Error::ScaleGuard(format!("{} position sets", sets.len())));
    }
    let ranks: Vec<(usize, Vec<usize>)> =
        sets.into_par_iter().map(|s| Ok((partition_matrix(f, &s)?.rank, s))).collect::<Result<_>>()?;
    ranks
        .into_iter()
        .min_by_key(|r| r.0)
        .ok_or_else(|| Error::OutOfRange(format!("no position set of size {i} in degree {d}")))
}

/// Gate degrees probed for `Pal^mov_D`: `⌈D/6⌉ ..= ⌊D/3⌋`, at least `{1}`.
pub fn movpal_probe_degrees(big_d: usize) -> std::ops::RangeInclusive<usize> {
    let lo = big_d.div_ceil(6).max(1);
    let hi = (big_d / 3).max(lo);
    lo..=hi
}
