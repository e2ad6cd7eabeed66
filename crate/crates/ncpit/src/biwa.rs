//! Basis-isolating weight assignments for spaces of set-multilinear
//! polynomials, and their construction level by level for UPT circuits.
//!
//! Variables are `y_{i,j}` with part `i ∈ [d]` and letter `j ∈ [n]`. A
//! weight assignment maps each to a vector in `ℕ^k`; a monomial's weight is
//! the componentwise sum. Vectors compare lexicographically.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{expand_all, Circuit, FlatShape, NodeKind, TypeMap, DEFAULT_MAX_TERMS};
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::linalg::EchelonSpan;
use crate::ncpoly::NcPolynomial;
use crate::primes::pow_mod;
use crate::sml::SmlPolynomial;

/// `2^{(i-1)n + (j-1)} mod p`.
pub fn ab_weight(p: u64, n: usize, i: usize, j: usize) -> u64 {
    pow_mod(2, ((i - 1) * n + (j - 1)) as u64, p)
}

/// Scalar weight of a set-multilinear monomial under [`ab_weight`].
pub fn ab_weight_of(p: u64, n: usize, parts: &[usize], letters: &[u16]) -> u64 {
    parts.iter().zip(letters).map(|(&i, &j)| ab_weight(p, n, i, j as usize)).sum()
}

/// Whether `ab_weight(p)` gives distinct monomials of `s` distinct weights.
/// Monomials are letter vectors over the parts `parts`.
pub fn separates(p: u64, n: usize, parts: &[usize], s: &[Vec<u16>]) -> bool {
    let distinct: BTreeSet<&Vec<u16>> = s.iter().collect();
    let weights: BTreeSet<u64> = distinct.iter().map(|m| ab_weight_of(p, n, parts, m)).collect();
    weights.len() == distinct.len()
}

/// The primes of `primes` for which [`separates`] fails.
pub fn count_bad_primes(n: usize, parts: &[usize], s: &[Vec<u16>], primes: &[u64]) -> usize {
    primes.iter().filter(|&&p| !separates(p, n, parts, s)).count()
}

/// The first `C(w,2)·n²·d + 1` primes.
pub fn default_primes(n: usize, d: usize, w: usize) -> Vec<u64> {
    crate::primes::first_primes(w * w.saturating_sub(1) / 2 * n * n * d + 1).into_iter().map(|p| p as u64).collect()
}

/// `y_{i,j} ↦ ℕ^k` for `i ∈ [d]`, `j ∈ [n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightAssignment {
    n: usize,
    d: usize,
    k: usize,
    table: Vec<Vec<u64>>,
}

impl WeightAssignment {
    pub fn new(d: usize, n: usize, k: usize, f: impl Fn(usize, usize) -> Vec<u64>) -> Result<WeightAssignment> {
        let mut table = Vec::with_capacity(d * n);
        for i in 1..=d {
            for j in 1..=n {
                let v = f(i, j);
                if v.len() != k {
                    return Err(Error::Dimension(format!("weight of y_{i},{j} has length {}, expected {k}", v.len())));
                }
                table.push(v);
            }
        }
        Ok(WeightAssignment { n, d, k, table })
    }

    /// `y_{i,j} ↦ (j)`.
    pub fn letter_index(d: usize, n: usize) -> WeightAssignment {
        WeightAssignment::new(d, n, 1, |_, j| vec![j as u64]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn parts(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &[u64] {
        &self.table[(i - 1) * self.n + (j - 1)]
    }

    /// Appends one coordinate.
    pub fn extend(&self, f: impl Fn(usize, usize) -> u64) -> WeightAssignment {
        let mut table = self.table.clone();
        for i in 1..=self.d {
            for j in 1..=self.n {
                table[(i - 1) * self.n + (j - 1)].push(f(i, j));
            }
        }
        WeightAssignment { n: self.n, d: self.d, k: self.k + 1, table }
    }

    pub fn weight_of(&self, parts: &[usize], letters: &[u16]) -> Vec<u64> {
        let mut w = vec![0u64; self.k];
        for (&i, &j) in parts.iter().zip(letters) {
            for (a, b) in w.iter_mut().zip(self.get(i, j as usize)) {
                *a += b;
            }
        }
        w
    }
}

/// `y_{i,j} ↦ (j, ab_weight(p_1), …, ab_weight(p_k))`.
pub fn omega_weight(pvec: &[u64], d: usize, n: usize) -> WeightAssignment {
    WeightAssignment::new(d, n, pvec.len() + 1, |i, j| {
        std::iter::once(j as u64).chain(pvec.iter().map(|&p| ab_weight(p, n, i, j))).collect()
    })
    .unwrap()
}

/// Rows of set-multilinear polynomials over one set of parts.
#[derive(Clone, Debug)]
pub struct PolySpace {
    n: usize,
    parts: Vec<usize>,
    rows: Vec<SmlPolynomial>,
}

impl PolySpace {
    pub fn new(n: usize, parts: Vec<usize>, rows: Vec<SmlPolynomial>) -> Result<PolySpace> {
        if let Some(r) = rows.iter().find(|r| r.parts() != parts.as_slice() || r.n() != n) {
            return Err(Error::Dimension(format!("row over parts {:?}, space over {parts:?}", r.parts())));
        }
        Ok(PolySpace { n, parts, rows })
    }

    pub fn rows(&self) -> &[SmlPolynomial] {
        &self.rows
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Monomials in the support of some row, with their columns.
    pub fn columns(&self) -> BTreeMap<Vec<u16>, Vec<Fp>> {
        let mut cols: BTreeMap<Vec<u16>, Vec<Fp>> = BTreeMap::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (m, &c) in row.terms() {
                cols.entry(m.clone()).or_insert_with(|| vec![Fp::ZERO; self.rows.len()])[r] = c;
            }
        }
        cols
    }

    /// `V₁·V₂`: all products of rows, over the union of the parts.
    pub fn product(&self, other: &PolySpace) -> Result<PolySpace> {
        let mut rows = Vec::with_capacity(self.rows.len() * other.rows.len());
        for a in &self.rows {
            for b in &other.rows {
                rows.push(a.mul(b)?);
            }
        }
        let mut parts: Vec<usize> = self.parts.iter().chain(&other.parts).copied().collect();
        parts.sort_unstable();
        PolySpace::new(self.n, parts, rows)
    }
}

/// Checks that `wt` isolates a basis of the column space of `v` and returns
/// that basis. Columns are taken in increasing weight; each weight class
/// may add at most one column outside the span of lighter basis columns.
pub fn verify_biwa(wt: &WeightAssignment, v: &PolySpace) -> Option<Vec<Vec<u16>>> {
    let mut classes: BTreeMap<Vec<u64>, Vec<(Vec<u16>, Vec<Fp>)>> = BTreeMap::new();
    for (m, col) in v.columns() {
        classes.entry(wt.weight_of(&v.parts, &m)).or_default().push((m, col));
    }
    let mut span = EchelonSpan::new(v.rows.len());
    let mut basis = Vec::new();
    for (_, class) in classes {
        let mut fresh: Vec<(Vec<u16>, Vec<Fp>)> = class.into_iter().filter(|(_, col)| !span.contains(col)).collect();
        if fresh.len() > 1 {
            return None;
        }
        if let Some((m, col)) = fresh.pop() {
            span.insert(&col);
            basis.push(m);
        }
    }
    Some(basis)
}

/// Monomial-wise substitution `y_{i,j} ↦ t^{wt(y_{i,j})}`; the result maps
/// exponent vectors to coefficients.
pub fn substitute_weights(f: &SmlPolynomial, wt: &WeightAssignment) -> BTreeMap<Vec<u64>, Fp> {
    let mut out: BTreeMap<Vec<u64>, Fp> = BTreeMap::new();
    for (m, &c) in f.terms() {
        let e = out.entry(wt.weight_of(f.parts(), m)).or_insert(Fp::ZERO);
        *e += c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// For each shape node, the positions (1-based, sorted) its leaves occupy in
/// the words of the root. For ordinary shapes these are contiguous; a
/// `×_p` node puts its left factor at positions `p..p+d_A` of its own.
pub fn node_parts(flat: &FlatShape) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); flat.len()];
    out[0] = (1..=flat.leaves(0)).collect();
    for t in 0..flat.len() {
        let node = flat.node(t);
        let mine = out[t].clone();
        match node.kind {
            NodeKind::Leaf | NodeKind::Const => {}
            NodeKind::Plus => out[node.children[0]] = mine,
            NodeKind::Times | NodeKind::TimesP(_) => {
                let p = if let NodeKind::TimesP(p) = node.kind { p } else { 0 };
                let (a, b) = (node.children[0], node.children[1]);
                let da = flat.leaves(a);
                out[a] = mine[p..p + da].to_vec();
                out[b] = mine[..p].iter().chain(&mine[p + da..]).copied().collect();
            }
        }
    }
    out
}

/// The set-multilinear polynomial of a node-`τ` gate: letter `k` of each word
/// goes to the `k`-th position of `τ`.
pub fn sml_of_gate(f: &NcPolynomial, parts: &[usize]) -> Result<SmlPolynomial> {
    SmlPolynomial::from_terms(f.n(), parts.to_vec(), f.terms().map(|(w, &c)| (w.letters().to_vec(), c)))
}

/// The spaces `V_τ = span{[g] : g ∼ τ}` of a canonical UPT circuit.
pub fn node_spaces(c: &Circuit, max_terms: usize) -> Result<(TypeMap, Vec<PolySpace>)> {
    let tm = TypeMap::new(c)?;
    let polys = expand_all(c, max_terms)?;
    let parts = node_parts(tm.flat());
    let mut spaces = Vec::with_capacity(parts.len());
    for (t, ps) in parts.iter().enumerate() {
        let rows = tm.gates_at(t).iter().map(|&g| sml_of_gate(&polys[g], ps)).collect::<Result<Vec<_>>>()?;
        spaces.push(PolySpace::new(c.n(), ps.clone(), rows)?);
    }
    Ok((tm, spaces))
}

/// Per-level certificate: the chosen primes and, for every node, its
/// isolated basis under the weight of its level.
#[derive(Clone, Debug)]
pub struct BiwaCertificate {
    pub pvec: Vec<u64>,
    /// `bases[τ]`, checked under `omega_weight(&pvec[..height(τ)])`.
    pub bases: Vec<Vec<Vec<u16>>>,
    pub weight: WeightAssignment,
}

/// Picks, for each multiplication height `k = 1..r`, the first prime of
/// `primes` such that `omega_weight(p_1..p_k)` is a BIWA for every `V_τ` of
/// height `k`. Height-0 nodes use `y_{i,j} ↦ (j)`.
pub fn find_biwa(c: &Circuit, primes: &[u64]) -> Result<BiwaCertificate> {
    let (tm, spaces) = node_spaces(c, DEFAULT_MAX_TERMS)?;
    let flat = tm.flat();
    let (d, n) = (flat.leaves(0), c.n());
    let r = flat.node(0).product_height;
    let mut bases: Vec<Vec<Vec<u16>>> = vec![Vec::new(); flat.len()];
    let at_level = |k: usize| (0..flat.len()).filter(move |&t| flat.node(t).product_height == k);
    let mut pvec = Vec::with_capacity(r);
    let mut wt = omega_weight(&[], d, n);
    for t in at_level(0) {
        bases[t] = verify_biwa(&wt, &spaces[t]).ok_or(Error::NoPrime(0))?;
    }
    for k in 1..=r {
        let mut found = None;
        'primes: for &p in primes {
            let cand = wt.extend(|i, j| ab_weight(p, n, i, j));
            let mut level_bases = Vec::new();
            for t in at_level(k) {
                match verify_biwa(&cand, &spaces[t]) {
                    Some(b) => level_bases.push((t, b)),
                    None => continue 'primes,
                }
            }
            found = Some((p, cand, level_bases));
            break;
        }
        let (p, cand, level_bases) =
            found.ok_or(Error::NoPrime(k))?;
        pvec.push(p);
        wt = cand;
        for (t, b) in level_bases {
            bases[t] = b;
        }
    }
    Ok(BiwaCertificate { pvec, bases, weight: wt })
}
