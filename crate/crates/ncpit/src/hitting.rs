//! The hitting set for UPT set-multilinear circuits of bounded width and
//! multiplication depth, and black-box identity testing through it.
//!
//! A point assigns `b_{i,j} = a_0^j · Π_{k=1..r} a_k^{2^{(i-1)n+(j-1)} mod p_k}`
//! with `p_k` ranging over the primes up to `M = (C(w,2)·n²·d + 1)²` and each
//! `a_k` over `A = {1, …, |A|}`. The factor `a_0^j` carries the letter-index
//! coordinate of the weight, so there are `r + 1` factors for `r` primes.

use rayon::prelude::*;

use crate::biwa::ab_weight;
use crate::circuit::{eval_matrix, phi_matrices, Circuit};
use crate::error::{Error, Result};
use crate::field::{modulus, Fp};
use crate::linalg::Matrix;
use crate::primes::{first_primes, primes_up_to};

/// Points evaluated per parallel batch.
const BATCH: u64 = 4096;
/// Largest prime bound sieved for the pool.
const MAX_SIEVE: u64 = 1 << 26;

#[derive(Clone, Debug)]
pub struct HittingSet {
    n: usize,
    d: usize,
    w: usize,
    r: usize,
    primes: Vec<u64>,
    a_size: u64,
}

impl HittingSet {
    /// The set for width `w` and `r` multiplication levels over `n` letters
    /// and `d` parts.
    pub fn new(n: usize, d: usize, w: usize, r: usize) -> Result<HittingSet> {
        if n == 0 || d == 0 || w == 0 {
            return Err(Error::InvalidArgument("n, d and w must be positive".into()));
        }
        let k = (w * (w - 1) / 2) as u64 * (n * n * d) as u64 + 1;
        let m = k.checked_mul(k).ok_or_else(|| Error::ScaleGuard(format!("M = {k}² overflows")))?;
        // p_K ≥ K, so a large K is refused before sieving
        if m.max(k) > MAX_SIEVE {
            return Err(Error::ScaleGuard(format!("prime bound {} too large to sieve", m.max(k))));
        }
        // the default prime list (first K primes) must lie in the pool
        let bound = m.max(*first_primes(k as usize).last().unwrap() as u64);
        if bound > MAX_SIEVE {
            return Err(Error::ScaleGuard(format!("prime bound {bound} too large to sieve")));
        }
        let primes: Vec<u64> = primes_up_to(bound as usize).into_iter().map(|p| p as u64).collect();
        // t_0 carries the letter index, of total degree up to d·n
        let a_size = d as u64 * m.max(n as u64) + 1;
        if a_size >= modulus() {
            return Err(Error::FieldTooSmall(format!("|A| = {a_size} needs a field larger than {}", modulus())));
        }
        Ok(HittingSet { n, d, w, r, primes, a_size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// The primes each `p_k` ranges over.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn a_size(&self) -> u64 {
        self.a_size
    }

    /// `|primes|^r · |A|^{r+1}`.
    pub fn cardinality(&self) -> u128 {
        let mut c = 1u128;
        for _ in 0..self.r {
            c = c.saturating_mul(self.primes.len() as u128);
        }
        for _ in 0..=self.r {
            c = c.saturating_mul(self.a_size as u128);
        }
        c
    }

    /// Point number `idx` as `d·n` values in `(i, j)` row-major order. The
    /// `a_k` vary fastest, `a_0` first; primes vary slowest.
    pub fn point_at(&self, idx: u128) -> Vec<Fp> {
        let mut rest = idx;
        let mut a = Vec::with_capacity(self.r + 1);
        for _ in 0..=self.r {
            a.push(Fp::new((rest % self.a_size as u128) as u64 + 1));
            rest /= self.a_size as u128;
        }
        let mut p = Vec::with_capacity(self.r);
        for _ in 0..self.r {
            p.push(self.primes[(rest % self.primes.len() as u128) as usize]);
            rest /= self.primes.len() as u128;
        }
        self.point_for(&p, &a)
    }

    /// The point for explicit primes `p_1..p_r` and `a_0..a_r`.
    pub fn point_for(&self, pvec: &[u64], a: &[Fp]) -> Vec<Fp> {
        let mut out = Vec::with_capacity(self.d * self.n);
        for i in 1..=self.d {
            for j in 1..=self.n {
                let mut b = a[0].pow(j as u64);
                for (k, &p) in pvec.iter().enumerate() {
                    b *= a[k + 1].pow(ab_weight(p, self.n, i, j));
                }
                out.push(b);
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<Fp>> + '_ {
        let card = self.cardinality();
        (0..card).map(move |i| self.point_at(i))
    }
}

/// Outcome of a black-box test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Zero,
    /// Index of a point with a nonzero value.
    NonZero(u128),
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero)
    }
}

/// Tests a polynomial of degree `d` given as a matrix oracle: each point
/// `b` becomes the substitution `x_j ↦ Φ(x_j)` with `b_{i,j}` on the
/// superdiagonal, and the corner entry is `Ψ(f)(b)`.
///
/// Stops at the first nonzero point. When all of the first `max_points`
/// points vanish but the set is larger, the zero verdict cannot be
/// certified and a scale guard is returned.
pub fn blackbox_pit_upt<F>(oracle: F, hs: &HittingSet, max_points: u128) -> Result<Verdict>
where
    F: Fn(&[Matrix]) -> Result<Matrix> + Sync,
{
    let (n, d) = (hs.n, hs.d);
    let card = hs.cardinality();
    let limit = card.min(max_points);
    let value = |idx: u128| -> Result<bool> {
        let b = hs.point_at(idx);
        let mats = phi_matrices(d, n, |i, j| b[(i - 1) * n + (j - 1)]);
        let m = oracle(&mats)?;
        if m.rows() != d + 1 || m.cols() != d + 1 {
            return Err(Error::Dimension(format!("oracle returned {}×{}, expected {}×{}", m.rows(), m.cols(), d + 1, d + 1)));
        }
        Ok(!m[(0, d)].is_zero())
    };
    let stride = visit_stride(card);
    let at = |k: u128| if stride == 1 { k } else { k * stride % card };
    let mut start = 0u128;
    while start < limit {
        let end = (start + BATCH as u128).min(limit);
        let hit = (0..(end - start) as u64)
            .into_par_iter()
            .map(|k| {
                let idx = at(start + k as u128);
                value(idx).map(|nz| nz.then_some(idx))
            })
            .find_first(|r| !matches!(r, Ok(None)));
        match hit {
            Some(Ok(Some(idx))) => return Ok(Verdict::NonZero(idx)),
            Some(Err(e)) => return Err(e),
            _ => {}
        }
        start = end;
    }
    if limit < card {
        return Err(Error::ScaleGuard(format!(
            "all {limit} points tried vanish but the hitting set has {card}; zero is not certified"
        )));
    }
    Ok(Verdict::Zero)
}

/// Points are visited as `k·s mod |H|` for a stride `s` coprime to `|H|`
/// near `0.618·|H|`: every point once, with consecutive visits far apart in
/// the mixed-radix index (the first `|H|/|primes|^r` indices all share one
/// prime vector, which can be a bad one).
pub(crate) fn visit_stride(card: u128) -> u128 {
    if !(3..1 << 64).contains(&card) {
        return 1;
    }
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    let mut s = card * 618 / 1000;
    while gcd(s, card) != 1 {
        s += 1;
    }
    s
}

/// [`blackbox_pit_upt`] with the circuit itself as the oracle.
pub fn pit_circuit(c: &Circuit, hs: &HittingSet, max_points: u128) -> Result<Verdict> {
    // constants are allowed: their degree-d part is zero
    if c.root().is_some() && c.degree() != 0 && c.degree() != hs.d {
        return Err(Error::Degree(format!("circuit of degree {} against a set for d = {}", c.degree(), hs.d)));
    }
    blackbox_pit_upt(|m| eval_matrix(c, m), hs, max_points)
}
