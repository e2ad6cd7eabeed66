//! Commutative set-multilinear polynomials and the embedding `Ψ`.
//!
//! Variables are `y_{i,j}` with part label `i` and index `j ∈ [n]`. A
//! monomial picks one `j` from every part, so it is stored as the vector of
//! chosen indices in increasing part order.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::Fp;
use crate::ncpoly::{NcPolynomial, Word};

#[derive(Clone, PartialEq, Eq)]
pub struct SmlPolynomial {
    n: usize,
    parts: Vec<usize>,
    terms: BTreeMap<Vec<u16>, Fp>,
}

impl SmlPolynomial {
    /// The zero polynomial over the given (1-based) part labels.
    pub fn zero(n: usize, parts: Vec<usize>) -> Result<SmlPolynomial> {
        check_parts(&parts)?;
        Ok(SmlPolynomial { n, parts, terms: BTreeMap::new() })
    }

    /// Builds from `(choice, coeff)` pairs, one choice per part.
    pub fn from_terms<I>(n: usize, parts: Vec<usize>, terms: I) -> Result<SmlPolynomial>
    where
        I: IntoIterator<Item = (Vec<u16>, Fp)>,
    {
        let mut p = SmlPolynomial::zero(n, parts)?;
        for (m, c) in terms {
            p.check_monomial(&m)?;
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn check_monomial(&self, m: &[u16]) -> Result<()> {
        if m.len() != self.parts.len() {
            return Err(Error::Dimension(format!(
                "monomial picks {} variables for {} parts",
                m.len(),
                self.parts.len()
            )));
        }
        if let Some(j) = m.iter().find(|&&j| j == 0 || j as usize > self.n) {
            return Err(Error::OutOfRange(format!("index {j} outside 1..={}", self.n)));
        }
        Ok(())
    }

    fn add_term(&mut self, m: Vec<u16>, c: Fp) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Fp)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &[u16]) -> Fp {
        self.terms.get(m).copied().unwrap_or(Fp::ZERO)
    }

    pub fn add(&self, other: &SmlPolynomial) -> Result<SmlPolynomial> {
        self.same_space(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SmlPolynomial) -> Result<SmlPolynomial> {
        self.add(&other.scale(-Fp::ONE))
    }

    pub fn scale(&self, c: Fp) -> SmlPolynomial {
        let terms = if c.is_zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(m, v)| (m.clone(), *v * c)).collect()
        };
        SmlPolynomial { n: self.n, parts: self.parts.clone(), terms }
    }

    fn same_space(&self, other: &SmlPolynomial) -> Result<()> {
        if self.n != other.n || self.parts != other.parts {
            return Err(Error::Dimension("set-multilinear polynomials over different parts".into()));
        }
        Ok(())
    }

    /// Product of polynomials over disjoint parts.
    pub fn mul(&self, other: &SmlPolynomial) -> Result<SmlPolynomial> {
        if self.n != other.n {
            return Err(Error::Dimension("different variable counts".into()));
        }
        let mut parts: Vec<usize> = self.parts.iter().chain(&other.parts).copied().collect();
        parts.sort_unstable();
        let before = parts.len();
        parts.dedup();
        if parts.len() != before {
            return Err(Error::Dimension("product of polynomials sharing a part".into()));
        }
        // position of each source part in the merged order
        let pos_a: Vec<usize> = self.parts.iter().map(|p| parts.binary_search(p).unwrap()).collect();
        let pos_b: Vec<usize> = other.parts.iter().map(|p| parts.binary_search(p).unwrap()).collect();
        let mut out = SmlPolynomial { n: self.n, parts, terms: BTreeMap::new() };
        let k = out.parts.len();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = vec![0u16; k];
                for (x, &p) in ma.iter().zip(&pos_a) {
                    m[p] = *x;
                }
                for (x, &p) in mb.iter().zip(&pos_b) {
                    m[p] = *x;
                }
                out.add_term(m, *ca * *cb);
            }
        }
        Ok(out)
    }

    /// Evaluates at `y_{i,j} = vals(i, j)`.
    pub fn evaluate(&self, vals: impl Fn(usize, usize) -> Fp) -> Fp {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter().zip(&self.parts).fold(*c, |acc, (&j, &i)| acc * vals(i, j as usize))
            })
            .sum()
    }

    /// Renames the parts to `a+1, a+2, ...` keeping their order.
    pub fn shift_parts_to(&self, a: usize) -> SmlPolynomial {
        SmlPolynomial {
            n: self.n,
            parts: (a + 1..=a + self.parts.len()).collect(),
            terms: self.terms.clone(),
        }
    }

    /// Inverse of [`psi_embed`] up to part labels: reads part order as word order.
    pub fn to_nc(&self) -> NcPolynomial {
        let terms = self.terms.iter().map(|(m, c)| (Word::new(m.clone()), *c));
        NcPolynomial::homogeneous(self.n, self.parts.len(), terms).expect("indices are in range")
    }
}

fn check_parts(parts: &[usize]) -> Result<()> {
    if parts.contains(&0) || parts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("part labels {parts:?} must be increasing and 1-based")));
    }
    Ok(())
}

/// `Ψ`: `x_{w_1}⋯x_{w_d} ↦ y_{1,w_1}⋯y_{d,w_d}`.
pub fn psi_embed(f: &NcPolynomial) -> Result<SmlPolynomial> {
    psi_embed_shifted(f, 0)
}

/// `Ψ_a`: `x_{w_1}⋯x_{w_d} ↦ y_{a+1,w_1}⋯y_{a+d,w_d}`.
pub fn psi_embed_shifted(f: &NcPolynomial, a: usize) -> Result<SmlPolynomial> {
    let d = f.degree_or_err()?.unwrap_or(0);
    let terms = f.terms().map(|(w, c)| (w.letters().to_vec(), *c)).collect();
    Ok(SmlPolynomial { n: f.n(), parts: (a + 1..=a + d).collect(), terms })
}

/// `Coeff_m(f)` for a monomial `m` over the parts `s`.
///
/// `m[k]` is the index chosen in part `s[k]`. The result lives on the
/// remaining parts.
pub fn coeff_operator(f: &SmlPolynomial, s: &[usize], m: &[u16]) -> Result<SmlPolynomial> {
    if s.len() != m.len() {
        return Err(Error::Dimension(format!("monomial of length {} for {} parts", m.len(), s.len())));
    }
    let mut pairs: Vec<(usize, u16)> = s.iter().copied().zip(m.iter().copied()).collect();
    pairs.sort_unstable();
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument("repeated part in S".into()));
    }
    let mut pick = Vec::with_capacity(pairs.len());
    for (part, j) in &pairs {
        let Ok(k) = f.parts.binary_search(part) else {
            return Err(Error::InvalidArgument(format!("part {part} is not a part of f")));
        };
        if *j == 0 || *j as usize > f.n {
            return Err(Error::OutOfRange(format!("index {j} outside 1..={}", f.n)));
        }
        pick.push((k, *j));
    }
    let rest: Vec<usize> = (0..f.parts.len()).filter(|k| !pick.iter().any(|(pk, _)| pk == k)).collect();
    let mut out = SmlPolynomial {
        n: f.n,
        parts: rest.iter().map(|&k| f.parts[k]).collect(),
        terms: BTreeMap::new(),
    };
    for (mono, c) in &f.terms {
        if pick.iter().all(|&(k, j)| mono[k] == j) {
            out.terms.insert(rest.iter().map(|&k| mono[k]).collect(), *c);
        }
    }
    Ok(out)
}

impl fmt::Debug for SmlPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (j, i) in m.iter().zip(&self.parts) {
                write!(f, "·y{i},{j}")?;
            }
        }
        Ok(())
    }
}
