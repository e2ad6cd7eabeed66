//! Permutations of word positions.

use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `{1, ..., d}`, stored 0-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(d: usize) -> Perm {
        Perm((0..d).collect())
    }

    /// Builds a permutation from its 1-based image list `[σ(1), ..., σ(d)]`.
    pub fn from_images(images: &[usize]) -> Result<Perm> {
        let d = images.len();
        let mut seen = vec![false; d];
        let mut out = Vec::with_capacity(d);
        for &im in images {
            if im == 0 || im > d || seen[im - 1] {
                return Err(Error::Permutation(format!("{images:?} is not a bijection on 1..={d}")));
            }
            seen[im - 1] = true;
            out.push(im - 1);
        }
        Ok(Perm(out))
    }

    pub(crate) fn from_zero_based(images: Vec<usize>) -> Perm {
        debug_assert!({
            let mut s = images.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &v)| i == v)
        });
        Perm(images)
    }

    /// Swaps positions `i` and `j` (1-based).
    pub fn transposition(d: usize, i: usize, j: usize) -> Result<Perm> {
        if i == 0 || j == 0 || i > d || j > d {
            return Err(Error::Permutation(format!("transposition ({i} {j}) outside 1..={d}")));
        }
        let mut p = Perm::identity(d);
        p.0.swap(i - 1, j - 1);
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `σ(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.0[i - 1] + 1
    }

    /// 0-based image table.
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// 1-based image list `[σ(1), ..., σ(d)]`.
    pub fn images(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Perm(inv)
    }

    /// The permutation `i ↦ τ(σ(i))`, written `σ∘τ` in the crate docs.
    ///
    /// With this convention `shuffle(shuffle(f, τ), σ) = shuffle(f, σ∘τ)`.
    pub fn compose(sigma: &Perm, tau: &Perm) -> Result<Perm> {
        if sigma.len() != tau.len() {
            return Err(Error::Permutation(format!(
                "cannot compose permutations of sizes {} and {}",
                sigma.len(),
                tau.len()
            )));
        }
        Ok(Perm(sigma.0.iter().map(|&s| tau.0[s]).collect()))
    }

    /// All permutations of `{1..d}` in lexicographic order of image lists.
    pub fn all(d: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..d).collect();
        loop {
            out.push(Perm(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (1..d).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..d).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images())
    }
}
