//! Sparse non-commutative polynomials over the prime field.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{modulus, Fp};
use crate::perm::Perm;

/// A word `x_{w_1} ... x_{w_d}`; letters are 1-based variable indices.
///
/// Words order lexicographically, shorter prefixes first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn new(letters: Vec<u16>) -> Word {
        Word(letters)
    }

    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_slice(letters: &[u16]) -> Word {
        Word(letters.to_vec())
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `other[..p] self other[p..]`
    pub fn insert_into(&self, other: &Word, p: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&other.0[..p]);
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0[p..]);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// All words of length `d` over `{1..n}` in lexicographic order.
    pub fn all(n: usize, d: usize) -> Vec<Word> {
        let total = n.checked_pow(d as u32).unwrap_or(usize::MAX);
        let mut out = Vec::with_capacity(total.min(1 << 20));
        if n == 0 {
            if d == 0 {
                out.push(Word::empty());
            }
            return out;
        }
        let mut cur = vec![1u16; d];
        loop {
            out.push(Word(cur.clone()));
            let mut i = d;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if (cur[i] as usize) < n {
                    cur[i] += 1;
                    for c in cur.iter_mut().skip(i + 1) {
                        *c = 1;
                    }
                    break;
                }
            }
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "·")?;
            }
            write!(f, "x{l}")?;
        }
        Ok(())
    }
}

/// A polynomial in `n` non-commuting variables.
///
/// Zero coefficients are never stored. `degree` is `Some(d)` when the
/// polynomial is flagged homogeneous of degree `d`; the zero polynomial may
/// carry a degree so that it can stand in for "the zero of degree d".
#[derive(Clone)]
pub struct NcPolynomial {
    n: usize,
    degree: Option<usize>,
    terms: BTreeMap<Word, Fp>,
}

impl PartialEq for NcPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl Eq for NcPolynomial {}

impl NcPolynomial {
    pub fn zero(n: usize) -> NcPolynomial {
        NcPolynomial { n, degree: None, terms: BTreeMap::new() }
    }

    /// The zero polynomial flagged as homogeneous of degree `d`.
    pub fn zero_of_degree(n: usize, d: usize) -> NcPolynomial {
        NcPolynomial { n, degree: Some(d), terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Fp) -> NcPolynomial {
        NcPolynomial::monomial(n, Word::empty(), c)
    }

    pub fn one(n: usize) -> NcPolynomial {
        NcPolynomial::constant(n, Fp::ONE)
    }

    /// The variable `x_i`; panics if `i` is not in `1..=n`.
    pub fn var(n: usize, i: usize) -> NcPolynomial {
        assert!(i >= 1 && i <= n, "variable x{i} outside 1..={n}");
        NcPolynomial::monomial(n, Word(vec![i as u16]), Fp::ONE)
    }

    pub fn monomial(n: usize, w: Word, c: Fp) -> NcPolynomial {
        let d = w.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        NcPolynomial { n, degree: Some(d), terms }
    }

    /// Builds a polynomial from terms, summing repeated words.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<NcPolynomial>
    where
        I: IntoIterator<Item = (Word, Fp)>,
    {
        let mut p = NcPolynomial::zero(n);
        for (w, c) in terms {
            check_letters(n, &w)?;
            p.add_term_unchecked(w, c);
        }
        p.refresh_degree(None);
        Ok(p)
    }

    /// Like [`from_terms`](Self::from_terms) but insists on homogeneity of degree `d`.
    pub fn homogeneous<I>(n: usize, d: usize, terms: I) -> Result<NcPolynomial>
    where
        I: IntoIterator<Item = (Word, Fp)>,
    {
        let mut p = NcPolynomial::zero_of_degree(n, d);
        for (w, c) in terms {
            check_letters(n, &w)?;
            if w.len() != d {
                return Err(Error::Degree(format!("word {w:?} in a polynomial of degree {d}")));
            }
            p.add_term_unchecked(w, c);
        }
        Ok(p)
    }

    fn add_term_unchecked(&mut self, w: Word, c: Fp) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = *e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Adds `c·w` in place. The word must fit the degree flag if one is set.
    pub fn add_term(&mut self, w: Word, c: Fp) -> Result<()> {
        check_letters(self.n, &w)?;
        if let Some(d) = self.degree {
            if w.len() != d {
                return Err(Error::Degree(format!("word {w:?} in a polynomial of degree {d}")));
            }
        }
        self.add_term_unchecked(w, c);
        if self.degree.is_none() {
            self.refresh_degree(None);
        }
        Ok(())
    }

    fn refresh_degree(&mut self, hint: Option<usize>) {
        let mut lens = self.terms.keys().map(Word::len);
        self.degree = match lens.next() {
            None => hint,
            Some(first) => {
                if lens.all(|l| l == first) {
                    Some(first)
                } else {
                    None
                }
            }
        };
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The homogeneous degree flag, if any.
    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree.is_some() || self.terms.is_empty()
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

    pub fn coeff(&self, w: &Word) -> Fp {
        self.terms.get(w).copied().unwrap_or(Fp::ZERO)
    }

    /// Terms in lexicographic word order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Fp)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: Fp) -> NcPolynomial {
        if c.is_zero() {
            return NcPolynomial { n: self.n, degree: self.degree, terms: BTreeMap::new() };
        }
        NcPolynomial {
            n: self.n,
            degree: self.degree,
            terms: self.terms.iter().map(|(w, v)| (w.clone(), *v * c)).collect(),
        }
    }

    /// Adds `c·other` into `self`.
    pub fn add_scaled(&mut self, other: &NcPolynomial, c: Fp) {
        assert_eq!(self.n, other.n, "variable counts differ");
        if c.is_zero() {
            return;
        }
        let hint = match (self.degree, other.degree) {
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), None) if other.is_zero() => Some(a),
            (None, Some(b)) if self.is_zero() => Some(b),
            _ => None,
        };
        for (w, v) in &other.terms {
            self.add_term_unchecked(w.clone(), *v * c);
        }
        self.refresh_degree(hint);
    }

    pub fn add(&self, other: &NcPolynomial) -> NcPolynomial {
        let mut out = self.clone();
        out.add_scaled(other, Fp::ONE);
        out
    }

    pub fn sub(&self, other: &NcPolynomial) -> NcPolynomial {
        let mut out = self.clone();
        out.add_scaled(other, -Fp::ONE);
        out
    }

    pub fn neg(&self) -> NcPolynomial {
        self.scale(-Fp::ONE)
    }

    /// Ordinary product (concatenation of words), defined for any inputs.
    pub fn mul(&self, other: &NcPolynomial) -> NcPolynomial {
        assert_eq!(self.n, other.n, "variable counts differ");
        let mut out = NcPolynomial::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term_unchecked(a.concat(b), *ca * *cb);
            }
        }
        let hint = match (self.degree, other.degree) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        out.refresh_degree(hint);
        out
    }

    /// The `×_p` product `f ×_p g`: `f` is inserted into `g` after `p` letters.
    pub fn times_p(f: &NcPolynomial, g: &NcPolynomial, p: usize) -> Result<NcPolynomial> {
        if f.n != g.n {
            return Err(Error::InvalidArgument(format!(
                "×_p of polynomials over {} and {} variables",
                f.n, g.n
            )));
        }
        let (Some(d1), Some(d2)) = (f.degree_or_err()?, g.degree_or_err()?) else {
            return Ok(NcPolynomial::zero(f.n));
        };
        if p > d2 {
            return Err(Error::OutOfRange(format!("×_{p} with right factor of degree {d2}")));
        }
        let mut out = NcPolynomial::zero_of_degree(f.n, d1 + d2);
        for (a, ca) in &f.terms {
            for (b, cb) in &g.terms {
                out.add_term_unchecked(a.insert_into(b, p), *ca * *cb);
            }
        }
        Ok(out)
    }

    /// `Δ_σ`: the word `w` goes to `w_{σ(1)} ... w_{σ(d)}`.
    pub fn shuffle(&self, sigma: &Perm) -> Result<NcPolynomial> {
        let Some(d) = self.degree_or_err()? else {
            return Ok(NcPolynomial { n: self.n, degree: Some(sigma.len()), terms: BTreeMap::new() });
        };
        if d != sigma.len() {
            return Err(Error::Permutation(format!(
                "permutation of size {} applied to degree {d}",
                sigma.len()
            )));
        }
        let idx = sigma.as_slice();
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| (Word(idx.iter().map(|&s| w.0[s]).collect()), *c))
            .collect();
        Ok(NcPolynomial { n: self.n, degree: Some(d), terms })
    }

    /// Degree of a homogeneous polynomial (`None` for zero), or an error.
    pub fn degree_or_err(&self) -> Result<Option<usize>> {
        if self.terms.is_empty() {
            return Ok(self.degree);
        }
        match self.degree {
            Some(d) => Ok(Some(d)),
            None => Err(Error::Degree("polynomial is not homogeneous".into())),
        }
    }

    /// Re-indexes the variable count, e.g. to embed into a larger alphabet.
    pub fn with_n(&self, n: usize) -> Result<NcPolynomial> {
        for w in self.terms.keys() {
            check_letters(n, w)?;
        }
        Ok(NcPolynomial { n, degree: self.degree, terms: self.terms.clone() })
    }

    /// Writes the polynomial in the line format
    /// `ncpoly n=<n> d=<d> q=<q>` followed by `coeff  w1 ... wd` lines.
    pub fn to_text(&self) -> Result<String> {
        let d = self.degree_or_err()?.unwrap_or(0);
        let mut s = format!("ncpoly n={} d={} q={}\n", self.n, d, modulus());
        for (w, c) in &self.terms {
            s.push_str(&c.to_string());
            s.push(' ');
            for l in &w.0 {
                s.push(' ');
                s.push_str(&l.to_string());
            }
            s.push('\n');
        }
        Ok(s)
    }

    /// Parses the format written by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<NcPolynomial> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Malformed { line: 1, msg: "empty input".into() })?;
        let fields = parse_header(header, "ncpoly", &["n", "d", "q"], 1)?;
        let (n, d, q) = (fields[0], fields[1], fields[2]);
        if q != modulus() {
            return Err(Error::Malformed { line: 1, msg: format!("file is over q={q}, field is q={}", modulus()) });
        }
        let mut p = NcPolynomial::zero_of_degree(n as usize, d as usize);
        let mut prev: Option<Word> = None;
        for (ln, line) in lines {
            let line_no = ln + 1;
            let bad = |msg: String| Error::Malformed { line: line_no, msg };
            let (coeff, rest) = line
                .split_once("  ")
                .map(|(a, b)| (a, b.trim()))
                .unwrap_or((line.trim(), ""));
            let c: u64 = coeff.trim().parse().map_err(|_| bad(format!("bad coefficient {coeff:?}")))?;
            if c == 0 || c >= q {
                return Err(bad(format!("coefficient {c} is not a nonzero residue")));
            }
            let letters = rest
                .split_whitespace()
                .map(|t| t.parse::<u16>().map_err(|_| bad(format!("bad letter {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let w = Word(letters);
            if w.len() != d as usize {
                return Err(bad(format!("word of length {} in a degree {d} file", w.len())));
            }
            check_letters(n as usize, &w).map_err(|e| bad(e.to_string()))?;
            if prev.as_ref().is_some_and(|pw| pw >= &w) {
                return Err(bad("terms are not in strictly increasing word order".into()));
            }
            prev = Some(w.clone());
            p.terms.insert(w, Fp::new(c));
        }
        Ok(p)
    }
}

pub(crate) fn parse_header(line: &str, tag: &str, keys: &[&str], line_no: usize) -> Result<Vec<u64>> {
    let bad = |msg: String| Error::Malformed { line: line_no, msg };
    let mut toks = line.split(' ');
    if toks.next() != Some(tag) {
        return Err(bad(format!("expected a `{tag}` header")));
    }
    let mut out = Vec::new();
    for key in keys {
        let tok = toks.next().ok_or_else(|| bad(format!("missing {key}=")))?;
        let v = tok
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| bad(format!("expected {key}=, found {tok:?}")))?;
        out.push(v.parse().map_err(|_| bad(format!("bad value for {key}: {v:?}")))?);
    }
    if toks.next().is_some() {
        return Err(bad("trailing tokens in header".into()));
    }
    Ok(out)
}

fn check_letters(n: usize, w: &Word) -> Result<()> {
    match w.0.iter().find(|&&l| l == 0 || l as usize > n) {
        Some(l) => Err(Error::OutOfRange(format!("letter {l} outside 1..={n}"))),
        None => Ok(()),
    }
}

impl fmt::Debug for NcPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{w:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> NcPolynomial {
        NcPolynomial::var(n, i)
    }

    fn word(ls: &[u16]) -> Word {
        Word::from_slice(ls)
    }

    #[test]
    fn times_zero_is_concatenation() {
        let r = NcPolynomial::times_p(&x(2, 1), &x(2, 2), 0).unwrap();
        assert_eq!(r, NcPolynomial::monomial(2, word(&[1, 2]), Fp::ONE));
    }

    #[test]
    fn times_one_inserts_after_first_letter() {
        let f = NcPolynomial::monomial(4, word(&[1, 2]), Fp::ONE);
        let g = NcPolynomial::monomial(4, word(&[3, 4]), Fp::ONE);
        let r = NcPolynomial::times_p(&f, &g, 1).unwrap();
        assert_eq!(r, NcPolynomial::monomial(4, word(&[3, 1, 2, 4]), Fp::ONE));
    }

    #[test]
    fn times_p_bilinear_example() {
        let f = x(2, 1).add(&x(2, 2));
        let g = NcPolynomial::monomial(2, word(&[1, 1]), Fp::ONE);
        let r = NcPolynomial::times_p(&f, &g, 1).unwrap();
        let want = NcPolynomial::from_terms(2, [(word(&[1, 1, 1]), Fp::ONE), (word(&[1, 2, 1]), Fp::ONE)]).unwrap();
        assert_eq!(r, want);
    }

    #[test]
    fn times_p_range_checked() {
        let f = x(2, 1);
        assert!(NcPolynomial::times_p(&f, &f, 2).is_err());
        assert!(NcPolynomial::times_p(&f, &f, 1).is_ok());
    }

    #[test]
    fn shuffle_swap() {
        let f = NcPolynomial::monomial(2, word(&[1, 2]), Fp::ONE);
        let s = Perm::transposition(2, 1, 2).unwrap();
        assert_eq!(f.shuffle(&s).unwrap(), NcPolynomial::monomial(2, word(&[2, 1]), Fp::ONE));
        assert_eq!(f.shuffle(&Perm::identity(2)).unwrap(), f);
    }

    #[test]
    fn shuffle_takes_source_letter_at_sigma_i() {
        // target position i receives the letter at source position σ(i)
        let f = NcPolynomial::monomial(3, word(&[1, 2, 3]), Fp::ONE);
        let s = Perm::from_images(&[3, 1, 2]).unwrap();
        assert_eq!(f.shuffle(&s).unwrap(), NcPolynomial::monomial(3, word(&[3, 1, 2]), Fp::ONE));
        let g = NcPolynomial::monomial(3, word(&[2, 3, 1]), Fp::ONE);
        assert_eq!(g.shuffle(&s).unwrap(), NcPolynomial::monomial(3, word(&[1, 2, 3]), Fp::ONE));
    }

    #[test]
    fn shuffle_degree_mismatch() {
        assert!(x(2, 1).shuffle(&Perm::identity(2)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = NcPolynomial::from_terms(3, [(word(&[3, 1]), Fp::new(5)), (word(&[1, 2]), Fp::from_i64(-1))]).unwrap();
        let t = f.to_text().unwrap();
        assert!(t.starts_with("ncpoly n=3 d=2 q="));
        assert!(t.contains("\n5  3 1\n"));
        let g = NcPolynomial::from_text(&t).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.to_text().unwrap(), t);
    }

    #[test]
    fn zero_has_no_terms_and_keeps_degree_hint() {
        let z = x(2, 1).sub(&x(2, 1));
        assert!(z.is_zero());
        assert_eq!(z.degree(), Some(1));
        let t = NcPolynomial::zero_of_degree(2, 3).to_text().unwrap();
        assert_eq!(NcPolynomial::from_text(&t).unwrap().to_text().unwrap(), t);
    }

    #[test]
    fn non_homogeneous_is_flagged() {
        let f = x(2, 1).add(&NcPolynomial::one(2));
        assert_eq!(f.degree(), None);
        assert!(NcPolynomial::times_p(&f, &x(2, 1), 0).is_err());
    }

    #[test]
    fn all_words_in_lex_order() {
        let ws = Word::all(2, 2);
        let ls: Vec<_> = ws.iter().map(|w| w.letters().to_vec()).collect();
        assert_eq!(ls, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(Word::all(3, 0), vec![Word::empty()]);
    }
}
