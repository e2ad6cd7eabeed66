//! Brute-force expansion: the reference oracle for every transformation.

use std::collections::HashMap;

use super::canonical::TypeMap;
use super::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::ncpoly::NcPolynomial;

/// Default cap on the number of terms of any intermediate polynomial.
pub const DEFAULT_MAX_TERMS: usize = 1 << 20;

/// The polynomial of every gate, bottom-up.
pub fn expand_all(c: &Circuit, max_terms: usize) -> Result<Vec<NcPolynomial>> {
    let n = c.n();
    let mut polys: Vec<NcPolynomial> = Vec::with_capacity(c.size());
    for (id, g) in c.gates().iter().enumerate() {
        let p = match g.kind {
            GateKind::Var(j) => NcPolynomial::var(n, j as usize),
            GateKind::Const(k) => NcPolynomial::constant(n, k),
            GateKind::Plus => {
                let mut acc = NcPolynomial::zero_of_degree(n, c.gate_degree(id));
                for ch in &g.children {
                    acc.add_scaled(&polys[ch.id], ch.weight());
                }
                acc
            }
            GateKind::Times => NcPolynomial::times_p(&polys[g.children[0].id], &polys[g.children[1].id], 0)?,
            GateKind::TimesP(p) => NcPolynomial::times_p(&polys[g.children[0].id], &polys[g.children[1].id], p)?,
        };
        if p.len() > max_terms {
            return Err(Error::ScaleGuard(format!("gate {id} has more than {max_terms} terms")));
        }
        polys.push(p);
    }
    Ok(polys)
}

/// The polynomial computed at the root; zero for the empty circuit.
pub fn expand(c: &Circuit, max_terms: usize) -> Result<NcPolynomial> {
    match c.root() {
        None => Ok(NcPolynomial::zero(c.n())),
        Some(r) => Ok(expand_all(c, max_terms)?.swap_remove(r)),
    }
}

/// The gate quotient `[u : v]` of a canonical UPT circuit, from the defining
/// recursion. `polys` are the gate polynomials from [`expand_all`].
pub fn gate_quotient_poly(
    c: &Circuit,
    types: &TypeMap,
    u: usize,
    v: usize,
    polys: &[NcPolynomial],
) -> Result<NcPolynomial> {
    if c.is_otimes() {
        return Err(Error::InvalidArgument("gate quotients are defined for ordinary circuits".into()));
    }
    if u >= c.size() || v >= c.size() {
        return Err(Error::OutOfRange(format!("gates {u}, {v} in a circuit of size {}", c.size())));
    }
    let mut memo = HashMap::new();
    Ok(quotient_rec(c, types, u, v, polys, &mut memo))
}

fn quotient_rec(
    c: &Circuit,
    types: &TypeMap,
    u: usize,
    v: usize,
    polys: &[NcPolynomial],
    memo: &mut HashMap<usize, NcPolynomial>,
) -> NcPolynomial {
    if let Some(p) = memo.get(&u) {
        return p.clone();
    }
    let n = c.n();
    let (du, dv) = (c.gate_degree(u), c.gate_degree(v));
    let out = if u == v {
        NcPolynomial::one(n)
    } else if !types.above(u, v) || types.type_of(u) == types.type_of(v) {
        NcPolynomial::zero_of_degree(n, du.saturating_sub(dv))
    } else {
        let g = c.gate(u);
        match g.kind {
            GateKind::Var(_) | GateKind::Const(_) => NcPolynomial::zero_of_degree(n, du.saturating_sub(dv)),
            GateKind::Plus => {
                let mut acc = NcPolynomial::zero_of_degree(n, du - dv);
                for ch in &g.children {
                    let q = quotient_rec(c, types, ch.id, v, polys, memo);
                    acc.add_scaled(&q, ch.weight());
                }
                acc
            }
            GateKind::Times | GateKind::TimesP(_) => {
                let (a, b) = (g.children[0].id, g.children[1].id);
                if types.above(a, v) {
                    quotient_rec(c, types, a, v, polys, memo).mul(&polys[b])
                } else {
                    polys[a].mul(&quotient_rec(c, types, b, v, polys, memo))
                }
            }
        }
    };
    memo.insert(u, out.clone());
    out
}

/// Sum of weights over all `+`-paths from `u` down to `v` (both of one degree).
pub(crate) fn scalar_quotient(c: &Circuit, u: usize, v: usize, memo: &mut HashMap<(usize, usize), Fp>) -> Fp {
    if u == v {
        return Fp::ONE;
    }
    if let Some(&s) = memo.get(&(u, v)) {
        return s;
    }
    let g = c.gate(u);
    let s = match g.kind {
        GateKind::Plus if u > v => g.children.iter().map(|ch| ch.weight() * scalar_quotient(c, ch.id, v, memo)).sum(),
        _ => Fp::ZERO,
    };
    memo.insert((u, v), s);
    s
}
