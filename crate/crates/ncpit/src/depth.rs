//! Gate quotients, logarithmic-depth ⊗-circuits, and the collapse to a
//! circuit computing a shuffling.
//!
//! `X ×_p Y` inserts `X` into `Y` after `p` letters; in a circuit it is the
//! gate `timesp p=<p> X Y`. The reduced circuit has a gate for `[u]` and for
//! each needed quotient `[u : v]`:
//!
//! * `[u] = Σ_{w∼τ} ([w₁] ×_0 [w₂]) ×_p [u : w]`, where `τ` is the deepest node
//!   on the heavy path below `u` whose degree is at least `d_u / 2`;
//! * `[u : v] = Σ_{w∼τ} [w : v] ×_p [u : w]`, where `τ` is the deepest node on
//!   the path from `u` to `v` of degree at least `(d_u + d_v) / 2`, and
//!   `[w : v]` is `[w₁]·[w₂ : v]` or `[w₁ : v]·[w₂]`, written with two
//!   nested `×_p` gates so that the unbounded factor `[w₁]` (or `[w₂]`)
//!   enters as its own depth-reduced gate.
//!
//! In both sums `p = left(τ) − left(u)`, the number of leaves between the
//! left edge of `u`'s node and `τ`.
//!
//! Quotients of degree 0 are scalars (sums over `+` chains) and are folded
//! into edge weights. Terms that vanish structurally are dropped.

use std::collections::HashMap;

use crate::circuit::{
    check_upt, expand_all, gate_quotient_poly, scalar_quotient, Circuit, CircuitBuilder, GateKind, NodeKind,
    Shape, ShapeKind, TypeMap,
};
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::ncpoly::NcPolynomial;
use crate::perm::Perm;

/// `[u : v]` for gates of a canonical UPT circuit, by the defining recursion.
pub fn gate_quotient(c: &Circuit, u: usize, v: usize, max_terms: usize) -> Result<NcPolynomial> {
    let tm = TypeMap::new(c)?;
    let polys = expand_all(c, max_terms)?;
    let q = gate_quotient_poly(c, &tm, u, v, &polys)?;
    #[cfg(debug_assertions)]
    if tm.above(u, v) {
        let tau = tm.type_of(v);
        let p = split_offset(&tm, u, tau);
        let mut rhs = NcPolynomial::zero(c.n());
        for &w in tm.gates_at(tau) {
            let quw = gate_quotient_poly(c, &tm, u, w, &polys)?;
            rhs.add_scaled(&NcPolynomial::times_p(&polys[w], &quw, p)?, Fp::ONE);
        }
        if rhs != polys[u] {
            return Err(Error::InvalidArgument(format!("[u] identity fails for gate {u} at node {tau} with p = {p}")));
        }
    }
    Ok(q)
}

/// All quotients `[u : v]` with `u ⪰ v`, materialised.
#[derive(Clone, Debug)]
pub struct GateQuotientTable {
    types: TypeMap,
    polys: Vec<NcPolynomial>,
    table: HashMap<(usize, usize), NcPolynomial>,
}

impl GateQuotientTable {
    pub fn new(c: &Circuit, max_terms: usize) -> Result<GateQuotientTable> {
        let types = TypeMap::new(c)?;
        let polys = expand_all(c, max_terms)?;
        let mut table = HashMap::new();
        for v in 0..c.size() {
            for u in 0..c.size() {
                if types.above(u, v) {
                    table.insert((u, v), gate_quotient_poly(c, &types, u, v, &polys)?);
                }
            }
        }
        Ok(GateQuotientTable { types, polys, table })
    }

    pub fn types(&self) -> &TypeMap {
        &self.types
    }

    /// `[u]`
    pub fn gate(&self, u: usize) -> &NcPolynomial {
        &self.polys[u]
    }

    /// `[u : v]`; zero when `u ⋡ v`.
    pub fn get(&self, u: usize, v: usize) -> NcPolynomial {
        self.table.get(&(u, v)).cloned().unwrap_or_else(|| NcPolynomial::zero(self.polys[u].n()))
    }
}

/// The insertion offset `p` for splitting gate `u` at node `tau`.
pub fn split_offset(types: &TypeMap, u: usize, tau: usize) -> usize {
    types.flat().left(tau) - types.flat().left(types.type_of(u))
}

/// Checks `[u] = Σ_{w∼τ} [w] ×_p [u:w]` for every `u ⪰ τ`, and
/// `[u:v] = Σ_{w∼τ} [w:v] ×_p [u:w]` for every product gate `v` and
/// `u ⪰ τ ⪰ v`, with `p` from [`split_offset`]. Returns the number of
/// identities checked; a mismatch is an error.
pub fn verify_quotient_identities(c: &Circuit, max_terms: usize) -> Result<usize> {
    let t = GateQuotientTable::new(c, max_terms)?;
    let flat = t.types.flat();
    let mut checked = 0;
    for u in 0..c.size() {
        let tu = t.types.type_of(u);
        for tau in 0..flat.len() {
            if !flat.is_ancestor(tu, tau) {
                continue;
            }
            let p = split_offset(&t.types, u, tau);
            let mut rhs = NcPolynomial::zero(c.n());
            for &w in t.types.gates_at(tau) {
                rhs.add_scaled(&NcPolynomial::times_p(t.gate(w), &t.get(u, w), p)?, Fp::ONE);
            }
            if rhs != *t.gate(u) {
                return Err(Error::InvalidArgument(format!(
                    "[u] identity fails for gate {u} at node {tau} with p = {p}"
                )));
            }
            checked += 1;
            for v in 0..c.size() {
                if !c.gate(v).is_product() || !flat.is_ancestor(tau, t.types.type_of(v)) {
                    continue;
                }
                let mut rhs = NcPolynomial::zero(c.n());
                for &w in t.types.gates_at(tau) {
                    rhs.add_scaled(&NcPolynomial::times_p(&t.get(w, v), &t.get(u, w), p)?, Fp::ONE);
                }
                if rhs != t.get(u, v) {
                    return Err(Error::InvalidArgument(format!(
                        "[u:v] identity fails for gates {u}, {v} at node {tau} with p = {p}"
                    )));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// A polynomial piece of the output: a gate times a scalar, or a bare scalar
/// (degree 0).
#[derive(Clone, Copy, Debug)]
struct Piece {
    gate: Option<usize>,
    coeff: Fp,
}

impl Piece {
    fn gate(g: usize) -> Piece {
        Piece { gate: Some(g), coeff: Fp::ONE }
    }
}

struct Reducer<'a> {
    c: &'a Circuit,
    tm: TypeMap,
    out: CircuitBuilder,
    vars: HashMap<usize, usize>,
    full: HashMap<usize, Option<usize>>,
    quot: HashMap<(usize, usize), Option<Piece>>,
    cat: HashMap<usize, Option<usize>>,
    scalars: HashMap<(usize, usize), Fp>,
}

impl Reducer<'_> {
    /// `X ×_p Y`
    fn ins(&mut self, x: Piece, p: usize, y: Piece) -> Piece {
        let coeff = x.coeff * y.coeff;
        match (x.gate, y.gate) {
            (None, g) | (g, None) => Piece { gate: g, coeff },
            (Some(a), Some(b)) => Piece { gate: Some(self.out.times_p(p, a, b)), coeff },
        }
    }

    fn sum(&mut self, terms: Vec<(usize, Fp)>) -> Option<usize> {
        let terms: Vec<(usize, Fp)> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        (!terms.is_empty()).then(|| self.out.plus_weighted(&terms))
    }

    fn var(&mut self, g: usize) -> usize {
        let GateKind::Var(j) = self.c.gate(g).kind else {
            unreachable!("degree-1 leaves are variables")
        };
        *self.vars.entry(g).or_insert_with(|| self.out.var(j as usize))
    }

    /// `[w₁] ×_0 [w₂]` for a product gate `w`.
    fn cat(&mut self, w: usize) -> Option<usize> {
        if let Some(&g) = self.cat.get(&w) {
            return g;
        }
        let ch = &self.c.gate(w).children;
        let (a, b) = (ch[0].id, ch[1].id);
        let g = match (self.full(a), self.full(b)) {
            (Some(x), Some(y)) => Some(self.out.times_p(0, x, y)),
            _ => None,
        };
        self.cat.insert(w, g);
        g
    }

    /// A gate computing `[u]`.
    fn full(&mut self, u: usize) -> Option<usize> {
        if let Some(&g) = self.full.get(&u) {
            return g;
        }
        let flat = self.tm.flat();
        let du = self.c.gate_degree(u);
        let tu = self.tm.type_of(u);
        let mut tau = tu;
        loop {
            let node = flat.node(tau);
            match node.kind {
                NodeKind::Plus => tau = node.children[0],
                NodeKind::Times | NodeKind::TimesP(_) => {
                    let (l, r) = (node.children[0], node.children[1]);
                    let heavy = if flat.leaves(r) > flat.leaves(l) { r } else { l };
                    if 2 * flat.leaves(heavy) >= du {
                        tau = heavy;
                    } else {
                        break;
                    }
                }
                NodeKind::Leaf | NodeKind::Const => break,
            }
        }
        let p = flat.left(tau) - flat.left(tu);
        let is_leaf = flat.node(tau).kind == NodeKind::Leaf;
        let mut terms = Vec::new();
        for w in self.tm.gates_at(tau).to_vec() {
            let Some(q) = self.quot(u, w) else { continue };
            let x = if is_leaf {
                Piece::gate(self.var(w))
            } else {
                match self.cat(w) {
                    Some(g) => Piece::gate(g),
                    None => continue,
                }
            };
            let t = self.ins(x, p, q);
            terms.push((t.gate.expect("positive degree"), t.coeff));
        }
        let g = self.sum(terms);
        self.full.insert(u, g);
        g
    }

    /// `[u : v]`, as a scalar when both gates have the same degree.
    fn quot(&mut self, u: usize, v: usize) -> Option<Piece> {
        if let Some(&q) = self.quot.get(&(u, v)) {
            return q;
        }
        let (du, dv) = (self.c.gate_degree(u), self.c.gate_degree(v));
        let (tu, tv) = (self.tm.type_of(u), self.tm.type_of(v));
        let res = if !self.tm.flat().is_ancestor(tu, tv) {
            None
        } else if du == dv {
            let s = scalar_quotient(self.c, u, v, &mut self.scalars);
            (!s.is_zero()).then_some(Piece { gate: None, coeff: s })
        } else {
            self.split_quot(u, v, du, dv, tu, tv)
        };
        self.quot.insert((u, v), res);
        res
    }

    fn split_quot(&mut self, u: usize, v: usize, du: usize, dv: usize, tu: usize, tv: usize) -> Option<Piece> {
        let flat = self.tm.flat();
        let path = flat.path(tu, tv).expect("tu is an ancestor of tv");
        let k = path.iter().rposition(|&t| 2 * flat.leaves(t) >= du + dv).expect("tu qualifies");
        let tau = path[k];
        let next = path[k + 1];
        let node = flat.node(tau);
        debug_assert!(matches!(node.kind, NodeKind::Times | NodeKind::TimesP(_)));
        let right_on_path = next == node.children[1];
        let left_leaves = flat.leaves(node.children[0]);
        let p = flat.left(tau) - flat.left(tu);
        let mut terms = Vec::new();
        for w in self.tm.gates_at(tau).to_vec() {
            let Some(quw) = self.quot(u, w) else { continue };
            let ch = &self.c.gate(w).children;
            let (w1, w2) = (ch[0].id, ch[1].id);
            let t = if right_on_path {
                let Some(qv) = self.quot(w2, v) else { continue };
                let Some(f1) = self.full(w1) else { continue };
                let inner = self.ins(qv, p, quw);
                self.ins(Piece::gate(f1), p, inner)
            } else {
                let Some(qv) = self.quot(w1, v) else { continue };
                let Some(f2) = self.full(w2) else { continue };
                let inner = self.ins(qv, p, quw);
                self.ins(Piece::gate(f2), p + left_leaves - dv, inner)
            };
            terms.push((t.gate.expect("positive degree"), t.coeff));
        }
        self.sum(terms).map(Piece::gate)
    }
}

/// Rewrites a canonical UPT circuit as a UPT ⊗-circuit of depth
/// `O(log d)` computing the same polynomial. The output is canonical: every
/// gate has one position. Circuits of degree at most 1
/// are returned unchanged.
pub fn depth_reduce(c: &Circuit) -> Result<Circuit> {
    if c.is_otimes() {
        return Err(Error::InvalidArgument("input already has ×_p gates".into()));
    }
    if c.degree() <= 1 {
        check_upt(c)?;
        return Ok(c.clone());
    }
    let tm = TypeMap::new(c)?;
    let mut r = Reducer {
        c,
        tm,
        out: CircuitBuilder::new(c.n()),
        vars: HashMap::new(),
        full: HashMap::new(),
        quot: HashMap::new(),
        cat: HashMap::new(),
        scalars: HashMap::new(),
    };
    let root = c.root().expect("degree ≥ 2");
    match r.full(root) {
        Some(g) => r.out.finish(g),
        None => Ok(Circuit::zero(c.n())),
    }
}

/// The permutation `σ` such that replacing every `×_p` by `×` in a circuit
/// of this shape turns `f` into `Δ_σ(f)`.
pub fn shuffle_of_shape(shape: &Shape) -> Perm {
    fn go(s: &Shape) -> Vec<usize> {
        match s.kind() {
            ShapeKind::Leaf => vec![0],
            ShapeKind::Const => Vec::new(),
            ShapeKind::Plus(c) => go(c),
            ShapeKind::Times(a, b) => {
                let da = a.degree();
                let mut v = go(a);
                v.extend(go(b).into_iter().map(|k| k + da));
                v
            }
            ShapeKind::TimesP(p, a, b) => {
                let (p, da) = (*p, a.degree());
                let mut v: Vec<usize> = go(a).into_iter().map(|k| p + k).collect();
                v.extend(go(b).into_iter().map(|k| if k < p { k } else { da + k }));
                v
            }
        }
    }
    Perm::from_zero_based(go(shape))
}

/// Replaces `×_p` by `×` and reports the resulting shuffling.
pub fn collapse_to_shuffle(cx: &Circuit) -> Result<(Circuit, Perm)> {
    if cx.root().is_none() {
        return Ok((cx.clone(), Perm::identity(0)));
    }
    let shape = check_upt(cx)?;
    Ok((cx.with_plain_products(), shuffle_of_shape(&shape)))
}
