//! Gate types, canonical form and preimage-width.

use std::collections::HashMap;

use super::shape::{check_upt, FlatShape, NodeKind};
use super::{gate_quotient_poly, Child, Circuit, CircuitBuilder, GateKind};
use crate::error::{Error, Result};
use crate::ncpoly::NcPolynomial;

/// A shape node with its position-type `(i, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TypeLabel {
    pub node: usize,
    /// Leaves below the node.
    pub i: usize,
    /// Leaves to its left in inorder.
    pub p: usize,
}

/// The type of every gate of a canonical UPT circuit.
#[derive(Clone, Debug)]
pub struct TypeMap {
    flat: FlatShape,
    types: Vec<usize>,
    by_node: Vec<Vec<usize>>,
}

impl TypeMap {
    /// Fails unless the circuit is UPT and canonical.
    pub fn new(c: &Circuit) -> Result<TypeMap> {
        let shape = check_upt(c)?;
        let flat = FlatShape::new(&shape);
        let root = c.root().expect("UPT circuits are non-empty");
        let mut types: Vec<Option<usize>> = vec![None; c.size()];
        types[root] = Some(0);
        for g in (0..c.size()).rev() {
            let t = types[g].expect("every gate is reachable from the root");
            let node = flat.node(t);
            for (k, ch) in c.gate(g).children.iter().enumerate() {
                let want = match node.kind {
                    NodeKind::Plus => node.children[0],
                    _ => node.children[k],
                };
                match types[ch.id] {
                    None => types[ch.id] = Some(want),
                    Some(have) if have == want => {}
                    Some(have) => {
                        return Err(Error::NotCanonical(format!(
                            "gate {} sits at shape nodes {have} and {want}",
                            ch.id
                        )))
                    }
                }
            }
        }
        let types: Vec<usize> = types.into_iter().map(|t| t.unwrap()).collect();
        let mut by_node = vec![Vec::new(); flat.len()];
        for (g, &t) in types.iter().enumerate() {
            by_node[t].push(g);
        }
        Ok(TypeMap { flat, types, by_node })
    }

    pub fn flat(&self) -> &FlatShape {
        &self.flat
    }

    pub fn type_of(&self, gate: usize) -> usize {
        self.types[gate]
    }

    /// Gates of type `node`, in increasing id order.
    pub fn gates_at(&self, node: usize) -> &[usize] {
        &self.by_node[node]
    }

    pub fn label(&self, node: usize) -> TypeLabel {
        TypeLabel { node, i: self.flat.leaves(node), p: self.flat.left(node) }
    }

    /// `u ⪰ v` on types.
    pub fn above(&self, u: usize, v: usize) -> bool {
        self.flat.is_ancestor(self.types[u], self.types[v])
    }

    pub fn width(&self) -> usize {
        self.by_node.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Pairs `(gate, shape node)` reachable top-down from the root.
fn placements(c: &Circuit, flat: &FlatShape) -> Vec<Vec<usize>> {
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); c.size()];
    let Some(root) = c.root() else {
        return at;
    };
    at[root].push(0);
    for g in (0..c.size()).rev() {
        let nodes = std::mem::take(&mut at[g]);
        for &t in &nodes {
            let node = flat.node(t);
            for (k, ch) in c.gate(g).children.iter().enumerate() {
                let want = match node.kind {
                    NodeKind::Plus => node.children[0],
                    _ => node.children[k],
                };
                if !at[ch.id].contains(&want) {
                    at[ch.id].push(want);
                }
            }
        }
        at[g] = nodes;
    }
    at
}

/// Canonical copy of a UPT circuit: a gate used at several shape nodes is
/// duplicated once per node.
pub fn canonicalize(c: &Circuit) -> Result<Circuit> {
    let Some(root) = c.root() else {
        return Ok(c.clone());
    };
    let shape = check_upt(c)?;
    let flat = FlatShape::new(&shape);
    let mut memo: HashMap<(usize, usize), usize> = HashMap::new();
    let mut b = CircuitBuilder::new(c.n());
    fn go(
        c: &Circuit,
        flat: &FlatShape,
        g: usize,
        t: usize,
        memo: &mut HashMap<(usize, usize), usize>,
        b: &mut CircuitBuilder,
    ) -> usize {
        if let Some(&id) = memo.get(&(g, t)) {
            return id;
        }
        let node = flat.node(t);
        let gate = c.gate(g);
        let children: Vec<Child> = gate
            .children
            .iter()
            .enumerate()
            .map(|(k, ch)| {
                let want = match node.kind {
                    NodeKind::Plus => node.children[0],
                    _ => node.children[k],
                };
                Child { id: go(c, flat, ch.id, want, memo, b), scalar: ch.scalar }
            })
            .collect();
        let id = b.push(gate.kind, children);
        memo.insert((g, t), id);
        id
    }
    let r = go(c, &flat, root, 0, &mut memo, &mut b);
    b.finish(r)
}

/// Largest number of gates that can sit at one shape node.
///
/// Works on any UPT circuit; for canonical circuits it is the largest type class.
pub fn preimage_width(c: &Circuit) -> Result<usize> {
    if c.root().is_none() {
        return Ok(0);
    }
    let shape = check_upt(c)?;
    let flat = FlatShape::new(&shape);
    let mut count = vec![0usize; flat.len()];
    for nodes in placements(c, &flat) {
        for t in nodes {
            count[t] += 1;
        }
    }
    Ok(count.into_iter().max().unwrap_or(0))
}

/// Writes `f = Σ_r g_r ×_p h_r` with `g_r = [w]` and `h_r = [root : w]` for
/// the gates `w` of type `node`. Returns `p` and the pairs.
pub fn decompose_at_type(
    c: &Circuit,
    node: usize,
    max_terms: usize,
) -> Result<(usize, Vec<(NcPolynomial, NcPolynomial)>)> {
    let tm = TypeMap::new(c)?;
    if node >= tm.flat().len() {
        return Err(Error::OutOfRange(format!("shape has no node {node}")));
    }
    let root = c.root().unwrap();
    let polys = super::expand_all(c, max_terms)?;
    let mut pairs = Vec::new();
    for &w in tm.gates_at(node) {
        let h = gate_quotient_poly(c, &tm, root, w, &polys)?;
        pairs.push((polys[w].clone(), h));
    }
    Ok((tm.flat().left(node), pairs))
}

/// Walks down from the root, taking the higher-degree input at products
/// (ties to the left), and returns the first gate of degree at most `2αD`.
/// Fails when that gate's degree is below `αD`.
pub fn find_gate_in_degree_range(c: &Circuit, alpha: f64) -> Result<usize> {
    let Some(mut g) = c.root() else {
        return Err(Error::InvalidArgument("empty circuit".into()));
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("α = {alpha} is outside (0, 1)")));
    }
    let big_d = c.degree() as f64;
    let (lo, hi) = (alpha * big_d, 2.0 * alpha * big_d);
    loop {
        let deg = c.gate_degree(g) as f64;
        if deg <= hi {
            if deg >= lo {
                return Ok(g);
            }
            return Err(Error::OutOfRange(format!(
                "no gate with degree in [{lo}, {hi}] on the heavy path"
            )));
        }
        let gate = c.gate(g);
        g = match gate.kind {
            GateKind::Plus => gate.children[0].id,
            GateKind::Times | GateKind::TimesP(_) => {
                let (a, b) = (gate.children[0].id, gate.children[1].id);
                if c.gate_degree(b) > c.gate_degree(a) {
                    b
                } else {
                    a
                }
            }
            GateKind::Var(_) | GateKind::Const(_) => {
                return Err(Error::OutOfRange(format!("no gate with degree in [{lo}, {hi}]")));
            }
        };
    }
}
