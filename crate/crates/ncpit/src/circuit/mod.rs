//! Homogeneous non-commutative circuits.
//!
//! Gates are stored in topological order: a gate's children always have
//! smaller ids. Every gate is reachable from the root. Constants may only
//! appear in degree-0 circuits (a constant leaf, or sums of them).

mod canonical;
mod eval;
mod expand;
mod format;
mod shape;

pub use canonical::{
    canonicalize, decompose_at_type, find_gate_in_degree_range, preimage_width, TypeLabel, TypeMap,
};
pub use eval::{eval_matrix, eval_scalar_typed, phi_matrices};
pub use expand::{expand, expand_all, gate_quotient_poly, DEFAULT_MAX_TERMS};
pub use shape::{check_upt, shape_set, FlatNode, FlatShape, NodeKind, Shape, ShapeKind, ShapeNode};
pub(crate) use expand::scalar_quotient;
pub(crate) use shape::gate_shape_sets;

use crate::error::{Error, Result};
use crate::field::Fp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    /// The variable `x_j`, 1-based.
    Var(u16),
    Const(Fp),
    Plus,
    Times,
    /// `left ×_p right`: the left child is inserted into the right one after `p` letters.
    TimesP(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Child {
    pub id: usize,
    /// Edge weight, only on inputs of `Plus` gates. `None` means 1.
    pub scalar: Option<Fp>,
}

impl Child {
    pub fn new(id: usize) -> Child {
        Child { id, scalar: None }
    }

    pub fn weighted(id: usize, c: Fp) -> Child {
        Child { id, scalar: Some(c) }
    }

    pub fn weight(&self) -> Fp {
        self.scalar.unwrap_or(Fp::ONE)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub children: Vec<Child>,
}

impl Gate {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, GateKind::Var(_) | GateKind::Const(_))
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, GateKind::Times | GateKind::TimesP(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    root: Option<usize>,
    degrees: Vec<usize>,
}

impl Circuit {
    /// Validates and wraps a gate list.
    pub fn new(n: usize, gates: Vec<Gate>, root: Option<usize>) -> Result<Circuit> {
        let degrees = validate(n, &gates, root)?;
        Ok(Circuit { n, gates, root, degrees })
    }

    /// The circuit with no gates; it computes the zero polynomial.
    pub fn empty(n: usize) -> Circuit {
        Circuit { n, gates: Vec::new(), root: None, degrees: Vec::new() }
    }

    /// The single gate `const 0`.
    pub fn zero(n: usize) -> Circuit {
        Circuit {
            n,
            gates: vec![Gate { kind: GateKind::Const(Fp::ZERO), children: Vec::new() }],
            root: Some(0),
            degrees: vec![0],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: usize) -> &Gate {
        &self.gates[id]
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate_degree(&self, id: usize) -> usize {
        self.degrees[id]
    }

    /// Degree of the root polynomial; 0 for the empty circuit.
    pub fn degree(&self) -> usize {
        self.root.map_or(0, |r| self.degrees[r])
    }

    /// Whether any `×_p` gate is present.
    pub fn is_otimes(&self) -> bool {
        self.gates.iter().any(|g| matches!(g.kind, GateKind::TimesP(_)))
    }

    /// Longest root-to-leaf path, counted in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            depth[i] = g.children.iter().map(|c| depth[c.id] + 1).max().unwrap_or(0);
        }
        self.root.map_or(0, |r| depth[r])
    }

    /// Replaces every `×_p` gate by a plain `×` gate.
    pub fn with_plain_products(&self) -> Circuit {
        let gates = self
            .gates
            .iter()
            .map(|g| match g.kind {
                GateKind::TimesP(_) => Gate { kind: GateKind::Times, children: g.children.clone() },
                _ => g.clone(),
            })
            .collect();
        Circuit { n: self.n, gates, root: self.root, degrees: self.degrees.clone() }
    }

    /// The same gates viewed over a larger variable set.
    pub fn with_n(&self, n: usize) -> Result<Circuit> {
        Circuit::new(n, self.gates.clone(), self.root)
    }
}

fn validate(n: usize, gates: &[Gate], root: Option<usize>) -> Result<Vec<usize>> {
    let bad = |id: usize, msg: String| Error::InvalidCircuit(format!("gate {id}: {msg}"));
    let mut deg = Vec::with_capacity(gates.len());
    for (id, g) in gates.iter().enumerate() {
        if let Some(c) = g.children.iter().find(|c| c.id >= id) {
            return Err(bad(id, format!("child {} does not precede it", c.id)));
        }
        if !matches!(g.kind, GateKind::Plus) && g.children.iter().any(|c| c.scalar.is_some()) {
            return Err(bad(id, "edge weights are only allowed on + inputs".into()));
        }
        let d = match g.kind {
            GateKind::Var(j) => {
                if !g.children.is_empty() {
                    return Err(bad(id, "a leaf has no children".into()));
                }
                if j == 0 || j as usize > n {
                    return Err(bad(id, format!("variable x{j} outside 1..={n}")));
                }
                1
            }
            GateKind::Const(_) => {
                if !g.children.is_empty() {
                    return Err(bad(id, "a leaf has no children".into()));
                }
                0
            }
            GateKind::Plus => {
                let Some(first) = g.children.first() else {
                    return Err(bad(id, "+ needs at least one input".into()));
                };
                let d = deg[first.id];
                if g.children.iter().any(|c| deg[c.id] != d) {
                    return Err(bad(id, "inputs of + have different degrees".into()));
                }
                d
            }
            GateKind::Times | GateKind::TimesP(_) => {
                if g.children.len() != 2 {
                    return Err(bad(id, "products take exactly two inputs".into()));
                }
                let (a, b) = (deg[g.children[0].id], deg[g.children[1].id]);
                if a == 0 || b == 0 {
                    return Err(bad(id, "constants are only allowed in degree-0 circuits".into()));
                }
                if let GateKind::TimesP(p) = g.kind {
                    if p > b {
                        return Err(bad(id, format!("×_{p} with right input of degree {b}")));
                    }
                }
                a + b
            }
        };
        deg.push(d);
    }
    match root {
        None => {
            if !gates.is_empty() {
                return Err(Error::InvalidCircuit("gates present but no root".into()));
            }
        }
        Some(r) => {
            if r >= gates.len() {
                return Err(Error::InvalidCircuit(format!("root {r} is not a gate")));
            }
            let mut reach = vec![false; gates.len()];
            reach[r] = true;
            for id in (0..gates.len()).rev() {
                if reach[id] {
                    for c in &gates[id].children {
                        reach[c.id] = true;
                    }
                }
            }
            if let Some(id) = reach.iter().position(|r| !r) {
                return Err(bad(id, "not reachable from the root".into()));
            }
        }
    }
    Ok(deg)
}

/// Incremental construction; [`finish`](Self::finish) drops unreachable gates.
#[derive(Clone, Debug, Default)]
pub struct CircuitBuilder {
    n: usize,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(n: usize) -> CircuitBuilder {
        CircuitBuilder { n, gates: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, kind: GateKind, children: Vec<Child>) -> usize {
        self.gates.push(Gate { kind, children });
        self.gates.len() - 1
    }

    pub fn var(&mut self, j: usize) -> usize {
        self.push(GateKind::Var(j as u16), Vec::new())
    }

    pub fn constant(&mut self, c: Fp) -> usize {
        self.push(GateKind::Const(c), Vec::new())
    }

    pub fn plus(&mut self, inputs: &[usize]) -> usize {
        self.push(GateKind::Plus, inputs.iter().map(|&i| Child::new(i)).collect())
    }

    pub fn plus_weighted(&mut self, inputs: &[(usize, Fp)]) -> usize {
        self.push(GateKind::Plus, inputs.iter().map(|&(i, c)| Child::weighted(i, c)).collect())
    }

    pub fn times(&mut self, a: usize, b: usize) -> usize {
        self.push(GateKind::Times, vec![Child::new(a), Child::new(b)])
    }

    pub fn times_p(&mut self, p: usize, a: usize, b: usize) -> usize {
        self.push(GateKind::TimesP(p), vec![Child::new(a), Child::new(b)])
    }

    /// Drops every gate with id `len` or more.
    pub fn truncate(&mut self, len: usize) {
        self.gates.truncate(len);
    }

    /// Left-associated product of several gates.
    pub fn product(&mut self, factors: &[usize]) -> usize {
        let mut acc = factors[0];
        for &f in &factors[1..] {
            acc = self.times(acc, f);
        }
        acc
    }

    /// Keeps the gates reachable from `root`, renumbered in their original order.
    pub fn finish(self, root: usize) -> Result<Circuit> {
        let CircuitBuilder { n, gates } = self;
        if root >= gates.len() {
            return Err(Error::InvalidCircuit(format!("root {root} is not a gate")));
        }
        let mut reach = vec![false; gates.len()];
        reach[root] = true;
        for id in (0..gates.len()).rev() {
            if reach[id] {
                for c in &gates[id].children {
                    if c.id < reach.len() {
                        reach[c.id] = true;
                    }
                }
            }
        }
        let mut new_id = vec![usize::MAX; gates.len()];
        let mut out = Vec::new();
        for (id, g) in gates.into_iter().enumerate() {
            if !reach[id] {
                continue;
            }
            let mut g = g;
            for c in g.children.iter_mut() {
                if c.id >= id {
                    return Err(Error::InvalidCircuit(format!("gate {id}: child {} does not precede it", c.id)));
                }
                c.id = new_id[c.id];
            }
            new_id[id] = out.len();
            out.push(g);
        }
        let r = new_id[root];
        Circuit::new(n, out, Some(r))
    }
}
