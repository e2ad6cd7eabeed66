//! Parse-tree shapes.

use std::collections::HashSet;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use super::{Circuit, GateKind};
use crate::error::{Error, Result};

/// A rooted ordered tree with a cached structural hash.
///
/// Equality is structural; the hash is only a fast path.
#[derive(Clone)]
pub struct Shape(Arc<ShapeNode>);

pub struct ShapeNode {
    kind: ShapeKind,
    hash: u64,
    leaves: usize,
    nodes: usize,
}

#[derive(Clone, PartialEq, Eq)]
pub enum ShapeKind {
    Leaf,
    Const,
    Plus(Shape),
    Times(Shape, Shape),
    TimesP(usize, Shape, Shape),
}

impl Shape {
    fn make(kind: ShapeKind) -> Shape {
        let mut h = DefaultHasher::new();
        let (leaves, nodes) = match &kind {
            ShapeKind::Leaf => {
                0u8.hash(&mut h);
                (1, 1)
            }
            ShapeKind::Const => {
                1u8.hash(&mut h);
                (0, 1)
            }
            ShapeKind::Plus(c) => {
                2u8.hash(&mut h);
                c.0.hash.hash(&mut h);
                (c.0.leaves, c.0.nodes + 1)
            }
            ShapeKind::Times(a, b) => {
                3u8.hash(&mut h);
                a.0.hash.hash(&mut h);
                b.0.hash.hash(&mut h);
                (a.0.leaves + b.0.leaves, a.0.nodes + b.0.nodes + 1)
            }
            ShapeKind::TimesP(p, a, b) => {
                4u8.hash(&mut h);
                p.hash(&mut h);
                a.0.hash.hash(&mut h);
                b.0.hash.hash(&mut h);
                (a.0.leaves + b.0.leaves, a.0.nodes + b.0.nodes + 1)
            }
        };
        Shape(Arc::new(ShapeNode { kind, hash: h.finish(), leaves, nodes }))
    }

    pub fn leaf() -> Shape {
        Shape::make(ShapeKind::Leaf)
    }

    pub fn constant() -> Shape {
        Shape::make(ShapeKind::Const)
    }

    pub fn plus(child: Shape) -> Shape {
        Shape::make(ShapeKind::Plus(child))
    }

    pub fn times(a: Shape, b: Shape) -> Shape {
        Shape::make(ShapeKind::Times(a, b))
    }

    pub fn times_p(p: usize, a: Shape, b: Shape) -> Shape {
        Shape::make(ShapeKind::TimesP(p, a, b))
    }

    pub fn kind(&self) -> &ShapeKind {
        &self.0.kind
    }

    pub fn hash_value(&self) -> u64 {
        self.0.hash
    }

    /// Number of variable leaves, i.e. the degree.
    pub fn degree(&self) -> usize {
        self.0.leaves
    }

    pub fn node_count(&self) -> usize {
        self.0.nodes
    }

    /// The multiplicative skeleton: `+` nodes removed.
    pub fn collapsed(&self) -> Shape {
        match &self.0.kind {
            ShapeKind::Leaf | ShapeKind::Const => self.clone(),
            ShapeKind::Plus(c) => c.collapsed(),
            ShapeKind::Times(a, b) => Shape::times(a.collapsed(), b.collapsed()),
            ShapeKind::TimesP(p, a, b) => Shape::times_p(*p, a.collapsed(), b.collapsed()),
        }
    }

    /// Product nodes on the longest root-to-leaf path.
    pub fn product_height(&self) -> usize {
        match &self.0.kind {
            ShapeKind::Leaf | ShapeKind::Const => 0,
            ShapeKind::Plus(c) => c.product_height(),
            ShapeKind::Times(a, b) | ShapeKind::TimesP(_, a, b) => 1 + a.product_height().max(b.product_height()),
        }
    }

    /// Nested-array JSON of the multiplicative skeleton: `[]` is a leaf,
    /// `[l, r]` a product.
    pub fn to_json(&self) -> Result<String> {
        fn go(s: &Shape) -> Result<serde_json::Value> {
            match s.kind() {
                ShapeKind::Leaf => Ok(serde_json::Value::Array(Vec::new())),
                ShapeKind::Plus(c) => go(c),
                ShapeKind::Times(a, b) => Ok(serde_json::Value::Array(vec![go(a)?, go(b)?])),
                ShapeKind::Const => Err(Error::InvalidArgument("constant shapes have no JSON form".into())),
                ShapeKind::TimesP(..) => Err(Error::InvalidArgument("⊗-shapes have no JSON form".into())),
            }
        }
        Ok(go(self)?.to_string())
    }

    pub fn from_json(text: &str) -> Result<Shape> {
        fn go(v: &serde_json::Value) -> Result<Shape> {
            match v.as_array().map(Vec::as_slice) {
                Some([]) => Ok(Shape::leaf()),
                Some([a, b]) => Ok(Shape::times(go(a)?, go(b)?)),
                _ => Err(Error::Malformed { line: 1, msg: format!("shape node {v} is neither [] nor [l, r]") }),
            }
        }
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Malformed { line: e.line(), msg: e.to_string() })?;
        go(&v)
    }
}

impl PartialEq for Shape {
    fn eq(&self, other: &Shape) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.leaves == other.0.leaves && self.0.kind == other.0.kind)
    }
}

impl Eq for Shape {}

impl Hash for Shape {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            ShapeKind::Leaf => write!(f, "x"),
            ShapeKind::Const => write!(f, "c"),
            ShapeKind::Plus(c) => write!(f, "+{c}"),
            ShapeKind::Times(a, b) => write!(f, "({a} {b})"),
            ShapeKind::TimesP(p, a, b) => write!(f, "({a} _{p} {b})"),
        }
    }
}

/// Per-gate shape sets, or the first gate whose set grew past `k_max`.
pub(crate) fn gate_shape_sets(c: &Circuit, k_max: usize) -> std::result::Result<Vec<Vec<Shape>>, (usize, Vec<Shape>)> {
    let mut sets: Vec<Vec<Shape>> = Vec::with_capacity(c.size());
    for (id, g) in c.gates().iter().enumerate() {
        let mut seen: HashSet<Shape> = HashSet::new();
        let mut out: Vec<Shape> = Vec::new();
        let mut add = |s: Shape, out: &mut Vec<Shape>| {
            if seen.insert(s.clone()) {
                out.push(s);
            }
        };
        match g.kind {
            GateKind::Var(_) => out.push(Shape::leaf()),
            GateKind::Const(_) => out.push(Shape::constant()),
            GateKind::Plus => {
                for ch in &g.children {
                    for s in &sets[ch.id] {
                        add(Shape::plus(s.clone()), &mut out);
                        if out.len() > k_max {
                            return Err((id, out));
                        }
                    }
                }
            }
            GateKind::Times | GateKind::TimesP(_) => {
                let (l, r) = (&sets[g.children[0].id], &sets[g.children[1].id]);
                for a in l {
                    for b in r {
                        let s = match g.kind {
                            GateKind::TimesP(p) => Shape::times_p(p, a.clone(), b.clone()),
                            _ => Shape::times(a.clone(), b.clone()),
                        };
                        add(s, &mut out);
                        if out.len() > k_max {
                            return Err((id, out));
                        }
                    }
                }
            }
        }
        sets.push(out);
    }
    Ok(sets)
}

/// Distinct parse-tree shapes of the root (with `+` nodes kept).
///
/// Fails with [`Error::TooManyShapes`] as soon as any gate has more than
/// `k_max` shapes; every shape of a gate occurs inside some root shape, so
/// this early abort is exact.
pub fn shape_set(c: &Circuit, k_max: usize) -> Result<Vec<Shape>> {
    let Some(root) = c.root() else {
        return Ok(Vec::new());
    };
    match gate_shape_sets(c, k_max) {
        Ok(mut sets) => Ok(std::mem::take(&mut sets[root])),
        Err(_) => Err(Error::TooManyShapes(k_max)),
    }
}

/// The unique shape of a UPT circuit, or a witness pair of distinct shapes.
pub fn check_upt(c: &Circuit) -> Result<Shape> {
    let Some(root) = c.root() else {
        return Err(Error::InvalidCircuit("the empty circuit has no parse trees".into()));
    };
    match gate_shape_sets(c, 1) {
        Ok(mut sets) => Ok(sets[root].pop().expect("every gate has a shape")),
        Err((_, shapes)) => Err(Error::NotUpt(shapes[0].to_string(), shapes[1].to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Leaf,
    Const,
    Plus,
    Times,
    TimesP(usize),
}

#[derive(Clone, Debug)]
pub struct FlatNode {
    pub kind: NodeKind,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Leaves below this node (its degree).
    pub leaves: usize,
    /// Leaves to the left of this node in inorder.
    pub left: usize,
    /// Nodes in the subtree, itself included.
    pub size: usize,
    pub product_height: usize,
}

/// A shape laid out in preorder, node 0 being the root.
#[derive(Clone, Debug)]
pub struct FlatShape {
    nodes: Vec<FlatNode>,
    shape: Shape,
}

impl FlatShape {
    pub fn new(shape: &Shape) -> FlatShape {
        let mut nodes = Vec::with_capacity(shape.node_count());
        fn go(s: &Shape, parent: Option<usize>, left: usize, nodes: &mut Vec<FlatNode>) -> usize {
            let id = nodes.len();
            let kind = match s.kind() {
                ShapeKind::Leaf => NodeKind::Leaf,
                ShapeKind::Const => NodeKind::Const,
                ShapeKind::Plus(_) => NodeKind::Plus,
                ShapeKind::Times(..) => NodeKind::Times,
                ShapeKind::TimesP(p, ..) => NodeKind::TimesP(*p),
            };
            nodes.push(FlatNode {
                kind,
                children: Vec::new(),
                parent,
                leaves: s.degree(),
                left,
                size: s.node_count(),
                product_height: s.product_height(),
            });
            let children = match s.kind() {
                ShapeKind::Leaf | ShapeKind::Const => Vec::new(),
                ShapeKind::Plus(c) => vec![go(c, Some(id), left, nodes)],
                ShapeKind::Times(a, b) | ShapeKind::TimesP(_, a, b) => {
                    let l = go(a, Some(id), left, nodes);
                    let r = go(b, Some(id), left + a.degree(), nodes);
                    vec![l, r]
                }
            };
            nodes[id].children = children;
            id
        }
        go(shape, None, 0, &mut nodes);
        FlatShape { nodes, shape: shape.clone() }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &FlatNode {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[FlatNode] {
        &self.nodes
    }

    pub fn leaves(&self, i: usize) -> usize {
        self.nodes[i].leaves
    }

    pub fn left(&self, i: usize) -> usize {
        self.nodes[i].left
    }

    /// Whether `a` is an ancestor of `b`, counting `a = b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        a <= b && b < a + self.nodes[a].size
    }

    /// Nodes on the path from `a` down to `b`, both included.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if !self.is_ancestor(a, b) {
            return None;
        }
        let mut out = vec![b];
        let mut cur = b;
        while cur != a {
            cur = self.nodes[cur].parent.expect("a is an ancestor of b");
            out.push(cur);
        }
        out.reverse();
        Some(out)
    }

    /// The subtree at `i` as a [`Shape`].
    pub fn subshape(&self, i: usize) -> Shape {
        match self.nodes[i].kind {
            NodeKind::Leaf => Shape::leaf(),
            NodeKind::Const => Shape::constant(),
            NodeKind::Plus => Shape::plus(self.subshape(self.nodes[i].children[0])),
            NodeKind::Times => {
                let c = &self.nodes[i].children;
                Shape::times(self.subshape(c[0]), self.subshape(c[1]))
            }
            NodeKind::TimesP(p) => {
                let c = &self.nodes[i].children;
                Shape::times_p(p, self.subshape(c[0]), self.subshape(c[1]))
            }
        }
    }

    /// Variable leaves in inorder.
    pub fn leaf_nodes(&self) -> Vec<usize> {
        // preorder visits left subtrees first, so leaves come out in inorder
        (0..self.nodes.len()).filter(|&i| self.nodes[i].kind == NodeKind::Leaf).collect()
    }
}
