//! Circuits with few parse-tree shapes: splitting into a sum of UPT
//! circuits, coefficient dependencies of UPT set-multilinear circuits, and a
//! black-box test by low-support shifting.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::biwa::{node_parts, sml_of_gate, WeightAssignment};
use crate::circuit::{
    canonicalize, check_upt, eval_matrix, expand, expand_all, gate_shape_sets, phi_matrices, preimage_width, Child,
    Circuit, CircuitBuilder, GateKind, NodeKind, Shape, ShapeKind, TypeMap, DEFAULT_MAX_TERMS,
};
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::hitting::{visit_stride, HittingSet, Verdict};
use crate::linalg::{EchelonSpan, Matrix};
use crate::ncpoly::NcPolynomial;
use crate::sml::{coeff_operator, SmlPolynomial};

/// Largest number of support slots enumerated per hitting-set point.
const MAX_SLOTS: usize = 1 << 20;
/// Largest dependency matrix materialised.
const MAX_ENTRIES: usize = 1 << 22;

/// A sum of UPT circuits with pairwise distinct shapes.
#[derive(Clone, Debug)]
pub struct SumOfUpt {
    n: usize,
    members: Vec<(Circuit, Shape)>,
}

impl SumOfUpt {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[(Circuit, Shape)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn expand(&self, max_terms: usize) -> Result<NcPolynomial> {
        let mut acc = NcPolynomial::zero(self.n);
        for (c, _) in &self.members {
            acc.add_scaled(&expand(c, max_terms)?, Fp::ONE);
        }
        Ok(acc)
    }
}

/// Splits a circuit with at most `k_max` shapes into one UPT circuit per
/// shape. Each gate is duplicated once per shape it can produce; the member
/// for shape `s` keeps the copies reachable from the root copy with shape `s`.
pub fn fewpt_to_sum(c: &Circuit, k_max: usize) -> Result<SumOfUpt> {
    let Some(root) = c.root() else {
        return Ok(SumOfUpt { n: c.n(), members: Vec::new() });
    };
    let sets = gate_shape_sets(c, k_max).map_err(|_| Error::TooManyShapes(k_max))?;
    let mut members = Vec::with_capacity(sets[root].len());
    for s in &sets[root] {
        let mut b = CircuitBuilder::new(c.n());
        let mut memo = HashMap::new();
        let r = copy_with_shape(c, &sets, root, s, &mut b, &mut memo);
        members.push((b.finish(r)?, s.clone()));
    }
    Ok(SumOfUpt { n: c.n(), members })
}

fn copy_with_shape(
    c: &Circuit,
    sets: &[Vec<Shape>],
    g: usize,
    s: &Shape,
    b: &mut CircuitBuilder,
    memo: &mut HashMap<(usize, Shape), usize>,
) -> usize {
    if let Some(&id) = memo.get(&(g, s.clone())) {
        return id;
    }
    let gate = c.gate(g);
    let id = match (gate.kind, s.kind()) {
        (GateKind::Plus, ShapeKind::Plus(inner)) => {
            let children: Vec<Child> = gate
                .children
                .iter()
                .filter(|ch| sets[ch.id].contains(inner))
                .map(|ch| Child { id: copy_with_shape(c, sets, ch.id, inner, b, memo), scalar: ch.scalar })
                .collect();
            b.push(GateKind::Plus, children)
        }
        (GateKind::Times | GateKind::TimesP(_), ShapeKind::Times(l, r) | ShapeKind::TimesP(_, l, r)) => {
            let x = copy_with_shape(c, sets, gate.children[0].id, l, b, memo);
            let y = copy_with_shape(c, sets, gate.children[1].id, r, b, memo);
            b.push(gate.kind, vec![Child::new(x), Child::new(y)])
        }
        (kind, _) => b.push(kind, Vec::new()),
    };
    memo.insert((g, s.clone()), id);
    id
}

/// Rows `Coeff_{m_i}(f)` written over the monomials of the other parts.
#[derive(Clone, Debug)]
pub struct DependencyMatrix {
    /// Monomials over `S`, in lex order.
    pub rows: Vec<Vec<u16>>,
    /// Monomials over the remaining parts, in lex order.
    pub cols: Vec<Vec<u16>>,
    pub matrix: Matrix,
}

impl DependencyMatrix {
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
}

/// All monomials over `k` parts with letters `1..=n`, in lex order.
fn all_monomials(n: usize, k: usize) -> Vec<Vec<u16>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|m| (1..=n as u16).map(move |j| [m.clone(), vec![j]].concat())).collect();
    }
    out
}

/// `M_{f,S}`: entry `(i, j)` is the coefficient of `n_j` in `Coeff_{m_i}(f)`.
pub fn dependency_matrix(f: &SmlPolynomial, s: &[usize]) -> Result<DependencyMatrix> {
    let mut s = s.to_vec();
    s.sort_unstable();
    let rest: Vec<usize> = f.parts().iter().copied().filter(|p| s.binary_search(p).is_err()).collect();
    if rest.len() + s.len() != f.parts().len() {
        return Err(Error::InvalidArgument(format!("{s:?} is not a set of parts of f")));
    }
    let entries = (f.n() as f64).powi(f.parts().len() as i32);
    if entries > MAX_ENTRIES as f64 {
        return Err(Error::ScaleGuard(format!("dependency matrix with {entries} entries")));
    }
    let rows = all_monomials(f.n(), s.len());
    let cols = all_monomials(f.n(), rest.len());
    let (si, ri) = (positions(f.parts(), &s), positions(f.parts(), &rest));
    let row_of: HashMap<&Vec<u16>, usize> = rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let col_of: HashMap<&Vec<u16>, usize> = cols.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut matrix = Matrix::zeros(rows.len(), cols.len());
    for (m, c) in f.terms() {
        let a = project(m, &si);
        let b = project(m, &ri);
        matrix[(row_of[&a], col_of[&b])] = *c;
    }
    Ok(DependencyMatrix { rows, cols, matrix })
}

fn positions(all: &[usize], sub: &[usize]) -> Vec<usize> {
    sub.iter().map(|p| all.binary_search(p).expect("sub is a subset")).collect()
}

fn project(m: &[u16], idx: &[usize]) -> Vec<u16> {
    idx.iter().map(|&k| m[k]).collect()
}

/// A UPT circuit read set-multilinearly: letter `k` of every word is the
/// variable of part `parts[k]`.
#[derive(Clone, Debug)]
pub struct SmlCircuit {
    pub circuit: Circuit,
    pub parts: Vec<usize>,
}

impl SmlCircuit {
    /// The circuit over parts `1..=d`.
    pub fn from_circuit(c: Circuit) -> SmlCircuit {
        let parts = (1..=c.degree()).collect();
        SmlCircuit { circuit: c, parts }
    }

    pub fn polynomial(&self, max_terms: usize) -> Result<SmlPolynomial> {
        let f = expand(&self.circuit, max_terms)?;
        if f.is_zero() {
            return SmlPolynomial::zero(self.circuit.n(), self.parts.clone());
        }
        sml_of_gate(&f, &self.parts)
    }
}

#[derive(Clone, Copy)]
enum Rep {
    Zero,
    Scalar(Fp),
    Gate(usize),
}

/// `Coeff_m` of a UPT set-multilinear circuit: the leaves of parts in `S`
/// become 0 or 1 according to `m`, and the constants are folded away. A
/// product losing one side becomes a one-input `+` gate, so every gate keeps
/// one shape node and the preimage-width does not grow.
pub fn coeff_circuit(c: &SmlCircuit, s: &[usize], m: &[u16]) -> Result<SmlCircuit> {
    if s.len() != m.len() {
        return Err(Error::Dimension(format!("monomial of length {} for {} parts", m.len(), s.len())));
    }
    let n = c.circuit.n();
    if c.circuit.root().is_none() {
        return Ok(SmlCircuit { circuit: Circuit::empty(n), parts: rest_parts(&c.parts, s)? });
    }
    let canon = canonicalize(&c.circuit)?;
    let tm = TypeMap::new(&canon)?;
    let node_pos = node_parts(tm.flat());
    let rest = rest_parts(&c.parts, s)?;
    // letter wanted at each position, or 0 for kept positions
    let mut want = vec![0u16; c.parts.len() + 1];
    for (&part, &j) in s.iter().zip(m) {
        let k = c.parts.binary_search(&part).expect("checked by rest_parts");
        want[k + 1] = j;
    }
    let kept = |pos: &[usize]| pos.iter().filter(|&&k| want[k] == 0).count();
    let mut b = CircuitBuilder::new(n);
    let mut reps: Vec<Rep> = Vec::with_capacity(canon.size());
    for (id, g) in canon.gates().iter().enumerate() {
        let rep = match g.kind {
            GateKind::Var(j) => {
                let pos = node_pos[tm.type_of(id)][0];
                match want[pos] {
                    0 => Rep::Gate(b.var(j as usize)),
                    w if w == j => Rep::Scalar(Fp::ONE),
                    _ => Rep::Zero,
                }
            }
            GateKind::Const(a) if a.is_zero() => Rep::Zero,
            GateKind::Const(a) => Rep::Scalar(a),
            GateKind::Plus => {
                let mut sum = None::<Fp>;
                let mut inputs = Vec::new();
                for ch in &g.children {
                    match reps[ch.id] {
                        Rep::Zero => {}
                        Rep::Scalar(x) => *sum.get_or_insert(Fp::ZERO) += x * ch.weight(),
                        Rep::Gate(h) => inputs.push(Child { id: h, scalar: ch.scalar }),
                    }
                }
                match (sum, inputs.is_empty()) {
                    (Some(_), false) => unreachable!("inputs of one + gate share a type"),
                    (Some(x), true) if !x.is_zero() => Rep::Scalar(x),
                    (_, true) => Rep::Zero,
                    (None, false) => Rep::Gate(b.push(GateKind::Plus, inputs)),
                }
            }
            GateKind::Times | GateKind::TimesP(_) => {
                let (x, y) = (g.children[0].id, g.children[1].id);
                match (reps[x], reps[y]) {
                    (Rep::Zero, _) | (_, Rep::Zero) => Rep::Zero,
                    (Rep::Scalar(a), Rep::Scalar(e)) => Rep::Scalar(a * e),
                    (Rep::Scalar(a), Rep::Gate(h)) | (Rep::Gate(h), Rep::Scalar(a)) => {
                        Rep::Gate(b.plus_weighted(&[(h, a)]))
                    }
                    (Rep::Gate(u), Rep::Gate(v)) => Rep::Gate(match g.kind {
                        GateKind::TimesP(p) => {
                            let q = kept(&node_pos[tm.type_of(y)][..p]);
                            b.times_p(q, u, v)
                        }
                        _ => b.times(u, v),
                    }),
                }
            }
        };
        reps.push(rep);
    }
    let root = canon.root().expect("non-empty");
    let circuit = match reps[root] {
        Rep::Zero => Circuit::empty(n),
        Rep::Scalar(a) => {
            let mut b = CircuitBuilder::new(n);
            let r = b.constant(a);
            b.finish(r)?
        }
        Rep::Gate(r) => b.finish(r)?,
    };
    Ok(SmlCircuit { circuit, parts: rest })
}

fn rest_parts(parts: &[usize], s: &[usize]) -> Result<Vec<usize>> {
    for (k, p) in s.iter().enumerate() {
        if parts.binary_search(p).is_err() {
            return Err(Error::InvalidArgument(format!("part {p} is not a part of the circuit")));
        }
        if s[..k].contains(p) {
            return Err(Error::InvalidArgument("repeated part in S".into()));
        }
    }
    Ok(parts.iter().copied().filter(|p| !s.contains(p)).collect())
}

type Row = BTreeMap<Vec<u16>, Fp>;

/// `Coeff_m(f)` for every `m` over `s` with a nonzero row.
fn rows_by(f: &SmlPolynomial, s: &[usize]) -> HashMap<Vec<u16>, Row> {
    let rest: Vec<usize> = f.parts().iter().copied().filter(|p| !s.contains(p)).collect();
    let (si, ri) = (positions(f.parts(), s), positions(f.parts(), &rest));
    let mut out: HashMap<Vec<u16>, Row> = HashMap::new();
    for (m, c) in f.terms() {
        out.entry(project(m, &si)).or_default().insert(project(m, &ri), *c);
    }
    out
}

/// Row space of `M_{f,S}` at one node, with a chosen row basis.
#[derive(Clone)]
struct NodeBasis {
    parts: Vec<usize>,
    basis: Vec<Vec<u16>>,
    rows: HashMap<Vec<u16>, Row>,
    cols: HashMap<Vec<u16>, usize>,
    span: EchelonSpan,
}

impl NodeBasis {
    fn new(f: &SmlPolynomial, parts: &[usize], candidates: &[Vec<u16>]) -> NodeBasis {
        let rows = rows_by(f, parts);
        let mut cols = HashMap::new();
        for r in rows.values() {
            for m in r.keys() {
                let k = cols.len();
                cols.entry(m.clone()).or_insert(k);
            }
        }
        let mut nb = NodeBasis { parts: parts.to_vec(), basis: Vec::new(), rows, cols, span: EchelonSpan::new(0) };
        let mut probe = EchelonSpan::new(nb.cols.len());
        for m in candidates {
            if probe.insert(&nb.dense(m)) {
                nb.basis.push(m.clone());
            }
        }
        let mut span = EchelonSpan::new(nb.cols.len());
        for (k, m) in nb.basis.iter().enumerate() {
            span.insert_tracked(&nb.dense(m), k, nb.basis.len());
        }
        nb.span = span;
        nb
    }

    fn dense(&self, m: &[u16]) -> Vec<Fp> {
        let mut v = vec![Fp::ZERO; self.cols.len()];
        if let Some(r) = self.rows.get(m) {
            for (k, c) in r {
                v[self.cols[k]] = *c;
            }
        }
        v
    }

    /// `γ_m`: `Coeff_m(f) = Σ_k γ_k Coeff_{basis_k}(f)`.
    fn gamma(&self, m: &[u16]) -> Vec<Fp> {
        self.span.express(&self.dense(m), self.basis.len()).expect("the basis spans every row")
    }

    /// `u_k = Σ_m γ_{m,k} m` over all `m` with a nonzero row.
    fn basis_polys(&self, n: usize) -> Result<Vec<SmlPolynomial>> {
        let mut out: Vec<Vec<(Vec<u16>, Fp)>> = vec![Vec::new(); self.basis.len()];
        for m in self.rows.keys() {
            for (k, g) in self.gamma(m).into_iter().enumerate() {
                if !g.is_zero() {
                    out[k].push((m.clone(), g));
                }
            }
        }
        out.into_iter().map(|t| SmlPolynomial::from_terms(n, self.parts.clone(), t)).collect()
    }
}

fn row_combination(rows: &HashMap<Vec<u16>, Row>, basis: &[Vec<u16>], gamma: &[Fp]) -> Row {
    let mut acc = Row::new();
    for (m, g) in basis.iter().zip(gamma) {
        if let Some(r) = rows.get(m) {
            for (k, c) in r {
                let e = acc.entry(k.clone()).or_insert(Fp::ZERO);
                *e += *g * *c;
            }
        }
    }
    acc.retain(|_, c| !c.is_zero());
    acc
}

/// Joins monomials over `s1` and `s2` into one over their sorted union.
fn join(s: &[usize], s1: &[usize], m1: &[u16], s2: &[usize], m2: &[u16]) -> Vec<u16> {
    s.iter()
        .map(|p| match s1.iter().position(|q| q == p) {
            Some(k) => m1[k],
            None => m2[s2.iter().position(|q| q == p).expect("s is the union")],
        })
        .collect()
}

/// The objects `(S, R, P, Q, Γ)` separating `g` from the shape and width of `f`.
#[derive(Clone, Debug)]
pub struct UptWitness {
    /// Shape node (preorder index in `f`'s canonical shape).
    pub node: usize,
    /// `S`: the parts below the node.
    pub parts: Vec<usize>,
    /// `m_1, …, m_{w'}` over `S`.
    pub monomials: Vec<Vec<u16>>,
    pub p: Vec<SmlPolynomial>,
    pub q: Vec<SmlPolynomial>,
    pub r: Vec<SmlPolynomial>,
    pub gamma: Vec<Fp>,
    /// Computes every entry of `R`; the entries are the gates `r_outputs`.
    pub r_circuit: SmlCircuit,
    pub r_outputs: Vec<usize>,
    /// Whether the node is a leaf (then `w' ≤ w + 1`) or a product (`w' ≤ w²`).
    pub at_leaf: bool,
}

/// What [`UptWitness::check`] measured.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub w_prime: usize,
    pub gamma_support: usize,
    pub r_rank: usize,
    pub r_width: usize,
}

impl UptWitness {
    pub fn w_prime(&self) -> usize {
        self.monomials.len()
    }

    /// Re-checks every property by exact linear algebra.
    pub fn check(&self, f: &SmlPolynomial, g: &SmlPolynomial, w: usize) -> Result<WitnessReport> {
        let fail = |msg: String| Err(Error::InvalidArgument(format!("witness check failed: {msg}")));
        let wp = self.w_prime();
        if [self.p.len(), self.q.len(), self.r.len(), self.gamma.len()].iter().any(|&l| l != wp) {
            return fail("vector lengths differ".into());
        }
        let bound = if self.at_leaf { w + 1 } else { w * w };
        if wp > bound.max(1) {
            return fail(format!("w' = {wp} exceeds {bound}"));
        }
        for (k, m) in self.monomials.iter().enumerate() {
            if coeff_operator(f, &self.parts, m)? != self.p[k] || coeff_operator(g, &self.parts, m)? != self.q[k] {
                return fail(format!("entry {k} is not the coefficient of m_{k}"));
            }
        }
        let combine = |v: &[SmlPolynomial]| -> Result<SmlPolynomial> {
            let mut acc = SmlPolynomial::zero(f.n(), v[0].parts().to_vec())?;
            for (x, c) in v.iter().zip(&self.gamma) {
                acc = acc.add(&x.scale(*c))?;
            }
            Ok(acc)
        };
        if !combine(&self.p)?.is_zero() {
            return fail("ΓP ≠ 0".into());
        }
        if combine(&self.q)?.is_zero() {
            return fail("ΓQ = 0".into());
        }
        let support = self.gamma.iter().filter(|c| !c.is_zero()).count();
        if support > w + 1 {
            return fail(format!("Γ has support {support} > w + 1"));
        }
        let mut monos: BTreeMap<&Vec<u16>, usize> = BTreeMap::new();
        for r in &self.r {
            for (m, _) in r.terms() {
                let k = monos.len();
                monos.entry(m).or_insert(k);
            }
        }
        let mut mat = Matrix::zeros(wp, monos.len());
        for (i, r) in self.r.iter().enumerate() {
            for (m, c) in r.terms() {
                mat[(i, monos[m])] = *c;
            }
        }
        let r_rank = mat.rank();
        if r_rank != wp {
            return fail(format!("R has rank {r_rank}, expected {wp}"));
        }
        let polys = expand_all(&self.r_circuit.circuit, DEFAULT_MAX_TERMS)?;
        for (k, &o) in self.r_outputs.iter().enumerate() {
            if sml_of_gate(&polys[o], &self.r_circuit.parts)? != self.r[k] {
                return fail(format!("gate {o} of the R circuit does not compute R_{k}"));
            }
        }
        let r_width = preimage_width(&self.r_circuit.circuit)?;
        if r_width > w.max(wp) {
            return fail(format!("R circuit has width {r_width} > max(w, w') = {}", w.max(wp)));
        }
        if !self.at_leaf {
            // f = Σ R_i P_i, and g too since every node below passed
            for (target, v) in [(f, &self.p), (g, &self.q)] {
                let mut acc = SmlPolynomial::zero(f.n(), f.parts().to_vec())?;
                for (r, x) in self.r.iter().zip(v.iter()) {
                    acc = acc.add(&r.mul(x)?)?;
                }
                if &acc != target {
                    return fail("Σ R_i P_i does not reassemble the polynomial".into());
                }
            }
        }
        Ok(WitnessReport { w_prime: wp, gamma_support: support, r_rank, r_width })
    }
}

/// Finds the lowest node of `f`'s shape where a coefficient dependency of
/// `f` fails for `g`, and builds the separating objects there.
///
/// `f` is a UPT circuit of degree `d ≥ 1` and preimage-width at most `w`,
/// read over parts `1..=d`; `g` lives on the same parts. When every
/// dependency holds, `g` is computable with `f`'s shape at width `w` and
/// [`Error::NoViolation`] is returned.
pub fn common_upt_witness(f: &Circuit, g: &SmlPolynomial, w: usize) -> Result<UptWitness> {
    let d = f.degree();
    if f.root().is_none() || d == 0 {
        return Err(Error::InvalidArgument("f needs degree at least 1".into()));
    }
    let n = f.n();
    if g.n() != n || g.parts() != (1..=d).collect::<Vec<_>>() {
        return Err(Error::Dimension(format!("g must live on parts 1..={d} with {n} letters")));
    }
    let fc = canonicalize(f)?;
    let tm = TypeMap::new(&fc)?;
    if tm.width() > w {
        return Err(Error::InvalidArgument(format!("f has preimage-width {} > {w}", tm.width())));
    }
    let flat = tm.flat();
    let fs = SmlCircuit::from_circuit(fc.clone()).polynomial(DEFAULT_MAX_TERMS)?;
    let pos = node_parts(flat);
    let g_rows: Vec<HashMap<Vec<u16>, Row>> = pos.iter().map(|s| rows_by(g, s)).collect();
    let mut info: Vec<Option<NodeBasis>> = vec![None; flat.len()];
    for t in (0..flat.len()).rev() {
        let node = flat.node(t);
        let s = &pos[t];
        let candidates: Vec<Vec<u16>> = match node.kind {
            NodeKind::Const => return Err(Error::InvalidArgument("constant inside a circuit of degree ≥ 1".into())),
            NodeKind::Plus => {
                info[t] = info[node.children[0]].clone();
                continue;
            }
            NodeKind::Leaf => (1..=n as u16).map(|j| vec![j]).collect(),
            NodeKind::Times | NodeKind::TimesP(_) => {
                let (a, b) = (info[node.children[0]].as_ref().unwrap(), info[node.children[1]].as_ref().unwrap());
                let mut out = Vec::with_capacity(a.basis.len() * b.basis.len());
                for m1 in &a.basis {
                    for m2 in &b.basis {
                        out.push(join(s, &a.parts, m1, &b.parts, m2));
                    }
                }
                out
            }
        };
        let nb = NodeBasis::new(&fs, s, &candidates);
        for m in &candidates {
            let gamma = nb.gamma(m);
            let mut want = g_rows[t].get(m).cloned().unwrap_or_default();
            want.retain(|_, c| !c.is_zero());
            if row_combination(&g_rows[t], &nb.basis, &gamma) == want {
                continue;
            }
            let wit = build_witness(&fc, &tm, &pos, &info, t, &nb, &candidates, m, &gamma, &fs, g)?;
            wit.check(&fs, g, w)?;
            return Ok(wit);
        }
        info[t] = Some(nb);
    }
    Err(Error::NoViolation)
}

#[allow(clippy::too_many_arguments)]
fn build_witness(
    fc: &Circuit,
    tm: &TypeMap,
    pos: &[Vec<usize>],
    info: &[Option<NodeBasis>],
    t: usize,
    nb: &NodeBasis,
    candidates: &[Vec<u16>],
    m: &[u16],
    gamma: &[Fp],
    fs: &SmlPolynomial,
    g: &SmlPolynomial,
) -> Result<UptWitness> {
    let n = fc.n();
    let flat = tm.flat();
    let node = flat.node(t);
    let s = pos[t].clone();
    let at_leaf = node.kind == NodeKind::Leaf;
    let monomials: Vec<Vec<u16>> =
        if at_leaf { nb.basis.iter().cloned().chain([m.to_vec()]).collect() } else { candidates.to_vec() };
    let mut coef = vec![Fp::ZERO; monomials.len()];
    coef[monomials.iter().position(|x| x == m).unwrap()] = Fp::ONE;
    for (bm, gk) in nb.basis.iter().zip(gamma) {
        coef[monomials.iter().position(|x| x == bm).unwrap()] -= *gk;
    }
    let p = monomials.iter().map(|mi| coeff_operator(fs, &s, mi)).collect::<Result<Vec<_>>>()?;
    let q = monomials.iter().map(|mi| coeff_operator(g, &s, mi)).collect::<Result<Vec<_>>>()?;
    let mut b = CircuitBuilder::new(n);
    let (r, outputs) = if at_leaf {
        let r: Vec<SmlPolynomial> = monomials
            .iter()
            .map(|mi| SmlPolynomial::from_terms(n, s.clone(), [(mi.clone(), Fp::ONE)]))
            .collect::<Result<_>>()?;
        let outs: Vec<usize> = monomials.iter().map(|mi| b.var(mi[0] as usize)).collect();
        (r, outs)
    } else {
        let (c1, c2) = (node.children[0], node.children[1]);
        let (i1, i2) = (info[c1].as_ref().unwrap(), info[c2].as_ref().unwrap());
        let (u, v) = (i1.basis_polys(n)?, i2.basis_polys(n)?);
        let ug = span_gates(fc, tm, pos, c1, &u, &mut b)?;
        let vg = span_gates(fc, tm, pos, c2, &v, &mut b)?;
        let mut r = Vec::with_capacity(u.len() * v.len());
        for x in &u {
            for y in &v {
                r.push(x.mul(y)?);
            }
        }
        let mut outs = Vec::with_capacity(r.len());
        for &x in &ug {
            for &y in &vg {
                outs.push(match node.kind {
                    NodeKind::TimesP(p) => b.times_p(p, x, y),
                    _ => b.times(x, y),
                });
            }
        }
        (r, outs)
    };
    // outputs are the last gates before the root, so their ids survive `finish`
    let first = b.len() - outputs.len();
    let root = b.plus(&outputs);
    let circuit = b.finish(root)?;
    let kept = circuit.size() - 1;
    let r_outputs: Vec<usize> = (kept - outputs.len()..kept).collect();
    debug_assert_eq!(outputs, (first..first + outputs.len()).collect::<Vec<_>>());
    Ok(UptWitness {
        node: t,
        parts: s.clone(),
        monomials,
        p,
        q,
        r,
        gamma: coef,
        r_circuit: SmlCircuit { circuit, parts: s },
        r_outputs,
        at_leaf,
    })
}

/// Copies the gates of `fc` below node `t` into `b` and adds one `+` gate
/// per target polynomial, written in the span of the node's gates.
fn span_gates(
    fc: &Circuit,
    tm: &TypeMap,
    pos: &[Vec<usize>],
    t: usize,
    targets: &[SmlPolynomial],
    b: &mut CircuitBuilder,
) -> Result<Vec<usize>> {
    let flat = tm.flat();
    let polys = expand_all(fc, DEFAULT_MAX_TERMS)?;
    let mut map: HashMap<usize, usize> = HashMap::new();
    for (id, g) in fc.gates().iter().enumerate() {
        if !flat.is_ancestor(t, tm.type_of(id)) {
            continue;
        }
        let children = g.children.iter().map(|ch| Child { id: map[&ch.id], scalar: ch.scalar }).collect();
        map.insert(id, b.push(g.kind, children));
    }
    let gates = tm.gates_at(t);
    let rows: Vec<SmlPolynomial> = gates.iter().map(|&g| sml_of_gate(&polys[g], &pos[t])).collect::<Result<_>>()?;
    let mut monos: HashMap<Vec<u16>, usize> = HashMap::new();
    for p in rows.iter().chain(targets) {
        for (m, _) in p.terms() {
            let k = monos.len();
            monos.entry(m.clone()).or_insert(k);
        }
    }
    let dense = |p: &SmlPolynomial| {
        let mut v = vec![Fp::ZERO; monos.len()];
        for (m, c) in p.terms() {
            v[monos[m]] = *c;
        }
        v
    };
    let mut span = EchelonSpan::new(monos.len());
    for (k, r) in rows.iter().enumerate() {
        span.insert_tracked(&dense(r), k, rows.len());
    }
    let mut out = Vec::with_capacity(targets.len());
    for u in targets {
        let combo = span
            .express(&dense(u), rows.len())
            .ok_or_else(|| Error::InvalidArgument("basis polynomial outside the span of its node".into()))?;
        let inputs: Vec<(usize, Fp)> =
            gates.iter().zip(combo).filter(|(_, c)| !c.is_zero()).map(|(&g, c)| (map[&g], c)).collect();
        out.push(b.plus_weighted(&inputs));
    }
    Ok(out)
}

/// A monomial of the shifted polynomial with its coefficient over `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportMonomial {
    pub parts: Vec<usize>,
    pub letters: Vec<u16>,
    /// Exponent vector of `t` mapped to its coefficient.
    pub coefficient: BTreeMap<Vec<u64>, Fp>,
}

impl SupportMonomial {
    pub fn support(&self) -> usize {
        self.parts.len()
    }
}

/// Expands `f(y + t^{wt})` with exact coefficients in `t` and returns a
/// non-constant `y`-monomial with nonzero coefficient on the fewest
/// variables, if one has at most `ell_max` of them. Ties go to the
/// lexicographically first part set and letters.
pub fn shift_and_find_support(f: &SmlPolynomial, wt: &WeightAssignment, ell_max: usize) -> Result<SupportMonomial> {
    let parts = f.parts();
    if parts.iter().any(|&i| i > wt.parts()) || f.n() > wt.n() {
        return Err(Error::Dimension("weight assignment does not cover f".into()));
    }
    if parts.is_empty() && !f.is_zero() {
        let coefficient = [(vec![0; wt.len()], f.coeff(&[]))].into_iter().collect();
        return Ok(SupportMonomial { parts: Vec::new(), letters: Vec::new(), coefficient });
    }
    for size in 1..=ell_max.min(parts.len()) {
        for a in subsets(parts.len(), size) {
            let rest: Vec<usize> = (0..parts.len()).filter(|k| !a.contains(k)).collect();
            let rest_parts: Vec<usize> = rest.iter().map(|&k| parts[k]).collect();
            let mut groups: BTreeMap<Vec<u16>, BTreeMap<Vec<u64>, Fp>> = BTreeMap::new();
            for (m, c) in f.terms() {
                let e = wt.weight_of(&rest_parts, &project(m, &rest));
                *groups.entry(project(m, &a)).or_default().entry(e).or_insert(Fp::ZERO) += *c;
            }
            for (letters, mut coefficient) in groups {
                coefficient.retain(|_, c| !c.is_zero());
                if !coefficient.is_empty() {
                    return Ok(SupportMonomial { parts: a.iter().map(|&k| parts[k]).collect(), letters, coefficient });
                }
            }
        }
    }
    Err(Error::NoSmallSupport(ell_max))
}

/// `size`-subsets of `0..k` in lex order.
fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < size - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, size, &mut Vec::with_capacity(size), &mut out);
    out
}

/// `⌈log₂(w(w+1))⌉ + (k−1)·⌈log₂(w(w+1)·(w(w+1)+1))⌉`: the support bound of
/// the inductive step, unrolled.
pub fn unrolled_support_bound(w: usize, k: usize) -> usize {
    let ww = w * (w + 1);
    let lg = |x: usize| x.next_power_of_two().trailing_zeros() as usize;
    lg(ww) + k.saturating_sub(1) * lg(ww * (ww + 1))
}

/// `⌈2·2^k·log₂(w(w+1))⌉`: the support budget of the hitting set.
pub fn support_budget(w: usize, k: usize) -> usize {
    (2.0 * (1u64 << k) as f64 * ((w * (w + 1)) as f64).log2()).ceil() as usize
}

/// `w_0 = w`, `w_{i+1} = w_i(w_i + 1)`: the BIWA width after `k` steps.
pub fn biwa_width(w: usize, k: usize) -> Result<usize> {
    let mut x = w;
    for _ in 0..k {
        x = x.checked_mul(x + 1).ok_or_else(|| Error::ScaleGuard(format!("width {w} after {k} steps overflows")))?;
    }
    Ok(x)
}

/// Points `b + z`: `b` from the UPT hitting set for width `w_k`, and `z` a
/// 0/1 vector with at most `B` ones.
#[derive(Clone, Debug)]
pub struct FewptHittingSet {
    hs: HittingSet,
    k: usize,
    w: usize,
    budget: usize,
    slots: Vec<Vec<usize>>,
}

impl FewptHittingSet {
    /// For sums of `k` UPT circuits of width `w` and `r` product levels.
    pub fn new(n: usize, d: usize, w: usize, k: usize, r: usize) -> Result<FewptHittingSet> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        let hs = HittingSet::new(n, d, biwa_width(w, k)?, r)?;
        let vars = n * d;
        let budget = support_budget(w, k).min(vars);
        let count: f64 = (0..=budget).map(|j| binomial(vars, j)).sum();
        if count > MAX_SLOTS as f64 {
            return Err(Error::ScaleGuard(format!("{count} support slots per point")));
        }
        let slots = (0..=budget).flat_map(|j| subsets(vars, j)).collect();
        Ok(FewptHittingSet { hs, k, w, budget, slots })
    }

    pub fn upt_set(&self) -> &HittingSet {
        &self.hs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// `B`: the largest support tried.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn slots(&self) -> usize {
        self.slots.len()
    }

    pub fn cardinality(&self) -> u128 {
        self.hs.cardinality().saturating_mul(self.slots.len() as u128)
    }

    /// Point `idx`: the slot varies fastest.
    pub fn point_at(&self, idx: u128) -> Vec<Fp> {
        let ns = self.slots.len() as u128;
        let mut b = self.hs.point_at(idx / ns);
        for &v in &self.slots[(idx % ns) as usize] {
            b[v] += Fp::ONE;
        }
        b
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Black-box test over [`FewptHittingSet`], with the same oracle contract
/// and scale guard as [`crate::hitting::blackbox_pit_upt`]. Base points are
/// visited in the stride order of the UPT set; all slots of a base point are
/// tried together.
pub fn fewpt_blackbox_pit<F>(oracle: F, hs: &FewptHittingSet, max_points: u128) -> Result<Verdict>
where
    F: Fn(&[Matrix]) -> Result<Matrix> + Sync,
{
    let (n, d) = (hs.hs.n(), hs.hs.d());
    let base = hs.hs.cardinality();
    let ns = hs.slots.len() as u128;
    let card = hs.cardinality();
    let limit = card.min(max_points);
    let stride = visit_stride(base);
    let index = |k: u128| {
        let b = k / ns;
        let b = if stride == 1 { b } else { b * stride % base };
        b * ns + k % ns
    };
    let value = |idx: u128| -> Result<bool> {
        let y = hs.point_at(idx);
        let mats = phi_matrices(d, n, |i, j| y[(i - 1) * n + (j - 1)]);
        let m = oracle(&mats)?;
        if m.rows() != d + 1 || m.cols() != d + 1 {
            return Err(Error::Dimension(format!("oracle returned {}×{}, expected {}×{}", m.rows(), m.cols(), d + 1, d + 1)));
        }
        Ok(!m[(0, d)].is_zero())
    };
    let mut start = 0u128;
    while start < limit {
        let end = (start + 4096).min(limit);
        let hit = (0..(end - start) as u64)
            .into_par_iter()
            .map(|k| {
                let idx = index(start + k as u128);
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
            "all {limit} points tried vanish but the set has {card}; zero is not certified"
        )));
    }
    Ok(Verdict::Zero)
}

/// Parameters measured from a circuit for [`fewpt_pit_circuit`].
#[derive(Clone, Debug)]
pub struct FewptReport {
    pub verdict: Verdict,
    pub shapes: usize,
    pub width: usize,
    pub levels: usize,
    pub budget: usize,
    pub cardinality: u128,
}

/// Tests a circuit with at most `k` shapes, using its own gates as the
/// oracle. Width and product depth are measured from the UPT members.
pub fn fewpt_pit_circuit(c: &Circuit, k: usize, max_points: u128) -> Result<FewptReport> {
    let empty = |verdict| FewptReport { verdict, shapes: 0, width: 0, levels: 0, budget: 0, cardinality: 1 };
    if c.root().is_none() {
        return Ok(empty(Verdict::Zero));
    }
    let sum = fewpt_to_sum(c, k)?;
    if c.degree() == 0 {
        let v = if expand(c, 1)?.is_zero() { Verdict::Zero } else { Verdict::NonZero(0) };
        return Ok(FewptReport { shapes: sum.len(), ..empty(v) });
    }
    let mut width = 1;
    let mut levels = 0;
    for (m, s) in sum.members() {
        width = width.max(preimage_width(m)?);
        levels = levels.max(s.product_height());
        debug_assert_eq!(&check_upt(m)?, s);
    }
    let hs = FewptHittingSet::new(c.n(), c.degree(), width, k, levels)?;
    let verdict = fewpt_blackbox_pit(|m| eval_matrix(c, m), &hs, max_points)?;
    Ok(FewptReport { verdict, shapes: sum.len(), width, levels, budget: hs.budget(), cardinality: hs.cardinality() })
}
