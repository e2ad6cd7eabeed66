//! Sample circuits and random generators for tests, benchmarks and the CLI.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::circuit::{Circuit, CircuitBuilder, FlatShape, NodeKind, Shape, ShapeKind};
use crate::error::{Error, Result};
use crate::field::Fp;

/// `(x1+x2)·x2 + (x1+x2)·x4 + (x1+x2+x3)·x4`: a UPT circuit whose single
/// shape is `+((+x) x)`.
pub fn sample_upt_circuit() -> Circuit {
    let mut b = CircuitBuilder::new(4);
    let x: Vec<usize> = (1..=4).map(|j| b.var(j)).collect();
    let s1 = b.plus(&[x[0], x[1]]);
    let s2 = b.plus(&[x[0], x[1], x[2]]);
    let m1 = b.times(s1, x[1]);
    let m2 = b.times(s1, x[3]);
    let m3 = b.times(s2, x[3]);
    let r = b.plus(&[m1, m2, m3]);
    b.finish(r).unwrap()
}

/// Like [`sample_upt_circuit`] but the middle product is `(x1+x2)·(x1+x2+x3)`,
/// giving two parse-tree shapes.
pub fn sample_two_shape_circuit() -> Circuit {
    let mut b = CircuitBuilder::new(4);
    let x: Vec<usize> = (1..=4).map(|j| b.var(j)).collect();
    let s1 = b.plus(&[x[0], x[1]]);
    let s2 = b.plus(&[x[0], x[1], x[2]]);
    let m1 = b.times(s1, x[1]);
    let m2 = b.times(s1, s2);
    let m3 = b.times(s2, x[3]);
    let r = b.plus(&[m1, m2, m3]);
    b.finish(r).unwrap()
}

/// A uniformly split random binary tree with `d` leaves.
pub fn random_product_shape<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Shape {
    assert!(d >= 1, "shapes have at least one leaf");
    if d == 1 {
        return Shape::leaf();
    }
    let a = rng.random_range(1..d);
    Shape::times(random_product_shape(rng, a), random_product_shape(rng, d - a))
}

/// The balanced product tree with `d` leaves (left half rounded up).
pub fn balanced_shape(d: usize) -> Shape {
    if d <= 1 {
        return Shape::leaf();
    }
    let a = d.div_ceil(2);
    Shape::times(balanced_shape(a), balanced_shape(d - a))
}

/// The left comb `((x x) x) ...` with `d` leaves.
pub fn left_comb_shape(d: usize) -> Shape {
    let mut s = Shape::leaf();
    for _ in 1..d {
        s = Shape::times(s, Shape::leaf());
    }
    s
}

/// Wraps nodes of a product shape in `+` nodes independently with probability `prob`.
pub fn with_random_sums<R: Rng + ?Sized>(rng: &mut R, s: &Shape, prob: f64) -> Shape {
    let inner = match s.kind() {
        ShapeKind::Leaf | ShapeKind::Const => s.clone(),
        ShapeKind::Plus(c) => Shape::plus(with_random_sums(rng, c, prob)),
        ShapeKind::Times(a, b) => Shape::times(with_random_sums(rng, a, prob), with_random_sums(rng, b, prob)),
        ShapeKind::TimesP(p, a, b) => {
            Shape::times_p(*p, with_random_sums(rng, a, prob), with_random_sums(rng, b, prob))
        }
    };
    if rng.random_bool(prob) {
        Shape::plus(inner)
    } else {
        inner
    }
}

/// Knobs for [`random_upt_circuit`].
#[derive(Clone, Copy, Debug)]
pub struct UptParams {
    pub n: usize,
    /// Gates per shape node are drawn from `1..=w`.
    pub w: usize,
    /// Upper bound on the number of monomials of any gate.
    pub max_terms: usize,
    /// Largest fan-in of a generated `+` gate.
    pub max_fan_in: usize,
    /// Draw `+` weights from the whole field instead of `{1, -1}`.
    pub random_weights: bool,
}

impl UptParams {
    pub fn new(n: usize, w: usize) -> UptParams {
        UptParams { n, w, max_terms: 4096, max_fan_in: 3, random_weights: true }
    }
}

/// A random canonical UPT circuit with the given shape.
///
/// Every shape node receives between 1 and `w` gates wired only to gates of
/// the child nodes, so the result has this shape and preimage-width ≤ `w`.
/// Leaves draw their variables from small per-leaf pools whose sizes
/// multiply to at most `max_terms`, which bounds every expansion.
pub fn random_upt_circuit<R: Rng + ?Sized>(rng: &mut R, shape: &Shape, params: &UptParams) -> Result<Circuit> {
    if params.n == 0 || params.w == 0 {
        return Err(Error::InvalidArgument("n and w must be positive".into()));
    }
    let flat = FlatShape::new(shape);
    let mut leaf_vars: Vec<Vec<usize>> = vec![Vec::new(); flat.len()];
    let mut leaves = flat.leaf_nodes();
    leaves.shuffle(rng);
    let mut budget = params.max_terms.max(1);
    for &l in &leaves {
        let most = params.n.min(params.w).min(budget);
        let k = rng.random_range(1..=most.max(1));
        budget /= k;
        let mut pool: Vec<usize> = (1..=params.n).collect();
        pool.shuffle(rng);
        pool.truncate(k);
        leaf_vars[l] = pool;
    }
    let mut b = CircuitBuilder::new(params.n);
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); flat.len()];
    for t in (0..flat.len()).rev() {
        let node = flat.node(t);
        let count = rng.random_range(1..=params.w);
        let mut pool = Vec::with_capacity(count);
        for _ in 0..count {
            let id = match node.kind {
                NodeKind::Leaf => {
                    let v = *leaf_vars[t].choose(rng).unwrap();
                    b.var(v)
                }
                NodeKind::Const => b.constant(random_weight(rng, true)),
                NodeKind::Plus => {
                    let src = &pools[node.children[0]];
                    let k = rng.random_range(1..=src.len().min(params.max_fan_in).max(1));
                    let mut picks: Vec<usize> = src.clone();
                    picks.shuffle(rng);
                    picks.truncate(k);
                    picks.sort_unstable();
                    let inputs: Vec<(usize, Fp)> =
                        picks.into_iter().map(|g| (g, random_weight(rng, params.random_weights))).collect();
                    b.plus_weighted(&inputs)
                }
                NodeKind::Times | NodeKind::TimesP(_) => {
                    let l = *pools[node.children[0]].choose(rng).unwrap();
                    let r = *pools[node.children[1]].choose(rng).unwrap();
                    match node.kind {
                        NodeKind::TimesP(p) => b.times_p(p, l, r),
                        _ => b.times(l, r),
                    }
                }
            };
            pool.push(id);
        }
        pools[t] = pool;
    }
    let root = *pools[0].choose(rng).unwrap();
    b.finish(root)
}

fn random_weight<R: Rng + ?Sized>(rng: &mut R, full: bool) -> Fp {
    if full {
        loop {
            let c = Fp::new(rng.random::<u64>());
            if !c.is_zero() {
                return c;
            }
        }
    } else if rng.random_bool(0.5) {
        Fp::ONE
    } else {
        -Fp::ONE
    }
}

/// A circuit with exactly `shapes.len()` parse-tree shapes: one random UPT
/// part per shape, with gate pools shared wherever two parts have the same
/// subshape, all summed at a `+` root.
pub fn random_fewpt_circuit<R: Rng + ?Sized>(rng: &mut R, shapes: &[Shape], params: &UptParams) -> Result<Circuit> {
    let d = shapes.first().map(Shape::degree).unwrap_or(0);
    if shapes.iter().any(|s| s.degree() != d) {
        return Err(Error::InvalidArgument("all shapes need the same degree".into()));
    }
    for (i, s) in shapes.iter().enumerate() {
        if shapes[..i].contains(s) {
            return Err(Error::InvalidArgument("shapes must be distinct".into()));
        }
    }
    let mut b = CircuitBuilder::new(params.n);
    let mut pools: std::collections::HashMap<Shape, Vec<usize>> = std::collections::HashMap::new();
    fn build<R: Rng + ?Sized>(
        rng: &mut R,
        s: &Shape,
        params: &UptParams,
        b: &mut CircuitBuilder,
        pools: &mut std::collections::HashMap<Shape, Vec<usize>>,
    ) -> Vec<usize> {
        if let Some(p) = pools.get(s) {
            return p.clone();
        }
        let count = rng.random_range(1..=params.w);
        let pool: Vec<usize> = match s.kind() {
            ShapeKind::Leaf => (0..count).map(|_| b.var(rng.random_range(1..=params.n))).collect(),
            ShapeKind::Const => (0..count).map(|_| b.constant(random_weight(rng, true))).collect(),
            ShapeKind::Plus(c) => {
                let src = build(rng, c, params, b, pools);
                (0..count)
                    .map(|_| {
                        let k = rng.random_range(1..=src.len().min(params.max_fan_in));
                        let mut picks = src.clone();
                        picks.shuffle(rng);
                        picks.truncate(k);
                        picks.sort_unstable();
                        let inputs: Vec<(usize, Fp)> =
                            picks.into_iter().map(|g| (g, random_weight(rng, params.random_weights))).collect();
                        b.plus_weighted(&inputs)
                    })
                    .collect()
            }
            ShapeKind::Times(l, r) | ShapeKind::TimesP(_, l, r) => {
                let lp = build(rng, l, params, b, pools);
                let rp = build(rng, r, params, b, pools);
                (0..count)
                    .map(|_| {
                        let (x, y) = (*lp.choose(rng).unwrap(), *rp.choose(rng).unwrap());
                        match s.kind() {
                            ShapeKind::TimesP(p, ..) => b.times_p(*p, x, y),
                            _ => b.times(x, y),
                        }
                    })
                    .collect()
            }
        };
        pools.insert(s.clone(), pool.clone());
        pool
    }
    let mut roots = Vec::new();
    for s in shapes {
        let pool = build(rng, s, params, &mut b, &mut pools);
        roots.push(*pool.choose(rng).unwrap());
    }
    let inputs: Vec<(usize, Fp)> = roots.into_iter().map(|g| (g, random_weight(rng, params.random_weights))).collect();
    let r = b.plus_weighted(&inputs);
    b.finish(r)
}

/// A layered algebraic branching program. `layers[k][u][v]` labels the edge
/// from vertex `u` of layer `k` to vertex `v` of layer `k+1` with `c·x_j`,
/// stored as `Some((j, c))`. The first layer has one source and the last one sink.
#[derive(Clone, Debug)]
pub struct Abp {
    pub n: usize,
    pub layers: Vec<Vec<Vec<Option<(usize, Fp)>>>>,
}

impl Abp {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, w: usize) -> Abp {
        let widths: Vec<usize> = (0..=d).map(|k| if k == 0 || k == d { 1 } else { w }).collect();
        let layers = (0..d)
            .map(|k| {
                (0..widths[k])
                    .map(|_| {
                        (0..widths[k + 1])
                            .map(|_| {
                                rng.random_bool(0.7)
                                    .then(|| (rng.random_range(1..=n), Fp::new(rng.random_range(1..5))))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Abp { n, layers }
    }

    pub fn width(&self) -> usize {
        self.layers.iter().map(|l| l.len().max(l.first().map_or(0, Vec::len))).max().unwrap_or(0)
    }

    /// The left-skew circuit `g_{k+1,v} = Σ_u c_{uv} · (g_{k,u} × x_{j_{uv}})`.
    ///
    /// Returns `None` when no source-to-sink path exists.
    pub fn to_circuit(&self) -> Option<Circuit> {
        let mut b = CircuitBuilder::new(self.n);
        let vars: Vec<usize> = (1..=self.n).map(|j| b.var(j)).collect();
        let mut prev: Vec<Option<usize>> = vec![None];
        for (k, layer) in self.layers.iter().enumerate() {
            let targets = layer.first().map_or(0, Vec::len);
            let mut next = vec![None; targets];
            for (v, slot) in next.iter_mut().enumerate() {
                let mut terms = Vec::new();
                for (u, row) in layer.iter().enumerate() {
                    let Some((j, c)) = row[v] else { continue };
                    if k == 0 {
                        terms.push((vars[j - 1], c));
                    } else if let Some(g) = prev[u] {
                        terms.push((b.times(g, vars[j - 1]), c));
                    }
                }
                if !terms.is_empty() {
                    *slot = Some(b.plus_weighted(&terms));
                }
            }
            prev = next;
        }
        let root = prev.first().copied().flatten()?;
        b.finish(root).ok()
    }
}

/// Every product tree with `d` leaves.
pub fn all_product_shapes(d: usize) -> Vec<Shape> {
    if d <= 1 {
        return vec![Shape::leaf()];
    }
    let mut out = Vec::new();
    for a in 1..d {
        for l in all_product_shapes(a) {
            for r in all_product_shapes(d - a) {
                out.push(Shape::times(l.clone(), r));
            }
        }
    }
    out
}

/// How a `+` node combines the two product gates `P1`, `P2` below it.
const SUM_LAYERS: [&[(i64, i64)]; 4] = [&[(1, 1), (1, -1)], &[(1, 0), (1, 1)], &[(1, 1)], &[(1, 0), (0, 1)]];

/// The template family of width-≤2 UPT circuits over two letters: every
/// product tree with `d` leaves, each leaf holding `x1` and `x2`, each
/// product node holding one or two distinct products of child gates, and a
/// `+` node above it combining them as one of `{P1+P2, P1−P2}`,
/// `{P1, P1+P2}`, `{P1+P2}` or `{P1, P2}`. The root is the first gate of the
/// top `+` node. Every choice is enumerated; duplicates are removed.
pub fn width_two_family(d: usize) -> Vec<Circuit> {
    fn go(s: &Shape, b: &mut CircuitBuilder, out: &mut dyn FnMut(&mut CircuitBuilder, Vec<usize>)) {
        match s.kind() {
            ShapeKind::Times(l, r) => {
                let (l, r) = (l.clone(), r.clone());
                go(&l, b, &mut |b, lp| {
                    let lp = lp.clone();
                    go(&r, b, &mut |b, rp| {
                        let pairs: Vec<(usize, usize)> =
                            lp.iter().flat_map(|&x| rp.iter().map(move |&y| (x, y))).collect();
                        let mut choices: Vec<Vec<(usize, usize)>> = pairs.iter().map(|&p| vec![p]).collect();
                        for i in 0..pairs.len() {
                            for j in i + 1..pairs.len() {
                                choices.push(vec![pairs[i], pairs[j]]);
                            }
                        }
                        for ch in &choices {
                            let mark = b.len();
                            let prods: Vec<usize> = ch.iter().map(|&(x, y)| b.times(x, y)).collect();
                            let layers: &[&[(i64, i64)]] = if prods.len() == 1 { &[&[(1, 0)]] } else { &SUM_LAYERS };
                            for layer in layers {
                                let mark2 = b.len();
                                let pool: Vec<usize> = layer
                                    .iter()
                                    .map(|&(c1, c2)| {
                                        let mut ins = vec![(prods[0], Fp::from_i64(c1))];
                                        if c2 != 0 {
                                            ins.push((prods[1], Fp::from_i64(c2)));
                                        }
                                        b.plus_weighted(&ins)
                                    })
                                    .collect();
                                out(b, pool);
                                b.truncate(mark2);
                            }
                            b.truncate(mark);
                        }
                    });
                });
            }
            _ => {
                let mark = b.len();
                let pool = vec![b.var(1), b.var(2)];
                out(b, pool);
                b.truncate(mark);
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut circuits = Vec::new();
    for s in all_product_shapes(d) {
        let mut b = CircuitBuilder::new(2);
        go(&s, &mut b, &mut |b, pool| {
            let c = b.clone().finish(pool[0]).expect("template circuits are valid");
            if seen.insert(c.to_text()) {
                circuits.push(c);
            }
        });
    }
    circuits
}

/// A width-≤2 family over two letters with a fixed product shape: leaves
/// hold `x1`, `x2`; each product node multiplies its children's gates
/// aligned (`L0·R0`, `L1·R1`) or crossed (`L0·R1`, `L1·R0`) and a `+` node
/// above keeps `{P1+P2, P1−P2}` or `{P1, P1+P2}`. The root is the first gate
/// of the top node. Every choice is enumerated, `4^(d-1)` circuits.
pub fn fixed_shape_family(shape: &Shape) -> Vec<Circuit> {
    let flat = FlatShape::new(&shape.collapsed());
    let internal: Vec<usize> = (0..flat.len()).filter(|&t| !flat.node(t).children.is_empty()).collect();
    let total = 4usize.pow(internal.len() as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut b = CircuitBuilder::new(2);
        let mut pools: Vec<Vec<usize>> = vec![Vec::new(); flat.len()];
        for t in (0..flat.len()).rev() {
            let node = flat.node(t);
            if node.children.is_empty() {
                pools[t] = vec![b.var(1), b.var(2)];
                continue;
            }
            let k = internal.iter().position(|&x| x == t).unwrap();
            let digit = code / 4usize.pow(k as u32) % 4;
            let (lp, rp) = (&pools[node.children[0]], &pools[node.children[1]]);
            let (p1, p2) = if digit.is_multiple_of(2) {
                (b.times(lp[0], rp[0]), b.times(lp[1], rp[1]))
            } else {
                (b.times(lp[0], rp[1]), b.times(lp[1], rp[0]))
            };
            let (one, minus) = (Fp::ONE, -Fp::ONE);
            pools[t] = if digit / 2 == 0 {
                vec![b.plus_weighted(&[(p1, one), (p2, one)]), b.plus_weighted(&[(p1, one), (p2, minus)])]
            } else {
                vec![b.plus_weighted(&[(p1, one)]), b.plus_weighted(&[(p1, one), (p2, one)])]
            };
        }
        out.push(b.finish(pools[0][0]).expect("family circuits are valid"));
    }
    out
}
