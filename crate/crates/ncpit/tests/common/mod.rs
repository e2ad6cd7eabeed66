#![allow(dead_code)]

use ncpit::circuit::{GateKind, Shape};
use ncpit::{Circuit, Fp, NcPolynomial, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every parse tree of gate `g`: its shape, monomial and coefficient.
pub fn parse_trees(c: &Circuit, g: usize) -> Vec<(Shape, Vec<u16>, Fp)> {
    let gate = c.gate(g);
    match gate.kind {
        GateKind::Var(j) => vec![(Shape::leaf(), vec![j], Fp::ONE)],
        GateKind::Const(a) => vec![(Shape::constant(), Vec::new(), a)],
        GateKind::Plus => gate
            .children
            .iter()
            .flat_map(|ch| {
                parse_trees(c, ch.id)
                    .into_iter()
                    .map(move |(s, w, a)| (Shape::plus(s), w, a * ch.weight()))
            })
            .collect(),
        GateKind::Times | GateKind::TimesP(_) => {
            let (l, r) = (parse_trees(c, gate.children[0].id), parse_trees(c, gate.children[1].id));
            let mut out = Vec::new();
            for (sa, wa, ca) in &l {
                for (sb, wb, cb) in &r {
                    let (s, w) = match gate.kind {
                        GateKind::TimesP(p) => {
                            let mut w = wb[..p].to_vec();
                            w.extend_from_slice(wa);
                            w.extend_from_slice(&wb[p..]);
                            (Shape::times_p(p, sa.clone(), sb.clone()), w)
                        }
                        _ => {
                            let mut w = wa.clone();
                            w.extend_from_slice(wb);
                            (Shape::times(sa.clone(), sb.clone()), w)
                        }
                    };
                    out.push((s, w, *ca * *cb));
                }
            }
            out
        }
    }
}

/// Distinct parse-tree shapes of the root.
pub fn brute_shapes(c: &Circuit) -> Vec<Shape> {
    let mut out: Vec<Shape> = Vec::new();
    if let Some(r) = c.root() {
        for (s, _, _) in parse_trees(c, r) {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// The polynomial as the sum over parse trees.
pub fn brute_poly(c: &Circuit) -> NcPolynomial {
    let mut f = NcPolynomial::zero(c.n());
    if let Some(r) = c.root() {
        for (_, w, a) in parse_trees(c, r) {
            f.add_term(Word::new(w), a).unwrap();
        }
    }
    f
}

/// A random product tree with `d` leaves, nodes wrapped in `+` with probability `prob`.
pub fn random_shape<R: rand::Rng>(r: &mut R, d: usize, prob: f64) -> Shape {
    let s = ncpit::generate::random_product_shape(r, d);
    ncpit::generate::with_random_sums(r, &s, prob)
}

/// Directory of the golden files.
pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// The golden corpus as `(file name, contents)`, rebuilt from fixed inputs.
pub fn golden_corpus() -> Vec<(String, String)> {
    use ncpit::circuit::canonicalize;
    use ncpit::generate::{balanced_shape, random_fewpt_circuit, random_upt_circuit, sample_two_shape_circuit, sample_upt_circuit, UptParams};
    use ncpit::hard::{moving_palindrome, moving_palindrome_circuit, palindrome, tree_coloring_poly};
    use ncpit::CircuitBuilder;

    let mut out: Vec<(String, String)> = Vec::new();
    let mut circ = |name: &str, c: &Circuit| out.push((format!("{name}.circuit"), c.to_text()));
    circ("fig1a", &sample_upt_circuit());
    circ("fig1c", &sample_two_shape_circuit());
    circ("empty", &Circuit::empty(2));
    circ("zero", &Circuit::zero(2));
    let mut b = CircuitBuilder::new(3);
    let (x, y, z) = (b.var(1), b.var(2), b.var(3));
    let s = b.plus_weighted(&[(x, Fp::new(5)), (y, -Fp::ONE)]);
    let t = b.times_p(1, s, z);
    let u = b.times(x, y);
    let r = b.times_p(2, u, t);
    circ("timesp", &b.finish(r).unwrap());
    let (_, pal) = palindrome(2, 6).unwrap();
    circ("pal_2_6", &pal);
    circ("pal_2_6_reduced", &ncpit::depth::depth_reduce(&canonicalize(&pal).unwrap()).unwrap());
    circ("movpal_2_8", &moving_palindrome_circuit(2, 8).unwrap());
    let (tc, tpoly) = tree_coloring_poly(2, 2).unwrap();
    circ("treecolor_2_2", &tc);
    let mut r = rng(2024);
    for i in 1..=3 {
        let shape = random_shape(&mut r, 2 + 2 * i, 0.3);
        let c = random_upt_circuit(&mut r, &shape, &UptParams::new(3, i)).unwrap();
        circ(&format!("random_upt_{i}"), &c);
    }
    let shapes = [balanced_shape(4), ncpit::generate::left_comb_shape(4)];
    circ("random_fewpt", &random_fewpt_circuit(&mut r, &shapes, &UptParams::new(2, 2)).unwrap());

    let mut poly = |name: &str, p: &NcPolynomial| out.push((format!("{name}.poly"), p.to_text().unwrap()));
    poly("pal_2_6", &palindrome(2, 6).unwrap().0);
    poly("movpal_1_8", &moving_palindrome(1, 8).unwrap());
    poly("treecolor_2_2", &tpoly);
    poly("zero_3_4", &NcPolynomial::zero_of_degree(3, 4));
    let terms: Vec<(Word, Fp)> = (0..12)
        .map(|_| {
            let w: Vec<u16> = (0..5).map(|_| rand::Rng::random_range(&mut r, 1..=3u16)).collect();
            (Word::new(w), Fp::new(rand::Rng::random_range(&mut r, 1..1u64 << 40)))
        })
        .collect();
    poly("random_3_5", &NcPolynomial::homogeneous(3, 5, terms).unwrap());
    out
}
