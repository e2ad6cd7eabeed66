mod common;

use common::{random_shape, rng};
use ncpit::circuit::{check_upt, expand, preimage_width, Shape, DEFAULT_MAX_TERMS};
use ncpit::depth::{
    collapse_to_shuffle, depth_reduce, gate_quotient, shuffle_of_shape, verify_quotient_identities, GateQuotientTable,
};
use ncpit::generate::{balanced_shape, left_comb_shape, random_upt_circuit, UptParams};
use ncpit::{Circuit, CircuitBuilder, Error, NcPolynomial, Perm};
use rand::Rng;

fn budget(d: usize) -> usize {
    4 * (d as f64).log2().ceil() as usize + 8
}

/// Reduces, collapses and checks every post-condition; returns the output depth and width.
fn check_reduction(c: &Circuit) -> (usize, usize) {
    let f = expand(c, DEFAULT_MAX_TERMS).unwrap();
    let cx = depth_reduce(c).unwrap();
    assert_eq!(expand(&cx, DEFAULT_MAX_TERMS).unwrap(), f);
    let shape = check_upt(&cx).unwrap();
    ncpit::circuit::TypeMap::new(&cx).unwrap();
    let (plain, sigma) = collapse_to_shuffle(&cx).unwrap();
    assert!(!plain.is_otimes());
    assert_eq!(sigma, shuffle_of_shape(&shape));
    assert_eq!(expand(&plain, DEFAULT_MAX_TERMS).unwrap(), f.shuffle(&sigma).unwrap());
    check_upt(&plain).unwrap();
    (plain.depth(), preimage_width(&plain).unwrap())
}

#[test]
fn quotient_of_node_with_itself_is_one() {
    let c = ncpit::circuit::canonicalize(&ncpit::generate::sample_upt_circuit()).unwrap();
    for u in 0..c.size() {
        assert_eq!(gate_quotient(&c, u, u, 1000).unwrap(), NcPolynomial::one(4));
    }
}

#[test]
fn quotient_of_unrelated_gates_is_zero() {
    let mut b = CircuitBuilder::new(2);
    let x = b.var(1);
    let y = b.var(2);
    let m = b.times(x, y);
    let c = b.finish(m).unwrap();
    assert!(gate_quotient(&c, 0, 1, 100).unwrap().is_zero());
    // [root : left leaf] is the right factor
    assert_eq!(gate_quotient(&c, 2, 0, 100).unwrap(), NcPolynomial::var(2, 2));
    assert_eq!(gate_quotient(&c, 2, 1, 100).unwrap(), NcPolynomial::var(2, 1));
}

#[test]
fn quotient_table_matches_single_queries() {
    let mut r = rng(21);
    let s = random_shape(&mut r, 5, 0.5);
    let c = random_upt_circuit(&mut r, &s, &UptParams::new(2, 3)).unwrap();
    let t = GateQuotientTable::new(&c, DEFAULT_MAX_TERMS).unwrap();
    for u in 0..c.size() {
        for v in 0..c.size() {
            assert_eq!(t.get(u, v), gate_quotient(&c, u, v, DEFAULT_MAX_TERMS).unwrap());
        }
    }
}

#[test]
fn split_identities_hold_on_random_circuits() {
    let mut r = rng(22);
    for _ in 0..25 {
        let d = r.random_range(1..=6);
        let s = random_shape(&mut r, d, 0.5);
        let c = random_upt_circuit(&mut r, &s, &UptParams::new(2, 3)).unwrap();
        assert!(verify_quotient_identities(&c, DEFAULT_MAX_TERMS).unwrap() > 0);
    }
}

#[test]
fn degree_one_circuit_is_unchanged() {
    let mut b = CircuitBuilder::new(3);
    let x = b.var(1);
    let y = b.var(3);
    let s = b.plus(&[x, y]);
    let c = b.finish(s).unwrap();
    assert_eq!(depth_reduce(&c).unwrap(), c);
}

#[test]
fn non_canonical_input_is_rejected() {
    let mut b = CircuitBuilder::new(1);
    let x = b.var(1);
    let m = b.times(x, x);
    let c = b.finish(m).unwrap();
    assert!(matches!(depth_reduce(&c), Err(Error::NotCanonical(_))));
}

#[test]
fn balanced_degree_eight_within_budget() {
    let mut r = rng(23);
    let c = random_upt_circuit(&mut r, &balanced_shape(8), &UptParams::new(3, 2)).unwrap();
    let (depth, _) = check_reduction(&c);
    assert!(depth <= budget(8));
}

#[test]
fn left_comb_degree_sixteen_gets_shallower() {
    let mut r = rng(24);
    let c = random_upt_circuit(&mut r, &left_comb_shape(16), &UptParams::new(2, 1)).unwrap();
    assert_eq!(c.depth(), 15);
    let (depth, _) = check_reduction(&c);
    assert!(depth <= budget(16) && depth < c.depth());
}

#[test]
fn only_concatenations_give_identity() {
    let s = Shape::times_p(0, Shape::times_p(0, Shape::leaf(), Shape::leaf()), Shape::leaf());
    assert_eq!(shuffle_of_shape(&s), Perm::identity(3));
    let s = Shape::times_p(1, Shape::leaf(), Shape::leaf());
    assert_eq!(shuffle_of_shape(&s), Perm::transposition(2, 1, 2).unwrap());
}

#[test]
fn reduced_circuits_over_a_corpus() {
    let mut r = rng(25);
    for _ in 0..60 {
        let d = r.random_range(2..=20);
        let w = r.random_range(1..=4);
        let s = random_shape(&mut r, d, 0.4);
        let mut params = UptParams::new(r.random_range(1..=3), w);
        params.max_terms = 512;
        let c = random_upt_circuit(&mut r, &s, &params).unwrap();
        let (depth, width) = check_reduction(&c);
        assert!(depth <= budget(d), "depth {depth} at d = {d}");
        let w_in = preimage_width(&c).unwrap();
        assert!(width <= 8 * w_in * w_in, "width {width} from {w_in}");
    }
}
