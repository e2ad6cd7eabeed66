mod common;

use common::{brute_poly, random_shape, rng};
use ncpit::biwa::{default_primes, omega_weight};
use ncpit::circuit::{check_upt, expand, preimage_width, shape_set, Shape, DEFAULT_MAX_TERMS};
use ncpit::fewpt::{
    common_upt_witness, coeff_circuit, dependency_matrix, fewpt_blackbox_pit, fewpt_pit_circuit, fewpt_to_sum,
    shift_and_find_support, unrolled_support_bound, FewptHittingSet, SmlCircuit,
};
use ncpit::generate::{
    left_comb_shape, random_fewpt_circuit, random_upt_circuit, sample_two_shape_circuit, sample_upt_circuit,
    width_two_family, UptParams,
};
use ncpit::hitting::Verdict;
use ncpit::sml::{coeff_operator, psi_embed};
use ncpit::{Circuit, CircuitBuilder, Error, Fp, SmlPolynomial, Word};
use rand::Rng;

fn sml(c: &Circuit) -> SmlPolynomial {
    SmlCircuit::from_circuit(c.clone()).polynomial(DEFAULT_MAX_TERMS).unwrap()
}

fn random_sml<R: Rng>(r: &mut R, n: usize, d: usize, terms: usize) -> SmlPolynomial {
    let t: Vec<(Vec<u16>, Fp)> = (0..terms)
        .map(|_| ((0..d).map(|_| r.random_range(1..=n as u16)).collect(), Fp::new(r.random_range(1..7))))
        .collect();
    SmlPolynomial::from_terms(n, (1..=d).collect(), t).unwrap()
}

/// Row-reduces a copy; kept separate from the library's elimination.
fn brute_rank(mut rows: Vec<Vec<Fp>>) -> usize {
    let mut rank = 0;
    let cols = rows.first().map_or(0, Vec::len);
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][col].inv().unwrap();
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let f = rows[i][col] * inv;
                let pivot = rows[rank].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot) {
                    *x -= f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn upt_input_gives_one_member() {
    let c = sample_upt_circuit();
    let s = fewpt_to_sum(&c, 4).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s.expand(DEFAULT_MAX_TERMS).unwrap(), expand(&c, DEFAULT_MAX_TERMS).unwrap());
}

#[test]
fn two_shape_sample_splits_in_two() {
    let c = sample_two_shape_circuit();
    let s = fewpt_to_sum(&c, 4).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.expand(DEFAULT_MAX_TERMS).unwrap(), brute_poly(&c));
    for (m, shape) in s.members() {
        assert_eq!(&check_upt(m).unwrap(), shape);
    }
    assert!(matches!(fewpt_to_sum(&c, 1), Err(Error::TooManyShapes(1))));
}

#[test]
fn random_fewpt_sums_are_exact() {
    let mut r = rng(61);
    for trial in 0..60 {
        let k = 1 + trial % 3;
        let d = r.random_range(3..=6);
        let mut shapes: Vec<Shape> = Vec::new();
        while shapes.len() < k {
            let s = random_shape(&mut r, d, 0.3);
            if !shapes.contains(&s) {
                shapes.push(s);
            }
        }
        let params = UptParams::new(2, 2);
        let c = random_fewpt_circuit(&mut r, &shapes, &params).unwrap();
        let sum = fewpt_to_sum(&c, 3).unwrap();
        assert_eq!(sum.len(), shape_set(&c, 3).unwrap().len());
        assert_eq!(sum.expand(DEFAULT_MAX_TERMS).unwrap(), brute_poly(&c));
        for (m, shape) in sum.members() {
            assert_eq!(&check_upt(m).unwrap(), shape);
            assert!(preimage_width(m).unwrap() <= params.w);
        }
    }
}

#[test]
fn dependency_matrix_of_a_monomial() {
    let f = SmlPolynomial::from_terms(2, vec![1, 2, 3], [(vec![2, 1, 2], Fp::ONE)]).unwrap();
    let m = dependency_matrix(&f, &[1, 3]).unwrap();
    assert_eq!(m.rows.len(), 4);
    assert_eq!(m.cols.len(), 2);
    assert_eq!(m.rank(), 1);
    let nonzero: Vec<(usize, usize)> = (0..4)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .filter(|&(i, j)| !m.matrix[(i, j)].is_zero())
        .collect();
    assert_eq!(nonzero.len(), 1);
    let (i, j) = nonzero[0];
    assert_eq!((m.rows[i].clone(), m.cols[j].clone(), m.matrix[(i, j)]), (vec![2, 2], vec![1], Fp::ONE));
}

#[test]
fn dependency_rank_matches_coefficient_rows() {
    let mut r = rng(62);
    for _ in 0..100 {
        let d = r.random_range(2..=4);
        let terms = r.random_range(1..8);
        let f = random_sml(&mut r, 2, d, terms);
        let s: Vec<usize> = (1..=d).filter(|_| r.random_bool(0.5)).collect();
        let m = dependency_matrix(&f, &s).unwrap();
        // rows rebuilt from the coefficient operator
        let rows: Vec<Vec<Fp>> = m
            .rows
            .iter()
            .map(|mi| {
                let row = coeff_operator(&f, &s, mi).unwrap();
                m.cols.iter().map(|nj| row.coeff(nj)).collect()
            })
            .collect();
        assert_eq!(m.rank(), brute_rank(rows));
    }
}

#[test]
fn coefficient_of_a_monomial_circuit_is_one() {
    let mut b = CircuitBuilder::new(2);
    let (x, y, z) = (b.var(1), b.var(2), b.var(2));
    let p = b.product(&[x, y, z]);
    let c = SmlCircuit::from_circuit(b.finish(p).unwrap());
    let full = coeff_circuit(&c, &[1, 2, 3], &[1, 2, 2]).unwrap();
    assert!(full.parts.is_empty());
    assert_eq!(expand(&full.circuit, 16).unwrap(), ncpit::NcPolynomial::one(2));
    let tail = coeff_circuit(&c, &[1, 3], &[1, 2]).unwrap();
    assert_eq!(tail.parts, vec![2]);
    assert_eq!(tail.polynomial(16).unwrap(), SmlPolynomial::from_terms(2, vec![2], [(vec![2], Fp::ONE)]).unwrap());
    let gone = coeff_circuit(&c, &[2], &[1]).unwrap();
    assert!(gone.polynomial(16).unwrap().is_zero());
}

#[test]
fn coefficient_circuits_match_the_operator() {
    let mut r = rng(63);
    for _ in 0..80 {
        let d = r.random_range(2..=6);
        let shape = random_shape(&mut r, d, 0.3);
        let c = random_upt_circuit(&mut r, &shape, &UptParams::new(2, 3)).unwrap();
        let w = preimage_width(&c).unwrap();
        let sc = SmlCircuit::from_circuit(c.clone());
        let f = psi_embed(&brute_poly(&c)).unwrap();
        let s: Vec<usize> = (1..=d).filter(|_| r.random_bool(0.4)).collect();
        let m: Vec<u16> = s.iter().map(|_| r.random_range(1..=2)).collect();
        let cc = coeff_circuit(&sc, &s, &m).unwrap();
        let want = coeff_operator(&f, &s, &m).unwrap();
        let got = cc.polynomial(DEFAULT_MAX_TERMS).unwrap();
        assert_eq!(got.terms().collect::<Vec<_>>(), want.terms().collect::<Vec<_>>());
        assert_eq!(cc.parts, want.parts());
        if cc.circuit.root().is_some() && cc.circuit.degree() > 0 {
            assert!(preimage_width(&cc.circuit).unwrap() <= w);
        }
    }
}

#[test]
fn witness_for_g_equal_to_f_does_not_exist() {
    let c = sample_upt_circuit();
    let f = sml(&c);
    let w = preimage_width(&c).unwrap();
    assert_eq!(common_upt_witness(&c, &f, w).unwrap_err(), Error::NoViolation);
    assert_eq!(common_upt_witness(&c, &f.scale(Fp::new(5)), w).unwrap_err(), Error::NoViolation);
}

#[test]
fn witness_for_a_two_term_g_sits_below_the_root() {
    // f = y11 y21, g = y11 y21 + y12 y22, w = 1
    let mut b = CircuitBuilder::new(2);
    let (x, y) = (b.var(1), b.var(1));
    let p = b.times(x, y);
    let c = b.finish(p).unwrap();
    let g = SmlPolynomial::from_terms(2, vec![1, 2], [(vec![1, 1], Fp::ONE), (vec![2, 2], Fp::ONE)]).unwrap();
    let wit = common_upt_witness(&c, &g, 1).unwrap();
    assert!(wit.at_leaf);
    assert_eq!(wit.parts, vec![2]);
    assert_eq!(wit.monomials, vec![vec![1], vec![2]]);
    assert_eq!(wit.gamma, vec![Fp::ZERO, Fp::ONE]);
    let rep = wit.check(&sml(&c), &g, 1).unwrap();
    assert_eq!((rep.w_prime, rep.gamma_support, rep.r_rank), (2, 1, 2));
}

#[test]
fn random_witnesses_satisfy_every_bullet() {
    let mut r = rng(64);
    let (mut leaf, mut product, mut none) = (0, 0, 0);
    for trial in 0..80 {
        let shape = random_shape(&mut r, 4, 0.2);
        let c = random_upt_circuit(&mut r, &shape, &UptParams::new(2, 2)).unwrap();
        let w = preimage_width(&c).unwrap();
        let f = sml(&c);
        // with full rank at every part no leaf dependency exists, so any
        // violation is found at a product node
        let full_leaves = (1..=4).all(|i| dependency_matrix(&f, &[i]).unwrap().rank() == 2);
        let g = if trial % 2 == 0 {
            f.add(&random_sml(&mut r, 2, 4, 1)).unwrap()
        } else {
            let terms = r.random_range(1..6);
            random_sml(&mut r, 2, 4, terms)
        };
        match common_upt_witness(&c, &g, w) {
            Ok(wit) => {
                let rep = wit.check(&f, &g, w).unwrap();
                assert_eq!(rep.r_rank, rep.w_prime);
                assert!(rep.gamma_support <= w + 1);
                if wit.at_leaf {
                    assert!(!full_leaves);
                    assert!(rep.w_prime <= w + 1);
                    leaf += 1;
                } else {
                    assert!(rep.w_prime <= w * w);
                    product += 1;
                }
            }
            Err(Error::NoViolation) => none += 1,
            Err(e) => panic!("{e}"),
        }
    }
    assert!(leaf > 0, "{leaf} {product} {none}");
    // instances whose leaves are all full rank
    let mut found = 0;
    for c in width_two_family(4).iter().step_by(7) {
        let f = sml(c);
        if !(1..=4).all(|i| dependency_matrix(&f, &[i]).unwrap().rank() == 2) {
            continue;
        }
        let w = preimage_width(c).unwrap();
        let g = f.add(&random_sml(&mut r, 2, 4, 1)).unwrap();
        match common_upt_witness(c, &g, w) {
            Ok(wit) => {
                assert!(!wit.at_leaf);
                let rep = wit.check(&f, &g, w).unwrap();
                assert!(rep.w_prime <= w * w && rep.gamma_support <= w + 1 && rep.r_rank == rep.w_prime);
                found += 1;
            }
            Err(Error::NoViolation) => {}
            Err(e) => panic!("{e}"),
        }
        if found == 30 {
            break;
        }
    }
    assert_eq!(found, 30);
}

#[test]
fn single_variable_support() {
    let f = SmlPolynomial::from_terms(3, vec![1], [(vec![2], Fp::ONE)]).unwrap();
    let wt = omega_weight(&[5], 1, 3);
    let m = shift_and_find_support(&f, &wt, 1).unwrap();
    assert_eq!((m.parts, m.letters), (vec![1], vec![2]));
    assert!(matches!(
        shift_and_find_support(&SmlPolynomial::zero(3, vec![1]).unwrap(), &wt, 1),
        Err(Error::NoSmallSupport(1))
    ));
}

#[test]
fn shifted_support_brute_force() {
    // y11 y22 − y12 y21 under t-weights: every single variable keeps a
    // nonzero coefficient unless the two shifted terms cancel
    let f = SmlPolynomial::from_terms(2, vec![1, 2], [(vec![1, 2], Fp::ONE), (vec![2, 1], -Fp::ONE)]).unwrap();
    let wt = omega_weight(&[3], 2, 2);
    let m = shift_and_find_support(&f, &wt, 1).unwrap();
    assert_eq!((m.parts.clone(), m.letters.clone()), (vec![1], vec![1]));
    // coefficient of y11 is t^{wt(y22)}
    assert_eq!(m.coefficient.into_iter().collect::<Vec<_>>(), vec![(wt.get(2, 2).to_vec(), Fp::ONE)]);
    // a weight that identifies y21 and y22 kills both single-part-2 coefficients of y11 y21 − y11 y22
    let g = SmlPolynomial::from_terms(2, vec![1, 2], [(vec![1, 1], Fp::ONE), (vec![1, 2], -Fp::ONE)]).unwrap();
    let flat = ncpit::biwa::WeightAssignment::new(2, 2, 1, |_, _| vec![1]).unwrap();
    let m = shift_and_find_support(&g, &flat, 2).unwrap();
    assert_eq!(m.support(), 1);
    assert_eq!(m.parts, vec![2]);
}

#[test]
fn support_bound_on_the_width_two_family() {
    let fam = width_two_family(4);
    let bound = unrolled_support_bound(2, 1);
    assert_eq!(bound, 3);
    let pvec: Vec<u64> = default_primes(2, 4, 6).into_iter().rev().take(3).collect();
    let wt = omega_weight(&pvec, 4, 2);
    let mut nonzero = 0;
    for c in &fam {
        let f = sml(c);
        if f.is_zero() {
            continue;
        }
        nonzero += 1;
        let m = shift_and_find_support(&f, &wt, bound).unwrap();
        assert!(m.support() <= bound);
    }
    assert!(nonzero > 10_000);
}

#[test]
fn fewpt_zero_on_a_complete_tiny_set() {
    let mut b = CircuitBuilder::new(1);
    let (x, y) = (b.var(1), b.var(1));
    let s = b.plus_weighted(&[(x, Fp::ONE), (y, -Fp::ONE)]);
    let c = b.finish(s).unwrap();
    let hs = FewptHittingSet::new(1, 1, 1, 1, 0).unwrap();
    assert_eq!(hs.cardinality(), 10);
    assert_eq!(fewpt_blackbox_pit(|m| ncpit::circuit::eval_matrix(&c, m), &hs, u128::MAX).unwrap(), Verdict::Zero);
    assert_eq!(fewpt_pit_circuit(&Circuit::empty(2), 2, 10).unwrap().verdict, Verdict::Zero);
}

/// `Σ c_w · x_w` with word `w` as a left comb and `w'` as a right comb.
fn two_monomials(w1: &Word, w2: &Word, c: Fp) -> Circuit {
    let d = w1.len();
    let mut b = CircuitBuilder::new(2);
    let l: Vec<usize> = w1.letters().iter().map(|&j| b.var(j as usize)).collect();
    let left = b.product(&l);
    let r: Vec<usize> = w2.letters().iter().map(|&j| b.var(j as usize)).collect();
    let mut right = r[d - 1];
    for &g in r[..d - 1].iter().rev() {
        right = b.times(g, right);
    }
    let s = b.plus_weighted(&[(left, Fp::ONE), (right, c)]);
    b.finish(s).unwrap()
}

#[test]
fn fewpt_two_shape_monomial_family_has_no_false_zeros() {
    let words = Word::all(2, 3);
    let hs = FewptHittingSet::new(2, 3, 1, 2, 2).unwrap();
    let (mut nonzero, mut zero) = (0, 0);
    for w1 in &words {
        for w2 in &words {
            for c in [Fp::ONE, -Fp::ONE] {
                let circ = two_monomials(w1, w2, c);
                assert_eq!(shape_set(&circ, 2).unwrap().len(), 2);
                let v = fewpt_blackbox_pit(|m| ncpit::circuit::eval_matrix(&circ, m), &hs, 1 << 16);
                if brute_poly(&circ).is_zero() {
                    zero += 1;
                    assert!(v.unwrap_err().is_scale_guard());
                } else {
                    nonzero += 1;
                    assert!(matches!(v.unwrap(), Verdict::NonZero(_)));
                }
            }
        }
    }
    assert_eq!((nonzero, zero), (120, 8));
}

#[test]
fn fewpt_cancelling_sum_is_nonzero() {
    // 2·(x1 x2) x1 − x1 (x2 x1): two shapes, one shared word, partial cancellation
    let mut b = CircuitBuilder::new(2);
    let (a, bb, c) = (b.var(1), b.var(2), b.var(1));
    let ab = b.times(a, bb);
    let left = b.times(ab, c);
    let (d, e, f) = (b.var(1), b.var(2), b.var(1));
    let ef = b.times(e, f);
    let right = b.times(d, ef);
    let s = b.plus_weighted(&[(left, Fp::new(2)), (right, -Fp::ONE)]);
    let circ = b.finish(s).unwrap();
    let rep = fewpt_pit_circuit(&circ, 2, 1 << 16).unwrap();
    assert_eq!((rep.shapes, rep.width), (2, 1));
    assert!(matches!(rep.verdict, Verdict::NonZero(_)));
    // widths past the desk-scale sieve are refused rather than guessed
    let mut b = CircuitBuilder::new(2);
    let (x, y) = (b.var(1), b.var(2));
    let l1 = b.times(x, y);
    let l2 = b.times(y, x);
    let s = b.plus(&[l1, l2]);
    let wide = b.finish(s).unwrap();
    assert!(fewpt_pit_circuit(&wide, 3, 1 << 16).unwrap_err().is_scale_guard());
}

#[test]
fn fewpt_random_circuits_are_hit() {
    let mut r = rng(65);
    for _ in 0..20 {
        let shapes = vec![left_comb_shape(3), random_shape(&mut r, 3, 0.0)];
        let shapes: Vec<Shape> = if shapes[0] == shapes[1] { vec![shapes[0].clone()] } else { shapes };
        let c = random_fewpt_circuit(&mut r, &shapes, &UptParams::new(2, 1)).unwrap();
        if brute_poly(&c).is_zero() {
            continue;
        }
        let rep = fewpt_pit_circuit(&c, 2, 1 << 16).unwrap();
        assert!(matches!(rep.verdict, Verdict::NonZero(_)));
    }
}

