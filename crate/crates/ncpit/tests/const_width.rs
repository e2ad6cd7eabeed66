mod common;

use common::{brute_poly, random_shape, rng};
use ncpit::circuit::{check_upt, expand, preimage_width, DEFAULT_MAX_TERMS};
use ncpit::const_width::{
    gks_bivariate, gks_substitution, iterative_univariate, known_shape_pit, substituted_degree_bound,
    substituted_univariate,
};
use ncpit::generate::{balanced_shape, fixed_shape_family, random_upt_circuit, UptParams};
use ncpit::upoly::UPoly;
use ncpit::{Circuit, CircuitBuilder, Error, Fp};
use rand::Rng;

#[test]
fn zero_circuit_is_zero() {
    let r = known_shape_pit(&Circuit::zero(2), &ncpit::circuit::Shape::constant(), 1).unwrap();
    assert!(!r.nonzero);
    let mut b = CircuitBuilder::new(2);
    let x = b.var(1);
    let y = b.var(2);
    let m1 = b.times(x, y);
    let m2 = b.times(x, y);
    let s = b.plus_weighted(&[(m1, Fp::ONE), (m2, -Fp::ONE)]);
    let c = b.finish(s).unwrap();
    assert!(!known_shape_pit(&c, &balanced_shape(2), 2).unwrap().nonzero);
}

#[test]
fn determinant_like_width_two_is_nonzero() {
    // y11 y22 − y12 y21
    let mut b = CircuitBuilder::new(2);
    let (x1, x2, x3, x4) = (b.var(1), b.var(2), b.var(1), b.var(2));
    let m1 = b.times(x1, x4);
    let m2 = b.times(x2, x3);
    let s = b.plus_weighted(&[(m1, Fp::ONE), (m2, -Fp::ONE)]);
    let c = b.finish(s).unwrap();
    let r = known_shape_pit(&c, &balanced_shape(2), 2).unwrap();
    assert!(r.nonzero);
    assert_eq!(r.width, 2);
}

#[test]
fn wrong_shape_is_rejected() {
    let mut r = rng(51);
    let c = random_upt_circuit(&mut r, &balanced_shape(4), &UptParams::new(2, 2)).unwrap();
    let comb = ncpit::generate::left_comb_shape(4);
    assert!(matches!(known_shape_pit(&c, &comb, 2), Err(Error::ShapeMismatch(_))));
}

#[test]
fn closed_form_equals_bottom_up_process() {
    let mut r = rng(52);
    for _ in 0..30 {
        let d = r.random_range(1..=6);
        let s = random_shape(&mut r, d, 0.4);
        let c = random_upt_circuit(&mut r, &s, &UptParams::new(2, 2)).unwrap();
        let w = preimage_width(&c).unwrap();
        let images = gks_substitution(&s.collapsed(), w, 2).unwrap();
        let closed = substituted_univariate(&c, &images).unwrap();
        assert_eq!(closed, iterative_univariate(&c, w).unwrap());
        assert!(closed.degree().unwrap_or(0) <= substituted_degree_bound(&images));
    }
}

#[test]
fn fixed_shape_family_agrees_with_expansion() {
    for d in [2, 3, 4] {
        let t = balanced_shape(d);
        for c in fixed_shape_family(&t) {
            let nonzero = !expand(&c, DEFAULT_MAX_TERMS).unwrap().is_zero();
            assert_eq!(brute_poly(&c).is_zero(), !nonzero);
            let rep = known_shape_pit(&c, &t, 2).unwrap();
            assert_eq!(rep.nonzero, nonzero);
            let bound = 2 * rep.width.pow(rep.depth as u32);
            assert!(rep.max_image_degree <= bound);
            assert!(rep.degree_bound <= d * bound);
        }
    }
}

#[test]
fn random_circuits_agree_with_expansion() {
    let mut r = rng(53);
    for _ in 0..40 {
        let d = r.random_range(1..=6);
        let s = random_shape(&mut r, d, 0.4);
        let mut p = UptParams::new(2, 2);
        p.random_weights = false;
        let c = random_upt_circuit(&mut r, &s, &p).unwrap();
        let rep = known_shape_pit(&c, &check_upt(&c).unwrap(), 2).unwrap();
        assert_eq!(rep.nonzero, !expand(&c, DEFAULT_MAX_TERMS).unwrap().is_zero());
    }
}

#[test]
fn bivariate_step_keeps_nonzero() {
    let mut r = rng(54);
    for _ in 0..200 {
        let w = r.random_range(1..=3);
        let deg = r.random_range(0..=4);
        let rand_poly = |r: &mut rand_chacha::ChaCha8Rng| {
            UPoly::from_coeffs((0..=deg).map(|_| Fp::new(r.random_range(0..3))).collect())
        };
        let pairs: Vec<(UPoly, UPoly)> = (0..w).map(|_| (rand_poly(&mut r), rand_poly(&mut r))).collect();
        // f = Σ u_i ⊗ v_i is zero iff its coefficient matrix is
        let mut zero = true;
        for a in 0..=deg {
            for b in 0..=deg {
                let c: Fp = pairs.iter().map(|(u, v)| u.coeff(a) * v.coeff(b)).sum();
                zero &= c.is_zero();
            }
        }
        assert_eq!(gks_bivariate(&pairs, w).is_zero(), zero);
    }
}
