//! The acceptance suite: one line per criterion.
//!
//! A criterion that fails for a reason recorded in the decisions ledger is
//! printed as `FAIL (documented)` and does not fail the run.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::{brute_poly, golden_corpus, golden_dir, random_shape, rng};
use ncpit::biwa::{
    ab_weight, count_bad_primes, default_primes, omega_weight, separates, verify_biwa, PolySpace, WeightAssignment,
};
use ncpit::circuit::{
    check_upt, expand, preimage_width, shape_set, Shape, DEFAULT_MAX_TERMS,
};
use ncpit::const_width::{gks_bivariate, gks_substitution, known_shape_pit, substituted_univariate};
use ncpit::depth::{collapse_to_shuffle, depth_reduce, verify_quotient_identities};
use ncpit::fewpt::{common_upt_witness, fewpt_to_sum, SmlCircuit};
use ncpit::generate::{
    balanced_shape, fixed_shape_family, left_comb_shape, random_fewpt_circuit, random_upt_circuit, width_two_family,
    UptParams,
};
use ncpit::hard::{
    alternating_k, palindrome, palindrome_interleave, shuffled_rank_sweep, square_sum_power, tree_coloring_brute,
    tree_coloring_circuit, tree_coloring_poly, tree_size,
};
use ncpit::hitting::{pit_circuit, HittingSet, Verdict};
use ncpit::sml::SmlPolynomial;
use ncpit::upoly::UPoly;
use ncpit::{Circuit, CircuitBuilder, Error, Fp, NcPolynomial};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    /// Fails for the reason given, which the decisions ledger records.
    Documented(&'static str),
}

struct Outcome {
    status: Status,
    detail: String,
}

fn pass(detail: String) -> Outcome {
    Outcome { status: Status::Pass, detail }
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn levels(c: &Circuit) -> usize {
    check_upt(c).map(|s| s.product_height()).unwrap_or(0)
}

fn c1_depth_reduction() -> Outcome {
    let mut r = rng(1001);
    let (mut mismatches, mut depth_over, mut width_over) = (0, 0, 0);
    let mut worst = (0.0f64, 0usize, 0usize);
    let total = 500;
    for i in 0..total {
        // sweep the degree range, then sample it
        let d = if i < 32 { i + 1 } else { r.random_range(1..=32) };
        let n = r.random_range(1..=3);
        let w = r.random_range(1..=6);
        let s = random_shape(&mut r, d, 0.3);
        let mut params = UptParams::new(n, w);
        params.max_terms = 256;
        let c = random_upt_circuit(&mut r, &s, &params).unwrap();
        let f = expand(&c, DEFAULT_MAX_TERMS).unwrap();
        let cx = depth_reduce(&c).unwrap();
        let (plain, sigma) = collapse_to_shuffle(&cx).unwrap();
        if expand(&plain, DEFAULT_MAX_TERMS).unwrap() != f.shuffle(&sigma).unwrap()
            || expand(&cx, DEFAULT_MAX_TERMS).unwrap() != f
        {
            mismatches += 1;
        }
        let budget = 4.0 * (d as f64).log2() + 8.0;
        if plain.depth() as f64 > budget {
            depth_over += 1;
        }
        let w_in = preimage_width(&c).unwrap();
        let w_out = preimage_width(&cx).unwrap();
        if w_out > 8 * w_in * w_in {
            width_over += 1;
        }
        let ratio = plain.depth() as f64 / budget;
        if ratio > worst.0 {
            worst = (ratio, plain.depth(), d);
        }
    }
    check(
        mismatches + depth_over + width_over == 0,
        format!(
            "{total} circuits, {mismatches} mismatches, {depth_over} over the depth budget, {width_over} over 8w²; \
             tightest depth {} at d = {}",
            worst.1, worst.2
        ),
    )
}

fn c2_quotient_identities() -> Outcome {
    let mut r = rng(1002);
    let mut identities = 0;
    let mut failures = 0;
    for _ in 0..50 {
        let d = r.random_range(1..=8);
        let s = random_shape(&mut r, d, 0.4);
        let c = random_upt_circuit(&mut r, &s, &UptParams::new(2, 3)).unwrap();
        match verify_quotient_identities(&c, DEFAULT_MAX_TERMS) {
            Ok(k) => identities += k,
            Err(_) => failures += 1,
        }
    }
    check(failures == 0, format!("50 circuits, {identities} identities checked, {failures} failing circuits"))
}

/// Primes up to `b` by trial division.
fn slow_primes(b: u64) -> Vec<u64> {
    (2..=b).filter(|&p| (2..).take_while(|q| q * q <= p).all(|q| p % q != 0)).collect()
}

fn expected_cardinality(n: usize, d: usize, w: usize, r: usize) -> u128 {
    let k = (w * (w - 1) / 2 * n * n * d + 1) as u64;
    let m = k * k;
    // the first K primes must be in the pool
    let first_k = *slow_primes(20 * k + 20).get(k as usize - 1).unwrap();
    let pool = slow_primes(m.max(first_k)).len() as u128;
    let a = (d as u128) * (m.max(n as u64) as u128) + 1;
    pool.pow(r as u32) * a.pow(r as u32 + 1)
}

fn c3_hitting_sets() -> Outcome {
    let budget = 1u128 << 22;
    let mut sets: std::collections::HashMap<(usize, usize, usize, usize), HittingSet> = Default::default();
    let mut get = |n, d, w, r| -> HittingSet {
        sets.entry((n, d, w, r)).or_insert_with(|| HittingSet::new(n, d, w, r).unwrap()).clone()
    };
    let (mut nonzero, mut missed, mut zero_members) = (0, 0, 0);
    let family = width_two_family(4);
    for c in &family {
        if expand(c, DEFAULT_MAX_TERMS).unwrap().is_zero() {
            zero_members += 1;
            continue;
        }
        nonzero += 1;
        let hs = get(2, 4, preimage_width(c).unwrap(), levels(c));
        if !matches!(pit_circuit(c, &hs, budget), Ok(Verdict::NonZero(_))) {
            missed += 1;
        }
    }
    let mut r = rng(1003);
    let (mut rnd_nonzero, mut rnd_missed) = (0, 0);
    for _ in 0..1000 {
        let s = random_shape(&mut r, 8, 0.3);
        let params = UptParams::new(3, r.random_range(1..=3));
        let c = random_upt_circuit(&mut r, &s, &params).unwrap();
        if expand(&c, DEFAULT_MAX_TERMS).unwrap().is_zero() {
            continue;
        }
        rnd_nonzero += 1;
        let hs = get(3, 8, preimage_width(&c).unwrap(), levels(&c));
        if !matches!(pit_circuit(&c, &hs, budget), Ok(Verdict::NonZero(_))) {
            rnd_missed += 1;
        }
    }
    // zero inputs: the zero circuit against its own set, and a cancelling
    // width-2 circuit against a whole degree-2 set
    let zero = Circuit::zero(2);
    let zero_ok = pit_circuit(&zero, &HittingSet::new(2, 4, 1, 0).unwrap(), u128::MAX) == Ok(Verdict::Zero);
    let mut b = CircuitBuilder::new(2);
    let (x, y) = (b.var(1), b.var(2));
    let (m1, m2) = (b.times(x, y), b.times(x, y));
    let root = b.plus_weighted(&[(m1, Fp::ONE), (m2, -Fp::ONE)]);
    let cancel = b.finish(root).unwrap();
    let cancel_ok = pit_circuit(&cancel, &HittingSet::new(2, 2, 2, 1).unwrap(), u128::MAX) == Ok(Verdict::Zero);
    let mut card_ok = true;
    for (n, d, w, rr) in [(2, 4, 1, 2), (2, 4, 2, 2), (2, 4, 2, 3), (3, 8, 2, 3), (3, 8, 3, 2), (2, 2, 2, 1)] {
        card_ok &= get(n, d, w, rr).cardinality() == expected_cardinality(n, d, w, rr);
    }
    let small = get(2, 2, 1, 1);
    card_ok &= small.iter().count() as u128 == small.cardinality();
    check(
        missed + rnd_missed == 0 && zero_ok && cancel_ok && card_ok,
        format!(
            "template family: {nonzero} nonzero hit, {missed} missed ({zero_members} zero members skipped); \
             random n=3 d=8: {rnd_nonzero} nonzero, {rnd_missed} missed; zero circuit {}, cancelling circuit {}; \
             cardinality formula {}",
            if zero_ok { "zero" } else { "WRONG" },
            if cancel_ok { "zero over all 584518 points" } else { "WRONG" },
            if card_ok { "exact" } else { "MISMATCH" }
        ),
    )
}

fn random_monomials(r: &mut ChaCha8Rng, count: usize, n: usize, d: usize) -> Vec<Vec<u16>> {
    let mut s = BTreeSet::new();
    while s.len() < count.min(n.pow(d as u32)) {
        s.insert((0..d).map(|_| r.random_range(1..=n as u16)).collect::<Vec<u16>>());
    }
    s.into_iter().collect()
}

fn random_space(r: &mut ChaCha8Rng, n: usize, parts: &[usize], rows: usize) -> PolySpace {
    let rows = (0..rows)
        .map(|_| {
            let ms = random_monomials(r, 3, n, parts.len());
            SmlPolynomial::from_terms(n, parts.to_vec(), ms.into_iter().map(|m| (m, Fp::new(r.random_range(1..5)))))
                .unwrap()
        })
        .collect();
    PolySpace::new(n, parts.to_vec(), rows).unwrap()
}

fn certify(spaces: &[&PolySpace], d: usize, n: usize) -> Option<WeightAssignment> {
    default_primes(n, d, 4)
        .into_iter()
        .map(|p| omega_weight(&[p], d, n))
        .find(|w| spaces.iter().all(|v| verify_biwa(w, v).is_some()))
}

fn c4_biwa() -> Outcome {
    let mut r = rng(1004);
    let mut over = 0;
    let mut inconsistent = 0;
    for _ in 0..200 {
        let (n, d) = (r.random_range(1..=3), r.random_range(1..=5));
        let count = r.random_range(2..=6);
        let s = random_monomials(&mut r, count, n, d);
        let k = s.len();
        let parts: Vec<usize> = (1..=d).collect();
        let primes = default_primes(n, d, k.max(2));
        let bad = count_bad_primes(n, &parts, &s, &primes);
        if bad > k * (k - 1) / 2 * n * n {
            over += 1;
        }
        // a prime is bad exactly when some pair collides
        let pairwise = primes
            .iter()
            .filter(|&&p| {
                (0..k).any(|a| (a + 1..k).any(|b| !separates(p, n, &parts, &[s[a].clone(), s[b].clone()])))
            })
            .count();
        if pairwise != bad {
            inconsistent += 1;
        }
    }
    let (mut sub_pairs, mut sub_fail) = (0, 0);
    while sub_pairs < 100 {
        let v = random_space(&mut r, 2, &[1, 2, 3], 3);
        let Some(wt) = certify(&[&v], 3, 2) else { continue };
        let rows = (0..r.random_range(1..=3))
            .map(|_| {
                let mut acc = SmlPolynomial::zero(2, vec![1, 2, 3]).unwrap();
                for row in v.rows() {
                    acc = acc.add(&row.scale(Fp::new(r.random_range(0..7)))).unwrap();
                }
                acc
            })
            .collect();
        let sub = PolySpace::new(2, v.parts().to_vec(), rows).unwrap();
        if verify_biwa(&wt, &sub).is_none() {
            sub_fail += 1;
        }
        sub_pairs += 1;
    }
    let (mut prod_pairs, mut prod_fail) = (0, 0);
    let (n, d) = (2, 4);
    while prod_pairs < 100 {
        let v1 = random_space(&mut r, n, &[1, 2], 2);
        let v2 = random_space(&mut r, n, &[3, 4], 2);
        let Some(wt) = certify(&[&v1, &v2], d, n) else { continue };
        let b1 = verify_biwa(&wt, &v1).unwrap();
        let b2 = verify_biwa(&wt, &v2).unwrap();
        let prods: Vec<Vec<u16>> =
            b1.iter().flat_map(|x| b2.iter().map(move |y| [x.clone(), y.clone()].concat())).collect();
        let parts: Vec<usize> = (1..=d).collect();
        let p = default_primes(n, d, 4).into_iter().find(|&p| separates(p, n, &parts, &prods)).unwrap();
        let combined = wt.extend(|i, j| ab_weight(p, n, i, j));
        if verify_biwa(&combined, &v1.product(&v2).unwrap()).is_none() {
            prod_fail += 1;
        }
        prod_pairs += 1;
    }
    check(
        over + inconsistent + sub_fail + prod_fail == 0,
        format!(
            "200 monomial sets: {over} over C(r,2)·n², {inconsistent} pairwise disagreements; \
             {sub_pairs} subspace pairs ({sub_fail} failures); {prod_pairs} product pairs ({prod_fail} failures)"
        ),
    )
}

fn c5_known_shape() -> Outcome {
    let (mut circuits, mut nonzero, mut missed, mut false_nonzero) = (0, 0, 0, 0);
    let (mut image_over, mut literal_over, mut sampled) = (0, 0, 0);
    for d in 1..=8 {
        let mut shapes = vec![balanced_shape(d), left_comb_shape(d)];
        shapes.dedup();
        for t in &shapes {
            for c in fixed_shape_family(t) {
                circuits += 1;
                let is_nonzero = !expand(&c, DEFAULT_MAX_TERMS).unwrap().is_zero();
                let rep = known_shape_pit(&c, t, 2).unwrap();
                if is_nonzero {
                    nonzero += 1;
                    missed += usize::from(!rep.nonzero);
                } else {
                    false_nonzero += usize::from(rep.nonzero);
                }
                let bound = c.n() * rep.width.pow(rep.depth as u32);
                image_over += usize::from(rep.max_image_degree > bound);
                // the whole univariate is expensive to expand; sample it
                if circuits % 16 == 1 {
                    sampled += 1;
                    let images = gks_substitution(&t.collapsed(), rep.width, c.n()).unwrap();
                    let uni = substituted_univariate(&c, &images).unwrap();
                    literal_over += usize::from(uni.degree().unwrap_or(0) > bound);
                }
            }
        }
    }
    let mut r = rng(1005);
    let mut bivariate_fail = 0;
    for _ in 0..500 {
        let w = r.random_range(1..=3);
        let deg = r.random_range(0..=4);
        let poly = |r: &mut ChaCha8Rng| UPoly::from_coeffs((0..=deg).map(|_| Fp::new(r.random_range(0..3))).collect());
        let pairs: Vec<(UPoly, UPoly)> = (0..w).map(|_| (poly(&mut r), poly(&mut r))).collect();
        let zero = (0..=deg).all(|a| (0..=deg).all(|b| pairs.iter().map(|(u, v)| u.coeff(a) * v.coeff(b)).sum::<Fp>().is_zero()));
        bivariate_fail += usize::from(gks_bivariate(&pairs, w).is_zero() != zero);
    }
    let detail = format!(
        "{circuits} fixed-shape circuits, {nonzero} nonzero, {missed} missed, {false_nonzero} false nonzero; \
         image degree ≤ n·w^depth on all but {image_over}; bivariate step: {bivariate_fail} failures on 500; \
         whole univariate degree above n·w^depth on {literal_over} of {sampled} sampled"
    );
    if missed + false_nonzero + image_over + bivariate_fail > 0 {
        return check(false, detail);
    }
    if literal_over > 0 {
        return Outcome {
            status: Status::Documented(
                "n·w^depth bounds the degree of each substituted variable, not of the whole univariate: \
                 y11·y21 with n = 1, w = 1 and one product level becomes t·(t + 1), of degree 2 > 1",
            ),
            detail,
        };
    }
    pass(detail)
}

fn sml(c: &Circuit) -> SmlPolynomial {
    SmlCircuit::from_circuit(c.clone()).polynomial(DEFAULT_MAX_TERMS).unwrap()
}

fn random_sml(r: &mut ChaCha8Rng, n: usize, d: usize, terms: usize) -> SmlPolynomial {
    let t: Vec<(Vec<u16>, Fp)> = (0..terms)
        .map(|_| ((0..d).map(|_| r.random_range(1..=n as u16)).collect(), Fp::new(r.random_range(1..7))))
        .collect();
    SmlPolynomial::from_terms(n, (1..=d).collect(), t).unwrap()
}

/// The four bullets recomputed from the witness vectors.
fn bullets_hold(wit: &ncpit::fewpt::UptWitness, f: &SmlPolynomial, g: &SmlPolynomial, w: usize) -> bool {
    let Ok(rep) = wit.check(f, g, w) else { return false };
    let combo = |v: &[SmlPolynomial]| {
        v.iter().zip(&wit.gamma).fold(SmlPolynomial::zero(f.n(), v[0].parts().to_vec()).unwrap(), |acc, (x, c)| {
            acc.add(&x.scale(*c)).unwrap()
        })
    };
    combo(&wit.p).is_zero()
        && !combo(&wit.q).is_zero()
        && wit.gamma.iter().filter(|c| !c.is_zero()).count() <= w + 1
        && rep.r_rank == wit.w_prime()
}

fn c6_fewpt() -> Outcome {
    let mut r = rng(1006);
    let (mut sum_bad, mut count_bad) = (0, 0);
    for trial in 0..200 {
        let k = 1 + trial % 3;
        let d = r.random_range(3..=6);
        let mut shapes: Vec<Shape> = Vec::new();
        while shapes.len() < k {
            let s = random_shape(&mut r, d, 0.3);
            if !shapes.contains(&s) {
                shapes.push(s);
            }
        }
        let c = random_fewpt_circuit(&mut r, &shapes, &UptParams::new(2, 2)).unwrap();
        let sum = fewpt_to_sum(&c, 3).unwrap();
        sum_bad += usize::from(sum.expand(DEFAULT_MAX_TERMS).unwrap() != brute_poly(&c));
        count_bad += usize::from(sum.len() != shape_set(&c, 3).unwrap().len());
    }
    let (mut witnesses, mut at_leaf, mut at_product, mut bullet_fail) = (0, 0, 0, 0);
    let mut other_errors = 0;
    let mut try_one = |c: &Circuit, g: &SmlPolynomial, f: &SmlPolynomial| {
        let w = preimage_width(c).unwrap();
        match common_upt_witness(c, g, w) {
            Ok(wit) => {
                witnesses += 1;
                if wit.at_leaf { at_leaf += 1 } else { at_product += 1 }
                bullet_fail += usize::from(!bullets_hold(&wit, f, g, w));
            }
            Err(Error::NoViolation) => {}
            Err(_) => other_errors += 1,
        }
    };
    for trial in 0..100 {
        let shape = random_shape(&mut r, 4, 0.2);
        let c = random_upt_circuit(&mut r, &shape, &UptParams::new(2, 2)).unwrap();
        let f = sml(&c);
        let g = if trial % 2 == 0 {
            f.add(&random_sml(&mut r, 2, 4, 1)).unwrap()
        } else {
            let terms = r.random_range(1..6);
            random_sml(&mut r, 2, 4, terms)
        };
        try_one(&c, &g, &f);
    }
    for c in width_two_family(4).iter().step_by(5).take(200) {
        let f = sml(c);
        if f.is_zero() {
            continue;
        }
        let g = f.add(&random_sml(&mut r, 2, 4, 1)).unwrap();
        try_one(c, &g, &f);
    }
    check(
        sum_bad + count_bad + bullet_fail + other_errors == 0 && at_leaf > 0 && at_product > 0,
        format!(
            "200 FewPT circuits: {sum_bad} sum mismatches, {count_bad} member-count mismatches; \
             {witnesses} witnesses ({at_leaf} at leaves, {at_product} at products), {bullet_fail} failing a bullet, \
             {other_errors} errors"
        ),
    )
}

fn c7_hard() -> Outcome {
    let mut problems = Vec::new();
    let mut max_ratio = 0.0f64;
    for m in 1..=4 {
        for d in 1..=4 {
            let c = tree_coloring_circuit(m, d).unwrap();
            if c.size() > 8 * m * m * d {
                problems.push(format!("P_{d} at m={m} has {} gates", c.size()));
            }
            max_ratio = max_ratio.max(c.size() as f64 / (m * m * d) as f64);
            if check_upt(&c).is_err() {
                problems.push(format!("P_{d} at m={m} is not UPT"));
            }
            let small = (m as u128).pow(1 << d) <= 1 << 16;
            if small && expand(&c, 1 << 20).unwrap() != tree_coloring_brute(m, d).unwrap() {
                problems.push(format!("P_{d} at m={m} differs from enumeration"));
            }
        }
    }
    for n in 1..=3 {
        for d in 1..=6 {
            let (p, _) = palindrome(n, 2 * d).unwrap();
            let sigma = palindrome_interleave(2 * d).unwrap();
            if p.shuffle(&sigma).unwrap() != square_sum_power(n, d).unwrap() {
                problems.push(format!("shuffled Pal_{} over {n} letters", 2 * d));
            }
        }
    }
    let (_, p) = tree_coloring_poly(2, 2).unwrap();
    let k = alternating_k(tree_size(2));
    let sweep = shuffled_rank_sweep(&p, k).unwrap();
    if sweep.min_rank < 2 || sweep.permutations != 5040 {
        problems.push(format!("sweep {sweep:?}"));
    }
    check(
        problems.is_empty(),
        format!(
            "gates/(m²d) at most {max_ratio:.2}; palindrome identity for n ≤ 3, d ≤ 6; \
             rank M_{k} over all {} shufflings of P_2 (m=2): min {}, max {}{}",
            sweep.permutations,
            sweep.min_rank,
            sweep.max_rank,
            if problems.is_empty() { String::new() } else { format!("; problems: {problems:?}") }
        ),
    )
}

fn c8_golden() -> Outcome {
    let (mut files, mut broken) = (0, Vec::new());
    for (name, text) in golden_corpus() {
        let path = golden_dir().join(&name);
        let on_disk = std::fs::read_to_string(&path).unwrap_or_default();
        let back = if name.ends_with(".circuit") {
            Circuit::from_text(&on_disk).map(|c| c.to_text())
        } else {
            NcPolynomial::from_text(&on_disk).and_then(|p| p.to_text())
        };
        files += 1;
        if on_disk != text || back.as_deref() != Ok(on_disk.as_str()) {
            broken.push(name);
        }
    }
    check(broken.is_empty(), format!("{files} golden files, byte-exact: {}", if broken.is_empty() { "all".into() } else { format!("not {broken:?}") }))
}

fn main() {
    // harness=false targets also receive libtest flags; a name filter that
    // excludes this suite skips it
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 depth-reduction exactness", c1_depth_reduction),
        ("2 gate-quotient identities", c2_quotient_identities),
        ("3 hitting-set completeness", c3_hitting_sets),
        ("4 BIWA lemmas", c4_biwa),
        ("5 known-shape constant-width PIT", c5_known_shape),
        ("6 FewPT decomposition and witnesses", c6_fewpt),
        ("7 hard polynomials", c7_hard),
        ("8 format stability", c8_golden),
    ];
    let mut undocumented = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = match out.status {
            Status::Pass => "PASS".to_string(),
            Status::Fail => {
                undocumented += 1;
                "FAIL".to_string()
            }
            Status::Documented(_) => "FAIL (documented)".to_string(),
        };
        println!("[{tag}] criterion {name}: {} ({secs:.1}s)", out.detail);
        if let Status::Documented(why) = out.status {
            println!("        reason: {why}");
        }
    }
    if undocumented > 0 {
        std::process::exit(1);
    }
}
