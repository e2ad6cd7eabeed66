//! Identity testing for UPT circuits of known shape and small preimage-width
//! by a univariate substitution.
//!
//! Each leaf gets a signature: the sequence of `L`/`R` turns from the root.
//! With `φ_L(t) = t^w` and `φ_R(t) = t^w + t^{w-1}`, the variable `y_{i,j}`
//! of a leaf with signature `a_1…a_r` becomes `t^j` composed through
//! `φ_{a_r}`, then `φ_{a_{r-1}}`, …, then `φ_{a_1}`. This is the same as
//! substituting bottom-up at every product node `t_L ← φ_L(t)`,
//! `t_R ← φ_R(t)`, which preserves non-zeroness when the characteristic
//! exceeds the degree.

use crate::circuit::{canonicalize, check_upt, eval_scalar_typed, preimage_width, Circuit, GateKind, Shape, ShapeKind, TypeMap};
use crate::error::{Error, Result};
use crate::field::{modulus, Fp};
use crate::upoly::UPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    L,
    R,
}

/// Turns from the root to leaf `leaf` (1-based, left to right). `+` nodes
/// add nothing.
pub fn signature(t: &Shape, leaf: usize) -> Result<Vec<Side>> {
    if leaf == 0 || leaf > t.degree() {
        return Err(Error::OutOfRange(format!("leaf {leaf} of a shape with {} leaves", t.degree())));
    }
    let mut sig = Vec::new();
    let mut node = t.clone();
    let mut k = leaf;
    loop {
        let next = match node.kind() {
            ShapeKind::Leaf => return Ok(sig),
            ShapeKind::Const => unreachable!("constants have no leaves"),
            ShapeKind::Plus(c) => c.clone(),
            ShapeKind::Times(a, b) | ShapeKind::TimesP(_, a, b) => {
                if k <= a.degree() {
                    sig.push(Side::L);
                    a.clone()
                } else {
                    k -= a.degree();
                    sig.push(Side::R);
                    b.clone()
                }
            }
        };
        node = next;
    }
}

/// `φ_L = t^w`, `φ_R = t^w + t^{w-1}`.
pub fn phi(side: Side, w: usize) -> UPoly {
    match side {
        Side::L => UPoly::monomial(w),
        Side::R => UPoly::monomial(w).add(&UPoly::monomial(w - 1)),
    }
}

/// The image of `y_{i,j}` for a leaf with signature `sig`.
pub fn gks_image(sig: &[Side], j: usize, w: usize) -> UPoly {
    sig.iter().rev().fold(UPoly::monomial(j), |g, &a| g.compose(&phi(a, w)))
}

/// `images[i-1][j-1]` is the image of `y_{i,j}`.
pub fn gks_substitution(t: &Shape, w: usize, n: usize) -> Result<Vec<Vec<UPoly>>> {
    if w == 0 {
        return Err(Error::InvalidArgument("width must be positive".into()));
    }
    (1..=t.degree())
        .map(|i| {
            let sig = signature(t, i)?;
            Ok((1..=n).map(|j| gks_image(&sig, j, w)).collect())
        })
        .collect()
}

/// `u(t^w)·v(t^w + t^{w-1})` summed over the pairs: the bivariate step.
pub fn gks_bivariate(pairs: &[(UPoly, UPoly)], w: usize) -> UPoly {
    let (l, r) = (phi(Side::L, w), phi(Side::R, w));
    pairs.iter().fold(UPoly::zero(), |acc, (u, v)| acc.add(&u.compose(&l).mul(&v.compose(&r))))
}

/// Degree bound `D* = Σ_i max_j deg(image(y_{i,j}))` of the substituted univariate.
pub fn substituted_degree_bound(images: &[Vec<UPoly>]) -> usize {
    images.iter().map(|row| row.iter().filter_map(UPoly::degree).max().unwrap_or(0)).sum()
}

/// `f(Ψ(y))` computed exactly over `F[t]`, from the closed-form images.
pub fn substituted_univariate(c: &Circuit, images: &[Vec<UPoly>]) -> Result<UPoly> {
    let c = canonicalize(c)?;
    let Some(root) = c.root() else {
        return Ok(UPoly::zero());
    };
    let tm = TypeMap::new(&c)?;
    let mut vals: Vec<UPoly> = Vec::with_capacity(c.size());
    for (id, g) in c.gates().iter().enumerate() {
        let v = match g.kind {
            GateKind::Var(j) => images[tm.flat().left(tm.type_of(id))][j as usize - 1].clone(),
            GateKind::Const(a) => UPoly::constant(a),
            GateKind::Plus => g.children.iter().fold(UPoly::zero(), |acc, ch| acc.add(&vals[ch.id].scale(ch.weight()))),
            GateKind::Times | GateKind::TimesP(_) => vals[g.children[0].id].mul(&vals[g.children[1].id]),
        };
        vals.push(v);
    }
    Ok(vals.swap_remove(root))
}

/// The same univariate by the bottom-up process: every gate holds a
/// polynomial in its own node's variable; a product node substitutes
/// `φ_L` into its left input and `φ_R` into its right one.
pub fn iterative_univariate(c: &Circuit, w: usize) -> Result<UPoly> {
    let Some(root) = c.root() else {
        return Ok(UPoly::zero());
    };
    check_upt(c)?;
    let (l, r) = (phi(Side::L, w), phi(Side::R, w));
    let mut vals: Vec<UPoly> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let v = match g.kind {
            GateKind::Var(j) => UPoly::monomial(j as usize),
            GateKind::Const(a) => UPoly::constant(a),
            GateKind::Plus => g.children.iter().fold(UPoly::zero(), |acc, ch| acc.add(&vals[ch.id].scale(ch.weight()))),
            GateKind::Times | GateKind::TimesP(_) => {
                vals[g.children[0].id].compose(&l).mul(&vals[g.children[1].id].compose(&r))
            }
        };
        vals.push(v);
    }
    Ok(vals.swap_remove(root))
}

#[derive(Clone, Debug)]
pub struct KnownShapeReport {
    pub nonzero: bool,
    /// Measured preimage-width, used in the `φ` exponents.
    pub width: usize,
    /// Number of product levels of the shape.
    pub depth: usize,
    /// `D*`: the univariate is evaluated at `D* + 1` points.
    pub degree_bound: usize,
    /// Largest degree of a single image; at most `n·w^depth`.
    pub max_image_degree: usize,
    pub points_evaluated: usize,
}

/// Tests a UPT circuit whose shape (ignoring `+` nodes) is `t` and whose
/// preimage-width is at most `w`.
pub fn known_shape_pit(c: &Circuit, t: &Shape, w: usize) -> Result<KnownShapeReport> {
    let Some(_) = c.root() else {
        return Ok(KnownShapeReport {
            nonzero: false,
            width: 0,
            depth: 0,
            degree_bound: 0,
            max_image_degree: 0,
            points_evaluated: 0,
        });
    };
    let have = check_upt(c)?.collapsed();
    let want = t.collapsed();
    if have.degree() == 0 {
        let c0 = crate::circuit::expand(c, 1)?;
        let nonzero = !c0.is_zero();
        return Ok(KnownShapeReport { nonzero, width: 1, depth: 0, degree_bound: 0, max_image_degree: 0, points_evaluated: 0 });
    }
    if have != want {
        return Err(Error::ShapeMismatch(format!("circuit has shape {have}, expected {want}")));
    }
    let width = preimage_width(c)?;
    if width > w {
        return Err(Error::InvalidArgument(format!("preimage-width {width} exceeds the promised {w}")));
    }
    let images = gks_substitution(&want, width, c.n())?;
    let degree_bound = substituted_degree_bound(&images);
    if (degree_bound as u64) >= modulus() {
        return Err(Error::FieldTooSmall(format!("characteristic {} is not above the degree {degree_bound}", modulus())));
    }
    let max_image_degree = images.iter().flatten().filter_map(UPoly::degree).max().unwrap_or(0);
    let canon = canonicalize(c)?;
    let tm = TypeMap::new(&canon)?;
    let mut nonzero = false;
    let mut points = 0;
    for a in 0..=degree_bound as u64 {
        let alpha = Fp::new(a);
        let vals: Vec<Vec<Fp>> = images.iter().map(|row| row.iter().map(|g| g.eval(alpha)).collect()).collect();
        points += 1;
        if !eval_scalar_typed(&canon, &tm, |p, j| vals[p][j - 1]).is_zero() {
            nonzero = true;
            break;
        }
    }
    Ok(KnownShapeReport {
        nonzero,
        width,
        depth: want.product_height(),
        degree_bound,
        max_image_degree,
        points_evaluated: points,
    })
}
