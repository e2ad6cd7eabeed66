//! Evaluation of circuits on matrices and on set-multilinear points.

use super::canonical::TypeMap;
use super::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::linalg::Matrix;

/// Evaluates an ordinary circuit with `x_j ↦ mats[j-1]`.
pub fn eval_matrix(c: &Circuit, mats: &[Matrix]) -> Result<Matrix> {
    if c.is_otimes() {
        return Err(Error::InvalidArgument("matrix evaluation needs an ordinary circuit".into()));
    }
    if mats.len() < c.n() {
        return Err(Error::Dimension(format!("{} matrices for {} variables", mats.len(), c.n())));
    }
    let k = mats.first().map_or(1, Matrix::rows);
    if mats.iter().any(|m| m.rows() != k || m.cols() != k) {
        return Err(Error::Dimension("substituted matrices must all be square of one size".into()));
    }
    let Some(root) = c.root() else {
        return Ok(Matrix::zeros(k, k));
    };
    let mut vals: Vec<Matrix> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let v = match g.kind {
            GateKind::Var(j) => mats[j as usize - 1].clone(),
            GateKind::Const(a) => Matrix::identity(k).scale(a),
            GateKind::Plus => {
                let mut acc = Matrix::zeros(k, k);
                for ch in &g.children {
                    acc = acc.add(&vals[ch.id].scale(ch.weight()))?;
                }
                acc
            }
            GateKind::Times => vals[g.children[0].id].mul(&vals[g.children[1].id])?,
            GateKind::TimesP(_) => unreachable!("checked above"),
        };
        vals.push(v);
    }
    Ok(vals.swap_remove(root))
}

/// The substitution `x_j ↦ Φ(x_j)`: a `(d+1)×(d+1)` matrix with `y_{i,j}`
/// at position `(i, i+1)` (1-based) and zeros elsewhere.
///
/// For a degree-`d` polynomial `f`, entry `(1, d+1)` of `f(Φ)` is `Ψ(f)(y)`.
pub fn phi_matrices(d: usize, n: usize, y: impl Fn(usize, usize) -> Fp) -> Vec<Matrix> {
    (1..=n)
        .map(|j| {
            let mut m = Matrix::zeros(d + 1, d + 1);
            for i in 1..=d {
                m[(i - 1, i)] = y(i, j);
            }
            m
        })
        .collect()
}

/// Evaluates `Ψ(f)` for a canonical UPT circuit directly in the field: a
/// leaf of type with `p` leaves to its left reads `leaf(p, j)`.
pub fn eval_scalar_typed(c: &Circuit, types: &TypeMap, leaf: impl Fn(usize, usize) -> Fp) -> Fp {
    let Some(root) = c.root() else {
        return Fp::ZERO;
    };
    let mut vals: Vec<Fp> = Vec::with_capacity(c.size());
    for (id, g) in c.gates().iter().enumerate() {
        let v = match g.kind {
            GateKind::Var(j) => leaf(types.flat().left(types.type_of(id)), j as usize),
            GateKind::Const(a) => a,
            GateKind::Plus => g.children.iter().map(|ch| ch.weight() * vals[ch.id]).sum(),
            GateKind::Times | GateKind::TimesP(_) => vals[g.children[0].id] * vals[g.children[1].id],
        };
        vals.push(v);
    }
    vals[root]
}
