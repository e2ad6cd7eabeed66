//! Dense exact linear algebra over the prime field.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Fp;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fp>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Fp::ZERO; rows * cols] }
    }

    pub fn identity(k: usize) -> Matrix {
        let mut m = Matrix::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = Fp::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fp>]) -> Result<Matrix> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Like [`from_rows`](Self::from_rows) with an explicit width, so empty row lists keep their shape.
    pub fn from_rows_with_cols(rows: &[Vec<Fp>], cols: usize) -> Result<Matrix> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("row length differs from column count".into()));
        }
        Ok(Matrix { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Fp] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Fp> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("matrix sum of different shapes".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: Fp) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| *x * c).collect() }
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Fp]) -> Vec<Fp> {
        let mut out = vec![Fp::ZERO; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (o, b) in out.iter_mut().zip(self.row(i)) {
                *o += a * *b;
            }
        }
        out
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].inv().unwrap();
            for j in c..m.cols {
                m[(r, j)] *= inv;
            }
            for i in 0..m.rows {
                if i != r {
                    let f = m[(i, c)];
                    if !f.is_zero() {
                        for j in c..m.cols {
                            let v = m[(r, j)];
                            m[(i, j)] -= f * v;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self · x = 0}`, as column vectors.
    pub fn nullspace(&self) -> Vec<Vec<Fp>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Fp::ZERO; self.cols];
                x[f] = Fp::ONE;
                for (i, &pc) in pivots.iter().enumerate() {
                    x[pc] = -r[(i, f)];
                }
                x
            })
            .collect()
    }

    /// Basis of `{y : y · self = 0}`.
    pub fn left_nullspace(&self) -> Vec<Vec<Fp>> {
        self.transpose().nullspace()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let k = self.rows;
        let mut aug = Matrix::zeros(k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, k + i)] = Fp::ONE;
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < k || pivots[k - 1] >= k {
            return None;
        }
        let mut inv = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                inv[(i, j)] = r[(i, k + j)];
            }
        }
        Some(inv)
    }

    /// Coefficients `c` with `Σ c_i · row_i = v`, if `v` is in the row span.
    pub fn solve_rows(&self, v: &[Fp]) -> Option<Vec<Fp>> {
        let mut span = EchelonSpan::new(self.cols);
        for i in 0..self.rows {
            span.insert_tracked(self.row(i), i, self.rows);
        }
        span.express(v, self.rows)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Fp;
    fn index(&self, (i, j): (usize, usize)) -> &Fp {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Fp {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// An incrementally grown subspace of `𝔽^dim`, kept in echelon form.
///
/// Each stored vector optionally remembers how it was built from the
/// inserted inputs, so membership queries can return explicit combinations.
#[derive(Clone, Debug)]
pub struct EchelonSpan {
    dim: usize,
    // (pivot column, normalized vector with 1 at pivot, combination over inputs)
    basis: Vec<(usize, Vec<Fp>, Vec<Fp>)>,
}

impl EchelonSpan {
    pub fn new(dim: usize) -> EchelonSpan {
        EchelonSpan { dim, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    fn reduce(&self, v: &mut [Fp], combo: &mut [Fp]) {
        for (pc, b, bc) in &self.basis {
            let f = v[*pc];
            if f.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(b) {
                *x -= f * *y;
            }
            for (x, y) in combo.iter_mut().zip(bc) {
                *x -= f * *y;
            }
        }
    }

    pub fn contains(&self, v: &[Fp]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w, &mut []);
        w.iter().all(|x| x.is_zero())
    }

    /// Adds `v`; returns whether it enlarged the span.
    pub fn insert(&mut self, v: &[Fp]) -> bool {
        self.insert_tracked(v, 0, 0)
    }

    /// Adds `v`, recording it as input number `idx` out of `total` inputs.
    pub fn insert_tracked(&mut self, v: &[Fp], idx: usize, total: usize) -> bool {
        assert_eq!(v.len(), self.dim, "vector length differs from span dimension");
        let mut w = v.to_vec();
        let mut combo = vec![Fp::ZERO; total];
        if total > 0 {
            combo[idx] = Fp::ONE;
        }
        for (_, _, bc) in self.basis.iter_mut() {
            bc.resize(total, Fp::ZERO);
        }
        self.reduce(&mut w, &mut combo);
        let Some(pc) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[pc].inv().unwrap();
        for x in w.iter_mut() {
            *x *= inv;
        }
        for x in combo.iter_mut() {
            *x *= inv;
        }
        // keep the basis fully reduced on pivot columns
        for (_, b, bc) in self.basis.iter_mut() {
            let f = b[pc];
            if !f.is_zero() {
                for (x, y) in b.iter_mut().zip(&w) {
                    *x -= f * *y;
                }
                for (x, y) in bc.iter_mut().zip(&combo) {
                    *x -= f * *y;
                }
            }
        }
        self.basis.push((pc, w, combo));
        true
    }

    /// Combination of tracked inputs equal to `v`, if `v` lies in the span.
    pub fn express(&self, v: &[Fp], total: usize) -> Option<Vec<Fp>> {
        let mut w = v.to_vec();
        let mut combo = vec![Fp::ZERO; total];
        for (pc, b, bc) in &self.basis {
            let f = w[*pc];
            if f.is_zero() {
                continue;
            }
            for (x, y) in w.iter_mut().zip(b) {
                *x -= f * *y;
            }
            for (x, y) in combo.iter_mut().zip(bc) {
                *x += f * *y;
            }
        }
        w.iter().all(|x| x.is_zero()).then_some(combo)
    }
}
