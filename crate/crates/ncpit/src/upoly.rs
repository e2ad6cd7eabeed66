//! Dense univariate polynomials in `t` over the prime field.

use std::fmt;

use crate::field::Fp;

/// Coefficients in increasing degree, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UPoly(Vec<Fp>);

impl UPoly {
    pub fn zero() -> UPoly {
        UPoly(Vec::new())
    }

    pub fn constant(c: Fp) -> UPoly {
        UPoly::from_coeffs(vec![c])
    }

    /// `t^k`
    pub fn monomial(k: usize) -> UPoly {
        let mut v = vec![Fp::ZERO; k + 1];
        v[k] = Fp::ONE;
        UPoly(v)
    }

    pub fn from_coeffs(mut v: Vec<Fp>) -> UPoly {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        UPoly(v)
    }

    pub fn coeffs(&self) -> &[Fp] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> Fp {
        self.0.get(k).copied().unwrap_or(Fp::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let n = self.0.len().max(other.0.len());
        UPoly::from_coeffs((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        self.add(&other.scale(-Fp::ONE))
    }

    pub fn scale(&self, c: Fp) -> UPoly {
        UPoly::from_coeffs(self.0.iter().map(|x| *x * c).collect())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut v = vec![Fp::ZERO; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                v[i + j] += *a * *b;
            }
        }
        UPoly::from_coeffs(v)
    }

    pub fn pow(&self, mut e: usize) -> UPoly {
        let mut base = self.clone();
        let mut acc = UPoly::constant(Fp::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `self(g(t))`
    pub fn compose(&self, g: &UPoly) -> UPoly {
        // Horner
        let mut acc = UPoly::zero();
        for c in self.0.iter().rev() {
            acc = acc.mul(g).add(&UPoly::constant(*c));
        }
        acc
    }

    pub fn eval(&self, t: Fp) -> Fp {
        self.0.iter().rev().fold(Fp::ZERO, |acc, c| acc * t + *c)
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}t")?,
                _ => write!(f, "{c}t^{k}")?,
            }
        }
        Ok(())
    }
}
