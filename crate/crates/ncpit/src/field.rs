//! Prime field arithmetic.
//!
//! The modulus is process-wide. It is read once, from [`set_modulus`] if that
//! was called first, otherwise from the `NCPIT_PRIME` environment variable,
//! otherwise [`DEFAULT_PRIME`].

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// The Mersenne prime 2^61 - 1.
pub const DEFAULT_PRIME: u64 = (1 << 61) - 1;

/// Environment variable consulted for the modulus.
pub const PRIME_ENV: &str = "NCPIT_PRIME";

static MODULUS: OnceLock<u64> = OnceLock::new();

fn check_prime(q: u64) -> Result<u64> {
    if q >= 1 << 62 {
        return Err(Error::InvalidModulus(q, "must be below 2^62"));
    }
    if !primal_check::miller_rabin(q) {
        return Err(Error::InvalidModulus(q, "not prime"));
    }
    Ok(q)
}

/// Fixes the modulus for the rest of the process.
///
/// Fails if `q` is not a prime below 2^62, or if a different modulus is
/// already in use.
pub fn set_modulus(q: u64) -> Result<()> {
    let q = check_prime(q)?;
    let got = *MODULUS.get_or_init(|| q);
    if got != q {
        return Err(Error::ModulusLocked(got));
    }
    Ok(())
}

/// The modulus in use.
pub fn modulus() -> u64 {
    *MODULUS.get_or_init(|| {
        let from_env = std::env::var(PRIME_ENV).ok().and_then(|s| s.trim().parse::<u64>().ok());
        match from_env.map(check_prime) {
            Some(Ok(q)) => q,
            _ => DEFAULT_PRIME,
        }
    })
}

/// An element of the prime field, stored as its residue in `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp(u64);

pub type FieldElement = Fp;

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    pub fn new(v: u64) -> Fp {
        let q = modulus();
        Fp(if v >= q { v % q } else { v })
    }

    pub fn from_i64(v: i64) -> Fp {
        if v >= 0 {
            Fp::new(v as u64)
        } else {
            -Fp::new(v.unsigned_abs())
        }
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(self) -> Option<Fp> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow(modulus() - 2))
        }
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Fp {
    fn from(v: u64) -> Fp {
        Fp::new(v)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let q = modulus();
        let s = self.0 + rhs.0;
        Fp(if s >= q { s - q } else { s })
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        if self.0 >= rhs.0 {
            Fp(self.0 - rhs.0)
        } else {
            Fp(self.0 + modulus() - rhs.0)
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        Fp(((self.0 as u128 * rhs.0 as u128) % modulus() as u128) as u64)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.0 == 0 {
            self
        } else {
            Fp(modulus() - self.0)
        }
    }
}

impl AddAssign for Fp {
    fn add_assign(&mut self, rhs: Fp) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fp {
    fn sub_assign(&mut self, rhs: Fp) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fp {
    fn mul_assign(&mut self, rhs: Fp) {
        *self = *self * rhs;
    }
}

impl Sum for Fp {
    fn sum<I: Iterator<Item = Fp>>(iter: I) -> Fp {
        iter.fold(Fp::ZERO, |a, b| a + b)
    }
}

impl Product for Fp {
    fn product<I: Iterator<Item = Fp>>(iter: I) -> Fp {
        iter.fold(Fp::ONE, |a, b| a * b)
    }
}
